//! Pulling representations apart along one-parameter centralizer families.
//!
//! A representation of an amalgam, HNN extension or free product can be
//! deformed by conjugating one side (or twisting the stable letter) with an
//! element ν of the centralizer μ = Z(ρ(C)) of the edge image: the defining
//! relations survive verbatim, while traces of mixed words move. This module
//! computes μ exactly as a conjugated model subgroup, rewrites deformed test
//! words as word templates in the model parameter, and uses exact root
//! isolation to pick ν with tr²∘ρ_ν certified away from any finite list of
//! forbidden values (4, the parabolic trace square, is always on the list).
//!
//! The three stages are independent entry points:
//!
//! * [`OneParamSubgroup::centralizer_of`] — exact eigenvector conjugation
//!   onto a model subgroup, with honest errors when the needed square root
//!   leaves the working quadratic field;
//! * [`pull_apart_free`], [`pull_apart_free_stable`], [`pull_apart_amalgam`],
//!   [`pull_apart_hnn`] — the deformed representations themselves;
//! * [`find_avoiding_parameter`] — the certified search, which returns the
//!   parameter together with per-(word, target) root-free evidence.

pub mod fricke;
pub mod lift;

pub use fricke::{fricke_pair, genus2_amalgam_base, punctured_torus_rep, punctured_torus_rep_f64};
pub use lift::{lift_deformation, LiftedRep};

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::baumslag::{
    solve_trace_squared, trace_polynomial, BaumslagError, ModelSubgroup, WordTemplate,
};
use crate::circle::CircleError;
use crate::moebius::{
    parabolic_commutator_test, IsometryClass, Mat2, MoebiusElement, MoebiusError,
};
use crate::scalar::{rat_frac, rat_i64, rat_to_f64, Quad, Rat, Ring};
use crate::words::{
    cyclically_reduce, enumerate_ball, freely_reduce, hnn_normal_form, in_elliptic_conjugacy_set,
    Presentation, Representation, Word, WordError,
};

#[derive(Debug, Error)]
pub enum PullError {
    #[error("deformation parameter does not centralize the edge image (residual {residual:.2e})")]
    ParameterNotInCentralizer { residual: f64 },
    #[error("exact arithmetic required: {0}")]
    ExactModeRequired(String),
    #[error("computation leaves the working quadratic field: {0}")]
    FieldObstruction(String),
    #[error("trace of {word} is constantly {value} along the family; avoidance is impossible")]
    ConstantTrace { word: String, value: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no parameter found for {what} inside the window {window}")]
    NoSolutionInWindow { what: String, window: String },
    #[error("target commutator trace {value} is degenerate: the commutator would be reducible")]
    DegenerateTarget { value: String },
    #[error("relation {relation} has lift translation {translation}; the action does not lift")]
    NotLiftable { relation: String, translation: i64 },
    #[error("re-evaluated |tr²({word}) − {target}| = {margin:.2e}, below the certification floor")]
    MarginTooSmall {
        word: String,
        target: String,
        margin: f64,
    },
    #[error("word problem: {0}")]
    Word(#[from] WordError),
    #[error("matrix problem: {0}")]
    Moebius(#[from] MoebiusError),
    #[error("trace-curve problem: {0}")]
    Baumslag(#[from] BaumslagError),
    #[error("circle-map problem: {0}")]
    Circle(#[from] CircleError),
}

/// Floating-point commutation tolerance for centralizer membership.
pub const CENTRALIZER_EPS: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Exact square roots in a quadratic field.
// ---------------------------------------------------------------------------

fn rational_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let sn = r.numer().sqrt();
    let sd = r.denom().sqrt();
    if &sn * &sn == *r.numer() && &sd * &sd == *r.denom() {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// m > 0 as s²·f with f free of square factors below 10⁶ (and of any huge
/// square tail, caught by a perfect-square test).
fn split_square(m: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut f = m.clone();
    for p in 2u64..=1000 {
        let pp = BigInt::from(p * p);
        if &pp > &f {
            break;
        }
        while (&f % &pp).is_zero() {
            f /= &pp;
            s *= p;
        }
    }
    let r = f.sqrt();
    if &r * &r == f {
        s *= &r;
        f = BigInt::one();
    }
    (s, f)
}

/// √v inside a single real quadratic field, when it exists there.
///
/// Rational v ≥ 0 always has one (with a fresh radicand when v is not a
/// perfect square); a + b√d has one exactly when the field norm a² − b²d is a
/// rational square and the half-trace equation solves rationally.
pub fn quad_sqrt(v: &Quad) -> Option<Quad> {
    match v.sign() {
        -1 => None,
        0 => Some(Quad::zero()),
        _ if v.is_rational() => {
            let r = v.rat_part();
            if let Some(s) = rational_sqrt(r) {
                return Some(Quad::from_rat(s));
            }
            let m = r.numer() * r.denom();
            let (sq, f) = split_square(&m);
            let fu = f.to_u64()?;
            Some(Quad::new(Rat::zero(), Rat::new(sq, r.denom().clone()), fu))
        }
        _ => {
            let d = rat_i64(v.radicand() as i64);
            let a = v.rat_part();
            let b = v.sqrt_part();
            let norm = a * a - b * b * &d;
            let sn = rational_sqrt(&norm)?;
            let two = rat_i64(2);
            for sign in [1i64, -1] {
                let t = (a + rat_i64(sign) * &sn) / &two;
                if t.is_negative() {
                    continue;
                }
                let x = match rational_sqrt(&t) {
                    Some(x) if !x.is_zero() => x,
                    _ => continue,
                };
                let y = b / (&two * &x);
                let cand = Quad::new(x, y, v.radicand());
                if &cand * &cand == *v {
                    return Some(cand);
                }
            }
            None
        }
    }
}

// ---------------------------------------------------------------------------
// One-parameter centralizer subgroups.
// ---------------------------------------------------------------------------

fn collect_radicands(m: &Mat2<Quad>, out: &mut BTreeSet<u64>) {
    for row in &m.e {
        for entry in row {
            if entry.radicand() != 0 {
                out.insert(entry.radicand());
            }
        }
    }
}

fn field_conflict(fields: &BTreeSet<u64>) -> PullError {
    let list: Vec<String> = fields.iter().map(|d| format!("sqrt({d})")).collect();
    PullError::FieldObstruction(format!("entries span {}", list.join(", ")))
}

fn mat_scale(m: &Mat2<Quad>, k: &Quad) -> Mat2<Quad> {
    Mat2::new(
        &m.e[0][0] * k,
        &m.e[0][1] * k,
        &m.e[1][0] * k,
        &m.e[1][1] * k,
    )
}

/// A one-parameter subgroup U·model(t)·U⁻¹ with an exact GL₂⁺ conjugator U.
///
/// U is kept unnormalized (det > 0 but not 1): conjugation by U and by
/// U/√det U are the same map, and dividing by the determinant after the
/// triple product keeps every entry in the working field.
#[derive(Clone, Debug)]
pub struct OneParamSubgroup {
    kind: ModelSubgroup,
    conj: Mat2<Quad>,
    det: Quad,
}

impl OneParamSubgroup {
    /// The standard model subgroup of the given kind, unconjugated.
    pub fn standard(kind: ModelSubgroup) -> Self {
        OneParamSubgroup {
            kind,
            conj: Mat2::identity(),
            det: Quad::one(),
        }
    }

    /// The model subgroup of `kind` moved by an exact conjugator.
    pub fn conjugated_standard(
        kind: ModelSubgroup,
        by: &MoebiusElement,
    ) -> Result<Self, PullError> {
        let m = by.exact_real().ok_or_else(|| {
            PullError::ExactModeRequired("subgroup conjugators must be exact".into())
        })?;
        Ok(OneParamSubgroup {
            kind,
            conj: m.clone(),
            det: Quad::one(),
        })
    }

    /// The centralizer Z(g) of a non-identity exact element, as the
    /// one-parameter subgroup through g: eigenvectors of g's matrix form the
    /// conjugator columns (hyperbolic/parabolic), or the fixed point in the
    /// upper half-plane gives an affine conjugator (elliptic). Fails with
    /// [`PullError::FieldObstruction`] when the discriminant's square root
    /// leaves the matrix entries' quadratic field.
    pub fn centralizer_of(g: &MoebiusElement) -> Result<Self, PullError> {
        if g.is_identity() {
            return Err(PullError::Precondition(
                "the identity centralizes everything; the edge image must be nontrivial".into(),
            ));
        }
        let m = g.exact_real().ok_or_else(|| {
            PullError::ExactModeRequired("centralizers are computed from exact matrices".into())
        })?;
        let mut fields = BTreeSet::new();
        collect_radicands(m, &mut fields);
        if fields.len() > 1 {
            return Err(field_conflict(&fields));
        }
        let base_d = fields.into_iter().next().unwrap_or(0);
        let compatible = |s: &Quad| -> Result<(), PullError> {
            if s.radicand() != 0 && base_d != 0 && s.radicand() != base_d {
                let mut set = BTreeSet::new();
                set.insert(base_d);
                set.insert(s.radicand());
                return Err(field_conflict(&set));
            }
            Ok(())
        };
        let tr = m.trace();
        let four = Quad::from_i64(4);
        let tsq = &tr * &tr;
        let half = Quad::from_rat(rat_frac(1, 2));
        let (a, b) = (m.e[0][0].clone(), m.e[0][1].clone());
        let (c, d) = (m.e[1][0].clone(), m.e[1][1].clone());
        match tsq.cmp(&four) {
            std::cmp::Ordering::Greater => {
                let s = quad_sqrt(&(&tsq - &four)).ok_or_else(|| {
                    PullError::FieldObstruction(format!(
                        "sqrt of the discriminant tr² − 4 = {} is not in the working field",
                        &tsq - &four
                    ))
                })?;
                compatible(&s)?;
                let lp = &(&tr + &s) * &half;
                let lm = &(&tr - &s) * &half;
                let mut u = if !c.is_zero() {
                    Mat2::new(&lp - &d, &lm - &d, c.clone(), c.clone())
                } else if !b.is_zero() {
                    Mat2::new(b.clone(), b.clone(), &lp - &a, &lm - &a)
                } else {
                    Mat2::identity()
                };
                if u.det().sign() < 0 {
                    u = Mat2::new(
                        u.e[0][1].clone(),
                        u.e[0][0].clone(),
                        u.e[1][1].clone(),
                        u.e[1][0].clone(),
                    );
                }
                let det = u.det();
                debug_assert!(det.sign() > 0);
                Ok(OneParamSubgroup {
                    kind: ModelSubgroup::Hyperbolic,
                    conj: u,
                    det,
                })
            }
            std::cmp::Ordering::Equal => {
                let lam = &tr * &half;
                let u = if c.is_zero() {
                    Mat2::identity()
                } else {
                    let v1 = &lam - &d;
                    if !v1.is_zero() {
                        Mat2::new(v1.clone(), Quad::zero(), c.clone(), v1.inv())
                    } else {
                        Mat2::new(Quad::zero(), c.inv().rneg(), c.clone(), Quad::zero())
                    }
                };
                Ok(OneParamSubgroup {
                    kind: ModelSubgroup::Parabolic,
                    det: Quad::one(),
                    conj: u,
                })
            }
            std::cmp::Ordering::Less => {
                let s = quad_sqrt(&(&four - &tsq)).ok_or_else(|| {
                    PullError::FieldObstruction(format!(
                        "sqrt of 4 − tr² = {} is not in the working field",
                        &four - &tsq
                    ))
                })?;
                compatible(&s)?;
                // Elliptic with c = 0 would have real eigenvalues, so c ≠ 0.
                let two_c = &c + &c;
                let x = &(&a - &d) * &two_c.inv();
                let y = &s * &two_c.abs().inv();
                let u = Mat2::new(y.clone(), x, Quad::zero(), Quad::one());
                Ok(OneParamSubgroup {
                    kind: ModelSubgroup::Elliptic,
                    conj: u,
                    det: y,
                })
            }
        }
    }

    pub fn kind(&self) -> ModelSubgroup {
        self.kind
    }

    /// U·m·U⁻¹ with the determinant divided out, so the result is unimodular.
    fn gl_conj(&self, m: &Mat2<Quad>) -> Mat2<Quad> {
        mat_scale(&self.conj.mul(m).mul(&self.conj.adjugate()), &self.det.inv())
    }

    /// U⁻¹·m·U, the coordinate change that turns μ-words into model-subgroup
    /// word templates.
    fn gl_reduce(&self, m: &Mat2<Quad>) -> Mat2<Quad> {
        mat_scale(&self.conj.adjugate().mul(m).mul(&self.conj), &self.det.inv())
    }

    /// The exact point at a rational chart coordinate: the hyperbolic chart
    /// is the eigenvalue λ (diag(λ, 1/λ), λ ≠ 0; λ and −λ are the same
    /// projective element), the parabolic chart is the shear amount, and the
    /// elliptic chart is u = tan(t/2) as in the unit-circle root reports.
    pub fn point(&self, coord: &Rat) -> Result<MoebiusElement, PullError> {
        let model: Mat2<Quad> = match self.kind {
            ModelSubgroup::Hyperbolic => {
                if coord.is_zero() {
                    return Err(PullError::Precondition(
                        "the hyperbolic chart excludes the eigenvalue 0".into(),
                    ));
                }
                let lam = Quad::from_rat(coord.clone());
                Mat2::new(lam.clone(), Quad::zero(), Quad::zero(), lam.inv())
            }
            ModelSubgroup::Parabolic => Mat2::new(
                Quad::one(),
                Quad::from_rat(coord.clone()),
                Quad::zero(),
                Quad::one(),
            ),
            ModelSubgroup::Elliptic => MoebiusElement::elliptic_exact(coord.clone())
                .exact_real()
                .expect("rational rotations are exact")
                .clone(),
        };
        Ok(MoebiusElement::from_quad(self.gl_conj(&model))?)
    }

    /// The hyperbolic-chart point at an exact eigenvalue in the working
    /// field (the chart value of the defining element itself usually lives
    /// in ℚ(√d) rather than ℚ).
    pub fn point_eigenvalue(&self, lambda: &Quad) -> Result<MoebiusElement, PullError> {
        if self.kind != ModelSubgroup::Hyperbolic {
            return Err(PullError::Precondition(
                "eigenvalue coordinates only parametrize hyperbolic subgroups".into(),
            ));
        }
        if lambda.is_zero() {
            return Err(PullError::Precondition(
                "the hyperbolic chart excludes the eigenvalue 0".into(),
            ));
        }
        let model = Mat2::new(lambda.clone(), Quad::zero(), Quad::zero(), lambda.inv());
        Ok(MoebiusElement::from_quad(self.gl_conj(&model))?)
    }

    /// Rewrite an exact element in model coordinates (U⁻¹·g·U).
    pub fn reduce(&self, g: &MoebiusElement) -> Result<MoebiusElement, PullError> {
        let m = g.exact_real().ok_or_else(|| {
            PullError::ExactModeRequired("template coefficients must be exact".into())
        })?;
        let mut fields = BTreeSet::new();
        collect_radicands(m, &mut fields);
        collect_radicands(&self.conj, &mut fields);
        if fields.len() > 1 {
            return Err(field_conflict(&fields));
        }
        Ok(MoebiusElement::from_quad(self.gl_reduce(m))?)
    }

    /// True when g lies on this subgroup: its reduced matrix has the model
    /// shape (diagonal / unit triangular / rotation) exactly.
    pub fn contains(&self, g: &MoebiusElement) -> bool {
        let Ok(r) = self.reduce(g) else { return false };
        let Some(m) = r.exact_real() else {
            return false;
        };
        let (a, b) = (&m.e[0][0], &m.e[0][1]);
        let (c, d) = (&m.e[1][0], &m.e[1][1]);
        match self.kind {
            ModelSubgroup::Hyperbolic => b.is_zero() && c.is_zero(),
            ModelSubgroup::Parabolic => c.is_zero() && a == d,
            ModelSubgroup::Elliptic => a == d && *b == c.rneg(),
        }
    }

    /// Approximate boundary fixed set of the subgroup (empty for elliptic):
    /// used when choosing an axis away from a ball's fixed points.
    pub fn axis_endpoints(&self) -> Vec<f64> {
        let coord = match self.kind {
            ModelSubgroup::Hyperbolic => rat_i64(2),
            ModelSubgroup::Parabolic => rat_i64(1),
            ModelSubgroup::Elliptic => return vec![],
        };
        let Ok(p) = self.point(&coord) else {
            return vec![];
        };
        match p.fixed_points() {
            Ok(fps) => fps.into_iter().map(|f| f.theta).collect(),
            Err(_) => vec![],
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.label(),
            "conjugator": self.conj.e.iter().map(|row| {
                row.iter().map(|q| q.to_string()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "det": self.det.to_string(),
        })
    }
}

impl ModelSubgroup {
    fn label(&self) -> &'static str {
        match self {
            ModelSubgroup::Hyperbolic => "hyperbolic",
            ModelSubgroup::Parabolic => "parabolic",
            ModelSubgroup::Elliptic => "elliptic",
        }
    }
}

// ---------------------------------------------------------------------------
// Deformation families.
// ---------------------------------------------------------------------------

/// How the parameter enters the deformed representation.
#[derive(Clone, Debug)]
pub enum Structure {
    /// A∗B with the B-generators conjugated by ν.
    FreeConjugate,
    /// A∗⟨s⟩ with s ↦ ν directly.
    FreeStable { stable: String },
    /// A∗_C B with the B-side conjugated by ν ∈ Z(ρ(C)).
    Amalgam,
    /// HNN extension with the stable letter twisted to ρ(s)·ν.
    ///
    /// The relation s·c·s⁻¹ = φ(c) forces the twist onto the side of C (the
    /// domain of φ), so right multiplication by ν ∈ Z(ρ(C)) is the
    /// well-defined version. Which branch of the faithfulness argument
    /// applies (s centralizing C, or C and C^s non-conjugate in the base) is
    /// recorded as a user assertion plus whatever evidence can be checked.
    Hnn {
        stable_centralizes_edge: bool,
        evidence: Vec<String>,
    },
}

/// A base representation together with the one-parameter family it deforms
/// along. `mu` is `None` when the base is floating-point; the pull-apart
/// operations still work (commutation is checked numerically), but the
/// certified parameter search requires the exact subgroup.
#[derive(Clone, Debug)]
pub struct DeformationFamily {
    pub base: Representation,
    pub structure: Structure,
    pub mu: Option<OneParamSubgroup>,
    pub nu: MoebiusElement,
}

fn exact_base(rep: &Representation) -> bool {
    rep.images.values().all(|m| m.exact_real().is_some())
}

impl DeformationFamily {
    /// Family over an amalgam: μ = Z(ρ(C)) through the edge image.
    pub fn amalgam(base: Representation) -> Result<Self, PullError> {
        let Presentation::Amalgam { c_in_a, .. } = &base.presentation else {
            return Err(PullError::Precondition(
                "amalgam families need an amalgam presentation".into(),
            ));
        };
        base.validate()?;
        let edge = base.evaluate(&c_in_a.clone())?;
        let mu = if exact_base(&base) {
            Some(OneParamSubgroup::centralizer_of(&edge)?)
        } else {
            None
        };
        Ok(DeformationFamily {
            base,
            structure: Structure::Amalgam,
            mu,
            nu: MoebiusElement::identity(),
        })
    }

    /// Family over an HNN extension: μ = Z(ρ(c)) through the edge image.
    ///
    /// `stable_centralizes_edge` is the user's branch assertion. When it
    /// claims ρ(s) ∈ Z(ρ(c)) the commutation is checked outright; otherwise
    /// the constructor records what it can verify (distinct edge traces
    /// certify non-conjugacy) and otherwise marks the assertion user-supplied.
    pub fn hnn(base: Representation, stable_centralizes_edge: bool) -> Result<Self, PullError> {
        let Presentation::Hnn { c, c_image, stable, .. } = base.presentation.clone() else {
            return Err(PullError::Precondition(
                "HNN families need an HNN presentation".into(),
            ));
        };
        base.validate()?;
        let edge = base.evaluate(&c)?;
        let mut evidence = vec![];
        if stable_centralizes_edge {
            let s = base.image(&stable)?.clone();
            let lhs = s.compose(&edge);
            let rhs = edge.compose(&s);
            let ok = if lhs.is_exact() && rhs.is_exact() {
                lhs == rhs
            } else {
                lhs.approx_dist(&rhs) <= CENTRALIZER_EPS
            };
            if !ok {
                return Err(PullError::Precondition(
                    "asserted that the stable letter centralizes the edge, but the images do not commute"
                        .into(),
                ));
            }
            evidence.push("stable letter commutes with the edge image (checked)".into());
        } else {
            let there = base.evaluate(&c)?;
            let back = base.evaluate(&c_image)?;
            if (there.trace_sq_f64() - back.trace_sq_f64()).abs() > 1e-9 {
                evidence.push(
                    "edge and its image have distinct trace squares: non-conjugacy certified"
                        .into(),
                );
            } else {
                evidence.push(
                    "non-conjugacy of the edge with its image is asserted by the caller".into(),
                );
            }
        }
        let mu = if exact_base(&base) {
            Some(OneParamSubgroup::centralizer_of(&edge)?)
        } else {
            None
        };
        Ok(DeformationFamily {
            base,
            structure: Structure::Hnn {
                stable_centralizes_edge,
                evidence,
            },
            mu,
            nu: MoebiusElement::identity(),
        })
    }

    /// Family over a free product A∗B. There is no edge constraint, so μ is
    /// a free choice: a hyperbolic subgroup whose axis endpoints stay clear
    /// of the fixed points of every ball element up to `radius`.
    pub fn free_conjugate(
        rho_a: &Representation,
        rho_b: &Representation,
        radius: u32,
    ) -> Result<Self, PullError> {
        let base = glue_free(rho_a, rho_b)?;
        let mu = if exact_base(&base) {
            Some(choose_free_axis(&base, &base.presentation.clone(), radius)?)
        } else {
            None
        };
        Ok(DeformationFamily {
            base,
            structure: Structure::FreeConjugate,
            mu,
            nu: MoebiusElement::identity(),
        })
    }

    /// Family over A∗⟨s⟩ with the stable generator mapped straight to ν.
    pub fn free_stable(rho_a: &Representation, stable: &str, radius: u32) -> Result<Self, PullError> {
        let pres = Presentation::free_product(
            rho_a.presentation.clone(),
            Presentation::free(&[stable]),
        );
        pres.validate()?;
        let mut images = rho_a.images.clone();
        images.insert(stable.to_string(), MoebiusElement::identity());
        let base = Representation {
            presentation: pres,
            images,
        };
        let mu = if exact_base(rho_a) {
            Some(choose_free_axis(&base, &rho_a.presentation.clone(), radius)?)
        } else {
            None
        };
        Ok(DeformationFamily {
            base,
            structure: Structure::FreeStable {
                stable: stable.to_string(),
            },
            mu,
            nu: MoebiusElement::identity(),
        })
    }

    /// The family at a new parameter value.
    pub fn at(&self, nu: MoebiusElement) -> Self {
        DeformationFamily {
            nu,
            ..self.clone()
        }
    }
}

fn glue_free(
    rho_a: &Representation,
    rho_b: &Representation,
) -> Result<Representation, PullError> {
    let pres = Presentation::free_product(
        rho_a.presentation.clone(),
        rho_b.presentation.clone(),
    );
    pres.validate()?;
    let mut images = rho_a.images.clone();
    images.extend(rho_b.images.clone());
    Ok(Representation {
        presentation: pres,
        images,
    })
}

/// Pick a hyperbolic one-parameter subgroup whose axis endpoints avoid the
/// fixed points of every nontrivial element in the `ball_pres` ball of the
/// given radius. Candidates are the standard axis rotated through a fixed
/// list of exact elliptic turns; each accepted candidate also passes the
/// shared-fixed-configuration commutator test against every ball element.
fn choose_free_axis(
    base: &Representation,
    ball_pres: &Presentation,
    radius: u32,
) -> Result<OneParamSubgroup, PullError> {
    let ball = enumerate_ball(ball_pres, radius)?;
    let mut images = vec![];
    for w in &ball {
        if w.is_identity() {
            continue;
        }
        let img = base.evaluate(w)?;
        if img.is_identity() {
            continue;
        }
        images.push(img);
    }
    let mut fixed = vec![];
    for img in &images {
        if let Ok(fps) = img.fixed_points() {
            fixed.extend(fps.into_iter().map(|f| f.theta));
        }
    }
    let candidates: [Rat; 8] = [
        rat_i64(0),
        rat_frac(1, 4),
        rat_frac(1, 2),
        rat_frac(3, 4),
        rat_i64(1),
        rat_frac(3, 2),
        rat_i64(2),
        rat_i64(3),
    ];
    'cand: for q in candidates {
        let turn = MoebiusElement::elliptic_exact(q);
        let mu = OneParamSubgroup::conjugated_standard(ModelSubgroup::Hyperbolic, &turn)?;
        let ends = mu.axis_endpoints();
        if ends.len() != 2 {
            continue;
        }
        for &e in &ends {
            for &f in &fixed {
                let d = (e - f).abs();
                if d.min(1.0 - d) < 1.0 / 64.0 {
                    continue 'cand;
                }
            }
        }
        let probe = mu.point(&rat_i64(2))?;
        for img in &images {
            if parabolic_commutator_test(&probe, img, CENTRALIZER_EPS) {
                continue 'cand;
            }
        }
        return Ok(mu);
    }
    Err(PullError::Precondition(
        "no sampled axis avoided the fixed-point set of the ball".into(),
    ))
}

// ---------------------------------------------------------------------------
// Pull-apart operations.
// ---------------------------------------------------------------------------

/// A deformed representation plus informational notes (degenerate parameter,
/// indiscreteness witnesses, recorded assertions).
#[derive(Clone, Debug)]
pub struct PulledRep {
    pub rep: Representation,
    pub notes: Vec<String>,
}

fn check_centralizes(edge: &MoebiusElement, nu: &MoebiusElement) -> Result<(), PullError> {
    let lhs = nu.compose(edge);
    let rhs = edge.compose(nu);
    if lhs.is_exact() && rhs.is_exact() {
        if lhs == rhs {
            return Ok(());
        }
        return Err(PullError::ParameterNotInCentralizer {
            residual: lhs.approx_dist(&rhs),
        });
    }
    let residual = lhs.approx_dist(&rhs);
    if residual <= CENTRALIZER_EPS {
        Ok(())
    } else {
        Err(PullError::ParameterNotInCentralizer { residual })
    }
}

/// Finite-order or certified-irrational verdict for an elliptic parameter.
///
/// An exact elliptic element has finite order exactly when its trace square
/// lies on the short list {0, 1, 2, 3, (3±√5)/2} (the values 2cos(2πk/n)²
/// of degree ≤ 2); anything else is a certified irrational rotation and
/// hence an indiscreteness witness. Floating elliptics get a heuristic
/// continued-fraction check instead.
fn elliptic_parameter_note(nu: &MoebiusElement) -> Option<String> {
    let angle = match nu.classify(1e-9) {
        Ok(IsometryClass::Elliptic { angle }) => angle,
        _ => return None,
    };
    let rot = angle / (2.0 * std::f64::consts::PI);
    if let Some(m) = nu.exact_real() {
        let t = m.trace();
        let tsq = &t * &t;
        let golden_plus = Quad::new(rat_frac(3, 2), rat_frac(1, 2), 5);
        let golden_minus = Quad::new(rat_frac(3, 2), rat_frac(-1, 2), 5);
        let finite = [
            Quad::from_i64(0),
            Quad::from_i64(1),
            Quad::from_i64(2),
            Quad::from_i64(3),
            golden_plus,
            golden_minus,
        ]
        .iter()
        .any(|v| *v == tsq);
        if finite {
            None
        } else {
            Some(format!(
                "elliptic parameter with certified irrational rotation number ≈ {rot:.6} \
                 (trace square {tsq} is off the finite-order list): the image subgroup is indiscrete"
            ))
        }
    } else {
        for q in 1..=10_000u64 {
            let p = (rot * q as f64).round();
            if (rot * q as f64 - p).abs() < 1e-9 {
                return None;
            }
        }
        Some(format!(
            "elliptic parameter with empirically irrational rotation number ≈ {rot:.6}: \
             indiscreteness witness"
        ))
    }
}

fn identity_note(nu: &MoebiusElement, notes: &mut Vec<String>) {
    if nu.is_identity() {
        notes.push("parameter is the identity: the deformation is the base representation".into());
    }
}

/// Free product A∗B with the B-generators conjugated by ν.
pub fn pull_apart_free(
    rho_a: &Representation,
    rho_b: &Representation,
    nu: &MoebiusElement,
) -> Result<PulledRep, PullError> {
    let glued = glue_free(rho_a, rho_b)?;
    let mut images = rho_a.images.clone();
    for (g, m) in &rho_b.images {
        images.insert(g.clone(), m.conjugate_by(nu));
    }
    let rep = Representation {
        presentation: glued.presentation,
        images,
    };
    rep.validate()?;
    let mut notes = vec![];
    identity_note(nu, &mut notes);
    notes.extend(elliptic_parameter_note(nu));
    Ok(PulledRep { rep, notes })
}

/// A∗⟨s⟩ with the fresh stable generator mapped to ν itself.
pub fn pull_apart_free_stable(
    rho_a: &Representation,
    stable: &str,
    nu: &MoebiusElement,
) -> Result<PulledRep, PullError> {
    let pres = Presentation::free_product(
        rho_a.presentation.clone(),
        Presentation::free(&[stable]),
    );
    pres.validate()?;
    let mut images = rho_a.images.clone();
    images.insert(stable.to_string(), nu.clone());
    let rep = Representation {
        presentation: pres,
        images,
    };
    rep.validate()?;
    let mut notes = vec![];
    identity_note(nu, &mut notes);
    notes.extend(elliptic_parameter_note(nu));
    Ok(PulledRep { rep, notes })
}

/// Amalgam deformation: B-side conjugated by ν, which must centralize the
/// edge image so both C-inclusions keep agreeing.
pub fn pull_apart_amalgam(
    fam: &DeformationFamily,
    nu: &MoebiusElement,
) -> Result<PulledRep, PullError> {
    let Presentation::Amalgam { b, c_in_a, .. } = &fam.base.presentation else {
        return Err(PullError::Precondition(
            "amalgam deformation needs an amalgam presentation".into(),
        ));
    };
    let edge = fam.base.evaluate(c_in_a)?;
    check_centralizes(&edge, nu)?;
    let right: BTreeSet<String> = b.generators().into_iter().collect();
    let mut images = BTreeMap::new();
    for (g, m) in &fam.base.images {
        let img = if right.contains(g) {
            m.conjugate_by(nu)
        } else {
            m.clone()
        };
        images.insert(g.clone(), img);
    }
    let rep = Representation {
        presentation: fam.base.presentation.clone(),
        images,
    };
    rep.validate()?;
    let mut notes = vec![];
    identity_note(nu, &mut notes);
    notes.extend(elliptic_parameter_note(nu));
    Ok(PulledRep { rep, notes })
}

/// HNN deformation: the stable letter goes to ρ(s)·ν with ν centralizing
/// the edge image, so conjugation by the new stable letter still carries the
/// edge to its image.
pub fn pull_apart_hnn(
    fam: &DeformationFamily,
    nu: &MoebiusElement,
) -> Result<PulledRep, PullError> {
    let Presentation::Hnn { c, stable, .. } = &fam.base.presentation else {
        return Err(PullError::Precondition(
            "HNN deformation needs an HNN presentation".into(),
        ));
    };
    let edge = fam.base.evaluate(c)?;
    check_centralizes(&edge, nu)?;
    let mut images = fam.base.images.clone();
    let s = fam.base.image(stable)?.clone();
    images.insert(stable.clone(), s.compose(nu));
    let rep = Representation {
        presentation: fam.base.presentation.clone(),
        images,
    };
    rep.validate()?;
    let mut notes = vec![];
    identity_note(nu, &mut notes);
    notes.extend(elliptic_parameter_note(nu));
    if let Structure::Hnn { evidence, .. } = &fam.structure {
        notes.extend(evidence.iter().cloned());
    }
    Ok(PulledRep { rep, notes })
}

/// Dispatch on the family's structure.
pub fn pull_apart(fam: &DeformationFamily, nu: &MoebiusElement) -> Result<PulledRep, PullError> {
    match &fam.structure {
        Structure::Amalgam => pull_apart_amalgam(fam, nu),
        Structure::Hnn { .. } => pull_apart_hnn(fam, nu),
        Structure::FreeConjugate => {
            let Presentation::FreeProduct { right, .. } = &fam.base.presentation else {
                return Err(PullError::Precondition(
                    "free-conjugate deformation needs a free-product presentation".into(),
                ));
            };
            let moved: BTreeSet<String> = right.generators().into_iter().collect();
            let mut images = BTreeMap::new();
            for (g, m) in &fam.base.images {
                let img = if moved.contains(g) {
                    m.conjugate_by(nu)
                } else {
                    m.clone()
                };
                images.insert(g.clone(), img);
            }
            let rep = Representation {
                presentation: fam.base.presentation.clone(),
                images,
            };
            rep.validate()?;
            let mut notes = vec![];
            identity_note(nu, &mut notes);
            notes.extend(elliptic_parameter_note(nu));
            Ok(PulledRep { rep, notes })
        }
        Structure::FreeStable { stable } => {
            let mut images = fam.base.images.clone();
            images.insert(stable.clone(), nu.clone());
            let rep = Representation {
                presentation: fam.base.presentation.clone(),
                images,
            };
            rep.validate()?;
            let mut notes = vec![];
            identity_note(nu, &mut notes);
            notes.extend(elliptic_parameter_note(nu));
            Ok(PulledRep { rep, notes })
        }
    }
}

// ---------------------------------------------------------------------------
// Word templates of deformed words.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Item {
    C(MoebiusElement),
    P(i64),
}

fn push_merged(stack: &mut Vec<Item>, item: Item) {
    match (stack.last_mut(), item) {
        (_, Item::C(g)) if g.is_identity() => {}
        (Some(Item::C(top)), Item::C(g)) => {
            let merged = top.compose(&g);
            if merged.is_identity() {
                stack.pop();
            } else {
                *top = merged;
            }
        }
        (Some(Item::P(top)), Item::P(m)) => {
            *top += m;
            if *top == 0 {
                stack.pop();
            }
        }
        (_, it) => stack.push(it),
    }
}

/// Expand ρ_ν(w) as an alternating sequence of constant matrices and powers
/// of the abstract parameter, according to the family structure.
fn expand_word(fam: &DeformationFamily, w: &Word) -> Result<Vec<Item>, PullError> {
    let mut items: Vec<Item> = vec![];
    match &fam.structure {
        Structure::FreeConjugate | Structure::Amalgam => {
            let (left, right) = match &fam.base.presentation {
                Presentation::Amalgam { a, b, .. } => (a.generators(), b.generators()),
                Presentation::FreeProduct { left, right } => {
                    (left.generators(), right.generators())
                }
                _ => {
                    return Err(PullError::Precondition(
                        "conjugation structure needs a two-factor presentation".into(),
                    ))
                }
            };
            let right: BTreeSet<String> = right.into_iter().collect();
            let left: BTreeSet<String> = left.into_iter().collect();
            for (g, e) in w.syllables() {
                let img = fam.base.image(g)?.powi(*e);
                if right.contains(g) {
                    push_merged(&mut items, Item::P(1));
                    push_merged(&mut items, Item::C(img));
                    push_merged(&mut items, Item::P(-1));
                } else if left.contains(g) {
                    push_merged(&mut items, Item::C(img));
                } else {
                    return Err(WordError::UnknownGenerator(g.clone()).into());
                }
            }
        }
        Structure::Hnn { .. } => {
            let Presentation::Hnn { stable, .. } = &fam.base.presentation else {
                return Err(PullError::Precondition(
                    "HNN structure needs an HNN presentation".into(),
                ));
            };
            let s = fam.base.image(stable)?.clone();
            for (g, e) in w.syllables() {
                if g == stable {
                    for _ in 0..e.unsigned_abs() {
                        if *e > 0 {
                            push_merged(&mut items, Item::C(s.clone()));
                            push_merged(&mut items, Item::P(1));
                        } else {
                            push_merged(&mut items, Item::P(-1));
                            push_merged(&mut items, Item::C(s.inverse()));
                        }
                    }
                } else {
                    push_merged(&mut items, Item::C(fam.base.image(g)?.powi(*e)));
                }
            }
        }
        Structure::FreeStable { stable } => {
            for (g, e) in w.syllables() {
                if g == stable {
                    push_merged(&mut items, Item::P(*e));
                } else {
                    push_merged(&mut items, Item::C(fam.base.image(g)?.powi(*e)));
                }
            }
        }
    }
    Ok(items)
}

/// Cyclically normalize (trace is rotation-invariant) and pair constants
/// with the parameter powers that follow them.
fn cyclic_pairs(mut v: Vec<Item>) -> Result<Vec<(MoebiusElement, i64)>, PullError> {
    let no_parameter = || {
        PullError::Precondition(
            "the word does not involve the deformed side; its trace is constant by construction"
                .into(),
        )
    };
    // Merge across the cyclic seam until its two sides have distinct types.
    loop {
        if v.len() < 2 {
            break;
        }
        let seam_same = matches!(
            (&v[0], v.last().unwrap()),
            (Item::C(_), Item::C(_)) | (Item::P(_), Item::P(_))
        );
        if !seam_same {
            break;
        }
        let last = v.pop().unwrap();
        match (last, &mut v[0]) {
            (Item::C(l), Item::C(f)) => {
                let merged = l.compose(f);
                if merged.is_identity() {
                    v.remove(0);
                } else {
                    *f = merged;
                }
            }
            (Item::P(l), Item::P(f)) => {
                *f += l;
                if *f == 0 {
                    v.remove(0);
                }
            }
            _ => unreachable!("seam types were just matched"),
        }
    }
    if v.is_empty() {
        return Err(no_parameter());
    }
    if v.len() == 1 {
        return match v.pop().unwrap() {
            Item::P(m) => Ok(vec![(MoebiusElement::identity(), m)]),
            Item::C(_) => Err(no_parameter()),
        };
    }
    // Rotate so the sequence starts with a constant; alternation plus a
    // heterogeneous seam forces the last item to be a power.
    if matches!(v[0], Item::P(_)) {
        let last = v.pop().unwrap();
        v.insert(0, last);
    }
    let mut pairs = vec![];
    let mut iter = v.into_iter();
    while let Some(item) = iter.next() {
        let Item::C(g) = item else {
            return Err(PullError::Precondition(
                "internal: constants and powers failed to alternate".into(),
            ));
        };
        let Some(Item::P(m)) = iter.next() else {
            return Err(PullError::Precondition(
                "internal: constants and powers failed to alternate".into(),
            ));
        };
        pairs.push((g, m));
    }
    Ok(pairs)
}

/// Rewrite ρ_ν(w) as a word template over the family's model subgroup: the
/// parameter is pulled back through the conjugator, and the constants are
/// reduced to model coordinates.
pub fn template_for_word(fam: &DeformationFamily, w: &Word) -> Result<WordTemplate, PullError> {
    let mu = fam.mu.as_ref().ok_or_else(|| {
        PullError::ExactModeRequired("word templates need the exact one-parameter subgroup".into())
    })?;
    let items = expand_word(fam, w)?;
    let pairs = cyclic_pairs(items)?;
    let mut factors = Vec::with_capacity(pairs.len());
    for (g, m) in pairs {
        factors.push((mu.reduce(&g)?, m));
    }
    Ok(WordTemplate::new(factors)?)
}

// ---------------------------------------------------------------------------
// Certified avoidance.
// ---------------------------------------------------------------------------

/// A finite avoidance job: keep tr²∘ρ_ν of every listed word away from every
/// listed target (4 is always implicitly included) for the selected ν.
#[derive(Clone, Debug)]
pub struct AvoidanceProblem {
    pub words: Vec<Word>,
    pub targets: Vec<Rat>,
    /// Chart window to search; `None` uses a kind-appropriate default that
    /// stays clear of the identity.
    pub window: Option<(Rat, Rat)>,
    /// Exact clearance kept between the chosen coordinate and every
    /// isolating interval.
    pub pad: Rat,
    /// Floor for the numeric re-verification of |tr² − target|.
    pub tol: f64,
}

impl AvoidanceProblem {
    pub fn new(words: Vec<Word>, targets: Vec<Rat>) -> Result<Self, PullError> {
        if words.is_empty() {
            return Err(PullError::Precondition(
                "avoidance needs at least one word".into(),
            ));
        }
        Ok(AvoidanceProblem {
            words,
            targets,
            window: None,
            pad: rat_frac(1, 256),
            tol: 1e-6,
        })
    }
}

/// Root-free evidence for one (word, target) pair.
#[derive(Clone, Debug)]
pub struct AvoidanceEvidence {
    pub word: Word,
    pub target: Rat,
    pub root_count: usize,
    pub intervals: Vec<(Rat, Rat)>,
    /// |tr²∘ρ_ν(word) − target| re-evaluated on the deformed matrices.
    pub residual: f64,
}

/// The certificate returned by [`find_avoiding_parameter`].
#[derive(Clone, Debug)]
pub struct AvoidanceCertificate {
    pub kind: ModelSubgroup,
    pub coordinate: Rat,
    pub window: (Rat, Rat),
    pub evidence: Vec<AvoidanceEvidence>,
    pub min_residual: f64,
    pub notes: Vec<String>,
}

impl AvoidanceCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.label(),
            "coordinate": self.coordinate.to_string(),
            "window": [self.window.0.to_string(), self.window.1.to_string()],
            "min_residual": self.min_residual,
            "notes": self.notes,
            "evidence": self.evidence.iter().map(|e| json!({
                "word": e.word.to_string(),
                "target": e.target.to_string(),
                "root_count": e.root_count,
                "intervals": e.intervals.iter()
                    .map(|(lo, hi)| vec![lo.to_string(), hi.to_string()])
                    .collect::<Vec<_>>(),
                "residual": e.residual,
            })).collect::<Vec<_>>(),
        })
    }
}

fn default_window(kind: ModelSubgroup) -> (Rat, Rat) {
    match kind {
        ModelSubgroup::Hyperbolic => (rat_frac(9, 8), rat_i64(64)),
        ModelSubgroup::Parabolic => (rat_frac(1, 8), rat_i64(64)),
        ModelSubgroup::Elliptic => (rat_frac(1, 32), rat_i64(8)),
    }
}

/// Reject words the avoidance theory does not cover: they must be freely and
/// cyclically reduced, pinch-free, and outside the vertex conjugacy set.
fn screen_word(pres: &Presentation, w: &Word) -> Result<(), PullError> {
    if freely_reduce(w) != *w {
        return Err(PullError::Precondition(format!(
            "word {w} is not freely reduced"
        )));
    }
    if cyclically_reduce(w).0 != *w {
        return Err(PullError::Precondition(format!(
            "word {w} is not cyclically reduced"
        )));
    }
    if matches!(pres, Presentation::Hnn { .. }) && hnn_normal_form(w, pres)? != *w {
        return Err(PullError::Precondition(format!(
            "word {w} has a stable-letter pinch"
        )));
    }
    if in_elliptic_conjugacy_set(w, pres) {
        return Err(PullError::Precondition(format!(
            "word {w} lies in the vertex conjugacy set; avoidance only covers the complement"
        )));
    }
    Ok(())
}

/// Deterministic left-to-right fold over the sorted isolating intervals:
/// start at the window's left edge and hop past every interval, keeping the
/// pad clearance.
fn select_coordinate(
    window: &(Rat, Rat),
    pad: &Rat,
    mut intervals: Vec<(Rat, Rat)>,
) -> Option<Rat> {
    intervals.sort_by(|a, b| a.0.cmp(&b.0));
    let mut candidate = window.0.clone();
    for (lo, hi) in intervals {
        if &candidate + pad < lo {
            break;
        }
        let bumped = &hi + pad;
        if bumped > candidate {
            candidate = bumped;
        }
    }
    (candidate <= window.1).then_some(candidate)
}

/// Search μ for a parameter ν with every tr²∘ρ_ν(q), q ∈ Q, certified away
/// from every target in W ∪ {4}.
///
/// Per (word, target) the trace curve's tr² = target equation is solved by
/// exact root isolation; the returned coordinate keeps the problem's pad
/// clearance from every isolating interval, and the certificate additionally
/// records the numeric residuals of the deformed matrices themselves.
pub fn find_avoiding_parameter(
    fam: &DeformationFamily,
    prob: &AvoidanceProblem,
) -> Result<(MoebiusElement, AvoidanceCertificate), PullError> {
    let mu = fam.mu.as_ref().ok_or_else(|| {
        PullError::ExactModeRequired(
            "avoidance search needs the exact one-parameter subgroup".into(),
        )
    })?;
    for (g, m) in &fam.base.images {
        if m.exact_real().is_none() {
            return Err(PullError::ExactModeRequired(format!(
                "generator {g} has a floating image"
            )));
        }
    }
    for q in &prob.words {
        screen_word(&fam.base.presentation, q)?;
    }
    let mut targets = prob.targets.clone();
    targets.push(rat_i64(4));
    targets.sort();
    targets.dedup();
    let tol_rat = rat_frac(1, 1_000_000_000);
    // Per-word jobs are independent; each builds one trace curve and solves
    // it against every target.
    type WordJob = (Vec<(Rat, usize, Vec<(Rat, Rat)>)>, Vec<(Rat, Rat)>);
    let solved: Result<Vec<(Word, WordJob)>, PullError> = prob
        .words
        .par_iter()
        .map(|q| {
            let tmpl = template_for_word(fam, q)?;
            let curve = trace_polynomial(&tmpl, mu.kind())?;
            if curve.is_constant() {
                return Err(PullError::ConstantTrace {
                    word: q.to_string(),
                    value: curve.to_text(),
                });
            }
            let mut rows = vec![];
            let mut all = vec![];
            for w in &targets {
                let report = solve_trace_squared(&curve, &Quad::from_rat(w.clone()), &tol_rat)?;
                let ivs: Vec<(Rat, Rat)> = report
                    .roots
                    .iter()
                    .map(|r| (r.lo.clone(), r.hi.clone()))
                    .collect();
                all.extend(ivs.iter().cloned());
                rows.push((w.clone(), report.count, ivs));
            }
            Ok((q.clone(), (rows, all)))
        })
        .collect();
    let solved = solved?;
    let window = prob
        .window
        .clone()
        .unwrap_or_else(|| default_window(mu.kind()));
    let mut intervals = vec![];
    for (_, (_, all)) in &solved {
        intervals.extend(all.iter().cloned());
    }
    let coordinate = select_coordinate(&window, &prob.pad, intervals).ok_or_else(|| {
        PullError::NoSolutionInWindow {
            what: "trace avoidance".into(),
            window: format!("[{}, {}]", window.0, window.1),
        }
    })?;
    let nu = mu.point(&coordinate)?;
    let pulled = pull_apart(fam, &nu)?;
    let mut evidence = vec![];
    let mut min_residual = f64::INFINITY;
    for (q, (rows, _)) in solved {
        let tsq = pulled.rep.evaluate(&q)?.trace_sq_f64();
        for (target, root_count, intervals) in rows {
            let residual = (tsq - rat_to_f64(&target)).abs();
            if residual <= prob.tol {
                return Err(PullError::MarginTooSmall {
                    word: q.to_string(),
                    target: target.to_string(),
                    margin: residual,
                });
            }
            min_residual = min_residual.min(residual);
            evidence.push(AvoidanceEvidence {
                word: q.clone(),
                target,
                root_count,
                intervals,
                residual,
            });
        }
    }
    let cert = AvoidanceCertificate {
        kind: mu.kind(),
        coordinate,
        window,
        evidence,
        min_residual,
        notes: pulled.notes,
    };
    Ok((nu, cert))
}

/// The first `count` ball words (radius `radius`) that pass the avoidance
/// screen: reduced, pinch-free, and outside the vertex conjugacy set.
pub fn ball_words_outside_vertex(
    pres: &Presentation,
    radius: u32,
    count: usize,
) -> Result<Vec<Word>, PullError> {
    let mut out = vec![];
    for w in enumerate_ball(pres, radius)? {
        if screen_word(pres, &w).is_ok() {
            out.push(w);
            if out.len() == count {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wd(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn hyp_exact(a: i64, b: i64, c: i64, d: i64) -> MoebiusElement {
        MoebiusElement::from_rational(rat_i64(a), rat_i64(b), rat_i64(c), rat_i64(d)).unwrap()
    }

    #[test]
    fn quad_sqrt_handles_rationals_and_field_elements() {
        assert_eq!(
            quad_sqrt(&Quad::from_rat(rat_frac(9, 4))),
            Some(Quad::from_rat(rat_frac(3, 2)))
        );
        // √12 = 2√3.
        assert_eq!(
            quad_sqrt(&Quad::from_i64(12)),
            Some(Quad::with_sqrt(0, 2, 3))
        );
        // √(p/q) with square parts split out: √(18/25) = (3/5)√2.
        assert_eq!(
            quad_sqrt(&Quad::new(rat_frac(18, 25), Rat::new(0.into(), 1.into()), 0)),
            Some(Quad::new(rat_i64(0), rat_frac(3, 5), 2))
        );
        // (1 + √2)² = 3 + 2√2.
        let v = Quad::with_sqrt(3, 2, 2);
        assert_eq!(quad_sqrt(&v), Some(Quad::with_sqrt(1, 1, 2)));
        // 1 + √2 itself has no square root in ℚ(√2): its norm 1 − 2 < 0.
        assert_eq!(quad_sqrt(&Quad::with_sqrt(1, 1, 2)), None);
        // Negative numbers have none.
        assert_eq!(quad_sqrt(&Quad::from_i64(-3)), None);
        assert_eq!(quad_sqrt(&Quad::zero()), Some(Quad::zero()));
    }

    #[test]
    fn centralizer_of_diagonal_is_the_diagonal_subgroup() {
        let g = MoebiusElement::hyperbolic_exact(Quad::from_i64(2));
        let mu = OneParamSubgroup::centralizer_of(&g).unwrap();
        assert_eq!(mu.kind(), ModelSubgroup::Hyperbolic);
        let p = mu.point(&rat_i64(3)).unwrap();
        assert_eq!(p, MoebiusElement::hyperbolic_exact(Quad::from_i64(3)));
        assert!(mu.contains(&g));
        assert!(p.compose(&g) == g.compose(&p));
    }

    #[test]
    fn centralizer_points_commute_exactly() {
        // tr = 3, discriminant 5: the family lives in ℚ(√5).
        let g = hyp_exact(2, 1, 1, 1);
        let mu = OneParamSubgroup::centralizer_of(&g).unwrap();
        assert_eq!(mu.kind(), ModelSubgroup::Hyperbolic);
        assert!(mu.contains(&g));
        for r in [rat_i64(2), rat_frac(5, 3), rat_frac(-7, 2)] {
            let p = mu.point(&r).unwrap();
            assert!(p.is_exact());
            assert_eq!(p.compose(&g), g.compose(&p), "coordinate {r}");
        }
        assert!(mu.point(&rat_i64(1)).unwrap().is_identity());
        // The defining element sits at its eigenvalue (3+√5)/2.
        let lam = Quad::new(rat_frac(3, 2), rat_frac(1, 2), 5);
        assert_eq!(mu.point_eigenvalue(&lam).unwrap(), g);
    }

    #[test]
    fn parabolic_centralizer_is_the_shear_family() {
        let g = hyp_exact(1, 0, 3, 1);
        let mu = OneParamSubgroup::centralizer_of(&g).unwrap();
        assert_eq!(mu.kind(), ModelSubgroup::Parabolic);
        assert!(mu.contains(&g));
        for r in [rat_i64(1), rat_frac(-2, 5)] {
            let p = mu.point(&r).unwrap();
            assert_eq!(p.compose(&g), g.compose(&p), "coordinate {r}");
        }
    }

    #[test]
    fn elliptic_centralizer_is_the_rotation_family() {
        // Rotation about i by ±π/3 has entries in ℚ(√3).
        let half = rat_frac(1, 2);
        let rt3 = Quad::new(Rat::new(0.into(), 1.into()), half.clone(), 3);
        let m = Mat2::new(
            Quad::from_rat(half.clone()),
            rt3.clone(),
            rt3.rneg(),
            Quad::from_rat(half),
        );
        let g = MoebiusElement::from_quad(m).unwrap();
        let mu = OneParamSubgroup::centralizer_of(&g).unwrap();
        assert_eq!(mu.kind(), ModelSubgroup::Elliptic);
        assert!(mu.contains(&g));
        let p = mu.point(&rat_frac(1, 3)).unwrap();
        assert_eq!(p.compose(&g), g.compose(&p));

        // Moved off-center by an exact shear the family still commutes.
        let shear = MoebiusElement::parabolic_exact(rat_i64(1));
        let h = g.conjugate_by(&shear);
        let mu2 = OneParamSubgroup::centralizer_of(&h).unwrap();
        assert_eq!(mu2.kind(), ModelSubgroup::Elliptic);
        assert!(mu2.contains(&h));
        let q = mu2.point(&rat_frac(2, 7)).unwrap();
        assert_eq!(q.compose(&h), h.compose(&q));
    }

    #[test]
    fn field_obstruction_is_reported() {
        // Entries in ℚ(√2) with tr = 3 need √5 for the eigenvalues.
        let rt2 = Quad::sqrt_d(2);
        let a = rt2.clone();
        let d = &Quad::from_i64(3) - &rt2;
        let c = &(&Quad::from_i64(3) * &rt2) - &Quad::from_i64(3);
        let m = Mat2::new(a, Quad::one(), c, d);
        let g = MoebiusElement::from_quad(m).unwrap();
        match OneParamSubgroup::centralizer_of(&g) {
            Err(PullError::FieldObstruction(_)) => {}
            other => panic!("expected a field obstruction, got {other:?}"),
        }
    }

    #[test]
    fn free_pull_apart_conjugates_the_second_factor() {
        let a = Representation::new(
            Presentation::free(&["a"]),
            [("a".to_string(), MoebiusElement::exp(1.0))],
        );
        let b = Representation::new(
            Presentation::free(&["b"]),
            [("b".to_string(), MoebiusElement::exp(1.0))],
        );
        let nu = MoebiusElement::parabolic(0.75);
        let pulled = pull_apart_free(&a, &b, &nu).unwrap();
        let expect = nu
            .compose(&MoebiusElement::exp(1.0))
            .compose(&nu.inverse());
        assert!(pulled.rep.image("b").unwrap().approx_dist(&expect) < 1e-12);
        assert!(pulled.rep.image("a").unwrap().approx_dist(&MoebiusElement::exp(1.0)) < 1e-12);
        assert!(pulled.notes.is_empty());

        let degenerate = pull_apart_free(&a, &b, &MoebiusElement::identity()).unwrap();
        assert!(degenerate.notes.iter().any(|n| n.contains("identity")));
    }

    #[test]
    fn torsion_orders_survive_conjugation_exactly() {
        // ℤ/2 ∗ ℤ/3 with exact elliptic images.
        let half_turn = hyp_exact(0, 1, -1, 0);
        let third = {
            let half = rat_frac(1, 2);
            let s = Quad::new(Rat::new(0.into(), 1.into()), half.clone(), 3);
            MoebiusElement::from_quad(Mat2::new(
                Quad::from_rat(half.clone()),
                s.clone(),
                s.rneg(),
                Quad::from_rat(half),
            ))
            .unwrap()
        };
        let a = Representation::new(
            Presentation::finite_cyclic("a", 2),
            [("a".to_string(), half_turn)],
        );
        let b = Representation::new(
            Presentation::finite_cyclic("b", 3),
            [("b".to_string(), third)],
        );
        let nu = MoebiusElement::parabolic_exact(rat_frac(5, 3));
        let pulled = pull_apart_free(&a, &b, &nu).unwrap();
        // validate() inside pull_apart_free has already checked exact orders;
        // double-check the conjugated generator explicitly.
        let bb = pulled.rep.image("b").unwrap();
        assert!(bb.powi(3).is_identity());
        assert!(!bb.powi(1).is_identity());
        assert!(bb.is_exact());
    }

    #[test]
    fn free_stable_maps_the_fresh_generator_to_the_parameter() {
        let a = Representation::new(
            Presentation::free(&["a"]),
            [("a".to_string(), MoebiusElement::exp(1.0))],
        );
        let nu = MoebiusElement::rot(1.0);
        let pulled = pull_apart_free_stable(&a, "s", &nu).unwrap();
        assert!(pulled.rep.image("s").unwrap().approx_dist(&nu) < 1e-15);
        assert_eq!(
            pulled.rep.presentation.generators(),
            vec!["a".to_string(), "s".to_string()]
        );
    }

    #[test]
    fn infinite_order_elliptic_parameter_is_flagged() {
        let a = Representation::new(
            Presentation::free(&["a"]),
            [(
                "a".to_string(),
                MoebiusElement::hyperbolic_exact(Quad::from_i64(2)),
            )],
        );
        // tan(θ/4) = 1/2 is off the finite-order trace list.
        let nu = MoebiusElement::elliptic_exact(rat_frac(1, 2));
        let pulled = pull_apart_free_stable(&a, "s", &nu).unwrap();
        assert!(
            pulled.notes.iter().any(|n| n.contains("indiscrete")),
            "notes: {:?}",
            pulled.notes
        );
        // A quarter turn (order 2 in the projective group) is not flagged.
        let nu2 = MoebiusElement::elliptic_exact(rat_i64(1));
        let pulled2 = pull_apart_free_stable(&a, "s", &nu2).unwrap();
        assert!(pulled2.notes.is_empty(), "notes: {:?}", pulled2.notes);
    }

    #[test]
    fn amalgam_rejects_parameters_off_the_centralizer() {
        let base = genus2_amalgam_base();
        let fam = DeformationFamily::amalgam(base).unwrap();
        let bad = MoebiusElement::hyperbolic_exact(Quad::from_i64(2));
        match pull_apart_amalgam(&fam, &bad) {
            Err(PullError::ParameterNotInCentralizer { .. }) => {}
            other => panic!("expected centralizer rejection, got {other:?}"),
        }
        // The identity and genuine μ-points are accepted.
        let mu = fam.mu.as_ref().unwrap();
        let nu = mu.point(&rat_frac(3, 2)).unwrap();
        let pulled = pull_apart_amalgam(&fam, &nu).unwrap();
        assert!(pulled.rep.validate().is_ok());
    }

    #[test]
    fn amalgam_deformation_moves_mixed_traces_and_keeps_relations() {
        let base = genus2_amalgam_base();
        let fam = DeformationFamily::amalgam(base.clone()).unwrap();
        let mu = fam.mu.as_ref().unwrap();
        let nu = mu.point(&rat_i64(2)).unwrap();
        let pulled = pull_apart_amalgam(&fam, &nu).unwrap();

        // A-side words keep their exact images; B-side words move by
        // conjugation; mixed words change trace square.
        let wa = wd("a b");
        assert_eq!(
            pulled.rep.evaluate(&wa).unwrap(),
            base.evaluate(&wa).unwrap()
        );
        let wb = wd("c d^-1");
        assert_eq!(
            pulled.rep.evaluate(&wb).unwrap(),
            base.evaluate(&wb).unwrap().conjugate_by(&nu)
        );
        let mixed = wd("a c");
        let before = base.evaluate(&mixed).unwrap().trace_sq_f64();
        let after = pulled.rep.evaluate(&mixed).unwrap().trace_sq_f64();
        assert!(
            (before - after).abs() > 1e-3,
            "trace² unmoved: {before} vs {after}"
        );
    }

    #[test]
    fn template_trace_matches_direct_evaluation() {
        let base = genus2_amalgam_base();
        let fam = DeformationFamily::amalgam(base).unwrap();
        let mu = fam.mu.as_ref().unwrap();
        for q in [wd("a c"), wd("a c d"), wd("b^-1 d c"), wd("a b c^-1 d")] {
            let tmpl = template_for_word(&fam, &q).unwrap();
            let curve = trace_polynomial(&tmpl, mu.kind()).unwrap();
            for r in [rat_frac(5, 4), rat_i64(2), rat_frac(7, 2)] {
                let nu = mu.point(&r).unwrap();
                let direct = pull_apart_amalgam(&fam, &nu)
                    .unwrap()
                    .rep
                    .evaluate(&q)
                    .unwrap()
                    .trace_sq_f64();
                let via_curve = curve.eval_line(rat_to_f64(&r)).unwrap().powi(2);
                assert!(
                    (direct - via_curve).abs() <= 1e-9 * (1.0 + direct.abs()),
                    "{q} at {r}: {direct} vs {via_curve}"
                );
            }
        }
    }

    #[test]
    fn hnn_deformation_twists_the_stable_letter() {
        // Pants-glued punctured torus: F₂ = ⟨u, v⟩ with s u s⁻¹ = v.
        let u = MoebiusElement::hyperbolic_exact(Quad::from_i64(2));
        let s = MoebiusElement::parabolic_exact(rat_i64(1));
        let v = s.compose(&u).compose(&s.inverse());
        let pres = Presentation::Hnn {
            base: Box::new(Presentation::free(&["u", "v"])),
            c: wd("u"),
            c_image: wd("v"),
            stable: "s".to_string(),
        };
        let base = Representation::new(
            pres,
            [
                ("u".to_string(), u.clone()),
                ("v".to_string(), v),
                ("s".to_string(), s.clone()),
            ],
        );
        let fam = DeformationFamily::hnn(base, false).unwrap();
        let mu = fam.mu.as_ref().unwrap();
        assert_eq!(mu.kind(), ModelSubgroup::Hyperbolic);
        let nu = mu.point(&rat_i64(3)).unwrap();
        let pulled = pull_apart_hnn(&fam, &nu).unwrap();
        assert_eq!(*pulled.rep.image("s").unwrap(), s.compose(&nu));
        // validate() inside has already certified s·u·s⁻¹ = v on the twisted
        // images; make the exactness explicit.
        let sv = pulled.rep.image("s").unwrap();
        assert_eq!(
            sv.compose(&u).compose(&sv.inverse()),
            *pulled.rep.image("v").unwrap()
        );
    }

    #[test]
    fn misasserted_hnn_branch_surfaces_as_constant_trace() {
        // s inverts the edge: C^s = C but s ∉ Z(C). The deformed s*² has
        // constant trace, which the avoidance search must refuse to certify.
        let u = MoebiusElement::hyperbolic_exact(Quad::from_i64(2));
        let s = hyp_exact(0, 1, -1, 0);
        let pres = Presentation::Hnn {
            base: Box::new(Presentation::free(&["u"])),
            c: wd("u"),
            c_image: wd("u^-1"),
            stable: "s".to_string(),
        };
        let base = Representation::new(
            pres,
            [("u".to_string(), u), ("s".to_string(), s)],
        );
        let fam = DeformationFamily::hnn(base, false).unwrap();
        let prob = AvoidanceProblem::new(vec![wd("s^2")], vec![]).unwrap();
        match find_avoiding_parameter(&fam, &prob) {
            Err(PullError::ConstantTrace { word, .. }) => assert_eq!(word, "s^2"),
            other => panic!("expected constant trace, got {other:?}"),
        }
    }

    #[test]
    fn avoidance_on_a_free_pair_certifies_margins() {
        let a = Representation::new(
            Presentation::free(&["a"]),
            [(
                "a".to_string(),
                MoebiusElement::hyperbolic_exact(Quad::from_i64(2)),
            )],
        );
        let b = Representation::new(
            Presentation::free(&["b"]),
            [("b".to_string(), hyp_exact(2, 1, 1, 1))],
        );
        let fam = DeformationFamily::free_conjugate(&a, &b, 2).unwrap();
        let prob = AvoidanceProblem::new(vec![wd("a b")], vec![]).unwrap();
        let (nu, cert) = find_avoiding_parameter(&fam, &prob).unwrap();
        assert!(cert.min_residual > prob.tol);
        // Re-evaluate through the pulled representation.
        let pulled = pull_apart(&fam, &nu).unwrap();
        let t2 = pulled.rep.evaluate(&wd("a b")).unwrap().trace_sq_f64();
        assert!((t2 - 4.0).abs() > 1e-6, "tr² = {t2} too close to 4");
        assert!(!cert.evidence.is_empty());
    }

    #[test]
    fn vertex_words_are_screened_out() {
        let base = genus2_amalgam_base();
        let fam = DeformationFamily::amalgam(base).unwrap();
        let prob = AvoidanceProblem::new(vec![wd("a b")], vec![]).unwrap();
        match find_avoiding_parameter(&fam, &prob) {
            Err(PullError::Precondition(msg)) => {
                assert!(msg.contains("vertex"), "message: {msg}")
            }
            other => panic!("expected a precondition error, got {other:?}"),
        }
    }

    #[test]
    fn genus2_avoidance_certifies_a_word_batch() {
        let base = genus2_amalgam_base();
        let fam = DeformationFamily::amalgam(base.clone()).unwrap();
        let words = ball_words_outside_vertex(&base.presentation, 2, 6).unwrap();
        assert_eq!(words.len(), 6);
        let prob = AvoidanceProblem::new(words.clone(), vec![rat_i64(2), rat_i64(9)]).unwrap();
        let (nu, cert) = find_avoiding_parameter(&fam, &prob).unwrap();
        assert_eq!(cert.evidence.len(), words.len() * 3);
        assert!(cert.min_residual > 1e-6);
        let pulled = pull_apart(&fam, &nu).unwrap();
        assert!(pulled.rep.validate().is_ok());
        // The relation holds exactly after deformation.
        let rel = wd("a b a^-1 b^-1 d c d^-1 c^-1");
        let img = pulled.rep.evaluate(&rel).unwrap();
        assert!(img.is_identity());
    }

    #[test]
    fn deformation_path_keeps_relations_and_moves_traces_continuously() {
        let base = genus2_amalgam_base();
        let fam = DeformationFamily::amalgam(base).unwrap();
        let mu = fam.mu.as_ref().unwrap();
        let q = wd("a c");
        let rel = wd("a b a^-1 b^-1 d c d^-1 c^-1");
        let mut coarse = vec![];
        for i in 0..=8 {
            let r = rat_i64(1) + rat_frac(i, 8);
            let nu = mu.point(&r).unwrap();
            let pulled = pull_apart(&fam, &nu).unwrap();
            assert!(pulled.rep.evaluate(&rel).unwrap().is_identity());
            coarse.push(pulled.rep.evaluate(&q).unwrap().trace_sq_f64());
        }
        let mut fine = vec![];
        for i in 0..=64 {
            let r = rat_i64(1) + rat_frac(i, 64);
            let nu = mu.point(&r).unwrap();
            fine.push(
                pull_apart(&fam, &nu)
                    .unwrap()
                    .rep
                    .evaluate(&q)
                    .unwrap()
                    .trace_sq_f64(),
            );
        }
        let step = |v: &[f64]| {
            v.windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0f64, f64::max)
        };
        // 8× mesh refinement should shrink the largest increment roughly 8×;
        // demand a factor 4 to leave room for curvature.
        assert!(step(&fine) * 4.0 < step(&coarse));
    }

    #[test]
    fn coordinate_selection_is_a_deterministic_fold() {
        let window = (rat_i64(1), rat_i64(10));
        let pad = rat_frac(1, 4);
        // Intervals crowding the left edge push the candidate rightward.
        let intervals = vec![
            (rat_frac(1, 2), rat_frac(3, 2)),
            (rat_frac(3, 2), rat_i64(2)),
            (rat_i64(5), rat_i64(6)),
        ];
        let c = select_coordinate(&window, &pad, intervals).unwrap();
        assert_eq!(c, rat_frac(9, 4));
        // A fully covered window yields nothing.
        let blocked = vec![(rat_i64(0), rat_i64(11))];
        assert!(select_coordinate(&window, &pad, blocked).is_none());
    }
}
