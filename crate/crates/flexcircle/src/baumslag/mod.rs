//! Trace curves of one-parameter word templates, and their exact root theory.
//!
//! A *word template* is an expression φ(ν) = g₁ν^{m₁}g₂ν^{m₂}⋯g_kν^{m_k} with
//! fixed coefficients gᵢ ∈ PSL₂(ℝ) and exponents mᵢ ≠ 0, viewed as a function
//! of the letter ν. Substituting a model one-parameter subgroup for ν turns
//! the trace of φ into a Laurent polynomial in the subgroup parameter:
//!
//! * hyperbolic, ν = diag(z, 1/z) — a Laurent polynomial in z over the entry
//!   field;
//! * parabolic, ν = [[1, z], [0, 1]] — an ordinary polynomial in z;
//! * elliptic, ν conjugate to diag(e^{it}, e^{−it}) — a Laurent polynomial in
//!   z = e^{it} with complex coefficients that is real-valued on |z| = 1.
//!
//! Once the curve is in hand, the interesting questions become exact algebra:
//! *for which ν does tr²∘φ(ν) hit a target x* is root isolation of a cleared
//! polynomial ([`solve_trace_equation`], [`solve_trace_squared`]), and *does
//! |tr∘φ(ν)| eventually exceed every bound* is a leading-coefficient estimate
//! ([`escape_threshold`]). A constant curve signals a degenerate template —
//! typically some gᵢ preserving the fixed-point set of the substituted
//! subgroup — and is reported as such rather than silently producing an empty
//! or full solution set.
//!
//! The companion [`certify`] submodule contains the dynamical counterpart:
//! interval-arithmetic ping-pong certificates for composed attracting
//! families on the circle.

use crate::moebius::{Mat2, MoebiusElement};
use crate::poly::{
    isolate_real_roots, isolate_roots_in, root_bound, unit_circle_profile, Laurent, Poly,
    RootInterval,
};
use crate::scalar::{Quad, QuadC, Rat, Ring};
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

mod certify;

pub use certify::{
    certify_pingpong, certify_schottky, composite_map, image_arc, InclusionRecord,
    PingPongCertificate, PingPongFamily, SchottkyCertificate, SchottkyPair,
};

#[derive(Debug, Error)]
pub enum BaumslagError {
    #[error("word template must have at least one factor")]
    EmptyTemplate,
    #[error("exponent m_{position} is zero; merge the adjacent coefficients instead")]
    ZeroExponent { position: usize },
    #[error("trace curves need exact matrix entries, got floating-point ones")]
    InexactInput,
    #[error("template entries mix quadratic fields sqrt({0}) and sqrt({1})")]
    MixedFields(u64, u64),
    #[error("trace curve is constantly {value}; the template degenerates on this subgroup")]
    ConstantTrace {
        value: String,
        /// For the solvers: whether the constant actually satisfies the
        /// requested equation (so the solution set is everything rather than
        /// empty). `None` when no equation was posed.
        identically_solved: Option<bool>,
    },
    #[error("the elliptic parameter circle is compact; no escape threshold exists")]
    CompactParameter,
    #[error("curve is not real-valued on the unit circle: {0}")]
    NotRealOnCircle(String),
    #[error("ping-pong precondition violated: {0}")]
    Precondition(String),
    #[error("certification failed at resolution {resolution:e}: {detail}")]
    CertificationFailed { resolution: f64, detail: String },
    #[error("circle-map construction failed: {0}")]
    Homeo(#[from] crate::circle::CircleError),
    #[error("matrix operation failed: {0}")]
    Moebius(#[from] crate::moebius::MoebiusError),
}

/// The three model one-parameter subgroups a template letter can range over.
///
/// A general one-parameter subgroup is a conjugate h·μ(t)·h⁻¹ of one of
/// these; since tr(g₁·hμ(t)^{m₁}h⁻¹⋯) = tr((h⁻¹g₁h)·μ(t)^{m₁}⋯), absorbing
/// the conjugator into the coefficients reduces every trace computation to a
/// model subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelSubgroup {
    /// ν(z) = diag(z, 1/z), z > 0; translation along a fixed geodesic.
    Hyperbolic,
    /// ν(z) = [[1, z], [0, 1]]; the shear fixing one boundary point.
    Parabolic,
    /// ν(t) conjugate to diag(e^{it}, e^{−it}); rotation about a fixed
    /// interior point. ν(t + π) = ν(t) in PSL₂, so distinct elements are
    /// parametrized by t ∈ [0, π), and the boundary rotation number of ν(t)
    /// is t/π. In matrix terms ν(t) is [`MoebiusElement::rot`]`(2t)`.
    Elliptic,
}

/// A word template φ(ν) = g₁ν^{m₁}g₂ν^{m₂}⋯g_kν^{m_k}.
///
/// The degenerate pure power ν^m is the template with a single identity
/// coefficient ([`WordTemplate::pure_power`]).
#[derive(Clone, Debug)]
pub struct WordTemplate {
    factors: Vec<(MoebiusElement, i64)>,
}

impl WordTemplate {
    pub fn new(factors: Vec<(MoebiusElement, i64)>) -> Result<Self, BaumslagError> {
        if factors.is_empty() {
            return Err(BaumslagError::EmptyTemplate);
        }
        for (i, (_, m)) in factors.iter().enumerate() {
            if *m == 0 {
                return Err(BaumslagError::ZeroExponent { position: i + 1 });
            }
        }
        Ok(WordTemplate { factors })
    }

    /// The pure power φ(ν) = ν^m.
    pub fn pure_power(m: i64) -> Result<Self, BaumslagError> {
        WordTemplate::new(vec![(MoebiusElement::identity(), m)])
    }

    pub fn factors(&self) -> &[(MoebiusElement, i64)] {
        &self.factors
    }

    /// Σ mᵢ, the image of φ under the exponent homomorphism.
    pub fn exponent_sum(&self) -> i64 {
        self.factors.iter().map(|(_, m)| m).sum()
    }

    /// The exact coefficient matrices, with a consistency check that all
    /// entries live in a single quadratic field.
    fn exact_coefficients(&self) -> Result<Vec<Mat2<Quad>>, BaumslagError> {
        let mut mats = Vec::with_capacity(self.factors.len());
        let mut field: Option<u64> = None;
        for (g, _) in &self.factors {
            let m = g.exact_real().ok_or(BaumslagError::InexactInput)?.clone();
            for row in &m.e {
                for entry in row {
                    let d = entry.radicand();
                    if d == 0 {
                        continue;
                    }
                    match field {
                        None => field = Some(d),
                        Some(f) if f == d => {}
                        Some(f) => return Err(BaumslagError::MixedFields(f, d)),
                    }
                }
            }
            mats.push(m);
        }
        Ok(mats)
    }
}

/// The trace of a word template along a model subgroup, as exact data.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceCurve {
    /// tr∘φ∘ν on a line parameter (hyperbolic or parabolic model).
    Line(Laurent<Quad>),
    /// tr∘φ∘ν in z = e^{it} (elliptic model); real-valued on |z| = 1.
    Circle(Laurent<QuadC>),
}

impl TraceCurve {
    pub fn is_constant(&self) -> bool {
        match self {
            TraceCurve::Line(l) => l.is_constant(),
            TraceCurve::Circle(l) => l.is_constant(),
        }
    }

    /// A constant trace curve means the template degenerates on this
    /// subgroup: some configuration of the gᵢ (typically one preserving the
    /// substituted subgroup's fixed-point set) kills the parameter
    /// dependence, and neither root finiteness nor trace escape can hold.
    pub fn hypothesis_violation(&self) -> bool {
        self.is_constant()
    }

    fn constant_display(&self) -> String {
        match self {
            TraceCurve::Line(l) => l.constant_term().to_string(),
            TraceCurve::Circle(l) => l.constant_term().to_string(),
        }
    }

    /// Evaluate a line curve at z ≠ 0 in floating point.
    pub fn eval_line(&self, z: f64) -> Option<f64> {
        match self {
            TraceCurve::Line(l) => Some(
                l.terms()
                    .map(|(e, c)| c.to_f64() * z.powi(e as i32))
                    .sum(),
            ),
            TraceCurve::Circle(_) => None,
        }
    }

    /// Evaluate a circle curve at z = e^{it} in floating point. The result
    /// is the real part; the imaginary part vanishes up to rounding by the
    /// reality constraint.
    pub fn eval_angle(&self, t: f64) -> Option<f64> {
        match self {
            TraceCurve::Line(_) => None,
            TraceCurve::Circle(l) => Some(
                l.terms()
                    .map(|(e, c)| {
                        let (re, im) = c.to_c64();
                        let (s, co) = (e as f64 * t).sin_cos();
                        re * co - im * s
                    })
                    .sum(),
            ),
        }
    }

    /// Render as `"coef exp; coef exp; …"`, highest exponent first.
    pub fn to_text(&self) -> String {
        fn render<T: Ring + std::fmt::Display>(l: &Laurent<T>) -> String {
            if l.is_zero() {
                return "0 0".into();
            }
            let mut parts: Vec<String> = l
                .terms()
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| format!("{c} {e}"))
                .collect();
            parts.reverse();
            parts.join("; ")
        }
        match self {
            TraceCurve::Line(l) => render(l),
            TraceCurve::Circle(l) => render(l),
        }
    }
}

/// Compute the exact trace curve tr(g₁·ν^{m₁}⋯g_k·ν^{m_k}) of a template
/// along a model subgroup, by symbolic 2×2 multiplication over Laurent
/// polynomials.
///
/// For the elliptic model the computation complexifies: each coefficient is
/// conjugated by the Cayley-type matrix C = [[1, 1], [i, −i]] that
/// diagonalizes rotations, ν becomes diag(z^m, z^{−m}) with z = e^{it}, and
/// the resulting curve has complex coefficients but real values on |z| = 1.
///
/// The result being *constant* is meaningful (see
/// [`TraceCurve::hypothesis_violation`]): it is returned as data, and the
/// downstream solvers turn it into [`BaumslagError::ConstantTrace`].
pub fn trace_polynomial(
    tmpl: &WordTemplate,
    model: ModelSubgroup,
) -> Result<TraceCurve, BaumslagError> {
    let coeffs = tmpl.exact_coefficients()?;
    match model {
        ModelSubgroup::Hyperbolic => {
            let mut acc: Mat2<Laurent<Quad>> = Mat2::identity();
            for (g, &(_, m)) in coeffs.iter().zip(tmpl.factors()) {
                let nu = Mat2::new(
                    Laurent::monomial(m, Quad::one()),
                    Laurent::zero(),
                    Laurent::zero(),
                    Laurent::monomial(-m, Quad::one()),
                );
                acc = acc.mul(&constant_mat(g)).mul(&nu);
            }
            Ok(TraceCurve::Line(acc.trace()))
        }
        ModelSubgroup::Parabolic => {
            let mut acc: Mat2<Laurent<Quad>> = Mat2::identity();
            for (g, &(_, m)) in coeffs.iter().zip(tmpl.factors()) {
                // ν(z)^m = [[1, mz], [0, 1]].
                let nu = Mat2::new(
                    Laurent::constant(Quad::one()),
                    Laurent::monomial(1, Quad::from_i64(m)),
                    Laurent::zero(),
                    Laurent::constant(Quad::one()),
                );
                acc = acc.mul(&constant_mat(g)).mul(&nu);
            }
            Ok(TraceCurve::Line(acc.trace()))
        }
        ModelSubgroup::Elliptic => {
            let (c, c_inv) = cayley();
            let mut acc: Mat2<Laurent<QuadC>> = Mat2::identity();
            for (g, &(_, m)) in coeffs.iter().zip(tmpl.factors()) {
                let gc = complexify(g);
                let h = c_inv.mul(&gc).mul(&c);
                let nu = Mat2::new(
                    Laurent::monomial(m, QuadC::one()),
                    Laurent::zero(),
                    Laurent::zero(),
                    Laurent::monomial(-m, QuadC::one()),
                );
                acc = acc.mul(&constant_mat(&h)).mul(&nu);
            }
            Ok(TraceCurve::Circle(acc.trace()))
        }
    }
}

fn constant_mat<T: Ring>(m: &Mat2<T>) -> Mat2<Laurent<T>> {
    Mat2::new(
        Laurent::constant(m.e[0][0].clone()),
        Laurent::constant(m.e[0][1].clone()),
        Laurent::constant(m.e[1][0].clone()),
        Laurent::constant(m.e[1][1].clone()),
    )
}

fn complexify(m: &Mat2<Quad>) -> Mat2<QuadC> {
    Mat2::new(
        QuadC::from_quad(m.e[0][0].clone()),
        QuadC::from_quad(m.e[0][1].clone()),
        QuadC::from_quad(m.e[1][0].clone()),
        QuadC::from_quad(m.e[1][1].clone()),
    )
}

/// C = [[1, 1], [i, −i]] and C⁻¹ = [[1/2, −i/2], [1/2, i/2]]: the change of
/// basis with C⁻¹·Rot(2t)·C = diag(e^{it}, e^{−it}), entrywise exact over
/// the Gaussian rationals.
fn cayley() -> (Mat2<QuadC>, Mat2<QuadC>) {
    let one = QuadC::one();
    let i = QuadC::i();
    let half = QuadC::from_quad(Quad::from_rat(Rat::new(1.into(), 2.into())));
    let half_i = half.clone() * i.clone();
    let c = Mat2::new(one.clone(), one, i.clone(), -i);
    let c_inv = Mat2::new(half.clone(), -half_i.clone(), half, half_i);
    (c, c_inv)
}

// ---------------------------------------------------------------------------
// Root reports.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveDomain {
    /// Roots of a line curve: the chart coordinate is z itself (z ≠ 0).
    RealLine,
    /// Roots of a circle curve: the chart coordinate is u = tan(t/2) ≥ 0,
    /// covering the elliptic parameter range t ∈ [0, π) once. A root u
    /// corresponds to the element [`MoebiusElement::elliptic_exact`]`(u)`.
    UnitCircle,
}

/// Isolated solution set of a trace equation.
#[derive(Clone, Debug)]
pub struct RootReport {
    pub domain: SolveDomain,
    /// Number of distinct solutions in the parameter domain.
    pub count: usize,
    /// Isolating intervals in the chart coordinate, sorted.
    pub roots: Vec<RootInterval>,
    /// The denominator-cleared polynomial whose roots were isolated (in z
    /// for the line, in u for the circle).
    pub cleared: Poly<Quad>,
}

impl RootReport {
    /// Approximate chart coordinates of the solutions.
    pub fn points(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.midpoint_f64()).collect()
    }

    /// For circle reports: the solution angles t = 2·arctan(u) ∈ [0, π).
    pub fn angles(&self) -> Vec<f64> {
        match self.domain {
            SolveDomain::RealLine => vec![],
            SolveDomain::UnitCircle => self
                .roots
                .iter()
                .map(|r| 2.0 * r.midpoint_f64().atan())
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "domain": match self.domain {
                SolveDomain::RealLine => "real-line",
                SolveDomain::UnitCircle => "unit-circle",
            },
            "count": self.count,
            "roots": self.roots.iter().map(|r| json!({
                "lo": r.lo.to_string(),
                "hi": r.hi.to_string(),
                "exact": r.exact.as_ref().map(|x| x.to_string()),
                "approx": r.midpoint_f64(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Solve tr∘φ∘ν(z) = x exactly: clear denominators and isolate the real (or
/// unit-circle) roots. Isolating intervals are refined to width ≤ `tol`.
///
/// For a line curve the report covers all real z ≠ 0; for the hyperbolic
/// model the subgroup itself is {z > 0}, with z < 0 describing the same
/// elements with the opposite matrix sign (the projective trace is only
/// defined up to sign, which is why [`solve_trace_squared`] is the
/// sign-honest variant). For a circle curve the report covers each elliptic
/// element exactly once via u = tan(t/2) ≥ 0.
pub fn solve_trace_equation(
    p: &TraceCurve,
    x: &Quad,
    tol: &Rat,
) -> Result<RootReport, BaumslagError> {
    solve_curve(p, x, false, tol)
}

/// Solve tr²∘φ∘ν(z) = x exactly; see [`solve_trace_equation`].
pub fn solve_trace_squared(
    p: &TraceCurve,
    x: &Quad,
    tol: &Rat,
) -> Result<RootReport, BaumslagError> {
    solve_curve(p, x, true, tol)
}

fn solve_curve(
    p: &TraceCurve,
    x: &Quad,
    squared: bool,
    tol: &Rat,
) -> Result<RootReport, BaumslagError> {
    if p.is_constant() {
        let solved = match p {
            TraceCurve::Line(l) => {
                let c = l.constant_term();
                let v = if squared { &c * &c } else { c };
                &v - x == Quad::zero()
            }
            TraceCurve::Circle(l) => {
                let c = l.constant_term();
                let v = if squared { &c * &c } else { c };
                v - QuadC::from_quad(x.clone()) == QuadC::zero()
            }
        };
        return Err(BaumslagError::ConstantTrace {
            value: p.constant_display(),
            identically_solved: Some(solved),
        });
    }
    match p {
        TraceCurve::Line(l) => {
            let shifted = if squared { l.mul(l) } else { l.clone() };
            let q = shifted.sub(&Laurent::constant(x.clone()));
            let (cleared, _) = q.numerator();
            let roots = isolate_real_roots(&cleared, tol);
            Ok(RootReport {
                domain: SolveDomain::RealLine,
                count: roots.len(),
                roots,
                cleared,
            })
        }
        TraceCurve::Circle(l) => {
            let shifted = if squared { l.mul(l) } else { l.clone() };
            let q = shifted.sub(&Laurent::constant(QuadC::from_quad(x.clone())));
            let (profile, _at_pi) =
                unit_circle_profile(&q).map_err(BaumslagError::NotRealOnCircle)?;
            // Roots at u = 0 (the identity parameter) sit on the isolation
            // window's endpoint; strip the u^s factor and report them
            // exactly. The value at t = π is ν(π) = ν(0) again, so it never
            // contributes a separate solution.
            let s = profile
                .coeffs()
                .iter()
                .take_while(|c| c.is_zero())
                .count();
            let mut roots = Vec::new();
            if s > 0 {
                roots.push(RootInterval {
                    lo: Rat::zero(),
                    hi: Rat::zero(),
                    exact: Some(Rat::zero()),
                    sign_change: s % 2 == 1,
                });
            }
            let reduced = Poly::new(profile.coeffs()[s..].to_vec());
            if reduced.degree().unwrap_or(0) > 0 {
                let bound = root_bound(&reduced);
                roots.extend(isolate_roots_in(&reduced, &Rat::zero(), &bound, tol));
            }
            Ok(RootReport {
                domain: SolveDomain::UnitCircle,
                count: roots.len(),
                roots,
                cleared: profile,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Escape thresholds.
// ---------------------------------------------------------------------------

/// A certified radius beyond which a line curve exceeds a bound.
///
/// The guarantee is per escaping end: if `at_infinity`, then |p(z)| > B for
/// every |z| ≥ M; if `at_zero`, then |p(z)| > B for every 0 < |z| ≤ 1/M. An
/// end escapes exactly when the curve has a pole there (max_exp > 0,
/// respectively min_exp < 0) — a parabolic trace polynomial, say, escapes at
/// infinity but stays bounded near zero.
#[derive(Clone, Debug)]
pub struct EscapeThreshold {
    pub m: Quad,
    pub at_infinity: bool,
    pub at_zero: bool,
}

impl EscapeThreshold {
    pub fn m_f64(&self) -> f64 {
        self.m.to_f64()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m.to_string(),
            "m_approx": self.m_f64(),
            "at_infinity": self.at_infinity,
            "at_zero": self.at_zero,
        })
    }
}

/// Find M ≥ 1 with |p(z)| > B on the escaping ends (see [`EscapeThreshold`]),
/// by the triangle inequality on the leading coefficient: for |z| ≥ M ≥ 1
/// and top exponent h > 0,
/// |p(z)| ≥ |z|^{h−1}·(|c_h|·|z| − Σ_{e≠h}|c_e|), which exceeds B as soon as
/// |c_h|·M ≥ B + Σ|c_e| + 1. The zero end is the same bound after z ↦ 1/z.
pub fn escape_threshold(p: &TraceCurve, bound: &Quad) -> Result<EscapeThreshold, BaumslagError> {
    let l = match p {
        TraceCurve::Line(l) => l,
        TraceCurve::Circle(_) => return Err(BaumslagError::CompactParameter),
    };
    if l.is_constant() {
        return Err(BaumslagError::ConstantTrace {
            value: p.constant_display(),
            identically_solved: None,
        });
    }
    let b = bound.abs();
    let hi = l.max_exp().expect("nonconstant curve");
    let lo = l.min_exp().expect("nonconstant curve");
    let at_infinity = hi > 0;
    let at_zero = lo < 0;
    let mut m = Quad::one();
    if at_infinity {
        m = quad_max(m, one_end_threshold(l, &b));
    }
    if at_zero {
        let mut rev: Vec<Quad> = l.terms().map(|(_, c)| c.clone()).collect();
        rev.reverse();
        let mirrored = Laurent::new(-hi, rev);
        m = quad_max(m, one_end_threshold(&mirrored, &b));
    }
    Ok(EscapeThreshold {
        m,
        at_infinity,
        at_zero,
    })
}

/// (B + Σ_{e≠h}|c_e| + 1) / |c_h| for the top exponent h of `l`.
fn one_end_threshold(l: &Laurent<Quad>, b: &Quad) -> Quad {
    let hi = l.max_exp().expect("nonconstant curve");
    let lead = l.coeff(hi).abs();
    let mut s = Quad::zero();
    for (e, c) in l.terms() {
        if e != hi {
            s = &s + &c.abs();
        }
    }
    let num = &(b + &s) + &Quad::one();
    &num * &lead.inv()
}

fn quad_max(a: Quad, b: Quad) -> Quad {
    if (&a - &b).sign() >= 0 {
        a
    } else {
        b
    }
}
