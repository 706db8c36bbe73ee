//! Lifting representations and their deformations to the integer-translation
//! cover of the circle.
//!
//! A boundary action lifts to Homeo_ℤ(ℝ) exactly when every defining
//! relation, evaluated on the chosen lifts, is the zero translation. Lift
//! choices per generator differ by integers, so a lifted representation is
//! the circle action plus an integer offset per generator. Deforming along a
//! centralizer family keeps the relation translations at zero — the integer
//! is locally constant along the family and vanishes at the base — and the
//! lift of the parameter itself is only defined up to ℤ, which is the
//! `offset` argument of [`lift_deformation`].

use std::collections::BTreeMap;

use crate::circle::{relation_translations, CircleAction, CircleHomeo};
use crate::moebius::{frac, MoebiusElement};
use crate::words::{Representation, Word};

use super::{pull_apart, DeformationFamily, PullError, Structure};

/// Residual tolerance when reading integer relation translations off
/// composed lifts; genuine Möbius relations land around 1e-12.
const LIFT_RESIDUAL_TOL: f64 = 1e-7;

/// A circle action together with the lift bookkeeping: the integer offset
/// applied to each generator's canonical lift and the relation translations
/// (all zero, or the constructor would have refused).
#[derive(Clone, Debug)]
pub struct LiftedRep {
    pub action: CircleAction,
    pub offsets: BTreeMap<String, i64>,
    pub translations: Vec<(Word, i64, f64)>,
}

/// The same circle map with its lift shifted by an integer.
fn shifted(h: &CircleHomeo, k: i64) -> CircleHomeo {
    if k == 0 {
        return h.clone();
    }
    let kf = k as f64;
    let fwd = h.clone();
    let bwd = h.clone();
    CircleHomeo::from_lifts(
        "integer-shifted lift",
        move |x| fwd.eval_lift(x) + kf,
        move |y| bwd.eval_lift_inv(y - kf),
    )
}

/// Lift a Möbius representation with the canonical (rotation-part) lift per
/// generator and zero offsets.
pub fn lift(rep: &Representation) -> Result<LiftedRep, PullError> {
    lift_with_offsets(rep, &BTreeMap::new())
}

/// Lift with prescribed integer offsets on top of the canonical lifts.
///
/// Fails with [`PullError::NotLiftable`] when some relation evaluates to a
/// nonzero translation — e.g. any finite-cyclic generator acting by a
/// nontrivial rotation, whose n-th power lifts to a genuine shift.
pub fn lift_with_offsets(
    rep: &Representation,
    offsets: &BTreeMap<String, i64>,
) -> Result<LiftedRep, PullError> {
    let mut images = BTreeMap::new();
    for (g, m) in &rep.images {
        let h = CircleHomeo::moebius(m)?;
        let k = offsets.get(g).copied().unwrap_or(0);
        images.insert(g.clone(), shifted(&h, k));
    }
    let action = CircleAction::new(rep.presentation.clone(), images);
    let translations = relation_translations(&action)?;
    for (r, n, res) in &translations {
        if *n != 0 {
            return Err(PullError::NotLiftable {
                relation: r.to_string(),
                translation: *n,
            });
        }
        if *res > LIFT_RESIDUAL_TOL {
            return Err(PullError::Precondition(format!(
                "relation {r} lifts to a map {res:.2e} away from any translation; \
                 the images do not satisfy it"
            )));
        }
    }
    Ok(LiftedRep {
        action,
        offsets: offsets.clone(),
        translations,
    })
}

/// Lift the deformation of `base` at parameter ν.
///
/// The deformed matrices come from [`pull_apart`]; the lift of ν is chosen
/// via `offset`, which shifts the stable letter's lift (HNN and free-stable
/// structures). For conjugation structures the two copies of ν̃ cancel, so
/// the offset has no effect there. Relation translations are recomputed and
/// must all still be zero.
pub fn lift_deformation(
    base: &LiftedRep,
    fam: &DeformationFamily,
    nu: &MoebiusElement,
    offset: i64,
) -> Result<LiftedRep, PullError> {
    let pulled = pull_apart(fam, nu)?;
    let mut offsets = base.offsets.clone();
    match &fam.structure {
        Structure::Hnn { .. } => {
            if let crate::words::Presentation::Hnn { stable, .. } = &fam.base.presentation {
                *offsets.entry(stable.clone()).or_insert(0) += offset;
            }
        }
        Structure::FreeStable { stable } => {
            *offsets.entry(stable.clone()).or_insert(0) += offset;
        }
        Structure::Amalgam | Structure::FreeConjugate => {}
    }
    lift_with_offsets(&pulled.rep, &offsets)
}

/// Maximum circle distance between the lifted action's projection and a
/// Möbius representation, over all generators and a θ-grid. Zero (up to
/// float noise) certifies that the lift projects back onto the
/// representation.
pub fn projects_to(
    lifted: &LiftedRep,
    rep: &Representation,
    grid: usize,
) -> Result<f64, PullError> {
    let mut worst = 0.0f64;
    for g in rep.presentation.generators() {
        let h = lifted.action.image(&g)?;
        let m = rep.image(&g)?;
        for i in 0..grid {
            let theta = i as f64 / grid as f64;
            let a = h.eval_circle(theta);
            let b = frac(m.boundary_action(theta));
            let d = (a - b).abs();
            worst = worst.max(d.min(1.0 - d));
        }
    }
    Ok(worst)
}
