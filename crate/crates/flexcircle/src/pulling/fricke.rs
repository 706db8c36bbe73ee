//! Trace-coordinate builders: two-generator groups from (tr a, tr b, tr ab)
//! and the doubled genus-two amalgam they seed.
//!
//! For a pair of unimodular matrices the three traces x = tr a, y = tr b,
//! z = tr ab determine the pair up to conjugacy (irreducible case), and the
//! commutator trace is the polynomial x² + y² + z² − xyz − 2. The builders
//! here realize a prescribed triple by explicit matrices whose entries stay
//! in one real quadratic field, so the downstream centralizer and template
//! machinery can run exactly.

use crate::moebius::{Mat2, MoebiusElement};
use crate::scalar::{rat_frac, rat_i64, Quad, Rat, Ring};
use crate::words::{Presentation, Representation, Word};

use super::{quad_sqrt, rational_sqrt, PullError};

/// Exact matrices with tr a = x, tr b = y, tr ab = z; requires z² ≥ 4
/// (smaller |z| would force a complex eigenvalue ξ of the product).
///
/// The pair is a = [[x, 1], [−1, 0]] and b = [[0, ξ], [−1/ξ, y]] with
/// ξ + 1/ξ = −z; all entries live in ℚ(√(z² − 4)).
pub fn fricke_pair(x: &Rat, y: &Rat, z: &Rat) -> Result<(MoebiusElement, MoebiusElement), PullError> {
    let disc = Quad::from_rat(z * z - rat_i64(4));
    let s = quad_sqrt(&disc).ok_or_else(|| {
        PullError::Precondition(format!(
            "tr(ab) = {z} with |z| < 2 needs an elliptic product; this builder covers |z| ≥ 2"
        ))
    })?;
    let half = Quad::from_rat(rat_frac(1, 2));
    let zq = Quad::from_rat(z.clone());
    let xi = &(&s - &zq) * &half;
    let minus_inv_xi = &(&s + &zq) * &half;
    let a = MoebiusElement::from_quad(Mat2::new(
        Quad::from_rat(x.clone()),
        Quad::one(),
        Quad::one().rneg(),
        Quad::zero(),
    ))?;
    let b = MoebiusElement::from_quad(Mat2::new(
        Quad::zero(),
        xi,
        minus_inv_xi,
        Quad::from_rat(y.clone()),
    ))?;
    Ok((a, b))
}

/// Exact trace of the commutator aba⁻¹b⁻¹.
///
/// Unlike a general word, the commutator trace is independent of the sign
/// choices of the unimodular lifts, so it is computed on raw matrices rather
/// than through the sign-quotient composition.
pub fn commutator_trace(a: &MoebiusElement, b: &MoebiusElement) -> Result<Quad, PullError> {
    let ma = a.exact_real().ok_or_else(|| {
        PullError::ExactModeRequired("commutator traces are computed exactly".into())
    })?;
    let mb = b.exact_real().ok_or_else(|| {
        PullError::ExactModeRequired("commutator traces are computed exactly".into())
    })?;
    let k = ma.mul(mb).mul(&ma.adjugate()).mul(&mb.adjugate());
    Ok(k.trace())
}

fn trace_grid() -> Vec<Rat> {
    let mut grid: Vec<Rat> = (2..=12).map(rat_i64).collect();
    grid.extend((2..=11).map(|k| rat_frac(2 * k + 1, 2)));
    grid
}

/// A two-generator representation whose commutator trace hits `target`
/// exactly, found by scanning a small grid of rational (x, y) and solving
/// z² − xyz + (x² + y² − 2 − target) = 0 for a rational z ≥ 2.
///
/// Targets ≥ 2 are refused: the commutator would be reducible (trace 2) or
/// the boundary word would stop being hyperbolic-or-parabolic in the way the
/// deformation arguments need. The target −2 is allowed and yields the
/// cusped case with a parabolic commutator.
pub fn punctured_torus_rep(target: &Rat) -> Result<(Representation, (Rat, Rat, Rat)), PullError> {
    if *target >= rat_i64(2) {
        return Err(PullError::DegenerateTarget {
            value: target.to_string(),
        });
    }
    let grid = trace_grid();
    let four = rat_i64(4);
    let two = rat_i64(2);
    for x in &grid {
        for y in grid.iter().filter(|y| *y >= x) {
            let xy = x * y;
            let disc = &xy * &xy - &four * &(x * x + y * y - &two - target);
            let Some(s) = rational_sqrt(&disc) else {
                continue;
            };
            for z in [(&xy - &s) / &two, (&xy + &s) / &two] {
                if z < two {
                    continue;
                }
                let (a, b) = fricke_pair(x, y, &z)?;
                debug_assert_eq!(
                    commutator_trace(&a, &b).unwrap(),
                    Quad::from_rat(target.clone())
                );
                let rep = Representation::new(
                    Presentation::free(&["a", "b"]),
                    [("a".to_string(), a), ("b".to_string(), b)],
                );
                return Ok((rep, (x.clone(), y.clone(), z)));
            }
        }
    }
    Err(PullError::NoSolutionInWindow {
        what: format!("rational trace triple with commutator trace {target}"),
        window: "grid 2..=12 in half-integer steps".into(),
    })
}

/// Floating-point variant for irrational targets: x = y is fixed at the
/// smallest integer whose discriminant is safely positive and z is solved
/// continuously.
pub fn punctured_torus_rep_f64(
    target: f64,
) -> Result<(Representation, (f64, f64, f64)), PullError> {
    if !target.is_finite() || target >= 2.0 {
        return Err(PullError::DegenerateTarget {
            value: format!("{target}"),
        });
    }
    for xi in 3..=20i64 {
        let x = xi as f64;
        let disc = x.powi(4) - 4.0 * (2.0 * x * x - 2.0 - target);
        if disc < 0.25 {
            continue;
        }
        let z = (x * x - disc.sqrt()) / 2.0;
        let s = (z * z - 4.0).max(0.0).sqrt();
        let xi_val = (s - z) / 2.0;
        let minus_inv_xi = (s + z) / 2.0;
        let a = MoebiusElement::from_f64(x, 1.0, -1.0, 0.0)?;
        let b = MoebiusElement::from_f64(0.0, xi_val, minus_inv_xi, x)?;
        let rep = Representation::new(
            Presentation::free(&["a", "b"]),
            [("a".to_string(), a), ("b".to_string(), b)],
        );
        return Ok((rep, (x, x, z)));
    }
    Err(PullError::Precondition(format!(
        "commutator trace {target} is below the float search grid"
    )))
}

/// The doubled genus-two amalgam: two free-of-rank-two vertex groups glued
/// along their boundary commutators, both carrying the same exact
/// (3, 3, 4) pair. The edge image [a, b] = [c, d] is hyperbolic with trace
/// −4, and every matrix entry lies in ℚ(√3), so the centralizer family stays
/// in-field.
pub fn genus2_amalgam_base() -> Representation {
    let (a, b) = fricke_pair(&rat_i64(3), &rat_i64(3), &rat_i64(4))
        .expect("integer trace data stays exact");
    let commutator: Word = "a b a^-1 b^-1".parse().unwrap();
    let commutator_right: Word = "c d c^-1 d^-1".parse().unwrap();
    let pres = Presentation::Amalgam {
        a: Box::new(Presentation::free(&["a", "b"])),
        b: Box::new(Presentation::free(&["c", "d"])),
        c_in_a: commutator,
        c_in_b: commutator_right,
    };
    Representation::new(
        pres,
        [
            ("a".to_string(), a.clone()),
            ("b".to_string(), b.clone()),
            ("c".to_string(), a),
            ("d".to_string(), b),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(m: &MoebiusElement) -> Quad {
        m.exact_real().unwrap().trace()
    }

    #[test]
    fn fricke_pair_realizes_the_trace_triple() {
        for (x, y, z) in [(3, 3, 3), (3, 3, 4), (2, 5, 7), (4, 4, -5)] {
            let (a, b) = fricke_pair(&rat_i64(x), &rat_i64(y), &rat_i64(z)).unwrap();
            assert_eq!(tr(&a).abs(), Quad::from_i64(x).abs(), "tr a for {x},{y},{z}");
            assert_eq!(tr(&b).abs(), Quad::from_i64(y).abs(), "tr b for {x},{y},{z}");
            assert_eq!(
                tr(&a.compose(&b)).abs(),
                Quad::from_i64(z).abs(),
                "tr ab for {x},{y},{z}"
            );
        }
        match fricke_pair(&rat_i64(3), &rat_i64(3), &rat_i64(1)) {
            Err(PullError::Precondition(_)) => {}
            other => panic!("expected rejection of |z| < 2, got {other:?}"),
        }
    }

    #[test]
    fn commutator_trace_matches_the_fricke_polynomial() {
        // tr[a,b] = x² + y² + z² − xyz − 2 for unimodular pairs.
        for (x, y, z) in [(3i64, 3, 3), (3, 3, 4), (2, 5, 7), (4, 6, -3)] {
            let (a, b) = fricke_pair(&rat_i64(x), &rat_i64(y), &rat_i64(z)).unwrap();
            let expect = x * x + y * y + z * z - x * y * z - 2;
            assert_eq!(
                commutator_trace(&a, &b).unwrap(),
                Quad::from_i64(expect),
                "triple {x},{y},{z}"
            );
        }
    }

    #[test]
    fn punctured_torus_grid_hits_classical_targets() {
        // Commutator trace −2: the cusped square torus at (3, 3, 3).
        let (rep, triple) = punctured_torus_rep(&rat_i64(-2)).unwrap();
        assert_eq!(triple, (rat_i64(3), rat_i64(3), rat_i64(3)));
        let a = rep.image("a").unwrap();
        let b = rep.image("b").unwrap();
        assert_eq!(
            commutator_trace(a, b).unwrap(),
            Quad::from_i64(-2)
        );
        // The commutator is parabolic but not the identity.
        let k = a.commutator(b);
        assert!(!k.is_identity());

        // Commutator trace −4 lands on (3, 3, 4).
        let (rep4, triple4) = punctured_torus_rep(&rat_i64(-4)).unwrap();
        assert_eq!(triple4, (rat_i64(3), rat_i64(3), rat_i64(4)));
        assert_eq!(
            commutator_trace(rep4.image("a").unwrap(), rep4.image("b").unwrap()).unwrap(),
            Quad::from_i64(-4)
        );

        match punctured_torus_rep(&rat_i64(2)) {
            Err(PullError::DegenerateTarget { .. }) => {}
            other => panic!("expected degenerate-target rejection, got {other:?}"),
        }
    }

    #[test]
    fn float_variant_solves_irrational_targets() {
        // −2cos(π/7), the smallest hyperbolic-triangle commutator trace.
        let target = -2.0 * (std::f64::consts::PI / 7.0).cos();
        let (rep, (x, y, z)) = punctured_torus_rep_f64(target).unwrap();
        assert_eq!((x, y), (3.0, 3.0));
        assert!((z - 2.9354).abs() < 1e-3, "z = {z}");
        let a = rep.image("a").unwrap();
        let b = rep.image("b").unwrap();
        let k = a.commutator(b);
        let tr2 = k.trace_sq_f64();
        assert!(
            (tr2 - target * target).abs() < 1e-9,
            "tr² = {tr2}, want {}",
            target * target
        );
        assert!(punctured_torus_rep_f64(2.0).is_err());
    }

    #[test]
    fn genus2_base_is_an_exact_amalgam_representation() {
        let rep = genus2_amalgam_base();
        let warnings = rep.validate().unwrap();
        assert!(warnings.is_empty(), "warnings: {warnings:?}");
        // The edge image is hyperbolic with trace −4 and both inclusions
        // agree exactly.
        let left: Word = "a b a^-1 b^-1".parse().unwrap();
        let right: Word = "c d c^-1 d^-1".parse().unwrap();
        let kl = rep.evaluate(&left).unwrap();
        let kr = rep.evaluate(&right).unwrap();
        assert_eq!(kl, kr);
        assert_eq!(kl.exact_real().unwrap().trace().abs(), Quad::from_i64(4));
        assert!(kl.is_exact());
        // Entries stay in ℚ(√3).
        for g in ["a", "b", "c", "d"] {
            let m = rep.image(g).unwrap().exact_real().unwrap();
            for row in &m.e {
                for q in row {
                    assert!(q.radicand() == 0 || q.radicand() == 3, "entry {q}");
                }
            }
        }
    }
}
