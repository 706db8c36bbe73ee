//! Interval-arithmetic ping-pong certificates for composed attracting
//! families.
//!
//! The dynamical side of a word template: substitute an attracting
//! one-parameter family φᵢ(t) for each letter and ask when the composition
//! ψ(t) = g₁φ₁(t)·g₂φ₂(t)⋯g_kφ_k(t) is itself attracting. The certificate
//! carries neighborhoods Uᵢ of the families' attracting sets and a threshold
//! M with, verified on padded arc enclosures for t at and beyond M,
//!
//! * φᵢ(t)^{±1}(S¹ ∖ Uᵢ) ⊆ Uᵢ for every family, and
//! * Uᵢ ∩ g_{i+1}(U_{i+1}) = ∅ cyclically, with g₁(U₁) ∪ U_k ≠ S¹.
//!
//! Chaining the two gives the ping-pong estimate: a point outside U_k is
//! pushed by φ_k(t) into U_k, by g_k out of U_{k−1}, by φ_{k−1}(t) back into
//! U_{k−1}, and so on, so ψ(t) maps the complement of U_k into g₁(U₁) — a
//! proper attracting pair. In particular ψ(t) has unbounded forward orbits
//! on the complement and generates an infinite cyclic group for every
//! t ≥ M.
//!
//! Everything is checked on closed arcs with outward padding at the
//! caller's resolution; when an inclusion cannot be verified at that
//! padding the certification fails loudly rather than rounding in its
//! favor.

use super::{BaumslagError, ModelSubgroup};
use crate::circle::CircleHomeo;
use crate::interval::{complement, frac, Arc};
use crate::moebius::MoebiusElement;
use rayon::prelude::*;
use serde_json::{json, Value};

/// A one-parameter attracting family on the circle: t ↦ conj·ν(t)·conj⁻¹
/// for a hyperbolic or parabolic model subgroup ν, together with the core
/// arcs around its attracting set.
///
/// For the hyperbolic model the core has two components (attracting and
/// repelling boundary points of the translation axis); for the parabolic
/// model a single one. Elliptic families rotate rather than attract and are
/// rejected by the certifier.
#[derive(Clone, Debug)]
pub struct PingPongFamily {
    pub kind: ModelSubgroup,
    pub conj: MoebiusElement,
    pub core: Vec<Arc>,
}

impl PingPongFamily {
    /// Hyperbolic family with core arcs of the given radius around the two
    /// fixed boundary points conj(0) and conj(1/2).
    pub fn hyperbolic(conj: MoebiusElement, radius: f64) -> Result<Self, BaumslagError> {
        check_radius(radius)?;
        let p0 = conj.boundary_action(0.0);
        let p1 = conj.boundary_action(0.5);
        Ok(PingPongFamily {
            kind: ModelSubgroup::Hyperbolic,
            conj,
            core: vec![
                Arc::new(p0 - radius, 2.0 * radius),
                Arc::new(p1 - radius, 2.0 * radius),
            ],
        })
    }

    /// Parabolic family with a single core arc around the fixed boundary
    /// point conj(0).
    pub fn parabolic(conj: MoebiusElement, radius: f64) -> Result<Self, BaumslagError> {
        check_radius(radius)?;
        let p0 = conj.boundary_action(0.0);
        Ok(PingPongFamily {
            kind: ModelSubgroup::Parabolic,
            conj,
            core: vec![Arc::new(p0 - radius, 2.0 * radius)],
        })
    }

    /// The boundary homeomorphism at parameter t.
    pub fn eval(&self, t: f64) -> Result<CircleHomeo, BaumslagError> {
        let model = match self.kind {
            ModelSubgroup::Hyperbolic => MoebiusElement::exp(t),
            ModelSubgroup::Parabolic => MoebiusElement::parabolic(t),
            ModelSubgroup::Elliptic => {
                return Err(BaumslagError::Precondition(
                    "elliptic model subgroups are not attracting".into(),
                ))
            }
        };
        let g = self.conj.compose(&model).compose(&self.conj.inverse());
        Ok(CircleHomeo::moebius(&g)?)
    }
}

fn check_radius(radius: f64) -> Result<(), BaumslagError> {
    if !(radius > 0.0 && radius < 0.25) {
        return Err(BaumslagError::Precondition(format!(
            "core radius must lie in (0, 1/4), got {radius}"
        )));
    }
    Ok(())
}

/// One verified arc inclusion: `image = map±(source)` padded outward lies
/// inside `target`.
#[derive(Clone, Debug)]
pub struct InclusionRecord {
    /// Index of the family (or generator) the inclusion belongs to.
    pub family: usize,
    /// Parameter the inclusion was checked at (0 for parameter-free maps).
    pub t: f64,
    /// Whether the inverse direction of the map was applied.
    pub inverse: bool,
    pub source: Arc,
    pub image: Arc,
    pub target: Arc,
}

impl InclusionRecord {
    fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "t": self.t,
            "inverse": self.inverse,
            "source": arc_json(&self.source),
            "image": arc_json(&self.image),
            "target": arc_json(&self.target),
        })
    }
}

fn arc_json(a: &Arc) -> Value {
    json!({ "start": a.start, "len": a.len })
}

/// A verified ping-pong configuration for a composed family.
#[derive(Clone, Debug)]
pub struct PingPongCertificate {
    /// The grown neighborhoods Uᵢ, one disjoint arc union per family.
    pub arcs: Vec<Vec<Arc>>,
    /// Certified threshold: the inclusions hold for parameters ≥ m.
    pub m: f64,
    /// Outward padding and bisection granularity the checks ran at.
    pub resolution: f64,
    /// The inclusions verified at m itself.
    pub inclusions: Vec<InclusionRecord>,
    /// Additional parameters beyond m the inclusions were re-verified at.
    pub checked_ts: Vec<f64>,
}

impl PingPongCertificate {
    /// The attracting pair (U⁺, U⁻) = (g₁(U₁), U_k) of the composed map:
    /// ψ(t) maps S¹ ∖ U⁻ into U⁺ for every t ≥ m.
    pub fn attracting_pair(&self, gs: &[CircleHomeo]) -> (Vec<Arc>, Vec<Arc>) {
        let plus = self.arcs[0].iter().map(|a| image_arc(&gs[0], a)).collect();
        let minus = self.arcs[self.arcs.len() - 1].clone();
        (plus, minus)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "resolution": self.resolution,
            "arcs": self.arcs.iter().map(|u| u.iter().map(arc_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "inclusions": self.inclusions.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "checked_ts": self.checked_ts,
            "conclusion": "composed family generates an infinite cyclic group at parameters >= m",
        })
    }
}

/// Image of an arc under an orientation-preserving circle map, from the
/// endpoint images.
pub fn image_arc(h: &CircleHomeo, a: &Arc) -> Arc {
    if a.is_full() {
        return *a;
    }
    let s = h.eval_circle(a.start);
    if a.len == 0.0 {
        return Arc::new(s, 0.0);
    }
    let e = h.eval_circle(frac(a.start + a.len));
    Arc::new(s, frac(e - s))
}

/// Union of arcs as a sorted list of maximal disjoint arcs.
fn merge_arcs(arcs: &[Arc]) -> Vec<Arc> {
    if arcs.is_empty() {
        return vec![];
    }
    if arcs.iter().any(|a| a.is_full()) {
        return vec![Arc::new(0.0, 1.0)];
    }
    // Sweep two unrolled copies on the line to find an uncovered anchor…
    let mut iv: Vec<(f64, f64)> = arcs
        .iter()
        .flat_map(|a| {
            [
                (a.start, a.start + a.len),
                (a.start + 1.0, a.start + 1.0 + a.len),
            ]
        })
        .collect();
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut runs: Vec<(f64, f64)> = vec![];
    for (s, e) in iv {
        match runs.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => runs.push((s, e)),
        }
    }
    if runs.iter().any(|(s, e)| e - s >= 1.0) {
        return vec![Arc::new(0.0, 1.0)];
    }
    let (s0, e0) = runs[0];
    let next_start = if runs.len() > 1 { runs[1].0 } else { s0 + 1.0 };
    let anchor = frac(e0 + (next_start - e0) / 2.0);
    // …then rotate the anchor to 0, where a plain interval merge is exact.
    let mut shifted: Vec<(f64, f64)> = arcs
        .iter()
        .map(|a| {
            let s = frac(a.start - anchor);
            (s, s + a.len)
        })
        .collect();
    shifted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = vec![];
    for (s, e) in shifted {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
        .iter()
        .map(|&(s, e)| Arc::new(frac(s + anchor), (e - s).min(1.0)))
        .collect()
}

/// Smallest circle distance between two disjoint arcs.
fn gap_between(a: &Arc, b: &Arc) -> f64 {
    frac(b.start - a.end()).min(frac(a.start - b.end()))
}

/// Certify that the composition ψ(t) = g₁φ₁(t)⋯g_kφ_k(t) of attracting
/// families is attracting for all large parameters.
///
/// Preconditions checked exactly on the input cores Cᵢ: Cᵢ is disjoint from
/// g_{i+1}(C_{i+1}) (indices cyclic), and g₁(C₁) ∪ C_k leaves a gap. The
/// certifier then grows the cores into neighborhoods Uᵢ that keep those
/// separations, and finds the smallest threshold M (to within `resolution`,
/// by doubling and bisection) at which every family contracts the
/// complement of its Uᵢ into Uᵢ in both directions. All image arcs are
/// padded outward by `resolution` before the inclusion test, and the
/// inclusions are re-verified at a spread of parameters beyond M.
pub fn certify_pingpong(
    families: &[PingPongFamily],
    gs: &[CircleHomeo],
    resolution: f64,
) -> Result<PingPongCertificate, BaumslagError> {
    let k = families.len();
    if k == 0 || gs.len() != k {
        return Err(BaumslagError::Precondition(format!(
            "need matching nonempty family and coefficient lists, got {k} and {}",
            gs.len()
        )));
    }
    if !(resolution > 0.0 && resolution < 0.1) {
        return Err(BaumslagError::Precondition(format!(
            "resolution must lie in (0, 0.1), got {resolution}"
        )));
    }
    for (i, f) in families.iter().enumerate() {
        if f.kind == ModelSubgroup::Elliptic {
            return Err(BaumslagError::Precondition(format!(
                "family {} is elliptic and cannot attract",
                i + 1
            )));
        }
        if f.core.is_empty() {
            return Err(BaumslagError::Precondition(format!(
                "family {} has an empty core",
                i + 1
            )));
        }
    }
    let cores: Vec<Vec<Arc>> = families.iter().map(|f| merge_arcs(&f.core)).collect();
    for (i, c) in cores.iter().enumerate() {
        if c.iter().any(|a| a.is_full()) {
            return Err(BaumslagError::Precondition(format!(
                "the core of family {} covers the circle",
                i + 1
            )));
        }
    }

    // Joint separation margin of a candidate family of neighborhoods: the
    // smallest gap realizing the cyclic disjointness conditions, together
    // with the widest gap left uncovered by g₁(U₁) ∪ U_k.
    let separation = |us: &[Vec<Arc>]| -> Result<f64, String> {
        let mut min_gap = f64::INFINITY;
        for i in 0..k {
            let j = (i + 1) % k;
            let img: Vec<Arc> = us[j].iter().map(|a| image_arc(&gs[j], a)).collect();
            for a in &us[i] {
                for b in &img {
                    if a.overlaps(b) {
                        return Err(format!(
                            "arcs of family {} meet the g_{}-image of family {}'s arcs",
                            i + 1,
                            j + 1,
                            j + 1
                        ));
                    }
                    min_gap = min_gap.min(gap_between(a, b));
                }
            }
        }
        let mut cover: Vec<Arc> = us[0].iter().map(|a| image_arc(&gs[0], a)).collect();
        cover.extend(us[k - 1].iter().copied());
        match complement(&merge_arcs(&cover)) {
            None => Err("g_1(U_1) and U_k jointly cover the circle".into()),
            Some(gaps) => {
                let widest = gaps.iter().map(|g| g.len).fold(0.0, f64::max);
                if widest <= 0.0 {
                    return Err("g_1(U_1) and U_k jointly cover the circle".into());
                }
                Ok(min_gap.min(widest))
            }
        }
    };

    let base = separation(&cores).map_err(BaumslagError::Precondition)?;

    // Grow the cores into open neighborhoods, backing off until the
    // separation conditions survive the padding.
    let mut delta = (base / 4.0).min(0.05);
    let arcs: Vec<Vec<Arc>> = loop {
        if delta < f64::EPSILON {
            return Err(BaumslagError::CertificationFailed {
                resolution,
                detail: "separation margin vanished while growing the cores".into(),
            });
        }
        let grown: Vec<Vec<Arc>> = cores
            .iter()
            .map(|c| merge_arcs(&c.iter().map(|a| a.pad(delta)).collect::<Vec<_>>()))
            .collect();
        if separation(&grown).is_ok() {
            break grown;
        }
        delta /= 2.0;
    };

    let mut hi = resolution.max(1e-6);
    let mut tries = 0;
    while inclusion_checks(families, &arcs, hi, resolution)?.is_none() {
        hi *= 2.0;
        tries += 1;
        if tries > 80 {
            return Err(BaumslagError::CertificationFailed {
                resolution,
                detail: format!("no contraction found up to parameter {hi:e}"),
            });
        }
    }
    let mut lo = 0.0;
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if inclusion_checks(families, &arcs, mid, resolution)?.is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let m = hi;
    let inclusions = inclusion_checks(families, &arcs, m, resolution)?.ok_or_else(|| {
        BaumslagError::CertificationFailed {
            resolution,
            detail: "threshold bisection lost the verified inclusion".into(),
        }
    })?;

    // The model families only contract harder past the threshold; verify
    // that on a spread of parameters anyway rather than assuming it.
    let spot = [m + 1.0, 2.0 * m + 3.0, 10.0 * m.max(1.0)];
    for &t in &spot {
        if inclusion_checks(families, &arcs, t, resolution)?.is_none() {
            return Err(BaumslagError::CertificationFailed {
                resolution,
                detail: format!("inclusion failed at spot-check parameter {t}"),
            });
        }
    }

    Ok(PingPongCertificate {
        arcs,
        m,
        resolution,
        inclusions,
        checked_ts: spot.to_vec(),
    })
}

/// Check φᵢ(t)^{±1}(S¹ ∖ Uᵢ) ⊆ Uᵢ for every family, with outward padding.
/// Returns the inclusion records when all hold, `None` when some fail.
fn inclusion_checks(
    families: &[PingPongFamily],
    arcs: &[Vec<Arc>],
    t: f64,
    resolution: f64,
) -> Result<Option<Vec<InclusionRecord>>, BaumslagError> {
    let mut tasks: Vec<(usize, CircleHomeo, bool, Arc)> = vec![];
    for (i, f) in families.iter().enumerate() {
        let h = f.eval(t)?;
        let gaps = complement(&arcs[i]).ok_or_else(|| BaumslagError::CertificationFailed {
            resolution,
            detail: format!("the grown neighborhood of family {} covers the circle", i + 1),
        })?;
        for gap in gaps {
            tasks.push((i, h.clone(), false, gap));
            tasks.push((i, h.clone(), true, gap));
        }
    }
    let results: Vec<Option<InclusionRecord>> = tasks
        .par_iter()
        .map(|(i, h, inverse, gap)| {
            let dir = if *inverse { h.inverse() } else { h.clone() };
            let img = image_arc(&dir, gap).pad(resolution);
            let target = arcs[*i].iter().find(|u| u.contains_arc(&img))?;
            Some(InclusionRecord {
                family: *i,
                t,
                inverse: *inverse,
                source: *gap,
                image: img,
                target: *target,
            })
        })
        .collect();
    if results.iter().any(Option::is_none) {
        Ok(None)
    } else {
        Ok(Some(results.into_iter().flatten().collect()))
    }
}

/// The composed map ψ(t) = g₁φ₁(t)·g₂φ₂(t)⋯g_kφ_k(t).
pub fn composite_map(
    families: &[PingPongFamily],
    gs: &[CircleHomeo],
    t: f64,
) -> Result<CircleHomeo, BaumslagError> {
    let mut parts = Vec::with_capacity(2 * families.len());
    for (f, g) in families.iter().zip(gs) {
        parts.push((g.clone(), 1));
        parts.push((f.eval(t)?, 1));
    }
    Ok(CircleHomeo::compose_word(parts))
}

// ---------------------------------------------------------------------------
// Schottky certificates for fixed generator tuples.
// ---------------------------------------------------------------------------

/// A generator with its ping-pong arcs: the map sends the complement of
/// `minus` into `plus` (and its inverse sends the complement of `plus` into
/// `minus`).
#[derive(Clone)]
pub struct SchottkyPair {
    pub map: CircleHomeo,
    pub minus: Arc,
    pub plus: Arc,
}

/// A verified Schottky configuration: the generators play ping-pong on 2n
/// pairwise disjoint arcs, so they generate a free group of rank n.
#[derive(Clone, Debug)]
pub struct SchottkyCertificate {
    pub rank: usize,
    pub resolution: f64,
    pub inclusions: Vec<InclusionRecord>,
}

impl SchottkyCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.rank,
            "resolution": self.resolution,
            "inclusions": self.inclusions.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "conclusion": "generators freely generate a free group of the given rank",
        })
    }
}

/// Verify a Schottky configuration on padded arc enclosures.
pub fn certify_schottky(
    pairs: &[SchottkyPair],
    resolution: f64,
) -> Result<SchottkyCertificate, BaumslagError> {
    if pairs.is_empty() {
        return Err(BaumslagError::Precondition(
            "need at least one generator".into(),
        ));
    }
    if !(resolution > 0.0 && resolution < 0.1) {
        return Err(BaumslagError::Precondition(format!(
            "resolution must lie in (0, 0.1), got {resolution}"
        )));
    }
    let all: Vec<Arc> = pairs.iter().flat_map(|p| [p.minus, p.plus]).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if !all[i].disjoint(&all[j], resolution) {
                return Err(BaumslagError::Precondition(format!(
                    "ping-pong arcs {} and {} are not disjoint at margin {resolution:e}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let mut inclusions = vec![];
    for (j, p) in pairs.iter().enumerate() {
        for (inverse, src, dst) in [(false, p.minus, p.plus), (true, p.plus, p.minus)] {
            let dir = if inverse { p.map.inverse() } else { p.map.clone() };
            let gap = complement(&[src]).expect("proper arc has a complement")[0];
            let img = image_arc(&dir, &gap).pad(resolution);
            if !dst.contains_arc(&img) {
                return Err(BaumslagError::CertificationFailed {
                    resolution,
                    detail: format!(
                        "generator {} does not contract the complement of its {} arc",
                        j + 1,
                        if inverse { "plus" } else { "minus" }
                    ),
                });
            }
            inclusions.push(InclusionRecord {
                family: j,
                t: 0.0,
                inverse,
                source: gap,
                image: img,
                target: dst,
            });
        }
    }
    Ok(SchottkyCertificate {
        rank: pairs.len(),
        resolution,
        inclusions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn merge_arcs_handles_wrapping_unions() {
        let merged = merge_arcs(&[Arc::new(0.9, 0.15), Arc::new(0.0, 0.1), Arc::new(0.4, 0.1)]);
        assert_eq!(merged.len(), 2);
        assert!(merged.iter().any(|a| a.contains(0.02) && a.contains(0.95)));
        assert!(merged.iter().any(|a| a.contains(0.45)));
        let full = merge_arcs(&[Arc::new(0.0, 0.6), Arc::new(0.5, 0.6)]);
        assert_eq!(full, vec![Arc::new(0.0, 1.0)]);
    }

    #[test]
    fn quarter_rotation_coefficient_yields_a_threshold() {
        let fam = PingPongFamily::hyperbolic(MoebiusElement::identity(), 0.02).unwrap();
        let g = CircleHomeo::moebius(&MoebiusElement::rot(FRAC_PI_2)).unwrap();
        let cert = certify_pingpong(&[fam.clone()], &[g.clone()], 1e-4).unwrap();
        assert!(cert.m > 0.0 && cert.m < 60.0, "m = {}", cert.m);
        assert!(!cert.inclusions.is_empty());
        assert_eq!(cert.checked_ts.len(), 3);

        // Soundness sweep: points off U⁻ land in U⁺ under the composed map,
        // at a spread of parameters at and beyond the threshold.
        let (plus, minus) = cert.attracting_pair(&[g.clone()]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ts: Vec<f64> = (0..10).map(|i| cert.m + 1.3 * i as f64).collect();
        let mut checked = 0;
        for &t in &ts {
            let psi = composite_map(&[fam.clone()], &[g.clone()], t).unwrap();
            for _ in 0..100 {
                let x = loop {
                    let x: f64 = rng.gen();
                    if !minus.iter().any(|a| a.contains(x)) {
                        break x;
                    }
                };
                let y = psi.eval_circle(x);
                assert!(
                    plus.iter().any(|a| a.contains(y)),
                    "t = {t}: {x} escaped to {y}"
                );
                checked += 1;
            }
        }
        assert_eq!(checked, 1000);
    }

    #[test]
    fn parabolic_shear_certificate() {
        // Core at the parabolic fixed point θ = 0; the coefficient
        // [[1,0],[1,1]] fixes θ = 1/2 and moves 0 to 3/4, so the separation
        // conditions hold.
        let fam = PingPongFamily::parabolic(MoebiusElement::identity(), 0.02).unwrap();
        let g = MoebiusElement::from_rational(
            crate::scalar::rat_i64(1),
            crate::scalar::rat_i64(0),
            crate::scalar::rat_i64(1),
            crate::scalar::rat_i64(1),
        )
        .unwrap();
        let gh = CircleHomeo::moebius(&g).unwrap();
        let cert = certify_pingpong(&[fam.clone()], &[gh.clone()], 1e-4).unwrap();
        assert!(cert.m > 0.0, "m = {}", cert.m);
        let psi = composite_map(&[fam], &[gh], cert.m + 2.0).unwrap();
        let (plus, _) = cert.attracting_pair(&[CircleHomeo::moebius(&g).unwrap()]);
        let y = psi.eval_circle(0.37);
        assert!(plus.iter().any(|a| a.contains(y)));
    }

    #[test]
    fn overlapping_cores_are_rejected() {
        let fam = PingPongFamily::hyperbolic(MoebiusElement::identity(), 0.05).unwrap();
        // A rotation smaller than the core width cannot separate the core
        // from its image.
        let g = CircleHomeo::rotation(0.01);
        match certify_pingpong(&[fam], &[g], 1e-4) {
            Err(BaumslagError::Precondition(_)) => {}
            other => panic!("expected a precondition error, got {other:?}"),
        }
    }

    #[test]
    fn elliptic_families_are_rejected() {
        let fam = PingPongFamily {
            kind: ModelSubgroup::Elliptic,
            conj: MoebiusElement::identity(),
            core: vec![Arc::new(0.0, 0.1)],
        };
        let g = CircleHomeo::rotation(0.5);
        assert!(matches!(
            certify_pingpong(&[fam], &[g], 1e-4),
            Err(BaumslagError::Precondition(_))
        ));
    }

    #[test]
    fn schottky_pair_is_certified() {
        let a = MoebiusElement::exp(4.0);
        let r = MoebiusElement::rot(FRAC_PI_2); // a quarter turn on the boundary
        let b = r.compose(&a).compose(&r.inverse());
        let pa = SchottkyPair {
            map: CircleHomeo::moebius(&a).unwrap(),
            minus: Arc::new(0.45, 0.1),
            plus: Arc::new(0.95, 0.1),
        };
        let pb = SchottkyPair {
            map: CircleHomeo::moebius(&b).unwrap(),
            minus: Arc::new(0.7, 0.1),
            plus: Arc::new(0.2, 0.1),
        };
        let cert = certify_schottky(&[pa.clone(), pb.clone()], 1e-4).unwrap();
        assert_eq!(cert.rank, 2);
        assert_eq!(cert.inclusions.len(), 4);

        // Spot-check the ping-pong estimate on random reduced two-letter
        // words: starting outside every arc, the word's image lands in the
        // plus/minus arc of its leading letter.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gens = [&pa, &pb];
        for _ in 0..200 {
            let i = rng.gen_range(0..2usize);
            let inv = rng.gen_bool(0.5);
            let h = if inv {
                gens[i].map.inverse()
            } else {
                gens[i].map.clone()
            };
            let x = loop {
                let x: f64 = rng.gen();
                if !cert_arcs(&[&pa, &pb]).iter().any(|a| a.contains(x)) {
                    break x;
                }
            };
            let y = h.eval_circle(x);
            let target = if inv { gens[i].minus } else { gens[i].plus };
            assert!(target.contains(y), "letter {i} inv={inv}: {x} -> {y}");
        }
    }

    fn cert_arcs(pairs: &[&SchottkyPair]) -> Vec<Arc> {
        pairs.iter().flat_map(|p| [p.minus, p.plus]).collect()
    }

    #[test]
    fn schottky_overlap_is_a_precondition_error() {
        let a = MoebiusElement::exp(4.0);
        let p = SchottkyPair {
            map: CircleHomeo::moebius(&a).unwrap(),
            minus: Arc::new(0.45, 0.2),
            plus: Arc::new(0.55, 0.2),
        };
        assert!(matches!(
            certify_schottky(&[p], 1e-4),
            Err(BaumslagError::Precondition(_))
        ));
    }

    #[test]
    fn certificate_json_shape() {
        let fam = PingPongFamily::hyperbolic(MoebiusElement::identity(), 0.02).unwrap();
        let g = CircleHomeo::moebius(&MoebiusElement::rot(FRAC_PI_2)).unwrap();
        let cert = certify_pingpong(&[fam], &[g], 1e-4).unwrap();
        let v = cert.to_json();
        assert!(v["m"].as_f64().unwrap() > 0.0);
        assert!(v["arcs"].as_array().unwrap().len() == 1);
        assert!(!v["inclusions"].as_array().unwrap().is_empty());
    }
}
