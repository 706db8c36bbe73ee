//! Limit-set approximation, minimalization, and the common blow-up of a
//! semi-conjugate pair of actions.
//!
//! Everything here is "at scale": verdicts are drawn from finite orbit
//! samples, finite gap families, and finite grids, with the scales recorded
//! in the inputs. Nothing asserts minimality or semi-conjugacy beyond the
//! sampled resolution; inconclusive configurations fail loudly instead of
//! guessing.

use super::cocycle::orbit_shift;
use super::{
    CircleAction, CircleError, CircleHomeo, MonotoneDegreeOneMap,
};
use crate::moebius::frac;
use crate::scalar::rat_frac;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Total-order key for f64 sets/maps (orbit clouds, gap families).
#[derive(Clone, Copy, PartialEq)]
struct K(f64);

impl Eq for K {}
impl Ord for K {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}
impl PartialOrd for K {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trichotomy {
    WholeCircle,
    CantorLike,
    FiniteOrbit { size: usize },
}

#[derive(Debug, Clone)]
pub struct LimitSetReport {
    /// Sorted sample of the limit set in [0, 1).
    pub points: Vec<f64>,
    /// Maximal complementary arcs longer than the requested ε, as (l, r)
    /// with r possibly past 1 (wrap).
    pub gaps: Vec<(f64, f64)>,
    pub trichotomy: Trichotomy,
}

fn generator_maps(action: &CircleAction) -> Result<Vec<CircleHomeo>, CircleError> {
    let mut maps = Vec::new();
    for g in action.generators() {
        let h = action.image(&g)?.clone();
        maps.push(h.inverse());
        maps.push(h);
    }
    Ok(maps)
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Circular distance from x to the nearest element of a sorted slice.
fn dist_to_sorted(pts: &[f64], x: f64) -> f64 {
    if pts.is_empty() {
        return f64::INFINITY;
    }
    let j = pts.partition_point(|p| *p < x);
    let n = pts.len();
    circ_dist(pts[j % n], x).min(circ_dist(pts[(j + n - 1) % n], x))
}

fn nearest_in_set(set: &BTreeSet<K>, q: f64) -> f64 {
    let mut best = f64::INFINITY;
    if let Some(k) = set.range(..=K(q)).next_back() {
        best = best.min(circ_dist(k.0, q));
    }
    if let Some(k) = set.range(K(q)..).next() {
        best = best.min(circ_dist(k.0, q));
    }
    // wraparound neighbours
    if let Some(k) = set.iter().next() {
        best = best.min(circ_dist(k.0, q));
    }
    if let Some(k) = set.iter().next_back() {
        best = best.min(circ_dist(k.0, q));
    }
    best
}

/// Breadth-first orbit of a seed under the given maps. Points discovered in
/// the first `burn_in` rounds are treated as transient and excluded from the
/// returned sample (unless the closure stabilizes that early, in which case
/// the whole closed set is returned). Returns (sorted points, stabilized).
fn orbit_cloud(
    maps: &[CircleHomeo],
    seed: f64,
    budget: usize,
    burn_in: usize,
    dedup: f64,
) -> (Vec<f64>, bool) {
    let s = frac(seed);
    let mut set: BTreeSet<K> = BTreeSet::new();
    set.insert(K(s));
    let mut kept: Vec<f64> = Vec::new();
    let mut frontier = vec![s];
    let mut round = 0usize;
    let mut stabilized = false;
    'bfs: loop {
        if frontier.is_empty() {
            stabilized = true;
            break;
        }
        round += 1;
        let mut next = Vec::new();
        for x in &frontier {
            for m in maps {
                let q = frac(m.eval_circle(*x));
                if nearest_in_set(&set, q) < dedup {
                    continue;
                }
                set.insert(K(q));
                if round >= burn_in {
                    kept.push(q);
                }
                next.push(q);
                if set.len() >= budget {
                    break 'bfs;
                }
            }
        }
        frontier = next;
    }
    let mut pts: Vec<f64> = if kept.len() >= 8 {
        kept
    } else {
        set.iter().map(|k| k.0).collect()
    };
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    (pts, stabilized)
}

fn min_spacing(pts: &[f64]) -> f64 {
    let n = pts.len();
    if n < 2 {
        return 1.0;
    }
    let mut best = pts[0] + 1.0 - pts[n - 1];
    for w in pts.windows(2) {
        best = best.min(w[1] - w[0]);
    }
    best
}

fn is_invariant(pts: &[f64], maps: &[CircleHomeo], tol: f64) -> bool {
    pts.iter()
        .all(|p| maps.iter().all(|m| dist_to_sorted(pts, frac(m.eval_circle(*p))) <= tol))
}

fn gaps_of(pts: &[f64], eps: f64) -> Vec<(f64, f64)> {
    let n = pts.len();
    let mut out = Vec::new();
    for i in 0..n {
        let l = pts[i];
        let r = if i + 1 < n { pts[i + 1] } else { pts[0] + 1.0 };
        if r - l > eps {
            out.push((l, r));
        }
    }
    out
}

const FINITE_CAP: usize = 4096;
const FINITE_SPACING: f64 = 1e-6;
const CLOUD_DEDUP: f64 = 1e-11;
const CLOUD_BURN_IN: usize = 8;

/// Approximate the limit set Λ = ⋂ closure(orbit) by deep orbit samples from
/// several seeds, intersected at resolution, and classify it at scale ε_gap.
///
/// Intended for nonelementary actions (the caller vouches); cyclic hyperbolic
/// or parabolic groups produce mixed transient evidence and come back as
/// InconclusiveAtScale rather than a wrong verdict.
pub fn limit_set_approx(
    action: &CircleAction,
    seeds: &[f64],
    n_iter: usize,
    eps_gap: f64,
) -> Result<LimitSetReport, CircleError> {
    assert!(!seeds.is_empty(), "need at least one seed");
    assert!(eps_gap > 0.0);
    let maps = generator_maps(action)?;
    let budget = n_iter.max(64);
    let clouds: Vec<(Vec<f64>, bool)> = seeds
        .iter()
        .map(|s| orbit_cloud(&maps, *s, budget, CLOUD_BURN_IN, CLOUD_DEDUP))
        .collect();

    let finite_like = |c: &(Vec<f64>, bool)| {
        c.1 && c.0.len() <= FINITE_CAP && min_spacing(&c.0) >= FINITE_SPACING
    };
    if clouds.iter().all(finite_like) {
        let smallest = clouds.iter().map(|c| &c.0).min_by_key(|v| v.len()).unwrap();
        if is_invariant(smallest, &maps, FINITE_SPACING) {
            return Ok(LimitSetReport {
                gaps: gaps_of(smallest, eps_gap),
                trichotomy: Trichotomy::FiniteOrbit {
                    size: smallest.len(),
                },
                points: smallest.clone(),
            });
        }
        return Err(CircleError::InconclusiveAtScale(
            "orbit closures are finite but not invariant at tolerance".into(),
        ));
    }
    if clouds.iter().any(finite_like) {
        return Err(CircleError::InconclusiveAtScale(
            "seeds disagree: some orbits closed up finitely, others kept growing".into(),
        ));
    }

    // Intersection of orbit closures at resolution: keep points of the first
    // cloud that every other cloud approaches.
    let tol = (0.25 * eps_gap).max(1e-6);
    let points: Vec<f64> = clouds[0]
        .0
        .iter()
        .copied()
        .filter(|p| clouds[1..].iter().all(|c| dist_to_sorted(&c.0, *p) <= tol))
        .collect();
    if points.len() < 8 {
        return Err(CircleError::InconclusiveAtScale(
            "orbit-closure intersection retained fewer than 8 sample points".into(),
        ));
    }
    let gaps = gaps_of(&points, eps_gap);
    if !gaps.is_empty()
        && !clouds.iter().any(|c| c.1)
        && (points.len() as f64) < 2.0 / eps_gap
    {
        return Err(CircleError::InconclusiveAtScale(
            "iteration budget exhausted before gaps at ε could stabilize".into(),
        ));
    }
    let trichotomy = if gaps.is_empty() {
        Trichotomy::WholeCircle
    } else {
        Trichotomy::CantorLike
    };
    Ok(LimitSetReport {
        points,
        gaps,
        trichotomy,
    })
}

// ---------------------------------------------------------------------------
// Gap refinement: close a gap family under the generator images.
// ---------------------------------------------------------------------------

/// Does arc (l1, len1) overlap arc (l2, len2) on the circle?
fn arcs_overlap(l1: f64, len1: f64, l2: f64, len2: f64) -> bool {
    frac(l2 - l1) < len1 || frac(l1 - l2) < len2
}

/// Hull of two overlapping circular arcs.
fn arc_hull(l1: f64, len1: f64, l2: f64, len2: f64) -> (f64, f64) {
    let d = frac(l2 - l1);
    if d < len1 {
        (l1, len1.max(d + len2))
    } else {
        let d2 = frac(l1 - l2);
        (l2, len2.max(d2 + len1))
    }
}

fn insert_arc(
    arcs: &mut BTreeMap<K, f64>,
    queue: &mut VecDeque<(f64, f64)>,
    l: f64,
    len: f64,
    delta_min: f64,
) {
    if !len.is_finite() || len < delta_min || len >= 1.0 {
        return;
    }
    let mut l = frac(l);
    let mut len = len;
    // Absorb every overlapping recorded arc into the candidate's hull.
    let mut largest_absorbed: Option<(f64, f64)> = None;
    loop {
        let mut cands: Vec<(f64, f64)> = Vec::new();
        if let Some((k, v)) = arcs.range(..=K(l)).next_back() {
            cands.push((k.0, *v));
        }
        if let Some((k, v)) = arcs.range(K(l)..).next() {
            cands.push((k.0, *v));
        }
        if let Some((k, v)) = arcs.iter().next() {
            cands.push((k.0, *v));
        }
        if let Some((k, v)) = arcs.iter().next_back() {
            cands.push((k.0, *v));
        }
        let hit = cands
            .into_iter()
            .find(|(l2, len2)| arcs_overlap(l, len, *l2, *len2));
        let Some((l2, len2)) = hit else { break };
        arcs.remove(&K(l2));
        if largest_absorbed.map_or(true, |(_, al)| len2 > al) {
            largest_absorbed = Some((l2, len2));
        }
        let (hl, hlen) = arc_hull(l, len, l2, len2);
        l = hl;
        len = hlen;
    }
    arcs.insert(K(l), len);
    // Re-propagate only when the family grew beyond float-noise scale. The
    // same gap reaches us through many composition paths whose endpoints
    // disagree by ~1e-12; if every such merge were re-imaged, the expanding
    // directions of the dynamics would amplify that disagreement
    // exponentially until phantom arcs overrun genuine limit points. A
    // merged hull therefore re-enters the queue only when it extends its
    // largest absorbed arc by more than the noise floor, which no duplicate
    // path can reach; genuinely new arcs (no absorption) always propagate.
    let grew = match largest_absorbed {
        None => true,
        Some((al, alen)) => (l - al).abs() > 1e-9 || (len - alen).abs() > 1e-9,
    };
    if grew {
        queue.push_back((l, len));
    }
}

/// Close an initial family of limit-set gaps under the generator maps,
/// recording every image gap of length ≥ delta_min; stops at the cap. The
/// result is the staircase-ready gap list, sorted and pairwise disjoint.
fn refine_gaps(
    maps: &[CircleHomeo],
    initial: &[(f64, f64)],
    delta_min: f64,
    cap: usize,
) -> Vec<(f64, f64)> {
    let mut arcs: BTreeMap<K, f64> = BTreeMap::new();
    let mut queue: VecDeque<(f64, f64)> = VecDeque::new();
    for (l, r) in initial {
        insert_arc(&mut arcs, &mut queue, *l, r - l, delta_min);
    }
    let mut steps = 0usize;
    while let Some((l, len)) = queue.pop_front() {
        steps += 1;
        if steps > 50 * cap.max(1) || arcs.len() >= cap {
            break;
        }
        for m in maps {
            let il = m.eval_circle(l);
            let ilen = m.eval_lift(l + len) - m.eval_lift(l);
            insert_arc(&mut arcs, &mut queue, il, ilen, delta_min);
        }
    }
    arcs.iter().map(|(k, len)| (k.0, k.0 + len)).collect()
}

// ---------------------------------------------------------------------------
// Minimalization.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MinimalizeConfig {
    pub seeds: Vec<f64>,
    /// Orbit budget per seed.
    pub n_iter: usize,
    /// Gaps longer than this are structural.
    pub eps_gap: f64,
    /// Gap-family refinement floor: image gaps shorter than this are dropped.
    pub delta_min: f64,
    /// Hard cap on the recorded gap family.
    pub gap_cap: usize,
    /// Grid for the semi-conjugacy residual.
    pub grid: usize,
}

impl Default for MinimalizeConfig {
    fn default() -> Self {
        MinimalizeConfig {
            seeds: vec![0.0, 0.381_966_011_250_105_1, 0.707_106_781_186_547_6],
            n_iter: 100_000,
            eps_gap: 1e-3,
            delta_min: 1e-12,
            gap_cap: 100_000,
            grid: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinimalizeCase {
    FiniteOrbit { size: usize },
    Collapsed { gaps: usize },
    AlreadyMinimal,
}

#[derive(Debug, Clone)]
pub struct Minimalization {
    /// The minimalized action ρ̄.
    pub action: CircleAction,
    /// The monotone degree-one map with h∘ρ = ρ̄∘h (identity when already
    /// minimal).
    pub h: MonotoneDegreeOneMap,
    pub case: MinimalizeCase,
    /// Measured sup |h(ρ(g)(x)) − ρ̄(g)(h(x))| over generators and the grid
    /// (continuity points only in the finite-orbit case).
    pub residual: f64,
}

/// sup |h(ρ₀(g)(x)) − ρ₁(g)(h(x))| over generators and a uniform lift grid.
pub fn semiconjugacy_residual(
    h: &MonotoneDegreeOneMap,
    upper: &CircleAction,
    lower: &CircleAction,
    grid: usize,
) -> Result<f64, CircleError> {
    let mut worst = 0.0f64;
    for g in upper.generators() {
        let f0 = upper.image(&g)?;
        let f1 = lower.image(&g)?;
        for i in 0..grid {
            let x = i as f64 / grid as f64;
            let a = h.eval(f0.eval_lift(x));
            let b = f1.eval_lift(h.eval(x));
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Collapse an action to its minimal model. Finite orbit → exact rotation
/// numbers; Cantor-like limit set → staircase collapse of the recorded gap
/// family; already minimal → identity.
pub fn minimalize(
    action: &CircleAction,
    cfg: &MinimalizeConfig,
) -> Result<Minimalization, CircleError> {
    let report = limit_set_approx(action, &cfg.seeds, cfg.n_iter, cfg.eps_gap)?;
    let maps = generator_maps(action)?;
    match report.trichotomy {
        Trichotomy::FiniteOrbit { size } => {
            let orbit = report.points;
            let h = MonotoneDegreeOneMap::step_on_orbit(&orbit);
            let mut images = BTreeMap::new();
            for g in action.generators() {
                let k = orbit_shift(&orbit, action.image(&g)?).ok_or_else(|| {
                    CircleError::InconclusiveAtScale(
                        "finite orbit is not permuted cleanly by a generator".into(),
                    )
                })?;
                images.insert(
                    g,
                    CircleHomeo::rotation_exact(rat_frac(k as i64, size as i64)),
                );
            }
            let bar = CircleAction::new(action.presentation.clone(), images);
            // Residual off the jump set: points whose image (or themselves)
            // sits on an orbit point have one-sided values by design.
            let mut worst = 0.0f64;
            for g in action.generators() {
                let f0 = action.image(&g)?;
                let f1 = bar.image(&g)?;
                for i in 0..cfg.grid {
                    let x = i as f64 / cfg.grid as f64;
                    let y = f0.eval_lift(x);
                    if dist_to_sorted(&orbit, frac(x)) < 1e-9
                        || dist_to_sorted(&orbit, frac(y)) < 1e-9
                    {
                        continue;
                    }
                    worst = worst.max((h.eval(y) - f1.eval_lift(h.eval(x))).abs());
                }
            }
            Ok(Minimalization {
                action: bar,
                h,
                case: MinimalizeCase::FiniteOrbit { size },
                residual: worst,
            })
        }
        Trichotomy::WholeCircle => Ok(Minimalization {
            action: action.clone(),
            h: MonotoneDegreeOneMap::identity(),
            case: MinimalizeCase::AlreadyMinimal,
            residual: 0.0,
        }),
        Trichotomy::CantorLike => {
            let refined = refine_gaps(&maps, &report.gaps, cfg.delta_min, cfg.gap_cap);
            let h = MonotoneDegreeOneMap::staircase(refined);
            let mut images = BTreeMap::new();
            for g in action.generators() {
                images.insert(g.clone(), h.conjugate(action.image(&g)?));
            }
            let bar = CircleAction::new(action.presentation.clone(), images);
            let residual = semiconjugacy_residual(&h, action, &bar, cfg.grid)?;
            let gaps = h.gaps.len();
            Ok(Minimalization {
                action: bar,
                h,
                case: MinimalizeCase::Collapsed { gaps },
                residual,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Common blow-up.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CommonBlowup {
    /// The blown-up action ρ with ρ ≽_{h₀} ρ₀ and ρ ≽_{h₁} ρ₁.
    pub action: CircleAction,
    pub h0: MonotoneDegreeOneMap,
    pub h1: MonotoneDegreeOneMap,
    /// Worst verification residual of the two semi-conjugacies on the grid.
    pub residual: f64,
}

/// Given h with h∘ρ₀ = ρ₁∘h (checked on a grid to `tol`), build the common
/// blow-up: h₀ inverts f(y) = (y + h(y))/2, h₁(x) = 2x − h₀(x), and
/// ρ(a)(x) = (ρ₀(a)(h₀(x)) + ρ₁(a)(h₁(x)))/2.
pub fn common_blowup(
    h: &MonotoneDegreeOneMap,
    rho0: &CircleAction,
    rho1: &CircleAction,
    tol: f64,
    grid: usize,
) -> Result<CommonBlowup, CircleError> {
    let gens = rho0.generators();
    assert_eq!(gens, rho1.generators(), "actions must share a presentation");
    let pre = semiconjugacy_residual(h, rho0, rho1, grid)?;
    if pre > tol {
        return Err(CircleError::NotSemiConjugateAtScale {
            residual: pre,
            tol,
        });
    }

    // h₀(x) = inf { y : f⁺(y) ≥ x } with f⁺(y) = (y + h(y+))/2, found by
    // bisection; f⁺ is strictly increasing and degree one, so h₀ is a
    // continuous monotone degree-one map.
    let hc = h.clone();
    let h0_eval = move |x: f64| -> f64 {
        let fp = |y: f64| 0.5 * (y + hc.eval_plus(y));
        let mut lo = x - 2.0;
        let mut hi = x + 2.0;
        while fp(lo) >= x {
            lo -= 1.0;
        }
        while fp(hi) < x {
            hi += 1.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if fp(mid) >= x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let h0 = MonotoneDegreeOneMap::from_fns(h0_eval.clone(), h0_eval, true);
    let h0c = h0.clone();
    let h1 = MonotoneDegreeOneMap::from_fns(
        {
            let h0c = h0.clone();
            move |x| 2.0 * x - h0c.eval(x)
        },
        move |x| 2.0 * x - h0c.eval(x),
        true,
    );

    let mut images = BTreeMap::new();
    for g in &gens {
        let f0 = rho0.image(g)?.clone();
        let f1 = rho1.image(g)?.clone();
        let h0c = h0.clone();
        let h1c = h1.clone();
        images.insert(
            g.clone(),
            CircleHomeo::from_lift_only("blowup", move |x| {
                0.5 * (f0.eval_lift(h0c.eval(x)) + f1.eval_lift(h1c.eval(x)))
            }),
        );
    }
    let blown = CircleAction::new(rho0.presentation.clone(), images);
    let r0 = semiconjugacy_residual(&h0, &blown, rho0, grid)?;
    let r1 = semiconjugacy_residual(&h1, &blown, rho1, grid)?;
    Ok(CommonBlowup {
        action: blown,
        h0,
        h1,
        residual: r0.max(r1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::MoebiusElement;
    use crate::scalar::rat_frac;
    use crate::words::Presentation;

    fn rotation_action(alpha: f64) -> CircleAction {
        CircleAction::new(
            Presentation::free(&["a"]),
            [("a".to_string(), CircleHomeo::rotation(alpha))],
        )
    }

    fn schottky_action() -> CircleAction {
        let a = MoebiusElement::exp(4.0);
        let r = MoebiusElement::rot(0.5);
        let b = r.compose(&a).compose(&r.inverse());
        CircleAction::new(
            Presentation::free(&["a", "b"]),
            [
                ("a".to_string(), CircleHomeo::moebius(&a).unwrap()),
                ("b".to_string(), CircleHomeo::moebius(&b).unwrap()),
            ],
        )
    }

    #[test]
    fn irrational_rotation_fills_the_circle() {
        let act = rotation_action(std::f64::consts::FRAC_1_SQRT_2);
        let rep = limit_set_approx(&act, &[0.0, 0.3], 4000, 1e-2).unwrap();
        assert_eq!(rep.trichotomy, Trichotomy::WholeCircle);
        assert!(rep.gaps.is_empty());
    }

    #[test]
    fn schottky_pair_leaves_gaps() {
        let act = schottky_action();
        let rep = limit_set_approx(&act, &[0.0, 0.3, 0.63], 20_000, 2e-2).unwrap();
        assert_eq!(rep.trichotomy, Trichotomy::CantorLike);
        assert!(!rep.gaps.is_empty());
        // gaps really are empty of sample points, by construction
        let total: f64 = rep.gaps.iter().map(|(l, r)| r - l).sum();
        assert!(total > 0.1, "expected macroscopic gaps, got {total}");
    }

    #[test]
    fn finite_rotation_orbit_detected() {
        let act = CircleAction::new(
            Presentation::free(&["a"]),
            [(
                "a".to_string(),
                CircleHomeo::rotation_exact(rat_frac(1, 3)),
            )],
        );
        let rep = limit_set_approx(&act, &[0.05, 0.4], 1000, 1e-2).unwrap();
        assert_eq!(rep.trichotomy, Trichotomy::FiniteOrbit { size: 3 });
    }

    #[test]
    fn minimalize_finite_orbit_returns_exact_rotation() {
        let act = CircleAction::new(
            Presentation::free(&["a"]),
            [(
                "a".to_string(),
                CircleHomeo::rotation_exact(rat_frac(1, 3)),
            )],
        );
        let cfg = MinimalizeConfig {
            n_iter: 2000,
            grid: 1000,
            ..Default::default()
        };
        let m = minimalize(&act, &cfg).unwrap();
        assert_eq!(m.case, MinimalizeCase::FiniteOrbit { size: 3 });
        let r = m.action.image("a").unwrap().exact_rotation().unwrap().clone();
        assert_eq!(r, rat_frac(1, 3));
        assert!(m.residual < 1e-9, "residual {}", m.residual);
    }

    #[test]
    fn minimalize_leaves_minimal_actions_alone() {
        let act = rotation_action(std::f64::consts::FRAC_1_SQRT_2);
        let cfg = MinimalizeConfig {
            n_iter: 4000,
            eps_gap: 1e-2,
            grid: 500,
            ..Default::default()
        };
        let m = minimalize(&act, &cfg).unwrap();
        assert_eq!(m.case, MinimalizeCase::AlreadyMinimal);
        assert_eq!(m.residual, 0.0);
    }

    #[test]
    fn minimalize_collapses_schottky_gaps() {
        let act = schottky_action();
        let cfg = MinimalizeConfig {
            n_iter: 30_000,
            eps_gap: 2e-2,
            grid: 2000,
            ..Default::default()
        };
        let m = minimalize(&act, &cfg).unwrap();
        let MinimalizeCase::Collapsed { gaps } = m.case else {
            panic!("expected gap collapse, got {:?}", m.case);
        };
        assert!(gaps >= 4, "suspiciously few gaps recorded: {gaps}");
        assert!(m.residual <= 1e-6, "residual {}", m.residual);
        // Minimality at scale: the collapsed action's own limit set has no
        // macroscopic gaps.
        let rep = limit_set_approx(&m.action, &[0.21], 1500, 5e-2).unwrap();
        assert_eq!(rep.trichotomy, Trichotomy::WholeCircle);
    }

    #[test]
    fn blowup_with_identity_h_averages_and_reproduces() {
        let act = rotation_action(0.3);
        let b = common_blowup(&MonotoneDegreeOneMap::identity(), &act, &act, 1e-9, 400)
            .unwrap();
        for i in 0..40 {
            let x = i as f64 / 40.0;
            assert!((b.h0.eval(x) - x).abs() < 1e-12);
            assert!((b.h1.eval(x) - x).abs() < 1e-12);
            let d = b.action.image("a").unwrap().eval_lift(x) - (x + 0.3);
            assert!(d.abs() < 1e-12);
        }
        assert!(b.residual < 1e-9);
    }

    #[test]
    fn blowup_smooths_a_jump_per_the_closed_form() {
        // h rises with slope 1 on [0,1/2), jumps to 1 at 1/2, and is flat on
        // [1/2,1); both actions trivial. Then f±(y) = (y + h(y±))/2 gives
        // h₀ = x on [0,1/2), plateau 1/2 across the jump image [1/2,3/4],
        // then 2x−1 on (3/4,1); and h₁ = 2x − h₀.
        let h = MonotoneDegreeOneMap::from_fns(
            |x| {
                let k = x.floor();
                let u = x - k;
                k + if u <= 0.5 { u } else { 1.0 }
            },
            |x| {
                let k = x.floor();
                let u = x - k;
                k + if u < 0.5 { u } else { 1.0 }
            },
            false,
        );
        let trivial = CircleAction::new(
            Presentation::free(&["a"]),
            [("a".to_string(), CircleHomeo::identity())],
        );
        let b = common_blowup(&h, &trivial, &trivial, 1e-9, 300).unwrap();
        let expect_h0 = |x: f64| -> f64 {
            if x < 0.5 {
                x
            } else if x <= 0.75 {
                0.5
            } else {
                2.0 * x - 1.0
            }
        };
        for i in 0..100 {
            let x = i as f64 / 100.0;
            assert!(
                (b.h0.eval(x) - expect_h0(x)).abs() < 1e-9,
                "h0({x}) = {} vs {}",
                b.h0.eval(x),
                expect_h0(x)
            );
            assert!((b.h1.eval(x) - (2.0 * x - expect_h0(x))).abs() < 1e-9);
        }
        assert!(b.residual < 1e-9);
    }

    #[test]
    fn blowup_requires_the_semiconjugacy() {
        let r3 = rotation_action(1.0 / 3.0);
        let r4 = rotation_action(0.25);
        let err = common_blowup(&MonotoneDegreeOneMap::identity(), &r3, &r4, 1e-6, 100);
        assert!(matches!(
            err,
            Err(CircleError::NotSemiConjugateAtScale { .. })
        ));
    }

    #[test]
    fn blowup_of_schottky_with_its_minimalization() {
        let act = schottky_action();
        let cfg = MinimalizeConfig {
            n_iter: 30_000,
            eps_gap: 2e-2,
            grid: 1000,
            ..Default::default()
        };
        let m = minimalize(&act, &cfg).unwrap();
        let b = common_blowup(&m.h, &act, &m.action, 1e-6, 400).unwrap();
        assert!(b.residual <= 1e-6, "blow-up residual {}", b.residual);
    }
}
