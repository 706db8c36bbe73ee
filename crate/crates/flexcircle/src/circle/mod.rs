//! Circle homeomorphisms presented by lifts, and actions thereof.
//!
//! Every homeomorphism here is carried by a lift F: ℝ → ℝ with
//! F(x+1) = F(x) + 1, strictly increasing, plus an inverse-lift evaluator.
//! Working on lifts (never on circle-valued maps) removes branch ambiguity
//! from every cocycle formula in [`cocycle`] and keeps degree bookkeeping
//! explicit in [`minimal`].
//!
//! Möbius elements get globally continuous lifts through their
//! Rot·exp·Rot decomposition: each factor has an obvious lift, and the
//! middle factor's lift is an arctan reparametrization with no branch cuts.

pub mod cocycle;
pub mod invariant;
pub mod minimal;

use crate::moebius::{frac, MoebiusElement, MoebiusError};
use crate::scalar::{rat_to_f64, Rat};
use crate::words::{Presentation, Word, WordError};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, thiserror::Error, Clone)]
pub enum CircleError {
    #[error("basepoint degenerate: lift value {value} is within {eps:e} of an integer")]
    BasepointDegenerate { value: f64, eps: f64 },
    #[error("action does not lift: relation {relation} translates by {translation}")]
    NotLiftable { relation: String, translation: i64 },
    #[error("inconclusive at this scale: {0}")]
    InconclusiveAtScale(String),
    #[error("not semi-conjugate at this scale: residual {residual:e} exceeds {tol:e}")]
    NotSemiConjugateAtScale { residual: f64, tol: f64 },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

type Lift = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Structural tag carried alongside the lift, for algorithms that can
/// exploit extra information (exact rotations, Möbius hull iteration, cover
/// bookkeeping).
#[derive(Clone)]
pub enum HomeoKind {
    Rotation { exact: Option<Rat> },
    MoebiusBoundary(MoebiusElement),
    CoverLift { k: u32, sheet: i64, base: Box<CircleHomeo> },
    Composite(Vec<(CircleHomeo, i64)>),
    Other(&'static str),
}

/// An orientation-preserving circle homeomorphism with a chosen lift.
#[derive(Clone)]
pub struct CircleHomeo {
    kind: HomeoKind,
    lift: Lift,
    lift_inv: Lift,
}

impl fmt::Debug for CircleHomeo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            HomeoKind::Rotation { exact } => write!(f, "Rotation({}, exact={exact:?})", self.eval_lift(0.0)),
            HomeoKind::MoebiusBoundary(g) => write!(f, "MoebiusBoundary({g})"),
            HomeoKind::CoverLift { k, sheet, .. } => write!(f, "CoverLift(k={k}, sheet={sheet})"),
            HomeoKind::Composite(parts) => write!(f, "Composite({} factors)", parts.len()),
            HomeoKind::Other(tag) => write!(f, "CircleHomeo({tag})"),
        }
    }
}

/// Lift of the exp(τ) boundary action: fixes every integer and half-integer,
/// and on each unit interval is the arctan reparametrization
/// x ↦ 1/2 + arctan(e^τ·tan(π(x−1/2)))/π.
pub(crate) fn exp_lift(tau: f64, x: f64) -> f64 {
    let n = x.floor();
    let u = x - n;
    if u == 0.0 {
        return x;
    }
    n + 0.5 + (tau.exp() * (PI * (u - 0.5)).tan()).atan() / PI
}

impl CircleHomeo {
    pub fn identity() -> Self {
        CircleHomeo::rotation(0.0)
    }

    /// Rigid rotation x ↦ x + α.
    pub fn rotation(alpha: f64) -> Self {
        CircleHomeo {
            kind: HomeoKind::Rotation { exact: None },
            lift: Arc::new(move |x| x + alpha),
            lift_inv: Arc::new(move |y| y - alpha),
        }
    }

    /// Rotation by an exact rational, enabling exact cocycle arithmetic.
    pub fn rotation_exact(alpha: Rat) -> Self {
        let a = rat_to_f64(&alpha);
        CircleHomeo {
            kind: HomeoKind::Rotation { exact: Some(alpha) },
            lift: Arc::new(move |x| x + a),
            lift_inv: Arc::new(move |y| y - a),
        }
    }

    /// Boundary action of a real Möbius element, lifted via Rot·exp·Rot.
    pub fn moebius(g: &MoebiusElement) -> Result<Self, CircleError> {
        let k = g.kak()?;
        let ki = g.inverse().kak()?;
        let two_pi = 2.0 * PI;
        let lift = move |x: f64| exp_lift(k.tau, x + k.t2 / two_pi) + k.t1 / two_pi;
        let raw_inv = move |y: f64| exp_lift(ki.tau, y + ki.t2 / two_pi) + ki.t1 / two_pi;
        // Both closures lift mutually inverse circle maps, so raw_inv∘lift − id
        // is a constant integer — but not always zero: sign canonicalization of
        // the inverse matrix can shift its rotation angles by full turns. Snap
        // to the branch that makes lift_inv the exact functional inverse, which
        // compose_word and lift_defect rely on.
        let probe = 0.37;
        let branch = (raw_inv(lift(probe)) - probe).round();
        let lift_inv = move |y: f64| raw_inv(y) - branch;
        Ok(CircleHomeo {
            kind: HomeoKind::MoebiusBoundary(g.clone()),
            lift: Arc::new(lift),
            lift_inv: Arc::new(lift_inv),
        })
    }

    /// Compose left-to-right as a word: (f, 2), (g, −1) gives f²∘g⁻¹.
    pub fn compose_word(parts: Vec<(CircleHomeo, i64)>) -> Self {
        let factors: Vec<(CircleHomeo, i64)> = parts
            .iter()
            .filter(|(_, e)| *e != 0)
            .map(|(h, e)| (h.clone(), *e))
            .collect();
        let fwd = factors.clone();
        let lift = move |mut x: f64| {
            for (h, e) in fwd.iter().rev() {
                for _ in 0..e.unsigned_abs() {
                    x = if *e > 0 { h.eval_lift(x) } else { h.eval_lift_inv(x) };
                }
            }
            x
        };
        let bwd = factors.clone();
        let lift_inv = move |mut y: f64| {
            for (h, e) in bwd.iter() {
                for _ in 0..e.unsigned_abs() {
                    y = if *e > 0 { h.eval_lift_inv(y) } else { h.eval_lift(y) };
                }
            }
            y
        };
        CircleHomeo {
            kind: HomeoKind::Composite(factors),
            lift: Arc::new(lift),
            lift_inv: Arc::new(lift_inv),
        }
    }

    /// Degree-k cover lift: the unique circle map H with q_k∘H = f∘q_k on the
    /// chosen sheet, where q_k(x) = kx mod 1; H(x) = (F(kx) + sheet)/k.
    pub fn cover_lift(base: &CircleHomeo, k: u32, sheet: i64) -> Self {
        assert!(k >= 1);
        let kf = k as f64;
        let m = sheet as f64;
        let b = base.clone();
        let bi = base.clone();
        CircleHomeo {
            kind: HomeoKind::CoverLift {
                k,
                sheet,
                base: Box::new(base.clone()),
            },
            lift: Arc::new(move |x| (b.eval_lift(kf * x) + m) / kf),
            lift_inv: Arc::new(move |y| bi.eval_lift_inv(kf * y - m) / kf),
        }
    }

    /// Assemble from a lift alone; the inverse evaluator bisects. Costs ~100
    /// forward evaluations per inverse query, so prefer [`Self::from_lifts`]
    /// when a closed-form inverse exists.
    pub fn from_lift_only(
        tag: &'static str,
        lift: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let l: Lift = Arc::new(lift);
        let l2 = l.clone();
        let inv = move |y: f64| {
            let mut lo = y - 2.0;
            let mut hi = y + 2.0;
            while l2(lo) > y {
                lo -= 1.0;
            }
            while l2(hi) < y {
                hi += 1.0;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if l2(mid) <= y {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        CircleHomeo {
            kind: HomeoKind::Other(tag),
            lift: l,
            lift_inv: Arc::new(inv),
        }
    }

    /// Assemble from explicit lift closures (piecewise-analytic maps and
    /// other custom constructions). The caller vouches for degree one and
    /// strict monotonicity; [`CircleHomeo::lift_defect`] spot-checks.
    pub fn from_lifts(
        tag: &'static str,
        lift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lift_inv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CircleHomeo {
            kind: HomeoKind::Other(tag),
            lift: Arc::new(lift),
            lift_inv: Arc::new(lift_inv),
        }
    }

    pub fn kind(&self) -> &HomeoKind {
        &self.kind
    }

    pub fn eval_lift(&self, x: f64) -> f64 {
        (self.lift)(x)
    }

    pub fn eval_lift_inv(&self, y: f64) -> f64 {
        (self.lift_inv)(y)
    }

    /// The circle map θ ↦ F(θ) mod 1.
    pub fn eval_circle(&self, theta: f64) -> f64 {
        frac(self.eval_lift(frac(theta)))
    }

    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            HomeoKind::Rotation { exact } => HomeoKind::Rotation {
                exact: exact.clone().map(|r| -r),
            },
            HomeoKind::MoebiusBoundary(g) => HomeoKind::MoebiusBoundary(g.inverse()),
            _ => HomeoKind::Other("inverse"),
        };
        CircleHomeo {
            kind,
            lift: self.lift_inv.clone(),
            lift_inv: self.lift.clone(),
        }
    }

    pub fn powi(&self, n: i64) -> Self {
        CircleHomeo::compose_word(vec![(self.clone(), n)])
    }

    /// Exact rotation amount, when this is an exact rigid rotation.
    pub fn exact_rotation(&self) -> Option<&Rat> {
        match &self.kind {
            HomeoKind::Rotation { exact } => exact.as_ref(),
            _ => None,
        }
    }

    /// Worst violation of the homeomorphism-lift contract on a sample grid:
    /// max of |F(x+1) − F(x) − 1|, |F⁻¹(F(x)) − x|, and monotonicity defect.
    pub fn lift_defect(&self, grid: usize) -> f64 {
        let mut worst: f64 = 0.0;
        let mut prev = self.eval_lift(-0.5);
        for i in 0..=grid {
            let x = -0.5 + i as f64 / grid as f64 * 2.0;
            let fx = self.eval_lift(x);
            worst = worst.max((self.eval_lift(x + 1.0) - fx - 1.0).abs());
            worst = worst.max((self.eval_lift_inv(fx) - x).abs());
            if i > 0 {
                worst = worst.max((prev - fx).max(0.0));
            }
            prev = fx;
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// Rotation and translation numbers.
// ---------------------------------------------------------------------------

/// Fⁿ(0)/n together with the a-priori error 1/n (from subadditivity of the
/// orbit cocycle).
pub fn translation_number(f: &CircleHomeo, n: u32) -> (f64, f64) {
    assert!(n >= 1);
    if let Some(r) = f.exact_rotation() {
        return (rat_to_f64(r), 1.0 / n as f64);
    }
    let mut x = 0.0;
    for _ in 0..n {
        x = f.eval_lift(x);
    }
    (x / n as f64, 1.0 / n as f64)
}

/// Rotation number in [0, 1) with error bound 1/n.
pub fn rotation_number(f: &CircleHomeo, n: u32) -> (f64, f64) {
    let (t, e) = translation_number(f, n);
    (frac(t), e)
}

// ---------------------------------------------------------------------------
// Monotone degree-one maps.
// ---------------------------------------------------------------------------

/// A nondecreasing map h: ℝ → ℝ with h(x+1) = h(x) + 1, possibly with jumps
/// and plateaus; the one-sided evaluators answer h(x−) and h(x+).
#[derive(Clone)]
pub struct MonotoneDegreeOneMap {
    minus: Lift,
    plus: Lift,
    pub surjective: bool,
    /// Maximal plateau arcs in [0, 1), when known (staircases record these).
    pub gaps: Vec<(f64, f64)>,
}

impl fmt::Debug for MonotoneDegreeOneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MonotoneDegreeOneMap(surjective={}, {} known gaps)",
            self.surjective,
            self.gaps.len()
        )
    }
}

impl MonotoneDegreeOneMap {
    pub fn identity() -> Self {
        MonotoneDegreeOneMap {
            minus: Arc::new(|x| x),
            plus: Arc::new(|x| x),
            surjective: true,
            gaps: vec![],
        }
    }

    pub fn from_fns(
        minus: impl Fn(f64) -> f64 + Send + Sync + 'static,
        plus: impl Fn(f64) -> f64 + Send + Sync + 'static,
        surjective: bool,
    ) -> Self {
        MonotoneDegreeOneMap {
            minus: Arc::new(minus),
            plus: Arc::new(plus),
            surjective,
            gaps: vec![],
        }
    }

    /// Continuous staircase collapsing each gap to a point, linear between
    /// consecutive gaps (each inter-gap core segment gets width 1/m).
    ///
    /// Gaps are arcs (l, r) with 0 ≤ l < 1 and l < r ≤ l + 1, pairwise
    /// disjoint mod 1, sorted by l.
    pub fn staircase(gaps: Vec<(f64, f64)>) -> Self {
        assert!(!gaps.is_empty(), "staircase needs at least one gap");
        let m = gaps.len();
        // Breakpoints of one period: gap i occupies [lᵢ, rᵢ] at constant
        // value i/m; the core segment [rᵢ, l_{i+1}] rises linearly to
        // (i+1)/m.
        let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(2 * m + 1);
        for (i, (l, r)) in gaps.iter().enumerate() {
            nodes.push((*l, i as f64 / m as f64));
            nodes.push((*r, i as f64 / m as f64));
        }
        // close the period: the wrap of gap 0 sits one whole turn later
        nodes.push((gaps[0].0 + 1.0, 1.0));
        let base = nodes[0].0;
        let eval = move |x: f64| -> f64 {
            let k = ((x - base) / 1.0).floor();
            let x0 = x - k;
            // binary search for the segment containing x0 ∈ [base, base+1]
            let mut lo = 0usize;
            let mut hi = nodes.len() - 1;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if nodes[mid].0 <= x0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (x1, v1) = nodes[lo];
            let (x2, v2) = nodes[hi];
            let v = if x2 > x1 {
                v1 + (v2 - v1) * ((x0 - x1) / (x2 - x1)).clamp(0.0, 1.0)
            } else {
                v1
            };
            v + k
        };
        let e2 = eval.clone();
        MonotoneDegreeOneMap {
            minus: Arc::new(eval),
            plus: Arc::new(e2),
            surjective: true,
            gaps,
        }
    }

    /// Pure step map for a finite invariant set: h = j/N on [xⱼ, x_{j+1}),
    /// jumping at each orbit point.
    pub fn step_on_orbit(points: &[f64]) -> Self {
        let mut pts: Vec<f64> = points.iter().map(|p| frac(*p)).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let n = pts.len();
        assert!(n >= 1);
        let count_le = {
            let pts = pts.clone();
            move |x: f64| -> f64 {
                let k = x.floor();
                let x0 = x - k;
                let j = pts.partition_point(|p| *p <= x0);
                k + j as f64 / n as f64
            }
        };
        let count_lt = {
            let pts = pts.clone();
            move |x: f64| -> f64 {
                let k = x.floor();
                let x0 = x - k;
                let j = pts.partition_point(|p| *p < x0);
                k + j as f64 / n as f64
            }
        };
        let gaps = (0..n)
            .map(|j| {
                let l = pts[j];
                let r = if j + 1 < n { pts[j + 1] } else { pts[0] + 1.0 };
                (l, r)
            })
            .collect();
        MonotoneDegreeOneMap {
            minus: Arc::new(count_lt),
            plus: Arc::new(count_le),
            surjective: false,
            gaps,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.plus)(x)
    }

    pub fn eval_minus(&self, x: f64) -> f64 {
        (self.minus)(x)
    }

    pub fn eval_plus(&self, x: f64) -> f64 {
        (self.plus)(x)
    }

    /// Lower generalized inverse: inf {x : h(x+) ≥ y}, by bisection.
    pub fn lower_inverse(&self, y: f64) -> f64 {
        // degree one pins h(x) within x ± C; bracket generously
        let mut lo = y - 2.0;
        let mut hi = y + 2.0;
        while self.eval_plus(lo) >= y {
            lo -= 1.0;
        }
        while self.eval_plus(hi) < y {
            hi += 1.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.eval_plus(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Upper generalized inverse: sup {x : h(x−) ≤ y}, by bisection.
    pub fn upper_inverse(&self, y: f64) -> f64 {
        let mut lo = y - 2.0;
        let mut hi = y + 2.0;
        while self.eval_minus(lo) > y {
            lo -= 1.0;
        }
        while self.eval_minus(hi) <= y {
            hi += 1.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.eval_minus(mid) <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// A representative preimage of `y`: the midpoint of `h⁻¹([y−δ, y+δ])`
    /// for a float-noise window δ. Where the inverse is unique this is the
    /// inverse to within the window; across a plateau it picks the interior
    /// point. The window matters: a collapsing map crushes its ramps to
    /// widths far below the resolution of its values, so the exact preimage
    /// of a computed value can sit on the wrong side of a plateau and the
    /// conjugated dynamics would amplify that misplacement without bound.
    pub fn inverse_point(&self, y: f64) -> f64 {
        const SNAP: f64 = 1e-11;
        0.5 * (self.lower_inverse(y - SNAP) + self.upper_inverse(y + SNAP))
    }

    /// Conjugate a homeomorphism through this (surjective) map:
    /// x ↦ h(F(h⁻(x))). Well defined on the collapsed circle when the
    /// homeomorphism permutes the plateaus of h.
    pub fn conjugate(&self, f: &CircleHomeo) -> CircleHomeo {
        let h1 = self.clone();
        let h2 = self.clone();
        let f1 = f.clone();
        let f2 = f.clone();
        CircleHomeo::from_lifts(
            "collapsed",
            move |x| h1.eval(f1.eval_lift(h1.inverse_point(x))),
            move |y| h2.eval(f2.eval_lift_inv(h2.inverse_point(y))),
        )
    }
}

// ---------------------------------------------------------------------------
// Circle actions.
// ---------------------------------------------------------------------------

/// A representation into Homeo₊(S¹) with chosen lifts per generator.
#[derive(Clone, Debug)]
pub struct CircleAction {
    pub presentation: Presentation,
    pub images: BTreeMap<String, CircleHomeo>,
}

impl CircleAction {
    pub fn new(
        presentation: Presentation,
        images: impl IntoIterator<Item = (String, CircleHomeo)>,
    ) -> Self {
        CircleAction {
            presentation,
            images: images.into_iter().collect(),
        }
    }

    pub fn image(&self, g: &str) -> Result<&CircleHomeo, CircleError> {
        self.images
            .get(g)
            .ok_or_else(|| WordError::UnknownGenerator(g.to_string()).into())
    }

    pub fn evaluate(&self, w: &Word) -> Result<CircleHomeo, CircleError> {
        let mut parts = vec![];
        for (g, e) in w.syllables() {
            parts.push((self.image(g)?.clone(), *e));
        }
        Ok(CircleHomeo::compose_word(parts))
    }

    pub fn generators(&self) -> Vec<String> {
        self.presentation.generators()
    }
}

/// The defining relation words of a presentation (identities the images must
/// satisfy, beyond free reduction).
pub fn relation_words(pres: &Presentation) -> Vec<Word> {
    match pres {
        Presentation::Free { .. } => vec![],
        Presentation::FiniteCyclic { gen, order } => {
            vec![Word::new([(gen.clone(), *order as i64)])]
        }
        Presentation::FreeProduct { left, right } => {
            let mut r = relation_words(left);
            r.extend(relation_words(right));
            r
        }
        Presentation::Amalgam { a, b, c_in_a, c_in_b } => {
            let mut r = relation_words(a);
            r.extend(relation_words(b));
            r.push(c_in_a.concat(&c_in_b.inverse()));
            r
        }
        Presentation::Hnn { base, c, c_image, stable } => {
            let mut r = relation_words(base);
            let s = Word::gen(stable);
            r.push(
                s.concat(c)
                    .concat(&s.inverse())
                    .concat(&c_image.inverse()),
            );
            r
        }
    }
}

/// Integer translation of each relation under the chosen lifts, with the
/// residual of the integer fit. All-zero translations mean the action lifts
/// to Homeo_ℤ(ℝ) with these lift choices.
pub fn relation_translations(
    action: &CircleAction,
) -> Result<Vec<(Word, i64, f64)>, CircleError> {
    let mut out = vec![];
    for r in relation_words(&action.presentation) {
        let h = action.evaluate(&r)?;
        let mut worst = 0.0f64;
        let mut m = 0i64;
        for i in 0..5 {
            let x = i as f64 / 5.0;
            let t = h.eval_lift(x) - x;
            let k = t.round();
            if i == 0 {
                m = k as i64;
            }
            worst = worst.max((t - k).abs()).max((k as i64 - m).abs() as f64);
        }
        out.push((r, m, worst));
    }
    Ok(out)
}
