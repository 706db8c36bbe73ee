//! Small interval/arc toolkit used by the certification routines.
//!
//! Certificates on the circle are stated at a configurable resolution ε:
//! every floating evaluation is padded outward by ε before a containment or
//! disjointness test, so a certificate asserts inclusions with an explicit
//! margin rather than raw double equality. Double evaluations of the maps in
//! this crate are accurate to ~1e−13, far below the default ε = 1e−9, which
//! is what makes the padding sound in practice.

/// Fractional part in [0, 1).
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance on the circle R/Z.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// Closed real interval with outward-padded arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "bad interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn pad(self, eps: f64) -> Self {
        Interval {
            lo: (self.lo - eps).next_down(),
            hi: (self.hi + eps).next_up(),
        }
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn add(self, o: Interval) -> Self {
        Interval {
            lo: (self.lo + o.lo).next_down(),
            hi: (self.hi + o.hi).next_up(),
        }
    }

    pub fn mul(self, o: Interval) -> Self {
        let cands = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let lo = cands.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }
}

/// Closed arc on the circle R/Z, stored as a starting point and a length.
/// `len == 1` denotes the full circle; `len == 0` a single point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

impl Arc {
    pub fn new(start: f64, len: f64) -> Self {
        assert!((0.0..=1.0).contains(&len), "bad arc length {len}");
        Arc {
            start: frac(start),
            len,
        }
    }

    /// Shortest arc containing both endpoints, oriented from `a` to `b`
    /// counterclockwise.
    pub fn from_endpoints(a: f64, b: f64) -> Self {
        Arc::new(a, frac(b - a))
    }

    pub fn end(&self) -> f64 {
        frac(self.start + self.len)
    }

    pub fn is_full(&self) -> bool {
        self.len >= 1.0
    }

    pub fn contains(&self, theta: f64) -> bool {
        if self.is_full() {
            return true;
        }
        frac(theta - self.start) <= self.len
    }

    pub fn contains_arc(&self, other: &Arc) -> bool {
        if self.is_full() {
            return true;
        }
        if other.is_full() {
            return false;
        }
        let off = frac(other.start - self.start);
        off + other.len <= self.len
    }

    /// Grow by `eps` on both sides (clamped to the full circle).
    pub fn pad(&self, eps: f64) -> Arc {
        let len = (self.len + 2.0 * eps).min(1.0);
        Arc::new(self.start - eps, len)
    }

    /// True when the arcs have no common point, with slack `margin` (the
    /// arcs stay disjoint even after padding each by margin/2).
    pub fn disjoint(&self, other: &Arc, margin: f64) -> bool {
        if self.is_full() || other.is_full() {
            return false;
        }
        !self
            .pad(margin / 2.0)
            .overlaps(&other.pad(margin / 2.0))
    }

    pub fn overlaps(&self, other: &Arc) -> bool {
        if self.is_full() || other.is_full() {
            return true;
        }
        frac(other.start - self.start) <= self.len
            || frac(self.start - other.start) <= other.len
    }

    pub fn midpoint(&self) -> f64 {
        frac(self.start + self.len / 2.0)
    }
}

/// Complement of a finite union of pairwise-disjoint arcs, as a list of arcs
/// sorted by starting point. Returns `None` if the union covers the circle.
pub fn complement(arcs: &[Arc]) -> Option<Vec<Arc>> {
    if arcs.is_empty() {
        return Some(vec![Arc::new(0.0, 1.0)]);
    }
    let mut sorted: Vec<&Arc> = arcs.iter().collect();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut out = vec![];
    for (i, a) in sorted.iter().enumerate() {
        let next = sorted[(i + 1) % sorted.len()];
        let gap = frac(next.start - a.end());
        let gap = if i + 1 == sorted.len() && sorted.len() == 1 {
            1.0 - a.len
        } else {
            gap
        };
        if gap > 0.0 {
            out.push(Arc::new(a.end(), gap));
        }
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_containment_across_wrap() {
        let a = Arc::new(0.9, 0.2); // [0.9, 0.1]
        assert!(a.contains(0.95));
        assert!(a.contains(0.05));
        assert!(!a.contains(0.5));
        assert!(a.contains_arc(&Arc::new(0.95, 0.1)));
        assert!(!a.contains_arc(&Arc::new(0.95, 0.3)));
    }

    #[test]
    fn arc_disjointness_with_margin() {
        let a = Arc::new(0.0, 0.1);
        let b = Arc::new(0.2, 0.1);
        assert!(a.disjoint(&b, 0.05));
        assert!(!a.disjoint(&b, 0.25));
        assert!(!a.disjoint(&Arc::new(0.05, 0.1), 0.0));
    }

    #[test]
    fn complement_of_two_arcs() {
        let arcs = [Arc::new(0.0, 0.25), Arc::new(0.5, 0.25)];
        let comp = complement(&arcs).unwrap();
        assert_eq!(comp.len(), 2);
        assert!(comp.iter().any(|c| (c.start - 0.25).abs() < 1e-12 && (c.len - 0.25).abs() < 1e-12));
        assert!(comp.iter().any(|c| (c.start - 0.75).abs() < 1e-12 && (c.len - 0.25).abs() < 1e-12));
    }

    #[test]
    fn interval_padding_is_outward() {
        let x = Interval::point(1.0).pad(1e-9);
        assert!(x.lo < 1.0 - 0.9e-9 && x.hi > 1.0 + 0.9e-9);
        let p = Interval::new(2.0, 3.0).mul(Interval::new(-1.0, 4.0));
        assert!(p.lo <= -3.0 && p.hi >= 12.0);
    }

    #[test]
    fn circle_distance() {
        assert!((circle_dist(0.95, 0.05) - 0.1).abs() < 1e-12);
        assert!((circle_dist(0.25, 0.5) - 0.25).abs() < 1e-12);
    }
}
