//! Univariate polynomials, Laurent polynomials, and exact real-root
//! isolation over Q(√d).
//!
//! Root isolation uses Sturm sequences computed with a primitive
//! pseudo-remainder scheme (coefficients are rescaled to "integer" elements
//! of Z[√d] and content-stripped after every step, with explicit sign
//! bookkeeping so that sign variations stay those of the true Sturm chain).
//! All interval endpoints are rationals and every sign test is exact, so an
//! isolating interval is a certificate, not a heuristic.

use crate::scalar::{rat_i64, Coeff, Quad, QuadC, Rat, Ring};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense univariate polynomial, coefficients in ascending degree order with
/// no trailing zeros. The zero polynomial has an empty coefficient vector.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<T: Ring> {
    coeffs: Vec<T>,
}

impl<T: Ring> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    pub fn monomial(deg: usize, c: T) -> Self {
        let mut v = vec![T::zero(); deg + 1];
        v[deg] = c;
        Poly::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(self.coeff(k).radd(&o.coeff(k)));
        }
        Poly::new(v)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c.rneg()).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.rmul(s)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].radd(&a.rmul(b));
            }
        }
        Poly::new(v)
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.rmul(x).radd(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c.rmul(&T::from_int(k as i64 + 1)))
                .collect(),
        )
    }

    pub fn eval_f64(&self, x: f64) -> f64
    where
        T: Coeff,
    {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.approx().0;
        }
        acc
    }
}

/// Laurent polynomial: finitely many terms c_k z^k with k possibly negative.
#[derive(Clone, PartialEq, Debug)]
pub struct Laurent<T: Ring> {
    lo: i64,
    coeffs: Vec<T>, // c_lo, c_{lo+1}, …; trimmed at both ends
}

impl<T: Ring> Laurent<T> {
    pub fn new(lo: i64, coeffs: Vec<T>) -> Self {
        let mut l = Laurent { lo, coeffs };
        l.trim();
        l
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let skip = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if skip > 0 {
            self.coeffs.drain(..skip);
            self.lo += skip as i64;
        }
        if self.coeffs.is_empty() {
            self.lo = 0;
        }
    }

    pub fn zero() -> Self {
        Laurent {
            lo: 0,
            coeffs: vec![],
        }
    }

    pub fn constant(c: T) -> Self {
        Laurent::new(0, vec![c])
    }

    pub fn monomial(exp: i64, c: T) -> Self {
        Laurent::new(exp, vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when the only possible term is the constant one.
    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty() || (self.lo == 0 && self.coeffs.len() == 1)
    }

    pub fn constant_term(&self) -> T {
        self.coeff(0)
    }

    pub fn min_exp(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.lo)
        }
    }

    pub fn max_exp(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.lo + self.coeffs.len() as i64 - 1)
        }
    }

    pub fn coeff(&self, exp: i64) -> T {
        if self.is_zero() || exp < self.lo {
            return T::zero();
        }
        self.coeffs
            .get((exp - self.lo) as usize)
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &T)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, c)| (self.lo + k as i64, c))
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(o.lo);
        let hi = self.max_exp().unwrap().max(o.max_exp().unwrap());
        let mut v = Vec::with_capacity((hi - lo + 1) as usize);
        for e in lo..=hi {
            v.push(self.coeff(e).radd(&o.coeff(e)));
        }
        Laurent::new(lo, v)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Laurent {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| c.rneg()).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Laurent::zero();
        }
        let lo = self.lo + o.lo;
        let mut v = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].radd(&a.rmul(b));
            }
        }
        Laurent::new(lo, v)
    }

    /// Multiply by z^k.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Laurent::zero();
        }
        Laurent {
            lo: self.lo + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Evaluate at an invertible point, given x and x⁻¹.
    pub fn eval_at(&self, x: &T, x_inv: &T) -> T {
        let mut acc = T::zero();
        for (e, c) in self.terms() {
            let mut term = c.clone();
            let (base, n) = if e >= 0 { (x, e) } else { (x_inv, -e) };
            for _ in 0..n {
                term = term.rmul(base);
            }
            acc = acc.radd(&term);
        }
        acc
    }

    /// Clear negative exponents: returns (p, s) with `self = z^{-s} · p(z)`
    /// and p(0) ≠ 0.
    pub fn numerator(&self) -> (Poly<T>, i64) {
        if self.is_zero() {
            return (Poly::zero(), 0);
        }
        (Poly::new(self.coeffs.clone()), -self.lo)
    }
}

impl<T: Ring> Ring for Laurent<T> {
    fn zero() -> Self {
        Laurent::zero()
    }
    fn one() -> Self {
        Laurent::constant(T::one())
    }
    fn from_int(n: i64) -> Self {
        Laurent::constant(T::from_int(n))
    }
    fn radd(&self, o: &Self) -> Self {
        Laurent::add(self, o)
    }
    fn rsub(&self, o: &Self) -> Self {
        Laurent::sub(self, o)
    }
    fn rmul(&self, o: &Self) -> Self {
        Laurent::mul(self, o)
    }
    fn rneg(&self) -> Self {
        Laurent::neg(self)
    }
    fn is_zero(&self) -> bool {
        Laurent::is_zero(self)
    }
}

// ---------------------------------------------------------------------------
// Exact root isolation over Q(√d).
// ---------------------------------------------------------------------------

/// An isolating interval for one distinct real root.
///
/// The root lies in `[lo, hi]`; `exact` is set when the root is a rational
/// (or field) point hit exactly during isolation. `sign_change` tells whether
/// the polynomial changes sign across the interval, i.e. whether the root has
/// odd multiplicity.
#[derive(Clone, Debug)]
pub struct RootInterval {
    pub lo: Rat,
    pub hi: Rat,
    pub exact: Option<Rat>,
    pub sign_change: bool,
}

impl RootInterval {
    pub fn midpoint_f64(&self) -> f64 {
        (crate::scalar::rat_to_f64(&self.lo) + crate::scalar::rat_to_f64(&self.hi)) / 2.0
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }
}

fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

/// Rescale to Z[√d] coordinates and strip integer content; the result has the
/// same roots and the same sign everywhere (the scaling factor is positive).
fn primitive_part(p: &Poly<Quad>) -> Poly<Quad> {
    if p.is_zero() {
        return Poly::zero();
    }
    let mut den = BigInt::one();
    for c in p.coeffs() {
        den = den.lcm(c.rat_part().denom());
        den = den.lcm(c.sqrt_part().denom());
    }
    let scaled: Vec<Quad> = p
        .coeffs()
        .iter()
        .map(|c| c.rmul(&Quad::from_rat(Rat::from_integer(den.clone()))))
        .collect();
    let mut content = BigInt::zero();
    for c in &scaled {
        content = gcd_big(&content, c.rat_part().numer());
        content = gcd_big(&content, c.sqrt_part().numer());
    }
    if content.is_zero() || content.is_one() {
        return Poly::new(scaled);
    }
    let inv = Quad::from_rat(Rat::new(BigInt::one(), content));
    Poly::new(scaled.iter().map(|c| c.rmul(&inv)).collect())
}

/// Pseudo-remainder: returns (r, k) with r = lc(g)^k · (f mod g).
fn pseudo_rem(f: &Poly<Quad>, g: &Poly<Quad>) -> (Poly<Quad>, u32) {
    let dg = g.degree().expect("pseudo_rem by zero");
    let lc_g = g.leading().unwrap().clone();
    let mut r = f.clone();
    let mut k = 0u32;
    while let Some(dr) = r.degree() {
        if dr < dg {
            break;
        }
        let lead = r.leading().unwrap().clone();
        // r ← lc(g)·r − lead·x^(dr−dg)·g
        r = r.scale(&lc_g).sub(&g.mul(&Poly::monomial(dr - dg, lead)));
        k += 1;
    }
    (r, k)
}

/// Sturm chain of `p` with primitive-PRS coefficient control. Sign variations
/// of this chain agree with the classical chain at every non-root sample.
fn sturm_chain(p: &Poly<Quad>) -> Vec<Poly<Quad>> {
    let p0 = primitive_part(p);
    if p0.is_zero() {
        return vec![];
    }
    let mut chain = vec![p0.clone()];
    let p1 = primitive_part(&p0.derivative());
    if p1.is_zero() {
        return chain;
    }
    chain.push(p1);
    loop {
        let n = chain.len();
        let (f, g) = (&chain[n - 2], &chain[n - 1]);
        let (mut r, k) = pseudo_rem(f, g);
        if r.is_zero() {
            break;
        }
        // True next Sturm element is −(f mod g); fix the pseudo-remainder
        // sign so content stripping (a positive scaling) preserves it.
        let s = g.leading().unwrap().sign();
        let flip = if k % 2 == 1 && s < 0 { 1 } else { -1 };
        if flip == -1 {
            r = r.neg();
        }
        chain.push(primitive_part(&r));
        if chain.last().unwrap().degree() == Some(0) {
            break;
        }
    }
    chain
}

fn sign_variations(signs: &[i8]) -> usize {
    let mut v = 0;
    let mut last = 0i8;
    for &s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            v += 1;
        }
        last = s;
    }
    v
}

fn chain_variations_at(chain: &[Poly<Quad>], x: &Rat) -> usize {
    let q = Quad::from_rat(x.clone());
    let signs: Vec<i8> = chain.iter().map(|p| p.eval(&q).sign()).collect();
    sign_variations(&signs)
}

/// Rational upper bound for |q|.
fn quad_abs_upper(q: &Quad) -> Rat {
    let d = q.radicand();
    let root_up = rat_i64((d as f64).sqrt().ceil() as i64 + 1);
    q.rat_part().abs() + q.sqrt_part().abs() * root_up
}

/// Cauchy-style bound: all real roots lie in (−B, B).
pub fn root_bound(p: &Poly<Quad>) -> Rat {
    let lc = match p.leading() {
        Some(c) => c,
        None => return Rat::one(),
    };
    let inv_lead_up = quad_abs_upper(&lc.inv());
    let mut m = Rat::zero();
    for c in p.coeffs() {
        let b = quad_abs_upper(c) * &inv_lead_up;
        if b > m {
            m = b;
        }
    }
    m + rat_i64(1)
}

struct Isolator<'a> {
    p: &'a Poly<Quad>,
    chain: Vec<Poly<Quad>>,
}

impl<'a> Isolator<'a> {
    fn eval_sign(&self, x: &Rat) -> i8 {
        self.p.eval(&Quad::from_rat(x.clone())).sign()
    }

    /// A point in (lo, hi) where p does not vanish, biased near `target`.
    fn nonroot_near(&self, lo: &Rat, hi: &Rat, target: &Rat) -> Rat {
        let mut step = (hi - lo) / rat_i64(4);
        for _ in 0..128 {
            for cand in [target - &step, target + &step] {
                if &cand > lo && &cand < hi && self.eval_sign(&cand) != 0 {
                    return cand;
                }
            }
            step /= rat_i64(2);
        }
        panic!("could not find a non-root sample point");
    }

    /// Recursively isolate roots of p in (lo, hi); both endpoints must be
    /// non-roots.
    fn isolate(&self, lo: Rat, hi: Rat, vlo: usize, vhi: usize, out: &mut Vec<RootInterval>) {
        let n = vlo - vhi;
        if n == 0 {
            return;
        }
        if n == 1 {
            out.push(RootInterval {
                sign_change: self.eval_sign(&lo) * self.eval_sign(&hi) < 0,
                lo,
                hi,
                exact: None,
            });
            return;
        }
        let mid = (&lo + &hi) / rat_i64(2);
        if self.eval_sign(&mid) == 0 {
            // The midpoint is itself a root; emit it exactly and recurse on
            // punctured neighbours. V(a) − V(b) counts roots in (a, b] (zero
            // signs are skipped, so evaluating the chain at a root is fine),
            // so tighten the puncture until it certifiably contains only mid.
            let vm = chain_variations_at(&self.chain, &mid);
            let mut l = self.nonroot_near(&lo, &mid, &mid);
            while chain_variations_at(&self.chain, &l) - vm > 1 {
                l = self.nonroot_near(&l, &mid, &mid);
            }
            let mut r = self.nonroot_near(&mid, &hi, &mid);
            while vm > chain_variations_at(&self.chain, &r) {
                r = self.nonroot_near(&mid, &r, &mid);
            }
            let (vl, vr) = (
                chain_variations_at(&self.chain, &l),
                chain_variations_at(&self.chain, &r),
            );
            out.push(RootInterval {
                lo: l.clone(),
                hi: r.clone(),
                exact: Some(mid),
                sign_change: self.eval_sign(&l) * self.eval_sign(&r) < 0,
            });
            self.isolate(lo, l, vlo, vl, out);
            self.isolate(r, hi, vr, vhi, out);
        } else {
            let vm = chain_variations_at(&self.chain, &mid);
            self.isolate(lo, mid.clone(), vlo, vm, out);
            self.isolate(mid, hi, vm, vhi, out);
        }
    }
}

/// Isolate all distinct real roots of `p` in the open interval (lo, hi),
/// refining every isolating interval to width ≤ `tol`. Results are sorted.
///
/// Panics if `p` is the zero polynomial (callers treat that case separately).
pub fn isolate_roots_in(p: &Poly<Quad>, lo: &Rat, hi: &Rat, tol: &Rat) -> Vec<RootInterval> {
    assert!(!p.is_zero(), "cannot isolate roots of the zero polynomial");
    if p.degree() == Some(0) || lo >= hi {
        return vec![];
    }
    let chain = sturm_chain(p);
    let iso = Isolator { p, chain };
    // Nudge endpoints off roots of p (shrinking the interval is fine for our
    // callers: endpoint roots are reported by the enclosing search windows).
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let mut guard = 0;
    while iso.eval_sign(&lo) == 0 {
        lo = &lo + (&hi - &lo) / rat_i64(1 << 20);
        guard += 1;
        assert!(guard < 64, "endpoint adjustment failed");
    }
    while iso.eval_sign(&hi) == 0 {
        hi = &hi - (&hi - &lo) / rat_i64(1 << 20);
        guard += 1;
        assert!(guard < 128, "endpoint adjustment failed");
    }
    if lo >= hi {
        return vec![];
    }
    let vlo = chain_variations_at(&iso.chain, &lo);
    let vhi = chain_variations_at(&iso.chain, &hi);
    let mut out = vec![];
    iso.isolate(lo, hi, vlo, vhi, &mut out);
    for r in &mut out {
        refine_interval(p, r, tol);
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

/// Isolate all real roots of `p`, using a computed root bound.
pub fn isolate_real_roots(p: &Poly<Quad>, tol: &Rat) -> Vec<RootInterval> {
    let b = root_bound(p);
    isolate_roots_in(p, &(-b.clone()), &b, tol)
}

/// Bisect an isolating interval until its width is ≤ `tol`.
fn refine_interval(p: &Poly<Quad>, r: &mut RootInterval, tol: &Rat) {
    if let Some(x) = &r.exact {
        r.lo = x.clone();
        r.hi = x.clone();
        return;
    }
    let slo = p.eval(&Quad::from_rat(r.lo.clone())).sign();
    if !r.sign_change {
        // Even multiplicity: fall back to Sturm-counted bisection.
        let chain = sturm_chain(p);
        while r.width() > *tol {
            let mid = (&r.lo + &r.hi) / rat_i64(2);
            if p.eval(&Quad::from_rat(mid.clone())).sign() == 0 {
                r.exact = Some(mid.clone());
                r.lo = mid.clone();
                r.hi = mid;
                return;
            }
            let vl = chain_variations_at(&chain, &r.lo);
            let vm = chain_variations_at(&chain, &mid);
            if vl - vm >= 1 {
                r.hi = mid;
            } else {
                r.lo = mid;
            }
        }
        return;
    }
    while r.width() > *tol {
        let mid = (&r.lo + &r.hi) / rat_i64(2);
        let sm = p.eval(&Quad::from_rat(mid.clone())).sign();
        if sm == 0 {
            r.exact = Some(mid.clone());
            r.lo = mid.clone();
            r.hi = mid;
            return;
        }
        if sm == slo {
            r.lo = mid;
        } else {
            r.hi = mid;
        }
    }
}

/// Number of distinct real roots in the open interval (lo, hi).
pub fn count_roots_in(p: &Poly<Quad>, lo: &Rat, hi: &Rat, tol: &Rat) -> usize {
    isolate_roots_in(p, lo, hi, tol).len()
}

// ---------------------------------------------------------------------------
// Unit-circle trigonometric reduction.
// ---------------------------------------------------------------------------

/// Reduce a Laurent polynomial that is real-valued on |z| = 1 to a rational
/// polynomial on the line.
///
/// Substituting z = e^{it} and then u = tan(t/2) (so e^{it} = (1+iu)/(1−iu))
/// turns Σ c_k z^k into P(u)/(1+u²)^K with K = max |k|. Returns `(P, v)`
/// where `v` is the value at t = π (the point u = ∞ missed by the chart).
/// Fails if the input is not real on the unit circle (i.e. c_{−k} ≠ conj c_k).
pub fn unit_circle_profile(p: &Laurent<QuadC>) -> Result<(Poly<Quad>, Quad), String> {
    let k_max = p
        .min_exp()
        .map(|lo| lo.abs().max(p.max_exp().unwrap().abs()))
        .unwrap_or(0);
    for (e, c) in p.terms() {
        if p.coeff(-e) != c.conj() {
            return Err("Laurent polynomial is not real on the unit circle".into());
        }
    }
    let one_plus = Poly::new(vec![QuadC::one(), QuadC::i()]); // 1 + iu
    let one_minus = Poly::new(vec![QuadC::one(), -QuadC::i()]); // 1 − iu
    let mut pow_plus = vec![Poly::constant(QuadC::one())];
    let mut pow_minus = vec![Poly::constant(QuadC::one())];
    for j in 1..=(2 * k_max) as usize {
        pow_plus.push(pow_plus[j - 1].mul(&one_plus));
        pow_minus.push(pow_minus[j - 1].mul(&one_minus));
    }
    let mut acc: Poly<QuadC> = Poly::zero();
    let mut at_pi = QuadC::zero();
    for (e, c) in p.terms() {
        let term = pow_plus[(k_max + e) as usize]
            .mul(&pow_minus[(k_max - e) as usize])
            .scale(c);
        acc = acc.add(&term);
        let sign = if e.rem_euclid(2) == 0 {
            c.clone()
        } else {
            -c.clone()
        };
        at_pi = at_pi + sign;
    }
    let mut real = Vec::with_capacity(acc.coeffs().len());
    for c in acc.coeffs() {
        if !c.im.is_zero() {
            return Err("unit-circle reduction produced non-real coefficients".into());
        }
        real.push(c.re.clone());
    }
    if !at_pi.im.is_zero() {
        return Err("unit-circle reduction produced non-real value at t=π".into());
    }
    Ok((Poly::new(real), at_pi.re))
}
