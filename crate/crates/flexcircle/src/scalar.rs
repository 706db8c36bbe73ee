//! Scalar tower for exact and floating computation.
//!
//! Floating-point `f64` is the default working scalar for dynamics. Exact mode
//! uses [`Quad`], an element of a real quadratic field Q(√d) with arbitrary-
//! precision rational coordinates, and [`QuadC`], its complexification
//! Q(√d)(i). A `Quad` with `d == 0` is an ordinary rational, so the one type
//! covers both Q and Q(√d).
//!
//! `Quad` is totally ordered (sign determination is exact, no floating point
//! involved), which is what the root-isolation and avoidance machinery relies
//! on.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// Arbitrary-precision rational, the coordinate field for exact scalars.
pub type Rat = BigRational;

/// Rational from machine integer.
pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational p/q from machine integers. Panics if `q == 0`.
pub fn rat_frac(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Exact rational value of a finite double (every finite `f64` is rational).
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_f64(x)
}

/// Nearest double to a rational; saturates on overflow.
pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

fn is_square_u64(d: u64) -> Option<u64> {
    let r = (d as f64).sqrt().round() as u64;
    for s in r.saturating_sub(1)..=r + 1 {
        if s * s == d {
            return Some(s);
        }
    }
    None
}

/// Element a + b√d of the real quadratic field Q(√d).
///
/// Normal form: `b == 0` implies `d == 0`; `d` is never a perfect square.
/// Arithmetic panics when two operands carry distinct nonzero radicands —
/// every pipeline here fixes one quadratic extension up front, so a mismatch
/// is a programming error, not a data condition.
#[derive(Clone, PartialEq, Eq)]
pub struct Quad {
    a: Rat,
    b: Rat,
    d: u64,
}

impl Quad {
    pub fn new(a: Rat, b: Rat, d: u64) -> Self {
        if b.is_zero() || d == 0 {
            return Quad {
                a,
                b: Rat::zero(),
                d: 0,
            };
        }
        if let Some(s) = is_square_u64(d) {
            return Quad {
                a: a + b * rat_i64(s as i64),
                b: Rat::zero(),
                d: 0,
            };
        }
        Quad { a, b, d }
    }

    pub fn from_rat(a: Rat) -> Self {
        Quad {
            a,
            b: Rat::zero(),
            d: 0,
        }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_rat(rat_i64(n))
    }

    /// a + b√d from integer coordinates.
    pub fn with_sqrt(a: i64, b: i64, d: u64) -> Self {
        Quad::new(rat_i64(a), rat_i64(b), d)
    }

    pub fn zero() -> Self {
        Self::from_i64(0)
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    /// √d itself as a field element.
    pub fn sqrt_d(d: u64) -> Self {
        Quad::new(Rat::zero(), Rat::one(), d)
    }

    pub fn rat_part(&self) -> &Rat {
        &self.a
    }

    pub fn sqrt_part(&self) -> &Rat {
        &self.b
    }

    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Galois conjugate a − b√d.
    pub fn conj(&self) -> Self {
        Quad {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    fn merged_d(&self, other: &Self) -> u64 {
        match (self.d, other.d) {
            (0, d) | (d, 0) => d,
            (d1, d2) if d1 == d2 => d1,
            (d1, d2) => panic!("mixed quadratic fields: sqrt({d1}) vs sqrt({d2})"),
        }
    }

    /// Exact sign: −1, 0, or +1.
    pub fn sign(&self) -> i8 {
        let sa = sign_rat(&self.a);
        let sb = sign_rat(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return if sa == 0 { sb } else { sa };
        }
        // Opposite signs: |a| vs |b|√d decided by squaring.
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * rat_i64(self.d as i64);
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn inv(&self) -> Self {
        // 1/(a+b√d) = (a−b√d)/(a²−b²d); the denominator is nonzero because
        // √d is irrational in normal form.
        let denom = &self.a * &self.a - &self.b * &self.b * rat_i64(self.d as i64);
        if denom.is_zero() {
            panic!("division by zero in Q(sqrt(d))");
        }
        Quad {
            a: &self.a / &denom,
            b: -&self.b / &denom,
            d: if self.b.is_zero() { 0 } else { self.d },
        }
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.a) + rat_to_f64(&self.b) * (self.d as f64).sqrt()
    }
}

fn sign_rat(x: &Rat) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_negative() {
        -1
    } else {
        1
    }
}

impl Add for Quad {
    type Output = Quad;
    fn add(self, rhs: Quad) -> Quad {
        let d = self.merged_d(&rhs);
        Quad::new(self.a + rhs.a, self.b + rhs.b, d)
    }
}

impl Sub for Quad {
    type Output = Quad;
    fn sub(self, rhs: Quad) -> Quad {
        let d = self.merged_d(&rhs);
        Quad::new(self.a - rhs.a, self.b - rhs.b, d)
    }
}

impl Mul for Quad {
    type Output = Quad;
    fn mul(self, rhs: Quad) -> Quad {
        let d = self.merged_d(&rhs);
        let dd = rat_i64(d as i64);
        let a = &self.a * &rhs.a + &self.b * &rhs.b * &dd;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Quad::new(a, b, d)
    }
}

impl Div for Quad {
    type Output = Quad;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Quad) -> Quad {
        self * rhs.inv()
    }
}

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

macro_rules! forward_ref_binop {
    ($t:ty, $tr:ident, $m:ident) => {
        impl<'a> $tr<&'a $t> for &'a $t {
            type Output = $t;
            fn $m(self, rhs: &'a $t) -> $t {
                self.clone().$m(rhs.clone())
            }
        }
    };
}

forward_ref_binop!(Quad, Add, add);
forward_ref_binop!(Quad, Sub, sub);
forward_ref_binop!(Quad, Mul, mul);
forward_ref_binop!(Quad, Div, div);

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quad {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.clone() - other.clone()).sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sqrt = if self.b.abs() == Rat::one() {
            format!("sqrt({})", self.d)
        } else {
            format!("{}*sqrt({})", self.b.abs(), self.d)
        };
        if self.a.is_zero() {
            if self.b.is_negative() {
                write!(f, "-{sqrt}")
            } else {
                write!(f, "{sqrt}")
            }
        } else if self.b.is_negative() {
            write!(f, "{}-{sqrt}", self.a)
        } else {
            write!(f, "{}+{sqrt}", self.a)
        }
    }
}

impl fmt::Display for QuadC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "({})*i", self.im)
        } else {
            write!(f, "({})+({})*i", self.re, self.im)
        }
    }
}

impl FromStr for Quad {
    type Err = String;

    /// Parses `"p/q"`, `"sqrt(d)"`, `"-3/2*sqrt(5)"`, `"1/2+3*sqrt(2)"`, ….
    fn from_str(s: &str) -> Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err("empty scalar".into());
        }
        let parse_rat = |t: &str| -> Result<Rat, String> {
            Rat::from_str(t).map_err(|e| format!("bad rational {t:?}: {e}"))
        };
        // Split off a trailing `[coef*]sqrt(d)` term if present.
        if let Some(pos) = s.find("sqrt(") {
            let close = s[pos..]
                .find(')')
                .ok_or_else(|| "unclosed sqrt(".to_string())?
                + pos;
            if close + 1 != s.len() {
                return Err(format!("trailing characters after sqrt() in {s:?}"));
            }
            let d: u64 = s[pos + 5..close]
                .parse()
                .map_err(|e| format!("bad radicand: {e}"))?;
            let head = &s[..pos];
            // head is "", "-", "coef*", "a+coef*", "a-coef*", "a+", "a-"
            let (a_str, b_str) = match head.rfind(['+', '-']) {
                Some(0) | None => ("0", head),
                Some(i) => (&head[..i], &head[i..]),
            };
            let b_str = b_str.strip_suffix('*').unwrap_or(b_str);
            let b = match b_str {
                "" | "+" => Rat::one(),
                "-" => -Rat::one(),
                t => parse_rat(t)?,
            };
            Ok(Quad::new(parse_rat(a_str)?, b, d))
        } else {
            Ok(Quad::from_rat(parse_rat(&s)?))
        }
    }
}

/// Element of Q(√d)(i): complex numbers with [`Quad`] coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuadC {
    pub re: Quad,
    pub im: Quad,
}

impl QuadC {
    pub fn new(re: Quad, im: Quad) -> Self {
        QuadC { re, im }
    }

    pub fn from_quad(re: Quad) -> Self {
        QuadC {
            re,
            im: Quad::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::from_quad(Quad::zero())
    }

    pub fn one() -> Self {
        Self::from_quad(Quad::one())
    }

    pub fn i() -> Self {
        QuadC {
            re: Quad::zero(),
            im: Quad::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadC {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> Quad {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        if n.is_zero() {
            panic!("division by zero in Q(sqrt(d))(i)");
        }
        QuadC {
            re: &self.re / &n,
            im: &(-self.im.clone()) / &n,
        }
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for QuadC {
    type Output = QuadC;
    fn add(self, rhs: QuadC) -> QuadC {
        QuadC::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for QuadC {
    type Output = QuadC;
    fn sub(self, rhs: QuadC) -> QuadC {
        QuadC::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for QuadC {
    type Output = QuadC;
    fn mul(self, rhs: QuadC) -> QuadC {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        QuadC::new(re, im)
    }
}

impl Div for QuadC {
    type Output = QuadC;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: QuadC) -> QuadC {
        self * rhs.inv()
    }
}

impl Neg for QuadC {
    type Output = QuadC;
    fn neg(self) -> QuadC {
        QuadC::new(-self.re, -self.im)
    }
}

forward_ref_binop!(QuadC, Add, add);
forward_ref_binop!(QuadC, Sub, sub);
forward_ref_binop!(QuadC, Mul, mul);
forward_ref_binop!(QuadC, Div, div);

/// Commutative-ring interface shared by matrices and polynomials. Matrices
/// over polynomial rings only need this much.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn radd(&self, o: &Self) -> Self;
    fn rsub(&self, o: &Self) -> Self;
    fn rmul(&self, o: &Self) -> Self;
    fn rneg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

/// Field-like coefficient: adds division and the pieces that only make sense
/// for scalars.
///
/// `csign` orders a canonical representative for projective normalization:
/// for real scalars it is the exact (or floating) sign; for complex scalars
/// the sign of the real part, falling back to the imaginary part on the
/// imaginary axis.
pub trait Coeff: Ring {
    fn rdiv(&self, o: &Self) -> Self;
    fn csign(&self) -> i8;
    /// Floating image, as (re, im).
    fn approx(&self) -> (f64, f64);
    /// True when the scalar is represented exactly.
    fn is_exact() -> bool;
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn radd(&self, o: &Self) -> Self {
        self + o
    }
    fn rsub(&self, o: &Self) -> Self {
        self - o
    }
    fn rmul(&self, o: &Self) -> Self {
        self * o
    }
    fn rneg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Coeff for f64 {
    fn rdiv(&self, o: &Self) -> Self {
        self / o
    }
    fn csign(&self) -> i8 {
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }
    fn approx(&self) -> (f64, f64) {
        (*self, 0.0)
    }
    fn is_exact() -> bool {
        false
    }
}

impl Ring for Quad {
    fn zero() -> Self {
        Quad::zero()
    }
    fn one() -> Self {
        Quad::one()
    }
    fn from_int(n: i64) -> Self {
        Quad::from_i64(n)
    }
    fn radd(&self, o: &Self) -> Self {
        self + o
    }
    fn rsub(&self, o: &Self) -> Self {
        self - o
    }
    fn rmul(&self, o: &Self) -> Self {
        self * o
    }
    fn rneg(&self) -> Self {
        -self.clone()
    }
    fn is_zero(&self) -> bool {
        Quad::is_zero(self)
    }
}

impl Coeff for Quad {
    fn rdiv(&self, o: &Self) -> Self {
        self / o
    }
    fn csign(&self) -> i8 {
        self.sign()
    }
    fn approx(&self) -> (f64, f64) {
        (self.to_f64(), 0.0)
    }
    fn is_exact() -> bool {
        true
    }
}

impl Ring for QuadC {
    fn zero() -> Self {
        QuadC::zero()
    }
    fn one() -> Self {
        QuadC::one()
    }
    fn from_int(n: i64) -> Self {
        QuadC::from_quad(Quad::from_i64(n))
    }
    fn radd(&self, o: &Self) -> Self {
        self + o
    }
    fn rsub(&self, o: &Self) -> Self {
        self - o
    }
    fn rmul(&self, o: &Self) -> Self {
        self * o
    }
    fn rneg(&self) -> Self {
        -self.clone()
    }
    fn is_zero(&self) -> bool {
        QuadC::is_zero(self)
    }
}

impl Coeff for QuadC {
    fn rdiv(&self, o: &Self) -> Self {
        self / o
    }
    fn csign(&self) -> i8 {
        match self.re.sign() {
            0 => self.im.sign(),
            s => s,
        }
    }
    fn approx(&self) -> (f64, f64) {
        self.to_c64()
    }
    fn is_exact() -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_arithmetic_in_q_sqrt2() {
        let x = Quad::with_sqrt(3, -2, 2); // 3 − 2√2
        let y = Quad::with_sqrt(1, 1, 2); // 1 + √2
        let prod = &x * &y; // (3−2√2)(1+√2) = 3+3√2−2√2−4 = −1+√2
        assert_eq!(prod, Quad::with_sqrt(-1, 1, 2));
        let quot = &prod / &y;
        assert_eq!(quot, x);
        assert!((x.to_f64() - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn quad_sign_is_exact_near_zero() {
        // 3 − 2√2 ≈ 0.1716 > 0 while 2√2 − 3 < 0; both have large cancellation.
        assert_eq!(Quad::with_sqrt(3, -2, 2).sign(), 1);
        assert_eq!(Quad::with_sqrt(-3, 2, 2).sign(), -1);
        // 665857 − 470832√2 ≈ 7.5e−7: a convergent of √2, still exact.
        assert_eq!(Quad::with_sqrt(665_857, -470_832, 2).sign(), 1);
        assert_eq!(Quad::with_sqrt(-665_857, 470_832, 2).sign(), -1);
        assert_eq!(Quad::zero().sign(), 0);
    }

    #[test]
    fn quad_normalizes_square_radicands() {
        // 1 + 2√9 = 7.
        let x = Quad::with_sqrt(1, 2, 9);
        assert!(x.is_rational());
        assert_eq!(x, Quad::from_i64(7));
        // b = 0 forgets the radicand.
        let y = Quad::with_sqrt(5, 0, 7);
        assert_eq!(y.radicand(), 0);
    }

    #[test]
    fn quad_inverse_of_unit() {
        // (3−2√2)(3+2√2) = 1, so inv is the conjugate.
        let x = Quad::with_sqrt(3, -2, 2);
        assert_eq!(x.inv(), Quad::with_sqrt(3, 2, 2));
    }

    #[test]
    fn quad_ordering() {
        let mut v = vec![
            Quad::with_sqrt(0, 1, 2),  // √2
            Quad::from_i64(1),         // 1
            Quad::with_sqrt(3, -2, 2), // ≈ 0.17
            Quad::from_i64(-1),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                Quad::from_i64(-1),
                Quad::with_sqrt(3, -2, 2),
                Quad::from_i64(1),
                Quad::with_sqrt(0, 1, 2),
            ]
        );
    }

    #[test]
    fn quad_display_roundtrip() {
        for s in [
            "3/2",
            "-5",
            "sqrt(2)",
            "-sqrt(2)",
            "3-2*sqrt(2)",
            "1/2+3/4*sqrt(5)",
            "-1/3-sqrt(7)",
        ] {
            let q: Quad = s.parse().unwrap();
            let back: Quad = q.to_string().parse().unwrap();
            assert_eq!(q, back, "roundtrip failed for {s}");
        }
        assert_eq!("1+2*sqrt(4)".parse::<Quad>().unwrap(), Quad::from_i64(5));
    }

    #[test]
    fn quadc_multiplication_and_inverse() {
        let z = QuadC::new(Quad::with_sqrt(0, 1, 2), Quad::one()); // √2 + i
        let w = &z * &z.conj();
        assert_eq!(w, QuadC::from_quad(Quad::from_i64(3)));
        let inv = z.inv();
        assert_eq!(&z * &inv, QuadC::one());
    }

    #[test]
    fn mixed_field_addition_with_rationals() {
        let x = Quad::with_sqrt(1, 1, 3);
        let y = Quad::from_i64(2);
        assert_eq!(&x + &y, Quad::with_sqrt(3, 1, 3));
    }

    #[test]
    #[should_panic(expected = "mixed quadratic fields")]
    fn mixed_radicands_panic() {
        let _ = Quad::sqrt_d(2) + Quad::sqrt_d(3);
    }
}
