//! Arithmetic, classification, and boundary dynamics of PSL₂(ℝ)/PSL₂(ℂ).
//!
//! Elements are determinant-1 matrices modulo sign, stored over one of three
//! scalar backends: `f64`, the real quadratic field ℚ(√D) ([`Quad`]), or its
//! complexification ([`QuadC`]). Exact backends decide the
//! elliptic/parabolic/hyperbolic trichotomy without tolerance bands.
//!
//! The circle at infinity is parametrized by θ ∈ [0,1) via
//! x = tan(π(θ − 1/2)), with ∞ ↔ θ = 0. Under this chart the model rotation
//! `Rot(t)` acts as the rigid rotation θ ↦ θ + t/2π, which is what makes
//! rotation-number assertions elsewhere in the crate cheap to state.

use crate::scalar::{Coeff, Quad, QuadC, Rat, Ring};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fmt;

/// Determinant tolerance accepted when ingesting floating-point matrices.
pub const EPS_DET: f64 = 1e-9;

/// Default width of the parabolic trace band in floating mode.
pub const EPS_PAR: f64 = 1e-9;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MoebiusError {
    #[error("matrix is not unimodular: det = {det:e} (want 1 within {tol:e})")]
    NotUnimodular { det: f64, tol: f64 },
    #[error("cannot certify the class of a floating matrix with tr\u{b2} = {tr_sq} (within {band:e} of 4); use exact entries")]
    AmbiguousClass { tr_sq: f64, band: f64 },
    #[error("identity element has no fixed-point data")]
    IdentityInput,
    #[error("operation requires a real element")]
    ComplexInput,
    #[error("operation requires exact entries, got floating-point ones")]
    InexactInput,
    #[error("malformed matrix encoding: {0}")]
    BadEncoding(String),
}

// ---------------------------------------------------------------------------
// Generic 2×2 matrices.
// ---------------------------------------------------------------------------

/// A 2×2 matrix over any ring; row-major entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2<T> {
    pub e: [[T; 2]; 2],
}

impl<T: Ring> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2 { e: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        Mat2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let e = &self.e;
        let f = &o.e;
        Mat2::new(
            e[0][0].rmul(&f[0][0]).radd(&e[0][1].rmul(&f[1][0])),
            e[0][0].rmul(&f[0][1]).radd(&e[0][1].rmul(&f[1][1])),
            e[1][0].rmul(&f[0][0]).radd(&e[1][1].rmul(&f[1][0])),
            e[1][0].rmul(&f[0][1]).radd(&e[1][1].rmul(&f[1][1])),
        )
    }

    pub fn trace(&self) -> T {
        self.e[0][0].radd(&self.e[1][1])
    }

    pub fn det(&self) -> T {
        self.e[0][0]
            .rmul(&self.e[1][1])
            .rsub(&self.e[0][1].rmul(&self.e[1][0]))
    }

    /// For determinant-1 matrices the adjugate is the inverse.
    pub fn adjugate(&self) -> Self {
        Mat2::new(
            self.e[1][1].clone(),
            self.e[0][1].rneg(),
            self.e[1][0].rneg(),
            self.e[0][0].clone(),
        )
    }

    pub fn neg(&self) -> Self {
        Mat2::new(
            self.e[0][0].rneg(),
            self.e[0][1].rneg(),
            self.e[1][0].rneg(),
            self.e[1][1].rneg(),
        )
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::identity();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }
}

impl<T: Coeff> Mat2<T> {
    /// Sign-quotient representative: the first entry (row-major) with nonzero
    /// sign is made positive. Idempotent, and identifies g with −g.
    pub fn canonical(&self) -> Self {
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let s = self.e[i][j].csign();
            if s > 0 {
                return self.clone();
            }
            if s < 0 {
                return self.neg();
            }
        }
        self.clone()
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        let f = |i: usize, j: usize| self.e[i][j].approx().0;
        [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]]
    }
}

// ---------------------------------------------------------------------------
// PSL₂ elements.
// ---------------------------------------------------------------------------

/// A determinant-1 matrix modulo sign, over one of three scalar backends.
#[derive(Clone, Debug)]
pub enum MoebiusElement {
    Float(Mat2<f64>),
    Exact(Mat2<Quad>),
    ExactC(Mat2<QuadC>),
}

/// Trichotomy of a real Möbius element, with its conjugacy datum.
///
/// The elliptic angle lies in (0, 2π) and is oriented: it is the angle of the
/// rigid rotation the boundary action is conjugate to, so `Rot(t)` for
/// t ∈ (0, 2π) reports exactly θ = t.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "class")]
pub enum IsometryClass {
    Identity,
    Elliptic { angle: f64 },
    Parabolic,
    Hyperbolic { length: f64 },
}

impl IsometryClass {
    pub fn kind(&self) -> &'static str {
        match self {
            IsometryClass::Identity => "identity",
            IsometryClass::Elliptic { .. } => "elliptic",
            IsometryClass::Parabolic => "parabolic",
            IsometryClass::Hyperbolic { .. } => "hyperbolic",
        }
    }
}

/// Fixed boundary point of a real Möbius element.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct FixedPoint {
    /// Circle coordinate in [0, 1).
    pub theta: f64,
    pub kind: FixKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixKind {
    Attracting,
    Repelling,
    Parabolic,
}

/// g = Rot(t1) · exp(tau) · Rot(t2); the branch-free route to lifts.
#[derive(Clone, Copy, Debug)]
pub struct KakDecomposition {
    pub t1: f64,
    pub tau: f64,
    pub t2: f64,
}

/// Wrap a circle coordinate into [0, 1).
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

impl MoebiusElement {
    // -- constructors --------------------------------------------------------

    pub fn identity() -> Self {
        MoebiusElement::Exact(Mat2::identity())
    }

    /// Ingest a floating matrix, rescaling so the determinant is 1.
    pub fn from_f64(a: f64, b: f64, c: f64, d: f64) -> Result<Self, MoebiusError> {
        let det = a * d - b * c;
        if !det.is_finite() || (det - 1.0).abs() > EPS_DET {
            return Err(MoebiusError::NotUnimodular { det, tol: EPS_DET });
        }
        let s = det.sqrt().recip();
        Ok(MoebiusElement::Float(
            Mat2::new(a * s, b * s, c * s, d * s).canonical(),
        ))
    }

    /// Ingest an exact real matrix; the determinant must be exactly 1.
    pub fn from_quad(m: Mat2<Quad>) -> Result<Self, MoebiusError> {
        if m.det() != Quad::one() {
            return Err(MoebiusError::NotUnimodular {
                det: m.det().to_f64(),
                tol: 0.0,
            });
        }
        Ok(MoebiusElement::Exact(m.canonical()))
    }

    /// Ingest an exact complex matrix; the determinant must be exactly 1.
    pub fn from_quadc(m: Mat2<QuadC>) -> Result<Self, MoebiusError> {
        if m.det() != QuadC::one() {
            return Err(MoebiusError::NotUnimodular {
                det: m.det().to_c64().0,
                tol: 0.0,
            });
        }
        Ok(MoebiusElement::ExactC(m.canonical()))
    }

    pub fn from_rational(a: Rat, b: Rat, c: Rat, d: Rat) -> Result<Self, MoebiusError> {
        Self::from_quad(Mat2::new(
            Quad::from_rat(a),
            Quad::from_rat(b),
            Quad::from_rat(c),
            Quad::from_rat(d),
        ))
    }

    // -- model one-parameter subgroups ---------------------------------------

    /// Rot(t): elliptic rotation about i by angle t; rotates the boundary
    /// circle by t/2π.
    pub fn rot(t: f64) -> Self {
        let (s, c) = (t / 2.0).sin_cos();
        MoebiusElement::Float(Mat2::new(c, s, -s, c).canonical())
    }

    /// exp(t): hyperbolic translation by distance t along the geodesic [0,∞].
    pub fn exp(t: f64) -> Self {
        let h = (t / 2.0).exp();
        MoebiusElement::Float(Mat2::new(h, 0.0, 0.0, h.recip()).canonical())
    }

    /// p(t): parabolic fixing ∞.
    pub fn parabolic(t: f64) -> Self {
        MoebiusElement::Float(Mat2::new(1.0, t, 0.0, 1.0).canonical())
    }

    /// Exact point of the parabolic model subgroup.
    pub fn parabolic_exact(t: Rat) -> Self {
        MoebiusElement::Exact(
            Mat2::new(
                Quad::one(),
                Quad::from_rat(t),
                Quad::zero(),
                Quad::one(),
            )
            .canonical(),
        )
    }

    /// Exact point diag(λ, 1/λ) of the hyperbolic model subgroup; λ may lie in
    /// a quadratic field but must be nonzero.
    pub fn hyperbolic_exact(lambda: Quad) -> Self {
        assert!(!lambda.is_zero(), "diagonal model needs a unit");
        MoebiusElement::Exact(
            Mat2::new(lambda.clone(), Quad::zero(), Quad::zero(), lambda.inv()).canonical(),
        )
    }

    /// Exact rational point of SO(2): the rotation with tan(θ/4) = q, i.e.
    /// Rot(t) at cos(t/2) = (1−q²)/(1+q²), sin(t/2) = 2q/(1+q²).
    pub fn elliptic_exact(q: Rat) -> Self {
        let qq = Quad::from_rat(q);
        let one = Quad::one();
        let den = (&one + &(&qq * &qq)).inv();
        let c = &(&one - &(&qq * &qq)) * &den;
        let s = &(&qq + &qq) * &den;
        MoebiusElement::Exact(Mat2::new(c.clone(), s.clone(), s.rneg(), c).canonical())
    }

    // -- accessors ------------------------------------------------------------

    pub fn is_exact(&self) -> bool {
        !matches!(self, MoebiusElement::Float(_))
    }

    /// Real entries as doubles; errors on genuinely complex matrices.
    pub fn entries_f64(&self) -> Result<[[f64; 2]; 2], MoebiusError> {
        match self {
            MoebiusElement::Float(m) => Ok(m.e),
            MoebiusElement::Exact(m) => Ok(m.to_f64()),
            MoebiusElement::ExactC(m) => {
                if m.e.iter().flatten().all(|z| z.im.is_zero()) {
                    let f = |i: usize, j: usize| m.e[i][j].re.to_f64();
                    Ok([[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]])
                } else {
                    Err(MoebiusError::ComplexInput)
                }
            }
        }
    }

    /// The exact real matrix, if this element has one.
    pub fn exact_real(&self) -> Option<&Mat2<Quad>> {
        match self {
            MoebiusElement::Exact(m) => Some(m),
            _ => None,
        }
    }

    pub fn trace_f64(&self) -> f64 {
        match self {
            MoebiusElement::Float(m) => m.trace(),
            MoebiusElement::Exact(m) => m.trace().to_f64(),
            MoebiusElement::ExactC(m) => m.trace().to_c64().0,
        }
    }

    pub fn trace_sq_f64(&self) -> f64 {
        match self {
            MoebiusElement::ExactC(m) => {
                let t = m.trace();
                let (re, im) = (&t * &t).to_c64();
                debug_assert!(im.abs() < 1e-12);
                re
            }
            _ => {
                let t = self.trace_f64();
                t * t
            }
        }
    }

    /// Demote to the floating backend (no-op on floats).
    pub fn to_float(&self) -> Result<Self, MoebiusError> {
        let e = self.entries_f64()?;
        Ok(MoebiusElement::Float(
            Mat2::new(e[0][0], e[0][1], e[1][0], e[1][1]).canonical(),
        ))
    }

    // -- group operations ------------------------------------------------------

    /// Compose two elements. Mixing exact and floating backends demotes the
    /// product to floating; mixing real and complex exact backends promotes to
    /// complex.
    pub fn compose(&self, o: &Self) -> Self {
        use MoebiusElement::*;
        match (self, o) {
            (Exact(m), Exact(n)) => Exact(m.mul(n).canonical()),
            (ExactC(m), ExactC(n)) => ExactC(m.mul(n).canonical()),
            (Exact(m), ExactC(n)) => ExactC(complexify(m).mul(n).canonical()),
            (ExactC(m), Exact(n)) => ExactC(m.mul(&complexify(n)).canonical()),
            _ => {
                let a = self.entries_f64().expect("real-by-construction");
                let b = o.entries_f64().expect("real-by-construction");
                let m = Mat2 { e: a }.mul(&Mat2 { e: b });
                Float(renorm(m).canonical())
            }
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            MoebiusElement::Float(m) => MoebiusElement::Float(m.adjugate().canonical()),
            MoebiusElement::Exact(m) => MoebiusElement::Exact(m.adjugate().canonical()),
            MoebiusElement::ExactC(m) => MoebiusElement::ExactC(m.adjugate().canonical()),
        }
    }

    pub fn powi(&self, n: i64) -> Self {
        let (base, n) = if n < 0 {
            (self.inverse(), (-n) as u32)
        } else {
            (self.clone(), n as u32)
        };
        match base {
            MoebiusElement::Float(m) => MoebiusElement::Float(renorm(m.pow(n)).canonical()),
            MoebiusElement::Exact(m) => MoebiusElement::Exact(m.pow(n).canonical()),
            MoebiusElement::ExactC(m) => MoebiusElement::ExactC(m.pow(n).canonical()),
        }
    }

    /// h g h⁻¹.
    pub fn conjugate_by(&self, h: &Self) -> Self {
        h.compose(self).compose(&h.inverse())
    }

    /// [g, h] = g h g⁻¹ h⁻¹.
    pub fn commutator(&self, h: &Self) -> Self {
        self.compose(h)
            .compose(&self.inverse())
            .compose(&h.inverse())
    }

    pub fn is_identity(&self) -> bool {
        match self {
            MoebiusElement::Float(m) => {
                let i = Mat2::<f64>::identity();
                (0..2).all(|r| (0..2).all(|c| (m.e[r][c] - i.e[r][c]).abs() <= 1e-12))
            }
            MoebiusElement::Exact(m) => m.is_identity(),
            MoebiusElement::ExactC(m) => m.is_identity(),
        }
    }

    /// Entrywise distance between canonical representatives, after demoting
    /// both to floats. Useful in tests; exact comparisons should use `==`.
    pub fn approx_dist(&self, o: &Self) -> f64 {
        let a = self.to_float().and_then(|g| g.entries_f64());
        let b = o.to_float().and_then(|g| g.entries_f64());
        match (a, b) {
            (Ok(a), Ok(b)) => {
                let d1: f64 = (0..2)
                    .flat_map(|i| (0..2).map(move |j| (a[i][j] - b[i][j]).abs()))
                    .fold(0.0, f64::max);
                let d2: f64 = (0..2)
                    .flat_map(|i| (0..2).map(move |j| (a[i][j] + b[i][j]).abs()))
                    .fold(0.0, f64::max);
                d1.min(d2)
            }
            _ => f64::INFINITY,
        }
    }

    // -- classification ----------------------------------------------------------

    /// Elliptic/parabolic/hyperbolic trichotomy by tr².
    ///
    /// Exact backends decide equality tr² = 4 outright and ignore the band.
    /// In floating mode a trace landing inside the band |tr² − 4| ≤ `eps_par`
    /// is reported as [`MoebiusError::AmbiguousClass`] rather than silently
    /// called parabolic; see [`MoebiusElement::classify_lenient`] when a
    /// best-effort answer is acceptable.
    pub fn classify(&self, eps_par: f64) -> Result<IsometryClass, MoebiusError> {
        if self.is_identity() {
            return Ok(IsometryClass::Identity);
        }
        match self {
            MoebiusElement::Exact(m) => {
                let t = m.trace();
                let four = Quad::from_i64(4);
                let tsq = &t * &t;
                Ok(match tsq.cmp(&four) {
                    std::cmp::Ordering::Equal => IsometryClass::Parabolic,
                    std::cmp::Ordering::Greater => IsometryClass::Hyperbolic {
                        length: 2.0 * (t.to_f64().abs() / 2.0).acosh(),
                    },
                    std::cmp::Ordering::Less => IsometryClass::Elliptic {
                        angle: elliptic_angle_exact(m),
                    },
                })
            }
            MoebiusElement::ExactC(m) => {
                if m.e.iter().flatten().any(|z| !z.im.is_zero()) {
                    return Err(MoebiusError::ComplexInput);
                }
                let re = |i: usize, j: usize| m.e[i][j].re.clone();
                MoebiusElement::Exact(
                    Mat2::new(re(0, 0), re(0, 1), re(1, 0), re(1, 1)).canonical(),
                )
                .classify(eps_par)
            }
            MoebiusElement::Float(m) => {
                let tr = m.trace();
                let tsq = tr * tr;
                if (tsq - 4.0).abs() <= eps_par {
                    return Err(MoebiusError::AmbiguousClass {
                        tr_sq: tsq,
                        band: eps_par,
                    });
                }
                if tsq > 4.0 {
                    Ok(IsometryClass::Hyperbolic {
                        length: 2.0 * (tr.abs() / 2.0).acosh(),
                    })
                } else {
                    Ok(IsometryClass::Elliptic {
                        angle: elliptic_angle_float(m),
                    })
                }
            }
        }
    }

    /// As [`classify`](Self::classify), but resolves the ambiguous floating
    /// band to `Parabolic`. Dynamics code that only needs a best guess (e.g.
    /// choosing an iteration strategy) uses this.
    pub fn classify_lenient(&self, eps_par: f64) -> IsometryClass {
        match self.classify(eps_par) {
            Ok(c) => c,
            Err(_) => IsometryClass::Parabolic,
        }
    }

    // -- boundary dynamics --------------------------------------------------------

    /// Action on the boundary circle, θ ∈ [0, 1) ↦ θ′ ∈ [0, 1).
    ///
    /// Works projectively on the direction vector (sin πθ′′, cos πθ′′) with
    /// θ′′ = θ − 1/2, so the point ∞ (θ = 0) needs no special case.
    pub fn boundary_action(&self, theta: f64) -> f64 {
        let e = self.entries_f64().expect("boundary action needs a real element");
        boundary_action_matrix(&e, theta)
    }

    /// Fixed boundary points with dynamical types.
    ///
    /// Floating matrices inside the parabolic trace band are typed parabolic
    /// (the lenient reading); exact matrices are typed exactly.
    pub fn fixed_points(&self) -> Result<Vec<FixedPoint>, MoebiusError> {
        if self.is_identity() {
            return Err(MoebiusError::IdentityInput);
        }
        let e = self.entries_f64()?;
        let class = self.classify_lenient(EPS_PAR);
        let [[a, b], [c, d]] = e;
        match class {
            IsometryClass::Identity => Err(MoebiusError::IdentityInput),
            IsometryClass::Elliptic { .. } => Ok(vec![]),
            IsometryClass::Parabolic => {
                let theta = if c.abs() < 1e-300 {
                    0.0 // fixes ∞
                } else {
                    theta_of_x((a - d) / (2.0 * c))
                };
                Ok(vec![FixedPoint {
                    theta,
                    kind: FixKind::Parabolic,
                }])
            }
            IsometryClass::Hyperbolic { .. } => {
                let tr = a + d;
                let disc = (tr * tr - 4.0).sqrt();
                // Fixed point x has c·x + d = λ, the eigenvalue; |λ| > 1 is
                // the attracting one since the derivative there is 1/λ².
                let (lam_plus, lam_minus) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
                let mut out = vec![];
                for lam in [lam_plus, lam_minus] {
                    let theta = if c.abs() < 1e-300 {
                        if (lam - d).abs() < disc / 2.0 {
                            // x solves d = λ with c = 0: the finite fixed point.
                            theta_of_x(b / (d - a))
                        } else {
                            0.0
                        }
                    } else {
                        theta_of_x((lam - d) / c)
                    };
                    let kind = if lam.abs() > 1.0 {
                        FixKind::Attracting
                    } else {
                        FixKind::Repelling
                    };
                    out.push(FixedPoint { theta, kind });
                }
                Ok(out)
            }
        }
    }

    /// KAK (singular value) decomposition g = Rot(t1)·exp(τ)·Rot(t2), τ ≥ 0.
    ///
    /// Each factor has a globally continuous lift, so this is the branch-free
    /// route to lifting the boundary action to ℝ.
    pub fn kak(&self) -> Result<KakDecomposition, MoebiusError> {
        let [[a, b], [c, d]] = self.entries_f64()?;
        let (e, f) = ((a + d) / 2.0, (a - d) / 2.0);
        let (g, h) = ((c + b) / 2.0, (c - b) / 2.0);
        // Rotation angles u, v and singular values from the E/F/G/H split:
        // g = R(u)·diag(σ, 1/σ)·R(v) with R(φ) = [[cos φ, −sin φ],[sin φ, cos φ]].
        let sum = f64::atan2(h, e); // u + v
        let dif = f64::atan2(g, f); // u − v
        let q = f64::hypot(e, h);
        let r = f64::hypot(f, g);
        let sigma = q + r; // ≥ 1 because σ·(1/σ) = det = 1
        let (u, v) = ((sum + dif) / 2.0, (sum - dif) / 2.0);
        // Rot(t) = R(−t/2), so t = −2·angle.
        Ok(KakDecomposition {
            t1: -2.0 * u,
            tau: 2.0 * sigma.ln(),
            t2: -2.0 * v,
        })
    }

    // -- serialization ---------------------------------------------------------

    /// JSON encoding: `{"field": ..., "entries": [[a,b],[c,d]]}` with field
    /// one of "real" (numbers), "rational"/"quad:D" (exact entries as
    /// strings), "complex" (pairs [re, im]).
    pub fn to_json(&self) -> Value {
        match self {
            MoebiusElement::Float(m) => json!({
                "field": "real",
                "entries": [[m.e[0][0], m.e[0][1]], [m.e[1][0], m.e[1][1]]],
            }),
            MoebiusElement::Exact(m) => {
                let d = m.e.iter().flatten().map(|q| q.radicand()).max().unwrap();
                let field = if d == 0 {
                    "rational".to_string()
                } else {
                    format!("quad:{d}")
                };
                let s = |i: usize, j: usize| m.e[i][j].to_string();
                json!({
                    "field": field,
                    "entries": [[s(0,0), s(0,1)], [s(1,0), s(1,1)]],
                })
            }
            MoebiusElement::ExactC(m) => {
                let p = |i: usize, j: usize| {
                    let z = &m.e[i][j];
                    json!([z.re.to_string(), z.im.to_string()])
                };
                json!({
                    "field": "complex",
                    "entries": [[p(0,0), p(0,1)], [p(1,0), p(1,1)]],
                })
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, MoebiusError> {
        let bad = |m: &str| MoebiusError::BadEncoding(m.to_string());
        let field = v
            .get("field")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing \"field\""))?;
        let entries = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"entries\""))?;
        let cell = |i: usize, j: usize| -> Result<&Value, MoebiusError> {
            entries
                .get(i)
                .and_then(Value::as_array)
                .and_then(|row| row.get(j))
                .ok_or_else(|| bad("entries must be a 2×2 array"))
        };
        match field {
            "real" => {
                let num = |i, j| -> Result<f64, MoebiusError> {
                    cell(i, j)?.as_f64().ok_or_else(|| bad("real entries must be numbers"))
                };
                MoebiusElement::from_f64(num(0, 0)?, num(0, 1)?, num(1, 0)?, num(1, 1)?)
            }
            "complex" => {
                let z = |i, j| -> Result<QuadC, MoebiusError> {
                    let pair = cell(i, j)?
                        .as_array()
                        .filter(|p| p.len() == 2)
                        .ok_or_else(|| bad("complex entries must be [re, im] pairs"))?;
                    let part = |v: &Value| -> Result<Quad, MoebiusError> {
                        match v {
                            Value::String(s) => {
                                s.parse().map_err(|e: String| MoebiusError::BadEncoding(e))
                            }
                            _ => Err(bad("complex parts must be exact strings")),
                        }
                    };
                    Ok(QuadC {
                        re: part(&pair[0])?,
                        im: part(&pair[1])?,
                    })
                };
                MoebiusElement::from_quadc(Mat2::new(z(0, 0)?, z(0, 1)?, z(1, 0)?, z(1, 1)?))
            }
            _ if field == "rational" || field.starts_with("quad:") => {
                let q = |i, j| -> Result<Quad, MoebiusError> {
                    cell(i, j)?
                        .as_str()
                        .ok_or_else(|| bad("exact entries must be strings"))?
                        .parse()
                        .map_err(|e: String| MoebiusError::BadEncoding(e))
                };
                MoebiusElement::from_quad(Mat2::new(q(0, 0)?, q(0, 1)?, q(1, 0)?, q(1, 1)?))
            }
            other => Err(bad(&format!("unknown field kind {other:?}"))),
        }
    }
}

impl PartialEq for MoebiusElement {
    fn eq(&self, other: &Self) -> bool {
        use MoebiusElement::*;
        match (self, other) {
            (Float(a), Float(b)) => a == b,
            (Exact(a), Exact(b)) => a == b,
            (ExactC(a), ExactC(b)) => a == b,
            (Exact(a), ExactC(b)) | (ExactC(b), Exact(a)) => complexify(a) == *b,
            _ => false,
        }
    }
}

impl fmt::Display for MoebiusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoebiusElement::Float(m) => write!(
                f,
                "[[{:.6}, {:.6}], [{:.6}, {:.6}]]",
                m.e[0][0], m.e[0][1], m.e[1][0], m.e[1][1]
            ),
            MoebiusElement::Exact(m) => write!(
                f,
                "[[{}, {}], [{}, {}]]",
                m.e[0][0], m.e[0][1], m.e[1][0], m.e[1][1]
            ),
            MoebiusElement::ExactC(m) => write!(
                f,
                "[[{}, {}], [{}, {}]]",
                m.e[0][0], m.e[0][1], m.e[1][0], m.e[1][1]
            ),
        }
    }
}

/// Promote a real exact matrix to the complex backend.
pub fn complexify(m: &Mat2<Quad>) -> Mat2<QuadC> {
    let f = |i: usize, j: usize| QuadC::from_quad(m.e[i][j].clone());
    Mat2::new(f(0, 0), f(0, 1), f(1, 0), f(1, 1))
}

/// Rescale a floating matrix back onto det = 1 (drift control for long
/// products).
fn renorm(m: Mat2<f64>) -> Mat2<f64> {
    let det = m.det();
    let s = det.sqrt().recip();
    Mat2::new(m.e[0][0] * s, m.e[0][1] * s, m.e[1][0] * s, m.e[1][1] * s)
}

/// Oriented rotation angle of an elliptic float matrix, in (0, 2π).
///
/// A real elliptic matrix always has b ≠ c (b = c would force real
/// eigenvalues), so the sign representative with b − c > 0 is well defined;
/// for that representative θ = 2·arccos(tr/2) is the oriented angle of the
/// conjugate rigid rotation.
fn elliptic_angle_float(m: &Mat2<f64>) -> f64 {
    let flip = if m.e[0][1] - m.e[1][0] > 0.0 { 1.0 } else { -1.0 };
    let half = (flip * m.trace() / 2.0).clamp(-1.0, 1.0);
    2.0 * half.acos()
}

fn elliptic_angle_exact(m: &Mat2<Quad>) -> f64 {
    let diff = &m.e[0][1] - &m.e[1][0];
    let flip = if diff.sign() > 0 { 1.0 } else { -1.0 };
    let half = (flip * m.trace().to_f64() / 2.0).clamp(-1.0, 1.0);
    2.0 * half.acos()
}

/// θ-coordinate of the boundary point x ∈ ℝ (∞ is θ = 0).
pub fn theta_of_x(x: f64) -> f64 {
    frac(x.atan() / PI + 0.5)
}

/// Boundary point x ∈ ℝ ∪ {∞} of the θ-coordinate (θ = 0 gives ∞ = NaN and
/// is the caller's special case; avoid it via the projective formulas).
pub fn x_of_theta(theta: f64) -> f64 {
    (PI * (theta - 0.5)).tan()
}

/// The boundary action of a raw real matrix (not necessarily canonical).
pub fn boundary_action_matrix(e: &[[f64; 2]; 2], theta: f64) -> f64 {
    let alpha = PI * (frac(theta) - 0.5);
    let (s, c) = alpha.sin_cos();
    let num = e[0][0] * s + e[0][1] * c;
    let den = e[1][0] * s + e[1][1] * c;
    frac(f64::atan2(num, den) / PI + 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat_frac, rat_i64};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_element(rng: &mut StdRng) -> MoebiusElement {
        // Random KAK product keeps the determinant exactly controllable.
        let g = MoebiusElement::rot(rng.gen_range(-3.0..3.0))
            .compose(&MoebiusElement::exp(rng.gen_range(-2.0..2.0)))
            .compose(&MoebiusElement::rot(rng.gen_range(-3.0..3.0)));
        g
    }

    #[test]
    fn model_subgroup_values() {
        assert!(MoebiusElement::parabolic(0.0).is_identity());
        let e2 = MoebiusElement::exp(2.0);
        let [[a, b], [c, d]] = e2.entries_f64().unwrap();
        assert!((a - 1f64.exp()).abs() < 1e-15 && (d - (-1f64).exp()).abs() < 1e-15);
        assert!(b == 0.0 && c == 0.0);
        // Rot(π) is the quarter-turn matrix [[0,1],[−1,0]] up to sign.
        let r = MoebiusElement::rot(PI);
        let j = MoebiusElement::from_f64(0.0, 1.0, -1.0, 0.0).unwrap();
        assert!(r.approx_dist(&j) < 1e-15);
    }

    #[test]
    fn canonicalization_identifies_signs() {
        let g = MoebiusElement::from_f64(-2.0, 0.0, -1.0, -0.5).unwrap();
        let h = MoebiusElement::from_f64(2.0, 0.0, 1.0, 0.5).unwrap();
        assert!(g.approx_dist(&h) < 1e-15);
        let m = Mat2::new(
            Quad::zero(),
            -Quad::one(),
            Quad::one(),
            Quad::zero(),
        );
        assert_eq!(m.canonical(), m.canonical().canonical());
        assert_eq!(m.canonical(), m.neg().canonical());
    }

    #[test]
    fn rejects_non_unimodular_input() {
        assert!(matches!(
            MoebiusElement::from_f64(2.0, 0.0, 0.0, 2.0),
            Err(MoebiusError::NotUnimodular { .. })
        ));
        let m = Mat2::new(Quad::from_i64(2), Quad::zero(), Quad::zero(), Quad::from_i64(2));
        assert!(MoebiusElement::from_quad(m).is_err());
    }

    #[test]
    fn classifies_model_elements() {
        let eps = 1e-9;
        assert_eq!(
            MoebiusElement::identity().classify(eps).unwrap(),
            IsometryClass::Identity
        );
        match MoebiusElement::exp(2.0).classify(eps).unwrap() {
            IsometryClass::Hyperbolic { length } => assert!((length - 2.0).abs() < 1e-12),
            c => panic!("expected hyperbolic, got {c:?}"),
        }
        match MoebiusElement::rot(PI).classify(eps).unwrap() {
            IsometryClass::Elliptic { angle } => assert!((angle - PI).abs() < 1e-12),
            c => panic!("expected elliptic, got {c:?}"),
        }
        // tr(Rot(π)) = 2cos(π/2) = 0.
        assert!(MoebiusElement::rot(PI).trace_sq_f64().abs() < 1e-15);
    }

    #[test]
    fn elliptic_angle_is_oriented() {
        // Rot(1) rotates forward by 1/2π of a turn; its inverse must report
        // the complementary angle, not the same one.
        match MoebiusElement::rot(1.0).classify(EPS_PAR).unwrap() {
            IsometryClass::Elliptic { angle } => assert!((angle - 1.0).abs() < 1e-12),
            c => panic!("{c:?}"),
        }
        match MoebiusElement::rot(1.0).inverse().classify(EPS_PAR).unwrap() {
            IsometryClass::Elliptic { angle } => {
                assert!((angle - (2.0 * PI - 1.0)).abs() < 1e-12)
            }
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn exact_classification_decides_the_band() {
        // Parabolic exactly, no tolerance needed.
        let p = MoebiusElement::parabolic_exact(rat_i64(1));
        assert_eq!(p.classify(0.0).unwrap(), IsometryClass::Parabolic);
        // The same matrix as floats sits in the ambiguous band.
        let pf = MoebiusElement::parabolic(1.0);
        assert!(matches!(
            pf.classify(EPS_PAR),
            Err(MoebiusError::AmbiguousClass { .. })
        ));
        assert_eq!(pf.classify_lenient(EPS_PAR), IsometryClass::Parabolic);
        // tr = 1: elliptic of angle 2π/3, orientation from b − c > 0.
        let g = MoebiusElement::from_rational(
            rat_i64(1),
            rat_i64(1),
            rat_i64(-1),
            rat_i64(0),
        )
        .unwrap();
        match g.classify(0.0).unwrap() {
            IsometryClass::Elliptic { angle } => {
                assert!((angle - 2.0 * PI / 3.0).abs() < 1e-12)
            }
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn classification_is_a_conjugacy_invariant() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let g = random_element(&mut rng);
            let h = random_element(&mut rng);
            let gc = g.conjugate_by(&h);
            match (g.classify_lenient(1e-6), gc.classify_lenient(1e-6)) {
                (IsometryClass::Hyperbolic { length: a }, IsometryClass::Hyperbolic { length: b }) => {
                    assert!((a - b).abs() < 1e-6)
                }
                (IsometryClass::Elliptic { angle: a }, IsometryClass::Elliptic { angle: b }) => {
                    assert!((a - b).abs() < 1e-6)
                }
                (x, y) => assert_eq!(x.kind(), y.kind()),
            }
            // Inverse: same kind, same length; elliptic angle reverses.
            match (g.classify_lenient(1e-6), g.inverse().classify_lenient(1e-6)) {
                (IsometryClass::Hyperbolic { length: a }, IsometryClass::Hyperbolic { length: b }) => {
                    assert!((a - b).abs() < 1e-9)
                }
                (IsometryClass::Elliptic { angle: a }, IsometryClass::Elliptic { angle: b }) => {
                    assert!((a + b - 2.0 * PI).abs() < 1e-9)
                }
                (x, y) => assert_eq!(x.kind(), y.kind()),
            }
        }
    }

    #[test]
    fn hyperbolic_length_roundtrips_through_trace() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let l = rng.gen_range(0.1..5.0);
            let g = MoebiusElement::exp(l).conjugate_by(&random_element(&mut rng));
            match g.classify(1e-9).unwrap() {
                IsometryClass::Hyperbolic { length } => {
                    assert!((length - l).abs() < 1e-8, "{length} vs {l}");
                    assert!((g.trace_f64().abs() - 2.0 * (l / 2.0).cosh()).abs() < 1e-8);
                }
                c => panic!("{c:?}"),
            }
        }
    }

    #[test]
    fn boundary_action_is_the_expected_rotation() {
        // Identity fixes points; Rot(t) is the rigid rotation by t/2π.
        assert!((MoebiusElement::identity().boundary_action(0.3) - 0.3).abs() < 1e-15);
        let t = 1.7;
        let g = MoebiusElement::rot(t);
        for k in 0..40 {
            let theta = k as f64 / 40.0;
            let want = frac(theta + t / (2.0 * PI));
            let got = g.boundary_action(theta);
            let d = (got - want).abs();
            assert!(d.min(1.0 - d) < 1e-12, "theta={theta}: {got} vs {want}");
        }
        // Order-5 rotation returns after 5 steps.
        let r5 = MoebiusElement::rot(2.0 * PI / 5.0);
        let mut x = 0.21;
        for _ in 0..5 {
            x = r5.boundary_action(x);
        }
        assert!((x - 0.21).abs() < 1e-12);
        // exp fixes the boundary point 0 (θ = 1/2) and ∞ (θ = 0).
        let e = MoebiusElement::exp(1.0);
        assert!((e.boundary_action(0.5) - 0.5).abs() < 1e-12);
        assert!(e.boundary_action(0.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_action_is_a_group_action() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            let g = random_element(&mut rng);
            let h = random_element(&mut rng);
            let theta = rng.gen_range(0.0..1.0);
            let lhs = g.compose(&h).boundary_action(theta);
            let rhs = g.boundary_action(h.boundary_action(theta));
            let d = (lhs - rhs).abs();
            assert!(d.min(1.0 - d) < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn fixed_points_of_models() {
        let fps = MoebiusElement::exp(1.0).fixed_points().unwrap();
        assert_eq!(fps.len(), 2);
        // exp(1) translates toward ∞ (θ = 0), away from 0 (θ = 1/2).
        let att = fps.iter().find(|f| f.kind == FixKind::Attracting).unwrap();
        let rep = fps.iter().find(|f| f.kind == FixKind::Repelling).unwrap();
        assert!(att.theta.abs() < 1e-12);
        assert!((rep.theta - 0.5).abs() < 1e-12);
        // Iteration from a generic point converges to the attracting end.
        let g = MoebiusElement::exp(1.0);
        let mut x = 0.3;
        for _ in 0..80 {
            x = g.boundary_action(x);
        }
        let d = x.min(1.0 - x);
        assert!(d < 1e-6, "orbit should approach θ = 0, got {x}");

        let fps = MoebiusElement::parabolic_exact(rat_i64(1)).fixed_points().unwrap();
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].kind, FixKind::Parabolic);
        assert!(fps[0].theta.abs() < 1e-12);

        assert!(MoebiusElement::rot(1.0).fixed_points().unwrap().is_empty());
        assert!(matches!(
            MoebiusElement::identity().fixed_points(),
            Err(MoebiusError::IdentityInput)
        ));
    }

    #[test]
    fn parabolic_commutator_test_examples() {
        // c = diag(2, 1/2) hyperbolic with Fix = {0, ∞}.
        let c = MoebiusElement::hyperbolic_exact(Quad::from_i64(2));
        // g in the centralizer: commutator is the identity, tr² = 4.
        let g = MoebiusElement::hyperbolic_exact(Quad::from_i64(3));
        assert!(parabolic_commutator_holds(&c, &g));
        // g = p(1) fixes ∞ ∈ Fix c: shared endpoint, test passes.
        let g = MoebiusElement::parabolic_exact(rat_i64(1));
        assert!(parabolic_commutator_holds(&c, &g));
        // A generic g moves {0, ∞} off itself: test fails.
        let g = MoebiusElement::from_rational(rat_i64(1), rat_i64(1), rat_i64(1), rat_i64(2))
            .unwrap();
        assert!(!parabolic_commutator_holds(&c, &g));

        // Floating version of the same data.
        let cf = MoebiusElement::exp(1.0);
        let gf = MoebiusElement::from_f64(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(!super::parabolic_commutator_test(&cf, &gf, 1e-9));
        assert!(super::parabolic_commutator_test(
            &cf,
            &MoebiusElement::parabolic(1.0),
            1e-9
        ));

        fn parabolic_commutator_holds(c: &MoebiusElement, g: &MoebiusElement) -> bool {
            super::parabolic_commutator_test(c, g, 0.0)
        }
    }

    #[test]
    fn exact_models_are_additive() {
        let p = MoebiusElement::parabolic_exact(rat_frac(1, 2));
        let q = MoebiusElement::parabolic_exact(rat_frac(1, 3));
        assert_eq!(p.compose(&q), MoebiusElement::parabolic_exact(rat_frac(5, 6)));

        let l = MoebiusElement::hyperbolic_exact(Quad::with_sqrt(0, 1, 2));
        assert_eq!(
            l.compose(&l),
            MoebiusElement::hyperbolic_exact(Quad::from_i64(2))
        );

        // tan-half addition: q = 1/2 then 1/3 composes to the quarter turn.
        let a = MoebiusElement::elliptic_exact(rat_frac(1, 2));
        let b = MoebiusElement::elliptic_exact(rat_frac(1, 3));
        let j = MoebiusElement::from_rational(rat_i64(0), rat_i64(1), rat_i64(-1), rat_i64(0))
            .unwrap();
        assert_eq!(a.compose(&b), j);
    }

    #[test]
    fn kak_reconstructs_the_element() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..200 {
            let g = random_element(&mut rng);
            let k = g.kak().unwrap();
            let back = MoebiusElement::rot(k.t1)
                .compose(&MoebiusElement::exp(k.tau))
                .compose(&MoebiusElement::rot(k.t2));
            assert!(k.tau >= 0.0);
            assert!(g.approx_dist(&back) < 1e-10);
        }
    }

    #[test]
    fn json_roundtrip_all_backends() {
        let f = MoebiusElement::rot(0.7);
        assert_eq!(MoebiusElement::from_json(&f.to_json()).unwrap(), f);

        let r = MoebiusElement::from_rational(
            rat_frac(1, 2),
            rat_frac(-1, 3),
            rat_i64(1),
            rat_frac(4, 3),
        )
        .unwrap();
        let v = r.to_json();
        assert_eq!(v["field"], "rational");
        assert_eq!(MoebiusElement::from_json(&v).unwrap(), r);

        let q = MoebiusElement::hyperbolic_exact(Quad::with_sqrt(1, 1, 2));
        let v = q.to_json();
        assert_eq!(v["field"], "quad:2");
        assert_eq!(MoebiusElement::from_json(&v).unwrap(), q);

        let i = QuadC::i();
        let m = Mat2::new(i.clone(), QuadC::zero(), QuadC::zero(), &QuadC::zero() - &i);
        let c = MoebiusElement::from_quadc(m).unwrap();
        let v = c.to_json();
        assert_eq!(v["field"], "complex");
        assert_eq!(MoebiusElement::from_json(&v).unwrap(), c);

        assert!(MoebiusElement::from_json(&json!({"field": "real"})).is_err());
        assert!(MoebiusElement::from_json(
            &json!({"field": "real", "entries": [[1.0, 0.0], [0.0, 2.0]]})
        )
        .is_err());
    }

    #[test]
    fn powers_match_repeated_composition() {
        let g = MoebiusElement::from_rational(rat_i64(2), rat_i64(1), rat_i64(1), rat_i64(1))
            .unwrap();
        let mut acc = MoebiusElement::identity();
        for _ in 0..6 {
            acc = acc.compose(&g);
        }
        assert_eq!(g.powi(6), acc);
        assert_eq!(g.powi(-6), acc.inverse());
        assert!(g.powi(0).is_identity());
    }
}

/// |tr²([c, g c g⁻¹]) − 4| ≤ ε: the computable proxy for "g does not move the
/// fixed set of c's one-parameter group off itself". Exact backends compare
/// exactly when ε = 0.
pub fn parabolic_commutator_test(c: &MoebiusElement, g: &MoebiusElement, eps: f64) -> bool {
    let k = c.commutator(&g.compose(c).compose(&g.inverse()));
    match &k {
        MoebiusElement::Exact(m) => {
            let t = m.trace();
            let diff = &(&t * &t) - &Quad::from_i64(4);
            if eps == 0.0 {
                diff.is_zero()
            } else {
                diff.to_f64().abs() <= eps
            }
        }
        MoebiusElement::ExactC(m) => {
            let t = m.trace();
            let tt = &t * &t;
            let diff = &tt - &QuadC::from_quad(Quad::from_i64(4));
            if eps == 0.0 {
                diff.re.is_zero() && diff.im.is_zero()
            } else {
                let (re, im) = diff.to_c64();
                f64::hypot(re, im) <= eps
            }
        }
        MoebiusElement::Float(_) => (k.trace_sq_f64() - 4.0).abs() <= eps,
    }
}
