//! 2×2 matrices over ℂ and over the Puiseux field, and their projective classes.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::puiseux::{PuiseuxScalar, RationalExp};

pub type C64 = Complex64;

/// Tolerance for equality of projective classes (Frobenius distance of reps).
pub const EPS_PROJ: f64 = 1e-9;

/// Complex 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2C {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2C {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2C { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2C::new(C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0))
    }

    pub fn identity() -> Self {
        Mat2C::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        Mat2C::default()
    }

    pub fn diag(x: C64, y: C64) -> Self {
        Mat2C::new(x, C64::zero(), C64::zero(), y)
    }

    /// Rank-one matrix `u vᵀ`.
    pub fn outer(u: [C64; 2], v: [C64; 2]) -> Self {
        Mat2C::new(u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1])
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn from_entries(e: [C64; 4]) -> Self {
        Mat2C::new(e[0], e[1], e[2], e[3])
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// `[[d, -b], [-c, a]]`, so that `m * m.adjugate() = det(m) I`.
    pub fn adjugate(&self) -> Self {
        Mat2C::new(self.d, -self.b, -self.c, self.a)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Mat2C::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2C::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() <= 1e-300 || det.norm() <= 1e-14 * self.norm() * self.norm() {
            return Err(Error::Singular("inverse"));
        }
        Ok(self.adjugate().scale(det.inv()))
    }

    /// Divides by the principal square root of the determinant.
    pub fn normalize_det(&self) -> Result<Self> {
        let det = self.det();
        let n = self.norm();
        if n == 0.0 || det.norm() <= 1e-14 * n * n {
            return Err(Error::Singular("determinant normalization"));
        }
        Ok(self.scale(det.sqrt().inv()))
    }

    /// `(x, y) ↦ (m x)`.
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Real inner product `Re tr(self* other)` on ℂ⁴ ≅ ℝ⁸.
    pub fn dot_re(&self, other: &Self) -> f64 {
        self.entries().iter().zip(other.entries()).map(|(x, y)| (x.conj() * y).re).sum()
    }

    /// Hermitian inner product `tr(self* other)`.
    pub fn dot(&self, other: &Self) -> C64 {
        self.entries().iter().zip(other.entries()).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn to_json(&self) -> Value {
        let z = |x: C64| json!([x.re + 0.0, x.im + 0.0]);
        json!([[z(self.a), z(self.b)], [z(self.c), z(self.d)]])
    }

    /// Flat list `[[re, im] × 4]` in row-major order.
    pub fn to_flat_json(&self) -> Value {
        Value::Array(self.entries().iter().map(|z| json!([z.re + 0.0, z.im + 0.0])).collect())
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Mat2C {
    type Output = Mat2C;
    fn neg(self) -> Mat2C {
        Mat2C::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl fmt::Display for Mat2C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// 2×2 matrix with Puiseux-series entries.
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxMat2 {
    pub a: PuiseuxScalar,
    pub b: PuiseuxScalar,
    pub c: PuiseuxScalar,
    pub d: PuiseuxScalar,
}

impl PuiseuxMat2 {
    pub fn new(a: PuiseuxScalar, b: PuiseuxScalar, c: PuiseuxScalar, d: PuiseuxScalar) -> Self {
        PuiseuxMat2 { a, b, c, d }
    }

    pub fn constant(m: &Mat2C) -> Self {
        PuiseuxMat2::new(m.a.into(), m.b.into(), m.c.into(), m.d.into())
    }

    /// `m * t^e`.
    pub fn monomial(m: &Mat2C, e: RationalExp) -> Self {
        PuiseuxMat2::new(
            PuiseuxScalar::monomial(m.a, e),
            PuiseuxScalar::monomial(m.b, e),
            PuiseuxScalar::monomial(m.c, e),
            PuiseuxScalar::monomial(m.d, e),
        )
    }

    pub fn zero() -> Self {
        PuiseuxMat2::new(PuiseuxScalar::zero(), PuiseuxScalar::zero(), PuiseuxScalar::zero(), PuiseuxScalar::zero())
    }

    pub fn entries(&self) -> [&PuiseuxScalar; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    fn map(&self, f: impl Fn(&PuiseuxScalar) -> PuiseuxScalar) -> Self {
        PuiseuxMat2::new(f(&self.a), f(&self.b), f(&self.c), f(&self.d))
    }

    pub fn det(&self) -> PuiseuxScalar {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> PuiseuxScalar {
        &self.a + &self.d
    }

    pub fn det_tr(&self) -> (PuiseuxScalar, PuiseuxScalar) {
        (self.det(), self.trace())
    }

    pub fn adjugate(&self) -> Self {
        PuiseuxMat2::new(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn scale(&self, s: &PuiseuxScalar) -> Self {
        self.map(|x| x * s)
    }

    pub fn scale_c(&self, s: C64) -> Self {
        self.map(|x| x.scale(s))
    }

    pub fn mul_monomial(&self, c: C64, e: RationalExp) -> Self {
        self.map(|x| x.mul_monomial(c, e))
    }

    pub fn add(&self, o: &Self) -> Self {
        PuiseuxMat2::new(&self.a + &o.a, &self.b + &o.b, &self.c + &o.c, &self.d + &o.d)
    }

    pub fn sub(&self, o: &Self) -> Self {
        PuiseuxMat2::new(&self.a - &o.a, &self.b - &o.b, &self.c - &o.c, &self.d - &o.d)
    }

    pub fn matmul(&self, o: &Self) -> Self {
        PuiseuxMat2::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    pub fn truncate_terms(&self, n: usize) -> Self {
        self.map(|x| x.truncate_terms(n))
    }

    /// True when every entry is the exact zero series.
    pub fn is_exact_zero(&self) -> bool {
        self.entries().iter().all(|x| x.is_exact_zero())
    }

    /// Divides by a square root of the determinant, so the result has determinant 1.
    pub fn normalize_det_one(&self, depth: usize) -> Result<Self> {
        let det = self.det();
        if det.is_exact_zero() {
            return Err(Error::ZeroInput("zero determinant"));
        }
        if det.is_zero() {
            return Err(Error::precision("determinant has no guaranteed terms"));
        }
        let inv_root = det.sqrt(depth)?.invert(depth)?;
        Ok(self.scale(&inv_root))
    }

    /// `(alpha, B)` with `self = t^alpha B + o(t^alpha)`.
    pub fn leading_pair(&self) -> Result<(RationalExp, Mat2C)> {
        let alpha = self
            .entries()
            .iter()
            .filter_map(|x| x.ord())
            .max()
            .ok_or_else(|| {
                if self.is_exact_zero() {
                    Error::ZeroInput("leading pair of the zero matrix")
                } else {
                    Error::precision("matrix has no guaranteed terms")
                }
            })?;
        // An entry known only up to O(t^p) with p >= alpha could hide a term at alpha.
        if self.entries().iter().any(|x| x.is_zero() && x.precision().is_some_and(|p| p >= alpha)) {
            return Err(Error::precision("an entry's tail reaches the leading order"));
        }
        if self.entries().iter().any(|x| x.ord() == Some(alpha) && !x.leading_is_reliable()) {
            return Err(Error::precision("leading coefficient is within rounding error of zero"));
        }
        let lead = |x: &PuiseuxScalar| match x.leading() {
            Ok((e, c)) if e == alpha => c,
            _ => C64::zero(),
        };
        Ok((alpha, Mat2C::new(lead(&self.a), lead(&self.b), lead(&self.c), lead(&self.d))))
    }

    pub fn eval_at(&self, t0: f64) -> Result<Mat2C> {
        Ok(Mat2C::new(self.a.eval_at(t0)?, self.b.eval_at(t0)?, self.c.eval_at(t0)?, self.d.eval_at(t0)?))
    }

    /// Parses `{"entries": [[s11, s12], [s21, s22]]}` where each entry is a
    /// series string, a number, or a pair `[re, im]`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("matrix JSON needs an \"entries\" array"))?;
        if rows.len() != 2 {
            return Err(Error::invalid("matrix must have two rows"));
        }
        let mut out = Vec::with_capacity(4);
        for row in rows {
            let row = row.as_array().filter(|r| r.len() == 2).ok_or_else(|| Error::invalid("matrix rows must have two entries"))?;
            for e in row {
                out.push(scalar_from_json(e)?);
            }
        }
        let d = out.pop().unwrap();
        let c = out.pop().unwrap();
        let b = out.pop().unwrap();
        let a = out.pop().unwrap();
        Ok(PuiseuxMat2::new(a, b, c, d))
    }

    pub fn to_json(&self) -> Value {
        json!({"entries": [[self.a.to_string(), self.b.to_string()], [self.c.to_string(), self.d.to_string()]]})
    }
}

pub fn scalar_from_json(v: &Value) -> Result<PuiseuxScalar> {
    match v {
        Value::String(s) => s.parse(),
        Value::Number(n) => Ok(PuiseuxScalar::real(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64().ok_or_else(|| Error::invalid("complex pair must hold numbers"))?;
            let im = pair[1].as_f64().ok_or_else(|| Error::invalid("complex pair must hold numbers"))?;
            Ok(PuiseuxScalar::constant(C64::new(re, im)))
        }
        _ => Err(Error::invalid(format!("unsupported matrix entry {v}"))),
    }
}

impl fmt::Display for PuiseuxMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Canonical representative of a class `[m]` in `(ℂ² ⊗ ℂ² ∖ 0) / ℂ*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjPointC {
    rep: Mat2C,
}

/// Canonical representative of a class `[m]` in `(ℂ² ⊗ ℂ² ∖ 0) / ℝ*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjPointR {
    rep: Mat2C,
}

fn unit(m: &Mat2C) -> Result<Mat2C> {
    let n = m.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroInput("projective class of the zero matrix"));
    }
    Ok(m.scale_re(1.0 / n))
}

impl ProjPointC {
    /// Unit Frobenius norm, then rotated so that the entry of largest modulus
    /// (earliest on ties) is real and positive.
    pub fn new(m: &Mat2C) -> Result<Self> {
        let u = unit(m)?;
        let e = u.entries();
        let mut best = 0;
        for i in 1..4 {
            if e[i].norm() > e[best].norm() {
                best = i;
            }
        }
        let phase = e[best] / e[best].norm();
        let rep = u.scale(phase.conj());
        let mut ent = rep.entries();
        ent[best] = C64::new(ent[best].norm(), 0.0);
        Ok(ProjPointC { rep: Mat2C::from_entries(ent) })
    }

    pub fn rep(&self) -> &Mat2C {
        &self.rep
    }

    /// `min_θ ‖u − e^{iθ} v‖` over unit representatives.
    pub fn distance(&self, other: &Self) -> f64 {
        let ip = other.rep.dot(&self.rep);
        let rot = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
        (self.rep - other.rep.scale(rot)).norm()
    }

    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        self.distance(other) <= eps
    }
}

impl ProjPointR {
    /// Unit Frobenius norm with the sign chosen so that the first entry of
    /// non-negligible modulus has argument in `[0, π)`.
    pub fn new(m: &Mat2C) -> Result<Self> {
        let u = unit(m)?;
        let lead = u.entries().into_iter().find(|z| z.norm() > 1e-12).unwrap_or_default();
        let flip = lead.im < 0.0 || (lead.im == 0.0 && lead.re < 0.0);
        Ok(ProjPointR { rep: if flip { -u } else { u } })
    }

    pub fn rep(&self) -> &Mat2C {
        &self.rep
    }

    /// `min(‖u − v‖, ‖u + v‖)` over unit representatives.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.rep - other.rep).norm().min((self.rep + other.rep).norm())
    }

    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        self.distance(other) <= eps
    }

    /// The ℂ*-class this ℝ*-class lies over.
    pub fn to_complex_class(&self) -> ProjPointC {
        ProjPointC::new(&self.rep).expect("unit representative is nonzero")
    }
}

pub fn canonical_c(m: &Mat2C) -> Result<ProjPointC> {
    ProjPointC::new(m)
}

pub fn canonical_r(m: &Mat2C) -> Result<ProjPointR> {
    ProjPointR::new(m)
}
