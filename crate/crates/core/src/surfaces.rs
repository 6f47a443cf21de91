//! Surface families `F(A) = Σ_j t^{−j(j+1)} det(A)^{n−j} f_j(A)` and the
//! stratified description of their `VAL` images.
//!
//! For the even family `f_j` has degree `2j`; for the odd family `2j + 1`.
//! Restricting `f_j` to the quadric gives a symmetric bidegree curve `C_j`.
//! Points of the image live at the base over the top curve, on regular
//! bands over one curve, at integer critical heights on a section
//! `σ_j[B] = [√(−f_{j−1}(B)/f_j(B)) B]_ℝ*` or over `C_{j−1} ∩ C_j`, and (odd
//! family only) on the tip over the coamoeba of `{f_0 = 0} ∩ PSL₂`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mat2::{Mat2C, ProjPointR, PuiseuxMat2, C64};
use crate::puiseux::{rat, univariate_roots, PuiseuxScalar, RationalExp};
use crate::valuation::{val_point, ConePoint};
use crate::Tolerances;

/// Relative size below which a restricted coefficient counts as zero.
const RESTRICTION_ZERO_TOL: f64 = 1e-12;

/// Homogeneous polynomial in the entries `a, b, c, d` of a 2×2 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly4 {
    monomials: Vec<([u32; 4], C64)>,
    degree: u32,
}

impl Poly4 {
    /// Merges repeated exponents and drops zero coefficients; the result
    /// must be nonzero and homogeneous.
    pub fn new(monomials: impl IntoIterator<Item = ([u32; 4], C64)>) -> Result<Self> {
        let mut merged: Vec<([u32; 4], C64)> = Vec::new();
        for (e, c) in monomials {
            match merged.iter_mut().find(|(x, _)| *x == e) {
                Some((_, k)) => *k += c,
                None => merged.push((e, c)),
            }
        }
        merged.retain(|(_, c)| c.norm() != 0.0);
        let Some(first) = merged.first() else {
            return Err(Error::invalid("empty polynomial"));
        };
        let degree = first.0.iter().sum();
        if merged.iter().any(|(e, _)| e.iter().sum::<u32>() != degree) {
            return Err(Error::invalid("polynomial is not homogeneous"));
        }
        merged.sort_by(|x, y| y.0.cmp(&x.0));
        Ok(Poly4 { monomials: merged, degree })
    }

    pub fn constant(c: C64) -> Result<Self> {
        Poly4::new([([0; 4], c)])
    }

    /// `ad − bc`.
    pub fn det() -> Self {
        Poly4::new([([1, 0, 0, 1], C64::new(1.0, 0.0)), ([0, 1, 1, 0], C64::new(-1.0, 0.0))]).expect("nonzero")
    }

    /// All monomials of the given degree with independent standard complex
    /// Gaussian coefficients.
    pub fn random<R: Rng>(degree: u32, rng: &mut R) -> Self {
        let mut monomials = Vec::new();
        for i in 0..=degree {
            for j in 0..=degree - i {
                for k in 0..=degree - i - j {
                    let l = degree - i - j - k;
                    let c = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                    monomials.push(([i, j, k, l], c));
                }
            }
        }
        Poly4::new(monomials).expect("random coefficients are nonzero")
    }

    pub fn monomials(&self) -> &[([u32; 4], C64)] {
        &self.monomials
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeff_norm(&self) -> f64 {
        self.monomials.iter().map(|(_, c)| c.norm()).sum()
    }

    pub fn eval(&self, m: &Mat2C) -> C64 {
        let x = m.entries();
        self.monomials
            .iter()
            .map(|(e, c)| (0..4).fold(*c, |acc, k| acc * x[k].powu(e[k])))
            .sum()
    }

    /// `|f(m/‖m‖)| / Σ|coefficients|`.
    pub fn normalized_value(&self, m: &Mat2C) -> f64 {
        self.eval(&m.scale_re(1.0 / m.norm())).norm() / self.coeff_norm()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for (e, c) in &self.monomials {
            for (g, k) in &other.monomials {
                out.push(([e[0] + g[0], e[1] + g[1], e[2] + g[2], e[3] + g[3]], c * k));
            }
        }
        Poly4::new(out).expect("product of nonzero polynomials over a domain is nonzero")
    }

    pub fn eval_series(&self, m: &PuiseuxMat2) -> PuiseuxScalar {
        let powers = entry_powers(&m.entries().map(|x| vec![x.clone()]), self.degree);
        self.monomials
            .iter()
            .fold(PuiseuxScalar::zero(), |acc, (e, c)| acc + monomial_value(&powers, e, *c)[0].clone())
    }

    /// Coefficients (ascending in `z`) of `f(p + z q)`.
    pub fn on_line(&self, p: &PuiseuxMat2, q: &PuiseuxMat2) -> Vec<PuiseuxScalar> {
        let lin = line_entries(p, q);
        let powers = entry_powers(&lin, self.degree);
        let mut acc = vec![PuiseuxScalar::zero(); self.degree as usize + 1];
        for (e, c) in &self.monomials {
            acc = poly_add(&acc, &monomial_value(&powers, e, *c));
        }
        acc
    }

    /// Substitutes `a = x₀y₀, b = x₀y₁, c = x₁y₀, d = x₁y₁`. Fails when
    /// the restriction vanishes, i.e. when `det` divides `f`.
    pub fn restrict_to_quadric(&self) -> Result<BidegreeCurve> {
        let d = self.degree as usize;
        let mut coeffs = vec![vec![C64::zero(); d + 1]; d + 1];
        for (e, c) in &self.monomials {
            let x1 = (e[2] + e[3]) as usize;
            let y1 = (e[1] + e[3]) as usize;
            coeffs[x1][y1] += c;
        }
        let curve = BidegreeCurve { coeffs };
        let top = curve.max_abs();
        if top <= RESTRICTION_ZERO_TOL * self.coeff_norm() {
            return Err(Error::invalid("polynomial is divisible by det (restriction to the quadric vanishes)"));
        }
        Ok(curve.cleaned(RESTRICTION_ZERO_TOL * self.coeff_norm()))
    }

    /// `[{"abcd": [i, j, k, l], "coeff": [re, im]}, ...]`
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.monomials
                .iter()
                .map(|(e, c)| json!({"abcd": e, "coeff": [c.re, c.im]}))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let items = v.as_array().ok_or_else(|| Error::invalid("polynomial must be a list of monomials"))?;
        let mut monomials = Vec::with_capacity(items.len());
        for item in items {
            let e = item
                .get("abcd")
                .and_then(Value::as_array)
                .filter(|a| a.len() == 4)
                .ok_or_else(|| Error::invalid("monomial needs \"abcd\": four exponents"))?;
            let mut exps = [0u32; 4];
            for (k, x) in e.iter().enumerate() {
                exps[k] = x
                    .as_u64()
                    .and_then(|x| u32::try_from(x).ok())
                    .ok_or_else(|| Error::invalid("exponents must be nonnegative integers"))?;
            }
            let c = match item.get("coeff") {
                Some(Value::Array(a)) if a.len() == 2 => C64::new(
                    a[0].as_f64().ok_or_else(|| Error::invalid("coefficient must be numeric"))?,
                    a[1].as_f64().ok_or_else(|| Error::invalid("coefficient must be numeric"))?,
                ),
                Some(Value::Number(x)) => C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0),
                _ => return Err(Error::invalid("monomial needs \"coeff\": [re, im]")),
            };
            if !c.is_finite() {
                return Err(Error::invalid("coefficient is not finite"));
            }
            monomials.push((exps, c));
        }
        Poly4::new(monomials)
    }
}

type SeriesPoly = Vec<PuiseuxScalar>;

fn poly_add(a: &[PuiseuxScalar], b: &[PuiseuxScalar]) -> SeriesPoly {
    (0..a.len().max(b.len()))
        .map(|k| match (a.get(k), b.get(k)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) | (None, Some(x)) => x.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

fn poly_mul(a: &[PuiseuxScalar], b: &[PuiseuxScalar]) -> SeriesPoly {
    let mut out = vec![PuiseuxScalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_exact_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &x.mul_ref(y);
        }
    }
    out
}

fn poly_scale(a: &[PuiseuxScalar], s: &PuiseuxScalar) -> SeriesPoly {
    a.iter().map(|x| x.mul_ref(s)).collect()
}

fn line_entries(p: &PuiseuxMat2, q: &PuiseuxMat2) -> [SeriesPoly; 4] {
    let (pe, qe) = (p.entries(), q.entries());
    [0, 1, 2, 3].map(|k| vec![pe[k].clone(), qe[k].clone()])
}

/// `powers[k][e]` is the `e`-th power of entry `k`.
fn entry_powers(entries: &[SeriesPoly; 4], degree: u32) -> Vec<Vec<SeriesPoly>> {
    entries
        .iter()
        .map(|x| {
            let mut pw = vec![vec![PuiseuxScalar::one()]];
            for _ in 0..degree {
                let next = poly_mul(pw.last().unwrap(), x);
                pw.push(next);
            }
            pw
        })
        .collect()
}

fn monomial_value(powers: &[Vec<SeriesPoly>], e: &[u32; 4], c: C64) -> SeriesPoly {
    let mut acc = vec![PuiseuxScalar::constant(c)];
    for k in 0..4 {
        if e[k] > 0 {
            acc = poly_mul(&acc, &powers[k][e[k] as usize]);
        }
    }
    acc
}

/// Bihomogeneous form `g = Σ coeffs[i][j] x₀^{d−i} x₁^i y₀^{d−j} y₁^j` of
/// bidegree `(d, d)` on `ℂP¹ × ℂP¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct BidegreeCurve {
    pub coeffs: Vec<Vec<C64>>,
}

impl BidegreeCurve {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn cleaned(mut self, tol: f64) -> Self {
        for c in self.coeffs.iter_mut().flatten() {
            if c.norm() <= tol {
                *c = C64::zero();
            }
        }
        self
    }

    pub fn eval(&self, x: [C64; 2], y: [C64; 2]) -> C64 {
        let d = self.degree();
        let mut s = C64::zero();
        for i in 0..=d {
            let xi = x[0].powu((d - i) as u32) * x[1].powu(i as u32);
            for j in 0..=d {
                s += self.coeffs[i][j] * xi * y[0].powu((d - j) as u32) * y[1].powu(j as u32);
            }
        }
        s
    }

    /// `|g(x, y)|` on unit vectors, relative to the coefficient sum.
    pub fn normalized_value(&self, x: [C64; 2], y: [C64; 2]) -> f64 {
        let unit = |v: [C64; 2]| {
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            [v[0] / n, v[1] / n]
        };
        let total: f64 = self.coeffs.iter().flatten().map(|c| c.norm()).sum();
        self.eval(unit(x), unit(y)).norm() / total
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (d, e) = (self.degree(), other.degree());
        let mut coeffs = vec![vec![C64::zero(); d + e + 1]; d + e + 1];
        for i in 0..=d {
            for j in 0..=d {
                for k in 0..=e {
                    for l in 0..=e {
                        coeffs[i + k][j + l] += self.coeffs[i][j] * other.coeffs[k][l];
                    }
                }
            }
        }
        BidegreeCurve { coeffs }
    }

    /// Polynomial in `y₁/y₀` (ascending) at fixed `x`.
    pub fn in_y(&self, x: [C64; 2]) -> Vec<C64> {
        let d = self.degree();
        (0..=d)
            .map(|j| (0..=d).map(|i| self.coeffs[i][j] * x[0].powu((d - i) as u32) * x[1].powu(i as u32)).sum())
            .collect()
    }

    /// Polynomial in `x₁/x₀` (ascending) at fixed `y`.
    pub fn in_x(&self, y: [C64; 2]) -> Vec<C64> {
        let d = self.degree();
        (0..=d)
            .map(|i| (0..=d).map(|j| self.coeffs[i][j] * y[0].powu((d - j) as u32) * y[1].powu(j as u32)).sum())
            .collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coeffs
                .iter()
                .map(|row| Value::Array(row.iter().map(|c| json!([c.re, c.im])).collect()))
                .collect(),
        )
    }
}

/// Splits a rank-one matrix `x yᵀ` into its factors.
pub fn segre_factors(m: &Mat2C) -> ([C64; 2], [C64; 2]) {
    let e = m.entries();
    // Largest entry picks a nonzero row and column.
    let k = (0..4).max_by(|&i, &j| e[i].norm().total_cmp(&e[j].norm())).unwrap();
    let (row, col) = (k / 2, k % 2);
    let x = [e[col], e[2 + col]];
    let y = [e[2 * row] / e[k], e[2 * row + 1] / e[k]];
    (x, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// A surface of the even (`deg f_j = 2j`) or odd (`deg f_j = 2j + 1`) family.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceFamily {
    pub parity: Parity,
    pub n: u32,
    pub f: Vec<Poly4>,
    curves: Vec<BidegreeCurve>,
}

impl SurfaceFamily {
    pub fn curve_degree(parity: Parity, j: u32) -> u32 {
        match parity {
            Parity::Even => 2 * j,
            Parity::Odd => 2 * j + 1,
        }
    }

    /// Validates degrees and that no `f_j` is divisible by `det`. Odd
    /// families allow `n = 0` (a plane).
    pub fn build(parity: Parity, n: u32, f: Vec<Poly4>) -> Result<Self> {
        if parity == Parity::Even && n == 0 {
            return Err(Error::invalid("even families need n >= 1"));
        }
        if f.len() != n as usize + 1 {
            return Err(Error::invalid(format!("expected {} polynomials, got {}", n + 1, f.len())));
        }
        let mut curves = Vec::with_capacity(f.len());
        for (j, p) in f.iter().enumerate() {
            let want = Self::curve_degree(parity, j as u32);
            if p.degree() != want {
                return Err(Error::invalid(format!("f_{j} must have degree {want}, got {}", p.degree())));
            }
            curves.push(p.restrict_to_quadric().map_err(|_| Error::invalid(format!("f_{j} is divisible by det")))?);
        }
        Ok(SurfaceFamily { parity, n, f, curves })
    }

    pub fn random<R: Rng>(parity: Parity, n: u32, rng: &mut R) -> Result<Self> {
        let f = (0..=n).map(|j| Poly4::random(Self::curve_degree(parity, j), rng)).collect();
        Self::build(parity, n, f)
    }

    pub fn degree(&self) -> u32 {
        Self::curve_degree(self.parity, self.n)
    }

    /// `C_j`, the restriction of `f_j` to the quadric.
    pub fn curve(&self, j: usize) -> &BidegreeCurve {
        &self.curves[j]
    }

    pub fn curves(&self) -> &[BidegreeCurve] {
        &self.curves
    }

    fn weight(j: u32) -> RationalExp {
        rat(-(j as i64) * (j as i64 + 1), 1)
    }

    pub fn eval_series(&self, a: &PuiseuxMat2) -> PuiseuxScalar {
        let det = a.det();
        let mut acc = PuiseuxScalar::zero();
        for (j, p) in self.f.iter().enumerate() {
            let term = det.pow(self.n - j as u32).mul_ref(&p.eval_series(a));
            acc = acc + term.mul_monomial(C64::new(1.0, 0.0), Self::weight(j as u32));
        }
        acc
    }

    /// Coefficients (ascending in `z`) of `F(p + z q)`.
    pub fn on_line(&self, p: &PuiseuxMat2, q: &PuiseuxMat2) -> Vec<PuiseuxScalar> {
        let det_line = Poly4::det().on_line(p, q);
        let mut det_pows = vec![vec![PuiseuxScalar::one()]];
        for _ in 0..self.n {
            let next = poly_mul(det_pows.last().unwrap(), &det_line);
            det_pows.push(next);
        }
        let mut acc = vec![PuiseuxScalar::zero(); self.degree() as usize + 1];
        for (j, p_j) in self.f.iter().enumerate() {
            let w = PuiseuxScalar::monomial(C64::new(1.0, 0.0), Self::weight(j as u32));
            let term = poly_mul(&det_pows[self.n as usize - j], &p_j.on_line(p, q));
            acc = poly_add(&acc, &poly_scale(&term, &w));
        }
        acc
    }

    /// `|F(A)| / Σ_j |t₀^{−j(j+1)}| |det A|^{n−j} Σ|c| |monomial(A)|` at
    /// `t = t₀`. `det A` is evaluated from its series, since `ad − bc`
    /// cancels catastrophically near the quadric; `A` is scaled to unit
    /// max-entry first.
    pub fn residual_ratio(&self, a: &PuiseuxMat2, t0: f64) -> Result<f64> {
        let m = a.eval_at(t0)?;
        let s = 1.0 / m.max_abs();
        let m = m.scale_re(s);
        let det = a.det().eval_at(t0)? * (s * s);
        let x = m.entries();
        let (mut value, mut scale) = (C64::zero(), 0.0);
        for (j, p) in self.f.iter().enumerate() {
            let w = t0.powf(-((j * (j + 1)) as f64));
            let dpow = det.powu(self.n - j as u32);
            for (e, c) in p.monomials() {
                let mono = (0..4).fold(*c, |acc, k| acc * x[k].powu(e[k]));
                value += mono * dpow * w;
                scale += w * dpow.norm() * mono.norm();
            }
        }
        Ok(if scale == 0.0 { 0.0 } else { value.norm() / scale })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "parity": self.parity.as_str(),
            "n": self.n,
            "f": self.f.iter().map(Poly4::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let parity = match v.get("parity").and_then(Value::as_str) {
            Some("even") => Parity::Even,
            Some("odd") => Parity::Odd,
            _ => return Err(Error::invalid("\"parity\" must be \"even\" or \"odd\"")),
        };
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| Error::invalid("\"n\" must be a nonnegative integer"))?;
        let f = v
            .get("f")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("\"f\" must be a list of polynomials"))?
            .iter()
            .map(Poly4::from_json)
            .collect::<Result<Vec<_>>>()?;
        Self::build(parity, n, f)
    }
}

/// Open height interval `(lo, hi)` carrying the fibers over `C_curve`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Band {
    pub lo: u32,
    /// `None` is `∞`.
    pub hi: Option<u32>,
    pub curve: usize,
}

/// Data of a critical height `j`: curves below and above.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Critical {
    pub height: u32,
    pub below: usize,
    pub above: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrataDescription {
    pub parity: Parity,
    pub n: u32,
    pub critical: Vec<Critical>,
    pub bands: Vec<Band>,
    /// Index of the curve at the base.
    pub base_curve: usize,
    /// Index of the plane whose coamoeba sits over the tip.
    pub tip_plane: Option<usize>,
}

impl StrataDescription {
    pub fn critical_heights(&self) -> Vec<u32> {
        self.critical.iter().map(|c| c.height).collect()
    }

    /// Lowest height carrying any point other than the tip.
    pub fn lowest_height(&self) -> u32 {
        self.bands.first().map_or(0, |b| b.lo)
    }

    pub fn to_json(&self, family: &SurfaceFamily) -> Value {
        let deg = |j: usize| SurfaceFamily::curve_degree(self.parity, j as u32);
        json!({
            "parity": self.parity.as_str(),
            "n": self.n,
            "critical_heights": self.critical_heights(),
            "regular_bands": self.bands.iter().map(|b| json!({
                "lo": b.lo,
                "hi": b.hi.map_or(Value::String("inf".into()), |h| json!(h)),
                "curve": format!("C_{}", deg(b.curve)),
            })).collect::<Vec<_>>(),
            "sigma": self.critical.iter().map(|c| json!({
                "height": c.height,
                "below": format!("C_{}", deg(c.below)),
                "above": format!("C_{}", deg(c.above)),
            })).collect::<Vec<_>>(),
            "base_curve": format!("C_{}", deg(self.base_curve)),
            "base_curve_coeffs": family.curve(self.base_curve).to_json(),
            "tip_plane": self.tip_plane.map_or(Value::Null, |j| family.f[j].to_json()),
        })
    }
}

pub fn strata_describe(s: &SurfaceFamily) -> StrataDescription {
    let n = s.n;
    let critical = (1..=n).map(|j| Critical { height: j, below: j as usize - 1, above: j as usize }).collect();
    let first = match s.parity {
        Parity::Even => 1,
        Parity::Odd => 0,
    };
    let mut bands: Vec<Band> = (first..n).map(|j| Band { lo: j, hi: Some(j + 1), curve: j as usize }).collect();
    bands.push(Band { lo: n, hi: None, curve: n as usize });
    StrataDescription {
        parity: s.parity,
        n,
        critical,
        bands,
        base_curve: n as usize,
        tip_plane: (s.parity == Parity::Odd).then_some(0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stratum {
    Infinity,
    Regular { lo: u32, curve: usize },
    CriticalSection { height: u32, witness: C64 },
    CriticalFiber { height: u32 },
    Tip,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub stratum: Option<Stratum>,
    pub reason: &'static str,
}

impl Verdict {
    fn member(stratum: Stratum, reason: &'static str) -> Self {
        Verdict { stratum: Some(stratum), reason }
    }

    fn not(reason: &'static str) -> Self {
        Verdict { stratum: None, reason }
    }

    pub fn is_member(&self) -> bool {
        self.stratum.is_some()
    }

    pub fn label(&self) -> &'static str {
        match self.stratum {
            None => "NOT_MEMBER",
            Some(Stratum::Infinity) => "SIGMA_INF",
            Some(Stratum::Regular { .. }) => "SIGMA_R",
            Some(Stratum::CriticalSection { .. } | Stratum::CriticalFiber { .. }) => "SIGMA_C",
            Some(Stratum::Tip) => "SIGMA_0",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({"verdict": self.label(), "reason": self.reason});
        match self.stratum {
            Some(Stratum::Regular { lo, .. }) => v["band_lo"] = json!(lo),
            Some(Stratum::CriticalSection { height, witness }) => {
                v["height"] = json!(height);
                v["witness"] = json!([witness.re, witness.im]);
            }
            Some(Stratum::CriticalFiber { height }) => v["height"] = json!(height),
            _ => {}
        }
        v
    }
}

/// `σ_j` applied to a rank-one `b`: `[√(−f_below(b)/f_above(b)) b]_ℝ*`, or
/// `None` on `C_below ∪ C_above`.
pub fn sigma(s: &SurfaceFamily, c: &Critical, b: &Mat2C) -> Option<(C64, ProjPointR)> {
    let (lo, hi) = (s.f[c.below].eval(b), s.f[c.above].eval(b));
    if lo.norm() == 0.0 || hi.norm() == 0.0 {
        return None;
    }
    let k = (-lo / hi).sqrt();
    Some((k, ProjPointR::new(&b.scale(k)).ok()?))
}

/// Decides which stratum of the image a cone point belongs to.
pub fn stratum_membership(s: &SurfaceFamily, x: &ConePoint, tol: &Tolerances) -> Verdict {
    let desc = strata_describe(s);
    match x {
        ConePoint::Base(class) => {
            if s.f[desc.base_curve].normalized_value(class.rep()) <= tol.curve {
                Verdict::member(Stratum::Infinity, "base point on the top curve")
            } else {
                Verdict::not("base point off the top curve")
            }
        }
        ConePoint::Mid { height, class } => {
            let b = class.rep();
            let on = |j: usize| s.f[j].normalized_value(b) <= tol.curve;
            if let Some(c) = desc.critical.iter().find(|c| (height - c.height as f64).abs() <= tol.height) {
                let (lo, hi) = (on(c.below), on(c.above));
                if lo && hi {
                    return Verdict::member(Stratum::CriticalFiber { height: c.height }, "fiber over C_below ∩ C_above");
                }
                if lo || hi {
                    return Verdict::not("critical level over exactly one of the two curves");
                }
                return match sigma(s, c, b) {
                    Some((k, y)) if y.distance(class) <= tol.curve => {
                        Verdict::member(Stratum::CriticalSection { height: c.height, witness: k }, "matches the section")
                    }
                    _ => Verdict::not("critical level off the section"),
                };
            }
            let band = desc
                .bands
                .iter()
                .find(|bd| *height > bd.lo as f64 && bd.hi.is_none_or(|h| *height < h as f64));
            match band {
                None => Verdict::not("no stratum at this height"),
                Some(bd) if on(bd.curve) => Verdict::member(Stratum::Regular { lo: bd.lo, curve: bd.curve }, "fiber over the band curve"),
                Some(_) => Verdict::not("cylinder point off the band curve"),
            }
        }
        ConePoint::Tip(payload) => match desc.tip_plane {
            None => Verdict::not("even families have no tip stratum"),
            Some(j) => {
                if tip_plane_test(&s.f[j], payload.rep(), tol.curve) {
                    Verdict::member(Stratum::Tip, "coamoeba of the plane section")
                } else {
                    Verdict::not("tip point off the coamoeba of the plane section")
                }
            }
        },
    }
}

/// Whether `[u]_ℝ*` is the coamoeba of some `A = u P` with `P` positive
/// definite and `f(A) = 0`, `f` linear. The admissible Hermitian `P` form
/// the kernel of the real-linear map `P ↦ f(u P)`; the test asks whether
/// `det` is positive somewhere on it.
pub fn tip_plane_test(f: &Poly4, u: &Mat2C, tol: f64) -> bool {
    let i = C64::new(0.0, 1.0);
    let (o, l) = (C64::zero(), C64::new(1.0, 0.0));
    let herm = [Mat2C::new(l, o, o, o), Mat2C::new(o, o, o, l), Mat2C::new(o, l, l, o), Mat2C::new(o, -i, i, o)];
    let u = u.scale_re(1.0 / u.norm());
    let vals: Vec<C64> = herm.iter().map(|h| f.eval(&(u * *h))).collect();
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return true;
    }
    let m = DMatrix::from_fn(2, 4, |r, k| if r == 0 { vals[k].re / scale } else { vals[k].im / scale });
    let rank = m.clone().svd(false, false).singular_values.iter().filter(|s| **s > 1e-12).count();
    let kernel = kernel_basis(&m, rank);
    // det(x₀E₀ + x₁E₁ + x₂E₂ + x₃E₃) = x₀x₁ − x₂² − x₃²
    let q = |a: &[f64; 4], b: &[f64; 4]| 0.5 * (a[0] * b[1] + a[1] * b[0]) - a[2] * b[2] - a[3] * b[3];
    let k = kernel.len();
    let g = DMatrix::from_fn(k, k, |r, c| q(&kernel[r], &kernel[c]));
    let top = SymmetricEigen::new(g).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top >= -tol
}

/// Orthonormal kernel basis of a real 2×4 system via the 4×4 normal matrix.
fn kernel_basis(m: &DMatrix<f64>, rank: usize) -> Vec<[f64; 4]> {
    let eig = SymmetricEigen::new(m.transpose() * m);
    let mut idx: Vec<usize> = (0..4).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    idx.into_iter()
        .take(4 - rank)
        .map(|c| [eig.eigenvectors[(0, c)], eig.eigenvectors[(1, c)], eig.eigenvectors[(2, c)], eig.eigenvectors[(3, c)]])
        .collect()
}

/// A point of the surface over `𝕂` together with the guaranteed order of
/// `F` at it.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub point: PuiseuxMat2,
    pub residual_order: Option<RationalExp>,
}

fn random_entry(rng: &mut ChaCha8Rng) -> PuiseuxScalar {
    fn c(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }
    let mut terms = vec![(rat(0, 1), c(rng))];
    if rng.gen_bool(0.5) {
        let e = [rat(-1, 1), rat(-1, 2), rat(1, 2), rat(1, 1)][rng.gen_range(0..4)];
        terms.push((e, c(rng)));
    }
    PuiseuxScalar::from_terms(terms, None)
}

fn random_matrix(rng: &mut ChaCha8Rng) -> PuiseuxMat2 {
    PuiseuxMat2::new(random_entry(rng), random_entry(rng), random_entry(rng), random_entry(rng))
}

/// Points on the surface obtained by intersecting it with random lines
/// `p + z q` over `𝕂` and solving the restricted polynomial. Lines whose
/// roots cannot be resolved to `depth` are skipped, as are roots whose
/// valuation is not determined. Fails when too many lines are skipped.
pub fn sample_points(s: &SurfaceFamily, count: usize, depth: usize, seed: u64) -> Result<Vec<SamplePoint>> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let max_lines = 20 * count + 20;
    for _ in 0..max_lines {
        if out.len() >= count {
            break;
        }
        let (p, q) = (random_matrix(&mut rng), random_matrix(&mut rng));
        let poly = s.on_line(&p, &q);
        if poly.iter().all(|c| c.is_exact_zero()) {
            continue;
        }
        let Ok(roots) = univariate_roots(&poly, depth) else { continue };
        for z in roots {
            let a = p.add(&q.scale(&z));
            if val_point(&a).is_err() {
                continue;
            }
            let residual_order = s.eval_series(&a).upper_ord();
            out.push(SamplePoint { point: a, residual_order });
            if out.len() >= count {
                break;
            }
        }
    }
    if out.len() < count {
        return Err(Error::precision(format!("only {} of {count} sample points resolved", out.len())));
    }
    Ok(out)
}
