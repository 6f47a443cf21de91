//! Curve intersections on the quadric, genericity checks, line families of
//! low-degree surfaces, and the no-lines certificate for degree ≥ 4.
//!
//! A point of the quadric is a rank-one matrix `x yᵀ`. A ruling line fixes
//! `x` ([`RulingSide::Left`]) or `y` ([`RulingSide::Right`]) and is
//! parametrized by the other factor, its free factor.
//!
//! All polynomial work happens in a fixed unitary chart on each `ℂP¹`
//! factor so that special points of the input (coordinate axes, infinity)
//! are never special for the solver.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::cpoly::{self, Cluster};
use crate::error::{Error, Result};
use crate::lines::{val_image, LineK, RulingSide, Shape, ValImageLine};
use crate::mat2::{Mat2C, ProjPointC, ProjPointR, C64};
use crate::puiseux::rat;
use crate::surfaces::{stratum_membership, BidegreeCurve, Parity, SurfaceFamily};
use crate::valuation::ConePoint;
use crate::Tolerances;

/// Roots of a resultant closer than this merge into one cluster.
pub const CLUSTER_RADIUS: f64 = 1e-7;
/// Relative singular value below which a gcd test reports a common factor.
pub const GCD_RANK_TOL: f64 = 1e-8;
/// Minimal Jacobian minor of a transverse intersection.
pub const TRANSVERSE_MIN: f64 = 1e-6;
/// Points of one ruling line closer than this are the same point.
const GAP_MERGE: f64 = 1e-6;
/// Branch points must be at least this far from each other and from the
/// images of intersection points.
const SEPARATION_MIN: f64 = 1e-6;
/// Resultant samples below this fraction of their Hadamard bound count as zero.
const RESULTANT_ZERO_TOL: f64 = 1e-10;
/// A restricted form (of a curve scaled to unit max coefficient) below this vanishes.
const FIBER_ZERO_TOL: f64 = 1e-10;

/// A point of `ℂP¹`: unit norm, larger coordinate real positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P1(pub [C64; 2]);

impl P1 {
    pub fn new(v: [C64; 2]) -> Result<Self> {
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::ZeroInput("point of the projective line"));
        }
        let k = usize::from(v[1].norm() > v[0].norm());
        let phase = v[k].conj() / v[k].norm();
        Ok(P1([v[0] * phase / n, v[1] * phase / n]))
    }

    pub fn infinity() -> Self {
        P1([C64::zero(), C64::new(1.0, 0.0)])
    }

    /// Chordal distance, in `[0, 1]`.
    pub fn chordal(&self, o: &P1) -> f64 {
        (self.0[0] * o.0[1] - self.0[1] * o.0[0]).norm()
    }

    pub fn to_json(&self) -> Value {
        json!([[digits12(self.0[0].re), digits12(self.0[0].im)], [digits12(self.0[1].re), digits12(self.0[1].im)]])
    }
}

fn digits12(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn side_str(side: RulingSide) -> &'static str {
    match side {
        RulingSide::Left => "left",
        RulingSide::Right => "right",
    }
}

/// The rank-one matrix of the ruling line `(side, fixed)` at `free`.
pub fn ruling_point(side: RulingSide, fixed: &P1, free: &P1) -> Mat2C {
    match side {
        RulingSide::Left => Mat2C::outer(fixed.0, free.0),
        RulingSide::Right => Mat2C::outer(free.0, fixed.0),
    }
}

fn su2(angle: f64, p: f64, q: f64) -> Mat2C {
    let c = C64::from_polar(angle.cos(), p);
    let s = C64::from_polar(angle.sin(), q);
    Mat2C::new(c, -s.conj(), s, c.conj())
}

fn chart_x() -> Mat2C {
    su2(0.61, 0.37, 1.29)
}

fn chart_y() -> Mat2C {
    su2(0.83, -0.52, 0.71)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// `g(rx x', ry y')`.
fn transformed(g: &BidegreeCurve, rx: &Mat2C, ry: &Mat2C) -> BidegreeCurve {
    let d = g.degree();
    let (px, py) = (form_powers(rx, d), form_powers(ry, d));
    let mut coeffs = vec![vec![C64::zero(); d + 1]; d + 1];
    for i in 0..=d {
        for j in 0..=d {
            let c = g.coeffs[i][j];
            if c.is_zero() {
                continue;
            }
            for k in 0..=d {
                for l in 0..=d {
                    coeffs[k][l] += c * px[i][k] * py[j][l];
                }
            }
        }
    }
    BidegreeCurve { coeffs }
}

/// Entry `i`: coefficients (ascending in `z₁`) of `(row₀·z)^{d−i} (row₁·z)^i`.
fn form_powers(m: &Mat2C, d: usize) -> Vec<Vec<C64>> {
    let (r0, r1) = ([m.a, m.b], [m.c, m.d]);
    (0..=d)
        .map(|i| {
            let mut acc = vec![one()];
            for _ in 0..d - i {
                acc = cpoly::mul(&acc, &r0);
            }
            for _ in 0..i {
                acc = cpoly::mul(&acc, &r1);
            }
            acc
        })
        .collect()
}

fn swapped(g: &BidegreeCurve) -> BidegreeCurve {
    let d = g.degree();
    BidegreeCurve { coeffs: (0..=d).map(|j| (0..=d).map(|i| g.coeffs[i][j]).collect()).collect() }
}

/// `∂ᵐz^k`.
fn dpow(z: C64, k: usize, m: usize) -> C64 {
    if m > k {
        return C64::zero();
    }
    let f: f64 = ((k - m + 1)..=k).map(|x| x as f64).product();
    z.powu((k - m) as u32) * f
}

/// `∂_u^du ∂_v^dv` of `Σ c_ij u^i v^j`.
fn affine(g: &BidegreeCurve, u: C64, v: C64, du: usize, dv: usize) -> C64 {
    let d = g.degree();
    let mut s = C64::zero();
    for i in 0..=d {
        let ui = dpow(u, i, du);
        for j in 0..=d {
            s += g.coeffs[i][j] * ui * dpow(v, j, dv);
        }
    }
    s
}

/// Gradient with respect to `(x₀, x₁)` and `(y₀, y₁)`.
fn gradient(g: &BidegreeCurve, x: [C64; 2], y: [C64; 2]) -> ([C64; 2], [C64; 2]) {
    let d = g.degree();
    let mut gx = [C64::zero(); 2];
    let mut gy = [C64::zero(); 2];
    for i in 0..=d {
        let xv = x[0].powu((d - i) as u32) * x[1].powu(i as u32);
        let dx0 = dpow(x[0], d - i, 1) * x[1].powu(i as u32);
        let dx1 = x[0].powu((d - i) as u32) * dpow(x[1], i, 1);
        for j in 0..=d {
            let c = g.coeffs[i][j];
            let yv = y[0].powu((d - j) as u32) * y[1].powu(j as u32);
            gx[0] += c * dx0 * yv;
            gx[1] += c * dx1 * yv;
            gy[0] += c * xv * dpow(y[0], d - j, 1) * y[1].powu(j as u32);
            gy[1] += c * xv * y[0].powu((d - j) as u32) * dpow(y[1], j, 1);
        }
    }
    (gx, gy)
}

fn coeff_sum(g: &BidegreeCurve) -> f64 {
    g.coeffs.iter().flatten().map(|c| c.norm()).sum()
}

fn sylvester(p: &[C64], q: &[C64]) -> DMatrix<C64> {
    let (m, n) = (p.len() - 1, q.len() - 1);
    let size = m + n;
    let mut s = DMatrix::<C64>::zeros(size, size);
    for i in 0..n {
        for (k, &c) in p.iter().enumerate() {
            s[(i, i + k)] = c;
        }
    }
    for i in 0..m {
        for (k, &c) in q.iter().enumerate() {
            s[(n + i, i + k)] = c;
        }
    }
    s
}

/// Homogeneous resultant of two binary forms given by full-length
/// coefficient vectors, with the Hadamard bound of its Sylvester matrix.
fn resultant(p: &[C64], q: &[C64]) -> (C64, f64) {
    if p.len() == 1 || q.len() == 1 {
        // A constant form: the resultant is a power of it.
        let (c, e) = if p.len() == 1 { (p[0], q.len() - 1) } else { (q[0], p.len() - 1) };
        let v = c.powu(e as u32);
        return (v, v.norm());
    }
    let s = sylvester(p, q);
    let bound: f64 = s.row_iter().map(|r| r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()).product();
    (s.determinant(), bound)
}

/// Coefficients of a polynomial of degree `< n` from its values at the
/// `n`-th roots of unity.
fn interpolate(n: usize, mut f: impl FnMut(C64) -> Result<C64>) -> Result<Vec<C64>> {
    let w: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, TAU * k as f64 / n as f64)).collect();
    let vals: Vec<C64> = w.iter().map(|&u| f(u)).collect::<Result<_>>()?;
    Ok((0..n)
        .map(|m| (0..n).map(|k| vals[k] * w[(k * m) % n].conj()).sum::<C64>() / n as f64)
        .collect())
}

/// Roots of a polynomial of nominal degree `coeffs.len() − 1`, clustered.
/// A degree drop counts as a cluster at infinity.
fn chart_roots(coeffs: &[C64], radius: f64) -> Result<(Vec<Cluster>, usize)> {
    let trimmed = cpoly::trim(coeffs, 1e-11);
    if trimmed.is_empty() {
        return Err(Error::ZeroInput("polynomial"));
    }
    let deficit = coeffs.len() - trimmed.len();
    Ok((cpoly::clustered_roots(&trimmed, radius)?, deficit))
}

/// Points of `ℂP¹` (through `chart`) where the form vanishes, with multiplicity.
fn chart_points(coeffs: &[C64], chart: &Mat2C, radius: f64) -> Result<Vec<(P1, usize)>> {
    let (clusters, deficit) = chart_roots(coeffs, radius)?;
    let mut out = Vec::with_capacity(clusters.len() + 1);
    for c in clusters {
        out.push((P1::new(chart.apply([one(), c.center]))?, c.multiplicity));
    }
    if deficit > 0 {
        out.push((P1::new(chart.apply([C64::zero(), one()]))?, deficit));
    }
    Ok(out)
}

/// Newton's method on two equations; keeps the iterate whenever a step
/// would increase the residual.
fn newton2(f: impl Fn(C64, C64) -> ([C64; 2], [[C64; 2]; 2]), mut u: C64, mut v: C64, steps: usize) -> (C64, C64) {
    let res = |r: [C64; 2]| r[0].norm() + r[1].norm();
    let (mut r, mut j) = f(u, v);
    for _ in 0..steps {
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 {
            break;
        }
        let du = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        let dv = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let (nu, nv) = (u - du, v - dv);
        let (nr, nj) = f(nu, nv);
        if !(res(nr) < res(r)) {
            break;
        }
        (u, v, r, j) = (nu, nv, nr, nj);
    }
    (u, v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntersectionPoint {
    pub x: P1,
    pub y: P1,
    pub multiplicity: usize,
}

impl IntersectionPoint {
    pub fn matrix(&self) -> Mat2C {
        Mat2C::outer(self.x.0, self.y.0)
    }

    /// Fixed factor of the ruling line of the given side through this point.
    pub fn fixed(&self, side: RulingSide) -> P1 {
        match side {
            RulingSide::Left => self.x,
            RulingSide::Right => self.y,
        }
    }

    pub fn free(&self, side: RulingSide) -> P1 {
        match side {
            RulingSide::Left => self.y,
            RulingSide::Right => self.x,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionSet {
    pub points: Vec<IntersectionPoint>,
    pub total: usize,
}

impl IntersectionSet {
    pub fn to_json(&self) -> Value {
        json!({
            "total": self.total,
            "points": self.points.iter().map(|p| json!({
                "x": p.x.to_json(),
                "y": p.y.to_json(),
                "multiplicity": p.multiplicity,
            })).collect::<Vec<_>>(),
        })
    }
}

fn normalized(g: &BidegreeCurve) -> Result<BidegreeCurve> {
    let m = g.max_abs();
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::ZeroInput("curve"));
    }
    Ok(BidegreeCurve { coeffs: g.coeffs.iter().map(|r| r.iter().map(|c| c / m).collect()).collect() })
}

/// `C₁ ∩ C₂` with multiplicities: the `y`-resultant (degree `2 d₁ d₂` in
/// `x`) is interpolated on roots of unity, its roots clustered, and the
/// common `y` recovered at each root.
pub fn curve_intersections(g1: &BidegreeCurve, g2: &BidegreeCurve) -> Result<IntersectionSet> {
    let (g1, g2) = (normalized(g1)?, normalized(g2)?);
    let (d1, d2) = (g1.degree(), g2.degree());
    if d1 == 0 || d2 == 0 {
        return Ok(IntersectionSet { points: Vec::new(), total: 0 });
    }
    let (rx, ry) = (chart_x(), chart_y());
    let (h1, h2) = (transformed(&g1, &rx, &ry), transformed(&g2, &rx, &ry));
    let expected = 2 * d1 * d2;
    let (mut peak, mut bound) = (0.0f64, 0.0f64);
    let res = interpolate(expected + 1, |u| {
        let x = [one(), u];
        let (r, b) = resultant(&h1.in_y(x), &h2.in_y(x));
        peak = peak.max(r.norm());
        bound = bound.max(b);
        Ok(r)
    })?;
    if peak <= RESULTANT_ZERO_TOL * bound {
        return Err(Error::CommonFactor);
    }
    let (clusters, deficit) = chart_roots(&res, CLUSTER_RADIUS)?;
    let mut xs: Vec<([C64; 2], Option<C64>, usize)> =
        clusters.iter().map(|c| ([one(), c.center], Some(c.center), c.multiplicity)).collect();
    if deficit > 0 {
        xs.push(([C64::zero(), one()], None, deficit));
    }
    let mut points = Vec::with_capacity(xs.len());
    for (xc, u, m) in xs {
        let yc = common_root(&h1.in_y(xc), &h2.in_y(xc), m)?;
        let (mut xc, mut yc) = (xc, yc);
        if let (1, Some(u), Some(v)) = (m, u, (yc[0].norm() > 0.0).then(|| yc[1] / yc[0])) {
            let (u, v) = newton2(
                |u, v| {
                    let r = [affine(&h1, u, v, 0, 0), affine(&h2, u, v, 0, 0)];
                    let j = [
                        [affine(&h1, u, v, 1, 0), affine(&h1, u, v, 0, 1)],
                        [affine(&h2, u, v, 1, 0), affine(&h2, u, v, 0, 1)],
                    ];
                    (r, j)
                },
                u,
                v,
                8,
            );
            xc = [one(), u];
            yc = [one(), v];
        }
        let x = P1::new(rx.apply(xc))?;
        let y = P1::new(ry.apply(yc))?;
        let tol = Tolerances::default().curve;
        if g1.normalized_value(x.0, y.0) > tol || g2.normalized_value(x.0, y.0) > tol {
            return Err(Error::precision("intersection point does not satisfy both curves"));
        }
        points.push(IntersectionPoint { x, y, multiplicity: m });
    }
    let total = points.iter().map(|p| p.multiplicity).sum();
    if total != expected {
        return Err(Error::precision(format!("found {total} intersections, expected {expected}")));
    }
    Ok(IntersectionSet { points, total })
}

/// The common root (in chart coordinates) of two binary forms known to
/// share one, for a resultant root of multiplicity `m`.
fn common_root(p: &[C64], q: &[C64], m: usize) -> Result<[C64; 2]> {
    let id = Mat2C::identity();
    // A fiber of a reducible curve may vanish identically; the other curve decides.
    let (zp, zq) = (cpoly::norm_inf(p) <= FIBER_ZERO_TOL, cpoly::norm_inf(q) <= FIBER_ZERO_TOL);
    if zp && zq {
        return Err(Error::CommonFactor);
    }
    if zp || zq {
        let pts = chart_points(if zp { q } else { p }, &id, CLUSTER_RADIUS)?;
        return match pts[..] {
            [(y, _)] => Ok(y.0),
            _ => Err(Error::ClusterAmbiguity(format!("{} candidate points on a ruling component", pts.len()))),
        };
    }
    let (rp, rq) = (chart_points(p, &id, CLUSTER_RADIUS)?, chart_points(q, &id, CLUSTER_RADIUS)?);
    let tol = 1e-6f64.powf(1.0 / m as f64).max(1e-6);
    let mut best: Option<(f64, P1)> = None;
    let mut matched: Vec<P1> = Vec::new();
    for (a, _) in &rp {
        let Some(dist) = rq.iter().map(|(b, _)| a.chordal(b)).min_by(f64::total_cmp) else {
            continue;
        };
        if best.is_none_or(|(bd, _)| dist < bd) {
            best = Some((dist, *a));
        }
        if dist <= tol && matched.iter().all(|o| o.chordal(a) > tol) {
            matched.push(*a);
        }
    }
    match (best, matched.len()) {
        (_, n) if n > 1 => Err(Error::ClusterAmbiguity(format!("{n} distinct common roots over one resultant root"))),
        (Some((d, y)), _) if d <= tol => Ok(y.0),
        _ => Err(Error::precision("no common root over a resultant root")),
    }
}

/// Whether the forms (full-length coefficients, degree `d`) have no common
/// root: their multiples by all monomials of degree `d − 1` must span all
/// forms of degree `2d − 1`.
fn coprime_forms(forms: &[Vec<C64>], d: usize) -> bool {
    let width = 2 * d;
    let rows: Vec<Vec<C64>> = forms
        .iter()
        .flat_map(|f| {
            (0..d).map(move |k| {
                let mut r = vec![C64::zero(); width];
                r[k..k + f.len()].copy_from_slice(f);
                r
            })
        })
        .collect();
    let m = DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]);
    let sv = m.svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let bottom = sv.iter().copied().fold(f64::INFINITY, f64::min);
    top > 0.0 && bottom >= GCD_RANK_TOL * top
}

/// Whether `g` contains no ruling line, i.e. its coefficient forms in each
/// factor have a trivial common divisor.
pub fn ruling_free(g: &BidegreeCurve) -> bool {
    let d = g.degree();
    if d == 0 {
        return true;
    }
    let in_x: Vec<Vec<C64>> = (0..=d).map(|j| (0..=d).map(|i| g.coeffs[i][j]).collect()).collect();
    coprime_forms(&in_x, d) && coprime_forms(&g.coeffs, d)
}

/// `|det J|` of the two curves at a point, in unit-speed coordinates along
/// the two factors, with each curve scaled by its coefficient sum.
pub fn transversality_minor(g1: &BidegreeCurve, g2: &BidegreeCurve, x: &P1, y: &P1) -> f64 {
    let nx = [-x.0[1].conj(), x.0[0].conj()];
    let ny = [-y.0[1].conj(), y.0[0].conj()];
    let partials = |g: &BidegreeCurve| {
        let (gx, gy) = gradient(g, x.0, y.0);
        let s = coeff_sum(g);
        ((gx[0] * nx[0] + gx[1] * nx[1]) / s, (gy[0] * ny[0] + gy[1] * ny[1]) / s)
    };
    let (a, b) = partials(g1);
    let (c, d) = partials(g2);
    (a * d - b * c).norm()
}

/// A ruling line tangent to a curve: `fixed` is the branch point of the
/// projection to the fixed factor, `free` the tangency point on the line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branch {
    pub side: RulingSide,
    pub fixed: P1,
    pub free: P1,
}

impl Branch {
    pub fn to_json(&self) -> Value {
        json!({"side": side_str(self.side), "fixed": self.fixed.to_json(), "free": self.free.to_json()})
    }
}

/// Branch points of the projection of `g` to the fixed factor of `side`,
/// and whether the ramification is simple: a squarefree discriminant,
/// separated branch images, and exactly one double point over each.
pub fn ramification(g: &BidegreeCurve, side: RulingSide) -> Result<(Vec<Branch>, bool)> {
    let g = normalized(g)?;
    let g = match side {
        RulingSide::Left => g,
        RulingSide::Right => swapped(&g),
    };
    let d = g.degree();
    if d <= 1 {
        return Ok((Vec::new(), true));
    }
    let (rx, ry) = (chart_x(), chart_y());
    let h = transformed(&g, &rx, &ry);
    let expected = 2 * d * (d - 1);
    let disc = interpolate(expected + 1, |u| {
        let p = h.in_y([one(), u]);
        let lead = p[d];
        if lead.norm() < 1e-14 {
            return Err(Error::precision("leading coefficient vanishes at a discriminant sample"));
        }
        Ok(resultant(&p, &cpoly::derivative(&p)).0 / lead)
    })?;
    let (clusters, deficit) = chart_roots(&disc, CLUSTER_RADIUS)?;
    let mut simple = deficit == 0 && clusters.iter().all(|c| c.multiplicity == 1);
    let mut branches = Vec::with_capacity(clusters.len());
    for c in &clusters {
        let p = h.in_y([one(), c.center]);
        let roots = cpoly::roots(&cpoly::trim(&p, 1e-11))?;
        // The closest pair of roots is the double one.
        let mut pair = (f64::INFINITY, C64::zero());
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                let dist = (roots[i] - roots[j]).norm();
                if dist < pair.0 {
                    pair = (dist, (roots[i] + roots[j]) / 2.0);
                }
            }
        }
        let (u, v) = newton2(
            |u, v| {
                let r = [affine(&h, u, v, 0, 1), affine(&h, u, v, 0, 0)];
                let j = [
                    [affine(&h, u, v, 1, 1), affine(&h, u, v, 0, 2)],
                    [affine(&h, u, v, 1, 0), affine(&h, u, v, 0, 1)],
                ];
                (r, j)
            },
            c.center,
            pair.1,
            10,
        );
        let over = chart_points(&h.in_y([one(), u]), &Mat2C::identity(), GAP_MERGE)?;
        let doubles = over.iter().filter(|(_, m)| *m == 2).count();
        if doubles != 1 || over.iter().any(|(_, m)| *m > 2) {
            simple = false;
        }
        branches.push(Branch {
            side,
            fixed: P1::new(rx.apply([one(), u]))?,
            free: P1::new(ry.apply([one(), v]))?,
        });
    }
    for i in 0..branches.len() {
        for j in i + 1..branches.len() {
            if branches[i].fixed.chordal(&branches[j].fixed) < SEPARATION_MIN {
                simple = false;
            }
        }
    }
    Ok((branches, simple))
}

/// A point of a ruling line together with the curves through it.
#[derive(Clone, Debug, PartialEq)]
pub struct LinePoint {
    pub free: P1,
    pub on: Vec<bool>,
}

/// Distinct points of the ruling line `(side, fixed)` on any of `curves`.
pub fn ruling_line_points(curves: &[&BidegreeCurve], side: RulingSide, fixed: &P1) -> Result<Vec<LinePoint>> {
    let id = Mat2C::identity();
    let mut out: Vec<LinePoint> = Vec::new();
    for (k, g) in curves.iter().enumerate() {
        if g.degree() == 0 {
            continue;
        }
        let g = normalized(g)?;
        let (poly, chart) = match side {
            RulingSide::Left => (transformed(&g, &id, &chart_y()).in_y(fixed.0), chart_y()),
            RulingSide::Right => (transformed(&g, &chart_x(), &id).in_x(fixed.0), chart_x()),
        };
        if cpoly::norm_inf(&poly) <= 1e-12 {
            return Err(Error::invalid("ruling line lies on a curve"));
        }
        for (p, _) in chart_points(&poly, &chart, GAP_MERGE)? {
            match out.iter_mut().find(|lp| lp.free.chordal(&p) <= GAP_MERGE) {
                Some(lp) => lp.on[k] = true,
                None => {
                    let mut on = vec![false; curves.len()];
                    on[k] = true;
                    out.push(LinePoint { free: p, on });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenericityReport {
    /// Per curve `C_j`.
    pub curves_contain_no_ruling: Vec<bool>,
    /// Per adjacent pair `(C_{j−1}, C_j)`, `j = 1..=n`.
    pub pairwise_transverse: Vec<bool>,
    /// Per adjacent triple `(C_{j−2}, C_{j−1}, C_j)`, `j = 2..=n`.
    pub triple_empty: Vec<bool>,
    pub ramification_simple: bool,
    pub ramification_disjoint_from_intersections: bool,
    pub notes: Vec<String>,
}

impl GenericityReport {
    pub fn all_pass(&self) -> bool {
        self.failed_flags().is_empty()
    }

    pub fn failed_flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.curves_contain_no_ruling.contains(&false) {
            out.push("curves_contain_no_ruling");
        }
        if self.pairwise_transverse.contains(&false) {
            out.push("pairwise_transverse");
        }
        if self.triple_empty.contains(&false) {
            out.push("triple_empty");
        }
        if !self.ramification_simple {
            out.push("ramification_simple");
        }
        if !self.ramification_disjoint_from_intersections {
            out.push("ramification_disjoint_from_intersections");
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "curves_contain_no_ruling": self.curves_contain_no_ruling,
            "pairwise_transverse": self.pairwise_transverse,
            "triple_empty": self.triple_empty,
            "ramification_simple": self.ramification_simple,
            "ramification_disjoint_from_intersections": self.ramification_disjoint_from_intersections,
            "all_pass": self.all_pass(),
            "notes": self.notes,
        })
    }
}

struct Analysis {
    report: GenericityReport,
    /// `C_{j−1} ∩ C_j` for `j = 1..=n`, when computable.
    pairs: Vec<Option<IntersectionSet>>,
    branches: Vec<Branch>,
}

fn analyze(s: &SurfaceFamily) -> Analysis {
    let tol = Tolerances::default();
    let curves = s.curves();
    let n = s.n as usize;
    let mut notes = Vec::new();
    let curves_contain_no_ruling: Vec<bool> = curves.iter().map(ruling_free).collect();
    for (j, ok) in curves_contain_no_ruling.iter().enumerate() {
        if !ok {
            notes.push(format!("C_{} contains a ruling line", curves[j].degree()));
        }
    }
    let mut pairs = Vec::with_capacity(n);
    let mut pairwise_transverse = Vec::with_capacity(n);
    for j in 1..=n {
        let (lo, hi) = (&curves[j - 1], &curves[j]);
        match curve_intersections(hi, lo) {
            Ok(set) => {
                let ok = set.points.iter().all(|p| p.multiplicity == 1 && transversality_minor(hi, lo, &p.x, &p.y) >= TRANSVERSE_MIN);
                if !ok {
                    notes.push(format!("C_{} and C_{} meet non-transversally", hi.degree(), lo.degree()));
                }
                pairwise_transverse.push(ok);
                pairs.push(Some(set));
            }
            Err(e) => {
                notes.push(format!("C_{} ∩ C_{}: {e}", hi.degree(), lo.degree()));
                pairwise_transverse.push(false);
                pairs.push(None);
            }
        }
    }
    let mut triple_empty = Vec::new();
    for j in 2..=n {
        let third = &curves[j - 2];
        let ok = match &pairs[j - 1] {
            Some(set) => third.degree() == 0 || set.points.iter().all(|p| third.normalized_value(p.x.0, p.y.0) > tol.curve),
            None => false,
        };
        if !ok {
            notes.push(format!("C_{} ∩ C_{} meets C_{}", curves[j].degree(), curves[j - 1].degree(), third.degree()));
        }
        triple_empty.push(ok);
    }
    let top = &curves[n];
    let mut branches = Vec::new();
    let mut ramification_simple = true;
    for side in [RulingSide::Left, RulingSide::Right] {
        match ramification(top, side) {
            Ok((b, simple)) => {
                ramification_simple &= simple;
                branches.extend(b);
            }
            Err(e) => {
                notes.push(format!("ramification of C_{}: {e}", top.degree()));
                ramification_simple = false;
            }
        }
    }
    if !ramification_simple {
        notes.push(format!("ramification of C_{} is not simple", top.degree()));
    }
    let ramification_disjoint_from_intersections = match pairs.last() {
        None => true,
        Some(None) => false,
        Some(Some(set)) => branches
            .iter()
            .all(|b| set.points.iter().all(|p| p.fixed(b.side).chordal(&b.fixed) >= SEPARATION_MIN)),
    };
    if !ramification_disjoint_from_intersections {
        notes.push("a branch point lies under an intersection point".into());
    }
    Analysis {
        report: GenericityReport {
            curves_contain_no_ruling,
            pairwise_transverse,
            triple_empty,
            ramification_simple,
            ramification_disjoint_from_intersections,
            notes,
        },
        pairs,
        branches,
    }
}

pub fn genericity_report(s: &SurfaceFamily) -> GenericityReport {
    analyze(s).report
}

/// Which part of the argument excludes a candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// Section at height `n`: at most two rays, so at most two gaps.
    TopLevel,
    /// Section at height `n − 1`: rays end on `C_d ∩ C_{d−2}`.
    SubTopLevel,
    /// Sections on the tip: rays would cross every critical level.
    Tip,
}

impl Case {
    pub fn reason(&self) -> &'static str {
        match self {
            Case::TopLevel => "r=n",
            Case::SubTopLevel => "r=n-1",
            Case::Tip => "tip-shapes",
        }
    }
}

/// How a candidate ruling line was found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Origin {
    Intersection(IntersectionPoint),
    Tangency(Branch),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub case: Case,
    pub side: Option<RulingSide>,
    pub fixed: Option<P1>,
    pub origin: Option<Origin>,
    /// Points of the line where the section at the level is undefined.
    pub gap_points: Vec<P1>,
    /// Points of the line where a ray may be attached.
    pub ray_points: Vec<P1>,
    pub allowed_rays: usize,
    pub excluded: bool,
}

impl Candidate {
    pub fn gap_count(&self) -> usize {
        self.gap_points.len()
    }

    pub fn to_json(&self) -> Value {
        let origin = match &self.origin {
            None => Value::Null,
            Some(Origin::Intersection(p)) => json!({"kind": "intersection", "x": p.x.to_json(), "y": p.y.to_json()}),
            Some(Origin::Tangency(b)) => json!({"kind": "tangency", "point": b.free.to_json()}),
        };
        json!({
            "case": self.case.reason(),
            "line": match (self.side, self.fixed) {
                (Some(side), Some(fixed)) => json!({"side": side_str(side), "fixed": fixed.to_json()}),
                _ => Value::Null,
            },
            "origin": origin,
            "gap_count": self.case.ne(&Case::Tip).then_some(self.gap_count()),
            "gap_points": self.gap_points.iter().map(P1::to_json).collect::<Vec<_>>(),
            "allowed_rays": self.allowed_rays,
            "verdict": if self.excluded { "EXCLUDED" } else { "NOT_EXCLUDED" },
            "reason": self.case.reason(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoLineCertificate {
    pub degree: u32,
    pub parity: Parity,
    pub n: u32,
    pub genericity: GenericityReport,
    pub triple_intersection_empty: bool,
    pub intersections: IntersectionSet,
    pub branches: Vec<Branch>,
    pub ledger: Vec<Candidate>,
}

impl NoLineCertificate {
    pub fn is_valid(&self) -> bool {
        self.genericity.all_pass() && self.triple_intersection_empty && self.ledger.iter().all(|c| c.excluded)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "parity": self.parity.as_str(),
            "n": self.n,
            "valid": self.is_valid(),
            "genericity_report": self.genericity.to_json(),
            "triple_intersection_empty": self.triple_intersection_empty,
            "top_intersections": self.intersections.to_json(),
            "branch_points": self.branches.iter().map(Branch::to_json).collect::<Vec<_>>(),
            "ledger": self.ledger.iter().map(Candidate::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Gaps of the line at the critical level between curves `lo` and `lo + 1`
/// (points on exactly one of them), and points on both `lo + 1` and `lo + 2`.
fn level_points(s: &SurfaceFamily, side: RulingSide, fixed: &P1, lo: usize) -> Result<(Vec<P1>, Vec<P1>)> {
    let curves = s.curves();
    let mut list: Vec<&BidegreeCurve> = vec![&curves[lo], &curves[lo + 1]];
    if let Some(c) = curves.get(lo + 2) {
        list.push(c);
    }
    let pts = ruling_line_points(&list, side, fixed)?;
    let gaps = pts.iter().filter(|p| p.on[0] != p.on[1]).map(|p| p.free).collect();
    let rays = pts.iter().filter(|p| p.on.len() == 3 && p.on[1] && p.on[2]).map(|p| p.free).collect();
    Ok((gaps, rays))
}

fn ruling_candidate(s: &SurfaceFamily, case: Case, side: RulingSide, origin: Origin) -> Result<Candidate> {
    let n = s.n as usize;
    let fixed = match origin {
        Origin::Intersection(p) => p.fixed(side),
        Origin::Tangency(b) => b.fixed,
    };
    let (gap_points, ray_points, allowed_rays) = match case {
        Case::TopLevel => {
            let (gaps, _) = level_points(s, side, &fixed, n - 1)?;
            (gaps, Vec::new(), 2)
        }
        Case::SubTopLevel => {
            let (gaps, rays) = level_points(s, side, &fixed, n - 2)?;
            let k = rays.len();
            (gaps, rays, k)
        }
        Case::Tip => unreachable!("tip candidates have no line"),
    };
    let excluded = gap_points.len() > allowed_rays;
    Ok(Candidate { case, side: Some(side), fixed: Some(fixed), origin: Some(origin), gap_points, ray_points, allowed_rays, excluded })
}

/// The no-lines argument as finite checks on a generic family of degree
/// `d ≥ 4`. Refuses (without a certificate) when genericity fails.
pub fn certify_no_lines(s: &SurfaceFamily) -> Result<NoLineCertificate> {
    let d = s.degree();
    if d < 4 {
        return Err(Error::invalid(format!("certificate needs degree >= 4, got {d}")));
    }
    let an = analyze(s);
    if !an.report.all_pass() {
        return Err(Error::GenericityFailure(an.report.failed_flags().join(",")));
    }
    let top = an.pairs.last().cloned().flatten().ok_or_else(|| Error::precision("top intersection unavailable"))?;
    let triple_intersection_empty = an.report.triple_empty.iter().all(|&b| b);
    let mut ledger = vec![Candidate {
        case: Case::Tip,
        side: None,
        fixed: None,
        origin: None,
        gap_points: Vec::new(),
        ray_points: Vec::new(),
        allowed_rays: 0,
        excluded: triple_intersection_empty && s.n >= 2,
    }];
    let sides = [RulingSide::Left, RulingSide::Right];
    for p in &top.points {
        for side in sides {
            ledger.push(ruling_candidate(s, Case::TopLevel, side, Origin::Intersection(*p))?);
        }
    }
    for b in &an.branches {
        ledger.push(ruling_candidate(s, Case::TopLevel, b.side, Origin::Tangency(*b))?);
    }
    for p in &top.points {
        for side in sides {
            ledger.push(ruling_candidate(s, Case::SubTopLevel, side, Origin::Intersection(*p))?);
        }
    }
    Ok(NoLineCertificate {
        degree: d,
        parity: s.parity,
        n: s.n,
        genericity: an.report,
        triple_intersection_empty,
        intersections: top,
        branches: an.branches,
        ledger,
    })
}

/// Outcome of testing the putative images of all ledger candidates.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossCheck {
    pub candidates: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl CrossCheck {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.passed == self.candidates
    }
}

/// Solves `g = α a + β b`.
fn coordinates(a: &P1, b: &P1, g: &P1) -> Result<(C64, C64)> {
    let det = a.0[0] * b.0[1] - a.0[1] * b.0[0];
    if det.norm() < 1e-12 {
        return Err(Error::Singular("coinciding points on a ruling line"));
    }
    let alpha = (g.0[0] * b.0[1] - g.0[1] * b.0[0]) / det;
    let beta = (a.0[0] * g.0[1] - a.0[1] * g.0[0]) / det;
    Ok((alpha, beta))
}

/// Builds the putative image of each ruling candidate, places its section
/// over an unused gap, and checks that this point (and so at least one of
/// 50 samples) is rejected by the surface; for the tip entry, checks that
/// rays over `C_d ∩ C_{d−2}` are rejected below the first critical level.
pub fn cross_check(s: &SurfaceFamily, cert: &NoLineCertificate, tol: &Tolerances) -> Result<CrossCheck> {
    let mut out = CrossCheck { candidates: cert.ledger.len(), passed: 0, failures: Vec::new() };
    for (k, cand) in cert.ledger.iter().enumerate() {
        let ok = match (cand.case, cand.side, cand.fixed) {
            (Case::Tip, _, _) => cert.intersections.points.iter().all(|p| {
                ProjPointR::new(&p.matrix())
                    .map(|class| !stratum_membership(s, &ConePoint::Mid { height: 0.5, class }, tol).is_member())
                    .unwrap_or(false)
            }),
            (case, Some(side), Some(fixed)) => putative_image_rejected(s, cand, case, side, &fixed, tol)?,
            _ => false,
        };
        if ok {
            out.passed += 1;
        } else {
            out.failures.push(format!("candidate {k} ({}) has no rejected point", cand.case.reason()));
        }
    }
    Ok(out)
}

fn putative_image_rejected(s: &SurfaceFamily, cand: &Candidate, case: Case, side: RulingSide, fixed: &P1, tol: &Tolerances) -> Result<bool> {
    let at = |free: &P1| ruling_point(side, fixed, free);
    let (img, c_gap) = match case {
        Case::TopLevel => {
            let [a, b, g, ..] = cand.gap_points[..] else { return Ok(false) };
            let (alpha, beta) = coordinates(&a, &b, &g)?;
            (section_image(Shape::SecantR, s.n, at(&a), at(&b))?, (alpha / beta).sqrt())
        }
        Case::SubTopLevel => {
            let Some(p) = cand.ray_points.first() else { return Ok(false) };
            let Some(g) = cand.gap_points.iter().find(|g| g.chordal(p) > GAP_MERGE) else { return Ok(false) };
            (section_image(Shape::TangentR, s.n - 1, at(p), at(g))?, C64::zero())
        }
        Case::Tip => return Ok(false),
    };
    let gap_point = img.section_point(c_gap)?;
    if stratum_membership(s, &gap_point, tol).is_member() {
        return Ok(false);
    }
    let mut rejected = 1;
    for i in 1..50 {
        let c = C64::from_polar(0.5 + 1.5 * (i as f64 * 0.4142).fract(), TAU * (i as f64 * 0.618_034).fract());
        if !stratum_membership(s, &img.section_point(c)?, tol).is_member() {
            rejected += 1;
        }
    }
    Ok(rejected >= 1)
}

fn section_image(shape: Shape, height: u32, a0: Mat2C, b0: Mat2C) -> Result<ValImageLine> {
    let q = if shape.is_secant() { Some(ProjPointC::new(&b0)?) } else { None };
    Ok(ValImageLine { shape, r: Some(rat(height as i64, 1)), a0, b0, p: Some(ProjPointC::new(&a0)?), q, ruling: None })
}

/// Deterministic points of a line image: section points, points on the
/// rays over the marked points, and the marked points at the base.
pub fn image_sample_points(img: &ValImageLine, count: usize) -> Result<Vec<ConePoint>> {
    let r = img.r_f64();
    let marked = img.marked_points();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let theta = TAU * (i as f64 * 0.618_034).fract();
        let kind = if marked.is_empty() { 0 } else { i % 4 };
        let pt = match kind {
            0 | 1 => img.section_point(C64::from_polar(0.5 + 1.5 * (i as f64 * 0.4142).fract(), theta))?,
            2 => {
                let p = marked[(i / 4) % marked.len()];
                let height = r + 0.25 + (i % 7) as f64 * 0.5;
                ConePoint::Mid { height, class: ProjPointR::new(&p.rep().scale(C64::from_polar(1.0, theta)))? }
            }
            _ => ConePoint::Base(marked[(i / 4) % marked.len()]),
        };
        out.push(pt);
    }
    Ok(out)
}

/// Verdict on one of the rigid candidates of a cubic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidCandidate {
    pub side: RulingSide,
    pub fixed: P1,
    /// Intersections of the line with `C₃ ∖ C₁`, each needing a ray.
    pub gaps_off_c1: usize,
    pub admissible: bool,
}

impl RigidCandidate {
    pub fn to_json(&self) -> Value {
        json!({
            "side": side_str(self.side),
            "fixed": self.fixed.to_json(),
            "gaps_off_c1": self.gaps_off_c1,
            "verdict": if self.admissible { "ADMISSIBLE" } else { "REJECTED" },
        })
    }
}

/// Counts the gaps of a ruling line on a cubic of the odd family: a line
/// image carries at most two rays.
pub fn rigid_candidate(s: &SurfaceFamily, side: RulingSide, fixed: &P1) -> Result<RigidCandidate> {
    let pts = ruling_line_points(&[s.curve(0), s.curve(1)], side, fixed)?;
    let gaps_off_c1 = pts.iter().filter(|p| p.on[1] && !p.on[0]).count();
    Ok(RigidCandidate { side, fixed: *fixed, gaps_off_c1, admissible: gaps_off_c1 <= 2 })
}

/// The ruling lines through `C₁ ∩ C₃` (both sides) of a generic cubic,
/// with their gap counts.
pub fn rigid_lines_d3(s: &SurfaceFamily) -> Result<(IntersectionSet, Vec<RigidCandidate>)> {
    if s.parity != Parity::Odd || s.n != 1 {
        return Err(Error::invalid("rigid lines need the odd family with n = 1"));
    }
    let report = genericity_report(s);
    if !report.all_pass() {
        return Err(Error::GenericityFailure(report.failed_flags().join(",")));
    }
    let set = curve_intersections(s.curve(1), s.curve(0))?;
    let mut out = Vec::with_capacity(2 * set.points.len());
    for p in &set.points {
        for side in [RulingSide::Left, RulingSide::Right] {
            out.push(rigid_candidate(s, side, &p.fixed(side))?);
        }
    }
    Ok((set, out))
}

/// Line images fitting surfaces of degree one and two.
#[derive(Clone, Debug)]
pub struct LowDegreeFamilies<'a> {
    family: &'a SurfaceFamily,
}

pub fn low_degree_families(s: &SurfaceFamily) -> Result<LowDegreeFamilies<'_>> {
    let d = s.degree();
    if d != 1 && d != 2 {
        return Err(Error::invalid(format!("low-degree families need degree 1 or 2, got {d}")));
    }
    let report = genericity_report(s);
    if !report.all_pass() {
        return Err(Error::GenericityFailure(report.failed_flags().join(",")));
    }
    Ok(LowDegreeFamilies { family: s })
}

fn random_p1(rng: &mut ChaCha8Rng) -> Result<P1> {
    let mut c = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    P1::new([c(), c()])
}

impl LowDegreeFamilies<'_> {
    pub fn degree(&self) -> u32 {
        self.family.degree()
    }

    pub fn describe(&self) -> Value {
        let top = self.family.curve(self.family.n as usize);
        match self.degree() {
            1 => json!({
                "degree": 1,
                "dimension": 2,
                "curve": top.to_json(),
                "generators": [
                    {"shape": "TANGENT_0", "parameter": "a point of C_1"},
                    {"shape": "SECANT_0", "parameter": "two distinct points of C_1"},
                ],
            }),
            _ => json!({
                "degree": 2,
                "dimension": 1,
                "curve": top.to_json(),
                "components": [
                    {"side": "left", "shape": "SECANT_R", "r": 1, "parameter": "a left ruling line", "rays": "its two points on C_2"},
                    {"side": "right", "shape": "SECANT_R", "r": 1, "parameter": "a right ruling line", "rays": "its two points on C_2"},
                ],
            }),
        }
    }

    fn random_point_on_top(&self, rng: &mut ChaCha8Rng) -> Result<Mat2C> {
        let g = self.family.curve(self.family.n as usize);
        let x = random_p1(rng)?;
        let pts = ruling_line_points(&[g], RulingSide::Left, &x)?;
        let first = pts.first().ok_or_else(|| Error::precision("ruling line misses the curve"))?;
        Ok(ruling_point(RulingSide::Left, &x, &first.free))
    }

    /// A tangent-at-the-tip image through one point of `C₁` (degree one).
    pub fn sample_tangent(&self, rng: &mut ChaCha8Rng) -> Result<ValImageLine> {
        let f = &self.family.f[0];
        let p = self.random_point_on_top(rng)?;
        let (x, y) = crate::surfaces::segre_factors(&p);
        let (x2, w) = (random_p1(rng)?, random_p1(rng)?);
        // x' yᵀ + x y'ᵀ with f(x' yᵀ + x y'ᵀ) = 0 is tangent to the quadric and lies in the plane.
        let k = -f.eval(&Mat2C::outer(x2.0, y)) / f.eval(&Mat2C::outer(x, w.0));
        let b = Mat2C::outer(x2.0, y) + Mat2C::outer(x, [w.0[0] * k, w.0[1] * k]);
        val_image(&LineK::from_constant(&p, &b)?, 8)
    }

    /// A secant-at-the-tip image through two points of `C₁` (degree one).
    pub fn sample_secant(&self, rng: &mut ChaCha8Rng) -> Result<ValImageLine> {
        let p = self.random_point_on_top(rng)?;
        let q = self.random_point_on_top(rng)?;
        val_image(&LineK::from_constant(&p, &q)?, 8)
    }

    /// The image at height one over a random ruling line of the given side
    /// (degree two): rays at the line's two points on `C₂`, section equal
    /// to `σ₁` elsewhere.
    pub fn sample_ruling_section(&self, side: RulingSide, rng: &mut ChaCha8Rng) -> Result<ValImageLine> {
        let s = self.family;
        let fixed = random_p1(rng)?;
        let pts = ruling_line_points(&[s.curve(1)], side, &fixed)?;
        let [p, q] = &pts[..] else {
            return Err(Error::precision("ruling line is tangent to C_2"));
        };
        let (a0, b0) = (ruling_point(side, &fixed, &p.free), ruling_point(side, &fixed, &q.free));
        // f₁(A₀ + s B₀) = κ s; choosing κ = −f₀ makes σ₁ the section.
        let f0 = s.f[0].eval(&a0);
        let kappa = s.f[1].eval(&(a0 + b0));
        let b0 = b0.scale(-f0 / kappa);
        section_image(Shape::SecantR, 1, a0, b0)
    }

    /// `count` images from the given seed: secant shapes for degree one,
    /// ruling sections alternating sides for degree two.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<ValImageLine>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| match self.degree() {
                1 => self.sample_secant(&mut rng),
                _ => {
                    let side = if i % 2 == 0 { RulingSide::Left } else { RulingSide::Right };
                    self.sample_ruling_section(side, &mut rng)
                }
            })
            .collect()
    }
}
