//! Lines in `𝕂P³` against the quadric `Q(𝕂) = {det = 0}` and their images
//! under `VAL`.
//!
//! A line meets the quadric in one double point (tangent), two points
//! (secant) or lies on it (ruling). Tangent lines are reparametrized as
//! `z ↦ [zA + B]` with `det(zA + B) = 1`, secant lines as `z ↦ [Az + Bz⁻¹]`
//! with `det = 1`; the image is then read off from the leading terms of `A`
//! and `B`, after removing leading-order proportionality.

use nalgebra::DMatrix;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hyperbolic::coamoeba;
use crate::mat2::{Mat2C, ProjPointC, ProjPointR, PuiseuxMat2, C64};
use crate::puiseux::{rat_to_f64, PuiseuxScalar, RationalExp};
use crate::valuation::ConePoint;
use crate::Tolerances;

/// Relative residual below which two leading matrices count as proportional.
pub const PROPORTIONAL_TOL: f64 = 1e-9;

/// A projective line spanned by two points of `𝕂P³`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineK {
    pub p1: PuiseuxMat2,
    pub p2: PuiseuxMat2,
}

impl LineK {
    /// Rejects proportional points; fails with a precision error when the
    /// 2×2 minors are all unresolved.
    pub fn new(p1: PuiseuxMat2, p2: PuiseuxMat2) -> Result<Self> {
        let x = p1.entries();
        let y = p2.entries();
        let mut unresolved = false;
        for i in 0..4 {
            for j in i + 1..4 {
                let minor = x[i] * y[j] - x[j] * y[i];
                if !minor.is_zero() {
                    return Ok(LineK { p1, p2 });
                }
                unresolved |= !minor.is_exact_zero();
            }
        }
        if unresolved {
            Err(Error::precision("cannot decide whether the two points are distinct"))
        } else {
            Err(Error::invalid("the two points are proportional"))
        }
    }

    pub fn from_constant(p1: &Mat2C, p2: &Mat2C) -> Result<Self> {
        LineK::new(PuiseuxMat2::constant(p1), PuiseuxMat2::constant(p2))
    }

    /// The point `x p1 + y p2`.
    pub fn point(&self, x: &PuiseuxScalar, y: &PuiseuxScalar) -> PuiseuxMat2 {
        self.p1.scale(x).add(&self.p2.scale(y))
    }

    /// Coefficients `(a2, a1, a0)` of `det(s p1 + u p2) = a2 s² + a1 s u + a0 u²`.
    pub fn det_form(&self) -> (PuiseuxScalar, PuiseuxScalar, PuiseuxScalar) {
        (self.p1.det(), mixed_det(&self.p1, &self.p2), self.p2.det())
    }
}

/// `tr(adj(x) y)`, the polarization of the determinant.
fn mixed_det(x: &PuiseuxMat2, y: &PuiseuxMat2) -> PuiseuxScalar {
    &x.d * &y.a - &x.b * &y.c - &x.c * &y.b + &x.a * &y.d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    Tangent,
    Secant,
    Ruling,
}

impl ProfileKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileKind::Tangent => "TANGENT",
            ProfileKind::Secant => "SECANT",
            ProfileKind::Ruling => "RULING",
        }
    }
}

/// How a line meets the quadric.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricProfile {
    pub kind: ProfileKind,
    /// Rank-one points of the line on the quadric; empty for a ruling.
    pub touch_points: Vec<PuiseuxMat2>,
}

/// Touch points as coefficient pairs `(x, y)` of `x p1 + y p2`.
struct Roots {
    kind: ProfileKind,
    coeffs: Vec<(PuiseuxScalar, PuiseuxScalar)>,
}

fn known_nonzero(x: &PuiseuxScalar, what: &str) -> Result<bool> {
    if x.is_exact_zero() {
        Ok(false)
    } else if x.is_zero() {
        Err(Error::precision(format!("cannot decide whether {what} vanishes")))
    } else {
        Ok(true)
    }
}

fn solve_det_form(line: &LineK, depth: usize) -> Result<Roots> {
    let (a2, a1, a0) = line.det_form();
    let n2 = known_nonzero(&a2, "det p1")?;
    let n1 = known_nonzero(&a1, "the mixed determinant")?;
    let n0 = known_nonzero(&a0, "det p2")?;
    if !(n2 || n1 || n0) {
        return Ok(Roots { kind: ProfileKind::Ruling, coeffs: vec![] });
    }
    let disc = &a1 * &a1 - (&a2 * &a0).scale(C64::new(4.0, 0.0));
    let half = C64::new(-0.5, 0.0);
    if !known_nonzero(&disc, "the discriminant")? {
        let q = a1.scale(half);
        let pair = if n2 { (q, a2) } else { (a0, q) };
        return Ok(Roots { kind: ProfileKind::Tangent, coeffs: vec![pair] });
    }
    // q = -(a1 ± √D)/2 with the sign that avoids leading cancellation; the
    // roots s/u are q/a2 and a0/q.
    let root = disc.sqrt(depth)?;
    let cand = [(&a1 + &root).scale(half), (&a1 - &root).scale(half)];
    let key = |x: &PuiseuxScalar| (x.ord(), x.leading_coeff().map_or(0.0, |c| c.norm()));
    let q = if key(&cand[1]) > key(&cand[0]) { cand[1].clone() } else { cand[0].clone() };
    if q.is_zero() {
        return Err(Error::precision("cannot separate the two intersection points"));
    }
    Ok(Roots { kind: ProfileKind::Secant, coeffs: vec![(q.clone(), a2), (a0, q)] })
}

/// Classifies the line by solving the binary quadratic `det(s p1 + u p2)`.
pub fn quadric_intersections(line: &LineK, depth: usize) -> Result<QuadricProfile> {
    let roots = solve_det_form(line, depth)?;
    let touch_points = roots.coeffs.iter().map(|(x, y)| line.point(x, y)).collect();
    Ok(QuadricProfile { kind: roots.kind, touch_points })
}

/// `Some(k)` with `b ≈ k a` when the two matrices are proportional.
fn proportional(a: &Mat2C, b: &Mat2C) -> Option<C64> {
    let k = a.dot(b) / a.dot(a);
    ((*b - a.scale(k)).norm() <= PROPORTIONAL_TOL * b.norm()).then_some(k)
}

/// Replaces `B` by `B − b t^{β−α} A` while the leading matrices of `A` and
/// `B` are proportional. `A` is the touch point of a tangent line and
/// `det B = 1`; the determinant is preserved and the order of `B` drops.
pub fn reduce_param(a: &PuiseuxMat2, b: &PuiseuxMat2, depth: usize) -> Result<(PuiseuxMat2, PuiseuxMat2)> {
    let (alpha, a0) = a.leading_pair()?;
    let mut b = b.clone();
    for _ in 0..=depth {
        let (beta, b0) = b.leading_pair()?;
        match proportional(&a0, &b0) {
            None => return Ok((a.clone(), b)),
            Some(k) => b = b.sub(&a.mul_monomial(k, beta - alpha)),
        }
        if b.is_exact_zero() {
            return Err(Error::invalid("second point is proportional to the touch point"));
        }
    }
    Err(Error::precision("leading-term reduction did not terminate within the depth"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    TangentR,
    Tangent0,
    SecantR,
    Secant0,
    Ruling,
}

impl Shape {
    pub fn as_str(&self) -> &'static str {
        match self {
            Shape::TangentR => "TANGENT_R",
            Shape::Tangent0 => "TANGENT_0",
            Shape::SecantR => "SECANT_R",
            Shape::Secant0 => "SECANT_0",
            Shape::Ruling => "RULING",
        }
    }

    pub fn is_tangent(&self) -> bool {
        matches!(self, Shape::TangentR | Shape::Tangent0)
    }

    pub fn is_secant(&self) -> bool {
        matches!(self, Shape::SecantR | Shape::Secant0)
    }
}

/// Which factor of `v wᵀ` is constant along a ruling line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RulingSide {
    /// `{[v wᵀ]}`: the column space is fixed.
    Left,
    /// `{[w vᵀ]}`: the row space is fixed.
    Right,
}

/// Symbolic image of a line.
///
/// Tangent shapes: `{r} × {[cA₀ + B₀]}` over `c ∈ ℂ`, the whole fiber over
/// `p = [A₀]` above `r`, and `p` at infinity. Secant shapes: `{r} ×
/// {[cA₀ + c⁻¹B₀]}` over `c ∈ ℂ*`, fibers over `p = [A₀]`, `q = [B₀]`. At
/// `r = 0` the section is replaced by coamoebas on the tip. A ruling line
/// maps onto its leading ruling line in the base.
#[derive(Clone, Debug, PartialEq)]
pub struct ValImageLine {
    pub shape: Shape,
    /// Height of the section; `None` for a ruling.
    pub r: Option<RationalExp>,
    pub a0: Mat2C,
    pub b0: Mat2C,
    pub p: Option<ProjPointC>,
    pub q: Option<ProjPointC>,
    /// Fixed side and unit leading fixed vector of a ruling.
    pub ruling: Option<(RulingSide, [C64; 2])>,
}

impl ValImageLine {
    fn tangent(r: RationalExp, a0: Mat2C, b0: Mat2C) -> Result<Self> {
        let shape = if r.is_zero() { Shape::Tangent0 } else { Shape::TangentR };
        Ok(ValImageLine { shape, r: Some(r), a0, b0, p: Some(ProjPointC::new(&a0)?), q: None, ruling: None })
    }

    fn secant(r: RationalExp, a0: Mat2C, b0: Mat2C) -> Result<Self> {
        let shape = if r.is_zero() { Shape::Secant0 } else { Shape::SecantR };
        let (p, q) = (ProjPointC::new(&a0)?, ProjPointC::new(&b0)?);
        Ok(ValImageLine { shape, r: Some(r), a0, b0, p: Some(p), q: Some(q), ruling: None })
    }

    pub fn r_f64(&self) -> f64 {
        self.r.map_or(f64::INFINITY, rat_to_f64)
    }

    pub fn marked_points(&self) -> Vec<ProjPointC> {
        self.p.into_iter().chain(self.q).collect()
    }

    /// The section point at parameter `c` (`c ≠ 0` for secant shapes), as
    /// a cone point at height `r`.
    pub fn section_point(&self, c: C64) -> Result<ConePoint> {
        let m = match self.shape {
            Shape::TangentR | Shape::Tangent0 => self.a0.scale(c) + self.b0,
            Shape::SecantR | Shape::Secant0 => self.a0.scale(c) + self.b0.scale(c.inv()),
            Shape::Ruling => return Ok(ConePoint::Base(ProjPointC::new(&(self.a0.scale(c) + self.b0))?)),
        };
        let r = self.r_f64();
        if r == 0.0 {
            Ok(ConePoint::Tip(coamoeba(&m)?))
        } else {
            Ok(ConePoint::Mid { height: r, class: ProjPointR::new(&m)? })
        }
    }

    pub fn to_json(&self) -> Value {
        let class = |p: &Option<ProjPointC>| p.map_or(Value::Null, |p| p.rep().to_json());
        let mut v = json!({
            "shape": self.shape.as_str(),
            "r": self.r.map_or(Value::Null, |r| json!(rat_to_f64(r))),
            "r_exact": self.r.map_or(Value::Null, |r| json!(r.to_string())),
            "A0": self.a0.to_json(),
            "B0": self.b0.to_json(),
            "p": class(&self.p),
            "q": class(&self.q),
        });
        if let Some((side, w)) = self.ruling {
            v["ruling_side"] = json!(match side {
                RulingSide::Left => "left",
                RulingSide::Right => "right",
            });
            v["fixed_vector"] = json!([[w[0].re, w[0].im], [w[1].re, w[1].im]]);
        }
        v
    }
}

/// Computes the symbolic `VAL` image of a line.
pub fn val_image(line: &LineK, depth: usize) -> Result<ValImageLine> {
    let roots = solve_det_form(line, depth)?;
    match roots.kind {
        ProfileKind::Ruling => ruling_image(line),
        ProfileKind::Tangent => {
            let (x, y) = &roots.coeffs[0];
            let a = line.point(x, y);
            // Any point other than the touch point has constant nonzero determinant.
            let other = if y.is_exact_zero() { &line.p2 } else { &line.p1 };
            let b = other.normalize_det_one(depth)?;
            let (a, b) = reduce_param(&a, &b, depth)?;
            let (_, a0) = a.leading_pair()?;
            let (beta, b0) = b.leading_pair()?;
            ValImageLine::tangent(beta, a0, b0)
        }
        ProfileKind::Secant => {
            let a = line.point(&roots.coeffs[0].0, &roots.coeffs[0].1);
            let b = line.point(&roots.coeffs[1].0, &roots.coeffs[1].1);
            secant_image(&a, &b, depth, false)
        }
    }
}

/// Image of the secant line through the rank-one points `a` and `b`, via
/// `[aw + b] = [A z + B z⁻¹]` with `A = a/√u`, `B = b/√u`, `w = z²` and
/// `u = tr(adj(a) b)`. `flip` takes the other branch of `√u`.
fn secant_image(a: &PuiseuxMat2, b: &PuiseuxMat2, depth: usize, flip: bool) -> Result<ValImageLine> {
    let u = mixed_det(a, b);
    let mut root = u.sqrt(depth)?;
    if flip {
        root = -root;
    }
    let inv = root.invert(depth)?;
    let (a, b) = (a.scale(&inv), b.scale(&inv));
    let (alpha, a0) = a.leading_pair()?;
    let (beta, b0) = b.leading_pair()?;
    let r = (alpha + beta) / 2;
    if r < RationalExp::zero() {
        return Err(Error::invalid("normalized secant parametrization has negative height"));
    }
    let Some(k) = proportional(&a0, &b0) else {
        return ValImageLine::secant(r, a0, b0);
    };
    if r.is_zero() {
        return Err(Error::invalid("proportional leading terms at height 0"));
    }
    // The two leading terms cancel at z = c t^γ₀ with c² = -k. Substitute
    // z = c t^γ₀ (1 + ε) and peel off cancellations level by level.
    let c = (-k).sqrt();
    let gamma0 = (beta - alpha) / 2;
    let a1 = a.mul_monomial(c, gamma0);
    let b1 = b.mul_monomial(c.inv(), -gamma0);
    let tilde = a0.scale(c);
    let one = PuiseuxScalar::one();
    let mut eps = PuiseuxScalar::zero();
    for _ in 0..depth {
        let w = &one + &eps;
        let s = a1.scale(&w).add(&b1.scale(&w.invert(depth)?));
        let (rk, sk) = s.leading_pair()?;
        if rk >= r {
            return Err(Error::invalid("cancellation did not lower the order"));
        }
        match proportional(&tilde, &sk) {
            Some(bk) if !rk.is_zero() => eps = eps + PuiseuxScalar::monomial(bk * -0.5, rk - r),
            _ => return ValImageLine::tangent(rk, tilde, sk),
        }
    }
    Err(Error::precision("cancellation recursion exhausted the depth"))
}

fn columns(m: &PuiseuxMat2) -> [[&PuiseuxScalar; 2]; 2] {
    [[&m.a, &m.c], [&m.b, &m.d]]
}

fn rows(m: &PuiseuxMat2) -> [[&PuiseuxScalar; 2]; 2] {
    [[&m.a, &m.b], [&m.c, &m.d]]
}

fn all_parallel(vs: &[[&PuiseuxScalar; 2]]) -> bool {
    vs.iter()
        .enumerate()
        .all(|(i, x)| vs[i + 1..].iter().all(|y| (x[0] * y[1] - x[1] * y[0]).is_exact_zero()))
}

fn ruling_image(line: &LineK) -> Result<ValImageLine> {
    let cols: Vec<_> = columns(&line.p1).into_iter().chain(columns(&line.p2)).collect();
    let rws: Vec<_> = rows(&line.p1).into_iter().chain(rows(&line.p2)).collect();
    let (side, vs) = if all_parallel(&cols) {
        (RulingSide::Left, cols)
    } else if all_parallel(&rws) {
        (RulingSide::Right, rws)
    } else {
        return Err(Error::invalid("line lies on the quadric but has no fixed factor"));
    };
    let v = vs
        .into_iter()
        .find(|v| !(v[0].is_exact_zero() && v[1].is_exact_zero()))
        .ok_or_else(|| Error::invalid("zero point on a ruling line"))?;
    let ord = v.iter().filter_map(|x| x.ord()).max().ok_or_else(|| Error::precision("fixed vector unresolved"))?;
    let mut w = [v[0].coeff(ord), v[1].coeff(ord)];
    let n = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    w = [w[0] / n, w[1] / n];
    let (e1, e2) = ([C64::new(1.0, 0.0), C64::zero()], [C64::zero(), C64::new(1.0, 0.0)]);
    let (a0, b0) = match side {
        RulingSide::Left => (Mat2C::outer(w, e1), Mat2C::outer(w, e2)),
        RulingSide::Right => (Mat2C::outer(e1, w), Mat2C::outer(e2, w)),
    };
    Ok(ValImageLine { shape: Shape::Ruling, r: None, a0, b0, p: None, q: None, ruling: Some((side, w)) })
}

/// Outcome of a membership test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Containment {
    pub member: bool,
    /// Section parameter `c` when the point was matched on the section.
    pub witness: Option<C64>,
    pub reason: &'static str,
}

impl Containment {
    fn yes(reason: &'static str, witness: Option<C64>) -> Self {
        Containment { member: true, witness, reason }
    }

    fn no(reason: &'static str) -> Self {
        Containment { member: false, witness: None, reason }
    }
}

/// Least squares `x ≈ s a + t b` over ℂ.
fn solve_span(x: &Mat2C, a: &Mat2C, b: &Mat2C) -> Option<(C64, C64)> {
    let (aa, ab, bb) = (a.dot(a), a.dot(b), b.dot(b));
    let (ax, bx) = (a.dot(x), b.dot(x));
    let det = aa * bb - ab * ab.conj();
    if det.norm() <= 1e-14 * aa.norm() * bb.norm() {
        return None;
    }
    Some(((ax * bb - ab * bx) / det, (aa * bx - ab.conj() * ax) / det))
}

fn as_real8(m: &Mat2C) -> [f64; 8] {
    let e = m.entries();
    [e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, e[3].re, e[3].im]
}

/// `X + (X^c)*`, real-linear in `X`.
fn quaternion_part(x: &Mat2C) -> Mat2C {
    *x + x.adjugate().adjoint()
}

/// Orthonormal basis of the (numerical) null space of the real 8×k
/// system with the given columns; never empty.
fn real_kernel(cols: &[Mat2C]) -> Vec<Vec<f64>> {
    let m = DMatrix::from_fn(8, cols.len(), |i, j| as_real8(&cols[j])[i]);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let (imin, _) = sv.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).expect("nonempty system");
    let mut basis: Vec<Vec<f64>> = (0..sv.len())
        .filter(|&i| i != imin && sv[i] <= 1e-9 * top)
        .map(|i| vt.row(i).iter().copied().collect())
        .collect();
    basis.push(vt.row(imin).iter().copied().collect());
    // Columns beyond the row count of V^T are always in the kernel.
    for extra in sv.len()..cols.len() {
        let mut e = vec![0.0; cols.len()];
        e[extra] = 1.0;
        basis.push(e);
    }
    basis
}

fn combine(u: &[f64], w: &[f64], a: f64, b: f64) -> Vec<f64> {
    u.iter().zip(w).map(|(x, y)| a * x + b * y).collect()
}

/// Points `s` of the kernel with `x₁ x₂` real, where `x₁ = s₁ + i s₂` and
/// `x₂ = s₃ + i s₄`. The condition is a quadratic form; it is solved on
/// 2-planes of the kernel.
fn real_product_candidates(basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let xs = |s: &[f64]| (C64::new(s[1], s[2]), C64::new(s[3], s[4]));
    let g = |s: &[f64]| {
        let (x1, x2) = xs(s);
        x1 * x2
    };
    let h = |u: &[f64], w: &[f64]| {
        let ((a1, a2), (b1, b2)) = (xs(u), xs(w));
        (a1 * b2 + b1 * a2) * 0.5
    };
    if basis.len() == 1 {
        return vec![basis[0].clone()];
    }
    let mut planes = Vec::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            planes.push((basis[i].clone(), basis[j].clone()));
        }
    }
    // A few mixed planes for kernels of dimension three or more.
    if basis.len() > 2 {
        let k = basis.len();
        for m in 1..=8 {
            let mut u = vec![0.0; basis[0].len()];
            let mut w = u.clone();
            for (i, b) in basis.iter().enumerate() {
                let (p, q) = ((m * (i + 1)) as f64 * 0.7, (m * (k - i)) as f64 * 1.3);
                u = combine(&u, b, 1.0, p.sin());
                w = combine(&w, b, 1.0, q.cos());
            }
            planes.push((u, w));
        }
    }
    let mut out = Vec::new();
    for (u, w) in planes {
        // Im g(cos φ u + sin φ w) = C + A cos 2φ + B sin 2φ
        let (gu, gw, huw) = (g(&u).im, g(&w).im, h(&u, &w).im);
        let (c0, a, b) = ((gu + gw) / 2.0, (gu - gw) / 2.0, huw);
        let amp = a.hypot(b);
        if amp <= 1e-300 {
            if c0.abs() <= 1e-12 {
                out.push(u.clone());
                out.push(w.clone());
            }
            continue;
        }
        let ratio = -c0 / amp;
        if ratio.abs() > 1.0 + 1e-12 {
            continue;
        }
        let delta = b.atan2(a);
        let spread = ratio.clamp(-1.0, 1.0).acos();
        for two_phi in [delta + spread, delta - spread] {
            let phi = two_phi / 2.0;
            out.push(combine(&u, &w, phi.cos(), phi.sin()));
        }
    }
    out
}

fn near_marked(img: &ValImageLine, class: &ProjPointC, tol: f64) -> bool {
    img.marked_points().iter().any(|p| p.distance(class) <= tol)
}

/// Tests whether a cone point lies in the image.
pub fn image_contains(img: &ValImageLine, x: &ConePoint, tol: &Tolerances) -> Containment {
    if img.shape == Shape::Ruling {
        return ruling_contains(img, x, tol);
    }
    let r = img.r_f64();
    match x {
        ConePoint::Base(class) => {
            if near_marked(img, class, tol.proj) {
                Containment::yes("base point is a marked point", None)
            } else {
                Containment::no("base point is not a marked point")
            }
        }
        ConePoint::Mid { height, class } => {
            if *height > r + tol.height {
                if near_marked(img, &class.to_complex_class(), tol.proj) {
                    Containment::yes("fiber over a marked point", None)
                } else {
                    Containment::no("cylinder point over a non-marked base point")
                }
            } else if *height >= r - tol.height {
                section_contains(img, class, tol)
            } else {
                Containment::no("height below the section height")
            }
        }
        ConePoint::Tip(payload) => {
            if r > tol.height {
                Containment::no("tip point but the section lies above the tip")
            } else {
                tip_contains(img, payload, tol)
            }
        }
    }
}

fn section_contains(img: &ValImageLine, class: &ProjPointR, tol: &Tolerances) -> Containment {
    let x = class.rep();
    let Some((s, t)) = solve_span(x, &img.a0, &img.b0) else {
        return Containment::no("degenerate section data");
    };
    let scale = s.norm() + t.norm();
    let c = match img.shape {
        Shape::TangentR | Shape::Tangent0 => {
            if t.norm() <= 1e-9 * scale {
                return Containment::no("payload lies over the excluded point p");
            }
            s / t
        }
        _ => {
            if s.norm() <= 1e-9 * scale || t.norm() <= 1e-9 * scale {
                return Containment::no("payload lies over an excluded marked point");
            }
            (s / t).sqrt()
        }
    };
    match img.section_point(c) {
        Ok(ConePoint::Mid { class: y, .. }) if y.distance(class) <= tol.proj => {
            Containment::yes("matches the section", Some(c))
        }
        _ => Containment::no("payload is off the section"),
    }
}

fn tip_contains(img: &ValImageLine, payload: &ProjPointR, tol: &Tolerances) -> Containment {
    let i = C64::new(0.0, 1.0);
    let t = *payload.rep();
    let ka = quaternion_part(&img.a0);
    let kia = quaternion_part(&img.a0.scale(i));
    let kb = quaternion_part(&img.b0);
    let matches = |c: C64| match img.section_point(c) {
        Ok(ConePoint::Tip(y)) => y.distance(payload) <= tol.proj,
        _ => false,
    };
    let candidates: Vec<C64> = match img.shape {
        Shape::Tangent0 => {
            // μ T = K(x A₀) + K(ν B₀) with x = s₁ + i s₂, c = x/ν; take the
            // kernel vector with the largest ν.
            let basis = real_kernel(&[t, -ka, -kia, -kb]);
            let s = basis.iter().fold(vec![0.0; 4], |acc, n| combine(&acc, n, 1.0, n[3]));
            let scale = s.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if s[3].abs() <= 1e-9 * scale {
                return Containment::no("tip point lies on the excluded coamoeba line");
            }
            vec![C64::new(s[1], s[2]) / s[3]]
        }
        _ => {
            // μ T = K(x₁ A₀) + K(x₂ B₀) with x₁ x₂ > 0, c = √(x₁/x₂)
            let kib = quaternion_part(&img.b0.scale(i));
            let basis = real_kernel(&[t, -ka, -kia, -kb, -kib]);
            real_product_candidates(&basis)
                .into_iter()
                .filter_map(|s| {
                    let (x1, x2) = (C64::new(s[1], s[2]), C64::new(s[3], s[4]));
                    let scale = x1.norm() + x2.norm();
                    (x1.norm() > 1e-9 * scale && x2.norm() > 1e-9 * scale).then(|| (x1 / x2).sqrt())
                })
                .collect()
        }
    };
    match candidates.into_iter().find(|&c| matches(c)) {
        Some(c) => Containment::yes("matches the tip coamoeba", Some(c)),
        None => Containment::no("payload is off the tip coamoeba"),
    }
}

fn ruling_contains(img: &ValImageLine, x: &ConePoint, tol: &Tolerances) -> Containment {
    let ConePoint::Base(class) = x else {
        return Containment::no("ruling images lie in the base");
    };
    let (side, w) = img.ruling.expect("ruling data present");
    let m = class.rep();
    // Component of the fixed factor orthogonal to w.
    let perp = [-w[1].conj(), w[0].conj()];
    let off = match side {
        RulingSide::Left => m.adjoint().apply(perp),
        RulingSide::Right => m.apply(perp),
    };
    let res = (off[0].norm_sqr() + off[1].norm_sqr()).sqrt() / m.norm();
    if res <= tol.proj {
        Containment::yes("on the leading ruling line", None)
    } else {
        Containment::no("off the leading ruling line")
    }
}
