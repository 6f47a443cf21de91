//! The phase valuation `VAL` from `𝕂P³` to the cone picture of `ℂP³`.
//!
//! The cone picture splits `ℂP³` into the tip `{0} × PSU(2)`, the cylinder
//! `(0, ∞) × 𝒮` over the circle bundle of ℝ*-classes of rank-one matrices,
//! and the base `{∞} × Q(ℂ)`. A cylinder point `(α, [B]_ℝ*)` with `‖B‖ = 1`
//! is the class of `e^α B + e^{−α} (B^c)*`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hyperbolic::{coamoeba, hermitian_eigen, lifted_homothety_with_det};
use crate::mat2::{Mat2C, ProjPointC, ProjPointR, PuiseuxMat2, C64};
use crate::puiseux::rat_to_f64;

/// Heights at or below this value are reported on the tip.
pub const EPS_TIP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Layer {
    Tip,
    Mid,
    Base,
}

impl Layer {
    pub fn as_str(&self) -> &'static str {
        match self {
            Layer::Tip => "tip",
            Layer::Mid => "mid",
            Layer::Base => "base",
        }
    }
}

/// A point of the cone picture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConePoint {
    /// Height 0; the payload is a point of `PSU(2)` as an ℝ*-class.
    Tip(ProjPointR),
    /// Height in `(0, ∞)`; the payload is the ℝ*-class of a rank-one matrix.
    Mid { height: f64, class: ProjPointR },
    /// Height ∞; the payload is a point of the quadric as a ℂ*-class.
    Base(ProjPointC),
}

impl ConePoint {
    pub fn height(&self) -> f64 {
        match self {
            ConePoint::Tip(_) => 0.0,
            ConePoint::Mid { height, .. } => *height,
            ConePoint::Base(_) => f64::INFINITY,
        }
    }

    pub fn layer(&self) -> Layer {
        match self {
            ConePoint::Tip(_) => Layer::Tip,
            ConePoint::Mid { .. } => Layer::Mid,
            ConePoint::Base(_) => Layer::Base,
        }
    }

    pub fn rep(&self) -> &Mat2C {
        match self {
            ConePoint::Tip(p) => p.rep(),
            ConePoint::Mid { class, .. } => class.rep(),
            ConePoint::Base(p) => p.rep(),
        }
    }

    /// The quadric point under a cylinder or base point.
    pub fn base_class(&self) -> Option<ProjPointC> {
        match self {
            ConePoint::Tip(_) => None,
            ConePoint::Mid { class, .. } => Some(class.to_complex_class()),
            ConePoint::Base(p) => Some(*p),
        }
    }

    pub fn to_json(&self) -> Value {
        let height = match self {
            ConePoint::Base(_) => json!("inf"),
            _ => json!(self.height()),
        };
        json!({"height": height, "layer": self.layer().as_str(), "rep": self.rep().to_flat_json()})
    }
}

/// Parameters of the test metric on the cone picture.
#[derive(Clone, Copy, Debug)]
pub struct ConeDistanceParams {
    pub payload_weight: f64,
}

impl Default for ConeDistanceParams {
    fn default() -> Self {
        ConeDistanceParams { payload_weight: 1.0 }
    }
}

fn compactify(h: f64) -> f64 {
    if h.is_infinite() {
        1.0
    } else {
        h / (1.0 + h)
    }
}

/// `e^α B + e^{−α} (B^c)*` for `B` scaled to unit norm.
pub fn embed(alpha: f64, b: &Mat2C) -> Mat2C {
    let u = b.scale_re(1.0 / b.norm());
    u.scale_re(alpha.exp()) + u.adjugate().adjoint().scale_re((-alpha).exp())
}

/// The tip point a cylinder fiber converges to as its height goes to 0.
fn tip_limit(class: &ProjPointR) -> ProjPointR {
    let b = class.rep();
    ProjPointR::new(&(*b + b.adjugate().adjoint())).expect("rank-one unit matrix gives a nonzero sum")
}

/// Test metric: compactified height difference plus a payload term. Payloads
/// in different layers are compared through the gluing maps of the cone
/// (cylinder fibers to the tip, cylinder to base); tip versus base costs 1.
pub fn cone_distance(x: &ConePoint, y: &ConePoint, params: &ConeDistanceParams) -> f64 {
    use ConePoint::*;
    let dh = (compactify(x.height()) - compactify(y.height())).abs();
    let payload = match (x, y) {
        (Tip(p), Tip(q)) => p.distance(q),
        (Mid { class: p, .. }, Mid { class: q, .. }) => p.distance(q),
        (Base(p), Base(q)) => p.distance(q),
        (Tip(p), Mid { class, .. }) | (Mid { class, .. }, Tip(p)) => p.distance(&tip_limit(class)),
        (Mid { class, .. }, Base(p)) | (Base(p), Mid { class, .. }) => class.to_complex_class().distance(p),
        (Tip(_), Base(_)) | (Base(_), Tip(_)) => 1.0,
    };
    dh + params.payload_weight * payload
}

/// `VAL(A)` by the three-case formula. `A` may be any nonzero matrix: a
/// nonsingular `A` is normalized to determinant 1 through the leading terms
/// of `det A`, and an exactly singular `A` lands on the base.
pub fn val_point(a: &PuiseuxMat2) -> Result<ConePoint> {
    let det = a.det();
    if det.is_exact_zero() {
        let (_, b) = a.leading_pair()?;
        return Ok(ConePoint::Base(ProjPointC::new(&b)?));
    }
    let (det_ord, det_lc) = det
        .leading()
        .map_err(|_| Error::precision("determinant is neither zero nor known to be nonzero"))?;
    if !det.leading_is_reliable() {
        return Err(Error::precision("determinant's leading coefficient is within rounding error"));
    }
    let (ord, lead) = a.leading_pair()?;
    // Leading pair of A / sqrt(det A).
    let alpha = ord - det_ord / 2;
    let b = lead.scale(det_lc.sqrt().inv());
    let height = rat_to_f64(alpha);
    if height < 0.0 {
        return Err(Error::invalid("negative height after determinant normalization"));
    }
    if height == 0.0 {
        Ok(ConePoint::Tip(coamoeba(&b)?))
    } else {
        Ok(ConePoint::Mid { height, class: ProjPointR::new(&b)? })
    }
}

/// Inverse of the cone embedding for a nonsingular matrix.
///
/// With `det M = 1`, `M M* = e^{2α} B B* + e^{−2α} (B^c)* B^c` because
/// `B B^c = 0`, so `α` comes from the eigenvalue gap of `M M*` and `B` from
/// the spectral projector onto its top eigenline.
pub fn cone_coords(m: &Mat2C, eps_tip: f64) -> Result<ConePoint> {
    let n = m.normalize_det()?;
    let e = hermitian_eigen(&(n * n.adjoint()), Some(1.0));
    let alpha = e.half_gap.asinh() / 2.0;
    if alpha <= eps_tip {
        return Ok(ConePoint::Tip(ProjPointR::new(&(n + n.adjugate().adjoint()))?));
    }
    let b = (e.proj_top * n).scale_re((-alpha).exp());
    Ok(ConePoint::Mid { height: alpha, class: ProjPointR::new(&b)? })
}

/// Numeric oracle for `VAL`: evaluates `A` at `t0`, normalizes the
/// determinant using the symbolic `det A`, applies the lifted homothety with
/// `h = 1/log t0` and reads off cone coordinates.
pub fn numeric_limit(a: &PuiseuxMat2, t0: f64, eps_tip: f64) -> Result<ConePoint> {
    if !(t0 > std::f64::consts::E) {
        return Err(Error::invalid(format!("evaluation point must exceed e, got {t0}")));
    }
    let det = a.det();
    let m = a.eval_at(t0)?;
    if det.is_exact_zero() {
        return Ok(ConePoint::Base(ProjPointC::new(&m)?));
    }
    if det.is_zero() {
        return Err(Error::precision("determinant has no guaranteed terms"));
    }
    let d0 = det.eval_at(t0)?;
    if d0.norm() == 0.0 {
        return Err(Error::Singular("determinant vanishes at the evaluation point"));
    }
    let n = m.scale(d0.sqrt().inv());
    let r = lifted_homothety_with_det(&n, C64::new(1.0, 0.0), 1.0 / t0.ln());
    if !r.is_finite() {
        return Err(Error::Overflow(format!("lifted homothety at t = {t0}")));
    }
    cone_coords(&r, eps_tip)
}
