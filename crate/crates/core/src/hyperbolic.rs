//! Hyperbolic 3-space as positive Hermitian 2×2 matrices of determinant 1,
//! the amoeba and coamoeba maps of `PSL₂(ℂ)`, and (lifted) homotheties.
//!
//! Everything is closed form: a 2×2 Hermitian matrix `[[p, q], [q̄, s]]` has
//! eigenvalues `(p + s)/2 ± r` with `r = sqrt(((p − s)/2)² + |q|²)`.

use crate::error::{Error, Result};
use crate::mat2::{Mat2C, ProjPointR, C64};

/// Eigenvalue gap below which a Hermitian matrix is treated as scalar.
const SCALAR_GAP: f64 = 1e-12;

/// Spectral data of a Hermitian 2×2 matrix.
#[derive(Clone, Copy, Debug)]
pub struct HermitianEigen {
    pub top: f64,
    pub bottom: f64,
    /// Orthogonal projector onto the `top` eigenline.
    pub proj_top: Mat2C,
    /// Half the eigenvalue gap, `sqrt(((p − s)/2)² + |q|²)`.
    pub half_gap: f64,
}

impl HermitianEigen {
    pub fn proj_bottom(&self) -> Mat2C {
        Mat2C::identity() - self.proj_top
    }

    /// `f(top) Π_top + f(bottom) Π_bottom`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Mat2C {
        self.proj_top.scale_re(f(self.top)) + self.proj_bottom().scale_re(f(self.bottom))
    }
}

/// Eigen-decomposition of the Hermitian part of `m`. When `det` is given it
/// is used for the smaller eigenvalue instead of `mean − r`, which cancels.
pub fn hermitian_eigen(m: &Mat2C, det: Option<f64>) -> HermitianEigen {
    let p = m.a.re;
    let s = m.d.re;
    let q = (m.b + m.c.conj()) * 0.5;
    let half_diff = (p - s) * 0.5;
    let r = half_diff.hypot(q.norm());
    let mean = (p + s) * 0.5;
    let top = mean + r;
    let bottom = match det {
        Some(d) if top > 0.0 => d / top,
        _ => mean - r,
    };
    let scale = p.abs().max(s.abs()).max(q.norm());
    let proj_top = if r <= SCALAR_GAP * scale || r == 0.0 {
        Mat2C::real(1.0, 0.0, 0.0, 0.0)
    } else {
        let v = if p >= s {
            [C64::new(top - s, 0.0), q.conj()]
        } else {
            [q, C64::new(top - p, 0.0)]
        };
        let n2 = v[0].norm_sqr() + v[1].norm_sqr();
        Mat2C::outer(v, [v[0].conj(), v[1].conj()]).scale_re(1.0 / n2)
    };
    HermitianEigen { top, bottom, proj_top, half_gap: r }
}

/// A point of ℍ³: Hermitian, positive definite, determinant 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    p: Mat2C,
}

impl HPoint {
    pub fn new(p: Mat2C) -> Result<Self> {
        let herm = (p - p.adjoint()).norm() <= 1e-10 * p.norm().max(1.0);
        let e = hermitian_eigen(&p, None);
        let det = p.det();
        if !herm || e.bottom <= 0.0 || (det - C64::new(1.0, 0.0)).norm() > 1e-10 * p.norm().max(1.0).powi(2) {
            return Err(Error::invalid("not a positive Hermitian matrix of determinant 1"));
        }
        Ok(HPoint { p })
    }

    pub(crate) fn new_unchecked(p: Mat2C) -> Self {
        HPoint { p }
    }

    pub fn matrix(&self) -> &Mat2C {
        &self.p
    }

    pub fn identity() -> Self {
        HPoint { p: Mat2C::identity() }
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&self.p, Some(1.0))
    }

    /// Hyperbolic distance: `|log λ|` for an eigenvalue `λ` of `P⁻¹Q`.
    pub fn distance(&self, other: &HPoint) -> f64 {
        let inv_sqrt = self.eigen().apply_fn(|x| 1.0 / x.sqrt());
        let m = inv_sqrt * other.p * inv_sqrt;
        // Eigenvalues λ, 1/λ satisfy λ − 1/λ = 2r, hence log λ = asinh(r).
        hermitian_eigen(&m, Some(1.0)).half_gap.asinh()
    }

    /// `P^h`.
    pub fn homothety(&self, h: f64) -> HPoint {
        HPoint { p: self.eigen().apply_fn(|x| x.powf(h)) }
    }

    /// The isometric action `A(P) = A P A*` of a determinant-1 matrix.
    pub fn act(&self, a: &Mat2C) -> HPoint {
        HPoint { p: *a * self.p * a.adjoint() }
    }
}

/// `A ↦ A A*` after dividing `A` by a square root of its determinant.
pub fn amoeba(a: &Mat2C) -> Result<HPoint> {
    let n = a.normalize_det()?;
    Ok(HPoint::new_unchecked(n * n.adjoint()))
}

/// Polar decomposition `A = P U` with `P = sqrt(A A*)` and `U` unitary.
pub fn polar_decompose(a: &Mat2C) -> Result<(Mat2C, Mat2C)> {
    let det = a.det();
    let n = a.norm();
    if n == 0.0 || det.norm() <= 1e-14 * n * n {
        return Err(Error::Singular("polar decomposition"));
    }
    let aa = *a * a.adjoint();
    let e = hermitian_eigen(&aa, Some(det.norm_sqr()));
    let s1 = e.top.sqrt();
    let s2 = det.norm() / s1;
    let p = e.proj_top.scale_re(s1) + e.proj_bottom().scale_re(s2);
    Ok((p, unitary_factor(a, det, &e)))
}

/// `U = Π₁ A / σ₁ + σ₂ Π₂ (adj A)* / conj(det A)`; each half is evaluated on
/// the side where it does not divide by a small singular value.
fn unitary_factor(a: &Mat2C, det: C64, e: &HermitianEigen) -> Mat2C {
    let s1 = e.top.sqrt();
    let s2 = det.norm() / s1;
    let inv_adj = a.adjugate().adjoint().scale(det.conj().inv());
    (e.proj_top * *a).scale_re(1.0 / s1) + (e.proj_bottom() * inv_adj).scale_re(s2)
}

/// `[A + (adj A)*]_ℝ*` for `A` normalized to determinant 1.
pub fn coamoeba(a: &Mat2C) -> Result<ProjPointR> {
    let n = a.normalize_det()?;
    ProjPointR::new(&(n + n.adjugate().adjoint()))
}

/// `R̃_h(P U) = P^h U`.
pub fn lifted_homothety(a: &Mat2C, h: f64) -> Result<Mat2C> {
    let det = a.det();
    let n = a.norm();
    if n == 0.0 || det.norm() <= 1e-14 * n * n {
        return Err(Error::Singular("lifted homothety"));
    }
    Ok(lifted_homothety_with_det(a, det, h))
}

/// Lifted homothety when `det A` is known independently (for example from a
/// symbolic determinant), avoiding the cancellation in `ad − bc`.
pub fn lifted_homothety_with_det(a: &Mat2C, det: C64, h: f64) -> Mat2C {
    let aa = *a * a.adjoint();
    let e = hermitian_eigen(&aa, Some(det.norm_sqr()));
    let s1 = e.top.sqrt();
    let s2 = det.norm() / s1;
    let inv_adj = a.adjugate().adjoint().scale(det.conj().inv());
    // P^h U = σ₁^{h−1} Π₁ A + σ₂^{h+1} Π₂ (A*)⁻¹
    (e.proj_top * *a).scale_re(s1.powf(h - 1.0)) + (e.proj_bottom() * inv_adj).scale_re(s2.powf(h + 1.0))
}

/// Largest singular value of `a`.
pub fn top_singular_value(a: &Mat2C) -> f64 {
    let det = a.det();
    hermitian_eigen(&(*a * a.adjoint()), Some(det.norm_sqr())).top.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn is_unitary(u: &Mat2C, tol: f64) -> bool {
        (*u * u.adjoint() - Mat2C::identity()).norm() <= tol
    }

    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_mat(rng: &mut ChaCha8Rng) -> Mat2C {
        let mut z = || c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        Mat2C::new(z(), z(), z(), z())
    }

    fn random_hpoint(rng: &mut ChaCha8Rng) -> HPoint {
        amoeba(&random_mat(rng)).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng) -> Mat2C {
        polar_decompose(&random_mat(rng)).unwrap().1
    }

    #[test]
    fn amoeba_examples() {
        assert_eq!(amoeba(&Mat2C::identity()).unwrap().matrix(), &Mat2C::identity());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(&mut rng);
        assert!((*amoeba(&u).unwrap().matrix() - Mat2C::identity()).norm() < 1e-12);
        let e = std::f64::consts::E;
        let p = amoeba(&Mat2C::real(e, 0.0, 0.0, 1.0 / e)).unwrap();
        assert!((*p.matrix() - Mat2C::real(e * e, 0.0, 0.0, 1.0 / (e * e))).norm() < 1e-12);
        assert!(amoeba(&Mat2C::real(1.0, 2.0, 2.0, 4.0)).is_err());
    }

    #[test]
    fn distance_examples() {
        let e = std::f64::consts::E;
        let p = HPoint::new(Mat2C::real(e, 0.0, 0.0, 1.0 / e)).unwrap();
        assert!((p.distance(&HPoint::identity()) - 1.0).abs() < 1e-14);
        assert!(p.distance(&p) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (p, q) = (random_hpoint(&mut rng), random_hpoint(&mut rng));
            let a = random_mat(&mut rng).normalize_det().unwrap();
            let d0 = p.distance(&q);
            assert!((p.act(&a).distance(&q.act(&a)) - d0).abs() <= 1e-9 * d0.max(1.0));
            assert!((q.distance(&p) - d0).abs() <= 1e-9 * d0.max(1.0));
            let r = random_hpoint(&mut rng);
            assert!(p.distance(&r) <= d0 + q.distance(&r) + 1e-9);
        }
    }

    #[test]
    fn homothety_scaling() {
        let e = std::f64::consts::E;
        let p = HPoint::new(Mat2C::real(e, 0.0, 0.0, 1.0 / e)).unwrap();
        assert_eq!(p.homothety(1.0).matrix(), p.matrix());
        let p2 = p.homothety(2.0);
        assert!((*p2.matrix() - Mat2C::real(e * e, 0.0, 0.0, 1.0 / (e * e))).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_hpoint(&mut rng);
            let h = rng.gen_range(0.1..4.0);
            let lhs = p.homothety(h).distance(&HPoint::identity());
            let rhs = h * p.distance(&HPoint::identity());
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
            let eig = p.eigen();
            assert!((eig.top * eig.bottom - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn polar_examples() {
        let (p, u) = polar_decompose(&Mat2C::identity()).unwrap();
        assert!((p - Mat2C::identity()).norm() < 1e-15 && (u - Mat2C::identity()).norm() < 1e-15);
        let h = Mat2C::new(c(2.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(1.5, 0.0));
        let (p, u) = polar_decompose(&h).unwrap();
        assert!((p - h).norm() < 1e-14 && (u - Mat2C::identity()).norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let a = random_mat(&mut rng);
            let (p, u) = polar_decompose(&a).unwrap();
            assert!(is_unitary(&u, 1e-10));
            assert!((p * u - a).norm() <= 1e-10 * a.norm());
            assert!((p - p.adjoint()).norm() <= 1e-12 * p.norm());
        }
    }

    #[test]
    fn coamoeba_examples() {
        let d = Mat2C::real(2.0, 0.0, 0.0, 0.5);
        assert!(coamoeba(&d).unwrap().distance(&ProjPointR::new(&Mat2C::identity()).unwrap()) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng).normalize_det().unwrap();
        assert!(coamoeba(&u).unwrap().distance(&ProjPointR::new(&u).unwrap()) < 1e-12);
        for _ in 0..1000 {
            let a = random_mat(&mut rng).normalize_det().unwrap();
            let (_, u) = polar_decompose(&a).unwrap();
            let lhs = coamoeba(&a).unwrap();
            assert!(lhs.distance(&ProjPointR::new(&u).unwrap()) <= 1e-9);
        }
    }

    #[test]
    fn lifted_homothety_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_mat(&mut rng);
        assert!((lifted_homothety(&a, 1.0).unwrap() - a).norm() < 1e-12 * a.norm());
        let u = random_unitary(&mut rng);
        assert!((lifted_homothety(&u, 3.0).unwrap() - u).norm() < 1e-12);
        for _ in 0..1000 {
            let a = random_mat(&mut rng).normalize_det().unwrap();
            let h = rng.gen_range(0.05..3.0);
            let r = lifted_homothety(&a, h).unwrap();
            let lhs = amoeba(&r).unwrap();
            let rhs = amoeba(&a).unwrap().homothety(h);
            let err = (*lhs.matrix() - *rhs.matrix()).norm() / rhs.matrix().norm();
            assert!(err <= 1e-9, "{a} h={h} err={err}");
            assert!(coamoeba(&r).unwrap().distance(&coamoeba(&a).unwrap()) <= 1e-9);
        }
    }

    #[test]
    fn amoeba_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_mat(&mut rng).normalize_det().unwrap();
            let u = random_unitary(&mut rng);
            let lhs = amoeba(&(a * u)).unwrap();
            let rhs = amoeba(&a).unwrap();
            assert!((*lhs.matrix() - *rhs.matrix()).norm() <= 1e-10 * rhs.matrix().norm());
            let d = rhs.distance(&HPoint::identity());
            assert!((d - 2.0 * top_singular_value(&a).ln().abs()).abs() <= 1e-9);
        }
    }
}
