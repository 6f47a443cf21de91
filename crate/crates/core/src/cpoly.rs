//! Dense univariate polynomials with complex double coefficients.
//!
//! Coefficients are stored in ascending order: `c[k]` multiplies `x^k`.
//! Roots come from the eigenvalues of the companion matrix (complex Schur
//! form) followed by a few Newton polishing steps on the original
//! polynomial.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub fn eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(C64::zero(), |acc, &c| acc * x + c)
}

pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default())
        .collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|&c| c * s).collect()
}

/// Largest coefficient modulus.
pub fn norm_inf(coeffs: &[C64]) -> f64 {
    coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Drops trailing coefficients below `rel_tol` times the largest one.
pub fn trim(coeffs: &[C64], rel_tol: f64) -> Vec<C64> {
    let scale = norm_inf(coeffs);
    let mut out = coeffs.to_vec();
    while let Some(last) = out.last() {
        if last.norm() <= rel_tol * scale {
            out.pop();
        } else {
            break;
        }
    }
    out
}

/// All complex roots with multiplicity, as eigenvalues of the companion matrix.
///
/// The leading coefficient must be nonzero.
pub fn roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    if lead.norm() == 0.0 {
        return Err(Error::invalid("polynomial has zero leading coefficient"));
    }
    if n == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }
    let mut companion = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        companion[(i, n - 1)] = -coeffs[i] / lead;
    }
    let schur = Schur::try_new(companion, 1e-15, 10_000)
        .ok_or_else(|| Error::precision("companion eigenvalue iteration did not converge"))?;
    let (_, tri) = schur.unpack();
    let mut out: Vec<C64> = (0..n).map(|i| tri[(i, i)]).collect();
    for r in out.iter_mut() {
        *r = polish(coeffs, *r, 4);
    }
    Ok(out)
}

/// Newton polishing; keeps the original root whenever a step would increase the residual.
pub fn polish(coeffs: &[C64], root: C64, steps: usize) -> C64 {
    let deriv = derivative(coeffs);
    let mut x = root;
    let mut res = eval(coeffs, x).norm();
    for _ in 0..steps {
        let d = eval(&deriv, x);
        if d.norm() == 0.0 || !res.is_finite() {
            break;
        }
        let candidate = x - eval(coeffs, x) / d;
        let cres = eval(coeffs, candidate).norm();
        if cres.is_finite() && cres < res {
            x = candidate;
            res = cres;
        } else {
            break;
        }
    }
    x
}

/// A group of numerically coincident roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub center: C64,
    pub multiplicity: usize,
}

/// Single-linkage clustering: roots closer than `radius * max(1, |x|)` merge.
pub fn cluster(roots: &[C64], radius: f64) -> Vec<Cluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= radius * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(id, _)| *id == r) {
            Some((_, g)) => g.push(roots[i]),
            None => groups.push((r, vec![roots[i]])),
        }
    }
    groups
        .into_iter()
        .map(|(_, g)| {
            let m = g.len();
            let center = g.iter().fold(C64::zero(), |a, &b| a + b) / m as f64;
            Cluster { center, multiplicity: m }
        })
        .collect()
}

/// Refines the center of an `m`-fold cluster as a simple root of the
/// `(m-1)`-th derivative.
pub fn refine_multiple(coeffs: &[C64], center: C64, multiplicity: usize) -> C64 {
    let mut p = coeffs.to_vec();
    for _ in 1..multiplicity {
        p = derivative(&p);
    }
    polish(&p, center, 8)
}

/// Roots grouped into clusters, each cluster center refined for its multiplicity.
pub fn clustered_roots(coeffs: &[C64], radius: f64) -> Result<Vec<Cluster>> {
    let rs = roots(coeffs)?;
    let mut clusters = cluster(&rs, radius);
    for c in clusters.iter_mut() {
        if c.multiplicity > 1 {
            c.center = refine_multiple(coeffs, c.center, c.multiplicity);
        }
    }
    Ok(clusters)
}
