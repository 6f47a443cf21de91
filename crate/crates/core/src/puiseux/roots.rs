//! Newton–Puiseux root solving for polynomials with series coefficients.
//!
//! Each node of the recursion holds a polynomial `R(z)` whose roots of
//! interest all have order below a bound `g`. The upper convex hull of the
//! points `(k, ord r_k)` yields candidate leading exponents; each segment's
//! characteristic polynomial yields leading coefficients `c`; the child node
//! is `R(c t^gamma + z)`, whose relevant roots are governed by its first
//! `m + 1` coefficients, `m` being the multiplicity of `c`.
//!
//! Coefficients that carry no known terms but a finite precision are
//! "virtual" points: their true order is anywhere at or below the precision.
//! A segment is trusted only if no virtual point could reach the hull at its
//! slope; otherwise the affected roots are returned with a precision tail
//! (or, at the top level, the call fails).

use num_rational::Ratio;
use num_traits::Zero;

use super::{PuiseuxScalar, RationalExp, C64};
use crate::cpoly;
use crate::error::{Error, Result};

/// Relative radius for grouping roots of characteristic polynomials.
const PHI_CLUSTER_RADIUS: f64 = 1e-5;
/// Cap on the number of terms kept per shifted coefficient.
const MAX_COEFF_TERMS: usize = 200;
/// A cluster whose centre leaves a residual above this many rounding bounds
/// is treated as distinct nearby roots.
const NOISE_ROOT: f64 = 64.0;

#[derive(Clone, Copy, Debug)]
struct Segment {
    left: usize,
    right: usize,
    gamma: RationalExp,
    /// Value of `ord r_k + k * gamma` along the segment.
    level: RationalExp,
}

/// Closed interval of slopes `[lo, hi]`; `lo = None` means unbounded below.
#[derive(Clone, Copy, Debug)]
struct Interval {
    lo: Option<RationalExp>,
    hi: RationalExp,
}

impl Interval {
    fn contains(&self, g: RationalExp) -> bool {
        self.lo.is_none_or(|lo| lo <= g) && g <= self.hi
    }
}

fn upper_hull(points: &[(usize, RationalExp)]) -> Vec<Segment> {
    let mut hull: Vec<(usize, RationalExp)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let (k1, o1) = hull[hull.len() - 2];
            let (k2, o2) = hull[hull.len() - 1];
            // Drop the middle point unless it lies strictly above the chord.
            let lhs = (o2 - o1) * Ratio::from_integer((p.0 - k1) as i64);
            let rhs = (p.1 - o1) * Ratio::from_integer((k2 - k1) as i64);
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.windows(2)
        .map(|w| {
            let ((kl, ol), (kr, or)) = (w[0], w[1]);
            let gamma = (ol - or) / Ratio::from_integer((kr - kl) as i64);
            Segment { left: kl, right: kr, gamma, level: ol + gamma * Ratio::from_integer(kl as i64) }
        })
        .collect()
}

/// Slopes at which the virtual point `(v, prec)` may reach or exceed the
/// known hull, or `None` if it never does.
fn uncertain_interval(v: usize, prec: RationalExp, known: &[(usize, RationalExp)]) -> Option<Interval> {
    let mut lo: Option<RationalExp> = None;
    let mut hi: Option<RationalExp> = None;
    for &(k, ord) in known {
        let diff = Ratio::from_integer(k as i64 - v as i64);
        let g = (prec - ord) / diff;
        if k > v {
            hi = Some(hi.map_or(g, |h: RationalExp| h.min(g)));
        } else {
            lo = Some(lo.map_or(g, |l: RationalExp| l.max(g)));
        }
    }
    // The top coefficient is always known, so `hi` is set.
    let hi = hi?;
    match lo {
        Some(l) if l > hi => None,
        _ => Some(Interval { lo, hi }),
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Error bound for a root `c` of multiplicity `m` of `phi`, whose
/// coefficients are known up to `dphi`. The centre is a simple root of the
/// `(m-1)`-th derivative, so the rounding part is first order; roots that
/// merely cluster add their spread.
fn root_error(phi: &[C64], dphi: &[f64], c: C64, m: usize) -> f64 {
    let r = c.norm();
    // |Taylor coefficient of order k at c| and a bound on its perturbation.
    let taylor = |k: usize| -> (f64, f64) {
        let (v, d) = phi.iter().zip(dphi).enumerate().skip(k).fold((C64::zero(), 0.0), |(v, d), (j, (p, dp))| {
            let b = binomial(j, k);
            (v + p * b * c.powi((j - k) as i32), d + (dp + f64::EPSILON * p.norm()) * b * r.powi((j - k) as i32))
        });
        (v.norm(), d)
    };
    let (lead, _) = taylor(m);
    if lead == 0.0 {
        return r;
    }
    let (_, slack) = taylor(m - 1);
    let mut err = slack / (m as f64 * lead);
    let (value, noise) = taylor(0);
    if m > 1 && value > NOISE_ROOT * noise {
        err += (value / lead).powf(1.0 / m as f64);
    }
    err
}

/// Coefficients of `R(c t^gamma + z)`, with `c` known up to `dc`.
fn shift(poly: &[PuiseuxScalar], c: C64, dc: f64, gamma: RationalExp) -> Vec<PuiseuxScalar> {
    (0..poly.len())
        .map(|k| {
            let mut acc = PuiseuxScalar::zero();
            for (j, pj) in poly.iter().enumerate().skip(k) {
                let power = (j - k) as i64;
                let b = binomial(j, k);
                let factor = c.powi(power as i32) * b;
                let dfactor = if power == 0 { 0.0 } else { b * power as f64 * c.norm().powi(power as i32 - 1) * dc };
                acc = acc.add_ref(&pj.mul_monomial_err(factor, dfactor, gamma * Ratio::from_integer(power)));
            }
            acc.truncate_terms(MAX_COEFF_TERMS)
        })
        .collect()
}

fn min_opt(a: RationalExp, b: Option<RationalExp>) -> RationalExp {
    b.map_or(a, |b| a.min(b))
}

struct Solver {
    out: Vec<PuiseuxScalar>,
}

impl Solver {
    fn emit(&mut self, prefix: &PuiseuxScalar, tail: Option<RationalExp>, times: usize) {
        let root = match tail {
            Some(p) => prefix.add_ref(&PuiseuxScalar::big_o(p)),
            None => prefix.clone(),
        };
        self.out.extend(std::iter::repeat_n(root, times));
    }

    /// Finds the `m` roots of `poly` with order below `bound`; these are
    /// governed by the coefficients `0..=m`.
    fn solve(
        &mut self,
        poly: &[PuiseuxScalar],
        m: usize,
        bound: Option<RationalExp>,
        prefix: &PuiseuxScalar,
        depth_left: usize,
    ) -> Result<()> {
        let top = bound.is_none();
        if poly[m].is_zero() {
            return match bound {
                Some(b) => {
                    self.emit(prefix, Some(b), m);
                    Ok(())
                }
                None => Err(Error::precision("leading coefficient has no known terms")),
            };
        }
        let zeros = poly.iter().take_while(|p| p.is_exact_zero()).count();
        self.emit(prefix, None, zeros);
        let rest = &poly[zeros..];
        let n = m - zeros;
        if n == 0 {
            return Ok(());
        }

        let known: Vec<(usize, RationalExp)> =
            rest[..=n].iter().enumerate().filter_map(|(k, p)| p.ord().map(|o| (k, o))).collect();
        let unc: Vec<Interval> = rest[..=n]
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_zero())
            .filter_map(|(k, p)| p.precision().and_then(|pr| uncertain_interval(k, pr, &known)))
            .collect();
        let unc_sup = unc.iter().map(|i| i.hi).max();
        let segments = upper_hull(&known);
        if let (Some(b), Some(s)) = (bound, segments.last()) {
            if s.gamma >= b {
                return Err(Error::precision("root cluster did not separate from its neighbours"));
            }
        }

        if depth_left == 0 {
            let next = match (segments.last().map(|s| s.gamma), unc_sup) {
                (Some(a), Some(b)) => a.max(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => bound.expect("known points exist below the bound"),
            };
            self.emit(prefix, Some(min_opt(next, bound)), n);
            return Ok(());
        }

        let certain: Vec<&Segment> =
            segments.iter().filter(|s| !unc.iter().any(|i| i.contains(s.gamma))).collect();
        let resolved: usize = certain.iter().map(|s| s.right - s.left).sum();
        if resolved < n {
            if top {
                return Err(Error::precision(
                    "coefficient tails hide part of the Newton polygon",
                ));
            }
            let sup = unc_sup.expect("unresolved roots imply uncertain slopes");
            self.emit(prefix, Some(min_opt(sup, bound)), n - resolved);
        }

        for seg in certain {
            let (phi, dphi): (Vec<C64>, Vec<f64>) = (seg.left..=seg.right)
                .map(|j| match rest[j].leading() {
                    Ok((o, c)) if o + seg.gamma * Ratio::from_integer(j as i64) == seg.level => {
                        (c, rest[j].leading_err())
                    }
                    _ => (C64::zero(), 0.0),
                })
                .unzip();
            for cl in cpoly::clustered_roots(&phi, PHI_CLUSTER_RADIUS)? {
                let dc = root_error(&phi, &dphi, cl.center, cl.multiplicity);
                let mut child = shift(rest, cl.center, dc, seg.gamma);
                // The shifted coefficients below the multiplicity vanish at
                // the segment level by construction; remove rounding residue.
                for (k, coeff) in child.iter_mut().enumerate().take(cl.multiplicity) {
                    let e = seg.level - seg.gamma * Ratio::from_integer(k as i64);
                    let kept = coeff.raw().filter(|(x, _, _)| *x != e).collect();
                    *coeff = PuiseuxScalar::from_raw(kept, coeff.precision());
                }
                let lead = PuiseuxScalar::monomial_err(cl.center, dc, seg.gamma);
                let next_prefix = prefix.add_ref(&lead);
                self.solve(&child, cl.multiplicity, Some(seg.gamma), &next_prefix, depth_left - 1)?;
            }
        }
        Ok(())
    }
}

/// Roots of `sum_k p[k] z^k` with multiplicity, each with up to `depth` terms.
///
/// Roots whose expansion stops early carry a precision tail `O(t^g)` bounding
/// the order of the remaining error. Trailing exact-zero coefficients are
/// ignored; the degree is that of the last nonzero coefficient.
pub fn univariate_roots(p: &[PuiseuxScalar], depth: usize) -> Result<Vec<PuiseuxScalar>> {
    let degree = match p.iter().rposition(|c| !c.is_exact_zero()) {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::invalid("polynomial of degree 0 has no roots")),
    };
    let mut solver = Solver { out: Vec::with_capacity(degree) };
    solver.solve(&p[..=degree], degree, None, &PuiseuxScalar::zero(), depth.max(1))?;
    debug_assert_eq!(solver.out.len(), degree);
    Ok(solver.out)
}

/// `sum_k p[k] z^k` evaluated by Horner's rule in series arithmetic.
pub fn eval_poly(p: &[PuiseuxScalar], z: &PuiseuxScalar) -> PuiseuxScalar {
    p.iter().rev().fold(PuiseuxScalar::zero(), |acc, c| acc.mul_ref(z).add_ref(c))
}
