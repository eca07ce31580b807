//! Sup-norm polynomial approximation of grid functions by least squares
//! with degree escalation.
//!
//! The fit is computed in normalized coordinates. Exact backends solve the
//! normal equations exactly; the float backend uses Householder QR on the
//! design matrix. The returned polynomial is re-checked against the target
//! at every active grid point before it is accepted.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::ring::domain::Domain;
use crate::ring::{PolyFn, PositiveFunction, RingElement};
use crate::scalar::Coeff;

#[derive(Debug, Clone)]
pub struct ApproxOptions {
    /// Cap on the total degree of the fitted polynomial.
    pub max_degree: u32,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            max_degree: crate::DEFAULT_MAX_DEGREE,
        }
    }
}

/// All exponent vectors of total degree <= `degree` in `dim` variables,
/// in lexicographic order.
fn basis_exponents(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if dim == 0 {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=degree {
            prefix.push(e);
            rec(dim - 1, degree - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, degree, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Least squares via exact Gaussian elimination on the normal equations.
fn solve_normal_equations<K: Coeff>(design: &[Vec<K>], ys: &[K]) -> Option<Vec<K>> {
    let m = design.first().map(|r| r.len()).unwrap_or(0);
    // gram = D^T D, rhs = D^T y
    let mut gram = vec![vec![K::zero(); m]; m];
    let mut rhs = vec![K::zero(); m];
    for (row, y) in design.iter().zip(ys) {
        for i in 0..m {
            for j in i..m {
                gram[i][j] = gram[i][j].add(&row[i].mul(&row[j]));
            }
            rhs[i] = rhs[i].add(&row[i].mul(y));
        }
    }
    for i in 0..m {
        for j in 0..i {
            gram[i][j] = gram[j][i].clone();
        }
    }
    // partial-pivoted elimination
    for col in 0..m {
        let pivot_row =
            (col..m).max_by(|&a, &b| gram[a][col].abs().cmp_total(&gram[b][col].abs()))?;
        if gram[pivot_row][col].is_zero() {
            return None;
        }
        gram.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let inv = gram[col][col].inv()?;
        for r in 0..m {
            if r == col {
                continue;
            }
            let factor = gram[r][col].mul(&inv);
            if factor.is_zero() {
                continue;
            }
            for c in col..m {
                let delta = factor.mul(&gram[col][c]);
                gram[r][c] = gram[r][c].sub(&delta);
            }
            rhs[r] = rhs[r].sub(&factor.mul(&rhs[col]));
        }
    }
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        out.push(rhs[i].mul(&gram[i][i].inv()?));
    }
    Some(out)
}

/// Least squares by Householder QR, in f64.
fn solve_qr_f64(design: &[Vec<f64>], ys: &[f64]) -> Option<Vec<f64>> {
    let n = design.len();
    let m = design.first().map(|r| r.len()).unwrap_or(0);
    if n < m {
        return None;
    }
    let mut a: Vec<f64> = design.iter().flatten().copied().collect();
    let mut y = ys.to_vec();
    for col in 0..m {
        let mut norm = 0.0;
        for r in col..n {
            norm += a[r * m + col] * a[r * m + col];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return None;
        }
        let alpha = if a[col * m + col] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        v[col] = a[col * m + col] - alpha;
        for r in col + 1..n {
            v[r] = a[r * m + col];
        }
        let vtv: f64 = v[col..].iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            return None;
        }
        for c in col..m {
            let dot: f64 = (col..n).map(|r| v[r] * a[r * m + c]).sum();
            let scale = 2.0 * dot / vtv;
            for r in col..n {
                a[r * m + c] -= scale * v[r];
            }
        }
        let dot: f64 = (col..n).map(|r| v[r] * y[r]).sum();
        let scale = 2.0 * dot / vtv;
        for r in col..n {
            y[r] -= scale * v[r];
        }
    }
    // back substitution on the upper-triangular block
    let mut out = vec![0.0; m];
    for i in (0..m).rev() {
        let mut acc = y[i];
        for j in i + 1..m {
            acc -= a[i * m + j] * out[j];
        }
        let d = a[i * m + i];
        if d == 0.0 {
            return None;
        }
        out[i] = acc / d;
    }
    Some(out)
}

fn fit_at_degree<K: Coeff>(
    dom: &Arc<Domain<K>>,
    ys_active: &[K],
    degree: u32,
) -> Option<MultiPoly<K>> {
    let exps = basis_exponents(dom.dim(), degree);
    if exps.len() > ys_active.len() {
        return None;
    }
    let design: Vec<Vec<K>> = dom
        .active_iter()
        .map(|p| {
            let units = dom.point_units(p);
            exps.iter()
                .map(|exp| {
                    let mut v = K::one();
                    for (axis, &e) in exp.iter().enumerate() {
                        if e > 0 {
                            v = v.mul(&units[axis].pow_u(e));
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    let coefs = if K::EXACT {
        solve_normal_equations(&design, ys_active)?
    } else {
        let design_f: Vec<Vec<f64>> = design
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64()).collect())
            .collect();
        let ys_f: Vec<f64> = ys_active.iter().map(|v| v.to_f64()).collect();
        solve_qr_f64(&design_f, &ys_f)?
            .into_iter()
            .map(K::from_f64)
            .collect()
    };
    let mut poly = MultiPoly::zero(dom.dim());
    for (exp, c) in exps.into_iter().zip(coefs) {
        if !c.is_zero() {
            poly = poly.add(&MultiPoly::monomial(dom.dim(), exp, c));
        }
    }
    Some(poly)
}

/// Approximates a grid function by a polynomial with |g - f| < eps at every
/// active grid point, escalating the degree (2, 4, 8, ... up to the cap)
/// until the bound holds.
pub fn approximate_smooth<K: Coeff>(
    f: &RingElement<K>,
    eps: &PositiveFunction<K>,
    opts: &ApproxOptions,
) -> Result<RingElement<K>> {
    let grid = match f {
        RingElement::Grid(g) => g,
        other => {
            return Err(Error::KindMismatch(format!(
                "approximate_smooth expects a grid function, got {}",
                other.kind_name()
            )))
        }
    };
    let dom = grid.domain().clone();
    if let Some(ed) = eps.inner().domain() {
        if !super::domain::same_domain(ed, &dom) {
            return Err(Error::DomainMismatch);
        }
    }
    let eps_values = eps.inner().values_on(&dom)?;
    let ys_active: Vec<K> = dom.active_iter().map(|p| grid.value(p).clone()).collect();

    let mut degrees: Vec<u32> = Vec::new();
    let mut d = 2u32;
    while d < opts.max_degree {
        degrees.push(d);
        d = d.saturating_mul(2);
    }
    degrees.push(opts.max_degree);

    let mut worst: Option<(usize, K, K)> = None; // point, achieved, required
    let mut any_solved = false;
    for &degree in &degrees {
        let Some(poly) = fit_at_degree(&dom, &ys_active, degree) else {
            continue;
        };
        any_solved = true;
        let cand = PolyFn::new(dom.clone(), poly)?;
        let values = cand.grid_values();
        let mut ok = true;
        let mut local_worst: Option<(usize, K, K)> = None;
        for p in dom.active_iter() {
            let gap = values[p].sub(grid.value(p)).abs();
            if gap.cmp_total(&eps_values[p]) != std::cmp::Ordering::Less {
                ok = false;
                let beat = match &local_worst {
                    Some((_, g, _)) => gap.cmp_total(g) == std::cmp::Ordering::Greater,
                    None => true,
                };
                if beat {
                    local_worst = Some((p, gap.clone(), eps_values[p].clone()));
                }
            }
        }
        if ok {
            return Ok(RingElement::Poly(cand));
        }
        worst = local_worst.or(worst);
    }
    if !any_solved {
        return Err(Error::ApproxSingular {
            degree: opts.max_degree,
        });
    }
    let (point, achieved, required) = worst.expect("failed fit records a worst point");
    Err(Error::DegreeCapReached {
        max_degree: opts.max_degree,
        worst_point: point,
        achieved: achieved.to_f64(),
        required: required.to_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::domain::Domain;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn exact_interpolant_of_polynomial_samples() {
        // samples of p(x) = x^2 - 1 recover a polynomial matching within any eps
        let dom = Arc::new(Domain::line(q(-1, 1), q(1, 1), 17).unwrap());
        let f = RingElement::grid_from_fn(&dom, |p| {
            let x = dom.point_coords(p)[0].clone();
            x.mul(&x).sub(&q(1, 1))
        });
        let eps = PositiveFunction::new(RingElement::scalar(q(1, 1_000_000_000))).unwrap();
        let g = approximate_smooth(&f, &eps, &ApproxOptions::default()).unwrap();
        // exact rational fit: residual is exactly zero on the grid
        for p in dom.active_iter() {
            assert_eq!(g.eval_flat(p).unwrap(), f.eval_flat(p).unwrap());
        }
        assert!(g.is_smooth_class());
    }

    #[test]
    fn constant_is_fit_exactly() {
        let dom = Arc::new(Domain::line(0.0f64, 1.0, 9).unwrap());
        let f = RingElement::grid_from_fn(&dom, |_| 7.0);
        let eps = PositiveFunction::new(RingElement::scalar(1e-9)).unwrap();
        let g = approximate_smooth(&f, &eps, &ApproxOptions::default()).unwrap();
        for p in dom.active_iter() {
            assert!((g.eval_flat(p).unwrap() - 7.0).abs() < 1e-9);
        }
    }

    #[test]
    fn abs_x_within_five_percent() {
        let dom = Arc::new(Domain::line(-1.0f64, 1.0, 33).unwrap());
        let f = RingElement::grid_from_fn(&dom, |p| dom.point_coords(p)[0].abs());
        let eps = PositiveFunction::new(RingElement::scalar(0.05)).unwrap();
        let g = approximate_smooth(&f, &eps, &ApproxOptions::default()).unwrap();
        // verify the bound by direct grid scan
        for p in dom.active_iter() {
            let gap = (g.eval_flat(p).unwrap() - f.eval_flat(p).unwrap()).abs();
            assert!(gap < 0.05, "gap {gap} at point {p}");
        }
    }

    #[test]
    fn two_dimensional_fit_is_exact_for_polynomial_samples() {
        use crate::ring::domain::Axis;
        let dom = Arc::new(
            Domain::new(vec![
                Axis::new(q(0, 1), q(1, 1), 7),
                Axis::new(q(-1, 1), q(1, 1), 7),
            ])
            .unwrap(),
        );
        // samples of x*y + x^2 - 1/3
        let f = RingElement::grid_from_fn(&dom, |p| {
            let c = dom.point_coords(p);
            c[0].mul(&c[1]).add(&c[0].mul(&c[0])).sub(&q(1, 3))
        });
        let eps = PositiveFunction::new(RingElement::scalar(q(1, 1_000_000_000))).unwrap();
        let g = approximate_smooth(&f, &eps, &ApproxOptions::default()).unwrap();
        for p in dom.active_iter() {
            assert_eq!(g.eval_flat(p).unwrap(), f.eval_flat(p).unwrap());
        }
    }

    #[test]
    fn masked_grid_fit_uses_active_points_only() {
        let dom = Arc::new(
            Domain::line(q(-1, 1), q(1, 1), 11)
                .unwrap()
                .with_mask((2..=8).collect())
                .unwrap(),
        );
        let f = RingElement::grid_from_fn(&dom, |p| {
            let x = dom.point_coords(p)[0].clone();
            x.mul(&x)
        });
        let eps = PositiveFunction::new(RingElement::scalar(q(1, 1_000_000))).unwrap();
        let g = approximate_smooth(&f, &eps, &ApproxOptions::default()).unwrap();
        for p in dom.active_iter() {
            assert_eq!(g.eval_flat(p).unwrap(), f.eval_flat(p).unwrap());
        }
    }

    #[test]
    fn degree_cap_reports_diagnostics() {
        let dom = Arc::new(Domain::line(-1.0f64, 1.0, 33).unwrap());
        let f = RingElement::grid_from_fn(&dom, |p| dom.point_coords(p)[0].abs());
        let eps = PositiveFunction::new(RingElement::scalar(1e-3)).unwrap();
        let err = approximate_smooth(&f, &eps, &ApproxOptions { max_degree: 4 }).unwrap_err();
        match err {
            Error::DegreeCapReached {
                max_degree: 4,
                achieved,
                required,
                ..
            } => {
                assert!(achieved >= required);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
