//! Lifting continuous factorizations into the smooth class.
//!
//! `smooth_lift` replaces the grid-function coefficients of a factorization
//! of a polynomial matrix A by polynomial approximations tight enough that
//! the correction E = A^{-1}·Π e'_l lands inside the near-identity regime,
//! then factors E and appends the inverted correction. `smooth_representative`
//! goes the other way: it approximates a grid matrix entrywise, repairs the
//! determinant to exactly one, and factors A^{-1}B.
//!
//! Both directions run on an explicit budget: a pointwise bound δ on the
//! data and a tolerance ε with 2^{K-1} n^K K δ^K ε < 1/(n-1), halved for
//! slack against the grid-only checking.

use std::sync::Arc;

use crate::elementary::{scalar_inverse, scalar_mul, FactorList, SLMatrix};
use crate::error::{Error, Result};
use crate::near_identity::{
    factor_near_identity, EliminationTrace, NearIdentityInput, NearIdentityOptions,
};
use crate::ring::{approximate_smooth, ApproxOptions, Domain, PositiveFunction, RingElement};
use crate::scalar::Coeff;

#[derive(Debug, Clone)]
pub struct LiftOptions {
    pub tol_recon: f64,
    pub tol_det: f64,
    pub max_degree: u32,
    /// Relative margin (num, den) applied on top of the pointwise max when
    /// building δ.
    pub margin: (i64, i64),
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            tol_recon: crate::DEFAULT_TOL_RECON,
            tol_det: crate::DEFAULT_TOL_DET,
            max_degree: crate::DEFAULT_MAX_DEGREE,
            margin: crate::DEFAULT_BUDGET_MARGIN,
        }
    }
}

/// The approximation budget: with K coefficients in ambient size n, the
/// tolerance ε satisfies 2^{K-1}·n^K·K·δ^K·ε < 1/(n-1) pointwise, with a
/// factor-two safety margin.
#[derive(Debug, Clone)]
pub struct ApproxBudget<K: Coeff> {
    n: usize,
    factor_count: usize,
    delta: PositiveFunction<K>,
    epsilon: PositiveFunction<K>,
}

impl<K: Coeff> ApproxBudget<K> {
    /// Builds the budget from a given δ: ε is half the strict ceiling
    /// 1/((n-1)·2^{K-1}·n^K·K·δ^K).
    pub fn from_delta(n: usize, factor_count: usize, delta: PositiveFunction<K>) -> Result<Self> {
        if n < 2 {
            return Err(Error::IndexOutOfRange { index: n, bound: 2 });
        }
        if factor_count == 0 {
            return Err(Error::EmptyFactorList);
        }
        // 2 * (n-1) * 2^{K-1} * n^K * K  =  (n-1) * 2^K * n^K * K
        let mut c = K::from_int((n as i64 - 1) * factor_count as i64);
        c = c.mul(&K::from_int(2).pow_u(factor_count as u32));
        c = c.mul(&K::from_int(n as i64).pow_u(factor_count as u32));
        let delta_pow = pow_element(delta.inner(), factor_count as u32)?;
        let denom = delta_pow.mul(&RingElement::Scalar(c))?;
        let epsilon = PositiveFunction::new(denom.invert_unit()?)?;
        let budget = ApproxBudget {
            n,
            factor_count,
            delta,
            epsilon,
        };
        budget.verify()?;
        Ok(budget)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factor_count(&self) -> usize {
        self.factor_count
    }

    pub fn delta(&self) -> &PositiveFunction<K> {
        &self.delta
    }

    pub fn epsilon(&self) -> &PositiveFunction<K> {
        &self.epsilon
    }

    /// Scans the defining inequality (strictly) at every grid point, along
    /// with ε < δ.
    pub fn verify(&self) -> Result<()> {
        let n = self.n;
        let k = self.factor_count;
        let mut c = K::from_int(k as i64);
        c = c.mul(&K::from_int(2).pow_u(k as u32 - 1));
        c = c.mul(&K::from_int(n as i64).pow_u(k as u32));
        let bound = K::from_ratio(1, n as i64 - 1);
        let delta = self.delta.inner();
        let eps = self.epsilon.inner();
        let dom = delta.unified_domain(eps)?;
        let points: Vec<Option<usize>> = match &dom {
            Some(d) => d.active_iter().map(Some).collect(),
            None => vec![None],
        };
        for p in points {
            let flat = p.unwrap_or(0);
            let dv = delta.eval_flat(flat)?;
            let ev = eps.eval_flat(flat)?;
            let lhs = c.mul(&dv.pow_u(k as u32)).mul(&ev);
            if lhs.cmp_total(&bound) != std::cmp::Ordering::Less {
                return Err(Error::VerificationFailed {
                    what: "budget inequality",
                    point: p,
                    deviation: lhs.to_f64(),
                    tol: bound.to_f64(),
                });
            }
            if ev.cmp_total(&dv) != std::cmp::Ordering::Less {
                return Err(Error::VerificationFailed {
                    what: "epsilon below delta",
                    point: p,
                    deviation: ev.to_f64(),
                    tol: dv.to_f64(),
                });
            }
        }
        Ok(())
    }
}

fn pow_element<K: Coeff>(e: &RingElement<K>, exp: u32) -> Result<RingElement<K>> {
    let mut acc = RingElement::one();
    for _ in 0..exp {
        acc = acc.mul(e)?;
    }
    Ok(acc)
}

/// Builds δ and ε for a factorization F of A: δ exceeds the pointwise max
/// of 1, the entries of A^{-1} and the coefficients of F by a small margin.
pub fn make_budget<K: Coeff>(
    a: &SLMatrix<K>,
    f: &FactorList<K>,
    opts: &LiftOptions,
) -> Result<ApproxBudget<K>> {
    if f.is_empty() {
        return Err(Error::EmptyFactorList);
    }
    let (dev, point) = f.reconstruction_dev(a)?;
    if dev > opts.tol_recon {
        return Err(Error::VerificationFailed {
            what: "factor list does not reconstruct the matrix",
            point,
            deviation: dev,
            tol: opts.tol_recon,
        });
    }
    let n = a.n();
    let adj = a.adjugate()?;
    let dom = match (a.domain()?, f.domain()) {
        (Some(d), _) => Some(d),
        (None, Some(d)) => Some(d.clone()),
        (None, None) => None,
    };
    let margin = K::from_ratio(opts.margin.1 + opts.margin.0, opts.margin.1);
    let raw = match &dom {
        None => {
            let mut best = K::one();
            for e in adj.entries() {
                best = K::max_val(best, e.eval_flat(0)?.abs());
            }
            for fac in f.iter() {
                best = K::max_val(best, fac.coeff().eval_flat(0)?.abs());
            }
            RingElement::Scalar(best.mul(&margin))
        }
        Some(d) => {
            let mut dense = vec![K::zero(); d.total_points()];
            for p in d.active_iter() {
                dense[p] = K::one();
            }
            let absorb = |values: Vec<K>, d: &Arc<Domain<K>>, dense: &mut Vec<K>| {
                for p in d.active_iter() {
                    let v = values[p].abs();
                    if v.cmp_total(&dense[p]) == std::cmp::Ordering::Greater {
                        dense[p] = v;
                    }
                }
            };
            for e in adj.entries() {
                absorb(e.values_on(d)?, d, &mut dense);
            }
            for fac in f.iter() {
                absorb(fac.coeff().values_on(d)?, d, &mut dense);
            }
            for p in d.active_iter() {
                dense[p] = dense[p].mul(&margin);
            }
            RingElement::grid_from_values(d, dense)?
        }
    };
    let delta = PositiveFunction::new(raw)?;
    ApproxBudget::from_delta(n, f.len(), delta)
}

/// Result of `smooth_lift`.
#[derive(Debug, Clone)]
pub struct LiftOutcome<K: Coeff> {
    /// Factorization of A with smooth-class coefficients only.
    pub factors: FactorList<K>,
    pub budget: ApproxBudget<K>,
    /// Max pointwise deviation of the correction E = A^{-1}·Π e' from I.
    pub correction_dev: K,
    pub trace: EliminationTrace<K>,
    /// Final re-multiplication residual against A.
    pub residual: f64,
}

/// Lifts a grid-coefficient factorization of a smooth matrix into the
/// smooth class. Each grid coefficient is approximated within the budget's
/// ε; the correction E = A^{-1}·Π e'_l is checked to be near-identity and
/// factored, and the inverted correction factors are appended.
pub fn smooth_lift<K: Coeff>(
    a: &SLMatrix<K>,
    f: &FactorList<K>,
    opts: &LiftOptions,
) -> Result<LiftOutcome<K>> {
    if !a.all_smooth_class() {
        return Err(Error::KindMismatch(
            "smooth_lift expects a smooth-class matrix".into(),
        ));
    }
    a.check_det(opts.tol_det)?;
    let budget = make_budget(a, f, opts)?;
    let n = a.n();
    let approx_opts = ApproxOptions {
        max_degree: opts.max_degree,
    };
    let mut lifted = FactorList::empty(n);
    for fac in f.iter() {
        let coeff = match fac.coeff() {
            RingElement::Grid(_) => {
                approximate_smooth(fac.coeff(), budget.epsilon(), &approx_opts)?
            }
            other => other.clone(),
        };
        lifted.push(crate::elementary::ElementaryFactor::new(
            fac.i(),
            fac.j(),
            coeff,
        )?)?;
    }

    let correction = a.adjugate()?.mul(&lifted.product()?)?;
    let correction_dev = matrix_identity_dev(&correction)?;
    let bound = K::from_ratio(1, n as i64 - 1);
    if correction_dev.0.cmp_total(&bound) != std::cmp::Ordering::Less {
        return Err(Error::VerificationFailed {
            what: "near-identity bound on the lift correction",
            point: correction_dev.1,
            deviation: correction_dev.0.to_f64(),
            tol: bound.to_f64(),
        });
    }
    let ni_opts = NearIdentityOptions {
        tol_det: opts.tol_det,
    };
    let (corr_factors, trace) =
        factor_near_identity(&NearIdentityInput::new(correction), &ni_opts)?;
    let factors = lifted.concat(&corr_factors.inverted())?;
    debug_assert!(factors.iter().all(|f| f.coeff().is_smooth_class()));

    let (residual, point) = factors.reconstruction_dev(a)?;
    if residual > opts.tol_recon {
        return Err(Error::VerificationFailed {
            what: "lifted factorization reconstruction",
            point,
            deviation: residual,
            tol: opts.tol_recon,
        });
    }
    Ok(LiftOutcome {
        factors,
        budget,
        correction_dev: correction_dev.0,
        trace,
        residual,
    })
}

/// Max pointwise |M - I| in coefficient arithmetic, with the worst point.
fn matrix_identity_dev<K: Coeff>(m: &SLMatrix<K>) -> Result<(K, Option<usize>)> {
    let n = m.n();
    let dom = m.domain()?;
    let mut worst = K::zero();
    let mut at = None;
    let points: Vec<Option<usize>> = match &dom {
        Some(d) => d.active_iter().map(Some).collect(),
        None => vec![None],
    };
    for p in points {
        let flat = p.unwrap_or(0);
        let vals = m.eval_at(flat)?;
        for r in 0..n {
            for c in 0..n {
                let mut v = vals[r * n + c].clone();
                if r == c {
                    v = v.sub(&K::one());
                }
                let v = v.abs();
                if v.cmp_total(&worst) == std::cmp::Ordering::Greater {
                    worst = v;
                    at = p;
                }
            }
        }
    }
    Ok((worst, at))
}

/// Result of `smooth_representative`.
#[derive(Debug, Clone)]
pub struct RepresentativeOutcome<K: Coeff> {
    /// Smooth-class matrix with determinant exactly one.
    pub b: SLMatrix<K>,
    /// Near-identity factors E with B = A · product(E) on the grid.
    pub factors: FactorList<K>,
    /// Max pointwise |B - A|.
    pub fit_dev: K,
    /// Max pointwise |A^{-1}B - I|.
    pub correction_dev: K,
    pub trace: EliminationTrace<K>,
    pub residual: f64,
}

/// Produces a smooth-class determinant-one matrix B within ε of A, plus the
/// elementary factors E with B = A·product(E) pointwise on the grid.
///
/// Entries are fitted to ε/2 and the determinant is repaired exactly by
/// scaling the first column with det(B̃)^{-1}, a smooth (fraction-field)
/// coefficient bounded away from zero.
pub fn smooth_representative<K: Coeff>(
    a: &SLMatrix<K>,
    opts: &LiftOptions,
) -> Result<RepresentativeOutcome<K>> {
    a.check_det(opts.tol_det)?;
    let n = a.n();
    if a.all_smooth_class() {
        // already smooth: B = A, empty correction
        return Ok(RepresentativeOutcome {
            b: a.clone(),
            factors: FactorList::empty(n),
            fit_dev: K::zero(),
            correction_dev: K::zero(),
            trace: EliminationTrace::default(),
            residual: 0.0,
        });
    }
    let dom = a.domain()?.expect("grid entries carry a domain");
    // pointwise inverse of A
    let inverses: Vec<Option<Vec<K>>> = (0..dom.total_points())
        .map(|p| {
            if dom.is_active(p) {
                scalar_inverse(n, &a.eval_at(p).expect("evaluable entries"))
            } else {
                None
            }
        })
        .collect();
    let margin = K::from_ratio(opts.margin.1 + opts.margin.0, opts.margin.1);
    let mut dense = vec![K::zero(); dom.total_points()];
    for p in dom.active_iter() {
        let inv = inverses[p].as_ref().ok_or(Error::Singular {
            stage: 1,
            point: Some(p),
        })?;
        let mut best = K::one();
        for v in inv {
            best = K::max_val(best, v.abs());
        }
        dense[p] = best.mul(&margin);
    }
    let delta = PositiveFunction::new(RingElement::grid_from_values(&dom, dense)?)?;
    // with one "factor" the budget inequality reads n·δ·ε < 1/(n-1)
    let budget = ApproxBudget::from_delta(n, 1, delta)?;
    let eps_fit = budget.epsilon().scaled(1, 2)?;

    let approx_opts = ApproxOptions {
        max_degree: opts.max_degree,
    };
    let mut fitted = Vec::with_capacity(n * n);
    for e in a.entries() {
        let g = match e {
            RingElement::Grid(_) => approximate_smooth(e, &eps_fit, &approx_opts)?,
            other => other.clone(),
        };
        fitted.push(g);
    }
    let b_tilde = SLMatrix::from_entries(n, fitted)?;
    let det = b_tilde.det_element()?;
    let det_inv = det.invert_unit()?;
    let mut b = b_tilde;
    for r in 0..n {
        *b.at_mut(r, 0) = b.at(r, 0).mul(&det_inv)?;
    }
    // determinant is now exactly one as a rational function; float backends
    // verify pointwise instead
    if K::EXACT {
        if !b.det_element()?.is_const(&K::one()) {
            return Err(Error::VerificationFailed {
                what: "exact determinant repair",
                point: None,
                deviation: f64::NAN,
                tol: 0.0,
            });
        }
    } else {
        b.check_det(opts.tol_det)?;
    }

    // ||B - A|| < epsilon pointwise, strictly
    let eps_vals = budget.epsilon().inner().values_on(&dom)?;
    let mut fit_dev = K::zero();
    for p in dom.active_iter() {
        let av = a.eval_at(p)?;
        let bv = b.eval_at(p)?;
        for (x, y) in av.iter().zip(&bv) {
            let d = x.sub(y).abs();
            if d.cmp_total(&eps_vals[p]) != std::cmp::Ordering::Less {
                return Err(Error::VerificationFailed {
                    what: "representative distance below epsilon",
                    point: Some(p),
                    deviation: d.to_f64(),
                    tol: eps_vals[p].to_f64(),
                });
            }
            fit_dev = K::max_val(fit_dev, d);
        }
    }

    // E = A^{-1} B pointwise, then the near-identity factorization
    let mut e_entries = vec![vec![K::zero(); dom.total_points()]; n * n];
    for p in dom.active_iter() {
        let inv = inverses[p].as_ref().expect("checked above");
        let bv = b.eval_at(p)?;
        let e = scalar_mul(n, inv, &bv);
        for (slot, v) in e_entries.iter_mut().zip(e) {
            slot[p] = v;
        }
    }
    let e_mat = SLMatrix::from_entries(
        n,
        e_entries
            .into_iter()
            .map(|vals| RingElement::grid_from_values(&dom, vals))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let correction_dev = matrix_identity_dev(&e_mat)?;
    let bound = K::from_ratio(1, n as i64 - 1);
    if correction_dev.0.cmp_total(&bound) != std::cmp::Ordering::Less {
        return Err(Error::VerificationFailed {
            what: "near-identity bound on A^{-1}B",
            point: correction_dev.1,
            deviation: correction_dev.0.to_f64(),
            tol: bound.to_f64(),
        });
    }
    let ni_opts = NearIdentityOptions {
        tol_det: opts.tol_det,
    };
    let (factors, trace) = factor_near_identity(&NearIdentityInput::new(e_mat), &ni_opts)?;

    // B = A * product(E) on the grid
    let mut residual = 0.0f64;
    let mut at = None;
    for p in dom.active_iter() {
        let av = a.eval_at(p)?;
        let ev = factors.eval_product_at(p)?;
        let got = scalar_mul(n, &av, &ev);
        let bv = b.eval_at(p)?;
        for (g, w) in got.iter().zip(&bv) {
            let d = g.sub(w).abs().to_f64();
            if d > residual {
                residual = d;
                at = Some(p);
            }
        }
    }
    if residual > opts.tol_recon {
        return Err(Error::VerificationFailed {
            what: "representative reconstruction",
            point: at,
            deviation: residual,
            tol: opts.tol_recon,
        });
    }

    Ok(RepresentativeOutcome {
        b,
        factors,
        fit_dev,
        correction_dev: correction_dev.0,
        trace,
        residual,
    })
}
