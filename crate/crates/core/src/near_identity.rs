//! Factorization of matrices close to the identity: when every entry of
//! M - I is strictly below 1/(n-1) on the grid, M factors into elementary
//! matrices by a pivot-free cascade, and the entry bounds tighten stage by
//! stage (below 1/(n-2) after the first stage, and so on).

use crate::elementary::{factor_m, ElementaryFactor, FactorList, SLMatrix};
use crate::error::{Error, Result};
use crate::ring::RingElement;
use crate::scalar::Coeff;

#[derive(Debug, Clone)]
pub struct NearIdentityOptions {
    pub tol_det: f64,
}

impl Default for NearIdentityOptions {
    fn default() -> Self {
        NearIdentityOptions {
            tol_det: crate::DEFAULT_TOL_DET,
        }
    }
}

/// Input wrapper recording whether the entry bound has been verified.
#[derive(Debug, Clone)]
pub struct NearIdentityInput<K: Coeff> {
    matrix: SLMatrix<K>,
    bound_checked: bool,
}

impl<K: Coeff> NearIdentityInput<K> {
    pub fn new(matrix: SLMatrix<K>) -> Self {
        NearIdentityInput {
            matrix,
            bound_checked: false,
        }
    }

    /// Validates the determinant and the strict entry bound up front.
    pub fn validated(matrix: SLMatrix<K>, opts: &NearIdentityOptions) -> Result<Self> {
        check_preconditions(&matrix, opts)?;
        Ok(NearIdentityInput {
            matrix,
            bound_checked: true,
        })
    }

    pub fn matrix(&self) -> &SLMatrix<K> {
        &self.matrix
    }

    pub fn bound_checked(&self) -> bool {
        self.bound_checked
    }
}

/// One stage of the cascade: the pivot, its grid minimum, and the max
/// trailing deviation from the identity after the stage.
#[derive(Debug, Clone)]
pub struct StageRecord<K: Coeff> {
    /// One-based stage index.
    pub stage: usize,
    pub pivot: RingElement<K>,
    /// Min over grid points of the pivot value (positive for valid inputs).
    pub pivot_min: K,
    /// Max over trailing entries and grid points of |M - I| after the stage.
    pub residual: K,
    /// 1/(n-1-stage) when the stage has a meaningful trailing bound.
    pub residual_bound: Option<K>,
}

#[derive(Debug, Clone)]
pub struct EliminationTrace<K: Coeff> {
    pub stages: Vec<StageRecord<K>>,
}

impl<K: Coeff> Default for EliminationTrace<K> {
    fn default() -> Self {
        EliminationTrace { stages: Vec::new() }
    }
}

/// Upper bound on the number of emitted factors: n(n-1)/2 row-clearing plus
/// n(n-1)/2 column-clearing plus 6(n-1) diagonal-fix factors.
pub fn factor_count_bound(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    (n - 1) * (n + 6)
}

fn check_preconditions<K: Coeff>(m: &SLMatrix<K>, opts: &NearIdentityOptions) -> Result<()> {
    let n = m.n();
    if n > 1 {
        let limit = K::from_ratio(1, (n - 1) as i64);
        let dom = m.domain()?;
        for row in 0..n {
            for col in 0..n {
                let entry = m.at(row, col);
                let base = if row == col {
                    entry.sub(&RingElement::one())?
                } else {
                    entry.clone()
                };
                match (&dom, &base) {
                    (_, RingElement::Scalar(v)) => {
                        let a = v.abs();
                        if a.cmp_total(&limit) != std::cmp::Ordering::Less {
                            return Err(Error::BoundViolated {
                                row: row + 1,
                                col: col + 1,
                                point: None,
                                value: a.to_f64(),
                                limit: limit.to_f64(),
                            });
                        }
                    }
                    (Some(d), other) => {
                        let values = other.values_on(d)?;
                        for p in d.active_iter() {
                            let a = values[p].abs();
                            if a.cmp_total(&limit) != std::cmp::Ordering::Less {
                                return Err(Error::BoundViolated {
                                    row: row + 1,
                                    col: col + 1,
                                    point: Some(p),
                                    value: a.to_f64(),
                                    limit: limit.to_f64(),
                                });
                            }
                        }
                    }
                    (None, _) => unreachable!("function entry implies a domain"),
                }
            }
        }
    }
    m.check_det(opts.tol_det)
}

fn min_over_grid<K: Coeff>(m: &SLMatrix<K>, e: &RingElement<K>) -> Result<(K, Option<usize>)> {
    match (m.domain()?, e) {
        (_, RingElement::Scalar(v)) => Ok((v.clone(), None)),
        (Some(d), other) => {
            let values = other.values_on(&d)?;
            let mut best: Option<(K, usize)> = None;
            for p in d.active_iter() {
                let beat = match &best {
                    Some((b, _)) => values[p].cmp_total(b) == std::cmp::Ordering::Less,
                    None => true,
                };
                if beat {
                    best = Some((values[p].clone(), p));
                }
            }
            let (v, p) = best.expect("nonempty active grid");
            Ok((v, Some(p)))
        }
        (None, _) => unreachable!("function entry implies a domain"),
    }
}

fn trailing_residual<K: Coeff>(m: &SLMatrix<K>, from: usize) -> Result<K> {
    let n = m.n();
    let dom = m.domain()?;
    let mut worst = K::zero();
    for row in from..n {
        for col in from..n {
            let base = if row == col {
                m.at(row, col).sub(&RingElement::one())?
            } else {
                m.at(row, col).clone()
            };
            let s = match (&dom, &base) {
                (_, RingElement::Scalar(v)) => v.abs(),
                (Some(d), other) => other.sup_norm_on(d)?,
                (None, _) => unreachable!(),
            };
            worst = K::max_val(worst, s);
        }
    }
    Ok(worst)
}

/// Factors a near-identity matrix into elementary factors.
///
/// Stage k reads the (k,k) pivot u, clears row k rightward with column
/// operations e(k,j; -u^{-1} a_kj), clears column k downward with row
/// operations e(i,k; -u^{-1} a_ik), and recurses on the trailing block.
/// The remaining diagonal diag(u_1..u_n) is converted to the identity with
/// diagonal unit pairs m(k,k+1; (u_1...u_k)^{-1}). For polynomial entries
/// the pivot inverses are emitted as flagged fraction-field coefficients.
pub fn factor_near_identity<K: Coeff>(
    input: &NearIdentityInput<K>,
    opts: &NearIdentityOptions,
) -> Result<(FactorList<K>, EliminationTrace<K>)> {
    if !input.bound_checked {
        check_preconditions(&input.matrix, opts)?;
    }
    let n = input.matrix.n();
    let mut trace = EliminationTrace::default();
    if n <= 1 {
        return Ok((FactorList::empty(n.max(1)), trace));
    }

    let mut m = input.matrix.clone();
    let mut left_ops: Vec<ElementaryFactor<K>> = Vec::new();
    let mut right_ops: Vec<ElementaryFactor<K>> = Vec::new();
    let zero = K::zero();

    for stage in 1..=n - 1 {
        let kk = stage - 1;
        let pivot = m.at(kk, kk).clone();
        let (pivot_min, pivot_point) = min_over_grid(&m, &pivot)?;
        if pivot_min.cmp_total(&zero) != std::cmp::Ordering::Greater {
            return Err(Error::VerificationFailed {
                what: "pivot positivity",
                point: pivot_point,
                deviation: pivot_min.to_f64(),
                tol: 0.0,
            });
        }
        let v = pivot.invert_unit()?;
        // clear row `stage` to the right (column operations)
        for col in kk + 1..n {
            let coeff = v.mul(m.at(kk, col))?.neg();
            if coeff.is_const(&zero) {
                continue;
            }
            let f = ElementaryFactor::new(stage, col + 1, coeff)?;
            m.mul_factor_right(&f)?;
            right_ops.push(f);
        }
        // clear column `stage` downward (row operations); row `stage` is now
        // (u, 0, ..., 0), so these touch only column `stage`
        for row in kk + 1..n {
            let coeff = v.mul(m.at(row, kk))?.neg();
            if coeff.is_const(&zero) {
                continue;
            }
            let f = ElementaryFactor::new(row + 1, stage, coeff)?;
            m.mul_factor_left(&f)?;
            left_ops.push(f);
        }
        let residual = trailing_residual(&m, kk + 1)?;
        let residual_bound = if stage <= n - 2 {
            Some(K::from_ratio(1, (n - 1 - stage) as i64))
        } else {
            None
        };
        trace.stages.push(StageRecord {
            stage,
            pivot,
            pivot_min,
            residual,
            residual_bound,
        });
    }

    // diagonal fix: left-multiplications by m(k, k+1; (u_1...u_k)^{-1});
    // the last diagonal entry is forced to one by the determinant
    let mut chains: Vec<FactorList<K>> = Vec::with_capacity(n - 1);
    let mut running = RingElement::one();
    for k in 1..=n - 1 {
        running = running.mul(m.at(k - 1, k - 1))?;
        let r = running.invert_unit()?;
        chains.push(factor_m(k, k + 1, &r, n)?);
    }

    let mut out = FactorList::empty(n);
    for f in &left_ops {
        out.push(f.inverse())?;
    }
    for chain in &chains {
        out = out.concat(&chain.inverted())?;
    }
    for f in right_ops.iter().rev() {
        out.push(f.inverse())?;
    }
    debug_assert!(out.len() <= factor_count_bound(n));
    Ok((out, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn sl_q(n: usize, vals: &[(i64, i64)]) -> SLMatrix<Q> {
        SLMatrix::from_scalars(n, vals.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    #[test]
    fn count_bound_examples() {
        assert_eq!(factor_count_bound(1), 0);
        assert_eq!(factor_count_bound(2), 8);
        assert_eq!(factor_count_bound(4), 30);
    }

    #[test]
    fn identity_input_yields_collapsing_diagonal_fix() {
        let input = NearIdentityInput::new(SLMatrix::<Q>::identity(3));
        let (fl, trace) = factor_near_identity(&input, &Default::default()).unwrap();
        // no elimination factors, only diagonal-fix chains with r = 1
        assert_eq!(fl.len(), 12);
        assert_eq!(fl.product().unwrap(), SLMatrix::identity(3));
        assert_eq!(trace.stages.len(), 2);
        for s in &trace.stages {
            assert_eq!(s.pivot_min, q(1, 1));
            assert_eq!(s.residual, q(0, 1));
        }
    }

    #[test]
    fn rational_two_by_two_reconstructs_exactly() {
        // det = 11/10 * 1 - 1/5 * 1/2 = 1 exactly, all |entries of M - I| < 1
        let m = sl_q(2, &[(11, 10), (1, 5), (1, 2), (1, 1)]);
        let input = NearIdentityInput::validated(m.clone(), &Default::default()).unwrap();
        let (fl, _) = factor_near_identity(&input, &Default::default()).unwrap();
        assert!(fl.len() <= 8);
        assert_eq!(fl.product().unwrap(), m);
    }

    #[test]
    fn rejects_bound_violation_with_coordinates() {
        // n = 3 limit is 1/2; entry (1,3) breaks it
        let m = sl_q(
            3,
            &[
                (1, 1),
                (0, 1),
                (3, 5),
                (0, 1),
                (1, 1),
                (0, 1),
                (0, 1),
                (0, 1),
                (1, 1),
            ],
        );
        let err =
            factor_near_identity(&NearIdentityInput::new(m), &Default::default()).unwrap_err();
        match err {
            Error::BoundViolated {
                row: 1,
                col: 3,
                point: None,
                value,
                limit,
            } => {
                assert!(value >= limit);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_equality_at_the_bound() {
        // |a_12| = 1 = 1/(n-1) exactly: strict bound rejects
        let m = sl_q(2, &[(1, 1), (1, 1), (0, 1), (1, 1)]);
        assert!(matches!(
            factor_near_identity(&NearIdentityInput::new(m), &Default::default()),
            Err(Error::BoundViolated { row: 1, col: 2, .. })
        ));
    }

    #[test]
    fn rejects_wrong_determinant() {
        let m = sl_q(2, &[(11, 10), (1, 5), (1, 2), (10, 11)]); // det = 9/10
        assert!(matches!(
            factor_near_identity(&NearIdentityInput::new(m), &Default::default()),
            Err(Error::DetNotOne { .. })
        ));
    }

    #[test]
    fn stage_bounds_hold_on_a_three_by_three() {
        // entries of A bounded by 0.4 < 1/2, det repaired to 1 exactly
        let a = [
            [q(1, 5), q(-3, 10), q(1, 4)],
            [q(-1, 10), q(2, 5), q(1, 5)],
            [q(3, 10), q(-1, 5), q(0, 1)],
        ];
        let mut vals = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                let mut v = a[r][c].clone();
                if r == c {
                    v = v.add(&q(1, 1));
                }
                vals.push(v);
            }
        }
        let mut m = SLMatrix::from_scalars(3, vals).unwrap();
        // repair det by scaling the last column
        let det = match m.det_element().unwrap() {
            RingElement::Scalar(v) => v,
            _ => unreachable!(),
        };
        let fix = RingElement::scalar(det.inv().unwrap());
        for r in 0..3 {
            *m.at_mut(r, 2) = m.at(r, 2).mul(&fix).unwrap();
        }
        assert!(m.det_element().unwrap().is_const(&q(1, 1)));

        let input = NearIdentityInput::validated(m.clone(), &Default::default()).unwrap();
        let (fl, trace) = factor_near_identity(&input, &Default::default()).unwrap();
        assert_eq!(fl.product().unwrap(), m);
        assert!(fl.len() <= factor_count_bound(3));
        // stage-1 trailing residual < 1/(n-2) = 1
        let s1 = &trace.stages[0];
        assert!(s1.residual < q(1, 1));
        assert_eq!(s1.residual_bound, Some(q(1, 1)));
        assert!(s1.pivot_min > q(0, 1));
    }
}
