//! Elementary factors e(i,j;r), factor-list algebra, and the signed-swap /
//! diagonal-unit-pair identities that generate the commutator subgroup.
//!
//! Factor lists multiply left to right: `[f1, f2, f3]` denotes the matrix
//! product F1·F2·F3. Indices are one-based, matching the usual e(i,j;r)
//! notation; matrix entry accessors are zero-based.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::domain::same_domain;
use crate::ring::{Domain, RingElement};
use crate::scalar::Coeff;

/// The transvection datum (i, j, r) for e(i,j;r), with one-based i != j.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryFactor<K: Coeff> {
    i: usize,
    j: usize,
    coeff: RingElement<K>,
}

impl<K: Coeff> ElementaryFactor<K> {
    pub fn new(i: usize, j: usize, coeff: RingElement<K>) -> Result<Self> {
        if i == 0 || j == 0 || i == j {
            return Err(Error::BadFactorIndices { i, j });
        }
        Ok(ElementaryFactor { i, j, coeff })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn coeff(&self) -> &RingElement<K> {
        &self.coeff
    }

    /// e(i,j;r)^{-1} = e(i,j;-r).
    pub fn inverse(&self) -> Self {
        ElementaryFactor {
            i: self.i,
            j: self.j,
            coeff: self.coeff.neg(),
        }
    }
}

/// An ordered product of elementary factors inside an ambient SL(n).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorList<K: Coeff> {
    n: usize,
    domain: Option<Arc<Domain<K>>>,
    factors: Vec<ElementaryFactor<K>>,
}

impl<K: Coeff> FactorList<K> {
    pub fn empty(n: usize) -> Self {
        FactorList {
            n,
            domain: None,
            factors: Vec::new(),
        }
    }

    pub fn from_factors(n: usize, factors: Vec<ElementaryFactor<K>>) -> Result<Self> {
        let mut fl = Self::empty(n);
        for f in factors {
            fl.push(f)?;
        }
        Ok(fl)
    }

    pub fn push(&mut self, f: ElementaryFactor<K>) -> Result<()> {
        if f.i > self.n || f.j > self.n {
            return Err(Error::IndexOutOfRange {
                index: f.i.max(f.j),
                bound: self.n,
            });
        }
        if let Some(d) = f.coeff.domain() {
            match &self.domain {
                None => self.domain = Some(d.clone()),
                Some(existing) => {
                    if !same_domain(existing, d) {
                        return Err(Error::DomainMismatch);
                    }
                }
            }
        }
        self.factors.push(f);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Common domain of the function coefficients, if any.
    pub fn domain(&self) -> Option<&Arc<Domain<K>>> {
        self.domain.as_ref()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[ElementaryFactor<K>] {
        &self.factors
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ElementaryFactor<K>> {
        self.factors.iter()
    }

    /// Appends another list, padding the ambient size to the larger n.
    pub fn concat(&self, other: &FactorList<K>) -> Result<FactorList<K>> {
        let mut out = FactorList::empty(self.n.max(other.n));
        for f in self.factors.iter().chain(&other.factors) {
            out.push(f.clone())?;
        }
        Ok(out)
    }

    /// Reversed list with negated coefficients; the product of
    /// `inverted() ++ self` is the identity.
    pub fn inverted(&self) -> FactorList<K> {
        FactorList {
            n: self.n,
            domain: self.domain.clone(),
            factors: self.factors.iter().rev().map(|f| f.inverse()).collect(),
        }
    }

    /// Left-to-right matrix product; the empty list gives the identity.
    pub fn product(&self) -> Result<SLMatrix<K>> {
        let mut acc = SLMatrix::identity(self.n);
        for f in &self.factors {
            acc.mul_factor_right(f)?;
        }
        Ok(acc)
    }

    /// Max pointwise deviation between the product of this list and a
    /// target matrix, scanned over the active grid (or the single scalar
    /// evaluation when neither side carries a domain).
    pub fn reconstruction_dev(&self, target: &SLMatrix<K>) -> Result<(f64, Option<usize>)> {
        let dom = match (self.domain(), target.domain()?) {
            (Some(a), Some(b)) => {
                if !same_domain(a, &b) {
                    return Err(Error::DomainMismatch);
                }
                Some(a.clone())
            }
            (Some(a), None) => Some(a.clone()),
            (None, b) => b,
        };
        let mut worst = 0.0f64;
        let mut at = None;
        let points: Vec<usize> = match &dom {
            Some(d) => d.active_iter().collect(),
            None => vec![0],
        };
        for p in points {
            let got = self.eval_product_at(p)?;
            let want = target.eval_at(p)?;
            for (g, w) in got.iter().zip(&want) {
                let dev = g.sub(w).abs().to_f64();
                if dev > worst {
                    worst = dev;
                    at = dom.as_ref().map(|_| p);
                }
            }
        }
        Ok((worst, at))
    }

    /// Scalar n x n product of the list evaluated at one grid point.
    pub fn eval_product_at(&self, flat: usize) -> Result<Vec<K>> {
        let n = self.n;
        let mut acc = vec![K::zero(); n * n];
        for d in 0..n {
            acc[d * n + d] = K::one();
        }
        for f in &self.factors {
            let r = f.coeff.eval_flat(flat)?;
            if r.is_zero() {
                continue;
            }
            // right-multiplication by e(i,j;r): col_j += col_i * r
            let (ci, cj) = (f.i - 1, f.j - 1);
            for row in 0..n {
                let add = acc[row * n + ci].mul(&r);
                acc[row * n + cj] = acc[row * n + cj].add(&add);
            }
        }
        Ok(acc)
    }
}

/// An n x n matrix of ring elements carrying a determinant-one contract.
#[derive(Debug, Clone, PartialEq)]
pub struct SLMatrix<K: Coeff> {
    n: usize,
    entries: Vec<RingElement<K>>,
}

impl<K: Coeff> SLMatrix<K> {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![RingElement::zero(); n * n];
        for d in 0..n {
            entries[d * n + d] = RingElement::one();
        }
        SLMatrix { n, entries }
    }

    pub fn from_entries(n: usize, entries: Vec<RingElement<K>>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::IndexOutOfRange {
                index: entries.len(),
                bound: n * n,
            });
        }
        let m = SLMatrix { n, entries };
        m.domain()?;
        Ok(m)
    }

    pub fn from_scalars(n: usize, values: Vec<K>) -> Result<Self> {
        Self::from_entries(n, values.into_iter().map(RingElement::Scalar).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, row: usize, col: usize) -> &RingElement<K> {
        &self.entries[row * self.n + col]
    }

    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut RingElement<K> {
        &mut self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[RingElement<K>] {
        &self.entries
    }

    /// Common domain over all entries, if consistent.
    pub fn domain(&self) -> Result<Option<Arc<Domain<K>>>> {
        let mut dom: Option<Arc<Domain<K>>> = None;
        for e in &self.entries {
            if let Some(d) = e.domain() {
                match &dom {
                    None => dom = Some(d.clone()),
                    Some(existing) => {
                        if !same_domain(existing, d) {
                            return Err(Error::DomainMismatch);
                        }
                    }
                }
            }
        }
        Ok(dom)
    }

    pub fn all_scalar(&self) -> bool {
        self.entries
            .iter()
            .all(|e| matches!(e, RingElement::Scalar(_)))
    }

    pub fn all_smooth_class(&self) -> bool {
        self.entries.iter().all(|e| e.is_smooth_class())
    }

    pub fn mul(&self, other: &SLMatrix<K>) -> Result<SLMatrix<K>> {
        if self.n != other.n {
            return Err(Error::IndexOutOfRange {
                index: other.n,
                bound: self.n,
            });
        }
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = RingElement::zero();
                for k in 0..n {
                    acc = acc.add(&self.at(r, k).mul(other.at(k, c))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(SLMatrix { n, entries })
    }

    pub fn sub(&self, other: &SLMatrix<K>) -> Result<SLMatrix<K>> {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for (a, b) in self.entries.iter().zip(&other.entries) {
            entries.push(a.sub(b)?);
        }
        Ok(SLMatrix { n, entries })
    }

    /// In-place right-multiplication by e(i,j;r): col_j += col_i * r.
    pub fn mul_factor_right(&mut self, f: &ElementaryFactor<K>) -> Result<()> {
        if f.i > self.n || f.j > self.n {
            return Err(Error::IndexOutOfRange {
                index: f.i.max(f.j),
                bound: self.n,
            });
        }
        let (ci, cj) = (f.i - 1, f.j - 1);
        for row in 0..self.n {
            let add = self.at(row, ci).mul(&f.coeff)?;
            let cur = self.at(row, cj).add(&add)?;
            *self.at_mut(row, cj) = cur;
        }
        Ok(())
    }

    /// In-place left-multiplication by e(i,j;r): row_i += r * row_j.
    pub fn mul_factor_left(&mut self, f: &ElementaryFactor<K>) -> Result<()> {
        if f.i > self.n || f.j > self.n {
            return Err(Error::IndexOutOfRange {
                index: f.i.max(f.j),
                bound: self.n,
            });
        }
        let (ri, rj) = (f.i - 1, f.j - 1);
        for col in 0..self.n {
            let add = f.coeff.mul(self.at(rj, col))?;
            let cur = self.at(ri, col).add(&add)?;
            *self.at_mut(ri, col) = cur;
        }
        Ok(())
    }

    /// Determinant as a ring element, by cofactor expansion.
    pub fn det_element(&self) -> Result<RingElement<K>> {
        fn det_rec<K: Coeff>(
            m: &SLMatrix<K>,
            rows: &[usize],
            cols: &[usize],
        ) -> Result<RingElement<K>> {
            if rows.len() == 1 {
                return Ok(m.at(rows[0], cols[0]).clone());
            }
            let mut acc = RingElement::zero();
            let sub_rows = &rows[1..];
            for (k, &c) in cols.iter().enumerate() {
                let e = m.at(rows[0], c);
                let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let minor = det_rec(m, sub_rows, &sub_cols)?;
                let term = e.mul(&minor)?;
                acc = if k % 2 == 0 {
                    acc.add(&term)?
                } else {
                    acc.sub(&term)?
                };
            }
            Ok(acc)
        }
        let idx: Vec<usize> = (0..self.n).collect();
        det_rec(self, &idx, &idx)
    }

    /// Scalar n x n value of the matrix at one grid point.
    pub fn eval_at(&self, flat: usize) -> Result<Vec<K>> {
        self.entries.iter().map(|e| e.eval_flat(flat)).collect()
    }

    /// Max over active grid points of |det - 1|, with the worst point.
    /// Scalar-only matrices report their single deviation with no point.
    pub fn det_deviation(&self) -> Result<(f64, Option<usize>)> {
        let det = self.det_element()?;
        match self.domain()? {
            None => {
                let d = det.eval_flat(0)?;
                Ok((d.sub(&K::one()).abs().to_f64(), None))
            }
            Some(dom) => {
                let values = det.values_on(&dom)?;
                let mut worst = 0.0f64;
                let mut at = None;
                for p in dom.active_iter() {
                    let dev = values[p].sub(&K::one()).abs().to_f64();
                    if dev > worst {
                        worst = dev;
                        at = Some(p);
                    }
                }
                Ok((worst, at))
            }
        }
    }

    /// Errors unless |det - 1| <= tol everywhere (exact kinds still go
    /// through the same pointwise scan; exactness is asserted in tests).
    pub fn check_det(&self, tol: f64) -> Result<()> {
        let (dev, point) = self.det_deviation()?;
        if dev > tol {
            return Err(Error::DetNotOne {
                deviation: dev,
                point,
            });
        }
        Ok(())
    }

    /// For determinant-one matrices the adjugate is the inverse, and it stays
    /// inside the polynomial class.
    pub fn adjugate(&self) -> Result<SLMatrix<K>> {
        let n = self.n;
        if n == 1 {
            return Ok(SLMatrix::identity(1));
        }
        let mut entries = vec![RingElement::zero(); n * n];
        let all: Vec<usize> = (0..n).collect();
        for r in 0..n {
            for c in 0..n {
                let rows: Vec<usize> = all.iter().copied().filter(|&x| x != c).collect();
                let cols: Vec<usize> = all.iter().copied().filter(|&x| x != r).collect();
                let minor = SLMatrix {
                    n: n - 1,
                    entries: rows
                        .iter()
                        .flat_map(|&rr| cols.iter().map(move |&cc| (rr, cc)))
                        .map(|(rr, cc)| self.at(rr, cc).clone())
                        .collect(),
                };
                let det = minor.det_element()?;
                entries[r * n + c] = if (r + c) % 2 == 0 { det } else { det.neg() };
            }
        }
        Ok(SLMatrix { n, entries })
    }

    /// Max over entries (and grid points) of absolute value.
    pub fn max_norm(&self) -> Result<K> {
        let dom = self.domain()?;
        let mut best = K::zero();
        for e in &self.entries {
            let s = match (&dom, e) {
                (_, RingElement::Scalar(v)) => v.abs(),
                (Some(d), other) => other.sup_norm_on(d)?,
                (None, _) => unreachable!("function entry implies a domain"),
            };
            best = K::max_val(best, s);
        }
        Ok(best)
    }

    /// Max over entries and grid points of |self - I|, with the worst point.
    pub fn deviation_from_identity(&self) -> Result<(f64, Option<usize>)> {
        let id = SLMatrix::identity(self.n);
        let diff = self.sub(&id)?;
        match diff.domain()? {
            None => Ok((diff.max_norm()?.to_f64(), None)),
            Some(dom) => {
                let mut worst = 0.0f64;
                let mut at = None;
                for e in &diff.entries {
                    let values = e.values_on(&dom)?;
                    for p in dom.active_iter() {
                        let v = values[p].abs().to_f64();
                        if v > worst {
                            worst = v;
                            at = Some(p);
                        }
                    }
                }
                Ok((worst, at))
            }
        }
    }
}

/// The elementary matrix e(i,j;r) in SL(n): ones on the diagonal, r in the
/// (i,j) spot, zero elsewhere.
pub fn elem_matrix<K: Coeff>(f: &ElementaryFactor<K>, n: usize) -> Result<SLMatrix<K>> {
    if f.i > n || f.j > n {
        return Err(Error::IndexOutOfRange {
            index: f.i.max(f.j),
            bound: n,
        });
    }
    let mut m = SLMatrix::identity(n);
    *m.at_mut(f.i - 1, f.j - 1) = f.coeff.clone();
    Ok(m)
}

/// The signed swap c(i,j) — +1 at (i,j), -1 at (j,i), identity elsewhere —
/// as the three-factor product e(i,j;1)·e(j,i;-1)·e(i,j;1).
pub fn factor_c<K: Coeff>(i: usize, j: usize, n: usize) -> Result<FactorList<K>> {
    if i == 0 || j == 0 || i == j {
        return Err(Error::BadFactorIndices { i, j });
    }
    if i > n || j > n {
        return Err(Error::IndexOutOfRange {
            index: i.max(j),
            bound: n,
        });
    }
    FactorList::from_factors(
        n,
        vec![
            ElementaryFactor::new(i, j, RingElement::one())?,
            ElementaryFactor::new(j, i, RingElement::Scalar(K::from_int(-1)))?,
            ElementaryFactor::new(i, j, RingElement::one())?,
        ],
    )
}

/// The diagonal unit pair m(i,j;r) = diag(..., r, ..., r^{-1}, ...) as a
/// six-factor product: e(i,j;r)·e(j,i;-r^{-1})·e(i,j;r) followed by c(j,i).
pub fn factor_m<K: Coeff>(
    i: usize,
    j: usize,
    r: &RingElement<K>,
    n: usize,
) -> Result<FactorList<K>> {
    if i == 0 || j == 0 || i == j {
        return Err(Error::BadFactorIndices { i, j });
    }
    if i > n || j > n {
        return Err(Error::IndexOutOfRange {
            index: i.max(j),
            bound: n,
        });
    }
    let r_inv = r.invert_unit()?;
    let head = FactorList::from_factors(
        n,
        vec![
            ElementaryFactor::new(i, j, r.clone())?,
            ElementaryFactor::new(j, i, r_inv.neg())?,
            ElementaryFactor::new(i, j, r.clone())?,
        ],
    )?;
    head.concat(&factor_c(j, i, n)?)
}

/// The signed-swap matrix c(i,j) itself (test target for `factor_c`).
pub fn signed_swap_matrix<K: Coeff>(i: usize, j: usize, n: usize) -> SLMatrix<K> {
    let mut m = SLMatrix::identity(n);
    *m.at_mut(i - 1, i - 1) = RingElement::zero();
    *m.at_mut(j - 1, j - 1) = RingElement::zero();
    *m.at_mut(i - 1, j - 1) = RingElement::one();
    *m.at_mut(j - 1, i - 1) = RingElement::Scalar(K::from_int(-1));
    m
}

/// The diagonal matrix m(i,j;r) itself (test target for `factor_m`).
pub fn unit_pair_matrix<K: Coeff>(
    i: usize,
    j: usize,
    r: &RingElement<K>,
    n: usize,
) -> Result<SLMatrix<K>> {
    let mut m = SLMatrix::identity(n);
    *m.at_mut(i - 1, i - 1) = r.clone();
    *m.at_mut(j - 1, j - 1) = r.invert_unit()?;
    Ok(m)
}

/// Max-norm of a matrix (free-function form of `SLMatrix::max_norm`).
pub fn max_norm<K: Coeff>(m: &SLMatrix<K>) -> Result<K> {
    m.max_norm()
}

/// Determinant of a flat scalar n x n matrix by cofactor expansion.
pub(crate) fn scalar_det<K: Coeff>(n: usize, m: &[K]) -> K {
    fn rec<K: Coeff>(n: usize, m: &[K], rows: &[usize], cols: &[usize]) -> K {
        if rows.len() == 1 {
            return m[rows[0] * n + cols[0]].clone();
        }
        let mut acc = K::zero();
        for (k, &c) in cols.iter().enumerate() {
            let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let minor = rec(n, m, &rows[1..], &sub_cols);
            let term = m[rows[0] * n + c].mul(&minor);
            acc = if k % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        acc
    }
    let idx: Vec<usize> = (0..n).collect();
    rec(n, m, &idx, &idx)
}

/// Inverse of a flat scalar matrix via adjugate over determinant.
pub(crate) fn scalar_inverse<K: Coeff>(n: usize, m: &[K]) -> Option<Vec<K>> {
    let det = scalar_det(n, m);
    let det_inv = det.inv()?;
    if n == 1 {
        return Some(vec![det_inv]);
    }
    let all: Vec<usize> = (0..n).collect();
    let mut out = vec![K::zero(); n * n];
    for r in 0..n {
        for c in 0..n {
            let rows: Vec<usize> = all.iter().copied().filter(|&x| x != c).collect();
            let cols: Vec<usize> = all.iter().copied().filter(|&x| x != r).collect();
            let sub: Vec<K> = rows
                .iter()
                .flat_map(|&rr| cols.iter().map(move |&cc| (rr, cc)))
                .map(|(rr, cc)| m[rr * n + cc].clone())
                .collect();
            let minor = scalar_det(n - 1, &sub);
            let cof = if (r + c) % 2 == 0 { minor } else { minor.neg() };
            out[r * n + c] = cof.mul(&det_inv);
        }
    }
    Some(out)
}

/// Flat scalar matrix product.
pub(crate) fn scalar_mul<K: Coeff>(n: usize, a: &[K], b: &[K]) -> Vec<K> {
    let mut out = vec![K::zero(); n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = K::zero();
            for k in 0..n {
                acc = acc.add(&a[r * n + k].mul(&b[k * n + c]));
            }
            out[r * n + c] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn qs(n: i64, d: i64) -> RingElement<Q> {
        RingElement::scalar(q(n, d))
    }

    // independent oracle: plain row-by-column multiply over rationals
    fn naive_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
        let n = a.len();
        let mut out = vec![vec![q(0, 1); n]; n];
        for r in 0..n {
            for c in 0..n {
                for k in 0..n {
                    out[r][c] = out[r][c].add(&a[r][k].mul(&b[k][c]));
                }
            }
        }
        out
    }

    fn naive_factor_product(fl: &FactorList<Q>) -> Vec<Vec<Q>> {
        let n = fl.n();
        let mut acc = vec![vec![q(0, 1); n]; n];
        for d in 0..n {
            acc[d][d] = q(1, 1);
        }
        for f in fl.iter() {
            let mut e = vec![vec![q(0, 1); n]; n];
            for d in 0..n {
                e[d][d] = q(1, 1);
            }
            if let RingElement::Scalar(v) = f.coeff() {
                e[f.i() - 1][f.j() - 1] = v.clone();
            } else {
                panic!("oracle only handles scalar coefficients");
            }
            acc = naive_mul(&acc, &e);
        }
        acc
    }

    fn as_rows(m: &SLMatrix<Q>) -> Vec<Vec<Q>> {
        (0..m.n())
            .map(|r| {
                (0..m.n())
                    .map(|c| match m.at(r, c) {
                        RingElement::Scalar(v) => v.clone(),
                        _ => panic!("scalar matrix expected"),
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn elem_matrix_shapes() {
        let f = ElementaryFactor::new(1, 2, qs(1, 1)).unwrap();
        let m = elem_matrix(&f, 2).unwrap();
        assert_eq!(
            as_rows(&m),
            vec![vec![q(1, 1), q(1, 1)], vec![q(0, 1), q(1, 1)]]
        );
        let f0 = ElementaryFactor::new(2, 1, qs(0, 1)).unwrap();
        assert_eq!(elem_matrix(&f0, 2).unwrap(), SLMatrix::identity(2));
        let f3 = ElementaryFactor::new(1, 3, qs(-5, 1)).unwrap();
        let m3 = elem_matrix(&f3, 3).unwrap();
        assert_eq!(as_rows(&m3)[0][2], q(-5, 1));
        assert!(elem_matrix(&f3, 2).is_err());
        assert!(ElementaryFactor::new(2, 2, qs(1, 1)).is_err());
    }

    #[test]
    fn factor_c_matches_signed_swap_exactly() {
        // (1,2): the three-factor identity lands on [[0,1],[-1,0]]
        let fl = factor_c::<Q>(1, 2, 2).unwrap();
        assert_eq!(fl.len(), 3);
        assert_eq!(
            as_rows(&fl.product().unwrap()),
            vec![vec![q(0, 1), q(1, 1)], vec![q(-1, 1), q(0, 1)],]
        );
        // (2,1): exact multiplication oracle
        let fl = factor_c::<Q>(2, 1, 2).unwrap();
        assert_eq!(
            naive_factor_product(&fl),
            vec![vec![q(0, 1), q(-1, 1)], vec![q(1, 1), q(0, 1)],]
        );
        // (1,3) in SL(3)
        let fl = factor_c::<Q>(1, 3, 3).unwrap();
        let p = naive_factor_product(&fl);
        assert_eq!(p[0][2], q(1, 1));
        assert_eq!(p[2][0], q(-1, 1));
        assert_eq!(p[1][1], q(1, 1));
        assert_eq!(as_rows(&signed_swap_matrix::<Q>(1, 3, 3)), p);
        assert!(factor_c::<Q>(1, 1, 2).is_err());
    }

    #[test]
    fn factor_m_matches_unit_pair_exactly() {
        let fl = factor_m(1, 2, &qs(2, 1), 2).unwrap();
        assert_eq!(fl.len(), 6);
        assert_eq!(
            naive_factor_product(&fl),
            vec![vec![q(2, 1), q(0, 1)], vec![q(0, 1), q(1, 2)],]
        );
        // r = 1 gives the identity
        let fl = factor_m(1, 2, &qs(1, 1), 2).unwrap();
        assert_eq!(fl.product().unwrap(), SLMatrix::identity(2));
        // non-unit rejected
        assert!(factor_m(1, 2, &qs(0, 1), 2).is_err());
    }

    #[test]
    fn product_of_empty_list_is_identity() {
        let fl = FactorList::<Q>::empty(3);
        assert_eq!(fl.product().unwrap(), SLMatrix::identity(3));
    }

    #[test]
    fn random_list_has_determinant_one() {
        // fixed 5-factor list; determinant by cofactor expansion must be 1
        let fl = FactorList::from_factors(
            3,
            vec![
                ElementaryFactor::new(1, 2, qs(3, 7)).unwrap(),
                ElementaryFactor::new(2, 3, qs(-5, 2)).unwrap(),
                ElementaryFactor::new(3, 1, qs(1, 4)).unwrap(),
                ElementaryFactor::new(1, 3, qs(2, 1)).unwrap(),
                ElementaryFactor::new(2, 1, qs(-1, 3)).unwrap(),
            ],
        )
        .unwrap();
        let p = fl.product().unwrap();
        assert!(p.det_element().unwrap().is_const(&q(1, 1)));
        // product agrees with the naive oracle
        assert_eq!(as_rows(&p), naive_factor_product(&fl));
    }

    #[test]
    fn invert_concat_gives_identity() {
        let fl = FactorList::from_factors(
            2,
            vec![
                ElementaryFactor::new(1, 2, qs(5, 3)).unwrap(),
                ElementaryFactor::new(2, 1, qs(-7, 2)).unwrap(),
            ],
        )
        .unwrap();
        let both = fl.inverted().concat(&fl).unwrap();
        assert_eq!(both.product().unwrap(), SLMatrix::identity(2));
        assert!(FactorList::<Q>::empty(2).inverted().is_empty());
        let single =
            FactorList::from_factors(2, vec![ElementaryFactor::new(1, 2, qs(4, 9)).unwrap()])
                .unwrap();
        let inv = single.inverted();
        assert_eq!(inv.factors()[0].coeff(), &qs(-4, 9));
    }

    #[test]
    fn concat_pads_to_the_larger_ambient_size() {
        let small = FactorList::from_factors(
            2,
            vec![ElementaryFactor::new(1, 2, qs(1, 2)).unwrap()],
        )
        .unwrap();
        let large = FactorList::from_factors(
            4,
            vec![ElementaryFactor::new(3, 4, qs(2, 1)).unwrap()],
        )
        .unwrap();
        let both = small.concat(&large).unwrap();
        assert_eq!(both.n(), 4);
        assert!(both.product().unwrap().det_element().unwrap().is_const(&q(1, 1)));
    }

    #[test]
    fn max_norm_scans_entries() {
        assert_eq!(SLMatrix::<Q>::identity(4).max_norm().unwrap(), q(1, 1));
        let m = SLMatrix::from_scalars(2, vec![q(0, 1), q(2, 1), q(-1, 2), q(0, 1)]).unwrap();
        assert_eq!(m.max_norm().unwrap(), q(2, 1));
    }

    #[test]
    fn eval_product_matches_symbolic_product() {
        let dom = std::sync::Arc::new(Domain::line(q(0, 1), q(1, 1), 5).unwrap());
        let x = RingElement::coordinate(&dom, 0).unwrap();
        let fl = FactorList::from_factors(
            2,
            vec![
                ElementaryFactor::new(1, 2, x.clone()).unwrap(),
                ElementaryFactor::new(2, 1, x.neg()).unwrap(),
            ],
        )
        .unwrap();
        let sym = fl.product().unwrap();
        for p in dom.active_iter() {
            assert_eq!(fl.eval_product_at(p).unwrap(), sym.eval_at(p).unwrap());
        }
    }
}
