//! Box domains sampled on finite grids, with optional masks.
//!
//! Grid points are addressed by flat row-major indices (last axis fastest).
//! A mask restricts a domain to a subset of its grid points; operations
//! quantify over active points only. Subset utilities (closure, erosion, coverage, nearest point) work on
//! sets of flat indices.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Coeff;

/// One axis of a box: `[lo, hi]` sampled at `res` equispaced points.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis<K: Coeff> {
    pub lo: K,
    pub hi: K,
    pub res: usize,
}

impl<K: Coeff> Axis<K> {
    pub fn new(lo: K, hi: K, res: usize) -> Self {
        Axis { lo, hi, res }
    }
}

/// A gridded box domain, optionally masked to a nonempty subset.
#[derive(Debug, Clone)]
pub struct Domain<K: Coeff> {
    axes: Vec<Axis<K>>,
    mask: Option<BTreeSet<usize>>,
    strides: Vec<usize>,
    total: usize,
}

/// A subset of grid points, as flat indices.
pub type GridSubset = BTreeSet<usize>;

impl<K: Coeff> PartialEq for Domain<K> {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes && self.mask == other.mask
    }
}

impl<K: Coeff> Domain<K> {
    pub fn new(axes: Vec<Axis<K>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidDomain("no axes".into()));
        }
        for a in &axes {
            if a.res < 2 {
                return Err(Error::InvalidDomain(format!(
                    "axis resolution {} < 2",
                    a.res
                )));
            }
            if a.lo.cmp_total(&a.hi) != std::cmp::Ordering::Less {
                return Err(Error::InvalidDomain("axis needs lo < hi".into()));
            }
        }
        let mut strides = vec![1usize; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].res;
        }
        let total = strides[0] * axes[0].res;
        Ok(Domain {
            axes,
            mask: None,
            strides,
            total,
        })
    }

    /// Convenience: a 1-D domain.
    pub fn line(lo: K, hi: K, res: usize) -> Result<Self> {
        Self::new(vec![Axis::new(lo, hi, res)])
    }

    pub fn with_mask(mut self, mask: GridSubset) -> Result<Self> {
        if mask.is_empty() {
            return Err(Error::InvalidDomain("mask must be nonempty".into()));
        }
        if let Some(&m) = mask.iter().next_back() {
            if m >= self.total {
                return Err(Error::IndexOutOfRange {
                    index: m,
                    bound: self.total,
                });
            }
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &Axis<K> {
        &self.axes[i]
    }

    pub fn axes(&self) -> &[Axis<K>] {
        &self.axes
    }

    pub fn total_points(&self) -> usize {
        self.total
    }

    pub fn mask(&self) -> Option<&GridSubset> {
        self.mask.as_ref()
    }

    pub fn is_masked(&self) -> bool {
        self.mask.is_some()
    }

    pub fn active_count(&self) -> usize {
        match &self.mask {
            Some(m) => m.len(),
            None => self.total,
        }
    }

    pub fn is_active(&self, flat: usize) -> bool {
        flat < self.total
            && match &self.mask {
                Some(m) => m.contains(&flat),
                None => true,
            }
    }

    pub fn active_iter(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.mask {
            Some(m) => Box::new(m.iter().copied()),
            None => Box::new(0..self.total),
        }
    }

    pub fn active_set(&self) -> GridSubset {
        self.active_iter().collect()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        debug_assert!(flat < self.total);
        let mut rem = flat;
        self.strides
            .iter()
            .map(|&s| {
                let q = rem / s;
                rem %= s;
                q
            })
            .collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.axes.len());
        multi.iter().zip(&self.strides).map(|(&g, &s)| g * s).sum()
    }

    /// Physical coordinate of grid index `g` along one axis.
    pub fn coord(&self, axis: usize, g: usize) -> K {
        let a = &self.axes[axis];
        let step = K::from_ratio(g as i64, (a.res - 1) as i64);
        a.lo.add(&a.hi.sub(&a.lo).mul(&step))
    }

    /// Normalized coordinate in [-1, 1] of grid index `g` along one axis.
    pub fn unit(&self, axis: usize, g: usize) -> K {
        let a = &self.axes[axis];
        K::from_int(-1).add(&K::from_ratio(2 * g as i64, (a.res - 1) as i64))
    }

    pub fn point_coords(&self, flat: usize) -> Vec<K> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(axis, &g)| self.coord(axis, g))
            .collect()
    }

    pub fn point_units(&self, flat: usize) -> Vec<K> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(axis, &g)| self.unit(axis, g))
            .collect()
    }

    /// Normalized coordinates of an arbitrary physical point in the box.
    pub fn units_of_coords(&self, coords: &[K]) -> Result<Vec<K>> {
        if coords.len() != self.dim() {
            return Err(Error::DomainMismatch);
        }
        let two = K::from_int(2);
        Ok(coords
            .iter()
            .zip(&self.axes)
            .map(|(x, a)| {
                let span = a.hi.sub(&a.lo);
                // span > 0 by construction
                two.mul(&x.sub(&a.lo))
                    .mul(&span.inv().expect("nonzero span"))
                    .sub(&K::one())
            })
            .collect())
    }

    /// Active Moore neighbors (all adjacent grid cells, diagonals included).
    pub fn neighbors(&self, flat: usize) -> Vec<usize> {
        let multi = self.multi_index(flat);
        let dim = self.dim();
        let mut out = Vec::new();
        let mut offs = vec![-1i64; dim];
        loop {
            if offs.iter().any(|&o| o != 0) {
                let mut ok = true;
                let mut m = Vec::with_capacity(dim);
                for (axis, (&g, &o)) in multi.iter().zip(&offs).enumerate() {
                    let v = g as i64 + o;
                    if v < 0 || v >= self.axes[axis].res as i64 {
                        ok = false;
                        break;
                    }
                    m.push(v as usize);
                }
                if ok {
                    let f = self.flat_index(&m);
                    if self.is_active(f) {
                        out.push(f);
                    }
                }
            }
            // advance the offset odometer
            let mut carry = true;
            for o in offs.iter_mut().rev() {
                if carry {
                    *o += 1;
                    if *o > 1 {
                        *o = -1;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
        }
        out
    }

    /// Squared Euclidean distance between two grid points in box coordinates.
    pub fn dist2(&self, a: usize, b: usize) -> K {
        let pa = self.point_coords(a);
        let pb = self.point_coords(b);
        let mut acc = K::zero();
        for (x, y) in pa.iter().zip(&pb) {
            let d = x.sub(y);
            acc = acc.add(&d.mul(&d));
        }
        acc
    }

    /// Extend this domain by a trailing time axis over [0, 1].
    pub fn product_with_time(&self, t_res: usize) -> Result<Domain<K>> {
        let mut axes = self.axes.clone();
        axes.push(Axis::new(K::zero(), K::one(), t_res));
        let prod = Domain::new(axes)?;
        match &self.mask {
            None => Ok(prod),
            Some(m) => {
                let mut mask = BTreeSet::new();
                for &x in m {
                    for t in 0..t_res {
                        mask.insert(x * t_res + t);
                    }
                }
                prod.with_mask(mask)
            }
        }
    }
}

/// Grid closure: the set together with its active neighbors.
pub fn closure<K: Coeff>(dom: &Domain<K>, s: &GridSubset) -> GridSubset {
    let mut out = s.clone();
    for &p in s {
        for n in dom.neighbors(p) {
            out.insert(n);
        }
    }
    out
}

/// One-step erosion: points of `s` all of whose active neighbors are in `s`.
pub fn erode<K: Coeff>(dom: &Domain<K>, s: &GridSubset) -> GridSubset {
    s.iter()
        .copied()
        .filter(|&p| dom.neighbors(p).iter().all(|n| s.contains(n)))
        .collect()
}

/// First active point not covered by the union of `sets`, if any.
pub fn uncovered_point<K: Coeff>(dom: &Domain<K>, sets: &[GridSubset]) -> Option<usize> {
    dom.active_iter()
        .find(|p| !sets.iter().any(|s| s.contains(p)))
}

/// Closest point of `s` to `p` (squared box distance, ties to lowest index).
pub fn nearest_in<K: Coeff>(dom: &Domain<K>, s: &GridSubset, p: usize) -> usize {
    debug_assert!(!s.is_empty());
    let mut best = *s.iter().next().expect("nonempty set");
    let mut best_d = dom.dist2(best, p);
    for &q in s.iter().skip(1) {
        let d = dom.dist2(q, p);
        if d.cmp_total(&best_d) == std::cmp::Ordering::Less {
            best = q;
            best_d = d;
        }
    }
    best
}

/// Checks that `s` only contains active points of `dom`.
pub fn check_subset<K: Coeff>(dom: &Domain<K>, s: &GridSubset) -> Result<()> {
    for &p in s {
        if !dom.is_active(p) {
            return Err(Error::IndexOutOfRange {
                index: p,
                bound: dom.total_points(),
            });
        }
    }
    Ok(())
}

pub(crate) fn same_domain<K: Coeff>(a: &Arc<Domain<K>>, b: &Arc<Domain<K>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn coords_and_indices_roundtrip() {
        let d: Domain<BigRational> = Domain::new(vec![
            Axis::new(q(0, 1), q(1, 1), 3),
            Axis::new(q(-1, 1), q(1, 1), 5),
        ])
        .unwrap();
        assert_eq!(d.total_points(), 15);
        for flat in 0..15 {
            assert_eq!(d.flat_index(&d.multi_index(flat)), flat);
        }
        // last axis fastest
        assert_eq!(d.multi_index(7), vec![1, 2]);
        assert_eq!(d.coord(0, 1), q(1, 2));
        assert_eq!(d.coord(1, 2), q(0, 1));
        assert_eq!(d.unit(1, 4), q(1, 1));
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Domain::<f64>::line(1.0, 0.0, 5).is_err());
        assert!(Domain::<f64>::line(0.0, 1.0, 1).is_err());
        assert!(Domain::<f64>::line(0.0, 1.0, 5)
            .unwrap()
            .with_mask(BTreeSet::new())
            .is_err());
    }

    #[test]
    fn erosion_and_closure_on_line() {
        let d: Domain<f64> = Domain::line(0.0, 1.0, 11).unwrap();
        let s: GridSubset = (0..=6).collect();
        let er = erode(&d, &s);
        assert_eq!(er, (0..=5).collect::<GridSubset>());
        let cl = closure(&d, &er);
        assert_eq!(cl, (0..=6).collect::<GridSubset>());
        // whole grid erodes to itself
        let all = d.active_set();
        assert_eq!(erode(&d, &all), all);
    }

    #[test]
    fn neighbors_respect_mask() {
        let d: Domain<f64> = Domain::line(0.0, 1.0, 5)
            .unwrap()
            .with_mask([0usize, 1, 3, 4].into_iter().collect())
            .unwrap();
        assert_eq!(d.neighbors(1), vec![0]);
        assert_eq!(d.neighbors(3), vec![4]);
    }

    #[test]
    fn nearest_prefers_low_index_on_tie() {
        let d: Domain<f64> = Domain::line(0.0, 1.0, 5).unwrap();
        let s: GridSubset = [1usize, 3].into_iter().collect();
        assert_eq!(nearest_in(&d, &s, 2), 1);
    }

    #[test]
    fn product_with_time_layout() {
        let d: Domain<f64> = Domain::line(0.0, 1.0, 4).unwrap();
        let p = d.product_with_time(8).unwrap();
        assert_eq!(p.total_points(), 32);
        // flat = x * t_res + t
        assert_eq!(p.flat_index(&[2, 5]), 2 * 8 + 5);
    }
}
