//! Coefficient rings: scalars, grid-sampled functions and polynomial
//! functions over a common box domain.
//!
//! Grid functions stand in for the continuous class, polynomials (plus
//! flagged fraction-field elements) for the smooth class. All pointwise
//! bounds are evaluated on grid points; that is the declared semantics
//! throughout the crate.

pub mod approx;
pub mod cover;
pub mod domain;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::scalar::Coeff;

pub use approx::{approximate_smooth, ApproxOptions};
pub use cover::{separating_function, shrink_cover};
pub use domain::{Axis, Domain, GridSubset};

use domain::same_domain;

/// A function given by its values on the (masked) grid of a domain.
///
/// Values are stored densely; inactive points are pinned to zero so that
/// equality and serialization are canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn<K: Coeff> {
    dom: Arc<Domain<K>>,
    values: Vec<K>,
}

impl<K: Coeff> GridFn<K> {
    pub fn from_values(dom: Arc<Domain<K>>, values: Vec<K>) -> Result<Self> {
        if values.len() != dom.total_points() {
            return Err(Error::InvalidDomain(format!(
                "expected {} grid values, got {}",
                dom.total_points(),
                values.len()
            )));
        }
        let mut g = GridFn { dom, values };
        g.canonicalize();
        Ok(g)
    }

    pub fn from_fn(dom: Arc<Domain<K>>, f: impl Fn(usize) -> K) -> Self {
        let mut values = vec![K::zero(); dom.total_points()];
        for p in dom.active_iter() {
            values[p] = f(p);
        }
        GridFn { dom, values }
    }

    fn canonicalize(&mut self) {
        if self.dom.is_masked() {
            for p in 0..self.values.len() {
                if !self.dom.is_active(p) {
                    self.values[p] = K::zero();
                }
            }
        }
    }

    pub fn domain(&self) -> &Arc<Domain<K>> {
        &self.dom
    }

    pub fn values(&self) -> &[K] {
        &self.values
    }

    pub fn value(&self, flat: usize) -> &K {
        &self.values[flat]
    }
}

/// A polynomial function on a domain, stored in normalized coordinates
/// (each axis affinely mapped onto [-1, 1]).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFn<K: Coeff> {
    dom: Arc<Domain<K>>,
    poly: MultiPoly<K>,
}

impl<K: Coeff> PolyFn<K> {
    pub fn new(dom: Arc<Domain<K>>, poly: MultiPoly<K>) -> Result<Self> {
        if poly.dim() != dom.dim() {
            return Err(Error::DomainMismatch);
        }
        Ok(PolyFn { dom, poly })
    }

    pub fn constant(dom: Arc<Domain<K>>, value: K) -> Self {
        let dim = dom.dim();
        PolyFn {
            dom,
            poly: MultiPoly::constant(dim, value),
        }
    }

    /// The box coordinate of one axis as a degree-one polynomial.
    pub fn coordinate(dom: Arc<Domain<K>>, axis: usize) -> Result<Self> {
        if axis >= dom.dim() {
            return Err(Error::IndexOutOfRange {
                index: axis,
                bound: dom.dim(),
            });
        }
        let a = dom.axis(axis);
        let half = K::from_ratio(1, 2);
        let mid = a.lo.add(&a.hi).mul(&half);
        let span = a.hi.sub(&a.lo).mul(&half);
        let dim = dom.dim();
        let poly = MultiPoly::constant(dim, mid).add(&MultiPoly::var(dim, axis).scale(&span));
        Ok(PolyFn { dom, poly })
    }

    pub fn domain(&self) -> &Arc<Domain<K>> {
        &self.dom
    }

    pub fn poly(&self) -> &MultiPoly<K> {
        &self.poly
    }

    /// Dense values on the grid via per-axis power tables.
    pub fn grid_values(&self) -> Vec<K> {
        let dom = &self.dom;
        let max_exps = self.poly.max_exps();
        // powers[axis][g][e]
        let tables: Vec<Vec<Vec<K>>> = (0..dom.dim())
            .map(|axis| {
                (0..dom.axis(axis).res)
                    .map(|g| {
                        let u = dom.unit(axis, g);
                        let mut row = Vec::with_capacity(max_exps[axis] as usize + 1);
                        let mut acc = K::one();
                        row.push(acc.clone());
                        for _ in 0..max_exps[axis] {
                            acc = acc.mul(&u);
                            row.push(acc.clone());
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![K::zero(); dom.total_points()];
        for p in dom.active_iter() {
            let multi = dom.multi_index(p);
            let point_tables: Vec<Vec<K>> = multi
                .iter()
                .enumerate()
                .map(|(axis, &g)| tables[axis][g].clone())
                .collect();
            out[p] = self.poly.eval_tables(&point_tables);
        }
        out
    }

    pub fn eval_flat(&self, flat: usize) -> K {
        self.poly.eval(&self.dom.point_units(flat))
    }

    /// Evaluate at an arbitrary physical point inside the box.
    pub fn eval_coords(&self, coords: &[K]) -> Result<K> {
        let units = self.dom.units_of_coords(coords)?;
        Ok(self.poly.eval(&units))
    }
}

/// An element of the coefficient ring: a scalar, a grid function, a
/// polynomial function, or a flagged fraction-field element p/q (the
/// smooth class closed under the pivot inversions of elimination).
#[derive(Debug, Clone, PartialEq)]
pub enum RingElement<K: Coeff> {
    Scalar(K),
    Grid(GridFn<K>),
    Poly(PolyFn<K>),
    PolyFrac(PolyFn<K>, PolyFn<K>),
}

impl<K: Coeff> RingElement<K> {
    pub fn scalar(v: K) -> Self {
        RingElement::Scalar(v)
    }

    pub fn zero() -> Self {
        RingElement::Scalar(K::zero())
    }

    pub fn one() -> Self {
        RingElement::Scalar(K::one())
    }

    pub fn grid_from_fn(dom: &Arc<Domain<K>>, f: impl Fn(usize) -> K) -> Self {
        RingElement::Grid(GridFn::from_fn(dom.clone(), f))
    }

    pub fn grid_from_values(dom: &Arc<Domain<K>>, values: Vec<K>) -> Result<Self> {
        Ok(RingElement::Grid(GridFn::from_values(dom.clone(), values)?))
    }

    pub fn poly(dom: &Arc<Domain<K>>, poly: MultiPoly<K>) -> Result<Self> {
        Ok(RingElement::Poly(PolyFn::new(dom.clone(), poly)?))
    }

    /// The box coordinate x_axis as a polynomial element.
    pub fn coordinate(dom: &Arc<Domain<K>>, axis: usize) -> Result<Self> {
        Ok(RingElement::Poly(PolyFn::coordinate(dom.clone(), axis)?))
    }

    /// Builds p/q, folding constant denominators back into the numerator.
    pub fn poly_frac(num: PolyFn<K>, den: PolyFn<K>) -> Result<Self> {
        if !same_domain(num.domain(), den.domain()) {
            return Err(Error::DomainMismatch);
        }
        if den.poly().is_zero() {
            return Err(Error::NotAUnit { point: None });
        }
        if num.poly().is_zero() {
            return Ok(RingElement::Poly(PolyFn::constant(
                num.domain().clone(),
                K::zero(),
            )));
        }
        if let Some(c) = den.poly().as_constant() {
            let ci = c.inv().ok_or(Error::NotAUnit { point: None })?;
            let dom = num.domain().clone();
            let poly = num.poly().scale(&ci);
            return Ok(RingElement::Poly(PolyFn { dom, poly }));
        }
        Ok(RingElement::PolyFrac(num, den))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            RingElement::Scalar(_) => "scalar",
            RingElement::Grid(_) => "grid",
            RingElement::Poly(_) => "poly",
            RingElement::PolyFrac(_, _) => "polyfrac",
        }
    }

    /// Scalars, polynomials and fraction-field elements are smooth-class;
    /// grid functions are continuous-class only.
    pub fn is_smooth_class(&self) -> bool {
        !matches!(self, RingElement::Grid(_))
    }

    pub fn domain(&self) -> Option<&Arc<Domain<K>>> {
        match self {
            RingElement::Scalar(_) => None,
            RingElement::Grid(g) => Some(g.domain()),
            RingElement::Poly(p) => Some(p.domain()),
            RingElement::PolyFrac(n, _) => Some(n.domain()),
        }
    }

    /// Common domain of two elements, if their domains are compatible.
    pub fn unified_domain(&self, other: &Self) -> Result<Option<Arc<Domain<K>>>> {
        match (self.domain(), other.domain()) {
            (None, None) => Ok(None),
            (Some(d), None) | (None, Some(d)) => Ok(Some(d.clone())),
            (Some(a), Some(b)) => {
                if same_domain(a, b) {
                    Ok(Some(a.clone()))
                } else {
                    Err(Error::DomainMismatch)
                }
            }
        }
    }

    fn as_frac_on(&self, dom: &Arc<Domain<K>>) -> Option<(MultiPoly<K>, MultiPoly<K>)> {
        match self {
            RingElement::Scalar(v) => Some((
                MultiPoly::constant(dom.dim(), v.clone()),
                MultiPoly::one(dom.dim()),
            )),
            RingElement::Poly(p) => Some((p.poly().clone(), MultiPoly::one(dom.dim()))),
            RingElement::PolyFrac(n, d) => Some((n.poly().clone(), d.poly().clone())),
            RingElement::Grid(_) => None,
        }
    }

    /// Dense grid values on `dom`. Scalars broadcast; fraction-field
    /// denominators must be nonzero on active points.
    pub fn values_on(&self, dom: &Arc<Domain<K>>) -> Result<Vec<K>> {
        match self {
            RingElement::Scalar(v) => {
                let mut out = vec![K::zero(); dom.total_points()];
                for p in dom.active_iter() {
                    out[p] = v.clone();
                }
                Ok(out)
            }
            RingElement::Grid(g) => {
                if !same_domain(g.domain(), dom) {
                    return Err(Error::DomainMismatch);
                }
                Ok(g.values().to_vec())
            }
            RingElement::Poly(p) => {
                if !same_domain(p.domain(), dom) {
                    return Err(Error::DomainMismatch);
                }
                Ok(p.grid_values())
            }
            RingElement::PolyFrac(n, d) => {
                if !same_domain(n.domain(), dom) {
                    return Err(Error::DomainMismatch);
                }
                let nv = n.grid_values();
                let dv = d.grid_values();
                let mut out = vec![K::zero(); dom.total_points()];
                for p in dom.active_iter() {
                    let inv = dv[p].inv().ok_or(Error::NotAUnit { point: Some(p) })?;
                    out[p] = nv[p].mul(&inv);
                }
                Ok(out)
            }
        }
    }

    /// Value at one grid point; scalars ignore the index.
    pub fn eval_flat(&self, flat: usize) -> Result<K> {
        match self {
            RingElement::Scalar(v) => Ok(v.clone()),
            RingElement::Grid(g) => Ok(g.value(flat).clone()),
            RingElement::Poly(p) => Ok(p.eval_flat(flat)),
            RingElement::PolyFrac(n, d) => {
                let dv = d.eval_flat(flat);
                let inv = dv.inv().ok_or(Error::NotAUnit { point: Some(flat) })?;
                Ok(n.eval_flat(flat).mul(&inv))
            }
        }
    }

    /// Value at an arbitrary physical point; grid functions are not
    /// evaluable off-grid.
    pub fn eval_coords(&self, coords: &[K]) -> Result<K> {
        match self {
            RingElement::Scalar(v) => Ok(v.clone()),
            RingElement::Grid(_) => Err(Error::KindMismatch(
                "grid functions are not evaluable off the grid".into(),
            )),
            RingElement::Poly(p) => p.eval_coords(coords),
            RingElement::PolyFrac(n, d) => {
                let dv = d.eval_coords(coords)?;
                let inv = dv.inv().ok_or(Error::NotAUnit { point: None })?;
                Ok(n.eval_coords(coords)?.mul(&inv))
            }
        }
    }

    fn binop(
        &self,
        other: &Self,
        scalar_op: impl Fn(&K, &K) -> K,
        frac_op: impl Fn(
            (&MultiPoly<K>, &MultiPoly<K>),
            (&MultiPoly<K>, &MultiPoly<K>),
        ) -> (MultiPoly<K>, MultiPoly<K>),
    ) -> Result<Self> {
        if let (RingElement::Scalar(a), RingElement::Scalar(b)) = (self, other) {
            return Ok(RingElement::Scalar(scalar_op(a, b)));
        }
        let dom = self
            .unified_domain(other)?
            .expect("non-scalar operands carry a domain");
        // grid operands (or mixes involving a grid) evaluate pointwise
        if matches!(self, RingElement::Grid(_)) || matches!(other, RingElement::Grid(_)) {
            let av = self.values_on(&dom)?;
            let bv = other.values_on(&dom)?;
            let mut out = vec![K::zero(); dom.total_points()];
            for p in dom.active_iter() {
                out[p] = scalar_op(&av[p], &bv[p]);
            }
            return Self::grid_from_values(&dom, out);
        }
        let (an, ad) = self.as_frac_on(&dom).expect("symbolic kind");
        let (bn, bd) = other.as_frac_on(&dom).expect("symbolic kind");
        let (n, d) = frac_op((&an, &ad), (&bn, &bd));
        Self::poly_frac(PolyFn::new(dom.clone(), n)?, PolyFn::new(dom, d)?)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.binop(
            other,
            |a, b| a.add(b),
            |(an, ad), (bn, bd)| (an.mul(bd).add(&bn.mul(ad)), ad.mul(bd)),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.binop(
            other,
            |a, b| a.sub(b),
            |(an, ad), (bn, bd)| (an.mul(bd).sub(&bn.mul(ad)), ad.mul(bd)),
        )
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        // fast paths for the multiplicative identities and zero
        if let RingElement::Scalar(v) = self {
            if v.is_one() {
                return Ok(other.clone());
            }
            if v.is_zero() {
                return Ok(RingElement::Scalar(K::zero()));
            }
        }
        if let RingElement::Scalar(v) = other {
            if v.is_one() {
                return Ok(self.clone());
            }
            if v.is_zero() {
                return Ok(RingElement::Scalar(K::zero()));
            }
        }
        self.binop(
            other,
            |a, b| a.mul(b),
            |(an, ad), (bn, bd)| (an.mul(bn), ad.mul(bd)),
        )
    }

    pub fn neg(&self) -> Self {
        match self {
            RingElement::Scalar(v) => RingElement::Scalar(v.neg()),
            RingElement::Grid(g) => {
                let dom = g.domain().clone();
                let values = g.values().iter().map(|v| v.neg()).collect();
                RingElement::Grid(GridFn { dom, values })
            }
            RingElement::Poly(p) => RingElement::Poly(PolyFn {
                dom: p.domain().clone(),
                poly: p.poly().neg(),
            }),
            RingElement::PolyFrac(n, d) => RingElement::PolyFrac(
                PolyFn {
                    dom: n.domain().clone(),
                    poly: n.poly().neg(),
                },
                d.clone(),
            ),
        }
    }

    /// Inverse of a unit: nonzero scalar, pointwise-nonzero grid function,
    /// or polynomial nonzero at every active grid point (the inverse is then
    /// a flagged fraction-field element).
    pub fn invert_unit(&self) -> Result<Self> {
        match self {
            RingElement::Scalar(v) => v
                .inv()
                .map(RingElement::Scalar)
                .ok_or(Error::NotAUnit { point: None }),
            RingElement::Grid(g) => {
                let dom = g.domain().clone();
                let mut values = vec![K::zero(); dom.total_points()];
                for p in dom.active_iter() {
                    values[p] = g.value(p).inv().ok_or(Error::NotAUnit { point: Some(p) })?;
                }
                Ok(RingElement::Grid(GridFn { dom, values }))
            }
            RingElement::Poly(p) => {
                check_nonzero_on_grid(p)?;
                RingElement::poly_frac(PolyFn::constant(p.domain().clone(), K::one()), p.clone())
            }
            RingElement::PolyFrac(n, d) => {
                check_nonzero_on_grid(n)?;
                RingElement::poly_frac(d.clone(), n.clone())
            }
        }
    }

    /// Max of |f| over the active grid of `dom` (|value| for scalars).
    pub fn sup_norm_on(&self, dom: &Arc<Domain<K>>) -> Result<K> {
        if let RingElement::Scalar(v) = self {
            return Ok(v.abs());
        }
        let values = self.values_on(dom)?;
        let mut best = K::zero();
        for p in dom.active_iter() {
            best = K::max_val(best, values[p].abs());
        }
        Ok(best)
    }

    /// True when the element equals the constant `c` (exactly for symbolic
    /// kinds; pointwise on active points for grids).
    pub fn is_const(&self, c: &K) -> bool {
        match self {
            RingElement::Scalar(v) => v == c,
            RingElement::Grid(g) => g.domain().active_iter().all(|p| g.value(p) == c),
            RingElement::Poly(p) => p.poly().as_constant().map(|v| &v == c).unwrap_or(false),
            RingElement::PolyFrac(n, d) => n.poly() == &d.poly().scale(c),
        }
    }
}

fn check_nonzero_on_grid<K: Coeff>(p: &PolyFn<K>) -> Result<()> {
    let values = p.grid_values();
    for q in p.domain().active_iter() {
        if values[q].is_zero() {
            return Err(Error::NotAUnit { point: Some(q) });
        }
    }
    Ok(())
}

/// Pointwise max of two elements over a shared domain (grid-valued unless
/// both are scalars).
pub fn pointwise_max<K: Coeff>(a: &RingElement<K>, b: &RingElement<K>) -> Result<RingElement<K>> {
    if let (RingElement::Scalar(x), RingElement::Scalar(y)) = (a, b) {
        return Ok(RingElement::Scalar(K::max_val(x.clone(), y.clone())));
    }
    let dom = a.unified_domain(b)?.expect("non-scalar operands");
    let av = a.values_on(&dom)?;
    let bv = b.values_on(&dom)?;
    let mut out = vec![K::zero(); dom.total_points()];
    for p in dom.active_iter() {
        out[p] = K::max_val(av[p].clone(), bv[p].clone());
    }
    RingElement::grid_from_values(&dom, out)
}

/// Max over grid points of |f| — the sup norm at grid scale.
pub fn sup_norm<K: Coeff>(f: &RingElement<K>, dom: &Arc<Domain<K>>) -> Result<K> {
    if let Some(d) = f.domain() {
        if !same_domain(d, dom) {
            return Err(Error::DomainMismatch);
        }
    }
    f.sup_norm_on(dom)
}

/// A ring element that is strictly positive at every active grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveFunction<K: Coeff>(RingElement<K>);

impl<K: Coeff> PositiveFunction<K> {
    pub fn new(inner: RingElement<K>) -> Result<Self> {
        match &inner {
            RingElement::Scalar(v) => {
                if v.cmp_total(&K::zero()) != std::cmp::Ordering::Greater {
                    return Err(Error::NotPositive { point: None });
                }
            }
            other => {
                let dom = other.domain().expect("function kind").clone();
                let values = other.values_on(&dom)?;
                for p in dom.active_iter() {
                    if values[p].cmp_total(&K::zero()) != std::cmp::Ordering::Greater {
                        return Err(Error::NotPositive { point: Some(p) });
                    }
                }
            }
        }
        Ok(PositiveFunction(inner))
    }

    pub fn inner(&self) -> &RingElement<K> {
        &self.0
    }

    pub fn into_inner(self) -> RingElement<K> {
        self.0
    }

    /// Positive functions are closed under scaling by positive rationals.
    pub fn scaled(&self, num: i64, den: i64) -> Result<Self> {
        assert!(num > 0 && den > 0);
        let s = RingElement::Scalar(K::from_ratio(num, den));
        PositiveFunction::new(self.0.mul(&s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn line_q(res: usize) -> Arc<Domain<BigRational>> {
        Arc::new(Domain::line(q(-1, 1), q(2, 1), res).unwrap())
    }

    #[test]
    fn sup_norm_examples() {
        let dom = line_q(31);
        // zero function
        let z = RingElement::grid_from_fn(&dom, |_| q(0, 1));
        assert_eq!(sup_norm(&z, &dom).unwrap(), q(0, 1));
        // scalar
        let s = RingElement::scalar(q(-3, 1));
        assert_eq!(sup_norm(&s, &dom).unwrap(), q(3, 1));
        // f(x) = x on [-1, 2]: enumerate the grid and take max |x| (oracle)
        let x = RingElement::coordinate(&dom, 0).unwrap();
        let mut expect = q(0, 1);
        for g in 0..31 {
            let v = dom.coord(0, g).abs();
            if v > expect {
                expect = v;
            }
        }
        assert_eq!(expect, q(2, 1));
        assert_eq!(sup_norm(&x, &dom).unwrap(), q(2, 1));
    }

    #[test]
    fn sup_norm_domain_mismatch() {
        let a = line_q(5);
        let b = line_q(7);
        let f = RingElement::grid_from_fn(&a, |_| q(1, 1));
        assert_eq!(sup_norm(&f, &b), Err(Error::DomainMismatch));
    }

    #[test]
    fn ring_ops_pointwise() {
        let dom = line_q(9);
        let x = RingElement::coordinate(&dom, 0).unwrap();
        let g = RingElement::grid_from_fn(&dom, |p| dom.coord(0, dom.multi_index(p)[0]));
        // poly * grid promotes to grid and agrees pointwise
        let prod = x.mul(&g).unwrap();
        for p in dom.active_iter() {
            let c = dom.point_coords(p)[0].clone();
            assert_eq!(prod.eval_flat(p).unwrap(), c.mul(&c));
        }
        // x + x as polynomials stays symbolic
        let two_x = x.add(&x).unwrap();
        assert_eq!(two_x.kind_name(), "poly");
    }

    #[test]
    fn frac_inversion_and_collapse() {
        let dom = Arc::new(Domain::line(q(1, 1), q(2, 1), 5).unwrap());
        let x = RingElement::coordinate(&dom, 0).unwrap();
        let inv = x.invert_unit().unwrap();
        assert_eq!(inv.kind_name(), "polyfrac");
        let prod = x.mul(&inv).unwrap();
        assert!(prod.is_const(&q(1, 1)));
        // constant denominator folds back to a polynomial
        let c = RingElement::poly(&dom, MultiPoly::constant(1, q(2, 1))).unwrap();
        assert_eq!(c.invert_unit().unwrap().kind_name(), "poly");
    }

    #[test]
    fn inversion_reports_zero_point() {
        let dom = Arc::new(Domain::line(q(-1, 1), q(1, 1), 5).unwrap());
        let x = RingElement::coordinate(&dom, 0).unwrap(); // vanishes mid-grid
        assert_eq!(x.invert_unit(), Err(Error::NotAUnit { point: Some(2) }));
    }

    #[test]
    fn positive_function_guards() {
        let dom = line_q(5);
        assert!(PositiveFunction::new(RingElement::scalar(q(1, 2))).is_ok());
        assert!(PositiveFunction::new(RingElement::scalar(q(0, 1))).is_err());
        let f = RingElement::grid_from_fn(&dom, |p| if p == 3 { q(0, 1) } else { q(1, 1) });
        assert_eq!(
            PositiveFunction::new(f),
            Err(Error::NotPositive { point: Some(3) })
        );
    }
}
