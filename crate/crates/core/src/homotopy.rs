//! Homotopy certificates: slicing covers of the product grid, clamping
//! coefficients across slabs, telescoping per-slab factorizations into
//! global-in-t ones, and folding retraction steps into an explicit witness
//! B = A · Π G_i, verified pointwise.
//!
//! Every time-valued function entering the pipeline (slab breakpoints,
//! separating functions, the folded time front) lives on the t-grid; the
//! pipeline snaps its own constructions and rejects off-grid values.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::elementary::{scalar_inverse, scalar_mul, ElementaryFactor, FactorList, SLMatrix};
use crate::error::{Error, Result};
use crate::gauss::{build_patch_cover, factor_pointwise, GaussOptions, PatchFactorization};
use crate::ring::domain::{closure, erode, nearest_in, same_domain, uncovered_point};
use crate::ring::{separating_function, shrink_cover, Domain, GridSubset, RingElement};
use crate::scalar::Coeff;

#[derive(Debug, Clone)]
pub struct CertOptions {
    pub pivot_floor: f64,
    pub tol_recon: f64,
    pub tol_cert: f64,
    pub tol_det: f64,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions {
            pivot_floor: crate::DEFAULT_PIVOT_FLOOR,
            tol_recon: crate::DEFAULT_TOL_RECON,
            tol_cert: crate::DEFAULT_TOL_CERT,
            tol_det: crate::DEFAULT_TOL_DET,
        }
    }
}

/// Base grid extended by a trailing time axis sampled at `t_res` points.
#[derive(Debug, Clone)]
pub struct TimeGrid<K: Coeff> {
    base: Arc<Domain<K>>,
    product: Arc<Domain<K>>,
    t_res: usize,
}

impl<K: Coeff> TimeGrid<K> {
    pub fn new(base: Arc<Domain<K>>, t_res: usize) -> Result<Self> {
        let product = Arc::new(base.product_with_time(t_res)?);
        Ok(TimeGrid {
            base,
            product,
            t_res,
        })
    }

    pub fn base(&self) -> &Arc<Domain<K>> {
        &self.base
    }

    pub fn product(&self) -> &Arc<Domain<K>> {
        &self.product
    }

    pub fn t_res(&self) -> usize {
        self.t_res
    }

    pub fn flat(&self, x: usize, t: usize) -> usize {
        x * self.t_res + t
    }

    pub fn t_value(&self, idx: usize) -> K {
        K::from_ratio(idx as i64, (self.t_res - 1) as i64)
    }

    /// Index of a t-grid value; errors when the value is off the grid.
    pub fn t_index(&self, v: &K) -> Result<usize> {
        let f = v.to_f64() * (self.t_res - 1) as f64;
        let idx = f.round();
        if !(0.0..=(self.t_res - 1) as f64).contains(&idx) {
            return Err(Error::OffTimeGrid { value: v.to_f64() });
        }
        let idx = idx as usize;
        if &self.t_value(idx) != v {
            return Err(Error::OffTimeGrid { value: v.to_f64() });
        }
        Ok(idx)
    }

    /// Per-column t-indices of a t-grid-valued function on the base.
    fn column_indices(&self, f: &RingElement<K>, what: &'static str) -> Result<Vec<usize>> {
        if let Some(d) = f.domain() {
            if !same_domain(d, &self.base) {
                return Err(Error::DomainMismatch);
            }
        }
        let mut out = vec![0usize; self.base.total_points()];
        for x in self.base.active_iter() {
            let v = f.eval_flat(x)?;
            if v.cmp_total(&K::zero()) == std::cmp::Ordering::Less
                || v.cmp_total(&K::one()) == std::cmp::Ordering::Greater
            {
                return Err(Error::TimeOutOfRange { what, point: x });
            }
            out[x] = self.t_index(&v)?;
        }
        Ok(out)
    }
}

/// A matrix-valued homotopy over base × `[0,1]`, determinant one everywhere.
#[derive(Debug, Clone)]
pub struct HomotopyMatrix<K: Coeff> {
    grid: TimeGrid<K>,
    mat: SLMatrix<K>,
}

impl<K: Coeff> HomotopyMatrix<K> {
    pub fn new(base: Arc<Domain<K>>, t_res: usize, mat: SLMatrix<K>, tol_det: f64) -> Result<Self> {
        let grid = TimeGrid::new(base, t_res)?;
        if let Some(d) = mat.domain()? {
            if !same_domain(&d, &grid.product) {
                return Err(Error::DomainMismatch);
            }
        }
        mat.check_det(tol_det)?;
        Ok(HomotopyMatrix { grid, mat })
    }

    /// Samples entries from a per-point closure `f(x_flat, t_idx) -> n*n`.
    pub fn sample(
        base: Arc<Domain<K>>,
        t_res: usize,
        n: usize,
        tol_det: f64,
        f: impl Fn(usize, usize) -> Vec<K>,
    ) -> Result<Self> {
        let grid = TimeGrid::new(base, t_res)?;
        let total = grid.product.total_points();
        let mut tables = vec![vec![K::zero(); total]; n * n];
        for x in grid.base.active_iter() {
            for t in 0..t_res {
                let vals = f(x, t);
                debug_assert_eq!(vals.len(), n * n);
                let p = grid.flat(x, t);
                for (table, v) in tables.iter_mut().zip(vals) {
                    table[p] = v;
                }
            }
        }
        let entries = tables
            .into_iter()
            .map(|v| RingElement::grid_from_values(&grid.product, v))
            .collect::<Result<Vec<_>>>()?;
        let mat = SLMatrix::from_entries(n, entries)?;
        mat.check_det(tol_det)?;
        Ok(HomotopyMatrix { grid, mat })
    }

    pub fn n(&self) -> usize {
        self.mat.n()
    }

    pub fn time_grid(&self) -> &TimeGrid<K> {
        &self.grid
    }

    pub fn base(&self) -> &Arc<Domain<K>> {
        &self.grid.base
    }

    pub fn product_domain(&self) -> &Arc<Domain<K>> {
        &self.grid.product
    }

    pub fn t_res(&self) -> usize {
        self.grid.t_res
    }

    pub fn matrix(&self) -> &SLMatrix<K> {
        &self.mat
    }

    pub fn eval(&self, x: usize, t: usize) -> Result<Vec<K>> {
        self.mat.eval_at(self.grid.flat(x, t))
    }

    /// The time slice H(·, t_idx) as a grid-entry matrix on the base.
    pub fn endpoint(&self, t_idx: usize) -> Result<SLMatrix<K>> {
        let n = self.mat.n();
        let base = &self.grid.base;
        let mut tables = vec![vec![K::zero(); base.total_points()]; n * n];
        for x in base.active_iter() {
            let vals = self.eval(x, t_idx)?;
            for (table, v) in tables.iter_mut().zip(vals) {
                table[x] = v;
            }
        }
        SLMatrix::from_entries(
            n,
            tables
                .into_iter()
                .map(|v| RingElement::grid_from_values(base, v))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn endpoints(&self) -> Result<(SLMatrix<K>, SLMatrix<K>)> {
        Ok((self.endpoint(0)?, self.endpoint(self.grid.t_res - 1)?))
    }
}

/// One sliced patch: columns U_i, per-column breakpoint indices (first 0,
/// last t_res-1), and the cover set assigned to each slab.
#[derive(Debug, Clone)]
pub struct SlicedPatch<K: Coeff> {
    pub columns: GridSubset,
    /// Per-column breakpoint t-indices, length slab_count + 1.
    pub breakpoints: BTreeMap<usize, Vec<usize>>,
    /// Slab k lies inside cover set `assignment[k]`.
    pub assignment: Vec<usize>,
    _marker: std::marker::PhantomData<K>,
}

impl<K: Coeff> SlicedPatch<K> {
    pub fn new(
        columns: GridSubset,
        breakpoints: BTreeMap<usize, Vec<usize>>,
        assignment: Vec<usize>,
    ) -> Self {
        SlicedPatch {
            columns,
            breakpoints,
            assignment,
            _marker: std::marker::PhantomData,
        }
    }

    pub fn slab_count(&self) -> usize {
        self.assignment.len()
    }

    /// Breakpoint k as a t-valued grid function on the base domain.
    pub fn breakpoint_fn(&self, k: usize, grid: &TimeGrid<K>) -> RingElement<K> {
        RingElement::grid_from_fn(grid.base(), |x| match self.breakpoints.get(&x) {
            Some(bps) => grid.t_value(bps[k]),
            None => K::zero(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SlicedCover<K: Coeff> {
    pub patches: Vec<SlicedPatch<K>>,
}

/// Maximal runs of consecutive t-indices of one cover set in one column.
fn column_runs(
    cover: &GridSubset,
    grid_flat: impl Fn(usize) -> usize,
    t_res: usize,
) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start: Option<usize> = None;
    for t in 0..t_res {
        let inside = cover.contains(&grid_flat(t));
        match (inside, start) {
            (true, None) => start = Some(t),
            (false, Some(s)) => {
                runs.push((s, t - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, t_res - 1));
    }
    runs
}

/// Breakpoints for a fixed sequence of cover sets in one column, if the
/// sequence admits a chained slicing there. Each interior breakpoint is the
/// midpoint of the feasible window between consecutive runs; redundant
/// steps degenerate into empty slabs, so a sequence stays feasible on
/// columns where a shorter chain already suffices — that overlap is what
/// lets the column sets survive shrinking.
fn slice_with_sequence(
    runs_per_set: &[Vec<(usize, usize)>],
    seq: &[usize],
    t_res: usize,
) -> Option<Vec<usize>> {
    let first = runs_per_set[seq[0]].iter().find(|r| r.0 == 0).copied()?;
    let mut bps = vec![0usize];
    let mut prev_end = first.1;
    for &j in &seq[1..] {
        let last_b = *bps.last().expect("nonempty");
        // best run intersecting the feasible breakpoint window
        let run = runs_per_set[j]
            .iter()
            .filter(|r| r.0 <= prev_end && r.1 >= last_b)
            .max_by_key(|r| r.1)
            .copied()?;
        let lo = run.0.max(last_b);
        let hi = prev_end.min(run.1);
        debug_assert!(lo <= hi);
        bps.push((lo + hi) / 2);
        prev_end = run.1;
    }
    if prev_end == t_res - 1 {
        bps.push(t_res - 1);
        Some(bps)
    } else {
        None
    }
}

/// Greedy per-column slicing: start with the set reaching farthest from
/// t = 0, then repeatedly pick the overlapping set extending farthest.
fn greedy_column_sequence(
    runs_per_set: &[Vec<(usize, usize)>],
    t_res: usize,
    column: usize,
) -> Result<Vec<usize>> {
    let mut seq = Vec::new();
    let mut cur_end: Option<usize> = None;
    loop {
        let mut best: Option<(usize, usize)> = None; // (set, run end)
        for (j, runs) in runs_per_set.iter().enumerate() {
            let cand = match cur_end {
                None => runs.iter().find(|r| r.0 == 0).map(|r| r.1),
                Some(e) => runs.iter().find(|r| r.0 <= e && r.1 > e).map(|r| r.1),
            };
            if let Some(end) = cand {
                let beat = match best {
                    Some((_, be)) => end > be,
                    None => true,
                };
                if beat {
                    best = Some((j, end));
                }
            }
        }
        let Some((j, end)) = best else {
            let t = cur_end.map(|e| e + 1).unwrap_or(0);
            return Err(Error::NotACover {
                point: column * t_res + t,
            });
        };
        seq.push(j);
        cur_end = Some(end);
        if end == t_res - 1 {
            return Ok(seq);
        }
    }
}

/// Slices a cover of the product grid: per base column, breakpoints are
/// placed so that every slab {(x,t) : bp_{k-1} <= t <= bp_k} lies inside
/// one cover set. Columns are grouped by their slab-to-set assignment, and
/// each group is grown to every column where that assignment stays
/// feasible, so the resulting column sets overlap.
pub fn slice_cover<K: Coeff>(cover: &[GridSubset], grid: &TimeGrid<K>) -> Result<SlicedCover<K>> {
    let t_res = grid.t_res;
    let columns: Vec<usize> = grid.base.active_iter().collect();
    let mut runs: BTreeMap<usize, Vec<Vec<(usize, usize)>>> = BTreeMap::new();
    for &x in &columns {
        let per_set: Vec<Vec<(usize, usize)>> = cover
            .iter()
            .map(|s| column_runs(s, |t| grid.flat(x, t), t_res))
            .collect();
        runs.insert(x, per_set);
    }
    // discover signatures in ascending column order
    let mut signatures: Vec<Vec<usize>> = Vec::new();
    for &x in &columns {
        let seq = greedy_column_sequence(&runs[&x], t_res, x)?;
        if !signatures.contains(&seq) {
            signatures.push(seq);
        }
    }
    let build = |sigs: &[Vec<usize>]| -> Vec<SlicedPatch<K>> {
        let mut patches = Vec::with_capacity(sigs.len());
        for seq in sigs {
            let mut cols = GridSubset::new();
            let mut bps = BTreeMap::new();
            for &x in &columns {
                if let Some(b) = slice_with_sequence(&runs[&x], seq, t_res) {
                    cols.insert(x);
                    bps.insert(x, b);
                }
            }
            if !cols.is_empty() {
                patches.push(SlicedPatch {
                    columns: cols,
                    breakpoints: bps,
                    assignment: seq.clone(),
                    _marker: std::marker::PhantomData,
                });
            }
        }
        patches
    };
    let survives_double_shrink = |patches: &[SlicedPatch<K>]| -> bool {
        let u: Vec<GridSubset> = patches.iter().map(|p| p.columns.clone()).collect();
        let w: Vec<GridSubset> = u.iter().map(|s| erode(grid.base.as_ref(), s)).collect();
        if uncovered_point(grid.base.as_ref(), &w).is_some() {
            return false;
        }
        let wp: Vec<GridSubset> = w.iter().map(|s| erode(grid.base.as_ref(), s)).collect();
        uncovered_point(grid.base.as_ref(), &wp).is_none()
    };
    let patches = build(&signatures);
    if survives_double_shrink(&patches) {
        return Ok(SlicedCover { patches });
    }
    // short signatures can be valid only on scattered columns (a pivot dip
    // falling between grid points); concatenations of discovered signatures
    // admit the same slicings with degenerate slabs and restore overlap
    let base_sigs = signatures.clone();
    for a in &base_sigs {
        for b in &base_sigs {
            let mut cat = a.clone();
            cat.extend(b.iter().copied());
            if !signatures.contains(&cat) {
                signatures.push(cat);
            }
        }
    }
    Ok(SlicedCover {
        patches: build(&signatures),
    })
}

/// Freezes a product-grid coefficient outside the band [lo(x), hi(x)]:
/// b(x,t) = a(x, clamp(t, lo(x), hi(x))). The band bounds must be t-grid
/// valued.
pub fn clamp_coefficients<K: Coeff>(
    a: &RingElement<K>,
    lo: &RingElement<K>,
    hi: &RingElement<K>,
    grid: &TimeGrid<K>,
) -> Result<RingElement<K>> {
    if let RingElement::Scalar(_) = a {
        // constants are unaffected by clamping
        let lo_idx = grid.column_indices(lo, "lo")?;
        let hi_idx = grid.column_indices(hi, "hi")?;
        for x in grid.base.active_iter() {
            if lo_idx[x] > hi_idx[x] {
                return Err(Error::Precondition {
                    what: "clamp needs lo <= hi",
                    point: Some(x),
                });
            }
        }
        return Ok(a.clone());
    }
    if let Some(d) = a.domain() {
        if !same_domain(d, &grid.product) {
            return Err(Error::DomainMismatch);
        }
    }
    let lo_idx = grid.column_indices(lo, "lo")?;
    let hi_idx = grid.column_indices(hi, "hi")?;
    let mut dense = vec![K::zero(); grid.product.total_points()];
    for x in grid.base.active_iter() {
        let (l, h) = (lo_idx[x], hi_idx[x]);
        if l > h {
            return Err(Error::Precondition {
                what: "clamp needs lo <= hi",
                point: Some(x),
            });
        }
        for t in 0..grid.t_res {
            let tt = t.clamp(l, h);
            dense[grid.flat(x, t)] = a.eval_flat(grid.flat(x, tt))?;
        }
    }
    RingElement::grid_from_values(&grid.product, dense)
}

fn clamp_list<K: Coeff>(
    list: &FactorList<K>,
    lo: &[usize],
    hi: &[usize],
    columns: &GridSubset,
    grid: &TimeGrid<K>,
) -> Result<FactorList<K>> {
    let mut out = FactorList::empty(list.n());
    for f in list.iter() {
        let mut dense = vec![K::zero(); grid.product.total_points()];
        for &x in columns {
            for t in 0..grid.t_res {
                let tt = t.clamp(lo[x], hi[x]);
                dense[grid.flat(x, t)] = f.coeff().eval_flat(grid.flat(x, tt))?;
            }
        }
        out.push(ElementaryFactor::new(
            f.i(),
            f.j(),
            RingElement::grid_from_values(&grid.product, dense)?,
        )?)?;
    }
    Ok(out)
}

/// Constant-in-t evaluation of a clamped list at the per-column breakpoint.
fn freeze_list_at<K: Coeff>(
    list: &FactorList<K>,
    at: &[usize],
    columns: &GridSubset,
    grid: &TimeGrid<K>,
) -> Result<FactorList<K>> {
    let mut out = FactorList::empty(list.n());
    for f in list.iter() {
        let mut dense = vec![K::zero(); grid.product.total_points()];
        for &x in columns {
            let v = f.coeff().eval_flat(grid.flat(x, at[x]))?;
            for t in 0..grid.t_res {
                dense[grid.flat(x, t)] = v.clone();
            }
        }
        out.push(ElementaryFactor::new(
            f.i(),
            f.j(),
            RingElement::grid_from_values(&grid.product, dense)?,
        )?)?;
    }
    Ok(out)
}

/// Telescopes per-slab factor lists into one list valid on all of
/// U_i × `[0,1]`: clamp each slab list across t, then interleave inverted
/// boundary evaluations so consecutive slabs cancel.
pub fn glue_patch<K: Coeff>(
    h: &HomotopyMatrix<K>,
    patch: &SlicedPatch<K>,
    slab_lists: &[FactorList<K>],
    tol_recon: f64,
) -> Result<FactorList<K>> {
    if slab_lists.len() != patch.slab_count() {
        return Err(Error::IndexOutOfRange {
            index: slab_lists.len(),
            bound: patch.slab_count(),
        });
    }
    let grid = h.time_grid();
    let total = grid.base.total_points();
    let slab_bounds = |k: usize| -> (Vec<usize>, Vec<usize>) {
        let mut lo = vec![0usize; total];
        let mut hi = vec![0usize; total];
        for (&x, bps) in &patch.breakpoints {
            lo[x] = bps[k];
            hi[x] = bps[k + 1];
        }
        (lo, hi)
    };

    let (lo0, hi0) = slab_bounds(0);
    let mut glued = clamp_list(&slab_lists[0], &lo0, &hi0, &patch.columns, grid)?;
    for k in 1..patch.slab_count() {
        let (lo, hi) = slab_bounds(k);
        let clamped = clamp_list(&slab_lists[k], &lo, &hi, &patch.columns, grid)?;
        let boundary = freeze_list_at(&clamped, &lo, &patch.columns, grid)?;
        glued = glued.concat(&boundary.inverted())?;
        glued = glued.concat(&clamped)?;
    }

    // the telescoped product must equal H on all of U_i × [0,1]
    for &x in &patch.columns {
        for t in 0..grid.t_res {
            let p = grid.flat(x, t);
            let got = glued.eval_product_at(p)?;
            let want = h.eval(x, t)?;
            for (g, w) in got.iter().zip(&want) {
                let dev = g.sub(w).abs().to_f64();
                if dev > tol_recon {
                    return Err(Error::TelescopeMismatch {
                        point: p,
                        deviation: dev,
                    });
                }
            }
        }
    }
    Ok(glued)
}

/// Pointwise max of two time functions on the base domain, after checking
/// both are valued in [0, 1].
pub fn retraction<K: Coeff>(
    phi: &RingElement<K>,
    eta: &RingElement<K>,
    dom: &Arc<Domain<K>>,
) -> Result<RingElement<K>> {
    for (f, what) in [(phi, "phi"), (eta, "eta")] {
        let vals = f.values_on(dom)?;
        for x in dom.active_iter() {
            if vals[x].cmp_total(&K::zero()) == std::cmp::Ordering::Less
                || vals[x].cmp_total(&K::one()) == std::cmp::Ordering::Greater
            {
                return Err(Error::TimeOutOfRange { what, point: x });
            }
        }
    }
    let pv = phi.values_on(dom)?;
    let ev = eta.values_on(dom)?;
    let mut dense = vec![K::zero(); dom.total_points()];
    for x in dom.active_iter() {
        dense[x] = K::max_val(pv[x].clone(), ev[x].clone());
    }
    RingElement::grid_from_values(dom, dense)
}

/// One retraction step: pushes the time front from η to max(η, φ) and emits
/// the commutator list G with product(G)(x) = H(x,η(x))^{-1}·H(x,max(η,φ)(x))
/// at every grid point. Coefficients are read on the closure of W and
/// extended elsewhere by nearest-point value, which makes G collapse to the
/// identity outside the closure.
pub fn commutator_step<K: Coeff>(
    h: &HomotopyMatrix<K>,
    patch_factors: &FactorList<K>,
    eta: &RingElement<K>,
    w: &GridSubset,
    w_prime: &GridSubset,
    phi: &RingElement<K>,
    opts: &CertOptions,
) -> Result<(FactorList<K>, RingElement<K>, f64)> {
    let grid = h.time_grid();
    let base = &grid.base;
    let n = h.n();
    let eta_idx = grid.column_indices(eta, "eta")?;
    let phi_idx = grid.column_indices(phi, "phi")?;
    let last = grid.t_res - 1;

    // phi must be one on the closure of W' and zero outside W
    let w_bar = closure(base.as_ref(), w);
    for &x in &closure(base.as_ref(), w_prime) {
        if phi_idx[x] != last {
            return Err(Error::Precondition {
                what: "phi must be one on the closure of W'",
                point: Some(x),
            });
        }
    }
    for x in base.active_iter() {
        if !w.contains(&x) && phi_idx[x] != 0 {
            return Err(Error::Precondition {
                what: "phi must vanish outside W",
                point: Some(x),
            });
        }
    }
    // the patch factorization must reproduce H on the closure of W
    for &x in &w_bar {
        for t in 0..grid.t_res {
            let p = grid.flat(x, t);
            let got = patch_factors.eval_product_at(p)?;
            let want = h.eval(x, t)?;
            for (g, v) in got.iter().zip(&want) {
                if g.sub(v).abs().to_f64() > opts.tol_recon {
                    return Err(Error::Precondition {
                        what: "patch factors invalid on the closure of W",
                        point: Some(p),
                    });
                }
            }
        }
    }

    let next_idx: Vec<usize> = (0..base.total_points())
        .map(|x| eta_idx[x].max(phi_idx[x]))
        .collect();

    // base values on the closure of W, nearest-extended elsewhere
    let outside: Vec<usize> = base.active_iter().filter(|x| !w_bar.contains(x)).collect();
    let nearest: BTreeMap<usize, usize> = outside
        .iter()
        .map(|&x| (x, nearest_in(base.as_ref(), &w_bar, x)))
        .collect();

    let mut bar_coeffs = Vec::with_capacity(patch_factors.len());
    let mut cur_coeffs = Vec::with_capacity(patch_factors.len());
    for f in patch_factors.iter() {
        let mut bar = vec![K::zero(); base.total_points()];
        let mut cur = vec![K::zero(); base.total_points()];
        for &x in &w_bar {
            bar[x] = f.coeff().eval_flat(grid.flat(x, eta_idx[x]))?;
            cur[x] = f.coeff().eval_flat(grid.flat(x, next_idx[x]))?;
        }
        for &x in &outside {
            let v = bar[nearest[&x]].clone();
            bar[x] = v.clone();
            cur[x] = v;
        }
        bar_coeffs.push(RingElement::grid_from_values(base, bar)?);
        cur_coeffs.push(RingElement::grid_from_values(base, cur)?);
    }

    let mut g = FactorList::empty(n);
    for (f, bar) in patch_factors.iter().zip(&bar_coeffs).rev() {
        g.push(ElementaryFactor::new(f.i(), f.j(), bar.neg())?)?;
    }
    for (f, cur) in patch_factors.iter().zip(&cur_coeffs) {
        g.push(ElementaryFactor::new(f.i(), f.j(), cur.clone())?)?;
    }

    // product(G)(x) = H(x, eta(x))^{-1} · H(x, max(eta, phi)(x)) everywhere
    let mut residual = 0.0f64;
    let mut worst = None;
    for x in base.active_iter() {
        let before = h.eval(x, eta_idx[x])?;
        let after = h.eval(x, next_idx[x])?;
        let inv = scalar_inverse(n, &before).ok_or(Error::Singular {
            stage: 1,
            point: Some(x),
        })?;
        let want = scalar_mul(n, &inv, &after);
        let got = g.eval_product_at(x)?;
        for (gv, wv) in got.iter().zip(&want) {
            let dev = gv.sub(wv).abs().to_f64();
            if dev > residual {
                residual = dev;
                worst = Some(x);
            }
        }
    }
    if residual > opts.tol_cert {
        return Err(Error::VerificationFailed {
            what: "commutator step identity",
            point: worst,
            deviation: residual,
            tol: opts.tol_cert,
        });
    }

    let eta_next = RingElement::grid_from_fn(base, |x| grid.t_value(next_idx[x]));
    Ok((g, eta_next, residual))
}

/// An explicit witness that B = A · Π product(G_i) pointwise on the grid.
#[derive(Debug, Clone)]
pub struct Certificate<K: Coeff> {
    pub a: SLMatrix<K>,
    pub b: SLMatrix<K>,
    pub steps: Vec<FactorList<K>>,
}

impl<K: Coeff> Certificate<K> {
    /// Re-multiplies the steps pointwise and returns the max residual, or
    /// an error naming the worst grid point when it exceeds `tol`.
    pub fn verify(&self, tol: f64) -> Result<f64> {
        let n = self.a.n();
        let dom = match self.a.domain()? {
            Some(d) => Some(d),
            None => match self.b.domain()? {
                Some(d) => Some(d),
                None => self.steps.iter().find_map(|s| s.domain().cloned()),
            },
        };
        let points: Vec<usize> = match &dom {
            Some(d) => d.active_iter().collect(),
            None => vec![0],
        };
        let mut residual = 0.0f64;
        let mut worst = None;
        for x in points {
            let mut acc = self.a.eval_at(x)?;
            for step in &self.steps {
                let gp = step.eval_product_at(x)?;
                acc = scalar_mul(n, &acc, &gp);
            }
            let want = self.b.eval_at(x)?;
            for (g, w) in acc.iter().zip(&want) {
                let dev = g.sub(w).abs().to_f64();
                if dev > residual {
                    residual = dev;
                    worst = dom.as_ref().map(|_| x);
                }
            }
        }
        if residual > tol {
            return Err(Error::VerificationFailed {
                what: "certificate",
                point: worst,
                deviation: residual,
                tol,
            });
        }
        Ok(residual)
    }
}

/// Diagnostics from the certificate pipeline.
#[derive(Debug, Clone, Default)]
pub struct CertificateStats {
    pub patch_count: usize,
    pub sliced_count: usize,
    pub kept_count: usize,
    pub step_residuals: Vec<f64>,
    pub step_factor_counts: Vec<usize>,
    pub certificate_residual: f64,
}

/// Full pipeline: patch cover of the homotopy, slicing, telescoped per-patch
/// lists, double cover shrink, separating functions snapped to the t-grid,
/// and the folded retraction chain from η ≡ 0 to η ≡ 1.
pub fn homotopy_certificate<K: Coeff>(
    h: &HomotopyMatrix<K>,
    opts: &CertOptions,
) -> Result<(Certificate<K>, CertificateStats)> {
    let grid = h.time_grid();
    let base = &grid.base;
    let gauss_opts = GaussOptions {
        tol_det: opts.tol_det,
        tol_recon: opts.tol_recon,
    };
    let patches: Vec<PatchFactorization<K>> =
        build_patch_cover(h.matrix(), &grid.product, opts.pivot_floor, &gauss_opts)?;
    let patch_sets: Vec<GridSubset> = patches.iter().map(|p| p.patch.clone()).collect();
    let sliced = slice_cover(&patch_sets, grid)?;

    let mut glued = Vec::with_capacity(sliced.patches.len());
    for sp in &sliced.patches {
        let lists: Vec<FactorList<K>> = sp
            .assignment
            .iter()
            .map(|&j| patches[j].factors.clone())
            .collect();
        glued.push(glue_patch(h, sp, &lists, opts.tol_recon)?);
    }

    let u_sets: Vec<GridSubset> = sliced.patches.iter().map(|p| p.columns.clone()).collect();
    let w_sets = shrink_cover(&u_sets, base)?;
    let wp_sets = shrink_cover(&w_sets, base)?;

    let active = base.active_set();
    let mut steps = Vec::new();
    let mut stats = CertificateStats {
        patch_count: patches.len(),
        sliced_count: sliced.patches.len(),
        ..Default::default()
    };
    let mut eta = RingElement::grid_from_fn(base, |_| K::zero());
    for i in 0..sliced.patches.len() {
        if wp_sets[i].is_empty() {
            // redundant patch; the remaining shrunk sets still cover
            continue;
        }
        let phi = if w_sets[i] == active {
            RingElement::grid_from_fn(base, |_| K::one())
        } else {
            let x_set: GridSubset = active.difference(&w_sets[i]).copied().collect();
            let y_set = closure(base.as_ref(), &wp_sets[i]);
            let raw = separating_function(&x_set, &y_set, base)?;
            snap_to_t_grid(&raw, grid)?
        };
        let (g, eta_next, res) =
            commutator_step(h, &glued[i], &eta, &w_sets[i], &wp_sets[i], &phi, opts)?;
        stats.step_residuals.push(res);
        stats.step_factor_counts.push(g.len());
        steps.push(g);
        eta = eta_next;
        stats.kept_count += 1;
    }
    // the chain must reach t = 1 everywhere
    let eta_vals = eta.values_on(base)?;
    for x in base.active_iter() {
        if !eta_vals[x].is_one() {
            return Err(Error::VerificationFailed {
                what: "retraction chain reaches t = 1",
                point: Some(x),
                deviation: eta_vals[x].to_f64(),
                tol: 1.0,
            });
        }
    }

    let (a, b) = h.endpoints()?;
    let cert = Certificate { a, b, steps };
    stats.certificate_residual = cert.verify(opts.tol_cert)?;
    Ok((cert, stats))
}

/// Rounds a [0,1]-valued function onto the t-grid (0 and 1 are preserved
/// exactly).
fn snap_to_t_grid<K: Coeff>(f: &RingElement<K>, grid: &TimeGrid<K>) -> Result<RingElement<K>> {
    let base = grid.base();
    let vals = f.values_on(base)?;
    let mut dense = vec![K::zero(); base.total_points()];
    for x in base.active_iter() {
        let v = vals[x].to_f64() * (grid.t_res - 1) as f64;
        let idx = (v.round() as usize).min(grid.t_res - 1);
        dense[x] = grid.t_value(idx);
    }
    RingElement::grid_from_values(base, dense)
}

/// Outcome of `contractible_factorization`.
#[derive(Debug, Clone)]
pub struct ContractibleOutcome<K: Coeff> {
    pub factors: FactorList<K>,
    pub residual: f64,
    pub stats: CertificateStats,
}

/// Complete elementary factorization of a matrix function on a full box:
/// contract along straight lines to the basepoint, certify the contraction
/// homotopy against the constant matrix, factor the constant part
/// pointwise, and concatenate.
pub fn contractible_factorization<K: Coeff>(
    a: &SLMatrix<K>,
    dom: &Arc<Domain<K>>,
    basepoint: &[usize],
    t_res: usize,
    opts: &CertOptions,
) -> Result<ContractibleOutcome<K>> {
    if dom.is_masked() {
        return Err(Error::MaskedDomain);
    }
    if basepoint.len() != dom.dim() {
        return Err(Error::IndexOutOfRange {
            index: basepoint.len(),
            bound: dom.dim(),
        });
    }
    for (axis, &g) in basepoint.iter().enumerate() {
        if g >= dom.axis(axis).res {
            return Err(Error::IndexOutOfRange {
                index: g,
                bound: dom.axis(axis).res,
            });
        }
    }
    if let Some(d) = a.domain()? {
        if !same_domain(&d, dom) {
            return Err(Error::DomainMismatch);
        }
    }
    if !a.all_smooth_class() {
        return Err(Error::KindMismatch(
            "contraction requires entries evaluable off the grid".into(),
        ));
    }
    let n = a.n();
    let x0: Vec<K> = basepoint
        .iter()
        .enumerate()
        .map(|(axis, &g)| dom.coord(axis, g))
        .collect();

    // H(x, t) = A((1-t)·x + t·x0); stays determinant-one pointwise
    let grid = TimeGrid::new(dom.clone(), t_res)?;
    let mut tables = vec![vec![K::zero(); grid.product().total_points()]; n * n];
    for x in dom.active_iter() {
        let xc = dom.point_coords(x);
        for t in 0..t_res {
            let tv = grid.t_value(t);
            let s = K::one().sub(&tv);
            let zeta: Vec<K> = xc
                .iter()
                .zip(&x0)
                .map(|(xi, oi)| s.mul(xi).add(&tv.mul(oi)))
                .collect();
            let p = grid.flat(x, t);
            for (slot, e) in tables.iter_mut().zip(a.entries()) {
                slot[p] = e.eval_coords(&zeta)?;
            }
        }
    }
    let mat = SLMatrix::from_entries(
        n,
        tables
            .into_iter()
            .map(|v| RingElement::grid_from_values(grid.product(), v))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let h = HomotopyMatrix::new(dom.clone(), t_res, mat, opts.tol_det)?;

    let (cert, stats) = homotopy_certificate(&h, opts)?;

    // A(x) = A(x0) · (Π G_i)^{-1}; factor the constant part pointwise
    let x0_flat = dom.flat_index(basepoint);
    let constant = SLMatrix::from_scalars(n, a.eval_at(x0_flat)?)?;
    let gauss_opts = GaussOptions {
        tol_det: opts.tol_det,
        tol_recon: opts.tol_recon,
    };
    let mut full = factor_pointwise(&constant, &gauss_opts)?;
    for g in cert.steps.iter().rev() {
        full = full.concat(&g.inverted())?;
    }

    let mut residual = 0.0f64;
    let mut worst = None;
    for x in dom.active_iter() {
        let got = full.eval_product_at(x)?;
        let want = a.eval_at(x)?;
        for (g, w) in got.iter().zip(&want) {
            let dev = g.sub(w).abs().to_f64();
            if dev > residual {
                residual = dev;
                worst = Some(x);
            }
        }
    }
    if residual > opts.tol_cert {
        return Err(Error::VerificationFailed {
            what: "contractible factorization",
            point: worst,
            deviation: residual,
            tol: opts.tol_cert,
        });
    }
    Ok(ContractibleOutcome {
        factors: full,
        residual,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::factor_patch;

    fn line(res: usize) -> Arc<Domain<f64>> {
        Arc::new(Domain::line(0.0f64, 1.0, res).unwrap())
    }

    fn shear_homotopy(base: &Arc<Domain<f64>>, t_res: usize) -> HomotopyMatrix<f64> {
        HomotopyMatrix::sample(base.clone(), t_res, 2, 1e-9, |x, t| {
            let xv = base.coord(0, base.multi_index(x)[0]);
            let tv = t as f64 / (t_res - 1) as f64;
            vec![1.0, tv * xv, 0.0, 1.0]
        })
        .unwrap()
    }

    fn t_band(grid: &TimeGrid<f64>, lo: usize, hi: usize) -> GridSubset {
        let mut s = GridSubset::new();
        for x in grid.base().active_iter() {
            for t in lo..=hi {
                s.insert(grid.flat(x, t));
            }
        }
        s
    }

    #[test]
    fn slice_single_set_is_one_slab() {
        let grid = TimeGrid::new(line(5), 9).unwrap();
        let all = grid.product().active_set();
        let sliced = slice_cover(&[all], &grid).unwrap();
        assert_eq!(sliced.patches.len(), 1);
        let p = &sliced.patches[0];
        assert_eq!(p.slab_count(), 1);
        assert_eq!(p.columns, grid.base().active_set());
        for bps in p.breakpoints.values() {
            assert_eq!(bps, &vec![0, 8]);
        }
    }

    #[test]
    fn slice_two_bands_puts_breakpoint_at_half() {
        // {t < 0.6} and {t > 0.4} on an 11-point t-grid
        let grid = TimeGrid::new(line(3), 11).unwrap();
        let low = t_band(&grid, 0, 5);
        let high = t_band(&grid, 5, 10);
        let sliced = slice_cover(&[low.clone(), high.clone()], &grid).unwrap();
        assert_eq!(sliced.patches.len(), 1);
        let p = &sliced.patches[0];
        assert_eq!(p.assignment, vec![0, 1]);
        for bps in p.breakpoints.values() {
            assert_eq!(bps, &vec![0, 5, 10]);
        }
        let bp = p.breakpoint_fn(1, &grid);
        for x in grid.base().active_iter() {
            assert_eq!(bp.eval_flat(x).unwrap(), 0.5);
        }
        // slab containment by scan
        let cover = [low, high];
        for (&x, bps) in &p.breakpoints {
            for k in 0..p.slab_count() {
                for t in bps[k]..=bps[k + 1] {
                    assert!(cover[p.assignment[k]].contains(&grid.flat(x, t)));
                }
            }
        }
    }

    #[test]
    fn slice_three_staggered_bands() {
        let grid = TimeGrid::new(line(3), 11).unwrap();
        let bands = [
            t_band(&grid, 0, 4),
            t_band(&grid, 3, 7),
            t_band(&grid, 6, 10),
        ];
        let sliced = slice_cover(&bands, &grid).unwrap();
        let p = &sliced.patches[0];
        assert_eq!(p.slab_count(), 3);
        for (&x, bps) in &p.breakpoints {
            assert!(bps.windows(2).all(|w| w[0] <= w[1]));
            for k in 0..3 {
                for t in bps[k]..=bps[k + 1] {
                    assert!(bands[p.assignment[k]].contains(&grid.flat(x, t)));
                }
            }
        }
    }

    #[test]
    fn slice_detects_gaps() {
        let grid = TimeGrid::new(line(3), 11).unwrap();
        let low = t_band(&grid, 0, 3);
        let high = t_band(&grid, 6, 10);
        assert!(matches!(
            slice_cover(&[low, high], &grid),
            Err(Error::NotACover { .. })
        ));
    }

    #[test]
    fn clamp_trivial_and_banded() {
        let grid = TimeGrid::new(line(3), 5).unwrap();
        let a = RingElement::grid_from_fn(grid.product(), |p| grid.product().point_coords(p)[1]);
        let zero = RingElement::scalar(0.0);
        let one = RingElement::scalar(1.0);
        let same = clamp_coefficients(&a, &zero, &one, &grid).unwrap();
        for p in grid.product().active_iter() {
            assert_eq!(same.eval_flat(p).unwrap(), a.eval_flat(p).unwrap());
        }
        // a(x,t) = t clamped into [1/4, 3/4] on a 5-point t-grid
        let lo = RingElement::scalar(0.25);
        let hi = RingElement::scalar(0.75);
        let b = clamp_coefficients(&a, &lo, &hi, &grid).unwrap();
        for x in grid.base().active_iter() {
            for t in 0..5 {
                let tv = t as f64 / 4.0;
                let want = tv.clamp(0.25, 0.75);
                assert_eq!(b.eval_flat(grid.flat(x, t)).unwrap(), want);
            }
        }
        assert!(matches!(
            clamp_coefficients(&a, &hi, &lo, &grid),
            Err(Error::Precondition { .. })
        ));
        // off-grid band bound is rejected
        let off = RingElement::scalar(0.3);
        assert!(matches!(
            clamp_coefficients(&a, &zero, &off, &grid),
            Err(Error::OffTimeGrid { .. })
        ));
    }

    #[test]
    fn clamp_with_column_dependent_band() {
        // a(x,t) = x*t with lo(x) = x/2: b(x,t) = x*max(t, x/2) pointwise
        let grid = TimeGrid::new(line(5), 9).unwrap();
        let a = RingElement::grid_from_fn(grid.product(), |p| {
            let c = grid.product().point_coords(p);
            c[0] * c[1]
        });
        let lo = RingElement::grid_from_fn(grid.base(), |x| {
            grid.base().coord(0, grid.base().multi_index(x)[0]) / 2.0
        });
        let one = RingElement::scalar(1.0);
        let b = clamp_coefficients(&a, &lo, &one, &grid).unwrap();
        for x in grid.base().active_iter() {
            let xv = grid.base().point_coords(x)[0];
            for t in 0..grid.t_res() {
                let tv = t as f64 / 8.0;
                let want = xv * tv.max(xv / 2.0);
                assert_eq!(b.eval_flat(grid.flat(x, t)).unwrap(), want);
            }
        }
    }

    #[test]
    fn glue_two_slabs_of_a_shear() {
        let base = line(7);
        let h = shear_homotopy(&base, 9);
        let grid = h.time_grid();
        // slabs split at t = 1/2, each with the evident one-factor list
        let coeff = RingElement::grid_from_fn(grid.product(), |p| {
            let c = grid.product().point_coords(p);
            c[1] * c[0]
        });
        let list =
            FactorList::from_factors(2, vec![ElementaryFactor::new(1, 2, coeff).unwrap()]).unwrap();
        let patch = SlicedPatch::<f64> {
            columns: base.active_set(),
            breakpoints: base.active_iter().map(|x| (x, vec![0, 4, 8])).collect(),
            assignment: vec![0, 0],
            _marker: std::marker::PhantomData,
        };
        let glued = glue_patch(&h, &patch, &[list.clone(), list.clone()], 1e-9).unwrap();
        assert_eq!(glued.len(), 3);
        for x in base.active_iter() {
            for t in 0..9 {
                let got = glued.eval_product_at(grid.flat(x, t)).unwrap();
                let want = h.eval(x, t).unwrap();
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-12);
                }
            }
        }
        // a slab list inconsistent with H is caught and the point reported
        let bad_coeff = RingElement::grid_from_fn(grid.product(), |p| {
            let c = grid.product().point_coords(p);
            c[1] * c[0] + 0.1
        });
        let bad =
            FactorList::from_factors(2, vec![ElementaryFactor::new(1, 2, bad_coeff).unwrap()])
                .unwrap();
        assert!(matches!(
            glue_patch(&h, &patch, &[bad, list], 1e-9),
            Err(Error::TelescopeMismatch { .. })
        ));
    }

    #[test]
    fn glue_single_slab_degenerates_to_clamp() {
        let base = line(5);
        let h = shear_homotopy(&base, 5);
        let grid = h.time_grid();
        let pf = factor_patch(
            h.matrix(),
            grid.product(),
            &grid.product().active_set(),
            1e-3,
            &Default::default(),
        )
        .unwrap();
        let patch = SlicedPatch::<f64> {
            columns: base.active_set(),
            breakpoints: base.active_iter().map(|x| (x, vec![0, 4])).collect(),
            assignment: vec![0],
            _marker: std::marker::PhantomData,
        };
        let glued = glue_patch(&h, &patch, &[pf.factors], 1e-9).unwrap();
        for x in base.active_iter() {
            for t in 0..5 {
                let got = glued.eval_product_at(grid.flat(x, t)).unwrap();
                let want = h.eval(x, t).unwrap();
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn retraction_is_pointwise_max() {
        let dom = line(11);
        let zero = RingElement::grid_from_fn(&dom, |_| 0.0);
        let one = RingElement::grid_from_fn(&dom, |_| 1.0);
        let r = retraction(&one, &zero, &dom).unwrap();
        assert!(r.is_const(&1.0));
        let eta = RingElement::grid_from_fn(&dom, |x| dom.coord(0, dom.multi_index(x)[0]));
        let phi = RingElement::grid_from_fn(&dom, |x| 1.0 - dom.coord(0, dom.multi_index(x)[0]));
        let m = retraction(&phi, &eta, &dom).unwrap();
        for x in dom.active_iter() {
            let xv = dom.point_coords(x)[0];
            assert_eq!(m.eval_flat(x).unwrap(), xv.max(1.0 - xv));
        }
        // max(0, phi) = phi
        let back = retraction(&phi, &zero, &dom).unwrap();
        for x in dom.active_iter() {
            assert_eq!(back.eval_flat(x).unwrap(), phi.eval_flat(x).unwrap());
        }
        let bad = RingElement::grid_from_fn(&dom, |_| 1.5);
        assert!(matches!(
            retraction(&bad, &zero, &dom),
            Err(Error::TimeOutOfRange { what: "phi", .. })
        ));
    }

    #[test]
    fn commutator_step_full_retraction() {
        // one patch covering everything, phi == 1: G realizes H(.,0)^{-1} H(.,1)
        let base = line(9);
        let h = shear_homotopy(&base, 9);
        let grid = h.time_grid();
        let coeff = RingElement::grid_from_fn(grid.product(), |p| {
            let c = grid.product().point_coords(p);
            c[1] * c[0]
        });
        let patch_factors =
            FactorList::from_factors(2, vec![ElementaryFactor::new(1, 2, coeff).unwrap()]).unwrap();
        let all = base.active_set();
        let eta = RingElement::grid_from_fn(&base, |_| 0.0);
        let phi = RingElement::grid_from_fn(&base, |_| 1.0);
        let (g, eta_next, res) = commutator_step(
            &h,
            &patch_factors,
            &eta,
            &all,
            &all,
            &phi,
            &Default::default(),
        )
        .unwrap();
        assert!(res < 1e-12);
        assert!(eta_next.is_const(&1.0));
        for x in base.active_iter() {
            let xv = base.point_coords(x)[0];
            let got = g.eval_product_at(x).unwrap();
            let want = [1.0, xv, 0.0, 1.0];
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commutator_step_no_retraction_is_identity() {
        let base = line(9);
        let h = shear_homotopy(&base, 9);
        let grid = h.time_grid();
        let coeff = RingElement::grid_from_fn(grid.product(), |p| {
            let c = grid.product().point_coords(p);
            c[1] * c[0]
        });
        let patch_factors =
            FactorList::from_factors(2, vec![ElementaryFactor::new(1, 2, coeff).unwrap()]).unwrap();
        let all = base.active_set();
        let eta = RingElement::grid_from_fn(&base, |_| 0.0);
        let phi = RingElement::grid_from_fn(&base, |_| 0.0);
        let empty = GridSubset::new();
        let (g, eta_next, _) = commutator_step(
            &h,
            &patch_factors,
            &eta,
            &all,
            &empty,
            &phi,
            &Default::default(),
        )
        .unwrap();
        assert!(eta_next.is_const(&0.0));
        for x in base.active_iter() {
            let got = g.eval_product_at(x).unwrap();
            for (k, v) in got.iter().enumerate() {
                let want = if k % 3 == 0 { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commutator_step_cancels_outside_the_closure() {
        let base = line(11);
        let h = shear_homotopy(&base, 11);
        let grid = h.time_grid();
        let coeff = RingElement::grid_from_fn(grid.product(), |p| {
            let c = grid.product().point_coords(p);
            c[1] * c[0]
        });
        let patch_factors =
            FactorList::from_factors(2, vec![ElementaryFactor::new(1, 2, coeff).unwrap()]).unwrap();
        let w: GridSubset = (0..=6).collect();
        let w_prime: GridSubset = (0..=4).collect();
        let x_set: GridSubset = base.active_iter().filter(|x| !w.contains(x)).collect();
        let y_set = closure(base.as_ref(), &w_prime);
        let raw = separating_function(&x_set, &y_set, &base).unwrap();
        let phi = snap_to_t_grid(&raw, grid).unwrap();
        let eta = RingElement::grid_from_fn(&base, |_| 0.0);
        let (g, eta_next, _) = commutator_step(
            &h,
            &patch_factors,
            &eta,
            &w,
            &w_prime,
            &phi,
            &Default::default(),
        )
        .unwrap();
        // identity branch where phi vanishes
        for x in base.active_iter() {
            let pv = phi.eval_flat(x).unwrap();
            let got = g.eval_product_at(x).unwrap();
            if pv == 0.0 {
                for (k, v) in got.iter().enumerate() {
                    let want = if k % 3 == 0 { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-12, "point {x}");
                }
            }
            // and the step identity everywhere
            let xv = base.point_coords(x)[0];
            let want = [1.0, eta_next.eval_flat(x).unwrap() * xv, 0.0, 1.0];
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn certificate_of_constant_homotopy_is_all_identity() {
        let base = line(9);
        let h = HomotopyMatrix::sample(base.clone(), 9, 2, 1e-9, |x, _| {
            let xv = base.coord(0, base.multi_index(x)[0]);
            vec![1.0, xv, 0.0, 1.0]
        })
        .unwrap();
        let (cert, stats) = homotopy_certificate(&h, &Default::default()).unwrap();
        assert_eq!(stats.certificate_residual, 0.0);
        for step in &cert.steps {
            for x in base.active_iter() {
                let got = step.eval_product_at(x).unwrap();
                for (k, v) in got.iter().enumerate() {
                    let want = if k % 3 == 0 { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-12);
                }
            }
        }
        cert.verify(1e-9).unwrap();
    }

    #[test]
    fn certificate_of_shear_homotopy_verifies() {
        let base = line(9);
        let h = shear_homotopy(&base, 17);
        let (cert, stats) = homotopy_certificate(&h, &Default::default()).unwrap();
        assert!(stats.certificate_residual <= 1e-9);
        let res = cert.verify(1e-9).unwrap();
        assert!(res <= 1e-9);
        // endpoints match H
        for x in base.active_iter() {
            let a = cert.a.eval_at(x).unwrap();
            let want = h.eval(x, 0).unwrap();
            assert_eq!(a, want);
        }
    }

    #[test]
    fn rational_certificate_is_exact() {
        // the pipeline stays inside the rationals (squared distances,
        // snapped breakpoints, exact pivots), so the witness is exact
        use num_rational::BigRational as Q;
        let q = |n: i64, d: i64| <Q as Coeff>::from_ratio(n, d);
        let base: Arc<Domain<Q>> = Arc::new(Domain::line(q(0, 1), q(1, 1), 9).unwrap());
        let h = HomotopyMatrix::sample(base.clone(), 9, 2, 1e-9, |x, t| {
            let xv = base.coord(0, base.multi_index(x)[0]);
            let tv = q(t as i64, 8);
            vec![q(1, 1), tv.mul(&xv), q(0, 1), q(1, 1)]
        })
        .unwrap();
        let (cert, stats) = homotopy_certificate(&h, &Default::default()).unwrap();
        assert_eq!(stats.certificate_residual, 0.0);
        // exact identity at every point, by direct rational multiplication
        for x in base.active_iter() {
            let mut acc = cert.a.eval_at(x).unwrap();
            for step in &cert.steps {
                let gp = step.eval_product_at(x).unwrap();
                acc = crate::elementary::scalar_mul(2, &acc, &gp);
            }
            assert_eq!(acc, cert.b.eval_at(x).unwrap());
        }
    }

    #[test]
    fn certificate_on_two_dimensional_base() {
        let base: Arc<Domain<f64>> = Arc::new(
            Domain::new(vec![
                crate::ring::Axis::new(0.0, 1.0, 7),
                crate::ring::Axis::new(-1.0, 1.0, 7),
            ])
            .unwrap(),
        );
        let h = HomotopyMatrix::sample(base.clone(), 9, 2, 1e-9, |p, t| {
            let c = base.point_coords(p);
            let tv = t as f64 / 8.0;
            vec![1.0, tv * (c[0] + c[1]) / 2.0, 0.0, 1.0]
        })
        .unwrap();
        let (cert, stats) = homotopy_certificate(&h, &Default::default()).unwrap();
        assert!(stats.certificate_residual <= 1e-9);
        cert.verify(1e-9).unwrap();
    }

    #[test]
    fn contractible_on_two_dimensional_box() {
        let dom: Arc<Domain<f64>> = Arc::new(
            Domain::new(vec![
                crate::ring::Axis::new(0.0, 1.0, 5),
                crate::ring::Axis::new(0.0, 1.0, 5),
            ])
            .unwrap(),
        );
        let x = RingElement::coordinate(&dom, 0).unwrap();
        let y = RingElement::coordinate(&dom, 1).unwrap();
        let p = x
            .sub(&y)
            .unwrap()
            .mul(&RingElement::scalar(0.5))
            .unwrap()
            .add(&RingElement::scalar(0.25))
            .unwrap();
        let a = SLMatrix::from_entries(
            2,
            vec![
                RingElement::one(),
                p,
                RingElement::zero(),
                RingElement::one(),
            ],
        )
        .unwrap();
        let out =
            contractible_factorization(&a, &dom, &[2, 2], 9, &Default::default()).unwrap();
        assert!(out.residual <= 1e-9);
        for pt in dom.active_iter() {
            let got = out.factors.eval_product_at(pt).unwrap();
            let want = a.eval_at(pt).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn contractible_shear_reconstructs() {
        let dom = line(9);
        let x = RingElement::coordinate(&dom, 0).unwrap();
        let a = SLMatrix::from_entries(
            2,
            vec![
                RingElement::one(),
                x,
                RingElement::zero(),
                RingElement::one(),
            ],
        )
        .unwrap();
        let out = contractible_factorization(&a, &dom, &[0], 9, &Default::default()).unwrap();
        assert!(out.residual <= 1e-9);
        for p in dom.active_iter() {
            let got = out.factors.eval_product_at(p).unwrap();
            let want = a.eval_at(p).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn contractible_constant_matrix() {
        let dom = line(5);
        let a = SLMatrix::from_scalars(2, vec![2.0, 0.5, 1.0, 0.75]).unwrap();
        let out = contractible_factorization(&a, &dom, &[2], 5, &Default::default()).unwrap();
        assert!(out.residual <= 1e-9);
    }

    #[test]
    fn certificate_on_masked_base_domain() {
        let dom = Arc::new(
            Domain::line(0.0f64, 1.0, 11)
                .unwrap()
                .with_mask((2..=8).collect())
                .unwrap(),
        );
        let h = HomotopyMatrix::sample(dom.clone(), 9, 2, 1e-9, |x, t| {
            let xv = dom.coord(0, dom.multi_index(x)[0]);
            let tv = t as f64 / 8.0;
            vec![1.0, tv * xv, 0.0, 1.0]
        })
        .unwrap();
        let (cert, stats) = homotopy_certificate(&h, &Default::default()).unwrap();
        assert!(stats.certificate_residual <= 1e-9);
        cert.verify(1e-9).unwrap();
    }

    #[test]
    fn contractible_rejects_masked_domain() {
        let dom = Arc::new(
            Domain::line(0.0f64, 1.0, 5)
                .unwrap()
                .with_mask([0usize, 1, 2].into_iter().collect())
                .unwrap(),
        );
        let a = SLMatrix::<f64>::identity(2);
        assert!(matches!(
            contractible_factorization(&a, &dom, &[0], 5, &Default::default()),
            Err(Error::MaskedDomain)
        ));
    }
}
