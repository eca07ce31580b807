//! Pivoted elementary factorization of SL(n) matrices: pointwise for scalar
//! matrices, patchwise for matrix-valued functions.
//!
//! Row swaps are realized as signed swaps c(i,j) and diagonal normalization
//! as unit pairs m(i,j;r), so every emitted factor stays elementary. A patch
//! is a set of grid points sharing one pivot sequence whose pivots stay
//! above a floor at every patch point; `build_patch_cover` grows such
//! patches greedily until they cover the grid.

use std::sync::Arc;

use crate::elementary::{factor_c, factor_m, scalar_det, ElementaryFactor, FactorList, SLMatrix};
use crate::error::{Error, Result};
use crate::ring::{Domain, GridSubset, RingElement};
use crate::scalar::Coeff;

#[derive(Debug, Clone)]
pub struct GaussOptions {
    pub tol_det: f64,
    pub tol_recon: f64,
}

impl Default for GaussOptions {
    fn default() -> Self {
        GaussOptions {
            tol_det: crate::DEFAULT_TOL_DET,
            tol_recon: crate::DEFAULT_TOL_RECON,
        }
    }
}

/// A local factorization valid on one patch of grid points.
#[derive(Debug, Clone)]
pub struct PatchFactorization<K: Coeff> {
    /// Grid points on which the pivot sequence is valid.
    pub patch: GridSubset,
    /// (stage, chosen pivot row), both one-based.
    pub pivot_sequence: Vec<(usize, usize)>,
    /// Elementary factors with function coefficients on the patch.
    pub factors: FactorList<K>,
    pub pivot_floor: f64,
}

// ---------------------------------------------------------------------------
// scalar elimination
// ---------------------------------------------------------------------------

struct ScalarMat<K> {
    n: usize,
    e: Vec<K>,
}

impl<K: Coeff> ScalarMat<K> {
    fn at(&self, r: usize, c: usize) -> &K {
        &self.e[r * self.n + c]
    }

    fn set(&mut self, r: usize, c: usize, v: K) {
        self.e[r * self.n + c] = v;
    }

    /// Left-multiplication by the matrix of c(i,k)^T-form used for swaps:
    /// row_i <- row_k, row_k <- -row_i.
    fn signed_swap(&mut self, i: usize, k: usize) {
        for c in 0..self.n {
            let ri = self.at(i, c).clone();
            let rk = self.at(k, c).clone();
            self.set(i, c, rk);
            self.set(k, c, ri.neg());
        }
    }

    /// row_i += coeff * row_j.
    fn row_op(&mut self, i: usize, j: usize, coeff: &K) {
        for c in 0..self.n {
            let add = coeff.mul(self.at(j, c));
            let v = self.at(i, c).add(&add);
            self.set(i, c, v);
        }
    }
}

/// Factorization of a scalar SL(n) matrix by partially pivoted elimination.
///
/// The identity factors as the empty list; the signed swap `[[0,1],[-1,0]]`
/// comes back as exactly the three factors of c(1,2).
pub fn factor_pointwise<K: Coeff>(a: &SLMatrix<K>, opts: &GaussOptions) -> Result<FactorList<K>> {
    if !a.all_scalar() {
        return Err(Error::KindMismatch(
            "factor_pointwise expects scalar entries".into(),
        ));
    }
    a.check_det(opts.tol_det)?;
    let n = a.n();
    let mut m = ScalarMat {
        n,
        e: a.eval_at(0)?,
    };
    let mut out = FactorList::empty(n);

    // forward pass with partial pivoting
    for k in 0..n {
        let mut best = k;
        for i in k + 1..n {
            if m.at(i, k).abs().cmp_total(&m.at(best, k).abs()) == std::cmp::Ordering::Greater {
                best = i;
            }
        }
        if m.at(best, k).is_zero() {
            return Err(Error::Singular {
                stage: k + 1,
                point: None,
            });
        }
        if best != k {
            // the op applied is the inverse of c(k,best), so the factors
            // contributed to the output are exactly factor_c(k, best)
            m.signed_swap(best, k);
            out = out.concat(&factor_c(k + 1, best + 1, n)?)?;
        }
        let u_inv = m.at(k, k).inv().expect("nonzero pivot");
        for i in k + 1..n {
            let c = m.at(i, k).mul(&u_inv).neg();
            if c.is_zero() {
                continue;
            }
            m.row_op(i, k, &c);
            out.push(ElementaryFactor::new(
                i + 1,
                k + 1,
                RingElement::Scalar(c.neg()),
            )?)?;
        }
    }
    // clear the upper triangle
    for j in (1..n).rev() {
        let u_inv = m.at(j, j).inv().expect("nonzero pivot");
        for i in (0..j).rev() {
            let c = m.at(i, j).mul(&u_inv).neg();
            if c.is_zero() {
                continue;
            }
            m.row_op(i, j, &c);
            out.push(ElementaryFactor::new(
                i + 1,
                j + 1,
                RingElement::Scalar(c.neg()),
            )?)?;
        }
    }
    // diagonal to identity via unit pairs; skip chains that collapse
    let mut running = K::one();
    for k in 1..n {
        running = running.mul(m.at(k - 1, k - 1));
        let r = running.inv().ok_or(Error::Singular {
            stage: k,
            point: None,
        })?;
        if r.is_one() {
            continue;
        }
        let chain = factor_m(k, k + 1, &RingElement::Scalar(r), n)?;
        out = out.concat(&chain.inverted())?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// patchwise elimination
// ---------------------------------------------------------------------------

struct PatchSim<K> {
    n: usize,
    points: Vec<usize>,
    mats: Vec<Vec<K>>,
}

impl<K: Coeff> PatchSim<K> {
    fn new(a: &SLMatrix<K>, points: Vec<usize>) -> Result<Self> {
        let mats = points
            .iter()
            .map(|&p| a.eval_at(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(PatchSim {
            n: a.n(),
            points,
            mats,
        })
    }

    /// (min |entry(row, col)| over patch points, attaining point).
    fn min_abs(&self, row: usize, col: usize) -> (K, usize) {
        let n = self.n;
        let mut best: Option<(K, usize)> = None;
        for (m, &p) in self.mats.iter().zip(&self.points) {
            let v = m[row * n + col].abs();
            let beat = match &best {
                Some((b, _)) => v.cmp_total(b) == std::cmp::Ordering::Less,
                None => true,
            };
            if beat {
                best = Some((v, p));
            }
        }
        best.expect("nonempty patch")
    }
}

fn choose_pivot_row<K: Coeff>(sim: &PatchSim<K>, stage: usize) -> (usize, K, usize) {
    let mut best_row = stage;
    let (mut best_min, mut best_point) = sim.min_abs(stage, stage);
    for row in stage + 1..sim.n {
        let (v, p) = sim.min_abs(row, stage);
        if v.cmp_total(&best_min) == std::cmp::Ordering::Greater {
            best_row = row;
            best_min = v;
            best_point = p;
        }
    }
    (best_row, best_min, best_point)
}

fn run_patch_elimination<K: Coeff>(
    a: &SLMatrix<K>,
    dom: &Arc<Domain<K>>,
    patch: &GridSubset,
    pivot_floor: f64,
    forced: Option<&[(usize, usize)]>,
    opts: &GaussOptions,
) -> Result<PatchFactorization<K>> {
    if patch.is_empty() {
        return Err(Error::EmptySet("patch"));
    }
    crate::ring::domain::check_subset(dom, patch)?;
    let n = a.n();
    let points: Vec<usize> = patch.iter().copied().collect();
    let mut sim = PatchSim::new(a, points.clone())?;
    for (m, &p) in sim.mats.iter().zip(&sim.points) {
        let d = scalar_det(n, m);
        let dev = d.sub(&K::one()).abs().to_f64();
        if dev > opts.tol_det {
            return Err(Error::DetNotOne {
                deviation: dev,
                point: Some(p),
            });
        }
    }

    let floor = K::from_f64(pivot_floor);
    let mut sequence: Vec<(usize, usize)> = Vec::new();
    let mut out = FactorList::empty(n);
    let zero_fill = |vals: Vec<(usize, K)>, fill: K| -> RingElement<K> {
        let mut dense = vec![fill; dom.total_points()];
        for (p, v) in vals {
            dense[p] = v;
        }
        RingElement::grid_from_values(dom, dense).expect("sized values")
    };

    for k in 0..n {
        let row = match forced {
            Some(seq) => {
                let row0 = seq[k].1 - 1;
                let (v, p) = sim.min_abs(row0, k);
                if v.cmp_total(&floor) == std::cmp::Ordering::Less || v.is_zero() {
                    return Err(Error::PivotBelowFloor {
                        stage: k + 1,
                        point: p,
                        value: v.to_f64(),
                        floor: pivot_floor,
                    });
                }
                row0
            }
            None => {
                let (row, v, p) = choose_pivot_row(&sim, k);
                if v.cmp_total(&floor) == std::cmp::Ordering::Less || v.is_zero() {
                    return Err(Error::PivotBelowFloor {
                        stage: k + 1,
                        point: p,
                        value: v.to_f64(),
                        floor: pivot_floor,
                    });
                }
                row
            }
        };
        sequence.push((k + 1, row + 1));
        if row != k {
            for m in sim.mats.iter_mut() {
                for c in 0..n {
                    let ri = m[row * n + c].clone();
                    let rk = m[k * n + c].clone();
                    m[row * n + c] = rk;
                    m[k * n + c] = ri.neg();
                }
            }
            out = out.concat(&factor_c(k + 1, row + 1, n)?)?;
        }
        for i in k + 1..n {
            let mut vals = Vec::with_capacity(sim.points.len());
            let mut all_zero = true;
            for m in &sim.mats {
                let c = m[i * n + k]
                    .mul(&m[k * n + k].inv().expect("pivot above floor"))
                    .neg();
                if !c.is_zero() {
                    all_zero = false;
                }
                vals.push(c);
            }
            if all_zero {
                continue;
            }
            for (m, c) in sim.mats.iter_mut().zip(&vals) {
                for col in 0..n {
                    let add = c.mul(&m[k * n + col]);
                    m[i * n + col] = m[i * n + col].add(&add);
                }
            }
            let coeff = zero_fill(sim.points.iter().copied().zip(vals).collect(), K::zero());
            out.push(ElementaryFactor::new(i + 1, k + 1, coeff.neg())?)?;
        }
    }
    // clear the upper triangle
    for j in (1..n).rev() {
        for i in (0..j).rev() {
            let mut vals = Vec::with_capacity(sim.points.len());
            let mut all_zero = true;
            for m in &sim.mats {
                let c = m[i * n + j]
                    .mul(&m[j * n + j].inv().expect("pivot above floor"))
                    .neg();
                if !c.is_zero() {
                    all_zero = false;
                }
                vals.push(c);
            }
            if all_zero {
                continue;
            }
            for (m, c) in sim.mats.iter_mut().zip(&vals) {
                for col in 0..n {
                    let add = c.mul(&m[j * n + col]);
                    m[i * n + col] = m[i * n + col].add(&add);
                }
            }
            let coeff = zero_fill(sim.points.iter().copied().zip(vals).collect(), K::zero());
            out.push(ElementaryFactor::new(i + 1, j + 1, coeff.neg())?)?;
        }
    }
    // diagonal normalization with function coefficients; off-patch values
    // are filled with one so the unit check of factor_m passes
    let mut running: Vec<K> = vec![K::one(); sim.points.len()];
    for k in 1..n {
        let mut vals = Vec::with_capacity(sim.points.len());
        let mut all_one = true;
        for (idx, (m, &p)) in sim.mats.iter().zip(&sim.points).enumerate() {
            running[idx] = running[idx].mul(&m[(k - 1) * n + (k - 1)]);
            let r = running[idx].inv().ok_or(Error::Singular {
                stage: k,
                point: Some(p),
            })?;
            if !r.is_one() {
                all_one = false;
            }
            vals.push(r);
        }
        if all_one {
            continue;
        }
        let r = zero_fill(sim.points.iter().copied().zip(vals).collect(), K::one());
        let chain = factor_m(k, k + 1, &r, n)?;
        out = out.concat(&chain.inverted())?;
    }

    // re-multiply on the patch
    let mut worst = 0.0f64;
    let mut worst_point = None;
    for &p in &points {
        let got = out.eval_product_at(p)?;
        let want = a.eval_at(p)?;
        for (g, w) in got.iter().zip(&want) {
            let dev = g.sub(w).abs().to_f64();
            if dev > worst {
                worst = dev;
                worst_point = Some(p);
            }
        }
    }
    if worst > opts.tol_recon {
        return Err(Error::VerificationFailed {
            what: "patch reconstruction",
            point: worst_point,
            deviation: worst,
            tol: opts.tol_recon,
        });
    }

    Ok(PatchFactorization {
        patch: patch.clone(),
        pivot_sequence: sequence,
        factors: out,
        pivot_floor,
    })
}

/// Factors a matrix function on one patch with a pivot sequence chosen
/// greedily (max over rows of the min pivot magnitude over the patch).
pub fn factor_patch<K: Coeff>(
    a: &SLMatrix<K>,
    dom: &Arc<Domain<K>>,
    patch: &GridSubset,
    pivot_floor: f64,
    opts: &GaussOptions,
) -> Result<PatchFactorization<K>> {
    run_patch_elimination(a, dom, patch, pivot_floor, None, opts)
}

/// Same as `factor_patch`, but with a prescribed pivot sequence.
pub fn factor_patch_with_sequence<K: Coeff>(
    a: &SLMatrix<K>,
    dom: &Arc<Domain<K>>,
    patch: &GridSubset,
    pivot_floor: f64,
    sequence: &[(usize, usize)],
    opts: &GaussOptions,
) -> Result<PatchFactorization<K>> {
    if sequence.len() != a.n() {
        return Err(Error::IndexOutOfRange {
            index: sequence.len(),
            bound: a.n(),
        });
    }
    run_patch_elimination(a, dom, patch, pivot_floor, Some(sequence), opts)
}

/// Greedy max-pivot sequence at a single grid point.
fn greedy_sequence_at<K: Coeff>(
    a: &SLMatrix<K>,
    point: usize,
    pivot_floor: f64,
) -> Result<Vec<(usize, usize)>> {
    let n = a.n();
    let mut m = a.eval_at(point)?;
    let mut seq = Vec::with_capacity(n);
    for k in 0..n {
        let mut best = k;
        for i in k + 1..n {
            if m[i * n + k].abs().cmp_total(&m[best * n + k].abs()) == std::cmp::Ordering::Greater {
                best = i;
            }
        }
        let v = m[best * n + k].abs();
        if v.to_f64() < pivot_floor || v.is_zero() {
            return Err(Error::PivotBelowFloor {
                stage: k + 1,
                point,
                value: v.to_f64(),
                floor: pivot_floor,
            });
        }
        seq.push((k + 1, best + 1));
        if best != k {
            for c in 0..n {
                let ri = m[best * n + c].clone();
                let rk = m[k * n + c].clone();
                m[best * n + c] = rk;
                m[k * n + c] = ri.neg();
            }
        }
        let u_inv = m[k * n + k].inv().expect("pivot above floor");
        for i in k + 1..n {
            let c = m[i * n + k].mul(&u_inv).neg();
            for col in 0..n {
                let add = c.mul(&m[k * n + col]);
                m[i * n + col] = m[i * n + col].add(&add);
            }
        }
    }
    Ok(seq)
}

/// Min pivot magnitude when running a forced sequence at one point.
fn sequence_min_pivot<K: Coeff>(
    a: &SLMatrix<K>,
    point: usize,
    seq: &[(usize, usize)],
) -> Result<K> {
    let n = a.n();
    let mut m = a.eval_at(point)?;
    let mut worst: Option<K> = None;
    for k in 0..n {
        let row = seq[k].1 - 1;
        if row != k {
            for c in 0..n {
                let ri = m[row * n + c].clone();
                let rk = m[k * n + c].clone();
                m[row * n + c] = rk;
                m[k * n + c] = ri.neg();
            }
        }
        let v = m[k * n + k].abs();
        worst = Some(match worst {
            Some(w) => K::min_val(w, v.clone()),
            None => v.clone(),
        });
        match m[k * n + k].inv() {
            Some(u_inv) => {
                for i in k + 1..n {
                    let c = m[i * n + k].mul(&u_inv).neg();
                    for col in 0..n {
                        let add = c.mul(&m[k * n + col]);
                        m[i * n + col] = m[i * n + col].add(&add);
                    }
                }
            }
            None => return Ok(K::zero()),
        }
    }
    Ok(worst.expect("n >= 1"))
}

/// Covers the active grid with patches, each carrying a factorization valid
/// on it. Patch seeds are taken in ascending flat order; each patch is the
/// full validity region of its seed's greedy pivot sequence, so patches
/// overlap freely.
pub fn build_patch_cover<K: Coeff>(
    a: &SLMatrix<K>,
    dom: &Arc<Domain<K>>,
    pivot_floor: f64,
    opts: &GaussOptions,
) -> Result<Vec<PatchFactorization<K>>> {
    let mut uncovered = dom.active_set();
    let mut out = Vec::new();
    while let Some(&seed) = uncovered.iter().next() {
        let seq = greedy_sequence_at(a, seed, pivot_floor)?;
        let mut region = GridSubset::new();
        for p in dom.active_iter() {
            let v = sequence_min_pivot(a, p, &seq)?;
            if v.to_f64() >= pivot_floor && !v.is_zero() {
                region.insert(p);
            }
        }
        debug_assert!(region.contains(&seed));
        let pf = factor_patch_with_sequence(a, dom, &region, pivot_floor, &seq, opts)?;
        for p in &region {
            uncovered.remove(p);
        }
        out.push(pf);
    }
    Ok(out)
}
