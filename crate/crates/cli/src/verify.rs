//! Independent certificate verification.
//!
//! Re-multiplies the steps with its own matrix loops — not the factor-list
//! product used by the producing pipeline — and compares against B at every
//! grid point.

use transvect::{Coeff, Error};

use crate::certfile::CertDoc;
use crate::value::CoeffCodec;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub residual: f64,
    pub worst_point: Option<usize>,
    pub points_checked: usize,
    pub step_count: usize,
    pub factor_count: usize,
}

/// Applies e(i,j;r) on the right of a flat row-major matrix in place.
fn apply_factor<K: Coeff>(n: usize, acc: &mut [K], i: usize, j: usize, r: &K) {
    if r.is_zero() {
        return;
    }
    let (ci, cj) = (i - 1, j - 1);
    for row in 0..n {
        let add = acc[row * n + ci].mul(r);
        acc[row * n + cj] = acc[row * n + cj].add(&add);
    }
}

pub fn verify_certificate<K: CoeffCodec>(
    doc: &CertDoc<K>,
    tol: f64,
) -> Result<VerifyOutcome, CliError> {
    let n = doc.n;
    let points: Vec<usize> = match &doc.domain {
        Some(d) => d.active_iter().collect(),
        None => vec![0],
    };
    let factor_count = doc.steps.iter().map(|s| s.len()).sum();
    let mut residual = 0.0f64;
    let mut worst_point = None;
    for &p in &points {
        // start from A(p) and fold every factor of every step
        let mut acc = doc.a.eval_at(p).map_err(CliError::Math)?;
        for step in &doc.steps {
            for f in step.iter() {
                let r = f.coeff().eval_flat(p).map_err(CliError::Math)?;
                apply_factor(n, &mut acc, f.i(), f.j(), &r);
            }
        }
        let want = doc.b.eval_at(p).map_err(CliError::Math)?;
        for (g, w) in acc.iter().zip(&want) {
            let dev = g.sub(w).abs().to_f64();
            if dev > residual {
                residual = dev;
                worst_point = doc.domain.as_ref().map(|_| p);
            }
        }
    }
    if residual > tol {
        return Err(CliError::Math(Error::VerificationFailed {
            what: "certificate re-multiplication",
            point: worst_point,
            deviation: residual,
            tol,
        }));
    }
    Ok(VerifyOutcome {
        residual,
        worst_point,
        points_checked: points.len(),
        step_count: doc.steps.len(),
        factor_count,
    })
}
