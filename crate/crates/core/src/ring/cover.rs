//! Separation and cover-shrinking utilities at grid scale.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::domain::{check_subset, erode, uncovered_point, Domain, GridSubset};
use crate::ring::RingElement;
use crate::scalar::Coeff;

/// A function valued in [0, 1] that is zero exactly on `x` and one exactly
/// on `y`, built from the ratio of squared grid distances
/// d²(·,X) / (d²(·,X) + d²(·,Y)). Squared distances keep the construction
/// exact over the rational backend.
pub fn separating_function<K: Coeff>(
    x: &GridSubset,
    y: &GridSubset,
    dom: &Arc<Domain<K>>,
) -> Result<RingElement<K>> {
    if x.is_empty() {
        return Err(Error::EmptySet("X"));
    }
    if y.is_empty() {
        return Err(Error::EmptySet("Y"));
    }
    check_subset(dom, x)?;
    check_subset(dom, y)?;
    if x.intersection(y).next().is_some() {
        return Err(Error::SetsOverlap);
    }
    let dist2_to = |s: &GridSubset, p: usize| -> K {
        let mut best: Option<K> = None;
        for &q in s {
            let d = dom.dist2(q, p);
            best = Some(match best {
                Some(b) => K::min_val(b, d),
                None => d,
            });
        }
        best.expect("nonempty set")
    };
    let mut values = vec![K::zero(); dom.total_points()];
    for p in dom.active_iter() {
        let dx = dist2_to(x, p);
        let dy = dist2_to(y, p);
        let denom = dx.add(&dy);
        // denom > 0 since X and Y are disjoint
        values[p] = dx.mul(&denom.inv().expect("disjoint sets"));
    }
    RingElement::grid_from_values(dom, values)
}

/// Shrinks each cover set by one grid step (erosion by the full neighbor
/// stencil) while keeping a cover. Erosion is the maximal valid shrink, so
/// if the eroded sets fail to cover, no one-step shrink exists.
pub fn shrink_cover<K: Coeff>(
    cover: &[GridSubset],
    dom: &Arc<Domain<K>>,
) -> Result<Vec<GridSubset>> {
    for s in cover {
        check_subset(dom, s)?;
    }
    if let Some(p) = uncovered_point(dom.as_ref(), cover) {
        return Err(Error::NotACover { point: p });
    }
    let shrunk: Vec<GridSubset> = cover.iter().map(|s| erode(dom.as_ref(), s)).collect();
    if let Some(p) = uncovered_point(dom.as_ref(), &shrunk) {
        return Err(Error::NoShrink { point: p });
    }
    Ok(shrunk)
}
