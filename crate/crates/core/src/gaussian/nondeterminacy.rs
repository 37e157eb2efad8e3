use crate::grid::TimeGrid;
use crate::hurst::HurstIndex;

use super::covariance_unchecked;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondeterminacyRatio {
    pub min_ratio: f64,
    /// `(s, r)` with `s > r` attaining the minimum.
    pub argmin: (f64, f64),
}

/// `(s^{2H} r^{2H} − μ²) / ((s−r)^{2H} r^{2H})` with `μ = E[B_s B_r]`.
pub fn local_ratio(s: f64, r: f64, h: f64) -> f64 {
    let e = 2.0 * h;
    let mu = covariance_unchecked(s, r, h);
    let rs = r.powf(e);
    (s.powf(e) * rs - mu * mu) / ((s - r).powf(e) * rs)
}

/// Minimum of [`local_ratio`] over all grid pairs `s > r > 0`.
pub fn nondeterminacy_ratio(grid: &TimeGrid, h: &HurstIndex) -> NondeterminacyRatio {
    let pts = &grid.points()[1..];
    let mut best = NondeterminacyRatio {
        min_ratio: f64::INFINITY,
        argmin: (f64::NAN, f64::NAN),
    };
    for (i, &s) in pts.iter().enumerate() {
        for &r in &pts[..i] {
            let q = local_ratio(s, r, h.value());
            if q < best.min_ratio {
                best = NondeterminacyRatio {
                    min_ratio: q,
                    argmin: (s, r),
                };
            }
        }
    }
    best
}
