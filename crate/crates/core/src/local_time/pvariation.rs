use serde::{Deserialize, Serialize};

use super::LocalTimeField;
use crate::error::{domain, FracError, Result};

/// Sums `Σ_i |V(a_{i+1}, t) − V(a_i, t)|^p` over dyadically refined
/// sub-grids of the field's bin centers, coarsest level first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PVariationProfile {
    pub t: f64,
    /// `2H/(3H−1)`.
    pub threshold: f64,
    pub p_list: Vec<f64>,
    /// Center stride per level; the last level uses every center.
    pub strides: Vec<usize>,
    /// `sums[p_index][level]`.
    pub sums: Vec<Vec<f64>>,
}

const AT_THRESHOLD_TOL: f64 = 1e-9;

impl PVariationProfile {
    /// `p` sits on the critical exponent, where nothing is gated.
    pub fn at_threshold(&self, pi: usize) -> bool {
        (self.p_list[pi] - self.threshold).abs() < AT_THRESHOLD_TOL
    }

    /// Whether decay to zero is expected: `p` strictly above the threshold.
    pub fn expects_decay(&self, pi: usize) -> Option<bool> {
        if self.at_threshold(pi) {
            None
        } else {
            Some(self.p_list[pi] > self.threshold)
        }
    }

    /// Number of levels where the sum grows under refinement.
    pub fn violations(&self, pi: usize) -> usize {
        self.sums[pi].windows(2).filter(|w| w[1] > w[0]).count()
    }

    /// Monotone decrease allowing one violation, and a net decrease overall.
    pub fn decays(&self, pi: usize) -> bool {
        let s = &self.sums[pi];
        self.violations(pi) <= 1 && s.last() < s.first()
    }

    /// No level drops below half the coarsest sum.
    pub fn retains_half(&self, pi: usize) -> bool {
        let s = &self.sums[pi];
        s.iter().all(|&v| v >= 0.5 * s[0])
    }
}

pub fn p_variation_profile(
    field: &LocalTimeField,
    t: f64,
    p_list: &[f64],
    levels: usize,
) -> Result<PVariationProfile> {
    if let Some(&p) = p_list.iter().find(|&&p| !(p >= 1.0)) {
        return domain(format!("variation exponent {p} < 1"));
    }
    if levels == 0 {
        return domain("at least one refinement level required");
    }
    let coarsest = 1usize << (levels - 1);
    let bins = field.space().bins();
    if bins % coarsest != 0 || bins / coarsest < 2 {
        return Err(FracError::Domain(format!(
            "{bins} bins cannot be coarsened {levels} dyadic levels"
        )));
    }
    let k = field.time_index(t)?;
    let column = field.column(k);
    let strides: Vec<usize> = (0..levels).map(|l| coarsest >> l).collect();
    let sums = p_list
        .iter()
        .map(|&p| {
            strides
                .iter()
                .map(|&s| {
                    let sub: Vec<f64> = column.iter().step_by(s).copied().collect();
                    sub.windows(2).map(|w| (w[1] - w[0]).abs().powf(p)).sum()
                })
                .collect()
        })
        .collect();
    Ok(PVariationProfile {
        t,
        threshold: field.hurst().variation_threshold(),
        p_list: p_list.to_vec(),
        strides,
        sums,
    })
}

/// Mean of profiles sharing `t`, the exponent list and the level structure.
pub fn average_profiles(profiles: &[PVariationProfile]) -> Result<PVariationProfile> {
    let Some(first) = profiles.first() else {
        return domain("no profiles to average");
    };
    if profiles
        .iter()
        .any(|p| p.p_list != first.p_list || p.strides != first.strides || p.t != first.t)
    {
        return domain("profiles differ in exponents, levels or time");
    }
    let n = profiles.len() as f64;
    let mut out = first.clone();
    for (pi, row) in out.sums.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = profiles.iter().map(|p| p.sums[pi][l]).sum::<f64>() / n;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{generate_paths, GeneratorTag};
    use crate::grid::TimeGrid;
    use crate::hurst::HurstIndex;
    use crate::local_time::{estimate_local_time, SpaceGrid};

    fn field(seed: u64) -> LocalTimeField {
        let h = HurstIndex::new(0.75).unwrap();
        let grid = TimeGrid::new(1.0, 1 << 10).unwrap();
        let e = generate_paths(&grid, h, 1, seed, GeneratorTag::Circulant).unwrap();
        let p = e.path(0);
        let space = SpaceGrid::auto(&p, 0.02).unwrap();
        estimate_local_time(&p, &space, 0.02, true, &h).unwrap()
    }

    #[test]
    fn zero_time_column_gives_zero_sums() {
        let f = field(1);
        let prof = p_variation_profile(&f, 0.0, &[1.0, 1.8], 3).unwrap();
        assert!(prof.sums.iter().flatten().all(|&s| s == 0.0));
    }

    #[test]
    fn threshold_and_flags() {
        let f = field(2);
        let prof = p_variation_profile(&f, 1.0, &[1.0, 1.2, 1.8], 3).unwrap();
        assert!((prof.threshold - 1.2).abs() < 1e-12);
        assert!(prof.at_threshold(1));
        assert_eq!(prof.expects_decay(1), None);
        assert_eq!(prof.expects_decay(0), Some(false));
        assert_eq!(prof.expects_decay(2), Some(true));
        assert_eq!(prof.strides, vec![4, 2, 1]);
    }

    #[test]
    fn p_one_sum_is_nondecreasing_under_refinement() {
        // the triangle inequality on nested partitions
        let f = field(3);
        let prof = p_variation_profile(&f, 1.0, &[1.0], 4).unwrap();
        for w in prof.sums[0].windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn rejects_small_p_and_deep_levels() {
        let f = field(4);
        assert!(p_variation_profile(&f, 1.0, &[0.5], 2).is_err());
        assert!(p_variation_profile(&f, 1.0, &[1.0], 10).is_err());
    }

    #[test]
    fn averaging_is_elementwise() {
        let a = p_variation_profile(&field(5), 1.0, &[1.5], 2).unwrap();
        let b = p_variation_profile(&field(6), 1.0, &[1.5], 2).unwrap();
        let m = average_profiles(&[a.clone(), b.clone()]).unwrap();
        for l in 0..2 {
            assert!((m.sums[0][l] - 0.5 * (a.sums[0][l] + b.sums[0][l])).abs() < 1e-15);
        }
        assert!(average_profiles(&[]).is_err());
    }
}
