use serde::{Deserialize, Serialize};

use super::{stride_for, weight_pow};
use crate::error::{domain, Result};
use crate::gaussian::SamplePath;
use crate::hurst::HurstIndex;
use crate::integration::{young_integral_1d, young_integral_2d, RealFunction, RealFunction2};
use crate::local_time::LocalTimeField;

/// `{2^10, …, 2^16}`.
pub const DEFAULT_N_SCHEDULE: [usize; 7] = [1 << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WqcEstimate {
    pub value: f64,
    pub n_schedule: Vec<usize>,
    pub partial_sums: Vec<f64>,
    /// Independent prediction, `−∫ f dV` when a field is supplied.
    pub target: Option<f64>,
}

impl WqcEstimate {
    fn new(n_schedule: Vec<usize>, partial_sums: Vec<f64>, target: Option<f64>) -> Self {
        Self {
            value: *partial_sums.last().unwrap(),
            n_schedule,
            partial_sums,
            target,
        }
    }
}

/// `2H Σ_k k^{2H−1} (f(B_{t_{k+1}}) − f(B_{t_k}))(B_{t_{k+1}} − B_{t_k})` with
/// `t_k = kT/n`.
pub fn wqc_sum(path: &SamplePath<'_>, f: &dyn RealFunction, n: usize, h: &HurstIndex) -> Result<f64> {
    let stride = stride_for(path, n)?;
    let e = h.weight_exponent();
    let v = path.values;
    let mut f_prev = f.value(v[0]);
    let mut sum = 0.0;
    for k in 0..n {
        let b0 = v[k * stride];
        let b1 = v[(k + 1) * stride];
        let f_next = f.value(b1);
        sum += weight_pow(k, e) * (f_next - f_prev) * (b1 - b0);
        f_prev = f_next;
    }
    Ok(2.0 * h.value() * sum)
}

pub fn weighted_quadratic_covariation(
    path: &SamplePath<'_>,
    f: &dyn RealFunction,
    n_schedule: &[usize],
    h: &HurstIndex,
    field: Option<&LocalTimeField>,
) -> Result<WqcEstimate> {
    if n_schedule.is_empty() {
        return domain("empty n schedule");
    }
    let sums = n_schedule
        .iter()
        .map(|&n| wqc_sum(path, f, n, h))
        .collect::<Result<Vec<f64>>>()?;
    let target = field
        .map(|fld| young_integral_1d(f, fld, path.grid.horizon()).map(|y| -y.value))
        .transpose()?;
    Ok(WqcEstimate::new(n_schedule.to_vec(), sums, target))
}

/// `2H Σ_k k^{2H−1} (f(B_{t_{k+1}}, t_{k+1}) − f(B_{t_k}, t_k)) ΔB_k`.
pub fn wqc_time_dependent(
    path: &SamplePath<'_>,
    f: &dyn RealFunction2,
    n: usize,
    h: &HurstIndex,
    field: Option<&LocalTimeField>,
) -> Result<WqcEstimate> {
    let stride = stride_for(path, n)?;
    let e = h.weight_exponent();
    let v = path.values;
    let pts = path.grid.points();
    let mut f_prev = f.value(v[0], 0.0);
    let mut sum = 0.0;
    for k in 0..n {
        let (i0, i1) = (k * stride, (k + 1) * stride);
        let f_next = f.value(v[i1], pts[i1]);
        sum += weight_pow(k, e) * (f_next - f_prev) * (v[i1] - v[i0]);
        f_prev = f_next;
    }
    let target = match field {
        Some(fld) => Some(-young_integral_2d(f, &fld.to_sampled_2d()?)?.value),
        None => None,
    };
    Ok(WqcEstimate::new(vec![n], vec![2.0 * h.value() * sum], target))
}

/// `2H ∫_0^T ∂f/∂x(B_s, s) s^{2H−1} ds`, the limit for `f ∈ C^{1,1}`.
pub fn wqc_smooth_oracle(path: &SamplePath<'_>, f: &dyn RealFunction2, h: &HurstIndex) -> f64 {
    let e = 2.0 * h.value();
    let pts = path.grid.points();
    (0..path.grid.steps())
        .map(|j| f.d_dx(path.values[j], pts[j]) * (pts[j + 1].powf(e) - pts[j].powf(e)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{generate_paths, GeneratorTag};
    use crate::grid::TimeGrid;
    use crate::integration::{Elementary, Product2, TimeConstant};
    use approx::assert_relative_eq;

    fn setup(hv: f64, n: usize, seed: u64) -> (crate::gaussian::PathEnsemble, HurstIndex) {
        let h = HurstIndex::new(hv).unwrap();
        let grid = TimeGrid::new(1.0, n).unwrap();
        (generate_paths(&grid, h, 1, seed, GeneratorTag::Circulant).unwrap(), h)
    }

    #[test]
    fn constant_has_zero_covariation() {
        let (e, h) = setup(0.7, 1024, 1);
        let w = weighted_quadratic_covariation(
            &e.path(0),
            &Elementary::constant(3.0),
            &[64, 256, 1024],
            &h,
            None,
        )
        .unwrap();
        assert!(w.partial_sums.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn linear_in_f_per_n() {
        let (e, h) = setup(0.7, 1024, 2);
        let p = e.path(0);
        let a = Elementary::Sin { freq: 1.0 };
        let b = Elementary::monomial(1.0, 2);
        struct Mix(Elementary, Elementary);
        impl RealFunction for Mix {
            fn value(&self, x: f64) -> f64 {
                0.5 * self.0.value(x) + 4.0 * self.1.value(x)
            }
            fn is_smooth(&self) -> bool {
                true
            }
        }
        for n in [128, 1024] {
            let s = wqc_sum(&p, &Mix(a, b), n, &h).unwrap();
            let s1 = wqc_sum(&p, &a, n, &h).unwrap();
            let s2 = wqc_sum(&p, &b, n, &h).unwrap();
            assert_relative_eq!(s, 0.5 * s1 + 4.0 * s2, epsilon = 1e-12);
        }
    }

    #[test]
    fn near_brownian_index_reduces_to_plain_covariation() {
        let (e, h) = setup(0.5 + 1e-6, 1 << 12, 3);
        let p = e.path(0);
        let f = Elementary::Sin { freq: 2.0 };
        let w = wqc_sum(&p, &f, 1 << 12, &h).unwrap();
        let plain: f64 = p
            .values
            .windows(2)
            .map(|x| (f.value(x[1]) - f.value(x[0])) * (x[1] - x[0]))
            .sum();
        assert!((w - plain).abs() < 1e-3 * plain.abs(), "{w} {plain}");
    }

    #[test]
    fn time_independent_reduction() {
        let (e, h) = setup(0.7, 512, 4);
        let p = e.path(0);
        let f = Elementary::Cos { freq: 1.0 };
        let a = wqc_sum(&p, &f, 512, &h).unwrap();
        let b = wqc_time_dependent(&p, &TimeConstant(f), 512, &h, None).unwrap().value;
        assert_relative_eq!(a, b, epsilon = 1e-12);
        let oracle = wqc_smooth_oracle(&p, &Product2::new(Elementary::identity(), Elementary::constant(1.0)), &h);
        assert_relative_eq!(oracle, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn schedule_checks() {
        let (e, h) = setup(0.7, 256, 5);
        let p = e.path(0);
        let f = Elementary::identity();
        assert!(weighted_quadratic_covariation(&p, &f, &[], &h, None).is_err());
        assert!(weighted_quadratic_covariation(&p, &f, &[512], &h, None).is_err());
    }
}
