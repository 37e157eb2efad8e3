use super::SampledFunction1D;
use crate::error::{domain, Result};

/// `Σ |v_{i+1} − v_i|^p`.
pub fn p_variation_of_values(values: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return domain(format!("variation exponent {p} < 1"));
    }
    Ok(values.windows(2).map(|w| (w[1] - w[0]).abs().powf(p)).sum())
}

/// p-variation sum over the breakpoint partition.
pub fn p_variation(f: &SampledFunction1D, p: f64) -> Result<f64> {
    p_variation_of_values(f.values(), p)
}
