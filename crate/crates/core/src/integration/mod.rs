//! Variation of sampled functions, the one-sided mollifier, and Young
//! integrals against local time in one and two parameters.

mod function;
mod mollifier;
mod sampled;
mod variation;
mod young;

pub use function::{Elementary, Product2, RealFunction, RealFunction2, TimeConstant};
pub use mollifier::{mollify, Mollified, Mollifier, MOLLIFIER_NODES};
pub use sampled::{Interpolation, SampledFunction1D, SampledFunction2D, VariationOrders};
pub use variation::{p_variation, p_variation_of_values};
pub use young::{
    local_time_against_derivative, local_time_against_dx, young_2d_ibp_rhs, young_ibp_1d,
    young_integral_1d, young_integral_1d_levels, young_integral_2d, young_integral_2d_levels,
    YoungEstimate, YOUNG_LEVELS,
};
