use super::LocalTimeField;
use crate::error::{domain, Result};
use crate::gaussian::SamplePath;
use crate::integration::RealFunction2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationCheck {
    /// `∫ φ(B_s, s) w(s) ds` along the path.
    pub lhs: f64,
    /// `∫ dx ∫ φ(x, s) V(x, ds)` against the field increments.
    pub rhs: f64,
}

impl OccupationCheck {
    pub fn relative_error(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs.abs()
    }
}

/// Both sides of the occupation formula for the field's weighting, up to
/// the field's final time.
///
/// The time side uses the same left-point sampling as the estimator; the
/// space side sums `φ(x_i, t_k)·(V[i][k+1] − V[i][k])·w` over the field.
pub fn occupation_check(
    path: &SamplePath<'_>,
    phi: &dyn RealFunction2,
    field: &LocalTimeField,
) -> Result<OccupationCheck> {
    let (lo, hi) = path.range();
    let horizon = path.grid.horizon();
    if let Some(((x0, x1), (t0, t1))) = phi.domain() {
        let tol = 1e-12;
        if x0 > lo + tol || x1 < hi - tol || t0 > tol || t1 < horizon - tol {
            return domain(format!(
                "φ on [{x0}, {x1}]×[{t0}, {t1}] does not cover the path range [{lo}, {hi}]×[0, {horizon}]"
            ));
        }
    }
    if (field.grid().horizon() - horizon).abs() > 1e-12 * horizon {
        return domain("field and path horizons differ");
    }
    let h = field.hurst();
    let dt = path.grid.dt();
    let lhs: f64 = path
        .values
        .iter()
        .zip(path.grid.points())
        .take(path.grid.steps())
        .map(|(&b, &s)| {
            let w = if field.weighted() { h.time_weight(s) } else { 1.0 };
            phi.value(b, s) * w * dt
        })
        .sum();

    let m = field.grid().steps();
    let tk = field.grid().points();
    let mut rhs = 0.0;
    for (i, &x) in field.space().centers().iter().enumerate() {
        for k in 0..m {
            let inc = field.value(i, k + 1) - field.value(i, k);
            if inc != 0.0 {
                rhs += phi.value(x, tk[k]) * inc;
            }
        }
    }
    Ok(OccupationCheck {
        lhs,
        rhs: rhs * field.space().width(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{generate_paths, GeneratorTag};
    use crate::grid::TimeGrid;
    use crate::hurst::HurstIndex;
    use crate::integration::{Elementary, Interpolation, Product2, SampledFunction2D};
    use crate::local_time::{default_bandwidth, estimate_local_time, SpaceGrid};

    fn setup(seed: u64) -> (crate::gaussian::PathEnsemble, HurstIndex) {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = TimeGrid::new(1.0, 1 << 12).unwrap();
        (generate_paths(&grid, h, 1, seed, GeneratorTag::Circulant).unwrap(), h)
    }

    #[test]
    fn constant_phi_gives_weight_integral() {
        let (e, h) = setup(8);
        let p = e.path(0);
        let eps = default_bandwidth(1 << 12, &h, 1.0);
        let space = SpaceGrid::auto(&p, eps).unwrap();
        let f = estimate_local_time(&p, &space, eps, true, &h).unwrap();
        let one = Product2::new(Elementary::constant(1.0), Elementary::constant(1.0));
        let c = occupation_check(&p, &one, &f).unwrap();
        // left-point Riemann sum of 2H s^{2H-1} on [0,1]
        assert!((c.lhs - 1.0).abs() < 1e-3, "{}", c.lhs);
        assert!((c.rhs - f.mass(f.grid().steps())).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_phi_gives_nonnegative_sides() {
        let (e, h) = setup(9);
        let p = e.path(0);
        let space = SpaceGrid::auto(&p, 0.02).unwrap();
        let f = estimate_local_time(&p, &space, 0.02, false, &h).unwrap();
        let sq = Product2::new(Elementary::monomial(1.0, 2), Elementary::constant(1.0));
        let c = occupation_check(&p, &sq, &f).unwrap();
        assert!(c.lhs >= 0.0 && c.rhs >= 0.0);
    }

    #[test]
    fn phi_must_cover_path() {
        let (e, h) = setup(10);
        let p = e.path(0);
        let space = SpaceGrid::auto(&p, 0.02).unwrap();
        let f = estimate_local_time(&p, &space, 0.02, true, &h).unwrap();
        let narrow = SampledFunction2D::new(
            vec![-1e-3, 1e-3],
            vec![0.0, 1.0],
            vec![1.0; 4],
            Interpolation::Linear,
            Interpolation::Linear,
            None,
        )
        .unwrap();
        assert!(occupation_check(&p, &narrow, &f).is_err());
    }
}
