//! One function per experiment kind. Each returns labelled row groups,
//! gates on group statistics, and free-form flags.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{Comparison, Gate, Group};
use crate::covariation::{
    gaussian_even_moment, ito_formula_check, ito_time_dependent_check, time_reversal_check,
    time_reversal_check_2d, weighted_power_variation, weighted_quadratic_covariation,
    wick_ito_integral, wqc_smooth_oracle, wqc_sum, wqc_time_dependent, CovariationSource,
    IdentityForm, ResidualRow, TimeDependentForm, DEFAULT_N_SCHEDULE,
};
use crate::error::{FracError, Result};
use crate::gaussian::{
    deterministic_wick_variance, fbm_covariance, gamma_star_norm_sq, generate_paths,
    indicator_second_moment, local_ratio, nondeterminacy_ratio, reproducing_integral,
    GeneratorTag, PathEnsemble, SamplePath,
};
use crate::grid::TimeGrid;
use crate::hurst::HurstIndex;
use crate::integration::{
    local_time_against_derivative, local_time_against_dx, young_2d_ibp_rhs, young_ibp_1d,
    young_integral_1d, young_integral_2d, Elementary, Interpolation, Product2,
    SampledFunction1D,
};
use crate::local_time::{
    average_profiles, default_bandwidth, estimate_local_time_strided, occupation_check,
    p_variation_profile, tanaka_reconstruct, window_local_time, SpaceGrid,
    DEFAULT_BANDWIDTH_CONSTANT,
};

pub(crate) struct Outcome {
    pub groups: Vec<Group>,
    pub gates: Vec<Gate>,
    pub flags: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            groups: Vec::new(),
            gates: Vec::new(),
            flags: Vec::new(),
        }
    }

    fn push(&mut self, group: Group) -> &Group {
        self.groups.push(group);
        self.groups.last().unwrap()
    }
}

/// Default mollifier orders for sign-type integrands.
pub const DEFAULT_ORDERS: [usize; 4] = [10, 100, 1000, 10000];

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        ExperimentKind::Covariance => covariance(cfg),
        ExperimentKind::Isometry => isometry(cfg),
        ExperimentKind::Kernel => kernel(cfg),
        ExperimentKind::Nondeterminacy => nondeterminacy(cfg),
        ExperimentKind::HolderBound => holder_bound(cfg),
        ExperimentKind::LocaltimeMass => localtime_mass(cfg),
        ExperimentKind::Occupation => occupation(cfg),
        ExperimentKind::Pvariation => pvariation(cfg),
        ExperimentKind::YoungIbp => young_ibp(cfg),
        ExperimentKind::Young2d => young_2d(cfg),
        ExperimentKind::Wpv => wpv(cfg),
        ExperimentKind::Wqc => wqc(cfg),
        ExperimentKind::WqcTd => wqc_td(cfg),
        ExperimentKind::Wick => wick(cfg),
        ExperimentKind::Ito => ito(cfg),
        ExperimentKind::Tanaka => tanaka(cfg),
        ExperimentKind::Reversal => reversal(cfg),
        ExperimentKind::ItoTd => ito_td(cfg),
    }
}

// ---------------------------------------------------------------- helpers

struct RowMaker<'a> {
    cfg: &'a ExperimentConfig,
    n: usize,
    t: f64,
}

impl RowMaker<'_> {
    #[allow(clippy::too_many_arguments)]
    fn row(&self, index: usize, lhs: f64, term1: f64, term2: f64, residual: f64, rel: f64) -> ResidualRow {
        ResidualRow {
            h: self.cfg.h,
            n: self.n,
            t: self.t,
            lhs,
            term1,
            term2,
            residual,
            rel_error: rel,
            seed: self.cfg.seed,
            path_index: index,
        }
    }

    /// `residual = lhs − term1`, relative to `|term1|`.
    fn versus(&self, index: usize, lhs: f64, term1: f64, term2: f64) -> ResidualRow {
        let r = lhs - term1;
        self.row(index, lhs, term1, term2, r, r.abs() / term1.abs())
    }
}

fn maker(cfg: &ExperimentConfig) -> RowMaker<'_> {
    RowMaker {
        cfg,
        n: cfg.n,
        t: cfg.horizon,
    }
}

fn ensemble(cfg: &ExperimentConfig, steps: usize, method: GeneratorTag) -> Result<PathEnsemble> {
    let grid = TimeGrid::new(cfg.horizon, steps)?;
    generate_paths(&grid, cfg.hurst()?, cfg.paths, cfg.seed, method)
}

/// Ordered parallel map over the paths of an ensemble.
fn per_path<T: Send>(
    ens: &PathEnsemble,
    f: impl Fn(usize, SamplePath<'_>) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..ens.count())
        .into_par_iter()
        .map(|i| f(i, ens.path(i)))
        .collect()
}

fn selector_error(cfg: &ExperimentConfig, got: &str, choices: &str) -> FracError {
    FracError::Config(vec![format!(
        "params.f = `{got}` is not one of {choices} for `{}`",
        cfg.experiment
    )])
}

fn orders(cfg: &ExperimentConfig) -> Result<Vec<u32>> {
    cfg.param_usize_list("orders", &DEFAULT_ORDERS)?
        .into_iter()
        .map(|m| {
            u32::try_from(m).map_err(|_| FracError::Config(vec![format!("order {m} too large")]))
        })
        .collect()
}

fn bandwidth(cfg: &ExperimentConfig, steps: usize, h: &HurstIndex) -> Result<f64> {
    Ok(default_bandwidth(
        steps,
        h,
        cfg.param_f64("bandwidth_c", DEFAULT_BANDWIDTH_CONSTANT)?,
    ))
}

fn two_h(h: &HurstIndex, t: f64) -> f64 {
    t.powf(2.0 * h.value())
}

// ---------------------------------------------------------- gaussian core

// Index pairs on a 64-step grid, rescaled to `n`.
const COVARIANCE_PAIRS: [(usize, usize); 10] = [
    (1, 1),
    (8, 8),
    (16, 8),
    (32, 16),
    (64, 64),
    (64, 32),
    (48, 40),
    (4, 60),
    (20, 50),
    (64, 1),
];

fn covariance(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.n % 64 != 0 {
        return Err(FracError::Config(vec![
            "covariance needs n divisible by 64".into(),
        ]));
    }
    let h = cfg.hurst()?;
    let scale = cfg.n / 64;
    let mut out = Outcome::new();
    for name in cfg.param_str_list("methods", &["cholesky", "circulant"])? {
        let method: GeneratorTag = name.parse()?;
        let ens = ensemble(cfg, cfg.n, method)?;
        let pts = ens.grid().points();
        let m = ens.count() as f64;
        let mk = maker(cfg);
        let mut group = Group::new(format!("covariance/{method}"));
        for (pi, &(i, j)) in COVARIANCE_PAIRS.iter().enumerate() {
            let (i, j) = (i * scale, j * scale);
            let prods: Vec<f64> = ens.iter().map(|p| p.values[i] * p.values[j]).collect();
            let mean = prods.iter().sum::<f64>() / m;
            let var = prods.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let se = (var / m).sqrt();
            let exact = fbm_covariance(pts[i], pts[j], &h)?;
            let r = mean - exact;
            group.rows.push(mk.row(pi, mean, exact, se, r, r.abs() / se));
        }
        let g = out.push(group);
        let gate = Gate::new(&g.id, "max |z| over pairs", g.max_rel_error(), Comparison::Below, 3.0);
        out.gates.push(gate);
    }
    Ok(out)
}

fn isometry(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let res = cfg.param_usize("resolution", crate::gaussian::QUAD_RESOLUTION)?;
    let t = cfg.horizon;
    let mk = RowMaker { cfg, n: res, t };
    let tests = [
        Elementary::constant(1.0),
        Elementary::identity(),
        Elementary::monomial(1.0, 2),
    ];
    let mut iso = Group::new("isometry");
    let mut unit = Group::new("isometry/unit");
    let exact = two_h(&h, t);
    for (k, g) in tests.iter().enumerate() {
        let norm = gamma_star_norm_sq(g, t, &h, res)?;
        let var = deterministic_wick_variance(g, t, &h, res)?;
        iso.rows.push(mk.versus(k, norm, var, exact));
        if k == 0 {
            unit.rows.push(mk.versus(0, norm, exact, var));
            unit.rows.push(mk.versus(1, var, exact, norm));
        }
    }
    let mut out = Outcome::new();
    for group in [iso, unit] {
        let g = out.push(group);
        let gate = Gate::new(&g.id, "max relative error", g.max_rel_error(), Comparison::Below, 1e-3);
        out.gates.push(gate);
    }
    Ok(out)
}

fn kernel(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let qs = cfg.param_usize("quad_steps", 1 << 12)?;
    let k = cfg.param_usize("grid", 8)?;
    let pts: Vec<f64> = (1..=k).map(|i| cfg.horizon * i as f64 / k as f64).collect();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| reproducing_integral(pts[i], pts[j], &h, qs))
        .collect::<Result<Vec<f64>>>()?;
    let mk = RowMaker {
        cfg,
        n: qs,
        t: cfg.horizon,
    };
    let mut group = Group::new("kernel");
    for (idx, (&(i, j), v)) in pairs.iter().zip(values).enumerate() {
        group.rows.push(mk.versus(idx, v, fbm_covariance(pts[i], pts[j], &h)?, pts[i]));
    }
    let mut out = Outcome::new();
    let g = out.push(group);
    let gate = Gate::new(&g.id, "max relative error", g.max_rel_error(), Comparison::Below, 1e-3);
    out.gates.push(gate);
    Ok(out)
}

fn nondeterminacy(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let grid = TimeGrid::new(cfg.horizon, cfg.n)?;
    let wide = TimeGrid::new(2.0 * cfg.horizon, cfg.n)?;
    let r = nondeterminacy_ratio(&grid, &h);
    let r2 = nondeterminacy_ratio(&wide, &h);
    let mk = maker(cfg);
    let mut out = Outcome::new();

    let mut g = Group::new("nondeterminacy");
    g.rows.push(mk.row(0, r.min_ratio, r.argmin.0, r.argmin.1, r.min_ratio, 0.0));
    out.push(g);
    out.gates.push(Gate::new("nondeterminacy", "min ratio", r.min_ratio, Comparison::Above, 0.0));

    let mut g = Group::new("nondeterminacy/scaled");
    let d = (r2.min_ratio - r.min_ratio).abs();
    g.rows.push(mk.row(0, r2.min_ratio, r.min_ratio, 0.0, d, d / r.min_ratio));
    out.push(g);
    out.gates.push(Gate::new(
        "nondeterminacy/scaled",
        "relative change under time rescaling",
        d / r.min_ratio,
        Comparison::Below,
        1e-12,
    ));

    let hb = 0.5 + 1e-9;
    let pts = grid.points();
    let mut dev: f64 = 0.0;
    for (a, &s) in pts.iter().enumerate().skip(2) {
        for &q in &pts[1..a] {
            dev = dev.max((local_ratio(s, q, hb) - 1.0).abs());
        }
    }
    let mut g = Group::new("nondeterminacy/brownian");
    g.rows.push(mk.row(0, 1.0 + dev, 1.0, hb, dev, dev));
    out.push(g);
    out.gates.push(Gate::new(
        "nondeterminacy/brownian",
        "max |ratio − 1| at H = 1/2 + 1e-9",
        dev,
        Comparison::Below,
        1e-6,
    ));
    Ok(out)
}

/// Starting interval width for the halving sequence. Width 1 at t = 1 is a
/// full standard deviation, outside the small-interval regime the bound is about.
pub const HOLDER_START_WIDTH: f64 = 0.0625;

fn holder_bound(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let alpha = cfg.param_f64("alpha", 0.5)?;
    let halvings = cfg.param_usize("halvings", 6)?;
    let a = cfg.param_f64("a", 0.0)?;
    let width = cfg.param_f64("width", HOLDER_START_WIDTH)?;
    let mk = maker(cfg);
    let sequence = |id: &str, start: f64| -> Result<(Group, f64)> {
        let widths: Vec<f64> = (0..=halvings).map(|k| start * 0.5f64.powi(k as i32)).collect();
        let moments = widths
            .par_iter()
            .map(|&w| indicator_second_moment(a, a + w, cfg.horizon, &h, alpha))
            .collect::<Result<Vec<_>>>()?;
        let mut g = Group::new(id);
        let first = moments[0].bound_ratio;
        for (k, (m, w)) in moments.iter().zip(&widths).enumerate() {
            g.rows.push(mk.row(k, m.bound_ratio, m.moment, *w, m.bound_ratio - first, m.bound_ratio / first));
        }
        let head = first.max(moments[1.min(halvings)].bound_ratio);
        Ok((g, moments.last().unwrap().bound_ratio / head))
    };
    let mut out = Outcome::new();
    let (g, trend) = sequence("holder_bound", width)?;
    out.push(g);
    out.gates.push(Gate::new("holder_bound", "last ratio / max of first two", trend, Comparison::AtMost, 1.1));
    if width != 1.0 {
        // Reported for comparison: the same test started from a unit interval.
        let (g, trend) = sequence("holder_bound/unit_start", 1.0)?;
        out.push(g);
        out.gates.push(
            Gate::new("holder_bound/unit_start", "last ratio / max of first two", trend, Comparison::AtMost, 1.1)
                .ungated(),
        );
    }
    Ok(out)
}

// ------------------------------------------------------------- local time

fn localtime_mass(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let eps = bandwidth(cfg, cfg.n, &h)?;
    let masses = per_path(&ens, |_, p| {
        let space = SpaceGrid::auto(&p, eps)?;
        let w = estimate_local_time_strided(&p, &space, eps, true, &h, cfg.n)?;
        let u = estimate_local_time_strided(&p, &space, eps, false, &h, cfg.n)?;
        Ok((w.mass(1), u.mass(1)))
    })?;
    let mk = maker(cfg);
    let t = cfg.horizon;
    let mut weighted = Group::new("localtime_mass/weighted");
    let mut plain = Group::new("localtime_mass/unweighted");
    for (i, (w, u)) in masses.into_iter().enumerate() {
        weighted.rows.push(mk.versus(i, w, two_h(&h, t), eps));
        plain.rows.push(mk.versus(i, u, t, eps));
    }
    let mut out = Outcome::new();
    for group in [weighted, plain] {
        let g = out.push(group);
        let gate = Gate::new(&g.id, "relative gap of means", g.relative_gap_of_means(), Comparison::Below, 0.02);
        out.gates.push(gate);
    }
    Ok(out)
}

fn occupation(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let eps = bandwidth(cfg, cfg.n, &h)?;
    let stride = (cfg.n / 1024).max(1);
    let phi = Product2::new(Elementary::monomial(1.0, 2), Elementary::constant(1.0));
    let checks = per_path(&ens, |_, p| {
        let space = SpaceGrid::auto(&p, eps)?;
        let field = estimate_local_time_strided(&p, &space, eps, true, &h, stride)?;
        occupation_check(&p, &phi, &field)
    })?;
    let mk = maker(cfg);
    let mut g = Group::new("occupation");
    for (i, c) in checks.iter().enumerate() {
        let r = c.lhs - c.rhs;
        g.rows.push(mk.row(i, c.lhs, c.rhs, eps, r, c.relative_error()));
    }
    let mut out = Outcome::new();
    let g = out.push(g);
    let gates = [
        Gate::new(&g.id, "mean per-path relative error", g.mean_rel_error(), Comparison::Below, 0.05),
        Gate::new(&g.id, "|mean residual| / mean |lhs|", g.mean_residual_over_lhs(), Comparison::Below, 0.05).ungated(),
        Gate::new(&g.id, "max per-path relative error", g.max_rel_error(), Comparison::Below, 0.05).ungated(),
    ];
    out.gates.extend(gates);
    Ok(out)
}

fn pvariation(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let eps = bandwidth(cfg, cfg.n, &h)?;
    let p_list = cfg.param_f64_list("p_list", &[1.0, 1.8])?;
    let levels = cfg.param_usize("levels", 4)?;
    let weighted = cfg.param_bool("weighted", true)?;
    let t = cfg.horizon;
    let profiles = per_path(&ens, |_, p| {
        let space = SpaceGrid::auto(&p, eps)?;
        let field = estimate_local_time_strided(&p, &space, eps, weighted, &h, cfg.n)?;
        p_variation_profile(&field, t, &p_list, levels)
    })?;
    let avg = average_profiles(&profiles)?;
    let mk = maker(cfg);
    let mut out = Outcome::new();
    for (pi, &p) in avg.p_list.iter().enumerate() {
        let id = format!("pvariation/p={p}");
        let mut g = Group::new(&id);
        let s = &avg.sums[pi];
        for (l, (&v, &stride)) in s.iter().zip(&avg.strides).enumerate() {
            g.rows.push(mk.row(l, v, stride as f64, avg.threshold, v - s[0], v / s[0]));
        }
        out.push(g);
        let net = s.last().unwrap() / s[0];
        let floor = s.iter().copied().fold(f64::INFINITY, f64::min) / s[0];
        let violations = avg.violations(pi) as f64;
        match avg.expects_decay(pi) {
            None => {
                out.flags.push(format!(
                    "at-threshold: p = {p} equals 2H/(3H−1) = {}; nothing gated",
                    avg.threshold
                ));
                out.gates.push(Gate::new(&id, "refinement increases", violations, Comparison::AtMost, 1.0).ungated());
                out.gates.push(Gate::new(&id, "finest / coarsest", net, Comparison::Below, 1.0).ungated());
            }
            Some(true) => {
                out.gates.push(Gate::new(&id, "refinement increases", violations, Comparison::AtMost, 1.0));
                out.gates.push(Gate::new(&id, "finest / coarsest", net, Comparison::Below, 1.0));
            }
            Some(false) => {
                out.gates.push(Gate::new(&id, "min / coarsest", floor, Comparison::AtLeast, 0.5));
            }
        }
    }
    Ok(out)
}

// ------------------------------------------------------------ integration

fn step_fixture() -> Result<SampledFunction1D> {
    SampledFunction1D::new(
        vec![-0.6, -0.25, 0.0, 0.3, 0.7],
        vec![1.0, -2.0, 0.5, 3.0, -1.0],
        Interpolation::Step,
        Some(1.0),
    )
}

fn young_ibp(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let eps = bandwidth(cfg, cfg.n, &h)?;
    let bins = cfg.param_usize("bins", 512)?;
    let step = step_fixture()?;
    let smooth = Elementary::Sin { freq: 1.0 };
    let t = cfg.horizon;
    let results = per_path(&ens, |_, p| {
        let space = SpaceGrid::auto_with_bins(&p, eps, bins)?;
        let field = estimate_local_time_strided(&p, &space, eps, true, &h, cfg.n)?;
        let ys = young_integral_1d(&step, &field, t)?;
        let ibp = young_ibp_1d(&step, &field, t)?;
        let ym = young_integral_1d(&smooth, &field, t)?;
        let quad = local_time_against_derivative(&smooth, &field, t)?;
        let gaps = ym.gaps();
        Ok((ys.value, ibp, ym.value, quad, gaps))
    })?;
    let mk = maker(cfg);
    let mut sg = Group::new("young_ibp/step");
    let mut mg = Group::new("young_ibp/smooth");
    let mut cauchy_paths = 0usize;
    for (i, (ys, ibp, ym, quad, gaps)) in results.iter().enumerate() {
        let r = ys - ibp;
        sg.rows.push(mk.row(i, *ys, *ibp, 0.0, r, r.abs()));
        let cauchy = final_gaps_shrink(gaps);
        cauchy_paths += usize::from(cauchy);
        mg.rows.push(mk.versus(i, *ym, *quad, f64::from(u8::from(cauchy))));
    }
    // Per-path gaps carry O(1) relative noise; their path mean shrinks with the stride.
    let levels = results[0].4.len();
    let mean_gaps: Vec<f64> = (0..levels)
        .map(|l| results.iter().map(|r| r.4[l]).sum::<f64>() / results.len() as f64)
        .collect();
    let mut tg = Group::new("young_ibp/smooth/trace");
    for (l, &g) in mean_gaps.iter().enumerate() {
        let prev = if l == 0 { g } else { mean_gaps[l - 1] };
        tg.rows.push(mk.row(l, g, prev, 0.0, g - prev, g / prev));
    }
    let mut out = Outcome::new();
    let g = out.push(sg);
    let gate = Gate::new(&g.id, "max |young − ibp|", g.max_abs_residual(), Comparison::Below, 1e-10);
    out.gates.push(gate);
    let g = out.push(mg);
    let gate = Gate::new(&g.id, "relative gap of means", g.relative_gap_of_means(), Comparison::Below, 0.01);
    out.gates.push(gate);
    out.push(tg);
    out.gates.push(Gate::new(
        "young_ibp/smooth/trace",
        "mean |gap| shrinks over the final three levels",
        f64::from(u8::from(final_gaps_shrink(&mean_gaps))),
        Comparison::AtLeast,
        1.0,
    ));
    out.gates.push(
        Gate::new(
            "young_ibp/smooth",
            "fraction of paths whose own gaps shrink",
            cauchy_paths as f64 / results.len() as f64,
            Comparison::AtLeast,
            1.0,
        )
        .ungated(),
    );
    Ok(out)
}

/// `|level L − level L+1|` decreases across the final three levels.
fn final_gaps_shrink(gaps: &[f64]) -> bool {
    gaps.len() >= 2 && gaps[gaps.len() - 1] < gaps[gaps.len() - 2]
}

fn young_2d(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let eps = bandwidth(cfg, cfg.n, &h)?;
    let stride = cfg.param_usize("stride", (cfg.n / 1024).max(1))?;
    let big_f = Product2::new(Elementary::Sin { freq: 1.0 }, Elementary::Cos { freq: 1.0 });
    let results = per_path(&ens, |_, p| {
        let space = SpaceGrid::auto(&p, eps)?;
        let field = estimate_local_time_strided(&p, &space, eps, true, &h, stride)?;
        let lhs = young_integral_2d(&big_f, &field.to_sampled_2d()?)?.value;
        let ibp = young_2d_ibp_rhs(&big_f, &field)?;
        let c11 = local_time_against_dx(&big_f, &field)?;
        Ok((lhs, ibp, c11))
    })?;
    let mk = RowMaker {
        cfg,
        n: cfg.n / stride,
        t: cfg.horizon,
    };
    let mut ibp = Group::new("young_2d/ibp");
    let mut c11 = Group::new("young_2d/c11");
    for (i, &(l, r, c)) in results.iter().enumerate() {
        ibp.rows.push(mk.versus(i, l, r, c));
        c11.rows.push(mk.versus(i, l, c, r));
    }
    let mut out = Outcome::new();
    for group in [ibp, c11] {
        let g = out.push(group);
        let gate = Gate::new(&g.id, "relative gap of means", g.relative_gap_of_means(), Comparison::Below, 0.05);
        out.gates.push(gate);
    }
    Ok(out)
}

// ------------------------------------------------------------ covariation

fn wpv(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let ps = cfg.param_usize_list("p_list", &[1, 2])?;
    let one = Elementary::constant(1.0);
    let mk = maker(cfg);
    let mut out = Outcome::new();
    let t_2h = two_h(&h, cfg.horizon);
    for &p in &ps {
        let p32 = p as u32;
        let res = per_path(&ens, |_, path| weighted_power_variation(&path, &one, p32, cfg.n, &h))?;
        let id = format!("wpv/p={p}");
        let mut g = Group::new(&id);
        for (i, r) in res.iter().enumerate() {
            g.rows.push(mk.versus(i, r.sum, r.target, 2.0 * h.value() * r.target));
        }
        let g = out.push(g);
        let gate = Gate::new(&id, "relative gap of means", g.relative_gap_of_means(), Comparison::Below, 0.05);
        out.gates.push(gate);
        if p == 1 {
            let scaled = 2.0 * h.value() * res[0].target;
            out.gates.push(Gate::new(
                &id,
                "|2H·target − t^{2H}| / t^{2H}",
                (scaled - t_2h).abs() / t_2h,
                Comparison::Below,
                1e-12,
            ));
        }
    }
    out.gates.push(Gate::new(
        &format!("wpv/p={}", ps[0]),
        "|μ₄ − 3|",
        (gaussian_even_moment(2) - 3.0).abs(),
        Comparison::AtMost,
        0.0,
    ));
    Ok(out)
}

fn wqc(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let selector = cfg.param_str("f", "linear")?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let mk = maker(cfg);
    let mut out = Outcome::new();
    let t = cfg.horizon;
    match selector {
        "linear" => {
            let default: Vec<usize> = DEFAULT_N_SCHEDULE
                .iter()
                .copied()
                .filter(|&m| m <= cfg.n && cfg.n % m == 0)
                .chain(std::iter::once(cfg.n))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let schedule = cfg.param_usize_list("n_schedule", &default)?;
            let f = Elementary::identity();
            let est = per_path(&ens, |_, p| weighted_quadratic_covariation(&p, &f, &schedule, &h, None))?;
            let target = two_h(&h, t);
            let mut g = Group::new("wqc/linear");
            for (i, e) in est.iter().enumerate() {
                g.rows.push(mk.versus(i, e.value, target, 0.0));
            }
            let g = out.push(g);
            let gate = Gate::new(&g.id, "relative gap of means", g.relative_gap_of_means(), Comparison::Below, 0.05);
            out.gates.push(gate);
            let mut s = Group::new("wqc/linear/schedule");
            for (k, (&n, &v)) in est[0].n_schedule.iter().zip(&est[0].partial_sums).enumerate() {
                let mut row = mk.versus(k, v, target, n as f64);
                row.n = n;
                s.rows.push(row);
            }
            out.push(s);
        }
        "sign" => {
            let eps = bandwidth(cfg, cfg.n, &h)?;
            let f = Elementary::sign_at(0.0);
            let res = per_path(&ens, |_, p| {
                let v = wqc_sum(&p, &f, cfg.n, &h)?;
                let lt = *window_local_time(&p, 0.0, eps, true, &h)?.last().unwrap();
                let space = SpaceGrid::auto(&p, eps)?;
                let field = estimate_local_time_strided(&p, &space, eps, true, &h, cfg.n)?;
                let young = -young_integral_1d(&f, &field, t)?.value;
                Ok((v, 2.0 * lt, young))
            })?;
            let mut g = Group::new("wqc/sign");
            for (i, &(v, lt2, young)) in res.iter().enumerate() {
                g.rows.push(mk.versus(i, v, lt2, young));
            }
            let g = out.push(g);
            let gate = Gate::new(&g.id, "relative gap of means", g.relative_gap_of_means(), Comparison::Below, 0.10);
            out.gates.push(gate);
        }
        other => return Err(selector_error(cfg, other, "linear, sign")),
    }
    Ok(out)
}

fn wqc_td(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let selector = cfg.param_str("f", "all")?;
    let which: Vec<&str> = match selector {
        "all" => vec!["x", "s", "sin_cos"],
        "x" | "s" | "sin_cos" => vec![selector],
        other => return Err(selector_error(cfg, other, "x, s, sin_cos, all")),
    };
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let mk = maker(cfg);
    let mut out = Outcome::new();
    for name in which {
        let f = match name {
            "x" => Product2::new(Elementary::identity(), Elementary::constant(1.0)),
            "s" => Product2::new(Elementary::constant(1.0), Elementary::identity()),
            _ => Product2::new(Elementary::Sin { freq: 1.0 }, Elementary::Cos { freq: 1.0 }),
        };
        let res = per_path(&ens, |_, p| {
            let v = wqc_time_dependent(&p, &f, cfg.n, &h, None)?.value;
            Ok((v, wqc_smooth_oracle(&p, &f, &h)))
        })?;
        let id = format!("wqc_td/{name}");
        let mut g = Group::new(&id);
        for (i, &(v, oracle)) in res.iter().enumerate() {
            if name == "s" {
                g.rows.push(mk.row(i, v, 0.0, oracle, v, v.abs()));
            } else {
                g.rows.push(mk.versus(i, v, oracle, two_h(&h, cfg.horizon)));
            }
        }
        let g = out.push(g);
        let gate = if name == "s" {
            Gate::new(&id, "|mean| / standard error", g.residual_z(), Comparison::Below, 3.0)
        } else {
            Gate::new(&id, "relative gap of means", g.relative_gap_of_means(), Comparison::Below, 0.05)
        };
        out.gates.push(gate);
    }
    Ok(out)
}

fn wick(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let selector = cfg.param_str("f", "all")?;
    let which: Vec<&str> = match selector {
        "all" => vec!["linear", "sign"],
        "linear" | "sign" => vec![selector],
        other => return Err(selector_error(cfg, other, "linear, sign, all")),
    };
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let ord = orders(cfg)?;
    let mk = maker(cfg);
    let t_2h = two_h(&h, cfg.horizon);
    let mut out = Outcome::new();
    for name in which {
        if name == "linear" {
            let f = Elementary::identity();
            let res = per_path(&ens, |_, p| {
                let v = wick_ito_integral(&p, &f, &h, &[])?.value;
                Ok((v, 0.5 * (p.terminal().powi(2) - t_2h)))
            })?;
            let mut g = Group::new("wick/linear");
            for (i, &(v, exact)) in res.iter().enumerate() {
                g.rows.push(mk.versus(i, v, exact, 0.0));
            }
            let g = out.push(g);
            let gate = Gate::new(&g.id, "|mean residual| / mean |term1|", g.mean_residual_over_term1(), Comparison::Below, 0.03);
            out.gates.push(gate);
        } else {
            let f = Elementary::sign_at(0.0);
            let traces = per_path(&ens, |_, p| Ok(wick_ito_integral(&p, &f, &h, &ord)?.trace))?;
            let m = traces.len() as f64;
            let mean: Vec<f64> = (0..ord.len())
                .map(|l| traces.iter().map(|tr| tr[l]).sum::<f64>() / m)
                .collect();
            // A divergence integral has mean zero; check it at the finest order.
            let mut z = Group::new("wick/sign");
            for (i, tr) in traces.iter().enumerate() {
                let v = *tr.last().unwrap();
                z.rows.push(mk.row(i, v, 0.0, f64::from(*ord.last().unwrap()), v, v.abs()));
            }
            let zg = out.push(z);
            let gate = Gate::new(&zg.id, "|mean| / standard error", zg.residual_z(), Comparison::Below, 3.0);
            out.gates.push(gate);
            let mut g = Group::new("wick/sign/trace");
            for (l, (&v, &o)) in mean.iter().zip(&ord).enumerate() {
                let prev = if l == 0 { v } else { mean[l - 1] };
                g.rows.push(mk.row(l, v, prev, f64::from(o), v - prev, 0.0));
            }
            out.push(g);
            if mean.len() >= 3 {
                // Diagnostic only: at fixed n the order limit and the mesh limit do not commute.
                let first = (mean[1] - mean[0]).abs();
                let last = (mean[mean.len() - 1] - mean[mean.len() - 2]).abs();
                out.gates.push(
                    Gate::new(
                        "wick/sign/trace",
                        "last gap / first gap of the mean trace",
                        last / first,
                        Comparison::Below,
                        0.25,
                    )
                    .ungated(),
                );
            }
        }
    }
    Ok(out)
}

fn ito(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let selector = cfg.param_str("f", "quadratic")?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let mk = maker(cfg);
    let ord = orders(cfg)?;
    let eps = bandwidth(cfg, cfg.n, &h)?;
    let n = cfg.n;
    let reports = match selector {
        "quadratic" => per_path(&ens, |_, p| {
            ito_formula_check(
                &p,
                &Elementary::monomial(0.5, 2),
                &Elementary::identity(),
                &h,
                IdentityForm::Covariation { n },
                &[],
            )
        })?,
        "tanaka" => per_path(&ens, |_, p| {
            ito_formula_check(
                &p,
                &Elementary::abs_at(0.0),
                &Elementary::sign_at(0.0),
                &h,
                IdentityForm::Window { bandwidth: eps },
                &ord,
            )
        })?,
        "abs_above" => per_path(&ens, |_, p| {
            let a = p.range().1 + 1.0;
            ito_formula_check(
                &p,
                &Elementary::abs_at(a),
                &Elementary::sign_at(a),
                &h,
                IdentityForm::Covariation { n },
                &ord,
            )
        })?,
        other => return Err(selector_error(cfg, other, "quadratic, tanaka, abs_above")),
    };
    let id = format!("ito/{selector}");
    let mut g = Group::new(&id);
    for (i, r) in reports.iter().enumerate() {
        g.rows.push(mk.row(i, r.lhs, r.stochastic_term, r.correction_term, r.residual, r.relative_error()));
    }
    let mut out = Outcome::new();
    let g = out.push(g);
    let gate = match selector {
        "quadratic" => Gate::new(&id, "|mean residual| / mean |lhs|", g.mean_residual_over_lhs(), Comparison::Below, 0.03),
        "tanaka" => Gate::new(&id, "|mean residual| / mean local time", g.mean_residual_over_term2(), Comparison::Below, 0.15),
        _ => Gate::new(&id, "max |residual|", g.max_abs_residual(), Comparison::Below, 1e-10),
    };
    out.gates.push(gate);
    Ok(out)
}

fn tanaka(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let level = cfg.param_f64("level", 0.0)?;
    let ord = orders(cfg)?;
    let series = per_path(&ens, |_, p| tanaka_reconstruct(&p, level, &h, &ord))?;
    let mk = maker(cfg);
    let mut g = Group::new("tanaka");
    let mut worst_drop: f64 = 0.0;
    for (i, s) in series.iter().enumerate() {
        g.rows.push(mk.versus(i, s.terminal(), s.terminal_window(), s.max_decrease()));
        worst_drop = worst_drop.max(s.max_decrease() / s.terminal_window().max(f64::MIN_POSITIVE));
    }
    let mut out = Outcome::new();
    let g = out.push(g);
    let gate = Gate::new(&g.id, "relative gap of means", g.relative_gap_of_means(), Comparison::Below, 0.15);
    out.gates.push(gate);
    out.gates.push(
        Gate::new("tanaka", "largest drop / terminal window value", worst_drop, Comparison::Below, 0.15).ungated(),
    );
    Ok(out)
}

fn reversal(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let selector = cfg.param_str("f", "linear")?;
    let t = cfg.param_f64("t", cfg.horizon)?;
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let ord = orders(cfg)?;
    let eps = bandwidth(cfg, cfg.n, &h)?;
    let checks = match selector {
        "one" => per_path(&ens, |_, p| {
            time_reversal_check(&p, &Elementary::constant(1.0), t, &h, &[], CovariationSource::Discrete)
        })?,
        "linear" => per_path(&ens, |_, p| {
            time_reversal_check(&p, &Elementary::identity(), t, &h, &[], CovariationSource::Discrete)
        })?,
        "sign" => per_path(&ens, |_, p| {
            time_reversal_check(
                &p,
                &Elementary::sign_at(0.0),
                t,
                &h,
                &ord,
                CovariationSource::Window { bandwidth: eps },
            )
        })?,
        "xs" => per_path(&ens, |_, p| {
            time_reversal_check_2d(&p, &Product2::new(Elementary::identity(), Elementary::identity()), t, &h)
        })?,
        other => return Err(selector_error(cfg, other, "one, linear, sign, xs")),
    };
    let mk = RowMaker { cfg, n: cfg.n, t };
    let id = format!("reversal/{selector}");
    let mut g = Group::new(&id);
    for (i, c) in checks.iter().enumerate() {
        let scale = if selector == "sign" {
            c.covariation_term
        } else {
            c.lhs.abs() + c.rhs.abs()
        };
        g.rows.push(mk.row(i, c.lhs, c.rhs, scale, c.residual(), c.relative_error()));
    }
    let mut out = Outcome::new();
    let g = out.push(g);
    let gate = match selector {
        "one" => Gate::new(&id, "max |lhs − rhs|", g.max_abs_residual(), Comparison::Below, 1e-10),
        "sign" => Gate::new(&id, "|mean residual| / mean |2·local time|", g.mean_residual_over_term2(), Comparison::Below, 0.15),
        _ => Gate::new(&id, "mean per-path |lhs − rhs| / (|lhs| + |rhs|)", g.mean_rel_error(), Comparison::Below, 0.05),
    };
    out.gates.push(gate);
    Ok(out)
}

fn ito_td(cfg: &ExperimentConfig) -> Result<Outcome> {
    let h = cfg.hurst()?;
    let selector = cfg.param_str("f", "xs")?;
    let big_f = match selector {
        "xs" => Product2::new(Elementary::identity(), Elementary::identity()),
        "x2s" => Product2::new(Elementary::monomial(1.0, 2), Elementary::identity()),
        "s" => Product2::new(Elementary::constant(1.0), Elementary::identity()),
        other => return Err(selector_error(cfg, other, "xs, x2s, s")),
    };
    let ens = ensemble(cfg, cfg.n, cfg.method)?;
    let eps = bandwidth(cfg, cfg.n, &h)?;
    let stride = cfg.param_usize("stride", (cfg.n / 4096).max(1))?;
    let res = per_path(&ens, |_, p| {
        let space = SpaceGrid::auto(&p, eps)?;
        let field = estimate_local_time_strided(&p, &space, eps, true, &h, stride)?;
        let lt = ito_time_dependent_check(&p, &big_f, &h, TimeDependentForm::LocalTime(&field))?;
        let smooth = ito_time_dependent_check(&p, &big_f, &h, TimeDependentForm::Smooth)?;
        Ok((lt, smooth))
    })?;
    let mk = maker(cfg);
    let id = format!("ito_td/{selector}");
    let mut g = Group::new(&id);
    let mut cmp = Group::new(format!("{id}/smooth"));
    for (i, (lt, sm)) in res.iter().enumerate() {
        g.rows.push(mk.row(
            i,
            lt.lhs,
            lt.stochastic_term + lt.drift_term,
            lt.correction_term,
            lt.residual,
            lt.relative_error(),
        ));
        cmp.rows.push(mk.versus(i, lt.correction_term, sm.correction_term, sm.residual));
    }
    let mut out = Outcome::new();
    let g = out.push(g);
    let gate = if selector == "s" {
        Gate::new(&id, "max |residual|", g.max_abs_residual(), Comparison::Below, 1e-8)
    } else {
        Gate::new(&id, "|mean residual| / mean |lhs|", g.mean_residual_over_lhs(), Comparison::Below, 0.05)
    };
    out.gates.push(gate);
    let c = out.push(cmp);
    if selector == "x2s" {
        let gate = Gate::new(&c.id, "relative gap of mean corrections", c.relative_gap_of_means(), Comparison::Below, 0.05);
        out.gates.push(gate);
    }
    Ok(out)
}
