//! Declarative experiment configs, seeded runs, gated reports, and the
//! default acceptance suite.

mod config;
mod experiments;
mod report;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{DEFAULT_ORDERS, HOLDER_START_WIDTH};
pub use report::{Aggregate, Comparison, Gate, Group, Report};

use crate::error::{domain, FracError, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "FRACLAB_THREADS";

/// Validates, runs and times one experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let out = experiments::run(config)?;
    if out.groups.is_empty() {
        return Err(FracError::Contract(format!(
            "experiment {} produced no rows",
            config.experiment
        )));
    }
    Ok(Report::assemble(
        config.clone(),
        out.groups,
        out.gates,
        out.flags,
        start.elapsed().as_secs_f64(),
    ))
}

/// Builds the global worker pool from `FRACLAB_THREADS` if set.
/// Results never depend on the worker count.
pub fn configure_threads() -> Result<usize> {
    let requested = match std::env::var(THREADS_VAR) {
        Ok(v) => Some(v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
            FracError::Config(vec![format!("{THREADS_VAR} = `{v}` is not a positive integer")])
        })?),
        Err(_) => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = requested {
        builder = builder.num_threads(n);
    }
    // A second call finds the pool already built; that is fine.
    let _ = builder.build_global();
    Ok(rayon::current_num_threads())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub value: f64,
    pub target: f64,
    pub error: f64,
    /// Error over the previous row's error; `None` on the first row.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Every one of the last three ratios (or all of them, if fewer) is below one.
    pub monotone: bool,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "value", "target", "error", "ratio"])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                format!("{:e}", r.value),
                format!("{:e}", r.target),
                format!("{:e}", r.error),
                r.ratio.map_or(String::new(), |x| format!("{x:e}")),
            ])?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Tabulates the primary group of reports that differ only in `n`.
/// Value is the mean `lhs`, target the mean `term1`.
pub fn convergence_table(reports: &[Report]) -> Result<ConvergenceTable> {
    let Some(first) = reports.first() else {
        return domain("convergence table needs at least one report");
    };
    let mut key = first.config.clone();
    for r in &reports[1..] {
        key.n = r.config.n;
        if key != r.config {
            return domain(format!(
                "reports {} and {} differ beyond n",
                first.config.stem(),
                r.config.stem()
            ));
        }
    }
    let mut sorted: Vec<&Report> = reports.iter().collect();
    sorted.sort_by_key(|r| r.config.n);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(sorted.len());
    for r in sorted {
        let g = &r.groups[0];
        let (value, target) = (g.mean_lhs(), g.mean_term1());
        let error = (value - target).abs();
        let ratio = rows.last().map(|p| error / p.error);
        rows.push(ConvergenceRow {
            n: r.config.n,
            value,
            target,
            error,
            ratio,
        });
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    let monotone = tail.iter().all(|&q| q < 1.0);
    Ok(ConvergenceTable { rows, monotone })
}

/// One numbered acceptance criterion and the runs that decide it.
#[derive(Debug, Clone)]
pub struct Criterion {
    pub number: u32,
    pub title: &'static str,
    pub configs: Vec<ExperimentConfig>,
}

const N14: usize = 1 << 14;
const N16: usize = 1 << 16;

fn seed(criterion: u32, k: u64) -> u64 {
    0x5eed_0000 + 100 * u64::from(criterion) + k
}

/// The default acceptance suite, criteria 1 to 14. Determinism (the
/// fifteenth) is checked by re-running these configs.
pub fn acceptance_suite() -> Vec<Criterion> {
    use ExperimentKind as K;
    let c = |kind, h, n, paths, criterion, k| ExperimentConfig::new(kind, h, n, paths, seed(criterion, k));
    vec![
        Criterion {
            number: 1,
            title: "covariance law",
            configs: [0.6, 0.75, 0.9]
                .iter()
                .enumerate()
                .map(|(k, &h)| c(K::Covariance, h, 64, 5000, 1, k as u64))
                .collect(),
        },
        Criterion {
            number: 2,
            title: "isometry",
            configs: [0.6, 0.75, 0.9]
                .iter()
                .map(|&h| c(K::Isometry, h, 1, 1, 2, 0).with_param("resolution", 4096_i64))
                .collect(),
        },
        Criterion {
            number: 3,
            title: "reproducing kernel",
            configs: vec![c(K::Kernel, 0.7, 1, 1, 3, 0)
                .with_param("quad_steps", 4096_i64)
                .with_param("grid", 8_i64)],
        },
        Criterion {
            number: 4,
            title: "nondeterminacy",
            configs: [0.6, 0.75, 0.9]
                .iter()
                .map(|&h| c(K::Nondeterminacy, h, 256, 1, 4, 0))
                .collect(),
        },
        Criterion {
            number: 5,
            title: "Hölder bound",
            configs: vec![c(K::HolderBound, 0.75, 1, 1, 5, 0)
                .with_param("alpha", 0.5)
                .with_param("halvings", 6_i64)],
        },
        Criterion {
            number: 6,
            title: "local-time mass",
            configs: vec![c(K::LocaltimeMass, 0.7, N14, 20, 6, 0)],
        },
        Criterion {
            number: 7,
            title: "occupation formula",
            configs: vec![c(K::Occupation, 0.7, N14, 20, 7, 0)],
        },
        Criterion {
            number: 8,
            title: "p-variation dichotomy",
            configs: vec![c(K::Pvariation, 0.75, N14, 20, 8, 0)
                .with_param("p_list", vec![1.0, 1.8])
                .with_param("levels", 4_i64)],
        },
        Criterion {
            number: 9,
            title: "Young integration by parts",
            configs: vec![c(K::YoungIbp, 0.7, N14, 20, 9, 0)],
        },
        Criterion {
            number: 10,
            title: "weighted quadratic covariation",
            configs: vec![
                c(K::Wqc, 0.7, N16, 1, 10, 0).with_param("f", "linear"),
                c(K::Wqc, 0.7, N16, 100, 10, 1).with_param("f", "sign"),
            ],
        },
        Criterion {
            number: 11,
            title: "weighted power variation",
            configs: vec![c(K::Wpv, 0.7, N16, 1, 11, 0).with_param("p_list", vec![1_i64, 2])],
        },
        Criterion {
            number: 12,
            title: "Itô and Tanaka residuals",
            configs: vec![
                c(K::Wick, 0.7, N16, 1, 12, 0).with_param("f", "linear"),
                c(K::Ito, 0.7, N16, 50, 12, 1).with_param("f", "quadratic"),
                c(K::Ito, 0.7, N16, 100, 12, 2).with_param("f", "tanaka"),
                c(K::Ito, 0.7, N16, 5, 12, 3).with_param("f", "abs_above"),
                c(K::Tanaka, 0.7, N14, 50, 12, 4),
                c(K::Wick, 0.7, N16, 100, 12, 5).with_param("f", "sign"),
            ],
        },
        Criterion {
            number: 13,
            title: "time reversal",
            configs: vec![
                c(K::Reversal, 0.7, N16, 5, 13, 0).with_param("f", "one"),
                c(K::Reversal, 0.7, N16, 50, 13, 1).with_param("f", "linear"),
                c(K::Reversal, 0.7, N16, 100, 13, 2).with_param("f", "sign"),
                c(K::Reversal, 0.7, N16, 50, 13, 3).with_param("f", "xs"),
            ],
        },
        Criterion {
            number: 14,
            title: "time-dependent suite",
            configs: vec![
                c(K::ItoTd, 0.7, N16, 50, 14, 0).with_param("f", "xs"),
                c(K::ItoTd, 0.7, N16, 50, 14, 1).with_param("f", "x2s"),
                c(K::Young2d, 0.7, N14, 1, 14, 2),
                c(K::WqcTd, 0.7, N16, 100, 14, 3).with_param("f", "all"),
            ],
        },
    ]
}

/// Runs every config of one criterion.
pub fn run_criterion(criterion: &Criterion) -> Result<Vec<Report>> {
    criterion.configs.iter().map(run_experiment).collect()
}
