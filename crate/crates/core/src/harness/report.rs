use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::covariation::ResidualRow;
use crate::error::Result;

/// Rows sharing one sub-check label, written under that `experiment_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub id: String,
    pub rows: Vec<ResidualRow>,
}

impl Group {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            rows: Vec::new(),
        }
    }

    fn column(&self, g: fn(&ResidualRow) -> f64) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(g)
    }

    fn mean_of(&self, g: fn(&ResidualRow) -> f64) -> f64 {
        self.column(g).sum::<f64>() / self.rows.len() as f64
    }

    pub fn mean_lhs(&self) -> f64 {
        self.mean_of(|r| r.lhs)
    }

    pub fn mean_term1(&self) -> f64 {
        self.mean_of(|r| r.term1)
    }

    pub fn mean_residual(&self) -> f64 {
        self.mean_of(|r| r.residual)
    }

    /// Standard error of the residual mean.
    pub fn residual_std_error(&self) -> f64 {
        let m = self.rows.len();
        if m < 2 {
            return 0.0;
        }
        let mean = self.mean_residual();
        let var = self.column(|r| r.residual).map(|x| (x - mean).powi(2)).sum::<f64>()
            / (m - 1) as f64;
        (var / m as f64).sqrt()
    }

    pub fn max_rel_error(&self) -> f64 {
        self.column(|r| r.rel_error).fold(0.0, f64::max)
    }

    pub fn mean_rel_error(&self) -> f64 {
        self.column(|r| r.rel_error).sum::<f64>() / self.rows.len() as f64
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.column(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    /// `|mean residual| / mean |lhs|`.
    pub fn mean_residual_over_lhs(&self) -> f64 {
        self.mean_residual().abs() / self.mean_of(|r| r.lhs.abs())
    }

    /// `|mean residual| / mean |term2|`.
    pub fn mean_residual_over_term2(&self) -> f64 {
        self.mean_residual().abs() / self.mean_of(|r| r.term2.abs())
    }

    /// `|mean residual| / mean |term1|`.
    pub fn mean_residual_over_term1(&self) -> f64 {
        self.mean_residual().abs() / self.mean_of(|r| r.term1.abs())
    }

    /// `|mean residual| / standard error`.
    pub fn residual_z(&self) -> f64 {
        self.mean_residual().abs() / self.residual_std_error()
    }

    /// `|mean lhs − mean term1| / |mean term1|`.
    pub fn relative_gap_of_means(&self) -> f64 {
        (self.mean_lhs() - self.mean_term1()).abs() / self.mean_term1().abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below,
    AtMost,
    Above,
    AtLeast,
}

impl Comparison {
    fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Self::Below => value < tolerance,
            Self::AtMost => value <= tolerance,
            Self::Above => value > tolerance,
            Self::AtLeast => value >= tolerance,
        }
    }
}

/// A pass/fail check on a statistic of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub group: String,
    pub statistic: String,
    pub value: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    /// Ungated checks are reported but never fail the run.
    pub gated: bool,
    pub pass: bool,
}

impl Gate {
    pub fn new(
        group: &str,
        statistic: &str,
        value: f64,
        comparison: Comparison,
        tolerance: f64,
    ) -> Self {
        Self {
            group: group.to_string(),
            statistic: statistic.to_string(),
            value,
            comparison,
            tolerance,
            gated: true,
            pass: comparison.holds(value, tolerance),
        }
    }

    pub fn ungated(mut self) -> Self {
        self.gated = false;
        self
    }

    fn retolerate(&mut self, tolerance: f64) {
        self.tolerance = tolerance;
        self.pass = self.comparison.holds(self.value, tolerance);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std_error: f64,
    pub pass: bool,
    pub tolerance_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub groups: Vec<Group>,
    pub gates: Vec<Gate>,
    pub flags: Vec<String>,
    pub aggregate: Aggregate,
    /// Set when a tolerance was overridden in the config.
    pub non_standard: bool,
    pub wall_time_s: f64,
}

impl Report {
    pub(crate) fn assemble(
        config: ExperimentConfig,
        groups: Vec<Group>,
        mut gates: Vec<Gate>,
        flags: Vec<String>,
        wall_time_s: f64,
    ) -> Self {
        let override_tol = config.tolerance_override();
        if let Some(t) = override_tol {
            for g in gates.iter_mut().filter(|g| g.gated) {
                g.retolerate(t);
            }
        }
        let primary = &groups[0];
        let tolerance_used = gates
            .iter()
            .find(|g| g.gated)
            .map_or(0.0, |g| g.tolerance);
        let aggregate = Aggregate {
            mean: primary.mean_lhs(),
            std_error: primary.residual_std_error(),
            pass: gates.iter().all(|g| g.pass || !g.gated),
            tolerance_used,
        };
        Self {
            config,
            groups,
            gates,
            flags,
            aggregate,
            non_standard: override_tol.is_some(),
            wall_time_s,
        }
    }

    pub fn pass(&self) -> bool {
        self.aggregate.pass
    }

    pub fn group(&self, id: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.id == id)
    }

    /// One line per gate.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let cmp = match g.comparison {
                Comparison::Below => "<",
                Comparison::AtMost => "<=",
                Comparison::Above => ">",
                Comparison::AtLeast => ">=",
            };
            out.push_str(&format!(
                "  [{}] {} {}: {:.4e} {} {:.4e}{}\n",
                if !g.gated {
                    "info"
                } else if g.pass {
                    "pass"
                } else {
                    "FAIL"
                },
                g.group,
                g.statistic,
                g.value,
                cmp,
                g.tolerance,
                if g.gated { "" } else { " (not gated)" }
            ));
        }
        for f in &self.flags {
            out.push_str(&format!("  flag: {f}\n"));
        }
        out
    }

    /// CSV bytes: every group's rows followed by its aggregate row.
    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        crate::covariation::write_residual_records(&mut w, &self.groups_as_slices())?;
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    fn groups_as_slices(&self) -> Vec<(&str, &[ResidualRow])> {
        self.groups
            .iter()
            .map(|g| (g.id.as_str(), g.rows.as_slice()))
            .collect()
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let stem = self.config.stem();
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        File::create(&csv_path)?.write_all(&self.csv_bytes()?)?;
        let mut jw = BufWriter::new(File::create(&json_path)?);
        serde_json::to_writer_pretty(&mut jw, self)?;
        jw.flush()?;
        Ok((csv_path, json_path))
    }

    pub fn load(json_path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(
            File::open(json_path)?,
        ))?)
    }
}
