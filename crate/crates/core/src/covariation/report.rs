use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One per-path line of a residual report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub h: f64,
    pub n: usize,
    pub t: f64,
    pub lhs: f64,
    pub term1: f64,
    pub term2: f64,
    pub residual: f64,
    pub rel_error: f64,
    pub seed: u64,
    pub path_index: usize,
}

const HEADER: [&str; 11] = [
    "experiment_id",
    "H",
    "n",
    "t",
    "lhs",
    "term1",
    "term2",
    "residual",
    "rel_error",
    "seed",
    "path_index",
];

/// Per-path rows followed by an `aggregate` row of column means.
pub fn write_residual_csv(path: &Path, experiment_id: &str, rows: &[ResidualRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    write_residual_records(&mut w, &[(experiment_id, rows)])?;
    w.flush()?;
    Ok(())
}

/// Header, then for each labelled group its rows and an aggregate row.
pub fn write_residual_records<W: Write>(
    w: &mut csv::Writer<W>,
    groups: &[(&str, &[ResidualRow])],
) -> Result<()> {
    w.write_record(HEADER)?;
    let num = |x: f64| format!("{x:e}");
    for (id, rows) in groups {
        for r in *rows {
            w.write_record([
                id.to_string(),
                num(r.h),
                r.n.to_string(),
                num(r.t),
                num(r.lhs),
                num(r.term1),
                num(r.term2),
                num(r.residual),
                num(r.rel_error),
                r.seed.to_string(),
                r.path_index.to_string(),
            ])?;
        }
        if let Some(first) = rows.first() {
            let m = rows.len() as f64;
            let mean = |g: fn(&ResidualRow) -> f64| rows.iter().map(g).sum::<f64>() / m;
            w.write_record([
                id.to_string(),
                num(first.h),
                first.n.to_string(),
                num(first.t),
                num(mean(|r| r.lhs)),
                num(mean(|r| r.term1)),
                num(mean(|r| r.term2)),
                num(mean(|r| r.residual)),
                num(mean(|r| r.rel_error)),
                first.seed.to_string(),
                "aggregate".to_string(),
            ])?;
        }
    }
    Ok(())
}
