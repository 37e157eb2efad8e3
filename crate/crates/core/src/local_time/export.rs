use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LocalTimeField;
use crate::error::Result;

/// JSON sidecar written next to an exported field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct FieldMetadata {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "n")]
    pub n: usize,
    #[serde(rename = "bins")]
    pub bins: usize,
    #[serde(rename = "epsilon")]
    pub epsilon: f64,
    #[serde(rename = "seed")]
    pub seed: u64,
}

impl LocalTimeField {
    pub fn metadata(&self, seed: u64) -> FieldMetadata {
        FieldMetadata {
            h: self.hurst().value(),
            horizon: self.grid().horizon(),
            n: self.grid().steps(),
            bins: self.space().bins(),
            epsilon: self.bandwidth(),
            seed,
        }
    }

    /// Writes `(x_center, t, value, weighted_flag)` rows and a `.json` sidecar.
    pub fn export_csv(&self, path: &Path, seed: u64) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(["x_center", "t", "value", "weighted_flag"])?;
        let flag = if self.weighted() { "1" } else { "0" };
        for (i, x) in self.space().centers().iter().enumerate() {
            for (k, t) in self.grid().points().iter().enumerate() {
                w.write_record([
                    format!("{x:e}"),
                    format!("{t:e}"),
                    format!("{:e}", self.value(i, k)),
                    flag.to_string(),
                ])?;
            }
        }
        w.flush()?;
        let side = BufWriter::new(File::create(path.with_extension("json"))?);
        serde_json::to_writer_pretty(side, &self.metadata(seed))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::gaussian::{generate_paths, GeneratorTag};
    use crate::grid::TimeGrid;
    use crate::hurst::HurstIndex;
    use crate::local_time::{estimate_local_time, SpaceGrid};

    #[test]
    fn export_writes_rows_and_sidecar() {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let e = generate_paths(&grid, h, 1, 11, GeneratorTag::Circulant).unwrap();
        let p = e.path(0);
        let space = SpaceGrid::auto(&p, 0.1).unwrap();
        let f = estimate_local_time(&p, &space, 0.1, true, &h).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("field.csv");
        f.export_csv(&out, 11).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x_center,t,value,weighted_flag");
        assert_eq!(lines.len(), 1 + space.bins() * 17);
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap())
                .unwrap();
        assert_eq!(meta["H"], 0.7);
        assert_eq!(meta["n"], 16);
        assert_eq!(meta["seed"], 11);
        assert_eq!(meta["epsilon"], 0.1);
    }
}
