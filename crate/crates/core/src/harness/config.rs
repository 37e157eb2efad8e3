use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::gaussian::GeneratorTag;
use crate::hurst::HurstIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Covariance,
    Isometry,
    Kernel,
    Nondeterminacy,
    HolderBound,
    LocaltimeMass,
    Occupation,
    Pvariation,
    YoungIbp,
    Young2d,
    Wpv,
    Wqc,
    WqcTd,
    Wick,
    Ito,
    Tanaka,
    Reversal,
    ItoTd,
}

impl ExperimentKind {
    pub const ALL: [Self; 18] = [
        Self::Covariance,
        Self::Isometry,
        Self::Kernel,
        Self::Nondeterminacy,
        Self::HolderBound,
        Self::LocaltimeMass,
        Self::Occupation,
        Self::Pvariation,
        Self::YoungIbp,
        Self::Young2d,
        Self::Wpv,
        Self::Wqc,
        Self::WqcTd,
        Self::Wick,
        Self::Ito,
        Self::Tanaka,
        Self::Reversal,
        Self::ItoTd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Covariance => "covariance",
            Self::Isometry => "isometry",
            Self::Kernel => "kernel",
            Self::Nondeterminacy => "nondeterminacy",
            Self::HolderBound => "holder_bound",
            Self::LocaltimeMass => "localtime_mass",
            Self::Occupation => "occupation",
            Self::Pvariation => "pvariation",
            Self::YoungIbp => "young_ibp",
            Self::Young2d => "young_2d",
            Self::Wpv => "wpv",
            Self::Wqc => "wqc",
            Self::WqcTd => "wqc_td",
            Self::Wick => "wick",
            Self::Ito => "ito",
            Self::Tanaka => "tanaka",
            Self::Reversal => "reversal",
            Self::ItoTd => "ito_td",
        }
    }

    /// Keys accepted in `[params]`.
    pub fn param_keys(self) -> &'static [&'static str] {
        match self {
            Self::Covariance => &["tolerance", "methods"],
            Self::Isometry => &["tolerance", "resolution"],
            Self::Kernel => &["tolerance", "quad_steps", "grid"],
            Self::Nondeterminacy => &["tolerance"],
            Self::HolderBound => &["tolerance", "alpha", "halvings", "a", "width"],
            Self::LocaltimeMass | Self::Occupation => &["tolerance", "bandwidth_c"],
            Self::Pvariation => &["tolerance", "bandwidth_c", "p_list", "levels", "weighted"],
            Self::YoungIbp => &["tolerance", "bandwidth_c", "bins"],
            Self::Young2d => &["tolerance", "bandwidth_c", "stride"],
            Self::Wpv => &["tolerance", "p_list"],
            Self::Wqc => &["tolerance", "f", "n_schedule", "bandwidth_c"],
            Self::WqcTd => &["tolerance", "f"],
            Self::Wick => &["tolerance", "f", "orders"],
            Self::Ito => &["tolerance", "f", "orders", "bandwidth_c"],
            Self::Tanaka => &["tolerance", "level", "orders"],
            Self::Reversal => &["tolerance", "f", "t", "orders", "bandwidth_c"],
            Self::ItoTd => &["tolerance", "f", "bandwidth_c", "stride"],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| FracError::Config(vec![format!("unknown experiment `{s}`")]))
    }
}

/// One experiment, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub h: f64,
    pub horizon: f64,
    pub n: usize,
    pub paths: usize,
    pub seed: u64,
    pub method: GeneratorTag,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, h: f64, n: usize, paths: usize, seed: u64) -> Self {
        Self {
            experiment,
            h,
            horizon: 1.0,
            n,
            paths,
            seed,
            method: GeneratorTag::Circulant,
            params: BTreeMap::new(),
        }
    }

    pub fn with_method(mut self, method: GeneratorTag) -> Self {
        self.method = method;
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Into<toml::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| FracError::Config(vec![e.message().to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every field and collects all problems.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if HurstIndex::new(self.h).is_err() {
            bad.push(format!("h = {} outside (0.5, 1)", self.h));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            bad.push(format!("horizon = {} must be positive", self.horizon));
        }
        if self.n == 0 {
            bad.push("n must be positive".into());
        }
        if self.paths == 0 {
            bad.push("paths must be positive".into());
        }
        let allowed = self.experiment.param_keys();
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                bad.push(format!(
                    "params.{key} is not a parameter of `{}`",
                    self.experiment
                ));
            }
        }
        if let Some(v) = self.params.get("tolerance") {
            if !v.as_float().is_some_and(|t| t > 0.0) {
                bad.push("params.tolerance must be a positive float".into());
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(FracError::Config(bad))
        }
    }

    pub fn hurst(&self) -> Result<HurstIndex> {
        HurstIndex::new(self.h)
    }

    pub fn tolerance_override(&self) -> Option<f64> {
        self.params.get("tolerance").and_then(toml::Value::as_float)
    }

    fn param_error(&self, key: &str, want: &str) -> FracError {
        FracError::Config(vec![format!("params.{key} must be {want}")])
    }

    pub fn param_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Float(x)) => Ok(*x),
            Some(toml::Value::Integer(i)) => Ok(*i as f64),
            Some(_) => Err(self.param_error(key, "a number")),
        }
    }

    pub fn param_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(self.param_error(key, "a nonnegative integer")),
        }
    }

    pub fn param_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(self.param_error(key, "a boolean")),
        }
    }

    pub fn param_str<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::String(s)) => Ok(s),
            Some(_) => Err(self.param_error(key, "a string")),
        }
    }

    pub fn param_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    _ => Err(self.param_error(key, "an array of numbers")),
                })
                .collect(),
            Some(_) => Err(self.param_error(key, "an array of numbers")),
        }
    }

    pub fn param_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) if *i > 0 => Ok(*i as usize),
                    _ => Err(self.param_error(key, "an array of positive integers")),
                })
                .collect(),
            Some(_) => Err(self.param_error(key, "an array of positive integers")),
        }
    }

    pub fn param_str_list(&self, key: &str, default: &[&str]) -> Result<Vec<String>> {
        match self.params.get(key) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| self.param_error(key, "an array of strings"))
                })
                .collect(),
            Some(_) => Err(self.param_error(key, "an array of strings")),
        }
    }

    /// File stem for this run's outputs: kind, index, size, seed and
    /// selector, with a digest of the full config to keep stems distinct.
    pub fn stem(&self) -> String {
        use std::hash::{Hash, Hasher};
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        self.to_toml_string().hash(&mut hasher);
        let sel = self
            .params
            .get("f")
            .and_then(toml::Value::as_str)
            .map(|f| format!("-{f}"))
            .unwrap_or_default();
        format!(
            "{}{}-H{}-n{}-m{}-s{}-{:08x}",
            self.experiment,
            sel,
            self.h,
            self.n,
            self.paths,
            self.seed,
            hasher.finish() as u32
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
experiment = "wqc"
h = 0.7
horizon = 1.0
n = 1024
paths = 1
seed = 42
method = "circulant"

[params]
f = "linear"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(GOOD).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Wqc);
        assert_eq!(cfg.param_str("f", "x").unwrap(), "linear");
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn lists_every_offending_field() {
        let text = GOOD
            .replace("h = 0.7", "h = 0.3")
            .replace("paths = 1", "paths = 0")
            .replace("f = \"linear\"", "f = \"linear\"\nbogus = 1");
        match ExperimentConfig::from_toml_str(&text) {
            Err(FracError::Config(v)) => {
                assert_eq!(v.len(), 3, "{v:?}");
                assert!(v.iter().any(|m| m.contains("bogus")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_top_level_key_rejected() {
        let text = format!("extra = 1\n{GOOD}");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&text),
            Err(FracError::Config(_))
        ));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
    }
}
