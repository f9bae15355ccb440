//! JSON run configuration for the command-line tool.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::measure::{InitialData, Piece};
use crate::potential::SpreadMode;
use crate::solution::linspace;
use crate::verify::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Undamped,
    Damped,
    Scaled,
}

/// Evenly spaced points or an explicit list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform { lo: f64, hi: f64, n: usize },
    Points(Vec<f64>),
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            GridSpec::Uniform { lo, hi, n } => {
                if !(lo < hi) || *n < 2 {
                    return Err(Error::Config(format!(
                        "grid needs lo < hi and n >= 2, got lo = {lo}, hi = {hi}, n = {n}"
                    )));
                }
                linspace(*lo, *hi, *n)
            }
            GridSpec::Points(p) => p.clone(),
        };
        if pts.is_empty() || pts.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grid must be nonempty and finite".into()));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub xs: GridSpec,
    pub ts: Vec<f64>,
    /// Cells of the grid seeding measure extraction.
    #[serde(default = "default_measure_cells")]
    pub measure_cells: usize,
}

fn default_measure_cells() -> usize {
    256
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub ts: Vec<f64>,
    #[serde(default = "default_n_per_block")]
    pub n_per_block: usize,
    /// Comparison points; defaults to 512 points over the reachable hull.
    #[serde(default)]
    pub xs: Option<GridSpec>,
    /// Fail (exit 1) if the sup gap off jump points exceeds this.
    #[serde(default)]
    pub sup_tolerance: Option<f64>,
}

fn default_n_per_block() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub taus: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    #[serde(default)]
    pub zero_relaxation: Option<StudySpec>,
    #[serde(default)]
    pub vanishing_damping: Option<StudySpec>,
    #[serde(default = "default_limit_grid")]
    pub grid_points: usize,
}

fn default_limit_grid() -> usize {
    4096
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Oleinik,
    WeakResidual,
    InitialTrace,
    Monotonicity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "all_checks")]
    pub checks: Vec<CheckName>,
    /// Run on the built-in reference configurations in both modes instead
    /// of the configured data.
    #[serde(default)]
    pub golden: bool,
    #[serde(default = "default_verify_ts")]
    pub ts: Vec<f64>,
    #[serde(default = "default_oleinik_points")]
    pub grid_points: usize,
    #[serde(default = "default_trace_ts")]
    pub trace_ts: Vec<f64>,
    #[serde(default = "default_resolution")]
    pub base_resolution: usize,
    #[serde(default = "default_doublings")]
    pub doublings: usize,
    #[serde(default)]
    pub phi: Option<TestFunction>,
    #[serde(default)]
    pub psi: Option<TestFunction>,
    #[serde(default = "default_pairs")]
    pub monotonicity_pairs: usize,
    /// Test hook: adds `c·x` to every sampled velocity in the Oleinik check.
    #[serde(default)]
    pub corrupt_velocity: Option<f64>,
}

fn all_checks() -> Vec<CheckName> {
    vec![
        CheckName::Oleinik,
        CheckName::WeakResidual,
        CheckName::InitialTrace,
        CheckName::Monotonicity,
    ]
}

fn default_verify_ts() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_oleinik_points() -> usize {
    512
}

fn default_trace_ts() -> Vec<f64> {
    vec![0.1, 0.01, 0.001]
}

fn default_resolution() -> usize {
    128
}

fn default_doublings() -> usize {
    4
}

fn default_pairs() -> usize {
    1000
}

impl Default for VerifySection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub initial: InitialSpec,
    pub mode: ModeName,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solve: Option<SolveSection>,
    #[serde(default)]
    pub oracle: Option<OracleSection>,
    #[serde(default)]
    pub limits: Option<LimitsSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.spread_mode()?;
        Ok(cfg)
    }

    pub fn data(&self) -> Result<InitialData> {
        InitialData::new(self.initial.pieces.clone())
    }

    pub fn spread_mode(&self) -> Result<SpreadMode> {
        match (self.mode, self.tau) {
            (ModeName::Undamped, None) => Ok(SpreadMode::Undamped),
            (ModeName::Undamped, Some(_)) => Err(Error::Config("field `tau` must be omitted when mode is undamped".into())),
            (_, None) => Err(Error::Config("field `tau` is required unless mode is undamped".into())),
            (ModeName::Damped, Some(tau)) => SpreadMode::damped(tau),
            (ModeName::Scaled, Some(tau)) => SpreadMode::scaled(tau),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"initial":{"pieces":[{"kind":"atom","x":0,"mass":1,"v":1}]},"mode":"damped","tau":2}"#;

    #[test]
    fn parses_minimal() {
        let cfg = RunConfig::from_json(BASE).unwrap();
        assert_eq!(cfg.spread_mode().unwrap(), SpreadMode::damped(2.0).unwrap());
        assert_eq!(cfg.data().unwrap().pieces().len(), 1);
        assert_eq!(VerifySection::default().checks.len(), 4);
    }

    #[test]
    fn tau_iff_damped() {
        let bad = BASE.replace(r#","tau":2"#, "");
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = BASE.replace("damped", "undamped");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let err = RunConfig::from_json(r#"{"initial":{"pieces":[]}}"#).unwrap_err();
        assert!(err.to_string().contains("mode"), "{err}");
        let err = RunConfig::from_json(&BASE.replace("\"mass\":1", "\"mas\":1")).unwrap_err();
        assert!(err.to_string().contains("mass"), "{err}");
    }

    #[test]
    fn grids() {
        let g: GridSpec = serde_json::from_str(r#"{"lo":0,"hi":1,"n":3}"#).unwrap();
        assert_eq!(g.points().unwrap(), vec![0.0, 0.5, 1.0]);
        let g: GridSpec = serde_json::from_str("[1, 2]").unwrap();
        assert_eq!(g.points().unwrap(), vec![1.0, 2.0]);
        let g: GridSpec = serde_json::from_str("[]").unwrap();
        assert!(g.points().is_err());
    }
}
