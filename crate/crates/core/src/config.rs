//! Run and sweep configuration. A config file is one JSON document; every
//! field is optional and falls back to the defaults below.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{DetrapParams, DEFAULT_BIN_RATIO};
use crate::error::invalid;
use crate::lattice::CoinBasis;

pub const DEFAULT_STEPS: usize = 10_000;
pub const DEFAULT_RECORD_EVERY: usize = 1_000;

/// Power-law fit window for post-run analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub t_min: u64,
    /// Defaults to the last recorded step.
    pub t_max: Option<u64>,
    pub bin_ratio: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            t_min: 1_000,
            t_max: None,
            bin_ratio: DEFAULT_BIN_RATIO,
        }
    }
}

/// Everything needed to reproduce one simulation and its analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub chi: f64,
    pub input: CoinBasis,
    pub start_position: i64,
    pub steps: usize,
    /// Density snapshot cadence (steps).
    pub record_every: usize,
    /// Keep every k-th phase-portrait point.
    pub portrait_every: usize,
    pub fit: FitConfig,
    pub detrap: DetrapParams,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            chi: 0.0,
            input: CoinBasis::SigmaPlus,
            start_position: 0,
            steps: DEFAULT_STEPS,
            record_every: DEFAULT_RECORD_EVERY,
            portrait_every: 1,
            fit: FitConfig::default(),
            detrap: DetrapParams::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !self.chi.is_finite() || self.chi < 0.0 {
            return Err(invalid(format!("chi must be >= 0, got {}", self.chi)));
        }
        if self.steps < 1 {
            return Err(invalid("steps must be >= 1"));
        }
        if self.record_every < 1 {
            return Err(invalid("record_every must be >= 1"));
        }
        if self.portrait_every < 1 {
            return Err(invalid("portrait_every must be >= 1"));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        load_json(path)
    }
}

/// Explicit `(min, max, count)` χ grid, endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl ChiGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Explicit χ list; takes precedence over `grid`.
    pub chi_values: Option<Vec<f64>>,
    pub grid: Option<ChiGrid>,
    /// Worker limit; 0 means one per available core.
    pub jobs: usize,
    /// Also write each point's sliding PR slopes as `slopes_<k>.csv`.
    pub dump_slopes: bool,
    /// Shared settings for every point; its `chi` is ignored.
    #[serde(flatten)]
    pub run: RunConfig,
}

impl SweepConfig {
    /// The χ values to run, validated nonempty, non-negative and strictly
    /// increasing.
    pub fn chis(&self) -> crate::Result<Vec<f64>> {
        let chis = match (&self.chi_values, &self.grid) {
            (Some(v), _) => v.clone(),
            (None, Some(g)) => g.values(),
            (None, None) => return Err(invalid("sweep needs chi_values or a grid")),
        };
        if chis.is_empty() {
            return Err(invalid("chi grid is empty"));
        }
        if chis.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(invalid("chi values must be finite and >= 0"));
        }
        if chis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("chi values must be strictly increasing"));
        }
        Ok(chis)
    }
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading config {}: {e}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("parsing config {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_uses_defaults() {
        let c: RunConfig = serde_json::from_str(
            r#"{"chi": 0.6, "input": "sigma_minus_1", "detrap": {"window": 50}}"#,
        )
        .unwrap();
        assert_eq!(c.chi, 0.6);
        assert_eq!(c.input, CoinBasis::SigmaMinus1);
        assert_eq!(c.steps, DEFAULT_STEPS);
        assert_eq!(c.detrap.window, 50);
        assert_eq!(c.detrap.sustain, 50);
    }

    #[test]
    fn run_config_round_trips() {
        let c = RunConfig {
            chi: 0.25,
            input: CoinBasis::SigmaMinus2,
            fit: FitConfig {
                t_max: Some(900),
                ..Default::default()
            },
            ..Default::default()
        };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_coin_name() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"input": "up"}"#).is_err());
    }

    #[test]
    fn sweep_grid() {
        let s = SweepConfig {
            grid: Some(ChiGrid {
                min: 0.0,
                max: 1.0,
                count: 5,
            }),
            ..Default::default()
        };
        assert_eq!(s.chis().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);

        let s: SweepConfig =
            serde_json::from_str(r#"{"chi_values": [0.1, 0.3], "steps": 500}"#).unwrap();
        assert_eq!(s.chis().unwrap(), vec![0.1, 0.3]);
        assert_eq!(s.run.steps, 500);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        for v in [vec![], vec![0.2, 0.1], vec![0.1, 0.1], vec![-0.1]] {
            let s = SweepConfig {
                chi_values: Some(v),
                ..Default::default()
            };
            assert!(s.chis().is_err());
        }
        assert!(SweepConfig::default().chis().is_err());
    }
}
