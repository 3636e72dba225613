use std::path::{Path, PathBuf};

use serde::Deserialize;

use ht_core::bounds::{DEFAULT_A, DEFAULT_C_TV};
use ht_core::regularization::Phantom;
use ht_core::spectral::{DEFAULT_HEAD_LEN, DEFAULT_RANK_TOL, DEFAULT_TAIL_LEN};
use ht_core::{Geometry, RoiParam};

use crate::error::{CliError, CliResult};

pub const SMALL_GEOMETRY: [f64; 4] = [0.0, 30.0, 90.0, 115.0];
pub const SMALL_MU_LIST: [f64; 3] = [2.0, 5.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PhantomConfig {
    Bump { center: f64, half_width: f64, height: f64 },
    Indicator { lo: f64, hi: f64, height: f64 },
    Hat { peak_at: f64, height: f64 },
}

impl From<PhantomConfig> for Phantom {
    fn from(p: PhantomConfig) -> Self {
        match p {
            PhantomConfig::Bump { center, half_width, height } => {
                Phantom::Bump { center, half_width, height }
            }
            PhantomConfig::Indicator { lo, hi, height } => Phantom::Indicator { lo, hi, height },
            PhantomConfig::Hat { peak_at, height } => Phantom::Hat { peak_at, height },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub geometry: [f64; 4],
    pub step: f64,
    pub shift: f64,
    pub mu_list: Vec<f64>,
    pub delta_list: Vec<f64>,
    #[serde(rename = "E")]
    pub e: f64,
    pub kappa: f64,
    pub c_tv: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub rank_tol: f64,
    pub tail_len: usize,
    pub head_len: usize,
    /// Defaults to a hat peaked mid-overlap with norm `E / 2`.
    pub phantom: Option<PhantomConfig>,
    /// Supplying both skips the SVD in `bounds`.
    #[serde(rename = "N_0")]
    pub n0: Option<u32>,
    #[serde(rename = "N_mu")]
    pub n_mu: Option<u32>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: [0.0, 450.0, 1350.0, 1725.0],
            step: 1.0,
            shift: 0.5,
            mu_list: vec![5.0, 20.0, 100.0],
            delta_list: vec![1e-3, 1e-4, 1e-5, 1e-6, 1e-7],
            e: 1.0,
            kappa: 1.0,
            c_tv: DEFAULT_C_TV,
            a: DEFAULT_A,
            seed: 0,
            output_dir: PathBuf::from("out"),
            rank_tol: DEFAULT_RANK_TOL,
            tail_len: DEFAULT_TAIL_LEN,
            head_len: DEFAULT_HEAD_LEN,
            phantom: None,
            n0: None,
            n_mu: None,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub small: bool,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| bad(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", p.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if overrides.small {
            cfg.geometry = SMALL_GEOMETRY;
            cfg.mu_list = SMALL_MU_LIST.to_vec();
        }
        if let Some(out) = &overrides.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::from_array(self.geometry).expect("validated")
    }

    pub fn mus(&self) -> Vec<RoiParam> {
        let g = self.geometry();
        self.mu_list.iter().map(|&m| RoiParam::new(&g, m).expect("validated")).collect()
    }

    pub fn phantom(&self) -> Phantom {
        match self.phantom {
            Some(p) => p.into(),
            None => {
                let g = self.geometry();
                let width = g.a4 - g.a2;
                Phantom::Hat {
                    peak_at: 0.5 * (g.a2 + g.a3),
                    height: 0.5 * self.e * (3.0 / width).sqrt(),
                }
            }
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let g = Geometry::from_array(self.geometry).map_err(|e| bad(e.to_string()))?;
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(bad(format!("step must be positive, got {}", self.step)));
        }
        if !(self.shift > 0.0 && self.shift < 1.0) {
            return Err(bad(format!("shift must lie in (0, 1), got {}", self.shift)));
        }
        if self.mu_list.is_empty() {
            return Err(bad("mu_list must not be empty"));
        }
        for &mu in &self.mu_list {
            RoiParam::new(&g, mu).map_err(|e| bad(e.to_string()))?;
        }
        if let Some(d) = self.delta_list.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return Err(bad(format!("delta values must be >= 0, got {d}")));
        }
        for (name, v) in [("E", self.e), ("kappa", self.kappa), ("c_tv", self.c_tv)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.a > 0.0 && self.a < 2.0) {
            return Err(bad(format!("A must lie in (0, 2), got {}", self.a)));
        }
        if !(self.rank_tol >= 0.0) {
            return Err(bad(format!("rank_tol must be >= 0, got {}", self.rank_tol)));
        }
        if self.tail_len < 2 || self.head_len < 2 {
            return Err(bad("tail_len and head_len must be >= 2"));
        }
        match (self.n0, self.n_mu) {
            (Some(n0), Some(n_mu)) if n_mu <= n0 => {
                return Err(bad(format!("need N_mu > N_0, got {n_mu} <= {n0}")))
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(bad("N_0 and N_mu must be given together"))
            }
            _ => {}
        }
        if let Some(p) = self.phantom {
            let grid = ht_core::SampledGrid::new(g.a2, self.step, 2).expect("valid step");
            ht_core::regularization::make_phantom(&p.into(), &g, &grid)
                .map_err(|e| bad(e.to_string()))?;
        }
        Ok(())
    }
}
