//! Flat JSON configuration shared by the library entry points and the CLI.
//!
//! Precedence: built-in defaults, then the config file, then command-line
//! flags.

use serde::{Deserialize, Serialize};

use crate::classes::ClassConfig;
use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, TransformOptions};
use crate::theorems::SuiteConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// `min:max:step`
    pub grid: String,
    pub tol_c0: f64,
    pub tol_erg: f64,
    pub tol_bohr: f64,
    pub tol_uc: f64,
    pub tol_match_rel: f64,
    pub tol_analytic_rel: f64,
    pub blowup_thresh: f64,
    pub grid_tol: f64,
    pub so_h: f64,
    pub a_seq: Vec<f64>,
    pub delta_seq: Vec<f64>,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub evolution_instances: usize,
}

impl Default for Config {
    fn default() -> Self {
        let c = ClassConfig::default();
        let t = TransformOptions::default();
        let s = SuiteConfig::default();
        Config {
            grid: "-5:5:0.1".into(),
            tol_c0: c.tol_c0,
            tol_erg: c.tol_erg,
            tol_bohr: c.tol_bohr,
            tol_uc: c.tol_uc,
            tol_match_rel: t.tol_match_rel,
            tol_analytic_rel: t.tol_analytic_rel,
            blowup_thresh: t.blowup_thresh,
            grid_tol: s.grid_tol,
            so_h: c.so_h,
            a_seq: t.a_seq,
            delta_seq: s.delta_seq,
            eps: t.eps,
            seed: s.seed,
            evolution_instances: s.evolution_instances,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_c0", self.tol_c0),
            ("tol_erg", self.tol_erg),
            ("tol_bohr", self.tol_bohr),
            ("tol_uc", self.tol_uc),
            ("tol_match_rel", self.tol_match_rel),
            ("tol_analytic_rel", self.tol_analytic_rel),
            ("blowup_thresh", self.blowup_thresh),
            ("grid_tol", self.grid_tol),
            ("so_h", self.so_h),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        for (k, v) in [("a_seq", &self.a_seq), ("delta_seq", &self.delta_seq), ("eps", &self.eps)] {
            if v.is_empty() || v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::Config(format!("{k} must be a nonempty list of positive numbers")));
            }
        }
        if self.a_seq.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("a_seq must be strictly decreasing".into()));
        }
        self.frequency_grid()?;
        Ok(())
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::parse(&self.grid)
    }

    pub fn class_config(&self) -> ClassConfig {
        ClassConfig { tol_c0: self.tol_c0, tol_erg: self.tol_erg, tol_bohr: self.tol_bohr, tol_uc: self.tol_uc, so_h: self.so_h, ..ClassConfig::default() }
    }

    pub fn transform_options(&self) -> TransformOptions {
        TransformOptions {
            a_seq: self.a_seq.clone(),
            blowup_thresh: self.blowup_thresh,
            tol_match_rel: self.tol_match_rel,
            tol_analytic_rel: self.tol_analytic_rel,
            eps: self.eps.clone(),
            ..TransformOptions::default()
        }
    }

    pub fn suite_config(&self) -> Result<SuiteConfig> {
        Ok(SuiteConfig {
            grid: self.frequency_grid()?,
            transform: self.transform_options(),
            classes: self.class_config(),
            delta_seq: self.delta_seq.clone(),
            seed: self.seed,
            evolution_instances: self.evolution_instances,
            grid_tol: self.grid_tol,
        })
    }
}
