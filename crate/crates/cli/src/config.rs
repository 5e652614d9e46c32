//! Experiment configuration: one JSON document per run. Unknown keys are
//! rejected so typos fail fast.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sinhlab::geom::{DomainSpec, Point2};
use sinhlab::hamiltonian::SignedConfig;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Nodal L∞ target of the Newton solver.
    pub newton: f64,
    /// Gradient-norm target of the critical-point search.
    pub critical_point: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            newton: 1e-9,
            critical_point: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    /// Peak signs α_k ∈ {-1, +1}; the length sets m.
    pub signs: Vec<f64>,
    /// Seed points for the critical-point search, one per peak.
    pub seed_points: Vec<Point2>,
    /// Strictly descending ρ schedule.
    pub rho_schedule: Vec<f64>,
    /// Mesh spacing.
    pub mesh_h: f64,
    /// Number of eigenvalues per ρ (at least 4m + 1).
    pub eigenvalue_count: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Spectral-transform anchor for the eigensolver; 0 disables the shift.
    #[serde(default)]
    pub eigen_shift: f64,
    /// Rescaled fit window |x| <= window for profile fits.
    #[serde(default = "default_fit_window")]
    pub fit_window: f64,
}

fn default_fit_window() -> f64 {
    10.0
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| "parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.signs.len();
        if m == 0 {
            bail!("at least one peak required");
        }
        if self.seed_points.len() != m {
            bail!(
                "{} seed points for {} signs",
                self.seed_points.len(),
                m
            );
        }
        if self.rho_schedule.is_empty() {
            bail!("empty rho schedule");
        }
        for w in self.rho_schedule.windows(2) {
            if w[1] >= w[0] {
                bail!("rho schedule must be strictly descending");
            }
        }
        if self.rho_schedule.iter().any(|&r| !(r > 0.0)) {
            bail!("rho schedule must be positive");
        }
        if self.eigenvalue_count < 4 * m + 1 {
            bail!(
                "eigenvalue_count {} below 4m + 1 = {}",
                self.eigenvalue_count,
                4 * m + 1
            );
        }
        if !(self.mesh_h > 0.0) {
            bail!("mesh_h must be positive");
        }
        if !(self.tolerances.newton > 0.0 && self.tolerances.critical_point > 0.0) {
            bail!("tolerances must be positive");
        }
        if !(self.fit_window > 0.0) {
            bail!("fit_window must be positive");
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.signs.len()
    }

    pub fn seed_config(&self) -> Result<SignedConfig> {
        SignedConfig::new(self.domain, self.seed_points.clone(), self.signs.clone())
            .map_err(|e| anyhow::anyhow!("invalid seed configuration: {e}"))
    }
}
