use std::fs;
use std::path::{Path, PathBuf};

use adiabatic_chain::experiments::StepPolicy;
use adiabatic_chain::{ChainSpec, DisorderSpec, PulseSchedule};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Run parameters. Every field is optional so a config file and the command
/// line can be layered; unset fields fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Number of sites N
    #[arg(long)]
    pub n_sites: Option<usize>,
    /// Nominal nearest-neighbour coupling J (energy unit)
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Peak depth of the pulse on site 1, in units of J
    #[arg(long)]
    pub mu_a_max: Option<f64>,
    /// Peak depth of the pulse on site N, in units of J
    #[arg(long)]
    pub mu_b_max: Option<f64>,
    /// Dimensionless pulse width alpha * tau
    #[arg(long)]
    pub alpha_over_tau: Option<f64>,
    /// Total evolution time, in units of 1/J
    #[arg(long)]
    pub tau: Option<f64>,
    /// Fixed number of propagation steps (default max(20000, ceil(50 tau mu_max)))
    #[arg(long)]
    pub n_steps: Option<usize>,
    /// Propagation steps per unit time, applied per run (ignored if --n-steps is set)
    #[arg(long)]
    pub steps_per_unit_time: Option<f64>,
    /// Master seed for bond disorder
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative bond disorder strength, J_j = J (1 - delta eps_j) with eps_j in (0, 1)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Disorder realisations per delta
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Grid points for the minimum-gap scan
    #[arg(long)]
    pub gap_grid: Option<usize>,
    /// Target fidelity for the transfer-time search
    #[arg(long)]
    pub target_fidelity: Option<f64>,
    /// Output file (standard output if absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

pub const DEFAULT_N_SITES: usize = 5;
pub const DEFAULT_COUPLING: f64 = 1.0;
pub const DEFAULT_MU0: f64 = 20.0;
pub const DEFAULT_TAU: f64 = 500.0;
pub const DEFAULT_ALPHA_TAU: f64 = 5.0;
pub const DEFAULT_GAP_GRID: usize = adiabatic_chain::spectral::DEFAULT_GAP_GRID;
pub const DEFAULT_TARGET: f64 = 0.995;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> Self {
        Self {
            n_sites: over.n_sites.or(self.n_sites),
            coupling: over.coupling.or(self.coupling),
            mu_a_max: over.mu_a_max.or(self.mu_a_max),
            mu_b_max: over.mu_b_max.or(self.mu_b_max),
            alpha_over_tau: over.alpha_over_tau.or(self.alpha_over_tau),
            tau: over.tau.or(self.tau),
            n_steps: over.n_steps.or(self.n_steps),
            steps_per_unit_time: over.steps_per_unit_time.or(self.steps_per_unit_time),
            seed: over.seed.or(self.seed),
            delta: over.delta.or(self.delta),
            n_samples: over.n_samples.or(self.n_samples),
            gap_grid: over.gap_grid.or(self.gap_grid),
            target_fidelity: over.target_fidelity.or(self.target_fidelity),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites.unwrap_or(DEFAULT_N_SITES)
    }

    pub fn coupling(&self) -> f64 {
        self.coupling.unwrap_or(DEFAULT_COUPLING)
    }

    pub fn mu_a_max(&self) -> f64 {
        self.mu_a_max.unwrap_or(DEFAULT_MU0)
    }

    pub fn mu_b_max(&self) -> f64 {
        self.mu_b_max.unwrap_or(DEFAULT_MU0)
    }

    pub fn alpha_tau(&self) -> f64 {
        self.alpha_over_tau.unwrap_or(DEFAULT_ALPHA_TAU)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(0.0)
    }

    pub fn gap_grid(&self) -> usize {
        self.gap_grid.unwrap_or(DEFAULT_GAP_GRID)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn clean_chain(&self) -> Result<ChainSpec, CliError> {
        Ok(ChainSpec::uniform(self.n_sites(), self.coupling())?)
    }

    /// The uniform chain, or realisation 0 of the seeded disorder when
    /// `delta > 0`.
    pub fn chain(&self) -> Result<ChainSpec, CliError> {
        let chain = self.clean_chain()?;
        if self.delta() == 0.0 {
            return Ok(chain);
        }
        let disorder = DisorderSpec::new(self.delta(), self.seed(), 1)?;
        Ok(chain.disordered(&disorder, 0)?)
    }

    pub fn schedule_with_tau(&self, tau: f64) -> Result<PulseSchedule, CliError> {
        Ok(PulseSchedule::from_alpha_tau(
            self.mu_a_max(),
            self.mu_b_max(),
            self.alpha_tau(),
            self.tau.unwrap_or(tau),
        )?)
    }

    pub fn schedule(&self) -> Result<PulseSchedule, CliError> {
        self.schedule_with_tau(DEFAULT_TAU)
    }

    pub fn step_policy(&self) -> Result<StepPolicy, CliError> {
        match (self.n_steps, self.steps_per_unit_time) {
            (Some(0), _) => Err(CliError::Validation("n_steps must be at least 1".into())),
            (Some(n), _) => Ok(StepPolicy::Fixed(n)),
            (None, Some(k)) if !(k.is_finite() && k > 0.0) => Err(CliError::Validation(format!(
                "steps_per_unit_time must be positive, got {k}"
            ))),
            (None, Some(k)) => Ok(StepPolicy::PerUnitTime(k)),
            (None, None) => Ok(StepPolicy::Default),
        }
    }
}
