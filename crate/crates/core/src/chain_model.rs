//! The driven chain: geometry, bond couplings, Gaussian gate pulses on the two
//! end sites, and the instantaneous Hamiltonian
//!
//! ```text
//! H(t) = mu_A(t) |1><1| + mu_B(t) |N><N| - sum_j J_j (|j><j+1| + h.c.)
//! ```
//!
//! Units: energies in units of the nominal coupling `J`, times in `1/J`
//! (hbar = 1).

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tridiag::SymTridiagonal;

/// Chain length and bond couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n_sites: usize,
    coupling: f64,
    bonds: Vec<f64>,
}

impl ChainSpec {
    /// Uniform chain with every bond equal to `coupling`.
    pub fn uniform(n_sites: usize, coupling: f64) -> Result<Self> {
        Self::validate_nominal(n_sites, coupling)?;
        Ok(Self {
            n_sites,
            coupling,
            bonds: vec![coupling; n_sites - 1],
        })
    }

    /// Chain with explicit per-bond couplings; `coupling` stays the nominal
    /// energy scale.
    pub fn with_bonds(coupling: f64, bonds: Vec<f64>) -> Result<Self> {
        let n_sites = bonds.len() + 1;
        Self::validate_nominal(n_sites, coupling)?;
        if let Some((j, b)) = bonds
            .iter()
            .enumerate()
            .find(|(_, b)| !(b.is_finite() && **b > 0.0))
        {
            return Err(Error::InvalidChain(format!(
                "bond {j} has non-positive coupling {b}"
            )));
        }
        Ok(Self {
            n_sites,
            coupling,
            bonds,
        })
    }

    fn validate_nominal(n_sites: usize, coupling: f64) -> Result<()> {
        if n_sites < 2 {
            return Err(Error::InvalidChain(format!(
                "need at least 2 sites, got {n_sites}"
            )));
        }
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::InvalidChain(format!(
                "coupling must be positive and finite, got {coupling}"
            )));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Nominal coupling `J`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// The `N - 1` bond couplings `J_j`.
    pub fn bonds(&self) -> &[f64] {
        &self.bonds
    }

    pub fn is_uniform(&self) -> bool {
        self.bonds.iter().all(|&b| b == self.coupling)
    }

    /// Copy of this chain with bonds replaced by disorder sample
    /// `sample_index`.
    pub fn disordered(&self, disorder: &DisorderSpec, sample_index: usize) -> Result<Self> {
        let bonds = sample_disordered_couplings(self, disorder, sample_index)?;
        Self::with_bonds(self.coupling, bonds)
    }
}

/// Two Gaussian gate pulses: `mu_A(t) = -mu_a_max exp(-alpha^2 t^2 / 2)` on
/// site 1 and `mu_B(t) = -mu_b_max exp(-alpha^2 (t - tau)^2 / 2)` on site N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    mu_a_max: f64,
    mu_b_max: f64,
    alpha: f64,
    tau: f64,
}

impl PulseSchedule {
    pub fn new(mu_a_max: f64, mu_b_max: f64, alpha: f64, tau: f64) -> Result<Self> {
        let check = |name: &str, v: f64, allow_zero: bool| -> Result<()> {
            let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidSchedule(format!(
                    "{name} must be {} and finite, got {v}",
                    if allow_zero {
                        "non-negative"
                    } else {
                        "positive"
                    }
                )))
            }
        };
        check("mu_a_max", mu_a_max, true)?;
        check("mu_b_max", mu_b_max, true)?;
        check("alpha", alpha, false)?;
        check("tau", tau, false)?;
        Ok(Self {
            mu_a_max,
            mu_b_max,
            alpha,
            tau,
        })
    }

    /// Equal peaks `mu0` with the width given in the dimensionless form
    /// `alpha = alpha_tau / tau`.
    pub fn symmetric(mu0: f64, alpha_tau: f64, tau: f64) -> Result<Self> {
        Self::from_alpha_tau(mu0, mu0, alpha_tau, tau)
    }

    pub fn from_alpha_tau(mu_a_max: f64, mu_b_max: f64, alpha_tau: f64, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "tau must be positive and finite, got {tau}"
            )));
        }
        Self::new(mu_a_max, mu_b_max, alpha_tau / tau, tau)
    }

    pub fn mu_a_max(&self) -> f64 {
        self.mu_a_max
    }

    pub fn mu_b_max(&self) -> f64 {
        self.mu_b_max
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// The dimensionless width `alpha * tau`.
    pub fn alpha_tau(&self) -> f64 {
        self.alpha * self.tau
    }

    pub fn peak_max(&self) -> f64 {
        self.mu_a_max.max(self.mu_b_max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.mu_a_max == self.mu_b_max
    }

    /// Same pulse shapes stretched to a new total time, keeping `alpha * tau`.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::from_alpha_tau(self.mu_a_max, self.mu_b_max, self.alpha_tau(), tau)
    }

    pub fn with_peaks(&self, mu_a_max: f64, mu_b_max: f64) -> Result<Self> {
        Self::new(mu_a_max, mu_b_max, self.alpha, self.tau)
    }

    /// On-site energy of site 1.
    pub fn pulse_a(&self, t: f64) -> f64 {
        -self.mu_a_max * (-0.5 * (self.alpha * t).powi(2)).exp()
    }

    /// On-site energy of site N.
    pub fn pulse_b(&self, t: f64) -> f64 {
        -self.mu_b_max * (-0.5 * (self.alpha * (t - self.tau)).powi(2)).exp()
    }
}

/// Quenched bond disorder `J_j = J (1 - delta * eps_j)`, `eps_j ~ U(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    delta: f64,
    seed: u64,
    n_samples: usize,
}

impl DisorderSpec {
    pub fn new(delta: f64, seed: u64, n_samples: usize) -> Result<Self> {
        if !(delta.is_finite() && (0.0..1.0).contains(&delta)) {
            return Err(Error::InvalidDisorder(format!(
                "delta must lie in [0, 1), got {delta}"
            )));
        }
        if n_samples == 0 {
            return Err(Error::InvalidDisorder(
                "n_samples must be at least 1".into(),
            ));
        }
        Ok(Self {
            delta,
            seed,
            n_samples,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }
}

/// Random stream for one disorder sample. Each `(seed, sample_index)` pair
/// maps to its own ChaCha stream, so samples are independent of evaluation
/// order.
pub(crate) fn sample_rng(seed: u64, sample_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_index as u64);
    rng
}

/// Draw the `N - 1` bond couplings of disorder sample `sample_index`.
pub fn sample_disordered_couplings(
    spec: &ChainSpec,
    disorder: &DisorderSpec,
    sample_index: usize,
) -> Result<Vec<f64>> {
    if sample_index >= disorder.n_samples {
        return Err(Error::InvalidDisorder(format!(
            "sample index {sample_index} out of range for {} samples",
            disorder.n_samples
        )));
    }
    let j = spec.coupling;
    if disorder.delta == 0.0 {
        return Ok(vec![j; spec.n_sites - 1]);
    }
    let mut rng = sample_rng(disorder.seed, sample_index);
    Ok((0..spec.n_sites - 1)
        .map(|_| {
            let eps: f64 = Open01.sample(&mut rng);
            j * (1.0 - disorder.delta * eps)
        })
        .collect())
}

/// Instantaneous Hamiltonian `H(t)` as a symmetric tridiagonal matrix.
pub fn hamiltonian_at(spec: &ChainSpec, schedule: &PulseSchedule, t: f64) -> SymTridiagonal {
    let mut h = SymTridiagonal::zeros(spec.n_sites);
    fill_hamiltonian(spec, schedule, t, &mut h);
    h
}

pub(crate) fn fill_hamiltonian(
    spec: &ChainSpec,
    schedule: &PulseSchedule,
    t: f64,
    h: &mut SymTridiagonal,
) {
    let n = spec.n_sites;
    let diag = h.diag_mut();
    diag.fill(0.0);
    diag[0] = schedule.pulse_a(t);
    diag[n - 1] += schedule.pulse_b(t);
    for (o, b) in h.off_diag_mut().iter_mut().zip(&spec.bonds) {
        *o = -b;
    }
}

/// A time-dependent Hamiltonian on `[0, duration]`.
pub trait Drive: Sync {
    fn n_sites(&self) -> usize;

    fn duration(&self) -> f64;

    /// Overwrite `h` with `H(t)`.
    fn fill(&self, t: f64, h: &mut SymTridiagonal);

    fn hamiltonian(&self, t: f64) -> SymTridiagonal {
        let mut h = SymTridiagonal::zeros(self.n_sites());
        self.fill(t, &mut h);
        h
    }
}

/// A chain driven by a pulse schedule.
#[derive(Debug, Clone, Copy)]
pub struct Protocol<'a> {
    pub chain: &'a ChainSpec,
    pub schedule: &'a PulseSchedule,
}

impl<'a> Protocol<'a> {
    pub fn new(chain: &'a ChainSpec, schedule: &'a PulseSchedule) -> Self {
        Self { chain, schedule }
    }
}

impl Drive for Protocol<'_> {
    fn n_sites(&self) -> usize {
        self.chain.n_sites
    }

    fn duration(&self) -> f64 {
        self.schedule.tau
    }

    fn fill(&self, t: f64, h: &mut SymTridiagonal) {
        fill_hamiltonian(self.chain, self.schedule, t, h);
    }
}

/// Runs a drive backwards in time: `H_rev(t) = H(T - t)`.
#[derive(Debug, Clone, Copy)]
pub struct TimeReversed<D>(pub D);

impl<D: Drive> Drive for TimeReversed<D> {
    fn n_sites(&self) -> usize {
        self.0.n_sites()
    }

    fn duration(&self) -> f64 {
        self.0.duration()
    }

    fn fill(&self, t: f64, h: &mut SymTridiagonal) {
        self.0.fill(self.0.duration() - t, h);
    }
}

/// Fixed pulse amplitudes held constant over `[0, duration]`.
#[derive(Debug, Clone)]
pub struct StaticDrive {
    pub chain: ChainSpec,
    pub mu_a: f64,
    pub mu_b: f64,
    pub duration: f64,
}

impl Drive for StaticDrive {
    fn n_sites(&self) -> usize {
        self.chain.n_sites
    }

    fn duration(&self) -> f64 {
        self.duration
    }

    fn fill(&self, _t: f64, h: &mut SymTridiagonal) {
        let n = self.chain.n_sites;
        let diag = h.diag_mut();
        diag.fill(0.0);
        diag[0] = self.mu_a;
        diag[n - 1] += self.mu_b;
        for (o, b) in h.off_diag_mut().iter_mut().zip(&self.chain.bonds) {
            *o = -b;
        }
    }
}
