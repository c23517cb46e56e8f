//! Time evolution under `i d|psi>/dt = H(t) |psi>` (hbar = 1).
//!
//! Each step of size `dt` applies the exact unitary `exp(-i H(t_mid) dt)` of
//! the Hamiltonian frozen at the step midpoint, built from the eigensystem of
//! the tridiagonal `H(t_mid)`. The update is unitary to rounding error and the
//! global error from freezing `H` is `O(dt^2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain_model::{ChainSpec, Drive, Protocol, PulseSchedule};
use crate::error::{Error, Result};
use crate::tridiag::{SymTridiagonal, TridiagEigen};

/// Largest accepted deviation of `<psi|psi>` from 1 for an initial state.
pub const INITIAL_NORM_TOLERANCE: f64 = 1e-6;

/// Number of trajectory rows kept by [`default_record_every`].
pub const DEFAULT_RECORDED_ROWS: usize = 1000;

/// Complex site amplitudes `c_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wrap amplitudes as given, without normalizing.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// Scale to unit norm. Fails on the zero vector.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        amplitudes.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { amplitudes })
    }

    /// Real amplitudes, normalized.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// The electron sitting on `site` (zero-based).
    pub fn localized(n_sites: usize, site: usize) -> Self {
        assert!(
            site < n_sites,
            "site {site} out of range for {n_sites} sites"
        );
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_sites];
        amplitudes[site] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `|c_site|^2`.
    pub fn population(&self, site: usize) -> f64 {
        self.amplitudes[site].norm_sqr()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.len(), other.len(), "state dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Site-reversed copy, `c_j -> c_{N+1-j}`.
    pub fn mirrored(&self) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.reverse();
        Self { amplitudes }
    }
}

/// Recorded populations of one propagation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `populations[r][j] = |c_j(times[r])|^2`.
    pub populations: Vec<Vec<f64>>,
    pub final_state: StateVector,
    /// `|c_N(tau)|^2`.
    pub fidelity: f64,
    /// Largest `| <psi|psi> - 1 |` seen at any step, including `t = 0`.
    pub max_norm_deviation: f64,
    pub n_steps: usize,
}

/// `max(20000, ceil(50 tau mu_max))`: keeps `dt ||H||` well below one.
pub fn default_n_steps(schedule: &PulseSchedule) -> usize {
    let scaled = (50.0 * schedule.tau() * schedule.peak_max()).ceil();
    (scaled as usize).max(20_000)
}

/// Stride that keeps about [`DEFAULT_RECORDED_ROWS`] rows.
pub fn default_record_every(n_steps: usize) -> usize {
    n_steps.div_ceil(DEFAULT_RECORDED_ROWS).max(1)
}

/// Propagate `initial` under the pulse schedule with `n_steps` midpoint steps,
/// recording populations every `record_every` steps (plus the first and last
/// instant).
pub fn evolve(
    spec: &ChainSpec,
    schedule: &PulseSchedule,
    initial: &StateVector,
    n_steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    evolve_drive(
        &Protocol::new(spec, schedule),
        initial,
        n_steps,
        record_every,
    )
}

/// [`evolve`] for an arbitrary [`Drive`].
pub fn evolve_drive<D: Drive + ?Sized>(
    drive: &D,
    initial: &StateVector,
    n_steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    let n = drive.n_sites();
    let duration = drive.duration();
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if record_every == 0 {
        return Err(Error::InvalidArgument(
            "record_every must be at least 1".into(),
        ));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidSchedule(format!(
            "evolution time must be positive and finite, got {duration}"
        )));
    }
    if initial.len() != n {
        return Err(Error::InvalidArgument(format!(
            "initial state has {} sites, chain has {n}",
            initial.len()
        )));
    }
    let norm_sqr = initial.norm_sqr();
    if norm_sqr.is_nan() || (norm_sqr - 1.0).abs() > INITIAL_NORM_TOLERANCE {
        return Err(Error::Unnormalized { norm_sqr });
    }

    let dt = duration / n_steps as f64;
    let mut h = SymTridiagonal::zeros(n);
    let mut eig = TridiagEigen::new(n);
    let mut psi = initial.amplitudes.clone();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];

    let capacity = n_steps / record_every + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut populations = Vec::with_capacity(capacity);
    times.push(0.0);
    populations.push(psi.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>());
    let mut max_norm_deviation = (norm_sqr - 1.0).abs();

    for step in 0..n_steps {
        let t_mid = (step as f64 + 0.5) * dt;
        drive.fill(t_mid, &mut h);
        eig.compute(&h)?;

        // psi <- V exp(-i E dt) V^T psi
        for (k, (c, &e)) in coeffs.iter_mut().zip(eig.values()).enumerate() {
            let v = eig.vector(k);
            let proj: Complex64 = v.iter().zip(&psi).map(|(&vi, p)| p * vi).sum();
            *c = proj * Complex64::from_polar(1.0, -e * dt);
        }
        psi.fill(Complex64::new(0.0, 0.0));
        for (k, c) in coeffs.iter().enumerate() {
            for (p, &vi) in psi.iter_mut().zip(eig.vector(k)) {
                *p += c * vi;
            }
        }

        let norm_sqr: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        max_norm_deviation = max_norm_deviation.max((norm_sqr - 1.0).abs());

        let done = step + 1;
        if done % record_every == 0 || done == n_steps {
            times.push(duration * done as f64 / n_steps as f64);
            populations.push(psi.iter().map(|c| c.norm_sqr()).collect());
        }
    }

    let final_state = StateVector { amplitudes: psi };
    let fidelity = final_state.population(n - 1);
    Ok(Trajectory {
        times,
        populations,
        final_state,
        fidelity,
        max_norm_deviation,
        n_steps,
    })
}

/// `|c_N(tau)|^2` of a trajectory.
pub fn fidelity_of(trajectory: &Trajectory) -> f64 {
    let last = trajectory.final_state.len() - 1;
    trajectory.final_state.population(last)
}

/// Transfer fidelity `|1> -> |N>` without keeping intermediate rows.
pub fn transfer_fidelity(
    spec: &ChainSpec,
    schedule: &PulseSchedule,
    n_steps: usize,
) -> Result<f64> {
    let initial = StateVector::localized(spec.n_sites(), 0);
    Ok(evolve(spec, schedule, &initial, n_steps, n_steps)?.fidelity)
}

/// `|F(n_steps) - F(2 n_steps)|`, the change in final fidelity from halving the
/// step size.
pub fn convergence_check(
    spec: &ChainSpec,
    schedule: &PulseSchedule,
    initial: &StateVector,
    n_steps: usize,
) -> Result<f64> {
    let coarse = evolve(spec, schedule, initial, n_steps, n_steps)?.fidelity;
    let fine = evolve(spec, schedule, initial, 2 * n_steps, 2 * n_steps)?.fidelity;
    Ok((coarse - fine).abs())
}
