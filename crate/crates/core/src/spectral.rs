//! Instantaneous eigenanalysis of `H(t)`.

use serde::{Deserialize, Serialize};

use crate::chain_model::{ChainSpec, Drive, Protocol, PulseSchedule};
use crate::error::{Error, Result};
use crate::propagator::StateVector;
use crate::tridiag::{SymTridiagonal, TridiagEigen};

/// Default number of grid points for [`min_gap`].
pub const DEFAULT_GAP_GRID: usize = 2001;

/// Default finite-difference step for [`adiabaticity_ratio`], as a fraction
/// of `tau`.
pub const DEFAULT_FD_STEP_FRACTION: f64 = 1e-5;

/// Below this gap the adiabaticity ratio is reported as undefined.
pub const MIN_RATIO_GAP: f64 = 1e-12;

const GOLDEN_TOLERANCE: f64 = 1e-6;

/// Eigenvalues, gauge-fixed eigenvectors and the ground-state gap of `H(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    /// Time at which `H` was evaluated, when known.
    pub t: Option<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`; its largest-magnitude
    /// component is positive.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `eigenvalues[1] - eigenvalues[0]`.
    pub gap: f64,
}

impl SpectrumSample {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> &[f64] {
        &self.eigenvectors[0]
    }

    pub fn first_excited(&self) -> &[f64] {
        &self.eigenvectors[1]
    }
}

/// Flip `v` so that its largest-magnitude component is positive. Ties within
/// rounding go to the lowest index.
pub fn fix_gauge(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let lead = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-10))
        .unwrap_or(0);
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Full sorted eigendecomposition of a symmetric tridiagonal matrix.
pub fn eigensystem(h: &SymTridiagonal) -> Result<SpectrumSample> {
    if h.dim() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two levels for a gap".into(),
        ));
    }
    let eig = h.eigen()?;
    Ok(sample_from(&eig, None))
}

fn sample_from(eig: &TridiagEigen, t: Option<f64>) -> SpectrumSample {
    let eigenvectors: Vec<Vec<f64>> = (0..eig.dim())
        .map(|k| {
            let mut v = eig.vector(k).to_vec();
            fix_gauge(&mut v);
            v
        })
        .collect();
    let eigenvalues = eig.values().to_vec();
    SpectrumSample {
        t,
        gap: eigenvalues[1] - eigenvalues[0],
        eigenvalues,
        eigenvectors,
    }
}

/// Eigensystem of `H(t)` for a driven chain.
pub fn spectrum_at(spec: &ChainSpec, schedule: &PulseSchedule, t: f64) -> Result<SpectrumSample> {
    drive_spectrum(&Protocol::new(spec, schedule), t)
}

pub fn drive_spectrum<D: Drive + ?Sized>(drive: &D, t: f64) -> Result<SpectrumSample> {
    let mut s = eigensystem(&drive.hamiltonian(t))?;
    s.t = Some(t);
    Ok(s)
}

/// `Delta(t) = eps_1(t) - eps_g(t)`.
pub fn instantaneous_gap(spec: &ChainSpec, schedule: &PulseSchedule, t: f64) -> Result<f64> {
    GapProbe::new(Protocol::new(spec, schedule)).gap(t)
}

/// Gap evaluator that reuses its matrix and eigen workspaces.
struct GapProbe<D> {
    drive: D,
    h: SymTridiagonal,
    eig: TridiagEigen,
}

impl<D: Drive> GapProbe<D> {
    fn new(drive: D) -> Self {
        let n = drive.n_sites();
        Self {
            drive,
            h: SymTridiagonal::zeros(n),
            eig: TridiagEigen::new(n),
        }
    }

    fn gap(&mut self, t: f64) -> Result<f64> {
        self.drive.fill(t, &mut self.h);
        self.eig.compute(&self.h)?;
        let e = self.eig.values();
        Ok(e[1] - e[0])
    }
}

/// Location and value of the smallest gap over `[0, tau]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapMinimum {
    pub t_star: f64,
    pub delta_min: f64,
}

/// Scan `Delta(t)` on `n_grid` uniform points over `[0, tau]`, then refine the
/// smallest sample by golden-section search between its grid neighbours.
pub fn min_gap(spec: &ChainSpec, schedule: &PulseSchedule, n_grid: usize) -> Result<GapMinimum> {
    if n_grid < 3 {
        return Err(Error::InvalidArgument(format!(
            "min_gap needs at least 3 grid points, got {n_grid}"
        )));
    }
    let tau = schedule.tau();
    let mut probe = GapProbe::new(Protocol::new(spec, schedule));
    let step = tau / (n_grid - 1) as f64;
    let grid_t = |k: usize| {
        if k == n_grid - 1 {
            tau
        } else {
            k as f64 * step
        }
    };

    let mut best = (0usize, f64::INFINITY);
    for k in 0..n_grid {
        let g = probe.gap(grid_t(k))?;
        if g < best.1 {
            best = (k, g);
        }
    }
    let (k, grid_min) = best;
    let lo = grid_t(k.saturating_sub(1));
    let hi = grid_t((k + 1).min(n_grid - 1));

    let (t_ref, g_ref) = golden_section(|t| probe.gap(t), lo, hi, GOLDEN_TOLERANCE * tau)?;
    Ok(if g_ref <= grid_min {
        GapMinimum {
            t_star: t_ref,
            delta_min: g_ref,
        }
    } else {
        GapMinimum {
            t_star: grid_t(k),
            delta_min: grid_min,
        }
    })
}

/// Minimise `f` on `[a, b]` until the bracket is narrower than `tol`.
fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let t = 0.5 * (a + b);
    Ok((t, f(t)?))
}

/// End-site bound state `sqrt(1 - z^2) z^(j-1)` with `z = J / mu0`,
/// renormalized over the finite chain. `mirrored` puts the well on site N
/// instead (`z^(N-j)`).
pub fn bound_state_ground(spec: &ChainSpec, mu0: f64, mirrored: bool) -> Result<StateVector> {
    let j = spec.coupling();
    if !(mu0.is_finite() && mu0 > j) {
        return Err(Error::NotBound { mu0, coupling: j });
    }
    let zeta = j / mu0;
    let prefactor = (1.0 - zeta * zeta).sqrt();
    let mut amps: Vec<f64> = (0..spec.n_sites())
        .map(|k| prefactor * zeta.powi(k as i32))
        .collect();
    if mirrored {
        amps.reverse();
    }
    StateVector::from_real(&amps)
}

/// `|<d psi_g/dt | psi_1>| / |eps_g - eps_1|` at time `t`, with the
/// derivative taken by central differences of step `fd_step`.
pub fn adiabaticity_ratio(
    spec: &ChainSpec,
    schedule: &PulseSchedule,
    t: f64,
    fd_step: f64,
) -> Result<f64> {
    drive_adiabaticity_ratio(&Protocol::new(spec, schedule), t, fd_step)
}

pub fn drive_adiabaticity_ratio<D: Drive + ?Sized>(drive: &D, t: f64, fd_step: f64) -> Result<f64> {
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fd_step must be positive, got {fd_step}"
        )));
    }
    let center = drive_spectrum(drive, t)?;
    if center.gap < MIN_RATIO_GAP {
        return Err(Error::GapTooSmall { t, gap: center.gap });
    }
    let ground = center.ground_state();
    let aligned = |mut v: Vec<f64>| {
        let dot: f64 = v.iter().zip(ground).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    };
    let plus = aligned(
        drive_spectrum(drive, t + fd_step)?
            .eigenvectors
            .swap_remove(0),
    );
    let minus = aligned(
        drive_spectrum(drive, t - fd_step)?
            .eigenvectors
            .swap_remove(0),
    );
    let coupling: f64 = plus
        .iter()
        .zip(&minus)
        .zip(center.first_excited())
        .map(|((p, m), e)| (p - m) / (2.0 * fd_step) * e)
        .sum();
    Ok(coupling.abs() / center.gap)
}

/// Largest adiabaticity ratio over `n_grid` interior points of `(0, tau)`,
/// returned as `(t, ratio)`.
pub fn max_adiabaticity_ratio(
    spec: &ChainSpec,
    schedule: &PulseSchedule,
    n_grid: usize,
    fd_step: f64,
) -> Result<(f64, f64)> {
    let tau = schedule.tau();
    let mut best = (0.0, 0.0);
    for k in 1..=n_grid {
        let t = tau * k as f64 / (n_grid + 1) as f64;
        let r = adiabaticity_ratio(spec, schedule, t, fd_step)?;
        if r > best.1 {
            best = (t, r);
        }
    }
    Ok(best)
}
