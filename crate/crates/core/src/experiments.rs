//! Parameter sweeps over the driven chain: gap scaling with chain length and
//! pulse width, fidelity against pulse width and peak depths, the shortest
//! transfer time for a target fidelity, and bond-disorder ensembles.
//!
//! Sweep cells are independent and run on the rayon pool. Results are gathered
//! in grid order, so output does not depend on scheduling.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain_model::{ChainSpec, DisorderSpec, PulseSchedule};
use crate::error::{Error, Result};
use crate::fit::{fit_linear, fit_quadratic, LinearFit, QuadraticFit};
use crate::propagator::{self, default_n_steps, default_record_every, StateVector, Trajectory};
use crate::spectral::{self, min_gap};

/// Format a float with 17 significant digits, enough to round-trip any
/// `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A table of sweep results plus the parameters needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

impl SweepResult {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// `#`-prefixed `key: value` metadata lines, a header, then one line per
    /// row. LF line endings, no quoting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// How many propagation steps to use for a given schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum StepPolicy {
    /// [`propagator::default_n_steps`].
    #[default]
    Default,
    Fixed(usize),
    /// `max(2000, ceil(k * tau))` steps, i.e. a fixed time step `1/k`.
    PerUnitTime(f64),
}

impl StepPolicy {
    pub fn steps_for(&self, schedule: &PulseSchedule) -> usize {
        match *self {
            StepPolicy::Default => default_n_steps(schedule),
            StepPolicy::Fixed(n) => n.max(1),
            StepPolicy::PerUnitTime(k) => ((k * schedule.tau()).ceil() as usize).max(2000),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StepPolicy::Default => "max(20000, ceil(50 tau mu_max))".to_string(),
            StepPolicy::Fixed(n) => format!("fixed {n}"),
            StepPolicy::PerUnitTime(k) => format!("max(2000, ceil({k} tau))"),
        }
    }
}

/// Fidelity and largest norm drift of one transfer run from site 1.
fn transfer(chain: &ChainSpec, schedule: &PulseSchedule, steps: StepPolicy) -> Result<(f64, f64)> {
    let n_steps = steps.steps_for(schedule);
    let initial = StateVector::localized(chain.n_sites(), 0);
    let run = propagator::evolve(chain, schedule, &initial, n_steps, n_steps)?;
    Ok((run.fidelity, run.max_norm_deviation))
}

fn ensure_nonempty<T>(name: &str, list: &[T]) -> Result<()> {
    if list.is_empty() {
        Err(Error::InvalidArgument(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

/// Eigenvalues of the two lowest levels and the pulses over `n_points`
/// uniform times in `[0, tau]`.
pub fn level_trace(
    spec: &ChainSpec,
    schedule: &PulseSchedule,
    n_points: usize,
) -> Result<SweepResult> {
    if n_points < 2 {
        return Err(Error::InvalidArgument(
            "level trace needs at least 2 points".into(),
        ));
    }
    let tau = schedule.tau();
    let rows: Vec<Vec<f64>> = (0..n_points)
        .into_par_iter()
        .map(|k| {
            let t = tau * k as f64 / (n_points - 1) as f64;
            let s = spectral::spectrum_at(spec, schedule, t)?;
            Ok(vec![
                t,
                schedule.pulse_a(t),
                schedule.pulse_b(t),
                s.eigenvalues[0],
                s.eigenvalues[1],
                s.gap,
            ])
        })
        .collect::<Result<_>>()?;
    let mut out = SweepResult::new(["t", "mu_a", "mu_b", "e_ground", "e_first", "gap"]);
    out.rows = rows;
    Ok(describe_schedule(out, spec, schedule))
}

fn describe_schedule(out: SweepResult, spec: &ChainSpec, schedule: &PulseSchedule) -> SweepResult {
    out.with_meta("n_sites", spec.n_sites())
        .with_meta("coupling", format_f64(spec.coupling()))
        .with_meta("mu_a_max", format_f64(schedule.mu_a_max()))
        .with_meta("mu_b_max", format_f64(schedule.mu_b_max()))
        .with_meta("alpha_over_tau", format_f64(schedule.alpha_tau()))
        .with_meta("tau", format_f64(schedule.tau()))
        .with_meta("units", "energy in J, time in 1/J (hbar = 1)")
}

/// `Delta = e_1(tau/2) - e_g(tau/2)`, the gap of the midpoint Hamiltonian
/// where the two pulses overlap. For the symmetric Gaussian pulses this is
/// the avoided crossing that limits the transfer; [`min_gap`] also searches
/// the flanks, where a single pulse passing through depths of order `J` can
/// open a narrower gap once the pulses stop overlapping (large `alpha tau`).
pub fn midpoint_gap(spec: &ChainSpec, schedule: &PulseSchedule) -> Result<f64> {
    spectral::instantaneous_gap(spec, schedule, 0.5 * schedule.tau())
}

/// Gaps over chain lengths and peak depths, with the per-depth straight-line
/// fit of the midpoint gap against `1/N^2`. Each row also carries the global
/// minimum over `[0, tau]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScaling {
    pub sweep: SweepResult,
    /// `(mu0, fit)` in the order of the input list.
    pub slopes: Vec<(f64, LinearFit)>,
}

pub fn gap_vs_n(
    coupling: f64,
    mu0_list: &[f64],
    n_list: &[usize],
    alpha_tau: f64,
    tau: f64,
    n_grid: usize,
) -> Result<GapScaling> {
    ensure_nonempty("mu0_list", mu0_list)?;
    ensure_nonempty("n_list", n_list)?;
    if let Some(n) = n_list.iter().find(|&&n| n < 3) {
        return Err(Error::InvalidArgument(format!("chain length {n} < 3")));
    }
    if let Some(mu) = mu0_list.iter().find(|&&mu| mu <= coupling || mu.is_nan()) {
        return Err(Error::NotBound { mu0: *mu, coupling });
    }
    let cells: Vec<(f64, usize)> = mu0_list
        .iter()
        .flat_map(|&mu| n_list.iter().map(move |&n| (mu, n)))
        .collect();
    let rows: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(mu, n)| {
            let chain = ChainSpec::uniform(n, coupling)?;
            let schedule = PulseSchedule::symmetric(mu, alpha_tau, tau)?;
            let mid = midpoint_gap(&chain, &schedule)?;
            let m = min_gap(&chain, &schedule, n_grid)?;
            let inv_n_sq = 1.0 / (n * n) as f64;
            Ok(vec![mu, n as f64, inv_n_sq, mid, m.t_star, m.delta_min])
        })
        .collect::<Result<_>>()?;

    let mut slopes = Vec::with_capacity(mu0_list.len());
    for &mu in mu0_list {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r[0] == mu)
            .map(|r| (r[2], r[3]))
            .collect();
        slopes.push((mu, fit_linear(&pts)?));
    }

    let mut sweep = SweepResult::new([
        "mu0",
        "n_sites",
        "inv_n_sq",
        "delta_mid",
        "t_star",
        "delta_min",
    ])
    .with_meta("experiment", "minimum gap vs chain length")
    .with_meta("coupling", format_f64(coupling))
    .with_meta("alpha_over_tau", format_f64(alpha_tau))
    .with_meta("tau", format_f64(tau))
    .with_meta("gap_grid", n_grid);
    for (mu, fit) in &slopes {
        sweep.set_meta(
            &format!("fit_mu0_{mu}"),
            format!(
                "delta_min = {} / N^2 + {} (r2 = {})",
                format_f64(fit.slope),
                format_f64(fit.intercept),
                format_f64(fit.r_squared)
            ),
        );
    }
    sweep.rows = rows;
    Ok(GapScaling { sweep, slopes })
}

/// Midpoint gap and global minimum gap as functions of the dimensionless
/// pulse width `alpha tau`.
pub fn gap_vs_alpha(
    spec: &ChainSpec,
    mu0: f64,
    alpha_tau_list: &[f64],
    tau: f64,
    n_grid: usize,
) -> Result<SweepResult> {
    ensure_nonempty("alpha_tau_list", alpha_tau_list)?;
    let rows: Vec<Vec<f64>> = alpha_tau_list
        .par_iter()
        .map(|&at| {
            let schedule = PulseSchedule::symmetric(mu0, at, tau)?;
            let mid = midpoint_gap(spec, &schedule)?;
            let m = min_gap(spec, &schedule, n_grid)?;
            Ok(vec![at, mid, m.t_star, m.delta_min])
        })
        .collect::<Result<_>>()?;
    let mut out = SweepResult::new(["alpha_over_tau", "delta_mid", "t_star", "delta_min"])
        .with_meta("experiment", "minimum gap vs pulse width")
        .with_meta("n_sites", spec.n_sites())
        .with_meta("coupling", format_f64(spec.coupling()))
        .with_meta("mu0", format_f64(mu0))
        .with_meta("tau", format_f64(tau))
        .with_meta("gap_grid", n_grid);
    out.rows = rows;
    Ok(out)
}

/// Populations over time starting from site 1.
pub fn population_trace(
    spec: &ChainSpec,
    schedule: &PulseSchedule,
    n_steps: usize,
) -> Result<Trajectory> {
    let initial = StateVector::localized(spec.n_sites(), 0);
    propagator::evolve(
        spec,
        schedule,
        &initial,
        n_steps,
        default_record_every(n_steps),
    )
}

/// Transfer fidelity against `alpha tau` at fixed `tau`.
pub fn fidelity_vs_alpha(
    spec: &ChainSpec,
    mu0: f64,
    tau: f64,
    alpha_tau_list: &[f64],
    steps: StepPolicy,
) -> Result<SweepResult> {
    ensure_nonempty("alpha_tau_list", alpha_tau_list)?;
    let rows: Vec<Vec<f64>> = alpha_tau_list
        .par_iter()
        .map(|&at| {
            let schedule = PulseSchedule::symmetric(mu0, at, tau)?;
            let (f, drift) = transfer(spec, &schedule, steps)?;
            Ok(vec![at, f, drift])
        })
        .collect::<Result<_>>()?;
    let mut out = SweepResult::new(["alpha_over_tau", "fidelity", "max_norm_deviation"])
        .with_meta("experiment", "fidelity vs pulse width")
        .with_meta("n_sites", spec.n_sites())
        .with_meta("coupling", format_f64(spec.coupling()))
        .with_meta("mu0", format_f64(mu0))
        .with_meta("tau", format_f64(tau))
        .with_meta("n_steps", steps.describe());
    out.rows = rows;
    Ok(out)
}

/// Settings for the shortest-transfer-time search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSearch {
    /// First `tau` tried; multiplied by `growth` until the target is met.
    pub tau_start: f64,
    /// Bracket growth factor. `F(tau)` oscillates about the target near the
    /// fidelity ceiling, so coarse brackets (doubling) can step over the first
    /// passing window.
    pub growth: f64,
    pub tau_cap: f64,
    /// Bisection stops once the bracket is narrower than `rel_tol * tau`.
    pub rel_tol: f64,
    pub steps: StepPolicy,
}

impl Default for TimeSearch {
    fn default() -> Self {
        Self {
            tau_start: 10.0,
            growth: 1.05,
            tau_cap: 1e6,
            rel_tol: 0.01,
            steps: StepPolicy::Default,
        }
    }
}

/// Outcome of [`min_transfer_time`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferTime {
    pub tau_min: f64,
    pub fidelity: f64,
    /// Number of propagation runs spent.
    pub evaluations: usize,
    /// Largest norm drift over all runs of the search.
    pub max_norm_deviation: f64,
}

/// Smallest `tau` with `F(tau) >= target`: grow `tau` geometrically from
/// `tau_start` until the target is met, then bisect between the last failing and the
/// first passing value. `F(tau)` need not be monotone, so the result is the
/// first crossing inside the growth bracket, an upper bound on the true
/// minimum.
pub fn min_transfer_time(
    spec: &ChainSpec,
    mu0: f64,
    alpha_tau: f64,
    target: f64,
    search: &TimeSearch,
) -> Result<TransferTime> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target fidelity must lie in (0, 1), got {target}"
        )));
    }
    if !(search.tau_start > 0.0
        && search.tau_start <= search.tau_cap
        && search.growth > 1.0
        && search.rel_tol > 0.0)
    {
        return Err(Error::InvalidArgument(format!(
            "invalid search settings {search:?}"
        )));
    }
    let mut evaluations = 0;
    let mut max_norm_deviation: f64 = 0.0;
    let mut eval = |tau: f64| -> Result<f64> {
        evaluations += 1;
        let (f, drift) = transfer(
            spec,
            &PulseSchedule::symmetric(mu0, alpha_tau, tau)?,
            search.steps,
        )?;
        max_norm_deviation = max_norm_deviation.max(drift);
        Ok(f)
    };

    let mut lo = None;
    let mut hi = search.tau_start;
    let mut f_hi = eval(hi)?;
    while f_hi < target {
        lo = Some(hi);
        hi *= search.growth;
        if hi > search.tau_cap {
            return Err(Error::TargetUnreachable {
                n_sites: spec.n_sites(),
                target,
                tau_cap: search.tau_cap,
            });
        }
        f_hi = eval(hi)?;
    }
    if let Some(mut lo) = lo {
        while hi - lo > search.rel_tol * hi {
            let mid = 0.5 * (lo + hi);
            let f_mid = eval(mid)?;
            if f_mid >= target {
                hi = mid;
                f_hi = f_mid;
            } else {
                lo = mid;
            }
        }
    }
    Ok(TransferTime {
        tau_min: hi,
        fidelity: f_hi,
        evaluations,
        max_norm_deviation,
    })
}

/// Shortest transfer times over chain lengths and their quadratic fit in `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferTimeScaling {
    pub sweep: SweepResult,
    pub fit: QuadraticFit,
}

pub fn min_time_for_fidelity(
    coupling: f64,
    n_list: &[usize],
    mu0: f64,
    alpha_tau: f64,
    target: f64,
    search: &TimeSearch,
) -> Result<TransferTimeScaling> {
    ensure_nonempty("n_list", n_list)?;
    let rows: Vec<Vec<f64>> = n_list
        .par_iter()
        .map(|&n| {
            let chain = ChainSpec::uniform(n, coupling)?;
            let r = min_transfer_time(&chain, mu0, alpha_tau, target, search)?;
            Ok(vec![
                n as f64,
                r.tau_min,
                r.fidelity,
                r.evaluations as f64,
                r.max_norm_deviation,
            ])
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    let fit = fit_quadratic(&pts)?;
    let mut sweep = SweepResult::new([
        "n_sites",
        "tau_min",
        "fidelity",
        "evaluations",
        "max_norm_deviation",
    ])
    .with_meta("experiment", "shortest transfer time vs chain length")
    .with_meta("coupling", format_f64(coupling))
    .with_meta("mu0", format_f64(mu0))
    .with_meta("alpha_over_tau", format_f64(alpha_tau))
    .with_meta("target_fidelity", format_f64(target))
    .with_meta("tau_start", format_f64(search.tau_start))
    .with_meta("growth", format_f64(search.growth))
    .with_meta("tau_cap", format_f64(search.tau_cap))
    .with_meta("rel_tol", format_f64(search.rel_tol))
    .with_meta("n_steps", search.steps.describe())
    .with_meta(
        "fit",
        format!(
            "tau_min = {} N^2 + {} N + {} (r2 = {}, rms = {})",
            format_f64(fit.a),
            format_f64(fit.b),
            format_f64(fit.c),
            format_f64(fit.r_squared),
            format_f64(fit.residual_rms)
        ),
    );
    sweep.rows = rows;
    Ok(TransferTimeScaling { sweep, fit })
}

/// Fidelity over a grid of the two peak depths; rows run over `mu_b` fastest.
pub fn fidelity_grid(
    spec: &ChainSpec,
    mu_a_list: &[f64],
    mu_b_list: &[f64],
    tau: f64,
    alpha_tau: f64,
    steps: StepPolicy,
) -> Result<SweepResult> {
    ensure_nonempty("mu_a_list", mu_a_list)?;
    ensure_nonempty("mu_b_list", mu_b_list)?;
    let cells: Vec<(f64, f64)> = mu_a_list
        .iter()
        .flat_map(|&a| mu_b_list.iter().map(move |&b| (a, b)))
        .collect();
    let rows: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(a, b)| {
            let schedule = PulseSchedule::from_alpha_tau(a, b, alpha_tau, tau)?;
            let (f, drift) = transfer(spec, &schedule, steps)?;
            Ok(vec![a, b, f, drift])
        })
        .collect::<Result<_>>()?;
    let mut out = SweepResult::new(["mu_a_max", "mu_b_max", "fidelity", "max_norm_deviation"])
        .with_meta("experiment", "fidelity vs peak depths")
        .with_meta("n_sites", spec.n_sites())
        .with_meta("coupling", format_f64(spec.coupling()))
        .with_meta("alpha_over_tau", format_f64(alpha_tau))
        .with_meta("tau", format_f64(tau))
        .with_meta("n_steps", steps.describe());
    out.rows = rows;
    Ok(out)
}

/// Per-sample fidelities and per-`delta` summaries of a disorder ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderEnsemble {
    /// `(delta, sample, fidelity, max_norm_deviation, J_1 .. J_{N-1})`.
    pub samples: SweepResult,
    /// `(delta, min, mean, max)`.
    pub summary: SweepResult,
}

/// Fidelity for `n_samples` quenched bond-disorder realisations at each
/// `delta`. Sample `k` uses the random stream `(seed, k)` for every `delta`,
/// so the ensembles differ only in the disorder strength.
pub fn disorder_ensemble(
    spec: &ChainSpec,
    schedule: &PulseSchedule,
    deltas: &[f64],
    seed: u64,
    n_samples: usize,
    steps: StepPolicy,
) -> Result<DisorderEnsemble> {
    ensure_nonempty("deltas", deltas)?;
    let specs: Vec<DisorderSpec> = deltas
        .iter()
        .map(|&d| DisorderSpec::new(d, seed, n_samples))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..deltas.len())
        .flat_map(|d| (0..n_samples).map(move |k| (d, k)))
        .collect();
    let rows: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(d, k)| {
            let chain = spec.disordered(&specs[d], k)?;
            let (f, drift) = transfer(&chain, schedule, steps)?;
            let mut row = vec![deltas[d], k as f64, f, drift];
            row.extend_from_slice(chain.bonds());
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut columns: Vec<String> = ["delta", "sample", "fidelity", "max_norm_deviation"]
        .map(String::from)
        .to_vec();
    columns.extend((1..spec.n_sites()).map(|j| format!("j_{j}")));
    let meta = |out: SweepResult| {
        describe_schedule(out, spec, schedule)
            .with_meta("experiment", "bond disorder ensemble")
            .with_meta("seed", seed)
            .with_meta("n_samples", n_samples)
            .with_meta("n_steps", steps.describe())
    };
    let mut samples = meta(SweepResult::new(columns));
    let mut summary = meta(SweepResult::new(["delta", "min", "mean", "max"]));
    for (d, &delta) in deltas.iter().enumerate() {
        let fs: Vec<f64> = rows[d * n_samples..(d + 1) * n_samples]
            .iter()
            .map(|r| r[2])
            .collect();
        let min = fs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = fs.iter().sum::<f64>() / fs.len() as f64;
        summary.push(vec![delta, min, mean, max]);
    }
    samples.rows = rows;
    Ok(DisorderEnsemble { samples, summary })
}

/// Observable evaluated by [`sweep_cells`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    Fidelity,
    MinGap,
}

/// Evaluate `observable` for each prepared `(chain, schedule)` cell and tag
/// the rows with `values` under the column `label`.
pub fn sweep_cells(
    label: &str,
    values: &[f64],
    cells: &[(ChainSpec, PulseSchedule)],
    observable: Observable,
    steps: StepPolicy,
    n_grid: usize,
) -> Result<SweepResult> {
    if values.len() != cells.len() {
        return Err(Error::InvalidArgument(
            "one value per sweep cell required".into(),
        ));
    }
    ensure_nonempty("sweep values", values)?;
    let rows: Vec<Vec<f64>> = values
        .par_iter()
        .zip(cells.par_iter())
        .map(|(&v, (chain, schedule))| match observable {
            Observable::Fidelity => {
                let (f, drift) = transfer(chain, schedule, steps)?;
                Ok(vec![v, f, drift])
            }
            Observable::MinGap => {
                let m = min_gap(chain, schedule, n_grid)?;
                Ok(vec![v, m.t_star, m.delta_min])
            }
        })
        .collect::<Result<_>>()?;
    let mut out = match observable {
        Observable::Fidelity => SweepResult::new([label, "fidelity", "max_norm_deviation"])
            .with_meta("n_steps", steps.describe()),
        Observable::MinGap => {
            SweepResult::new([label, "t_star", "delta_min"]).with_meta("gap_grid", n_grid)
        }
    };
    out.set_meta("experiment", format!("custom sweep over {label}"));
    out.rows = rows;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut s = SweepResult::new(["x", "y"])
            .with_meta("seed", 3)
            .with_meta("a", "b");
        s.push(vec![1.0, 0.1]);
        s.push(vec![-2.5, 1e-300]);
        let text = s.to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# a: b");
        assert_eq!(lines[1], "# seed: 3");
        assert_eq!(lines[2], "x,y");
        assert_eq!(lines[3], "1.0000000000000000e0,1.0000000000000001e-1");
        assert!(!text.contains('\r'));
        for line in &lines[3..] {
            for cell in line.split(',') {
                let v: f64 = cell.parse().unwrap();
                assert!(s.rows.iter().flatten().any(|&x| x == v));
            }
        }
    }

    #[test]
    fn format_round_trips() {
        for x in [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            6.02214076e23,
            -1e-310,
            0.0,
        ] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn step_policies() {
        let s = PulseSchedule::symmetric(20.0, 5.0, 500.0).unwrap();
        assert_eq!(StepPolicy::Default.steps_for(&s), 500_000);
        assert_eq!(StepPolicy::Fixed(123).steps_for(&s), 123);
        assert_eq!(StepPolicy::PerUnitTime(40.0).steps_for(&s), 20_000);
        let short = PulseSchedule::symmetric(20.0, 5.0, 10.0).unwrap();
        assert_eq!(StepPolicy::PerUnitTime(40.0).steps_for(&short), 2000);
    }

    #[test]
    fn column_lookup() {
        let mut s = SweepResult::new(["a", "b"]);
        s.push(vec![1.0, 2.0]);
        s.push(vec![3.0, 4.0]);
        assert_eq!(s.column("b"), Some(vec![2.0, 4.0]));
        assert_eq!(s.column("c"), None);
    }

    #[test]
    fn empty_lists_rejected() {
        let chain = ChainSpec::uniform(5, 1.0).unwrap();
        assert!(gap_vs_alpha(&chain, 20.0, &[], 500.0, 101).is_err());
        assert!(gap_vs_n(1.0, &[20.0], &[], 5.0, 500.0, 101).is_err());
        assert!(gap_vs_n(1.0, &[20.0], &[2], 5.0, 500.0, 101).is_err());
        assert!(gap_vs_n(1.0, &[0.5], &[5], 5.0, 500.0, 101).is_err());
        assert!(fidelity_grid(&chain, &[], &[20.0], 100.0, 5.0, StepPolicy::Default).is_err());
        let s = PulseSchedule::symmetric(20.0, 5.0, 100.0).unwrap();
        assert!(disorder_ensemble(&chain, &s, &[1.2], 0, 2, StepPolicy::Default).is_err());
    }

    #[test]
    fn min_time_rejects_bad_target_and_reports_cap() {
        let chain = ChainSpec::uniform(5, 1.0).unwrap();
        let search = TimeSearch {
            tau_start: 1.0,
            growth: 2.0,
            tau_cap: 4.0,
            rel_tol: 0.01,
            steps: StepPolicy::Fixed(200),
        };
        assert!(min_transfer_time(&chain, 20.0, 5.0, 1.0, &search).is_err());
        assert!(matches!(
            min_transfer_time(&chain, 20.0, 5.0, 0.995, &search),
            Err(Error::TargetUnreachable { n_sites: 5, .. })
        ));
    }

    #[test]
    fn level_trace_shape() {
        let chain = ChainSpec::uniform(5, 1.0).unwrap();
        let s = PulseSchedule::symmetric(20.0, 5.0, 500.0).unwrap();
        let t = level_trace(&chain, &s, 11).unwrap();
        assert_eq!(t.rows.len(), 11);
        assert_eq!(t.rows[0][1], -20.0);
        assert_eq!(t.rows[10][0], 500.0);
        for r in &t.rows {
            assert!(r[5] > 0.0);
            assert!((r[4] - r[3] - r[5]).abs() < 1e-15);
        }
    }
}
