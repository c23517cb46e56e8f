//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line with
//! the measured numbers; the process exits non-zero if any criterion fails.
//!
//! Long sweeps use a fixed time step of 1/40 (`StepPolicy::PerUnitTime(40)`);
//! criterion 9 checks that this agrees with the default step policy.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use adiabatic_chain::chain_model::Protocol;
use adiabatic_chain::experiments::{self, StepPolicy, SweepResult, TimeSearch};
use adiabatic_chain::propagator::{self, default_n_steps, evolve_drive};
use adiabatic_chain::spectral::{self, bound_state_ground};
use adiabatic_chain::{min_gap, ChainSpec, PulseSchedule, StateVector, SymTridiagonal};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SWEEP_STEPS: StepPolicy = StepPolicy::PerUnitTime(40.0);
const DISORDER_SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Norm drift collected from every propagation run, for criterion 9.
#[derive(Default)]
struct NormLedger {
    runs: usize,
    worst: f64,
}

impl NormLedger {
    fn record(&mut self, drift: f64) {
        self.runs += 1;
        self.worst = self.worst.max(drift);
    }

    fn record_column(&mut self, sweep: &SweepResult) {
        for d in sweep
            .column("max_norm_deviation")
            .expect("sweep reports norm drift")
        {
            self.record(d);
        }
    }
}

fn chain(n: usize) -> ChainSpec {
    ChainSpec::uniform(n, 1.0).unwrap()
}

fn uniform_gap(n: usize) -> f64 {
    let k = PI / (n + 1) as f64;
    2.0 * (k.cos() - (2.0 * k).cos())
}

fn bound_state_overlap() -> Verdict {
    let spec = chain(5);
    let schedule = PulseSchedule::symmetric(20.0, 5.0, 500.0).unwrap();
    let analytic = bound_state_ground(&spec, 20.0, false).unwrap();
    let c1 = analytic.population(0);

    let mut worst: f64 = 1.0;
    for (t, state) in [
        (0.0, analytic.clone()),
        (500.0, bound_state_ground(&spec, 20.0, true).unwrap()),
    ] {
        let sample = spectral::spectrum_at(&spec, &schedule, t).unwrap();
        let ground = StateVector::from_real(sample.ground_state()).unwrap();
        worst = worst.min(ground.inner(&state).norm_sqr());
    }
    Verdict::new(
        (c1 - 0.9975).abs() <= 1e-4 && worst >= 0.9999,
        format!("|c1|^2 = {c1:.6} (0.9975 +- 1e-4), overlap with H(0) and H(tau) ground states >= {worst:.8} (>= 0.9999)"),
    )
}

fn gap_plateau() -> Verdict {
    let list: Vec<f64> = (4..=40).map(|k| 0.5 * k as f64).collect();
    let sweep = experiments::gap_vs_alpha(&chain(5), 20.0, &list, 500.0, 2001).unwrap();
    let target = uniform_gap(5);
    let at = sweep.column("alpha_over_tau").unwrap();
    let mid = sweep.column("delta_mid").unwrap();
    let global = sweep.column("delta_min").unwrap();
    let worst = at
        .iter()
        .zip(&mid)
        .filter(|(a, _)| **a >= 10.0)
        .map(|(_, d)| (d - target).abs())
        .fold(0.0, f64::max);
    let monotone = mid.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let d4 = mid[at.iter().position(|&a| a == 4.0).unwrap()];
    let d5 = mid[at.iter().position(|&a| a == 5.0).unwrap()];
    Verdict::new(
        worst <= 1e-3 && monotone && d4 < d5,
        format!(
            "max |Delta(tau/2) - {target:.6}| for alpha tau >= 10: {worst:.2e} (<= 1e-3); non-decreasing: {monotone}; \
             Delta(4) = {d4:.4} < Delta(5) = {d5:.4}; global min over [0, tau] at alpha tau = 20: {:.4}",
            global.last().unwrap()
        ),
    )
}

fn gap_scaling() -> Verdict {
    let mus = [16.0, 20.0, 24.0];
    let n_list: Vec<usize> = (5..=10).collect();
    let scaling = experiments::gap_vs_n(1.0, &mus, &n_list, 5.0, 500.0, 2001).unwrap();
    let r2_ok = scaling.slopes.iter().all(|(_, f)| f.r_squared >= 0.98);
    let slope = |mu: f64| {
        scaling
            .slopes
            .iter()
            .find(|(m, _)| *m == mu)
            .unwrap()
            .1
            .slope
    };
    let ratio = slope(16.0) / slope(24.0);
    let expected = 24.0 / 16.0;
    let ratio_ok = (ratio / expected - 1.0).abs() <= 0.15;
    let positive = scaling
        .sweep
        .column("delta_mid")
        .unwrap()
        .iter()
        .all(|&d| d > 0.0)
        && scaling
            .sweep
            .column("delta_min")
            .unwrap()
            .iter()
            .all(|&d| d > 0.0);
    let fits: Vec<String> = scaling
        .slopes
        .iter()
        .map(|(mu, f)| format!("mu0={mu}: slope {:.3}, R^2 {:.5}", f.slope, f.r_squared))
        .collect();
    Verdict::new(
        r2_ok && ratio_ok && positive,
        format!(
            "{}; slope ratio 16/24 = {ratio:.3} (expected {expected} within 15%); all gaps > 0: {positive}",
            fits.join("; ")
        ),
    )
}

fn fidelity_benchmarks(norms: &mut NormLedger) -> Verdict {
    let spec = chain(5);
    let mut f = [0.0; 2];
    for (slot, at) in f.iter_mut().zip([5.0, 4.0]) {
        let schedule = PulseSchedule::symmetric(20.0, at, 500.0).unwrap();
        let run =
            experiments::population_trace(&spec, &schedule, default_n_steps(&schedule)).unwrap();
        norms.record(run.max_norm_deviation);
        *slot = run.fidelity;
    }
    Verdict::new(
        f[0] >= 0.99 && (0.05..=0.20).contains(&f[1]),
        format!(
            "F(alpha tau = 5) = {:.5} (>= 0.99), F(alpha tau = 4) = {:.4} (in [0.05, 0.20])",
            f[0], f[1]
        ),
    )
}

fn gap_location() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for tau in [100.0, 500.0, 1000.0] {
        for mu in [16.0, 20.0, 24.0] {
            let schedule = PulseSchedule::symmetric(mu, 5.0, tau).unwrap();
            let m = min_gap(&chain(5), &schedule, 2001).unwrap();
            worst = worst.max((m.t_star - 0.5 * tau).abs() / tau);
            cases += 1;
        }
    }
    Verdict::new(
        worst <= 1e-3,
        format!("N=5, alpha tau=5, tau in {{100, 500, 1000}}, mu0 in {{16, 20, 24}}: max |t* - tau/2| / tau = {worst:.2e} over {cases} schedules (<= 1e-3)"),
    )
}

fn transfer_time_scaling(norms: &mut NormLedger) -> Verdict {
    let search = TimeSearch {
        steps: SWEEP_STEPS,
        ..TimeSearch::default()
    };
    let n_list: Vec<usize> = (5..=10).collect();
    let scaling =
        experiments::min_time_for_fidelity(1.0, &n_list, 20.0, 5.0, 0.995, &search).unwrap();
    norms.record_column(&scaling.sweep);
    let fit = scaling.fit;
    let n = 10.0;
    let quad = fit.a * n * n;
    let rest = (fit.b * n).abs() + fit.c.abs();
    let shape_ok = fit.a > 0.0 && quad > rest && fit.r_squared >= 0.98;
    let taus = scaling.sweep.column("tau_min").unwrap();
    let increasing = taus.windows(2).all(|w| w[1] > w[0]);

    let doubled = experiments::min_transfer_time(&chain(5), 40.0, 5.0, 0.995, &search).unwrap();
    norms.record(doubled.max_norm_deviation);
    let mu_ratio = doubled.tau_min / taus[0];
    let mu_ok = (mu_ratio / 2.0 - 1.0).abs() <= 0.20;

    let listed: Vec<String> = taus.iter().map(|t| format!("{t:.0}")).collect();
    Verdict::new(
        shape_ok && mu_ok,
        format!(
            "tau_min(N=5..10) = [{}]; fit a={:.3} b={:.2} c={:.1}, R^2={:.4}; a N^2 = {quad:.0} vs |bN|+|c| = {rest:.0}; \
             increasing: {increasing}; tau(10)/tau(5) = {:.2}; tau_min(mu0=40)/tau_min(mu0=20) at N=5 = {:.0}/{:.0} = {mu_ratio:.2} (expected 2 within 20%)",
            listed.join(", "),
            fit.a,
            fit.b,
            fit.c,
            fit.r_squared,
            taus[5] / taus[0],
            doubled.tau_min,
            taus[0],
        ),
    )
}

fn peak_grid(norms: &mut NormLedger) -> Verdict {
    let peaks: Vec<f64> = (10..=25).map(f64::from).collect();
    let grid =
        experiments::fidelity_grid(&chain(5), &peaks, &peaks, 1000.0, 5.0, SWEEP_STEPS).unwrap();
    norms.record_column(&grid);
    let m = peaks.len();
    let f = grid.column("fidelity").unwrap();
    let mut asym: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            asym = asym.max((f[i * m + j] - f[j * m + i]).abs());
        }
    }
    let deep: Vec<(f64, f64, f64)> = grid
        .rows
        .iter()
        .filter(|r| r[0] >= 20.0 && r[1] >= 20.0)
        .map(|r| (r[0], r[1], r[2]))
        .collect();
    let failing: Vec<String> = deep
        .iter()
        .filter(|c| c.2 < 0.995)
        .map(|c| format!("({}, {}) = {:.5}", c.0, c.1, c.2))
        .collect();
    let min_deep = deep.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    Verdict::new(
        failing.is_empty() && asym <= 1e-2,
        format!(
            "N=5, tau=1000, 16x16 grid over [10, 25] J: min F over peaks >= 20J = {min_deep:.5} (>= 0.995), {} of {} cells below [{}]; max swap asymmetry {asym:.1e} (<= 1e-2)",
            failing.len(),
            deep.len(),
            failing.join(", ")
        ),
    )
}

fn disorder(norms: &mut NormLedger) -> Verdict {
    let schedule = PulseSchedule::symmetric(20.0, 5.0, 500.0).unwrap();
    let ensemble = experiments::disorder_ensemble(
        &chain(5),
        &schedule,
        &[0.1, 0.2, 0.3],
        DISORDER_SEED,
        20,
        SWEEP_STEPS,
    )
    .unwrap();
    norms.record_column(&ensemble.samples);
    let min = ensemble.summary.column("min").unwrap();
    let max = ensemble.summary.column("max").unwrap();
    let mean = ensemble.summary.column("mean").unwrap();
    Verdict::new(
        min[0] >= 0.98 && min[1] >= 0.95 && max[2] >= 0.99,
        format!(
            "seed {DISORDER_SEED}, 20 samples: delta=0.1 min {:.4} (>= 0.98); delta=0.2 min {:.4} (>= 0.95); \
             delta=0.3 max {:.4} (>= 0.99), min {:.4}; means {:.4}/{:.4}/{:.4}",
            min[0], min[1], max[2], min[2], mean[0], mean[1], mean[2]
        ),
    )
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let amps = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(amps).unwrap()
}

fn distance(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn eigensolver_residuals(rng: &mut ChaCha8Rng, trials: usize) -> (f64, f64, f64) {
    let (mut resid, mut ortho, mut trace): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..trials {
        let n = rng.random_range(2..=12);
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-25.0..=25.0)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-2.0..0.0)).collect();
        let h = SymTridiagonal::new(diag, off).unwrap();
        let s = spectral::eigensystem(&h).unwrap();
        for (k, v) in s.eigenvectors.iter().enumerate() {
            let hv = h.matvec(v);
            let r = hv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - s.eigenvalues[k] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            resid = resid.max(r);
            for (l, w) in s.eigenvectors.iter().enumerate() {
                let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                let want = if k == l { 1.0 } else { 0.0 };
                ortho = ortho.max((dot - want).abs());
            }
        }
        let sum: f64 = s.eigenvalues.iter().sum();
        trace = trace.max((sum - h.trace()).abs());
    }
    (resid, ortho, trace)
}

fn numerical_integrity(norms: &NormLedger) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = chain(5);
    let schedule = PulseSchedule::symmetric(20.0, 5.0, 500.0).unwrap();
    let drive = Protocol::new(&spec, &schedule);

    // unitarity: inner products survive the full propagation
    let a = random_state(&mut rng, 5);
    let b = random_state(&mut rng, 5);
    let n_steps = default_n_steps(&schedule);
    let fa = evolve_drive(&drive, &a, n_steps, n_steps)
        .unwrap()
        .final_state;
    let fb = evolve_drive(&drive, &b, n_steps, n_steps)
        .unwrap()
        .final_state;
    let unitarity = (fa.inner(&fb) - a.inner(&b)).norm();

    // order from successive step halving on a short, fast sweep
    let short = PulseSchedule::symmetric(20.0, 5.0, 20.0).unwrap();
    let short_drive = Protocol::new(&spec, &short);
    let start = StateVector::localized(5, 0);
    let finals: Vec<StateVector> = [400, 800, 1600]
        .iter()
        .map(|&n| {
            evolve_drive(&short_drive, &start, n, n)
                .unwrap()
                .final_state
        })
        .collect();
    let order = (distance(&finals[0], &finals[1]) / distance(&finals[1], &finals[2])).log2();

    let trials = 10_000;
    let (resid, ortho, trace) = eigensolver_residuals(&mut rng, trials);

    // reruns and thread counts must not change a single byte
    let deltas = [0.1, 0.3];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            experiments::disorder_ensemble(
                &spec,
                &schedule,
                &deltas,
                7,
                6,
                StepPolicy::PerUnitTime(20.0),
            )
            .unwrap()
            .samples
            .to_csv_string()
        })
    };
    let first = run(1);
    let identical = first == run(1) && first == run(3);

    // the sweep step policy agrees with the default one
    let spot = PulseSchedule::symmetric(20.0, 5.0, 1000.0).unwrap();
    let coarse = propagator::transfer_fidelity(&spec, &spot, SWEEP_STEPS.steps_for(&spot)).unwrap();
    let fine = propagator::transfer_fidelity(&spec, &spot, default_n_steps(&spot)).unwrap();
    let policy_gap = (coarse - fine).abs();

    let pass = norms.worst <= 1e-9
        && unitarity <= 1e-8
        && order >= 1.9
        && resid <= 1e-10
        && ortho <= 1e-10
        && identical
        && policy_gap <= 1e-6;
    Verdict::new(
        pass,
        format!(
            "norm drift {:.1e} over {} runs (<= 1e-9); inner-product drift {unitarity:.1e} (<= 1e-8); observed order {order:.3} (>= 1.9); \
             {trials} random tridiagonals: residual {resid:.1e}, orthonormality {ortho:.1e}, trace {trace:.1e} (<= 1e-10); \
             byte-identical reruns across 1/1/3 threads: {identical}; dt=1/40 vs default step policy at tau=1000: {policy_gap:.1e} (<= 1e-6)",
            norms.worst, norms.runs
        ),
    )
}

fn main() -> ExitCode {
    let mut norms = NormLedger::default();
    let mut failures = 0;
    let mut report = |id: u32, name: &str, check: &mut dyn FnMut() -> Verdict| {
        let started = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {id} {name} ({:.1}s): {}",
            started.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            failures += 1;
        }
    };
    report(1, "bound-state overlap", &mut bound_state_overlap);
    report(2, "gap plateau", &mut gap_plateau);
    report(3, "gap scaling", &mut gap_scaling);
    report(4, "fidelity benchmarks", &mut || {
        fidelity_benchmarks(&mut norms)
    });
    report(5, "minimum-gap location", &mut gap_location);
    report(6, "transfer-time scaling", &mut || {
        transfer_time_scaling(&mut norms)
    });
    report(7, "peak-voltage grid", &mut || peak_grid(&mut norms));
    report(8, "disorder robustness", &mut || disorder(&mut norms));
    report(9, "numerical integrity", &mut || {
        numerical_integrity(&norms)
    });
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
