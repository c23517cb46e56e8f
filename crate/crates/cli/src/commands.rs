use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use adiabatic_chain::experiments::{self, format_f64, Observable, SweepResult, TimeSearch};
use adiabatic_chain::{min_gap, ChainSpec, PulseSchedule};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::config::{Format, RunConfig, DEFAULT_TARGET};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    /// Lowest two levels and the pulses over one run
    #[value(name = "2b")]
    LevelTrace,
    /// Minimum gap vs chain length for mu0 in {16, 20, 24}
    #[value(name = "3a")]
    GapVsN,
    /// Minimum gap vs alpha tau
    #[value(name = "3b")]
    GapVsAlpha,
    /// Transfer fidelity vs alpha tau
    #[value(name = "4c")]
    FidelityVsAlpha,
    /// Shortest transfer time vs chain length, with quadratic fit
    #[value(name = "5")]
    TransferTime,
    /// Fidelity over a grid of both peak depths
    #[value(name = "6")]
    PeakGrid,
    /// Bond-disorder ensembles
    #[value(name = "7")]
    Disorder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    NSites,
    Coupling,
    /// Both peak depths together
    Mu0,
    MuAMax,
    MuBMax,
    AlphaOverTau,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObservableArg {
    Fidelity,
    MinGap,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Parameter to vary
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Comma-separated values for the parameter
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, value_enum, default_value = "fidelity")]
    pub observable: ObservableArg,
}

#[derive(Serialize)]
struct EvolveSummary {
    fidelity: f64,
    max_norm_deviation: f64,
    n_steps: usize,
    record_every: usize,
    seed: u64,
    parameters: Parameters,
}

#[derive(Serialize)]
struct Parameters {
    n_sites: usize,
    coupling: f64,
    bonds: Vec<f64>,
    mu_a_max: f64,
    mu_b_max: f64,
    alpha_over_tau: f64,
    tau: f64,
    delta: f64,
}

#[derive(Serialize)]
struct GapReport {
    t_star: f64,
    delta_min: f64,
}

pub fn evolve(cfg: &RunConfig) -> Result<(), CliError> {
    let chain = cfg.chain()?;
    let schedule = cfg.schedule()?;
    let n_steps = cfg.step_policy()?.steps_for(&schedule);
    let record_every = adiabatic_chain::propagator::default_record_every(n_steps);
    let traj = experiments::population_trace(&chain, &schedule, n_steps)?;

    let columns =
        std::iter::once("t".to_string()).chain((1..=chain.n_sites()).map(|j| format!("p{j}")));
    let mut table = SweepResult::new(columns);
    for (t, pops) in traj.times.iter().zip(&traj.populations) {
        let mut row = Vec::with_capacity(pops.len() + 1);
        row.push(*t);
        row.extend_from_slice(pops);
        table.push(row);
    }
    let table = describe(table, &chain, &schedule)
        .with_meta("experiment", "population trace from site 1")
        .with_meta("seed", cfg.seed())
        .with_meta("delta", format_f64(cfg.delta()))
        .with_meta("n_steps", n_steps)
        .with_meta("record_every", record_every);

    let summary = EvolveSummary {
        fidelity: traj.fidelity,
        max_norm_deviation: traj.max_norm_deviation,
        n_steps,
        record_every,
        seed: cfg.seed(),
        parameters: Parameters {
            n_sites: chain.n_sites(),
            coupling: chain.coupling(),
            bonds: chain.bonds().to_vec(),
            mu_a_max: schedule.mu_a_max(),
            mu_b_max: schedule.mu_b_max(),
            alpha_over_tau: schedule.alpha_tau(),
            tau: schedule.tau(),
            delta: cfg.delta(),
        },
    };
    let summary = to_json(&summary)?;

    emit(&table, cfg)?;
    match &cfg.out {
        Some(path) => write_file(&sidecar_path(path), summary.as_bytes()),
        None => {
            eprint!("{summary}");
            Ok(())
        }
    }
}

pub fn gap(cfg: &RunConfig) -> Result<(), CliError> {
    let chain = cfg.chain()?;
    let schedule = cfg.schedule()?;
    let m = min_gap(&chain, &schedule, cfg.gap_grid())?;
    let report = to_json(&GapReport {
        t_star: m.t_star,
        delta_min: m.delta_min,
    })?;
    match &cfg.out {
        Some(path) => write_file(path, report.as_bytes()),
        None => write_stdout(report.as_bytes()),
    }
}

pub fn figure(id: FigureId, cfg: &RunConfig) -> Result<(), CliError> {
    let mu0 = cfg.mu_a_max();
    let alpha_tau = cfg.alpha_tau();
    let steps = cfg.step_policy()?;
    match id {
        FigureId::LevelTrace => {
            let table = experiments::level_trace(&cfg.chain()?, &cfg.schedule()?, 1001)?;
            emit(&table.with_meta("experiment", "instantaneous levels"), cfg)
        }
        FigureId::GapVsN => {
            let tau = cfg.tau.unwrap_or(crate::config::DEFAULT_TAU);
            let n_list: Vec<usize> = (5..=10).collect();
            let scaling = experiments::gap_vs_n(
                cfg.coupling(),
                &[16.0, 20.0, 24.0],
                &n_list,
                alpha_tau,
                tau,
                cfg.gap_grid(),
            )?;
            emit(&scaling.sweep, cfg)
        }
        FigureId::GapVsAlpha => {
            let tau = cfg.tau.unwrap_or(crate::config::DEFAULT_TAU);
            let list: Vec<f64> = (4..=40).map(|k| 0.5 * k as f64).collect();
            let table = experiments::gap_vs_alpha(&cfg.chain()?, mu0, &list, tau, cfg.gap_grid())?;
            emit(&table, cfg)
        }
        FigureId::FidelityVsAlpha => {
            let tau = cfg.tau.unwrap_or(crate::config::DEFAULT_TAU);
            let list: Vec<f64> = (12..=28).map(|k| 0.25 * k as f64).collect();
            let table = experiments::fidelity_vs_alpha(&cfg.chain()?, mu0, tau, &list, steps)?;
            emit(&table, cfg)
        }
        FigureId::TransferTime => {
            let search = TimeSearch {
                steps,
                ..TimeSearch::default()
            };
            let n_list: Vec<usize> = (5..=10).collect();
            let target = cfg.target_fidelity.unwrap_or(DEFAULT_TARGET);
            let scaling = experiments::min_time_for_fidelity(
                cfg.coupling(),
                &n_list,
                mu0,
                alpha_tau,
                target,
                &search,
            )?;
            emit(&scaling.sweep, cfg)
        }
        FigureId::PeakGrid => {
            let tau = cfg.tau.unwrap_or(1000.0);
            let list: Vec<f64> = (10..=25).map(f64::from).collect();
            let table =
                experiments::fidelity_grid(&cfg.chain()?, &list, &list, tau, alpha_tau, steps)?;
            emit(&table, cfg)
        }
        FigureId::Disorder => {
            let deltas = match cfg.delta {
                Some(d) => vec![d],
                None => vec![0.1, 0.2, 0.3],
            };
            let ensemble = experiments::disorder_ensemble(
                &cfg.clean_chain()?,
                &cfg.schedule()?,
                &deltas,
                cfg.seed(),
                cfg.n_samples.unwrap_or(20),
                steps,
            )?;
            match &cfg.out {
                Some(path) => {
                    emit(&ensemble.samples, cfg)?;
                    let summary_cfg = RunConfig {
                        out: Some(summary_path(path, cfg.format())),
                        ..cfg.clone()
                    };
                    emit(&ensemble.summary, &summary_cfg)
                }
                None => {
                    emit(&ensemble.samples, cfg)?;
                    write_stdout(b"\n")?;
                    emit(&ensemble.summary, cfg)
                }
            }
        }
    }
}

pub fn sweep(args: &SweepArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let base_chain = cfg.chain()?;
    let cells: Vec<(ChainSpec, PulseSchedule)> = args
        .values
        .iter()
        .map(|&v| sweep_cell(args.param, v, cfg, &base_chain))
        .collect::<Result<_, _>>()?;
    let observable = match args.observable {
        ObservableArg::Fidelity => Observable::Fidelity,
        ObservableArg::MinGap => Observable::MinGap,
    };
    let label = args
        .param
        .to_possible_value()
        .map(|v| v.get_name().replace('-', "_"))
        .unwrap_or_default();
    let table = experiments::sweep_cells(
        &label,
        &args.values,
        &cells,
        observable,
        cfg.step_policy()?,
        cfg.gap_grid(),
    )?;
    let (chain, schedule) = (&cells[0].0, &cells[0].1);
    let table = describe(table, chain, schedule)
        .with_meta("swept", &label)
        .with_meta("seed", cfg.seed())
        .with_meta("delta", format_f64(cfg.delta()));
    emit(&table, cfg)
}

fn sweep_cell(
    param: SweepParam,
    v: f64,
    cfg: &RunConfig,
    base_chain: &ChainSpec,
) -> Result<(ChainSpec, PulseSchedule), CliError> {
    let mut c = cfg.clone();
    match param {
        SweepParam::NSites => {
            if !(v.fract() == 0.0 && v >= 1.0) {
                return Err(CliError::Validation(format!(
                    "n_sites must be a positive integer, got {v}"
                )));
            }
            c.n_sites = Some(v as usize);
        }
        SweepParam::Coupling => c.coupling = Some(v),
        SweepParam::Mu0 => {
            c.mu_a_max = Some(v);
            c.mu_b_max = Some(v);
        }
        SweepParam::MuAMax => c.mu_a_max = Some(v),
        SweepParam::MuBMax => c.mu_b_max = Some(v),
        SweepParam::AlphaOverTau => c.alpha_over_tau = Some(v),
        SweepParam::Tau => c.tau = Some(v),
    }
    let chain = match param {
        SweepParam::NSites | SweepParam::Coupling => c.chain()?,
        _ => base_chain.clone(),
    };
    Ok((chain, c.schedule()?))
}

fn describe(table: SweepResult, chain: &ChainSpec, schedule: &PulseSchedule) -> SweepResult {
    table
        .with_meta("n_sites", chain.n_sites())
        .with_meta("coupling", format_f64(chain.coupling()))
        .with_meta(
            "bonds",
            chain
                .bonds()
                .iter()
                .map(|&b| format_f64(b))
                .collect::<Vec<_>>()
                .join(" "),
        )
        .with_meta("mu_a_max", format_f64(schedule.mu_a_max()))
        .with_meta("mu_b_max", format_f64(schedule.mu_b_max()))
        .with_meta("alpha_over_tau", format_f64(schedule.alpha_tau()))
        .with_meta("tau", format_f64(schedule.tau()))
        .with_meta("units", "energy in J, time in 1/J (hbar = 1)")
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn emit(table: &SweepResult, cfg: &RunConfig) -> Result<(), CliError> {
    let bytes = match cfg.format() {
        Format::Csv => table.to_csv_string().into_bytes(),
        Format::Json => to_json(table)?.into_bytes(),
    };
    match &cfg.out {
        Some(path) => write_file(path, &bytes),
        None => write_stdout(&bytes),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    w.write_all(bytes).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn write_stdout(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("cannot write to standard output: {e}")))
}

/// `run.csv` -> `run.summary.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

/// `ensemble.csv` -> `ensemble.summary.csv`.
fn summary_path(out: &Path, format: Format) -> PathBuf {
    match format {
        Format::Csv => out.with_extension("summary.csv"),
        Format::Json => out.with_extension("summary.json"),
    }
}
