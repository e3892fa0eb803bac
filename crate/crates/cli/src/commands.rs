use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dynstc::certificates::{verify_pointwise, CertificateBank};
use dynstc::sim::{
    check_prop1_bound, simulate, simulate_periodic, BoundReport, HybridTrajectory, Period,
    SimOptions, TrajectorySummary,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BenchConfig, ExperimentConfig, MechanismSpec};
use crate::error::CliError;
use crate::table::{render_bench, render_bench_csv, render_certify, BenchRow};

/// Relative tolerance of the flow-bound check.
pub const BOUND_TOLERANCE: f64 = 1e-6;

/// Default number of Monte-Carlo samples drawn by `certify`.
pub const DEFAULT_VERIFY_SAMPLES: usize = 10_000;

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandArgs {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub bank: Option<PathBuf>,
    pub seed: u64,
    pub dt: Option<f64>,
}

impl CommandArgs {
    fn config_path(&self) -> Result<&Path, CliError> {
        self.config
            .as_deref()
            .ok_or_else(|| CliError::usage("--config <path> is required"))
    }

    fn out_dir(&self, cfg_out: Option<&Path>) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg_out.map(Path::to_path_buf))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    fn validate_dt(&self) -> Result<(), CliError> {
        match self.dt {
            Some(dt) if !(dt > 0.0) || !dt.is_finite() => {
                Err(CliError::usage("--dt must be positive"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CertifyOutput {
    pub bank: CertificateBank<f64>,
    pub bank_path: PathBuf,
    pub table: String,
}

pub fn cmd_certify(args: &CommandArgs) -> Result<CertifyOutput, CliError> {
    let cfg = ExperimentConfig::load(args.config_path()?)?;
    let bank = cfg.synthesize()?;
    let system = cfg.system()?;
    let samples = cfg.verify_samples.unwrap_or(DEFAULT_VERIFY_SAMPLES);
    let report = verify_pointwise(
        &bank,
        |c| cfg.embedding(c),
        system.as_ref(),
        |c| cfg.sampling_region(c),
        samples,
        args.seed,
    )?;
    let mut table = render_certify(&bank)?;
    table.push_str(&format!(
        "verification: {} samples, worst margin {:.3e}\n",
        report.samples,
        report.worst_margin()
    ));
    if !report.passed(1e-6) {
        return Err(CliError::infeasible(format!(
            "{table}certificate rejected by pointwise verification ({} violations)",
            report.violations.len()
        )));
    }
    let bank_path = args
        .bank
        .clone()
        .or_else(|| cfg.bank.clone())
        .unwrap_or_else(|| {
            args.out_dir(cfg.out.as_deref())
                .join(format!("{}.bank.json", cfg.system_id()))
        });
    if let Some(parent) = bank_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    bank.save(&bank_path)?;
    Ok(CertifyOutput {
        bank,
        bank_path,
        table,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub mechanism: MechanismSpec,
    pub trajectory: HybridTrajectory,
    pub report: BoundReport,
    pub summary: TrajectorySummary,
}

impl RunOutput {
    pub fn bench_row(&self) -> BenchRow {
        let intervals: Vec<f64> = self.trajectory.events.iter().map(|e| e.interval).collect();
        let mean = intervals.iter().sum::<f64>() / intervals.len().max(1) as f64;
        BenchRow {
            name: self.name.clone(),
            mechanism: self.mechanism.label().to_string(),
            events: self.summary.num_events,
            fallback_events: self.trajectory.events.iter().filter(|e| e.fallback).count(),
            mean_interval: mean,
            min_interval: self.summary.min_interval,
            max_interval: self.summary.max_interval,
            final_v: self.summary.final_v,
            bound_ok: self.report.passed(),
        }
    }
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    name: &'a str,
    mechanism: &'a MechanismSpec,
    #[serde(flatten)]
    summary: &'a TrajectorySummary,
    fallback_events: usize,
    horizon: f64,
    dt: f64,
    bound_check: &'a BoundReport,
}

/// Simulates one experiment with the given bank and checks the flow bounds.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    bank: &CertificateBank<f64>,
    dt: Option<f64>,
) -> Result<RunOutput, CliError> {
    let exp = cfg.resolve()?;
    let system = cfg.system()?;
    if bank.n_x() != system.n_x() {
        return Err(CliError::usage(format!(
            "bank dimension {} does not match the system dimension {}",
            bank.n_x(),
            system.n_x()
        )));
    }
    let options = SimOptions { dt };
    let trajectory = match exp.mechanism {
        MechanismSpec::Periodic { period } => simulate_periodic(
            system.as_ref(),
            bank,
            Period::Fixed(period),
            &exp.x0,
            &exp.disturbance,
            exp.horizon,
            options,
        )?,
        MechanismSpec::LevelAdaptive => simulate_periodic(
            system.as_ref(),
            bank,
            Period::LevelAdaptive {
                delta: exp.trigger.delta,
            },
            &exp.x0,
            &exp.disturbance,
            exp.horizon,
            options,
        )?,
        dynamic => {
            let kind = dynamic.dynamic().expect("dynamic mechanism");
            simulate(
                system.as_ref(),
                bank,
                &exp.trigger,
                &kind,
                &exp.x0,
                &exp.disturbance,
                exp.horizon,
                options,
            )?
        }
    };
    trajectory
        .validate()
        .map_err(|e| CliError::usage(format!("invalid hybrid time domain: {e}")))?;
    let report = check_prop1_bound(&trajectory, BOUND_TOLERANCE);
    let summary = trajectory.summary();
    Ok(RunOutput {
        name: exp.name,
        mechanism: exp.mechanism,
        trajectory,
        report,
        summary,
    })
}

/// Writes `<name>.csv` and `<name>.summary.json` into `dir`.
pub fn write_run(dir: &Path, run: &RunOutput) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let csv = fs::File::create(dir.join(format!("{}.csv", run.name)))?;
    run.trajectory.write_csv(std::io::BufWriter::new(csv))?;
    let doc = SummaryDocument {
        name: &run.name,
        mechanism: &run.mechanism,
        summary: &run.summary,
        fallback_events: run.trajectory.events.iter().filter(|e| e.fallback).count(),
        horizon: run.trajectory.horizon,
        dt: run.trajectory.dt,
        bound_check: &run.report,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(dir.join(format!("{}.summary.json", run.name)), text)?;
    Ok(())
}

fn bank_for(
    cfg: &ExperimentConfig,
    explicit: Option<&Path>,
    cache: &BTreeMap<String, CertificateBank<f64>>,
) -> Result<CertificateBank<f64>, CliError> {
    if let Some(path) = cfg.bank.as_deref().or(explicit) {
        return CertificateBank::load(path)
            .map_err(|e| CliError::usage(format!("cannot load bank {}: {e}", path.display())));
    }
    let key = bank_key(cfg)?;
    match cache.get(&key) {
        Some(bank) => Ok(bank.clone()),
        None => cfg.synthesize(),
    }
}

fn bank_key(cfg: &ExperimentConfig) -> Result<String, CliError> {
    Ok(serde_json::to_string(&(
        &cfg.system,
        &cfg.epsilon_grid,
        &cfg.theta,
        &cfg.c_levels,
    ))?)
}

pub fn cmd_simulate(args: &CommandArgs) -> Result<RunOutput, CliError> {
    args.validate_dt()?;
    let cfg = ExperimentConfig::load(args.config_path()?)?;
    let bank = bank_for(&cfg, args.bank.as_deref(), &BTreeMap::new())?;
    let run = run_experiment(&cfg, &bank, args.dt)?;
    write_run(&args.out_dir(cfg.out.as_deref()), &run)?;
    if !run.report.passed() {
        return Err(CliError::bound_violation(format!(
            "{}: {} flow-bound violations",
            run.name, run.report.violation_count
        )));
    }
    Ok(run)
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub table: String,
    pub csv: String,
}

pub fn cmd_bench(args: &CommandArgs) -> Result<BenchOutput, CliError> {
    args.validate_dt()?;
    let bench = BenchConfig::load(args.config_path()?)?;
    let experiments = bench.experiments()?;
    let out = args.out_dir(None);

    let mut cache = BTreeMap::new();
    for cfg in &experiments {
        if cfg.bank.is_none() && args.bank.is_none() {
            let key = bank_key(cfg)?;
            if let Entry::Vacant(slot) = cache.entry(key) {
                slot.insert(cfg.synthesize()?);
            }
        }
    }
    let runs: Vec<Result<RunOutput, CliError>> = experiments
        .par_iter()
        .map(|cfg| {
            let bank = bank_for(cfg, args.bank.as_deref(), &cache)?;
            run_experiment(cfg, &bank, args.dt)
        })
        .collect();
    let runs: Vec<RunOutput> = runs.into_iter().collect::<Result<_, _>>()?;

    let mut names = std::collections::BTreeSet::new();
    for run in &runs {
        if !names.insert(run.name.as_str()) {
            return Err(CliError::usage(format!(
                "duplicate experiment name `{}`",
                run.name
            )));
        }
    }
    for run in &runs {
        write_run(&out, run)?;
    }
    let rows: Vec<BenchRow> = runs.iter().map(RunOutput::bench_row).collect();
    let table = render_bench(&rows);
    let csv = render_bench_csv(&rows);
    fs::create_dir_all(&out)?;
    fs::write(out.join("bench.txt"), &table)?;
    fs::write(out.join("bench.csv"), &csv)?;
    if let Some(bad) = runs.iter().find(|r| !r.report.passed()) {
        return Err(CliError::bound_violation(format!(
            "{table}{}: {} flow-bound violations",
            bad.name, bad.report.violation_count
        )));
    }
    Ok(BenchOutput { rows, table, csv })
}
