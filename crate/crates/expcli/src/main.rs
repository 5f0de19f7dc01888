use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expcli::meta::write_outputs;
use expcli::plan::{PresetName, RealizationScale};
use expcli::records::{eth_summary, saturated_summary, time_summary, write_csv};
use expcli::run::{seed_table, workers_from_env};
use expcli::{ExpError, ExperimentPlan, Result, StateKind};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "macrospin", version, about = "Macroscopicity of spin-chain superpositions under disordered dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// M/N against time for every realization and state
    TimeSeries(PlanArgs),
    /// Saturated M/N against system size
    Scaling(PlanArgs),
    /// Staggered-magnetization variance of rotated Néel states
    Staggered(PlanArgs),
    /// Long-time versus thermal variance
    EthReport(PlanArgs),
    /// Synthetic l-bit dynamics and the lower bound on M
    LbitDemo(PlanArgs),
    /// Run the invariant suite
    Validate {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct PlanArgs {
    /// TOML plan; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// System sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Disorder strengths, comma separated
    #[arg(long, value_delimiter = ',')]
    h: Vec<f64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long, value_enum)]
    state_kind: Option<StateArg>,
    /// v = cos θ values of rotated Néel states, comma separated
    #[arg(long, value_delimiter = ',')]
    v: Vec<f64>,
    /// Explicit evaluation times, comma separated
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    /// Use the paper-scale realization counts
    #[arg(long)]
    paper_scale: bool,
    /// Output base path; writes <out>.csv, <out>_summary.csv, <out>.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the derived seed table and exit
    #[arg(long)]
    dry_run: bool,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum PresetArg {
    Heisenberg,
    XxAnderson,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum StateArg {
    RandomGhz,
    Ghz,
    RotatedNeel,
}

fn default_plan(command: &Command) -> ExperimentPlan {
    match command {
        Command::TimeSeries(_) => {
            let mut p = ExperimentPlan::new(vec![0.5, 1.5, 2.5, 4.0, 5.0], vec![10]);
            p.states = 10;
            p
        }
        Command::Scaling(_) => {
            let mut p = ExperimentPlan::new(vec![1.0, 5.0], vec![6, 8, 10]);
            p.states = 10;
            p
        }
        Command::Staggered(_) => {
            let mut p = ExperimentPlan::new(vec![5.0], vec![6, 8, 10]);
            p.state_kind = StateKind::RotatedNeel;
            p.v_values = vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
            p
        }
        Command::EthReport(_) => {
            let mut p = ExperimentPlan::new(vec![0.5, 5.0], vec![6, 8, 10]);
            p.realizations = Some(50);
            p
        }
        Command::LbitDemo(_) | Command::Validate { .. } => {
            let mut p = ExperimentPlan::new(vec![0.0], vec![8]);
            p.realizations = Some(5);
            p
        }
    }
}

fn build_plan(command: &Command, a: &PlanArgs) -> Result<ExperimentPlan> {
    let mut p = match &a.config {
        Some(path) => ExperimentPlan::load(path)?,
        None => default_plan(command),
    };
    if !a.n.is_empty() {
        p.sizes = a.n.clone();
    }
    if !a.h.is_empty() {
        p.h_values = a.h.clone();
    }
    if let Some(r) = a.realizations {
        p.realizations = Some(r);
    }
    if a.paper_scale {
        p.realizations = None;
        p.realization_scale = RealizationScale::PaperScale;
    }
    if let Some(s) = a.states {
        p.states = s;
    }
    if let Some(s) = a.seed {
        p.master_seed = s;
    }
    if let Some(pr) = a.preset {
        p.preset = match pr {
            PresetArg::Heisenberg => PresetName::Heisenberg,
            PresetArg::XxAnderson => PresetName::XxAnderson,
        };
    }
    if let Some(k) = a.state_kind {
        p.state_kind = match k {
            StateArg::RandomGhz => StateKind::RandomGhz,
            StateArg::Ghz => StateKind::Ghz,
            StateArg::RotatedNeel => StateKind::RotatedNeel,
        };
        if p.state_kind != StateKind::RotatedNeel {
            p.thetas.clear();
            p.v_values.clear();
        }
    }
    if !a.v.is_empty() {
        p.v_values = a.v.clone();
        p.thetas.clear();
    }
    if !a.times.is_empty() {
        p.times = Some(a.times.clone());
    }
    if let Some(out) = &a.out {
        p.output.path = Some(out.clone());
    }
    p.validate()?;
    Ok(p)
}

fn print_seed_table(plan: &ExperimentPlan) -> Result<()> {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["n", "h", "realization", "seed", "state_seeds"])?;
    for r in seed_table(plan)? {
        let states: Vec<String> = r.state_seeds.iter().map(u64::to_string).collect();
        w.write_record([
            r.n.to_string(),
            format!("{:?}", r.h),
            r.realization.to_string(),
            r.seed.to_string(),
            states.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn emit<R: Serialize, S: Serialize>(
    command: &str,
    plan: &ExperimentPlan,
    out: &expcli::RunOutput<R>,
    summary: &[S],
) -> Result<()> {
    match &plan.output.path {
        Some(base) => {
            let paths = write_outputs(base, command, plan, out, summary)?;
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        None => write_csv(io::stdout().lock(), &out.records)?,
    }
    if !out.failures.is_empty() {
        eprintln!("{} realization(s) failed and were skipped", out.failures.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    if let Command::Validate { seed } = cli.command {
        let report = macrospin::validate::run_all(seed);
        for c in &report.checks {
            println!("{c}");
        }
        return Ok(report.all_passed());
    }
    let (name, args) = match &cli.command {
        Command::TimeSeries(a) => ("time-series", a),
        Command::Scaling(a) => ("scaling", a),
        Command::Staggered(a) => ("staggered", a),
        Command::EthReport(a) => ("eth-report", a),
        Command::LbitDemo(a) => ("lbit-demo", a),
        Command::Validate { .. } => unreachable!(),
    };
    let plan = build_plan(&cli.command, args)?;
    if args.dry_run {
        print_seed_table(&plan)?;
        return Ok(true);
    }
    let workers = workers_from_env();
    match &cli.command {
        Command::TimeSeries(_) => {
            let out = expcli::run_time_series(&plan, workers)?;
            emit(name, &plan, &out, &time_summary(&out.records))?;
        }
        Command::Scaling(_) => {
            let out = expcli::run_scaling(&plan, workers)?;
            emit(name, &plan, &out, &saturated_summary(&out.records, plan.window()))?;
        }
        Command::Staggered(_) => {
            let out = expcli::run_staggered(&plan, workers)?;
            emit(name, &plan, &out, &saturated_summary(&out.records, plan.window()))?;
        }
        Command::EthReport(_) => {
            let out = expcli::run_eth_report(&plan, workers)?;
            emit(name, &plan, &out, &eth_summary(&out.records))?;
        }
        Command::LbitDemo(_) => {
            let out = expcli::run_lbit_demo(&plan, workers)?;
            emit(name, &plan, &out, &[] as &[()])?;
        }
        Command::Validate { .. } => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let ExpError::Config { .. } = e {
                eprintln!("(config keys must match the ExperimentPlan field names)");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
