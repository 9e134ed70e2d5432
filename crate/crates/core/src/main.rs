use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coevolve::harness::{self, ConfigFile};
use coevolve::{
    consensus_fixed_point, output, simulate, DynamicsParams, Error, RemovalPolicy, Result,
    SimConfig,
};

#[derive(Parser)]
#[command(
    name = "coevolve",
    version,
    about = "Opinion and network co-evolution under link recommendation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its trajectory.
    Run(RunArgs),
    /// Run a parameter sweep with replicates.
    Sweep(SweepArgs),
    /// Print the consensus fixed point of the opinion update.
    FixedPoint {
        #[arg(long, default_value_t = 0.1)]
        k: f64,
        #[arg(long, default_value_t = 0.99)]
        gamma: f64,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
    },
    /// Check a config file and print the resolved configuration.
    Validate { file: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags override its values.
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Link removal rule: `uniform` or `spare-last-link`.
    #[arg(long, value_parser = parse_removal)]
    removal: Option<RemovalPolicy>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mean_degree: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    record_every: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    init_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    init_hi: Option<f64>,
    /// Comma-separated steps at which to write graph and opinion snapshots.
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Option<Vec<u64>>,
    /// Also write every node's opinion at each recorded step.
    #[arg(long)]
    record_opinions: bool,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep specification.
    spec: Option<PathBuf>,
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed_base: Option<u64>,
    /// Worker threads; defaults to $COEVOLVE_WORKERS or the core count.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, short)]
    out: PathBuf,
}

fn parse_removal(s: &str) -> std::result::Result<RemovalPolicy, String> {
    match s {
        "uniform" => Ok(RemovalPolicy::Uniform),
        "spare-last-link" => Ok(RemovalPolicy::SpareLastLink),
        _ => Err(format!(
            "expected `uniform` or `spare-last-link`, got {s:?}"
        )),
    }
}

fn load(path: Option<&Path>, preset: Option<&str>) -> Result<Option<ConfigFile>> {
    match (path, preset) {
        (Some(p), _) => harness::load_config(p).map(Some),
        (None, Some(name)) => harness::preset(name).map(Some),
        (None, None) => Ok(None),
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        Error::InvalidParam(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match load(args.config.as_deref(), args.preset.as_deref())? {
        None => SimConfig::default(),
        Some(ConfigFile::Run(cfg)) => cfg,
        Some(ConfigFile::Sweep(_)) => {
            return Err(Error::InvalidParam(
                "`run` needs a run config, got a sweep spec".into(),
            ))
        }
    };
    let r = &mut cfg.recommender;
    r.rho = args.rho.unwrap_or(r.rho);
    r.beta = args.beta.unwrap_or(r.beta);
    r.eta = args.eta.unwrap_or(r.eta);
    r.epsilon = args.epsilon.unwrap_or(r.epsilon);
    r.removal = args.removal.unwrap_or(r.removal);
    let d = &mut cfg.dynamics;
    d.k = args.k.unwrap_or(d.k);
    d.gamma = args.gamma.unwrap_or(d.gamma);
    d.alpha = args.alpha.unwrap_or(d.alpha);
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.mean_degree = args.mean_degree.unwrap_or(cfg.mean_degree);
    cfg.t_max = args.steps.unwrap_or(cfg.t_max);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.record_every = args.record_every.unwrap_or(cfg.record_every);
    cfg.init_range[0] = args.init_lo.unwrap_or(cfg.init_range[0]);
    cfg.init_range[1] = args.init_hi.unwrap_or(cfg.init_range[1]);
    if let Some(times) = args.snapshot_times {
        cfg.snapshot_times = times;
    }
    cfg.record_opinions |= args.record_opinions;
    cfg.validate()?;

    prepare_out(&args.out)?;
    fs::write(args.out.join("config.resolved"), harness::to_toml(&cfg)?)?;
    let traj = simulate(&cfg)?;
    output::write_trajectory_dir(&args.out, &traj)?;
    let last = traj.final_row();
    println!(
        "t={} polarization={:.6} radicalization={:.6} components={} mean_opinion={:.6} skips={}",
        last.t,
        last.polarization,
        last.radicalization,
        last.n_components,
        last.mean_opinion,
        traj.skip_count
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut spec = match load(args.spec.as_deref(), args.preset.as_deref())? {
        Some(ConfigFile::Sweep(spec)) => spec,
        Some(ConfigFile::Run(_)) => {
            return Err(Error::InvalidParam(
                "`sweep` needs a sweep spec (with [[axes]])".into(),
            ))
        }
        None => {
            return Err(Error::InvalidParam(
                "give a sweep spec file or --preset".into(),
            ))
        }
    };
    spec.replicates = args.replicates.unwrap_or(spec.replicates);
    spec.seed_base = args.seed_base.unwrap_or(spec.seed_base);
    spec.base.t_max = args.steps.unwrap_or(spec.base.t_max);
    spec.validate()?;

    prepare_out(&args.out)?;
    fs::write(args.out.join("config.resolved"), harness::to_toml(&spec)?)?;
    let workers = args.workers.unwrap_or_else(harness::default_workers);
    let result = harness::run_sweep(&spec, workers)?;
    result.write(&args.out)?;
    let failed: usize = result.cells.iter().map(|c| c.failures()).sum();
    println!(
        "{} cells x {} replicates on {workers} workers, {failed} failed",
        result.cells.len(),
        spec.replicates
    );
    Ok(())
}

fn validate(file: &Path) -> Result<()> {
    let text = match harness::load_config(file)? {
        ConfigFile::Run(cfg) => {
            cfg.validate()?;
            harness::to_toml(&cfg)?
        }
        ConfigFile::Sweep(spec) => {
            spec.validate()?;
            harness::to_toml(&spec)?
        }
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::FixedPoint { k, gamma, alpha } => DynamicsParams::new(k, gamma, alpha).map(|p| {
            println!("{}", consensus_fixed_point(&p));
        }),
        Command::Validate { file } => validate(&file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
