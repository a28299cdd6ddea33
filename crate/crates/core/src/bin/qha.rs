use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qha::accumulation::{accumulate, l1_error};
use qha::conv::s_tilde;
use qha::experiments::{
    run_convergence_sweep, run_identities, run_plunge_sweep, run_sharpness, write_sweep, ExperimentConfig, OutputDir,
    SweepReport,
};
use qha::lattice::rasterize;
use qha::spectra::analyze;
use qha::states::{mstar_norm_sq, parse_state, validate_density, CONSTRUCT_TOL};
use qha::PhaseLattice;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "qha", version, about = "Mixed-state localization experiments on the phase-space torus")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "QHA_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the exact convolution identities on seeded random states and domains.
    Identities {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random (state, domain) pairs per run.
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        /// Feed a perturbed state into one identity; the run must fail.
        #[arg(long)]
        corrupt: bool,
        #[arg(long, default_value = "out/identities")]
        out: PathBuf,
    },
    /// Plunge-region sweep over dilated shapes.
    Plunge(SweepArgs),
    /// Convergence sweep of accumulated distributions.
    Converge(SweepArgs),
    /// L1 error over radius for centered balls.
    Sharpness(SweepArgs),
    /// Export rho, chi and |rho - chi| for one scale.
    Accumulate {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Scale to use; defaults to the first entry of the config's r_grid.
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Validate a state and export its autocorrelation S~.
    StateInfo {
        #[arg(long)]
        n: usize,
        /// State spec, e.g. `rankone:gaussian` or `thermal:lambda=0.5,K=6`.
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out/state-info")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<qha::Error> for Failure {
    fn from(e: qha::Error) -> Self {
        Failure::Run(e.into())
    }
}

fn load_config(args: &SweepArgs, command: &str) -> Result<(ExperimentConfig, PathBuf), Failure> {
    let mut cfg = ExperimentConfig::load(&args.config).map_err(|e| Failure::Usage(e.into()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()
        .with_context(|| format!("invalid config {}", args.config.display()))
        .map_err(Failure::Usage)?;
    let out = cfg.out.clone().unwrap_or_else(|| Path::new("out").join(command));
    Ok((cfg, out))
}

fn print_sweep(rep: &SweepReport, dir: &Path) {
    println!(
        "{} sweep: state {}, {} rows, {} checks, {} failed",
        rep.kind.name(),
        rep.state,
        rep.rows.len(),
        rep.checks.len(),
        rep.failures().len()
    );
    for (k, v) in &rep.summary {
        println!("  {k} = {v:.6}");
    }
    for c in rep.checks.iter().filter(|c| !c.passed) {
        let tag = if c.required { "FAIL" } else { "note" };
        let row = c.row.map(|r| format!(" row {r}")).unwrap_or_default();
        println!("  {tag} {}{row}: {:.6e} vs {:.6e}", c.name, c.lhs, c.rhs);
    }
    println!("outputs in {}", dir.display());
}

fn sweep(args: &SweepArgs, command: &str) -> Result<bool, Failure> {
    let (cfg, out) = load_config(args, command)?;
    let s = cfg.build_state().map_err(|e| Failure::Usage(e.into()))?;
    let rep = match command {
        "plunge" => run_plunge_sweep(&cfg, &s)?,
        "converge" => run_convergence_sweep(&cfg, &s)?,
        _ => run_sharpness(&cfg, &s).map_err(|e| Failure::Usage(e.into()))?,
    };
    write_sweep(&rep, &cfg, &out)?;
    print_sweep(&rep, &out);
    Ok(rep.passed())
}

fn identities(n: usize, seed: u64, pairs: usize, corrupt: bool, out: &Path) -> Result<bool, Failure> {
    if n == 0 {
        return Err(Failure::Usage(anyhow::anyhow!("--n must be positive")));
    }
    let rep = run_identities(n, seed, pairs, corrupt)?;
    print!("{rep}");
    let mut dir = OutputDir::create(out)?;
    dir.write("identities.csv", &rep.to_csv())?;
    let config = json!({ "n": n, "seed": seed, "pairs": pairs, "corrupt": corrupt });
    dir.finish("identities", config, rep.passed())?;
    Ok(rep.passed())
}

fn accumulate_cmd(args: &SweepArgs, scale: Option<f64>) -> Result<bool, Failure> {
    let (cfg, out) = load_config(args, "accumulate")?;
    let s = cfg.build_state().map_err(|e| Failure::Usage(e.into()))?;
    let r = scale.unwrap_or(cfg.r_grid[0]);
    let dom = rasterize(&cfg.shape, r, cfg.lattice()).map_err(|e| Failure::Usage(e.into()))?;
    let res = analyze(&dom, &s)?;
    let rho = accumulate(&res, &s)?;
    let mut dir = OutputDir::create(&out)?;
    dir.write("rho.csv", &rho.grid.to_csv_real())?;
    dir.write("chi.csv", &dom.indicator().to_csv_real())?;
    dir.write("diff.csv", &rho.abs_diff().to_csv_real())?;
    dir.write("eigenvalues.csv", &res.eigenvalues_csv())?;
    dir.write("domain.json", &(dom.to_json() + "\n"))?;
    let mut config = serde_json::to_value(&cfg).context("config echo")?;
    config["scale"] = json!(r);
    dir.finish("accumulate", config, true)?;
    println!(
        "accumulate: state {}, |Omega| = {:.6}, A = {}, l1 = {:.6e}{}",
        s.label(),
        res.measure,
        res.a_omega,
        l1_error(&rho),
        if res.degenerate { " (degenerate truncation)" } else { "" }
    );
    println!("outputs in {}", out.display());
    Ok(true)
}

fn state_info(n: usize, spec: &str, seed: u64, out: &Path) -> Result<bool, Failure> {
    if n == 0 {
        return Err(Failure::Usage(anyhow::anyhow!("--n must be positive")));
    }
    let lat = PhaseLattice::new(n);
    let s = parse_state(spec, lat, seed).map_err(|e| Failure::Usage(e.into()))?;
    let report = validate_density(s.matrix(), CONSTRUCT_TOL);
    let mstar = mstar_norm_sq(&s);
    let st = s_tilde(s.matrix());
    let mut dir = OutputDir::create(out)?;
    dir.write("s_tilde.csv", &st.to_csv_real())?;
    let info = json!({
        "state": s.label(),
        "n": n,
        "hermitian_residual": report.hermitian_residual,
        "min_eigenvalue": report.min_eigenvalue,
        "trace_residual": report.trace_residual,
        "accepted": report.accepted(),
        "mstar_norm_sq": mstar,
    });
    dir.write("state_info.json", &(serde_json::to_string_pretty(&info).context("state info")? + "\n"))?;
    dir.finish("state-info", json!({ "n": n, "state": spec, "seed": seed }), report.accepted())?;
    println!("state {}", s.label());
    println!("{report}");
    println!("||S||^2_M* = {mstar:.12}");
    println!("outputs in {}", out.display());
    Ok(report.accepted())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("thread pool")
            .map_err(Failure::Usage)?;
    }
    match &cli.command {
        Command::Identities {
            n,
            seed,
            pairs,
            corrupt,
            out,
        } => identities(*n, *seed, *pairs, *corrupt, out),
        Command::Plunge(a) => sweep(a, "plunge"),
        Command::Converge(a) => sweep(a, "converge"),
        Command::Sharpness(a) => sweep(a, "sharpness"),
        Command::Accumulate { sweep, scale } => accumulate_cmd(sweep, *scale),
        Command::StateInfo { n, state, seed, out } => state_info(*n, state, *seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            eprintln!("run `qha --help` for usage");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
