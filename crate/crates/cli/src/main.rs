mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// Growth-hypothesis checks, approximation sweeps, discrete minimization and a priori gradient studies
/// for convex energy integrals with slow growth.
#[derive(Parser, Debug)]
#[command(name = "slowgrowth", version)]
struct Cli {
    /// TOML file with `[general]`, `[analyze]`, `[approx]`, `[solve]`, `[scale]`, `[lemmas]` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: $SLOWGROWTH_OUT, else ./slowgrowth-out).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Integrand, e.g. `power_regularized(p=1.5)`.
    #[arg(long, short = 'f', global = true)]
    integrand: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List catalog entries and their parameter ranges.
    Catalog,
    /// Check the growth hypotheses and the exponent conditions.
    Analyze(AnalyzeArgs),
    /// Sweep the smooth approximations `f_k` and mollified data.
    Approx(ApproxArgs),
    /// Minimize the discrete energy for one boundary datum.
    Solve(SolveArgs),
    /// Fit the sup-gradient against the local energy mean over scaled data.
    Scale(ScaleArgs),
    /// Exponent schedule, interpolation lemma and integral inequalities.
    Lemmas(LemmasArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    dirs: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[arg(long)]
    t0: Option<f64>,
    /// Comma-separated list of k.
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    #[arg(long)]
    points: Option<usize>,
    /// Comma-separated mollification radii.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    n_grid: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// `affine`, `affine(a,b)`, `saddle` or `mixed`.
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args, Debug)]
struct ScaleArgs {
    #[arg(long)]
    n_grid: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    boundary: Option<String>,
    /// Comma-separated increasing scales.
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<f64>>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args, Debug)]
struct LemmasArgs {
    #[arg(long)]
    theta_cap: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n_grid: Option<usize>,
    #[arg(long)]
    i_max: Option<usize>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    set(&mut cfg.general.seed, cli.seed);
    set(&mut cfg.general.out_dir, cli.out.clone());
    set(&mut cfg.general.integrand, cli.integrand.clone());
    match &cli.command {
        Command::Catalog => {}
        Command::Analyze(a) => {
            let c = &mut cfg.analyze;
            c.t_min = a.t_min.or(c.t_min);
            c.t_max = a.t_max.or(c.t_max);
            set(&mut c.points, a.points);
            set(&mut c.n_dirs, a.dirs);
            c.mu = a.mu.or(c.mu);
            c.beta = a.beta.or(c.beta);
            c.alpha = a.alpha.or(c.alpha);
        }
        Command::Approx(a) => {
            let c = &mut cfg.approx;
            c.t0 = a.t0.or(c.t0);
            set(&mut c.ks, a.ks.clone());
            set(&mut c.n_points, a.points);
            set(&mut c.eps, a.eps.clone());
        }
        Command::Solve(a) => {
            let c = &mut cfg.solve;
            set(&mut c.n_grid, a.n_grid);
            set(&mut c.tol, a.tol);
            set(&mut c.max_iter, a.max_iter);
            set(&mut c.boundary, a.boundary.clone());
            set(&mut c.scale, a.scale);
            set(&mut c.rho, a.rho);
            set(&mut c.radius, a.radius);
        }
        Command::Scale(a) => {
            let c = &mut cfg.scale;
            set(&mut c.n_grid, a.n_grid);
            set(&mut c.tol, a.tol);
            set(&mut c.boundary, a.boundary.clone());
            set(&mut c.scales, a.scales.clone());
            set(&mut c.rho, a.rho);
            set(&mut c.radius, a.radius);
            c.theta = a.theta.or(c.theta);
        }
        Command::Lemmas(a) => {
            let c = &mut cfg.lemmas;
            set(&mut c.theta_cap, a.theta_cap);
            set(&mut c.lambda, a.lambda);
            set(&mut c.n_grid, a.n_grid);
            set(&mut c.i_max, a.i_max);
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = resolve(cli)?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(true);
    }
    let report = match cli.command {
        Command::Catalog => commands::catalog(&cfg)?,
        Command::Analyze(_) => commands::analyze(&cfg)?,
        Command::Approx(_) => commands::approx(&cfg)?,
        Command::Solve(_) => commands::solve(&cfg)?,
        Command::Scale(_) => commands::scale(&cfg)?,
        Command::Lemmas(_) => commands::lemmas(&cfg)?,
    };
    for c in report.checks() {
        let tag = match (c.pass, c.asserted) {
            (true, _) => "ok  ",
            (false, true) => "FAIL",
            (false, false) => "note",
        };
        println!("{tag} {:<24} {}", c.id, c.detail);
    }
    for p in report.write(&cfg.out_dir())? {
        println!("wrote {}", p.display());
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
