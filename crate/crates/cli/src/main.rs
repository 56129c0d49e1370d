//! `snrlab`: sweeps, theory tables, lower-bound diagnostics, single fits and plots.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use snrlab_core::bayes::{bayes_risk_mc, spike_trials, SpikePriorConfig};
use snrlab_core::estimators::{
    enet_default_tuning, fit, lasso_default_lambda, ridge_default_lambda, Family, FitOptions, Tuning,
};
use snrlab_core::harness::{
    compare_theory, csv_string, emit_plot, run_sweep, OverlaySpec, PlotOptions, SweepConfig,
};
use snrlab_core::model::{Dataset, DatasetShape, ParamSpace, RngStream, SignPattern};
use snrlab_core::theory::{enet_second_order_bounds, minimax_first_order_auto, ridge_second_order_risk};
use snrlab_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "snrlab", version, about = "Sparse regression across SNR regimes")]
struct Cli {
    /// Master seed (overrides the config file where one is used).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of trials (overrides the config file where one is used).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "SNRLAB_THREADS")]
    threads: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a sweep described by a TOML config and write the CSV summary.
    Sweep(SweepArgs),
    /// Regime and risk formulas for one or more noise levels.
    Theory(TheoryArgs),
    /// Single-spike posterior diagnostics and Monte Carlo Bayes risk.
    Bayes(BayesArgs),
    /// Fit one estimator on one simulated dataset.
    Fit(FitArgs),
    /// Render a sweep CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Also write the chart here.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Print the theory comparison table to stderr.
    #[arg(long)]
    report: bool,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    tau: f64,
    /// Noise levels, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sigma: Vec<f64>,
}

#[derive(Args, Debug)]
struct BayesArgs {
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 300)]
    m: usize,
    /// Spike height as a multiple of sqrt(2 log m).
    #[arg(long, default_value_t = 0.5, conflicts_with = "lambda")]
    c: f64,
    /// Spike height.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    symmetric: bool,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long)]
    sigma: f64,
    /// ridge, lasso, enet, best-subset or zero.
    #[arg(long)]
    estimator: String,
    /// Penalty; the SNR-aware formula is used when omitted.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Support size for best subset; defaults to k.
    #[arg(long)]
    subset: Option<usize>,
    #[arg(long)]
    symmetric: bool,
}

#[derive(Args, Debug)]
struct PlotArgs {
    csv: PathBuf,
    svg: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    y_max: f64,
    #[arg(long)]
    title: Option<String>,
    /// Draw theory overlays for these dimensions: `p,k,tau`.
    #[arg(long, value_delimiter = ',')]
    theory: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Sweep(a) => sweep(cli, a),
        Command::Theory(a) => theory(cli, a),
        Command::Bayes(a) => bayes(cli, a),
        Command::Fit(a) => fit_one(cli, a),
        Command::Plot(a) => plot(a),
    }
}

fn sweep(cli: &Cli, a: &SweepArgs) -> Result<()> {
    let mut cfg = SweepConfig::load(&a.config)?;
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    let result = run_sweep(&cfg)?;
    emit(cli, &csv_string(&result))?;
    if a.report {
        eprint!("{}", compare_theory(&result).to_text());
    }
    if let Some(svg) = &a.plot {
        let csv = cli.out.as_ref().ok_or_else(|| Error::Config("--plot needs --out for the CSV".into()))?;
        let opts = PlotOptions {
            theory: Some(OverlaySpec { p: cfg.p, k: cfg.k, tau: cfg.tau }),
            ..PlotOptions::default()
        };
        emit_plot(csv, svg, &opts)?;
    }
    Ok(())
}

fn theory(cli: &Cli, a: &TheoryArgs) -> Result<()> {
    let mut out = String::new();
    for &sigma in &a.sigma {
        let space = ParamSpace::new(a.k, a.tau, sigma).map_err(as_config)?;
        let (regime, first) = minimax_first_order_auto(a.p, &space).map_err(as_config)?;
        let ridge = ridge_second_order_risk(a.p, &space)?;
        let enet = enet_second_order_bounds(a.p, &space)?;
        let flag = |valid: bool| if valid { "" } else { "  (outside validity range)" };
        out.push_str(&format!(
            "k={} p={} tau={} sigma={}\n  mu = {:.6}, rho = {:.6}, regime = {:?}\n",
            a.k, a.p, a.tau, sigma, space.mu(), regime.rho, regime.label
        ));
        out.push_str(&format!("  first-order minimax risk   {first:.6}\n"));
        out.push_str(&format!("  ridge second-order risk    {:.6}{}\n", ridge.value, flag(ridge.valid)));
        out.push_str(&format!("  enet lower bound           {:.6}{}\n", enet.lower.value, flag(enet.lower.valid)));
        out.push_str(&format!("  enet upper bound           {:.6}{}\n", enet.upper.value, flag(enet.upper.valid)));
    }
    emit(cli, &out)
}

fn bayes(cli: &Cli, a: &BayesArgs) -> Result<()> {
    let cfg = match a.lambda {
        Some(l) => SpikePriorConfig::new(a.m, l, a.symmetric),
        None => SpikePriorConfig::scaled(a.m, a.c, a.symmetric),
    }
    .map_err(as_config)?;
    let trials = cli.trials.unwrap_or(200);
    let seed = cli.seed.unwrap_or(0);
    let summary = spike_trials(a.n, a.m, cfg.lambda, trials, &RngStream::new(seed, 0)).map_err(as_config)?;
    let risk = bayes_risk_mc(&cfg, a.n, trials.max(2), &RngStream::new(seed, 1)).map_err(as_config)?;
    let l2 = cfg.lambda * cfg.lambda;
    let a_stats = summary.mean_a();
    let out = format!(
        "n={} m={} lambda={:.6} trials={trials} seed={seed}\n  median p1              {:.6}\n  mean A                 {:.6} +- {:.6}\n  P(log B >= log 10)     {:.4}\n  bayes risk / lambda^2  {:.6} +- {:.6}\n",
        a.n,
        a.m,
        cfg.lambda,
        summary.median_p1(),
        a_stats.mean,
        a_stats.se,
        summary.frac_log_b_at_least(10f64.ln()),
        risk.mean / l2,
        risk.se / l2
    );
    emit(cli, &out)
}

fn fit_one(cli: &Cli, a: &FitArgs) -> Result<()> {
    let family = Family::from_name(&a.estimator)
        .ok_or_else(|| Error::Config(format!("unknown estimator `{}`", a.estimator)))?;
    let space = ParamSpace::new(a.k, a.tau, a.sigma).map_err(as_config)?;
    let tuning = match (family, a.lambda) {
        (Family::Ridge, Some(l)) => Tuning::ridge(l),
        (Family::Ridge, None) => ridge_default_lambda(a.p, &space),
        (Family::Lasso, Some(l)) => Tuning::lasso(l),
        (Family::Lasso, None) => lasso_default_lambda(a.p, a.k, a.sigma, 0.0)?,
        (Family::ElasticNet, Some(l)) => Tuning::enet(l, a.gamma.unwrap_or(0.0)),
        (Family::ElasticNet, None) => enet_default_tuning(a.p, &space)?,
        (Family::BestSubset, _) => Tuning::best_subset(a.subset.unwrap_or(a.k)),
        (Family::Zero, _) => Tuning::zero(),
    };
    let shape = DatasetShape {
        n: a.n,
        p: a.p,
        k: a.k,
        tau: a.tau,
        signs: if a.symmetric { SignPattern::Symmetric } else { SignPattern::Positive },
    };
    let data = Dataset::generate(&shape, a.sigma, cli.seed.unwrap_or(0), 0).map_err(as_config)?;
    let est = fit(&data.x, &data.y, &tuning, &FitOptions::default())?;
    let err = data.beta.sq_error(&est.coefficients);
    let mut out = format!(
        "estimator   {}\ntuning      lambda={} gamma={} k={:?} ({:?})\nobjective   {:.10}\niterations  {}\nconverged   {}\nkkt         {:.3e}\ncertificate {:?}\nsupport     {} nonzeros\nsq error    {:.6} (scaled {:.6})\n",
        family,
        tuning.lambda,
        tuning.gamma,
        tuning.k,
        tuning.provenance,
        est.objective,
        est.iterations,
        est.converged,
        est.kkt_residual,
        est.certificate,
        est.support().len(),
        err,
        err / data.beta.sq_norm()
    );
    out.push_str("coefficients (nonzero)\n");
    for j in est.support() {
        out.push_str(&format!("  {j:>6} {:.10}\n", est.coefficients[j]));
    }
    emit(cli, &out)
}

fn plot(a: &PlotArgs) -> Result<()> {
    let theory = match a.theory.as_deref() {
        Some(&[p, k, tau]) => Some(OverlaySpec { p: p as usize, k: k as usize, tau }),
        Some(_) => return Err(Error::Config("--theory takes p,k,tau".into())),
        None => None,
    };
    let opts = PlotOptions { y_max: a.y_max, title: a.title.clone(), theory, ..PlotOptions::default() };
    emit_plot(&a.csv, &a.svg, &opts)
}

/// Bad user-supplied parameters are configuration errors.
fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::Config(m),
        other => other,
    }
}
