//! mfchaos: experiment driver for the mean-field chaos laboratory.
//!
//! Subcommands: `ot` (transport costs between cloud files), `simulate`
//! (interacting N-particle runs), `meanfield` (the cloud solver), `chaos`
//! (the N-sweep rate experiment or the empirical-measure bound check), and
//! `omega` (flow-rate probes and the exponential-envelope check).
//!
//! Exit codes: 0 on success/pass, 2 when a verdict fails (the report is
//! still written), 1 on errors.

mod config;
mod manifest;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use config::{ConfigError, SCHEMA_VERSION};
use manifest::RunManifest;
use mfchaos_core::chaos::{
    exp_stability_check, fg_bound_check, omega_probe, poc_rate_experiment, PocConfig, RhoFamily,
};
use mfchaos_core::cloud::PointCloud;
use mfchaos_core::model_file::load_model_file;
use mfchaos_core::ot;
use mfchaos_core::rng::{StreamDomain, StreamRng};
use mfchaos_core::sim::{simulate, SimConfig};
use mfchaos_core::solver::{pca_refinement_study, solve_mean_field, PcaDrive, SolverConfig};
use mfchaos_core::{LevyTriplet, WeightedCloud};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "mfchaos",
    version = concat!(env!("CARGO_PKG_VERSION"), " (schema 1)"),
    about = "Mean-field particle laboratory: transport metrics, solvers, chaos-rate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transport cost between two cloud files
    Ot(OtArgs),
    /// Simulate the interacting N-particle system
    Simulate(SimulateArgs),
    /// Solve the mean-field evolution on a particle cloud
    Meanfield(MeanfieldArgs),
    /// N-sweep chaos-rate experiment (or --fg-family bound check)
    Chaos(ChaosArgs),
    /// Flow probes for generator pairs given as triplets
    Omega(OmegaArgs),
}

fn main() {
    if let Ok(threads) = std::env::var("MFCHAOS_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    eprintln!("wall time: {:.3}s", started.elapsed().as_secs_f64());
    std::process::exit(code);
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Ot(args) => run_ot(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Meanfield(args) => run_meanfield(args),
        Command::Chaos(args) => run_chaos(args),
        Command::Omega(args) => run_omega(args),
    }
}

fn read_cloud(path: &Path) -> anyhow::Result<PointCloud> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    let cloud = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text)?,
        _ => PointCloud::from_csv_str(&text)?,
    };
    Ok(cloud)
}

/// Deterministic standard-normal cloud used when no initial file is given.
fn default_cloud(m: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = StreamRng::new(seed, StreamDomain::InitialDraw, u64::MAX, 1);
    let data: Vec<f64> = (0..m * dim).map(|_| rng.sample(StandardNormal)).collect();
    PointCloud::new(dim, data).expect("nonempty")
}

// ---------------------------------------------------------------- ot

#[derive(Args)]
struct OtArgs {
    /// source cloud (CSV or JSON)
    #[arg(long)]
    mu: PathBuf,
    /// target cloud (CSV or JSON)
    #[arg(long)]
    nu: PathBuf,
    /// assignment | bruteforce | sinkhorn
    #[arg(long, default_value = "assignment")]
    method: String,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run_ot(args: OtArgs) -> anyhow::Result<i32> {
    let mu = read_cloud(&args.mu)?;
    let nu = read_cloud(&args.nu)?;
    let result = match args.method.as_str() {
        "assignment" => {
            let (cost, _) = ot::exact_w2_assignment(&mu, &nu)?;
            serde_json::json!({ "method": "assignment", "cost": cost, "w2": (2.0 * cost).sqrt() })
        }
        "bruteforce" => {
            let (cost, _) = ot::bruteforce_ot(
                &WeightedCloud::uniform(&mu),
                &WeightedCloud::uniform(&nu),
            )?;
            serde_json::json!({ "method": "bruteforce", "cost": cost, "w2": (2.0 * cost).sqrt() })
        }
        "sinkhorn" => {
            let res = ot::sinkhorn_w2(
                &WeightedCloud::uniform(&mu),
                &WeightedCloud::uniform(&nu),
                args.epsilon,
                args.max_iters,
                args.tol,
            )?;
            serde_json::json!({
                "method": "sinkhorn",
                "cost": res.cost,
                "epsilon": args.epsilon,
                "iterations": res.iterations,
                "converged": res.converged,
            })
        }
        other => bail!("unknown method `{other}` (assignment | bruteforce | sinkhorn)"),
    };
    println!("{}", serde_json::to_string_pretty(&result)?);
    if let Some(dir) = &args.out {
        let config = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "mu": args.mu, "nu": args.nu, "method": args.method,
            "epsilon": args.epsilon, "max_iters": args.max_iters, "tol": args.tol,
        });
        let mut manifest = RunManifest::new("ot", config);
        manifest.write_output(dir, "result.json", serde_json::to_string_pretty(&result)?.as_bytes())?;
        manifest.seal_and_write(dir)?;
    }
    Ok(0)
}

// ---------------------------------------------------------------- simulate

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// initial cloud file; a seeded standard-normal cloud when omitted
    #[arg(long)]
    initial: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

const SIMULATE_KEYS: &[&str] = &["model", "initial", "n", "dt", "t", "seed", "checkpoints"];

fn resolve_simulate(args: &SimulateArgs) -> Result<config::SimulateConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => config::load_file(path, SIMULATE_KEYS)?,
        None => Default::default(),
    };
    let t = args
        .t
        .or(config::get_f64(&file, "t")?)
        .ok_or(ConfigError::MissingField("t"))?;
    let cfg = config::SimulateConfig {
        schema_version: SCHEMA_VERSION.into(),
        model: args
            .model
            .clone()
            .or(config::get_string(&file, "model")?.map(PathBuf::from))
            .ok_or(ConfigError::MissingField("model"))?,
        initial: args
            .initial
            .clone()
            .or(config::get_string(&file, "initial")?.map(PathBuf::from)),
        n: args
            .n
            .or(config::get_u64(&file, "n")?.map(|v| v as usize))
            .ok_or(ConfigError::MissingField("n"))?,
        dt: args
            .dt
            .or(config::get_f64(&file, "dt")?)
            .ok_or(ConfigError::MissingField("dt"))?,
        t,
        seed: args.seed.or(config::get_u64(&file, "seed")?).unwrap_or(0),
        checkpoints: args
            .checkpoints
            .clone()
            .or(config::get_f64_list(&file, "checkpoints")?)
            .unwrap_or_else(|| vec![t]),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run_simulate(args: SimulateArgs) -> anyhow::Result<i32> {
    let out = args.out.clone();
    let cfg = resolve_simulate(&args).map_err(|e| anyhow!("simulate config: {e}"))?;
    let model = load_model_file(&cfg.model)?;
    let initial = match &cfg.initial {
        Some(path) => read_cloud(path)?,
        None => default_cloud(cfg.n, model.dim(), cfg.seed),
    };
    let sim_cfg = SimConfig {
        n: cfg.n,
        dim: model.dim(),
        t_end: cfg.t,
        dt: cfg.dt,
        seed: cfg.seed,
        checkpoints: cfg.checkpoints.clone(),
        exact_jumps: true,
    };
    let states = simulate(&sim_cfg, &model, &initial)?;

    let mut manifest = RunManifest::new("simulate", serde_json::to_value(&cfg)?);
    let mut index = Vec::new();
    for (k, (t, state)) in states.iter().enumerate() {
        let name = format!("checkpoint_{k:03}.csv");
        manifest.write_output(&out, &name, state.to_cloud().to_csv_string().as_bytes())?;
        index.push(serde_json::json!({ "file": name, "t": t }));
    }
    manifest.write_output(
        &out,
        "checkpoints.json",
        serde_json::to_string_pretty(&index)?.as_bytes(),
    )?;
    manifest.seal_and_write(&out)?;
    Ok(0)
}

// ---------------------------------------------------------------- meanfield

#[derive(Args)]
struct MeanfieldArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    initial: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    mesh: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    picard_tol: Option<f64>,
    #[arg(long)]
    max_picard_iters: Option<usize>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// also run a self-consistent mesh-refinement study over these meshes
    /// (decreasing, nested) and include the table in the convergence log
    #[arg(long, value_delimiter = ',')]
    pca_meshes: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

const MEANFIELD_KEYS: &[&str] = &[
    "model",
    "initial",
    "m",
    "dt",
    "mesh",
    "t",
    "picard_tol",
    "max_picard_iters",
    "window",
    "seed",
];

fn resolve_meanfield(args: &MeanfieldArgs) -> Result<config::MeanfieldConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => config::load_file(path, MEANFIELD_KEYS)?,
        None => Default::default(),
    };
    let cfg = config::MeanfieldConfig {
        schema_version: SCHEMA_VERSION.into(),
        model: args
            .model
            .clone()
            .or(config::get_string(&file, "model")?.map(PathBuf::from))
            .ok_or(ConfigError::MissingField("model"))?,
        initial: args
            .initial
            .clone()
            .or(config::get_string(&file, "initial")?.map(PathBuf::from)),
        m: args
            .m
            .or(config::get_u64(&file, "m")?.map(|v| v as usize))
            .ok_or(ConfigError::MissingField("m"))?,
        dt: args
            .dt
            .or(config::get_f64(&file, "dt")?)
            .ok_or(ConfigError::MissingField("dt"))?,
        mesh: args
            .mesh
            .or(config::get_f64(&file, "mesh")?)
            .ok_or(ConfigError::MissingField("mesh"))?,
        t: args
            .t
            .or(config::get_f64(&file, "t")?)
            .ok_or(ConfigError::MissingField("t"))?,
        picard_tol: args
            .picard_tol
            .or(config::get_f64(&file, "picard_tol")?)
            .unwrap_or(1e-6),
        max_picard_iters: args
            .max_picard_iters
            .or(config::get_u64(&file, "max_picard_iters")?.map(|v| v as usize))
            .unwrap_or(50),
        window: args.window.or(config::get_f64(&file, "window")?),
        seed: args.seed.or(config::get_u64(&file, "seed")?).unwrap_or(0),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run_meanfield(args: MeanfieldArgs) -> anyhow::Result<i32> {
    let out = args.out.clone();
    let cfg = resolve_meanfield(&args).map_err(|e| anyhow!("meanfield config: {e}"))?;
    let model = load_model_file(&cfg.model)?;
    let initial = match &cfg.initial {
        Some(path) => read_cloud(path)?,
        None => default_cloud(cfg.m, model.dim(), cfg.seed),
    };
    let solver = SolverConfig {
        m: cfg.m,
        mesh: cfg.mesh,
        dt: cfg.dt,
        picard_tol: cfg.picard_tol,
        max_picard_iters: cfg.max_picard_iters,
        window: cfg.window,
        seed: cfg.seed,
    };
    let run = solve_mean_field(&model, &initial, cfg.t, &solver)?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }

    let mut manifest = RunManifest::new("meanfield", serde_json::to_value(&cfg)?);
    let mut index = Vec::new();
    for (k, (t, cloud)) in run
        .curve
        .times()
        .iter()
        .zip(run.curve.clouds())
        .enumerate()
    {
        let name = format!("curve_{k:03}.csv");
        manifest.write_output(&out, &name, cloud.to_csv_string().as_bytes())?;
        index.push(serde_json::json!({ "file": name, "t": t }));
    }
    let mesh_table = match &args.pca_meshes {
        Some(meshes) if meshes.len() >= 2 => {
            let table = pca_refinement_study(
                &model,
                PcaDrive::SelfConsistent,
                &initial,
                cfg.t,
                meshes,
                &solver,
            )?;
            serde_json::json!({
                "meshes": table.meshes,
                "dist_to_finest": table.dist_to_finest,
                "successive": table.successive,
            })
        }
        _ => serde_json::Value::Null,
    };
    let log = serde_json::json!({
        "picard_iters_per_window": run.picard_iters_per_window,
        "picard_residuals": run.picard_residuals,
        "warnings": run.warnings,
        "mesh_table": mesh_table,
        "curve": index,
    });
    manifest.write_output(
        &out,
        "convergence.json",
        serde_json::to_string_pretty(&log)?.as_bytes(),
    )?;
    manifest.seal_and_write(&out)?;
    Ok(0)
}

// ---------------------------------------------------------------- chaos

#[derive(Args)]
struct ChaosArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    initial: Option<PathBuf>,
    #[arg(long)]
    initial_size: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<f64>>,
    #[arg(long)]
    aleph_trials: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    mesh: Option<f64>,
    #[arg(long)]
    picard_tol: Option<f64>,
    /// slope acceptance band "low,high"
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    slope_band: Option<Vec<f64>>,
    /// run the empirical-measure bound check instead: uniform01 | normal01
    #[arg(long)]
    fg_family: Option<String>,
    #[arg(long)]
    fg_q: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    fg_n_list: Option<Vec<usize>>,
    #[arg(long)]
    fg_trials: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

const CHAOS_KEYS: &[&str] = &[
    "model",
    "initial",
    "initial_size",
    "n_list",
    "trials",
    "t",
    "dt",
    "seed",
    "checkpoints",
    "aleph_trials",
    "m",
    "mesh",
    "picard_tol",
    "slope_band",
];

fn resolve_chaos(args: &ChaosArgs) -> Result<config::ChaosConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => config::load_file(path, CHAOS_KEYS)?,
        None => Default::default(),
    };
    let t = args
        .t
        .or(config::get_f64(&file, "t")?)
        .ok_or(ConfigError::MissingField("t"))?;
    let slope_band = match &args.slope_band {
        Some(v) if v.len() == 2 => (v[0], v[1]),
        Some(_) => return Err(ConfigError::Range("slope_band", "need two values".into())),
        None => match config::get_f64_list(&file, "slope_band")? {
            Some(v) if v.len() == 2 => (v[0], v[1]),
            Some(_) => return Err(ConfigError::Range("slope_band", "need two values".into())),
            None => mfchaos_core::chaos::poc::SLOPE_BAND,
        },
    };
    let mesh_default = t / 8.0;
    let cfg = config::ChaosConfig {
        schema_version: SCHEMA_VERSION.into(),
        model: args
            .model
            .clone()
            .or(config::get_string(&file, "model")?.map(PathBuf::from))
            .ok_or(ConfigError::MissingField("model"))?,
        initial: args
            .initial
            .clone()
            .or(config::get_string(&file, "initial")?.map(PathBuf::from)),
        initial_size: args
            .initial_size
            .or(config::get_u64(&file, "initial_size")?.map(|v| v as usize))
            .unwrap_or(512),
        n_list: args
            .n_list
            .clone()
            .or(config::get_usize_list(&file, "n_list")?)
            .ok_or(ConfigError::MissingField("n_list"))?,
        trials: args
            .trials
            .or(config::get_u64(&file, "trials")?.map(|v| v as usize))
            .ok_or(ConfigError::MissingField("trials"))?,
        t,
        dt: args
            .dt
            .or(config::get_f64(&file, "dt")?)
            .ok_or(ConfigError::MissingField("dt"))?,
        seed: args.seed.or(config::get_u64(&file, "seed")?).unwrap_or(0),
        checkpoints: args
            .checkpoints
            .clone()
            .or(config::get_f64_list(&file, "checkpoints")?)
            .unwrap_or_else(|| vec![0.0, 0.25 * t, 0.5 * t, 0.75 * t, t]),
        aleph_trials: args
            .aleph_trials
            .or(config::get_u64(&file, "aleph_trials")?.map(|v| v as usize))
            .unwrap_or(200),
        m: args
            .m
            .or(config::get_u64(&file, "m")?.map(|v| v as usize))
            .unwrap_or(2000),
        mesh: args
            .mesh
            .or(config::get_f64(&file, "mesh")?)
            .unwrap_or(mesh_default),
        picard_tol: args
            .picard_tol
            .or(config::get_f64(&file, "picard_tol")?)
            .unwrap_or(1e-5),
        slope_band,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run_chaos(args: ChaosArgs) -> anyhow::Result<i32> {
    // bound-check mode
    if let Some(family) = &args.fg_family {
        let family = match family.as_str() {
            "uniform01" => RhoFamily::Uniform01,
            "normal01" => RhoFamily::Normal01,
            other => bail!("unknown fg family `{other}` (uniform01 | normal01)"),
        };
        let q = args.fg_q.unwrap_or(5.0);
        let n_list = args
            .fg_n_list
            .clone()
            .unwrap_or_else(|| vec![10, 20, 40, 80, 160, 320, 640]);
        let trials = args.fg_trials.unwrap_or(400);
        let seed = args.seed.unwrap_or(0);
        let report = fg_bound_check(&family, 1, q, &n_list, trials, seed)?;
        let config = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "fg_family": args.fg_family, "fg_q": q, "fg_n_list": n_list,
            "fg_trials": trials, "seed": seed,
        });
        let mut manifest = RunManifest::new("chaos-fg", config);
        manifest.write_output(
            &args.out,
            "fg_report.json",
            serde_json::to_string_pretty(&report)?.as_bytes(),
        )?;
        manifest.seal_and_write(&args.out)?;
        return Ok(if report.pass { 0 } else { 2 });
    }

    let out = args.out.clone();
    let cfg = resolve_chaos(&args).map_err(|e| anyhow!("chaos config: {e}"))?;
    let model = load_model_file(&cfg.model)?;
    let rho0 = match &cfg.initial {
        Some(path) => read_cloud(path)?,
        None => default_cloud(cfg.initial_size, model.dim(), cfg.seed),
    };
    let poc_cfg = PocConfig {
        t_end: cfg.t,
        dt: cfg.dt,
        seed: cfg.seed,
        checkpoints: cfg.checkpoints.clone(),
        aleph_trials: cfg.aleph_trials,
        slope_band: cfg.slope_band,
        solver: SolverConfig {
            m: cfg.m,
            mesh: cfg.mesh,
            dt: cfg.dt,
            picard_tol: cfg.picard_tol,
            max_picard_iters: 60,
            window: None,
            seed: cfg.seed,
        },
    };
    let report = poc_rate_experiment(&model, &rho0, &cfg.n_list, cfg.trials, &poc_cfg)?;

    let mut manifest = RunManifest::new("chaos", serde_json::to_value(&cfg)?);
    manifest.write_output(
        &out,
        "report.json",
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    manifest.write_output(&out, "report.csv", report.to_csv().as_bytes())?;
    manifest.seal_and_write(&out)?;

    let failed = report.verdicts.envelope_holds == Some(false)
        || report.verdicts.slope_in_band == Some(false);
    Ok(if failed { 2 } else { 0 })
}

// ---------------------------------------------------------------- omega

#[derive(Args)]
struct OmegaArgs {
    /// JSON file with {"a": triplet, "b": triplet}; matrices row-major
    #[arg(long)]
    triplets: PathBuf,
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    y: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0])]
    dt_grid: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    mc_size: usize,
    #[arg(long, default_value_t = 6)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// also run the exponential-envelope check with these parameters
    #[arg(long)]
    check_exp: bool,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 2.0])]
    t_grid: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct TripletPair {
    a: mfchaos_core::levy::LevyTripletRepr,
    b: mfchaos_core::levy::LevyTripletRepr,
}

fn run_omega(args: OmegaArgs) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(&args.triplets)
        .with_context(|| format!("reading {:?}", args.triplets))?;
    let pair: TripletPair = serde_json::from_str(&text)?;
    let gen_a = LevyTriplet::from_repr(pair.a)?;
    let gen_b = LevyTriplet::from_repr(pair.b)?;

    let probe = omega_probe(
        &gen_a,
        &gen_b,
        &args.x,
        &args.y,
        &args.dt_grid,
        args.mc_size,
        args.reps,
        args.seed,
    )?;
    let mut pass = true;
    let mut report = serde_json::json!({ "probe": probe });
    if args.check_exp {
        // default α is the squared generator discrepancy W_G²
        let wg_sq = probe.cor_bound - mfchaos_core::cloud::half_sq_dist(&args.x, &args.y);
        let alpha = args.alpha.unwrap_or(wg_sq);
        let exp = exp_stability_check(
            &gen_a,
            &gen_b,
            &args.x,
            &args.y,
            alpha,
            args.beta,
            &args.t_grid,
            args.mc_size,
            args.reps,
            args.seed,
        )?;
        pass = exp.pass;
        report["exp_check"] = serde_json::to_value(&exp)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(dir) = &args.out {
        let config = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "triplets": args.triplets, "x": args.x, "y": args.y,
            "dt_grid": args.dt_grid, "mc_size": args.mc_size,
            "reps": args.reps, "seed": args.seed,
            "check_exp": args.check_exp, "alpha": args.alpha, "beta": args.beta,
            "t_grid": args.t_grid,
        });
        let mut manifest = RunManifest::new("omega", config);
        manifest.write_output(dir, "probe.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
        manifest.seal_and_write(dir)?;
    }
    Ok(if pass { 0 } else { 2 })
}
