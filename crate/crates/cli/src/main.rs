//! Command-line front end: instance I/O, command dispatch, result emission.
//!
//! Exit codes: 0 on success (or when a checked condition holds), 1 on domain
//! failures (violated conditions, unrealizable representations, parameter
//! errors), 2 on I/O or parse failures.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use replearn_core::checks::{self, CheckOptions};
use replearn_core::constructions;
use replearn_core::model::{BanditInstance, RepresentationSet};
use replearn_core::schema::InstanceFile;
use replearn_core::simulator::{self, AlgorithmConfig, CTrackingConfig, EttConfig, TrackScope};
use replearn_core::solver::{self, oracle::GridSpec, SolverOptions};
use replearn_core::Error;

#[derive(Parser)]
#[command(
    name = "replearn",
    about = "Instance-dependent complexity toolkit for representation learning in contextual linear bandits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SolverFlags {
    /// Constraint feasibility slack at termination.
    #[arg(long, env = "REPLEARN_EPS_FEAS", default_value_t = 1e-4)]
    eps_feas: f64,
    /// Relative objective-stability threshold.
    #[arg(long, env = "REPLEARN_EPS_OBJ", default_value_t = 1e-6)]
    eps_obj: f64,
    #[arg(long, env = "REPLEARN_MAX_ITERS", default_value_t = 2000)]
    max_iters: usize,
    /// Finite cap standing in for unbounded optimal-arm mass.
    #[arg(long = "m-cap", env = "REPLEARN_M_CAP", default_value_t = 1e8)]
    m_cap: f64,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, env = "REPLEARN_RANK_TOL", default_value_t = 1e-9)]
    rank_tol: f64,
    /// Margin pushing kernel-direction minimizers inside the half-space.
    #[arg(long, env = "REPLEARN_DELTA_MARGIN", default_value_t = 1e-6)]
    delta_margin: f64,
    /// Assignment-enumeration budget for the fully-realizable program.
    #[arg(long, env = "REPLEARN_FR_BUDGET", default_value_t = 4096)]
    fr_budget: usize,
}

impl SolverFlags {
    fn to_options(&self) -> SolverOptions {
        SolverOptions {
            eps_feas: self.eps_feas,
            eps_obj: self.eps_obj,
            max_iters: self.max_iters,
            optimal_cap: self.m_cap,
            rank_tol: self.rank_tol,
            delta_margin: self.delta_margin,
            fr_enumeration_budget: self.fr_budget,
        }
    }
}

#[derive(Args, Debug)]
struct CheckFlags {
    #[arg(long, env = "REPLEARN_REALIZABILITY_TOL", default_value_t = 1e-9)]
    realizability_tol: f64,
    #[arg(long, env = "REPLEARN_RANK_TOL", default_value_t = 1e-9)]
    rank_tol: f64,
}

impl CheckFlags {
    fn to_options(&self) -> CheckOptions {
        CheckOptions {
            realizability_tol: self.realizability_tol,
            rank_tol: self.rank_tol,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance file against the schema and model invariants.
    Validate { path: PathBuf },
    /// Compute a complexity measure for an instance file.
    Complexity {
        path: PathBuf,
        /// One of: replearn | clb:<rep-name> | unstructured | fr.
        #[arg(long)]
        family: String,
        #[command(flatten)]
        solver: SolverFlags,
        /// Write a machine-readable result record here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a structural condition of an instance file.
    Check {
        path: PathBuf,
        /// One of: realizable | hls | sublog | sublog-fr | detectability.
        #[arg(long)]
        what: String,
        /// Detectability threshold on the optimal-policy misspecification.
        #[arg(long, env = "REPLEARN_EPS_THRESHOLD", default_value_t = 0.05)]
        eps_threshold: f64,
        #[command(flatten)]
        check: CheckFlags,
    },
    /// Build one of the benchmark constructions and write it as an instance
    /// file.
    Construct {
        /// One of: trivial | hard-set | nested | policy-class | binarized |
        /// fr-example.
        #[arg(long)]
        kind: String,
        /// Input instance file (required by: trivial, hard-set).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Representation dimension (hard-set, policy-class, binarized).
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated increasing dimensions (nested).
        #[arg(long)]
        dims: Option<String>,
        /// Minimum positive gap (nested).
        #[arg(long)]
        gap: Option<f64>,
        #[arg(long)]
        contexts: Option<usize>,
        #[arg(long)]
        arms: Option<usize>,
        /// Number of representations (policy-class).
        #[arg(long)]
        n_reps: Option<usize>,
        /// Reward scale (fr-example, policy-class).
        #[arg(long)]
        eps: Option<f64>,
        /// Which family member to materialize (policy-class).
        #[arg(long, default_value_t = 0)]
        policy_index: usize,
        /// Seed for sampled parameters (binarized).
        #[arg(long, default_value_t = 0)]
        param_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a bandit algorithm on an instance file and emit a CSV curve.
    Simulate {
        path: PathBuf,
        /// One of: oracle | uniform | tabular-ucb | linucb |
        /// eliminate-then-track | c-tracking.
        #[arg(long)]
        alg: String,
        #[arg(long = "horizon", short = 'T')]
        horizon: u64,
        /// Number of seeds (0..seeds, shifted by --seed-start).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed_start: u64,
        /// Comma-separated checkpoint times; defaults to a log-spaced grid.
        #[arg(long)]
        checkpoints: Option<String>,
        #[arg(long, default_value_t = 20)]
        num_checkpoints: usize,
        /// Add one play-count column per context-arm pair.
        #[arg(long)]
        emit_plays: bool,
        /// Representation name used by linucb / single-scope tracking.
        #[arg(long)]
        rep: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        ridge: f64,
        /// Elimination width multiplier.
        #[arg(long, default_value_t = 2.0)]
        c1: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 10)]
        check_period: u64,
        #[arg(long, default_value_t = 2000)]
        tracking_period: u64,
        #[arg(long, default_value_t = 1.0)]
        force_scale: f64,
        #[command(flatten)]
        solver: SolverFlags,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the brute-force complexity oracle on a tiny instance, comparing it
    /// against the cutting-plane solver.
    Oracle {
        path: PathBuf,
        /// Also run the cutting-plane solver and print the relative gap.
        #[arg(long, default_value_t = true)]
        compare: bool,
        #[arg(long, default_value_t = 8)]
        levels: usize,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Schema(_) => 2,
        _ => 1,
    }
}

fn read_instance_file(path: &PathBuf) -> Result<InstanceFile, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    InstanceFile::from_json(&text)
}

fn load_model(path: &PathBuf) -> Result<(BanditInstance, RepresentationSet), Error> {
    read_instance_file(path)?.to_model()
}

fn write_text(path: &PathBuf, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn dispatch(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Complexity {
            path,
            family,
            solver,
            out,
        } => cmd_complexity(&path, &family, &solver, out.as_ref()),
        Command::Check {
            path,
            what,
            eps_threshold,
            check,
        } => cmd_check(&path, &what, eps_threshold, &check),
        Command::Construct {
            kind,
            input,
            d,
            dims,
            gap,
            contexts,
            arms,
            n_reps,
            eps,
            policy_index,
            param_seed,
            out,
        } => cmd_construct(ConstructArgs {
            kind,
            input,
            d,
            dims,
            gap,
            contexts,
            arms,
            n_reps,
            eps,
            policy_index,
            param_seed,
            out,
        }),
        Command::Simulate {
            path,
            alg,
            horizon,
            seeds,
            seed_start,
            checkpoints,
            num_checkpoints,
            emit_plays,
            rep,
            alpha,
            ridge,
            c1,
            delta,
            check_period,
            tracking_period,
            force_scale,
            solver,
            out,
        } => cmd_simulate(SimulateArgs {
            path,
            alg,
            horizon,
            seeds,
            seed_start,
            checkpoints,
            num_checkpoints,
            emit_plays,
            rep,
            alpha,
            ridge,
            c1,
            delta,
            check_period,
            tracking_period,
            force_scale,
            solver,
            out,
        }),
        Command::Oracle {
            path,
            compare,
            levels,
            solver,
        } => cmd_oracle(&path, compare, levels, &solver),
    }
}

fn cmd_validate(path: &PathBuf) -> Result<ExitCode, Error> {
    let file = read_instance_file(path)?;
    let (instance, reps) = file.to_model()?;
    let mut report = replearn_core::model::validate_instance(&instance);
    for rep in &reps.reps {
        if !rep.is_finite() {
            report
                .violations
                .push(format!("representation `{}` has a non-finite entry", rep.name));
        }
        if !rep.compatible_with(&instance) {
            report.violations.push(format!(
                "representation `{}` is shape-incompatible with the instance",
                rep.name
            ));
        }
    }
    if report.ok() {
        println!(
            "OK: {} contexts x {} arms, {} representation(s)",
            instance.num_contexts,
            instance.num_arms,
            reps.len()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        for violation in &report.violations {
            println!("violation: {violation}");
        }
        Ok(ExitCode::from(1))
    }
}

fn cmd_complexity(
    path: &PathBuf,
    family: &str,
    flags: &SolverFlags,
    out: Option<&PathBuf>,
) -> Result<ExitCode, Error> {
    let (instance, reps) = load_model(path)?;
    let opts = flags.to_options();
    let record = match family {
        "replearn" => {
            let solution = solver::solve_replearn(&instance, &reps, &opts)?;
            output::complexity_record("replearn", &instance, &solution, &opts)
        }
        "unstructured" => {
            let value = solver::solve_unstructured(&instance)?;
            println!("family unstructured");
            println!("value {value}");
            if let Some(out_path) = out {
                let record = serde_json::json!({
                    "family": "unstructured",
                    "value": value,
                });
                write_text(out_path, &format!("{:#}\n", record))?;
            }
            return Ok(ExitCode::SUCCESS);
        }
        "fr" => {
            let solution = solver::solve_fully_realizable(&instance, &reps, &opts)?;
            output::complexity_record("fr", &instance, &solution, &opts)
        }
        other => {
            if let Some(name) = other.strip_prefix("clb:") {
                let rep = reps.by_name(name).ok_or_else(|| {
                    Error::InvalidParameter(format!("no representation named `{name}`"))
                })?;
                let solution = solver::solve_clb(&instance, rep, &opts)?;
                output::complexity_record(&format!("clb:{name}"), &instance, &solution, &opts)
            } else {
                return Err(Error::InvalidParameter(format!(
                    "unknown family `{other}` (expected replearn | clb:<rep> | unstructured | fr)"
                )));
            }
        }
    };
    print!("{}", output::render_complexity(&record));
    if let Some(out_path) = out {
        write_text(out_path, &format!("{:#}\n", record.json))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(
    path: &PathBuf,
    what: &str,
    eps_threshold: f64,
    flags: &CheckFlags,
) -> Result<ExitCode, Error> {
    let (instance, reps) = load_model(path)?;
    let opts = flags.to_options();
    let holds = match what {
        "realizable" => {
            let mut all = true;
            for rep in &reps.reps {
                let (ok, residual, _) =
                    checks::is_realizable(&instance, rep, opts.realizability_tol);
                println!(
                    "{}: realizable={} residual={residual:.3e}",
                    rep.name, ok
                );
                all &= ok;
            }
            all
        }
        "hls" => {
            let mut all = true;
            for rep in &reps.reps {
                let report = checks::check_hls(&instance, rep, opts)?;
                println!("{}: hls={}", rep.name, report.holds);
                output::print_witnesses(&report);
                all &= report.holds;
            }
            all
        }
        "sublog" => {
            let report = checks::check_sublog(&instance, &reps, opts)?;
            println!("sublog_condition_holds={}", report.holds);
            output::print_witnesses(&report);
            report.holds
        }
        "sublog-fr" => {
            let report = checks::check_sublog_fr(&instance, &reps, opts)?;
            println!("sublog_fr_condition_holds={}", report.holds);
            output::print_witnesses(&report);
            report.holds
        }
        "detectability" => {
            let report = checks::check_detectability(&instance, &reps, eps_threshold, opts)?;
            println!(
                "detectability_holds={} (eps_threshold={eps_threshold})",
                report.holds
            );
            for (label, value) in &report.numeric_margins {
                println!("margin {label} = {value:.6e}");
            }
            output::print_witnesses(&report);
            report.holds
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown check `{other}` (expected realizable | hls | sublog | sublog-fr | detectability)"
            )))
        }
    };
    Ok(if holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

struct ConstructArgs {
    kind: String,
    input: Option<PathBuf>,
    d: Option<usize>,
    dims: Option<String>,
    gap: Option<f64>,
    contexts: Option<usize>,
    arms: Option<usize>,
    n_reps: Option<usize>,
    eps: Option<f64>,
    policy_index: usize,
    param_seed: u64,
    out: PathBuf,
}

fn require<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required for --kind {kind}")))
}

fn cmd_construct(args: ConstructArgs) -> Result<ExitCode, Error> {
    let file = match args.kind.as_str() {
        "trivial" => {
            let input = require(args.input, "input", "trivial")?;
            let (instance, reps) = load_model(&input)?;
            let augmented = constructions::augment_with_trivial(
                &reps,
                instance.num_contexts,
                instance.num_arms,
            );
            let mut file = InstanceFile::from_parts(&instance, &augmented, None);
            file.metadata = Some(replearn_core::schema::Metadata {
                construction: Some("trivial-augmented".to_string()),
                ..Default::default()
            });
            file
        }
        "hard-set" => {
            let input = require(args.input, "input", "hard-set")?;
            let d = require(args.d, "d", "hard-set")?;
            let (instance, _) = load_model(&input)?;
            let built = constructions::build_hard_set(&instance, d)?;
            InstanceFile::from_problem(&built)
        }
        "nested" => {
            let dims_text = require(args.dims, "dims", "nested")?;
            let gap = require(args.gap, "gap", "nested")?;
            let contexts = args.contexts.unwrap_or(2);
            let arms = args.arms.unwrap_or(3);
            let dims = parse_usize_list(&dims_text)?;
            let built = constructions::build_nested_family(contexts, arms, gap, &dims)?;
            InstanceFile::from_problem(&built)
        }
        "policy-class" => {
            let d = require(args.d, "d", "policy-class")?;
            let n = require(args.n_reps, "n-reps", "policy-class")?;
            let arms = require(args.arms, "arms", "policy-class")?;
            let eps = args.eps.unwrap_or(0.1);
            let scaffold = constructions::build_policy_class_features(d, n, arms)?;
            let built = scaffold.materialize(args.policy_index, eps)?;
            InstanceFile::from_problem(&built)
        }
        "binarized" => {
            let d = require(args.d, "d", "binarized")?;
            let arms = require(args.arms, "arms", "binarized")?;
            let scaffold = constructions::build_binarized_arms(d, arms)?;
            if scaffold.regime_warning {
                eprintln!(
                    "warning: d = {d} is below 12*log2(A); outside the analyzed regime"
                );
            }
            let (built, _theta) = scaffold.materialize(args.param_seed)?;
            let mut file = InstanceFile::from_problem(&built);
            if let Some(meta) = file.metadata.as_mut() {
                meta.zero_feature_arms = scaffold.zero_feature_arms.clone();
            }
            file
        }
        "fr-example" => {
            let eps = require(args.eps, "eps", "fr-example")?;
            let built = constructions::build_fr_example(eps)?;
            InstanceFile::from_problem(&built)
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown construction `{other}`"
            )))
        }
    };
    write_text(&args.out, &file.to_json())?;
    println!(
        "wrote {} ({} contexts x {} arms, {} representation(s))",
        args.out.display(),
        file.contexts,
        file.arms,
        file.representations.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidParameter(format!("bad list entry `{part}`: {e}")))
        })
        .collect()
}

fn parse_u64_list(text: &str) -> Result<Vec<u64>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidParameter(format!("bad list entry `{part}`: {e}")))
        })
        .collect()
}

struct SimulateArgs {
    path: PathBuf,
    alg: String,
    horizon: u64,
    seeds: u64,
    seed_start: u64,
    checkpoints: Option<String>,
    num_checkpoints: usize,
    emit_plays: bool,
    rep: Option<String>,
    alpha: f64,
    ridge: f64,
    c1: f64,
    delta: f64,
    check_period: u64,
    tracking_period: u64,
    force_scale: f64,
    solver: SolverFlags,
    out: Option<PathBuf>,
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let (instance, reps) = load_model(&args.path)?;
    let rep_index = |name: &Option<String>| -> Result<usize, Error> {
        match name {
            None => Ok(0),
            Some(n) => reps
                .reps
                .iter()
                .position(|r| &r.name == n)
                .ok_or_else(|| Error::InvalidParameter(format!("no representation named `{n}`"))),
        }
    };
    let solver_opts = args.solver.to_options();
    let config = match args.alg.as_str() {
        "oracle" => AlgorithmConfig::Oracle,
        "uniform" => AlgorithmConfig::UniformRandom,
        "tabular-ucb" => AlgorithmConfig::TabularUcb,
        "linucb" => AlgorithmConfig::LinUcb {
            rep_index: rep_index(&args.rep)?,
            alpha: args.alpha,
            ridge: args.ridge,
        },
        "eliminate-then-track" => AlgorithmConfig::EliminateThenTrack(EttConfig {
            c1: args.c1,
            delta: args.delta,
            check_period: args.check_period,
            linucb_alpha: args.alpha,
            ridge: args.ridge,
            force_scale: args.force_scale,
            tracking_period: args.tracking_period,
            solver: solver_opts,
        }),
        "c-tracking" => AlgorithmConfig::CTracking(CTrackingConfig {
            scope: match &args.rep {
                None => TrackScope::All,
                some => TrackScope::Single(rep_index(some)?),
            },
            tracking_period: args.tracking_period,
            force_scale: args.force_scale,
            solver: solver_opts,
        }),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown algorithm `{other}`"
            )))
        }
    };
    let checkpoints = match &args.checkpoints {
        Some(text) => parse_u64_list(text)?,
        None => simulator::default_checkpoints(args.horizon, args.num_checkpoints),
    };
    let seeds: Vec<u64> = (args.seed_start..args.seed_start + args.seeds).collect();
    let curves = simulator::sweep(
        &instance,
        &reps,
        &config,
        args.horizon,
        &checkpoints,
        &seeds,
    )?;
    let csv = output::curves_to_csv(&instance, &curves, args.emit_plays);
    match &args.out {
        Some(path) => {
            write_text(path, &csv)?;
            println!("wrote {} ({} rows)", path.display(), csv.lines().count() - 1);
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(
    path: &PathBuf,
    compare: bool,
    levels: usize,
    flags: &SolverFlags,
) -> Result<ExitCode, Error> {
    let (instance, reps) = load_model(path)?;
    let grid = GridSpec {
        levels,
        ..GridSpec::default()
    };
    let oracle_value = solver::oracle::brute_force_complexity(&instance, &reps, &grid)?;
    println!("oracle_value {oracle_value}");
    if compare {
        let solution = solver::solve_replearn(&instance, &reps, &flags.to_options())?;
        let gap = (oracle_value - solution.value).abs() / solution.value.abs().max(1e-12);
        println!("solver_value {}", solution.value);
        println!("relative_gap {gap:.6}");
    }
    Ok(ExitCode::SUCCESS)
}
