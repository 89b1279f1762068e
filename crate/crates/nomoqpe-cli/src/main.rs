//! Command-line workflows: spectra, phase-estimation runs, repetition
//! sweeps, gate-cost reports, block-structure tables and the
//! self-verification suite.
//!
//! Exit codes: 0 success, 1 usage, 2 input parsing, 3 numerical guard,
//! 4 verification failure.

use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use nomoqpe::blocks::{block_count_formula, enumerate_blocks, gate_count_ng};
use nomoqpe::checks::run_all_checks;
use nomoqpe::cost::{trotter_step_cost, BosonMapping};
use nomoqpe::ipea::{
    min_repetitions, repetition_model, run_ipea, IpeaConfig, IpeaMode, IpeaVersion, PhaseProblem,
    PhaseWindow,
};
use nomoqpe::matrix::exact_spectrum;
use nomoqpe::systemfile::{build_guess, parse_guess, parse_system, SystemFile};
use nomoqpe::toys::toy_source;
use nomoqpe::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser)]
#[command(name = "nomoqpe", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact eigenvalues of a system file
    Spectrum(SpectrumArgs),
    /// Iterative phase estimation on a system file
    Ipea(IpeaArgs),
    /// Majority-vote repetition sweep and amplification curve
    SweepReps(SweepArgs),
    /// Trotter-step gate-cost report
    Cost(CostArgs),
    /// Block structure of the two-mode interaction term
    Blocks(BlocksArgs),
    /// Run the self-verification suite
    Verify,
}

#[derive(Args)]
struct SpectrumArgs {
    /// System file path or bundled toy name
    file: String,
    /// Restrict the named fermion class to S_z = 0 (repeatable)
    #[arg(long = "sz-zero")]
    sz_zero: Vec<String>,
    /// Write a CSV artifact here
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Copy, Clone, ValueEnum)]
enum VersionArg {
    #[value(alias = "A")]
    A,
    #[value(alias = "B")]
    B,
}

#[derive(Args)]
struct IpeaArgs {
    file: String,
    #[arg(long, value_enum)]
    version: VersionArg,
    /// Number of phase bits m
    #[arg(long)]
    bits: usize,
    /// Lower edge of the energy window (defaults to the file's emin)
    #[arg(long)]
    emin: Option<f64>,
    /// Upper edge of the energy window (defaults to the file's emax)
    #[arg(long)]
    emax: Option<f64>,
    /// Initial guess: ground | excited:K | det:OCCSTRING | file:PATH
    #[arg(long)]
    guess: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Odd repetition count for majority voting
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Exact-branching mode instead of sampling
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    file: String,
    #[arg(long, value_enum)]
    version: VersionArg,
    #[arg(long)]
    bits: usize,
    #[arg(long)]
    emin: Option<f64>,
    #[arg(long)]
    emax: Option<f64>,
    #[arg(long)]
    guess: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated success-probability targets
    #[arg(long, default_value = "0.99,0.999999")]
    targets: String,
    /// Largest (odd) repetition count in the table
    #[arg(long = "max-r", default_value_t = 201)]
    max_r: usize,
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Copy, Clone, ValueEnum)]
enum MappingArg {
    Direct,
    Compact,
}

#[derive(Args)]
struct CostArgs {
    file: String,
    #[arg(long, value_enum)]
    mapping: MappingArg,
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args)]
struct BlocksArgs {
    #[arg(long)]
    n1: u32,
    #[arg(long)]
    n2: u32,
    #[arg(long)]
    csv: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, everything else is usage
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Ipea(args) => cmd_ipea(args),
        Command::SweepReps(args) => cmd_sweep(args),
        Command::Cost(args) => cmd_cost(args),
        Command::Blocks(args) => cmd_blocks(args),
        Command::Verify => cmd_verify(),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::IntegralConflict(..)
        | Error::Io(..)
        | Error::InvalidClass { .. }
        | Error::IndexOutOfRange { .. }
        | Error::NonHermitianIntegrals(..) => EXIT_PARSE,
        _ => EXIT_NUMERICAL,
    }
}

/// Loads a system from a path, or from the bundled toys when the argument
/// names one (with or without the `.nomo` suffix).
fn load_system(name: &str) -> Result<(SystemFile, String), Error> {
    let source = if Path::new(name).exists() {
        std::fs::read_to_string(name)?
    } else {
        let stem = name.strip_suffix(".nomo").unwrap_or(name);
        match toy_source(stem) {
            Some(text) => text.to_string(),
            None => {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("no file `{name}` and no bundled toy of that name"),
                )))
            }
        }
    };
    Ok((parse_system(&source)?, source))
}

fn config_hash(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_header(seed: Option<u64>, hash: &str) -> String {
    let seed = match seed {
        Some(s) => s.to_string(),
        None => "none".into(),
    };
    format!(
        "# nomoqpe {}\n# seed {seed}\n# config {hash}\n",
        env!("CARGO_PKG_VERSION")
    )
}

fn write_csv(path: &str, content: &str) -> Result<(), Error> {
    std::fs::write(path, content)?;
    Ok(())
}

fn window_for(file: &SystemFile, emin: Option<f64>, emax: Option<f64>) -> Result<PhaseWindow, Error> {
    let lo = emin.or(file.metadata.e_min).ok_or_else(|| {
        Error::InvalidArgument("no --emin given and the file declares none".into())
    })?;
    let hi = emax.or(file.metadata.e_max).ok_or_else(|| {
        Error::InvalidArgument("no --emax given and the file declares none".into())
    })?;
    PhaseWindow::new(lo, hi)
}

struct PreparedRun {
    matrix: DMatrix<f64>,
    guess: nalgebra::DVector<f64>,
    window: PhaseWindow,
}

fn prepare_run(
    file: &SystemFile,
    guess_spec: &str,
    emin: Option<f64>,
    emax: Option<f64>,
) -> Result<PreparedRun, Error> {
    let window = window_for(file, emin, emax)?;
    let basis = file.build_basis(&[])?;
    let matrix = file.dense_matrix(&basis)?;
    let spectrum = exact_spectrum(&matrix)?;
    let guess = build_guess(&parse_guess(guess_spec)?, &basis, &spectrum)?;
    Ok(PreparedRun {
        matrix,
        guess,
        window,
    })
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<u8, Error> {
    let (file, source) = load_system(&args.file)?;
    let basis = file.build_basis(&args.sz_zero)?;
    let matrix = file.dense_matrix(&basis)?;
    let spectrum = exact_spectrum(&matrix)?;

    println!("system {} ({} configurations)", args.file, basis.len());
    for (i, e) in spectrum.eigenvalues.iter().enumerate() {
        println!("E[{i}] = {e}");
    }

    if let Some(path) = &args.csv {
        let hash = config_hash(&["spectrum", &args.sz_zero.join(","), &source]);
        let mut csv = csv_header(None, &hash);
        csv.push_str("index,energy\n");
        for (i, e) in spectrum.eigenvalues.iter().enumerate() {
            let _ = writeln!(csv, "{i},{e}");
        }
        write_csv(path, &csv)?;
    }
    Ok(0)
}

fn ipea_config(
    version: VersionArg,
    bits: usize,
    window: PhaseWindow,
    reps: usize,
    seed: u64,
    exact: bool,
) -> IpeaConfig {
    IpeaConfig {
        version: match version {
            VersionArg::A => IpeaVersion::A,
            VersionArg::B => IpeaVersion::B,
        },
        bits,
        window,
        repetitions: reps,
        seed,
        mode: if exact {
            IpeaMode::ExactBranching
        } else {
            IpeaMode::Sampled
        },
    }
}

fn cmd_ipea(args: IpeaArgs) -> Result<u8, Error> {
    let (file, source) = load_system(&args.file)?;
    let run = prepare_run(&file, &args.guess, args.emin, args.emax)?;
    let config = ipea_config(
        args.version, args.bits, run.window, args.reps, args.seed, args.exact,
    );
    let report = run_ipea(&config, &run.guess, &run.matrix)?;

    let problem = PhaseProblem::new(&run.matrix, &run.guess, run.window, args.bits)?;
    let target = problem.dominant_eigenstate();
    let overlap = problem.amplitudes[target] * problem.amplitudes[target];
    let p_success = match report.success_probability {
        Some(p) => p,
        // analytic value of the same model the sampler draws from
        None => repetition_model(&problem, config.version, target).amplified(config.repetitions),
    };
    let bits_string: String = report.bits.iter().map(|b| b.to_string()).collect();

    println!(
        "mode {}  version {}  bits {}  reps {}  seed {}",
        if args.exact { "exact" } else { "sampled" },
        match args.version {
            VersionArg::A => "A",
            VersionArg::B => "B",
        },
        args.bits,
        args.reps,
        args.seed
    );
    println!("bits      {bits_string}");
    println!("E         {}", report.energy);
    println!("S_overlap {overlap}");
    println!("p_success {p_success}");

    if let Some(path) = &args.csv {
        let hash = config_hash(&[
            "ipea",
            &format!(
                "{}:{}:{}:{}:{}:{}:{}",
                match args.version {
                    VersionArg::A => "A",
                    VersionArg::B => "B",
                },
                args.bits,
                run.window.e_min,
                run.window.e_max,
                args.guess,
                args.reps,
                args.exact
            ),
            &source,
        ]);
        let mut csv = csv_header(Some(args.seed), &hash);
        csv.push_str("E,S_overlap,p_success\n");
        let _ = writeln!(csv, "{},{overlap},{p_success}", report.energy);
        write_csv(path, &csv)?;
    }
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Error> {
    let targets: Vec<f64> = args
        .targets
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("target `{t}` is not a number")))
        })
        .collect::<Result<_, _>>()?;
    if args.max_r == 0 || args.max_r % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "--max-r must be odd and positive, got {}",
            args.max_r
        )));
    }

    let (file, source) = load_system(&args.file)?;
    let run = prepare_run(&file, &args.guess, args.emin, args.emax)?;
    let problem = PhaseProblem::new(&run.matrix, &run.guess, run.window, args.bits)?;
    let target_state = problem.dominant_eigenstate();
    problem.check_phase_separation(target_state)?;
    let version = match args.version {
        VersionArg::A => IpeaVersion::A,
        VersionArg::B => IpeaVersion::B,
    };
    let model = repetition_model(&problem, version, target_state);

    println!("single-run success p(1) = {}", model.amplified(1));
    for t in &targets {
        match min_repetitions(&model, *t) {
            Ok(r) => println!("target {t}: r = {r}"),
            Err(e) => println!("target {t}: {e}"),
        }
    }

    let mut rows = String::new();
    for r in (1..=args.max_r).step_by(2) {
        let p = model.amplified(r);
        let f = -(1.0 - p).ln();
        let _ = writeln!(rows, "{r},{p},{f}");
    }
    print!(
        "r,p_success,f\n{}",
        rows.lines().take(6).map(|l| format!("{l}\n")).collect::<String>()
    );
    if args.max_r > 11 {
        println!("... ({} rows total)", args.max_r.div_ceil(2));
    }

    if let Some(path) = &args.csv {
        let hash = config_hash(&[
            "sweep-reps",
            &format!(
                "{}:{}:{}:{}:{}:{}:{}",
                match args.version {
                    VersionArg::A => "A",
                    VersionArg::B => "B",
                },
                args.bits,
                run.window.e_min,
                run.window.e_max,
                args.guess,
                args.targets,
                args.max_r
            ),
            &source,
        ]);
        let mut csv = csv_header(Some(args.seed), &hash);
        csv.push_str("r,p_success,f\n");
        csv.push_str(&rows);
        write_csv(path, &csv)?;
    }
    Ok(0)
}

fn cmd_cost(args: CostArgs) -> Result<u8, Error> {
    let (file, source) = load_system(&args.file)?;
    let mapping = match args.mapping {
        MappingArg::Direct => BosonMapping::Direct,
        MappingArg::Compact => BosonMapping::Compact,
    };
    let report = trotter_step_cost(&file.indexing, mapping)?;

    println!("mapping          {}", report.mapping.as_str());
    println!("qubits           {}", report.qubit_total);
    println!("fermion-fermion  {} (unit-constant, natural log)", report.fermion_fermion);
    println!("boson-boson      {} (exact integer)", report.boson_boson);
    println!("fermion-boson    {} (unit-constant, natural log)", report.fermion_boson);
    for p in &report.pairs {
        let exact = p
            .exact_block_sum
            .map(|v| v.to_string())
            .unwrap_or_else(|| "-".into());
        let precompute = p
            .classical_precompute
            .map(|v| v.to_string())
            .unwrap_or_else(|| "-".into());
        println!(
            "pair {}x{} (n={},{}) contribution {} per-term {} block-sum {} precompute {}",
            p.label_k, p.label_l, p.n_k, p.n_l, p.contribution, p.ng, exact, precompute
        );
    }

    if let Some(path) = &args.csv {
        let hash = config_hash(&["cost", report.mapping.as_str(), &source]);
        let mut csv = csv_header(None, &hash);
        csv.push_str("key,value\n");
        let _ = writeln!(csv, "mapping,{}", report.mapping.as_str());
        let _ = writeln!(csv, "qubits,{}", report.qubit_total);
        let _ = writeln!(csv, "fermion_fermion,{}", report.fermion_fermion);
        let _ = writeln!(csv, "boson_boson,{}", report.boson_boson);
        let _ = writeln!(csv, "fermion_boson,{}", report.fermion_boson);
        for p in &report.pairs {
            let _ = writeln!(
                csv,
                "pair_{}_{}_contribution,{}",
                p.label_k, p.label_l, p.contribution
            );
            let _ = writeln!(csv, "pair_{}_{}_per_term,{}", p.label_k, p.label_l, p.ng);
            if let Some(v) = p.classical_precompute {
                let _ = writeln!(csv, "pair_{}_{}_precompute,{v}", p.label_k, p.label_l);
            }
        }
        write_csv(path, &csv)?;
    }
    Ok(0)
}

fn cmd_blocks(args: BlocksArgs) -> Result<u8, Error> {
    let structure = enumerate_blocks(args.n1, args.n2)?;
    let histogram: Vec<String> = structure
        .histogram
        .iter()
        .map(|(d, c)| format!("d={d}:{c}"))
        .collect();
    println!("histogram {}", histogram.join(" "));

    let mut all_match = true;
    let mut rows = String::new();
    for d in 1..=(args.n1.min(args.n2) + 1) {
        let oracle = structure.histogram.get(&(d as usize)).copied().unwrap_or(0);
        let formula = block_count_formula(args.n1, args.n2, d)?;
        let status = if oracle == formula { "ok" } else { "MISMATCH" };
        if oracle != formula {
            all_match = false;
        }
        println!("d={d}: enumerated {oracle}, formula {formula} ({status})");
        let _ = writeln!(rows, "{d},{oracle},{formula},{status}");
    }

    let m2 = structure.moment_sum(2);
    let ng = gate_count_ng(args.n1 as u64, args.n2 as u64)?;
    let ng_ok = format!("{ng}") == format!("{m2}");
    println!("N_g {ng} (sum of d^2: {m2})");
    if !ng_ok {
        all_match = false;
    }
    println!("status {}", if all_match { "OK" } else { "MISMATCH" });

    if let Some(path) = &args.csv {
        let hash = config_hash(&["blocks", &format!("{}:{}", args.n1, args.n2)]);
        let mut csv = csv_header(None, &hash);
        csv.push_str("d,count_enumerated,count_formula,status\n");
        csv.push_str(&rows);
        write_csv(path, &csv)?;
    }
    Ok(if all_match { 0 } else { EXIT_VERIFICATION })
}

fn worker_threads() -> Result<usize, Error> {
    match std::env::var("NOMOQPE_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "NOMOQPE_THREADS must be a positive integer, got `{v}`"
            ))
        }),
        Err(_) => Ok(std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)),
    }
}

fn cmd_verify() -> Result<u8, Error> {
    let threads = worker_threads()?;
    let results = run_all_checks(threads);
    let mut failed = 0usize;
    for r in &results {
        let tag = if r.passed { "ok  " } else { "FAIL" };
        println!("{tag} {} — {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", results.len(), failed);
    Ok(if failed == 0 { 0 } else { EXIT_VERIFICATION })
}
