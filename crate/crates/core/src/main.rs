use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use intermap::circuit::{build_map_circuit, build_qft, count_gates, emit_gatelist, parse_gatelist, CountingMode};
use intermap::harness::config::CONFIG_KEYS;
use intermap::harness::{run, ExperimentConfig, FileConfig, Overrides};
use intermap::isrm::{build_isrm_circuit, RandomCircuitSpec};
use intermap::rng::RngStream;
use intermap::{Alpha, Error, MapSpec, Result};

#[derive(Parser)]
#[command(name = "intermap", version, about = "Quantum intermediate map experiments", after_help = CONFIG_KEYS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Desymmetrized nearest-neighbour spacing statistics.
    Spacing(RunArgs),
    /// Spectral traces, κ and the symmetry-resolved traces.
    Formfactor(RunArgs),
    /// Intensity and entanglement statistics of late iterates.
    Iterates(RunArgs),
    /// Participation-ratio scaling of eigenvectors and late columns.
    Ipr(RunArgs),
    /// Gate counts and circuit-versus-matrix checks.
    #[command(name = "circuit_verify", alias = "circuit-verify")]
    CircuitVerify(RunArgs),
    /// Ensemble spacing statistics of the random-phase models.
    #[command(name = "isrm_stats", alias = "isrm-stats")]
    IsrmStats(RunArgs),
    /// Emit or inspect gate lists.
    #[command(subcommand)]
    Circuit(CircuitCommand),
}

#[derive(Args)]
#[command(after_help = CONFIG_KEYS)]
struct RunArgs {
    /// Flat TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, conflicts_with = "n_qubits_range")]
    n_qubits: Option<u32>,
    /// Inclusive range a..b.
    #[arg(long)]
    n_qubits_range: Option<String>,
    /// det, isrm-sym or isrm-nonsym.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    window: Option<usize>,
    /// paper or optimized.
    #[arg(long)]
    counting: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CircuitKind {
    Map,
    Qft,
    Isrm,
}

#[derive(Subcommand)]
enum CircuitCommand {
    /// Write a gate list to stdout.
    Emit {
        #[arg(value_enum)]
        kind: CircuitKind,
        #[arg(long, default_value_t = 4)]
        n_qubits: u32,
        #[arg(long, default_value = "1/3")]
        alpha: String,
        #[arg(long, default_value = "paper")]
        counting: String,
        /// CNOT pairs of the random phase circuit.
        #[arg(long, default_value_t = 8)]
        n_s: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Parse a gate list and print its gate counts.
    Count { file: PathBuf },
}

fn run_experiment(name: &str, args: RunArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = ExperimentConfig::resolve(
        file,
        Overrides {
            experiment: Some(name.to_string()),
            alpha: args.alpha,
            n_qubits: args.n_qubits,
            n_qubits_range: args.n_qubits_range,
            variant: args.variant,
            ensemble: args.ensemble,
            seed: args.seed,
            window: args.window,
            counting: args.counting,
            out: args.out,
            workers: args.workers,
        },
    )?;
    let out = run(&cfg)?;
    for path in out.write(&cfg.out)? {
        println!("{}", path.display());
    }
    for c in &out.checks {
        log::info!("{}: {} ({})", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
    }
    let failures = out.failures();
    if !failures.is_empty() {
        let names: Vec<String> = failures.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(Error::Check(names.join("; ")));
    }
    Ok(())
}

fn run_circuit(cmd: CircuitCommand) -> Result<()> {
    match cmd {
        CircuitCommand::Emit {
            kind,
            n_qubits,
            alpha,
            counting,
            n_s,
            seed,
        } => {
            let alpha: Alpha = alpha.parse()?;
            let counting: CountingMode = counting.parse()?;
            let c = match kind {
                CircuitKind::Map => build_map_circuit(&MapSpec::deterministic(n_qubits, alpha)?, counting)?,
                CircuitKind::Qft => build_qft(n_qubits),
                CircuitKind::Isrm => {
                    let mut rng = RngStream::new(seed, 0).rng();
                    build_isrm_circuit(&alpha, &RandomCircuitSpec::random(n_qubits, n_s, &mut rng)?)?
                }
            };
            print!("{}", emit_gatelist(&c));
        }
        CircuitCommand::Count { file } => {
            let text = std::fs::read_to_string(&file)?;
            let c = parse_gatelist(&text)?;
            let k = count_gates(&c);
            println!(
                "qubits {} one_qubit {} two_qubit {} total {}",
                c.n_qubits, k.one_qubit, k.two_qubit, k.total
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spacing(a) => run_experiment("spacing", a),
        Command::Formfactor(a) => run_experiment("formfactor", a),
        Command::Iterates(a) => run_experiment("iterates", a),
        Command::Ipr(a) => run_experiment("ipr", a),
        Command::CircuitVerify(a) => run_experiment("circuit_verify", a),
        Command::IsrmStats(a) => run_experiment("isrm_stats", a),
        Command::Circuit(c) => run_circuit(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
