use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phasebell::grid::VariablePair;
use phasebell::state::Sign;
use phasebell_cli::{commands, Command, ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "phasebell", version, about = "Phase-space Bell inequality experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Atomic marginals that reach S = 4.
    ClassicalCounterexample(Common),
    /// S(L) for the regularised two-mode state, by 1D and grid routes.
    QuantumViolation(Common),
    /// Projector algebra, the negativity witness and the spectrum of P.
    OperatorChecks(Common),
    /// The nonnegative solution family for three prescribed marginals.
    ThreeMarginal(Common),
    /// Wigner functions and their marginals.
    Wigner(Common),
    /// Every experiment with default settings.
    Selftest(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Points per axis (power of two).
    #[arg(long)]
    n: Option<usize>,
    /// Half-width B of the position box [-B, B].
    #[arg(long = "box")]
    box_half_width: Option<f64>,
    /// Cutoff L; repeat for a sweep.
    #[arg(long = "L")]
    l: Vec<f64>,
    /// Largest L evaluated on the full 2D grid.
    #[arg(long, default_value_t = 10.0)]
    grid_max_l: f64,
    /// gaussian | ho:M,N | psi+:L | psi-:L | random:SEED | cat:D | file:PATH
    #[arg(long)]
    state: Option<String>,
    #[arg(long, default_value = "+", value_parser = parse_sign, allow_hyphen_values = true)]
    sign: Sign,
    /// e.g. "q1>0;q2<1;p1 in (-1,1);p2 notin (0,2)", or "theta".
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Relative support threshold.
    #[arg(long, default_value_t = 1e-12)]
    epsilon: f64,
    #[arg(long, default_value = "qp", value_parser = parse_pair)]
    drop_marginal: VariablePair,
    /// Random F families per state.
    #[arg(long, default_value_t = 20)]
    families: usize,
    /// a1,a2,a1',a2',b1,b2,b1',b2'
    #[arg(long, value_parser = parse_atoms, allow_hyphen_values = true)]
    atoms: Option<[f64; 8]>,
    /// Swap in a marginal from random:SEED to provoke a consistency failure.
    #[arg(long)]
    tamper_seed: Option<u64>,
    /// Output directory; stdout when absent.
    #[arg(long, env = "PHASEBELL_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn parse_atoms(s: &str) -> Result<[f64; 8], String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let n = v.len();
    v.try_into().map_err(|_| format!("expected 8 comma-separated values, got {n}"))
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    s.parse().map_err(|e: phasebell::Error| e.to_string())
}

fn parse_pair(s: &str) -> Result<VariablePair, String> {
    VariablePair::from_name(s).map_err(|e| e.to_string())
}

impl Common {
    fn into_config(self, command: Command) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(command);
        c.n = self.n;
        c.box_half_width = self.box_half_width;
        c.l_values = self.l;
        c.grid_max_l = self.grid_max_l;
        c.state = self.state;
        c.sign = self.sign;
        c.pattern = self.pattern;
        c.seed = self.seed;
        c.epsilon = self.epsilon;
        c.drop_marginal = self.drop_marginal;
        c.families = self.families;
        c.atoms = self.atoms;
        c.tamper_seed = self.tamper_seed;
        c.out = self.out;
        c.format = self.format;
        c
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::ClassicalCounterexample(c) => (Command::ClassicalCounterexample, c),
        Sub::QuantumViolation(c) => (Command::QuantumViolation, c),
        Sub::OperatorChecks(c) => (Command::OperatorChecks, c),
        Sub::ThreeMarginal(c) => (Command::ThreeMarginal, c),
        Sub::Wigner(c) => (Command::Wigner, c),
        Sub::Selftest(c) => (Command::Selftest, c),
    };
    let config = match common.into_config(command).resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match commands::run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match report.emit(config.out.as_deref(), config.format) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    for c in report.failures() {
        eprintln!("FAIL {}{}", c.name, c.detail.as_deref().map(|d| format!(": {d}")).unwrap_or_default());
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
