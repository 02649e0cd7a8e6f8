//! Experiment configuration: the fully resolved parameter set echoed in
//! every report.

use std::path::PathBuf;

use clap::ValueEnum;
use phasebell::grid::VariablePair;
use phasebell::state::{Sign, StateSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ClassicalCounterexample,
    QuantumViolation,
    OperatorChecks,
    ThreeMarginal,
    Wigner,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ClassicalCounterexample => "classical-counterexample",
            Command::QuantumViolation => "quantum-violation",
            Command::OperatorChecks => "operator-checks",
            Command::ThreeMarginal => "three-marginal",
            Command::Wigner => "wigner",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Parameters of one run. `None` fields fall back to per-command defaults
/// in [`ExperimentConfig::resolve`], and the resolved values are what the
/// report echoes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Points per axis.
    pub n: Option<usize>,
    /// Half-width `B` of the box `[-B, B]` on both position axes.
    #[serde(rename = "box")]
    pub box_half_width: Option<f64>,
    pub state: Option<String>,
    pub sign: Sign,
    pub pattern: Option<String>,
    #[serde(rename = "L")]
    pub l_values: Vec<f64>,
    /// Largest `L` for which the full 2D grid route is attempted.
    pub grid_max_l: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub drop_marginal: VariablePair,
    /// Number of random `F` families per state.
    pub families: usize,
    pub atoms: Option<[f64; 8]>,
    /// Replace the third chain marginal with one from `random:<seed>`.
    pub tamper_seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_L: [f64; 7] = [2.0, 5.0, 10.0, 1e2, 1e4, 1e6, 1e8];

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            n: None,
            box_half_width: None,
            state: None,
            sign: Sign::Plus,
            pattern: None,
            l_values: Vec::new(),
            grid_max_l: 10.0,
            seed: 1,
            epsilon: 1e-12,
            drop_marginal: VariablePair::QP,
            families: 20,
            atoms: None,
            tamper_seed: None,
            out: None,
            format: Format::Json,
        }
    }

    /// Fills command defaults and validates every numeric parameter.
    pub fn resolve(mut self) -> Result<Self> {
        use Command::*;
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.n.is_none() {
            self.n = match self.command {
                ClassicalCounterexample | Selftest => None,
                QuantumViolation => Some(4096),
                OperatorChecks | Wigner => Some(32),
                ThreeMarginal => Some(16),
            };
        }
        if let Some(n) = self.n {
            if n < 4 || !n.is_power_of_two() {
                return bad(format!("--n {n} must be a power of two >= 4"));
            }
            if n > 16384 {
                return bad(format!("--n {n} exceeds 16384"));
            }
        }
        if self.box_half_width.is_none() {
            self.box_half_width = match self.command {
                OperatorChecks => Some(10.0),
                Wigner => Some(7.0),
                _ => None,
            };
        }
        if let Some(b) = self.box_half_width {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("--box {b} must be positive"));
            }
        }
        if self.command == QuantumViolation && self.l_values.is_empty() {
            self.l_values = DEFAULT_L.to_vec();
        }
        if let Some(l) = self.l_values.iter().find(|l| !(**l > 1.0 && l.is_finite())) {
            return bad(format!("--L {l} must be a finite value > 1"));
        }
        if !(self.grid_max_l >= 0.0 && self.grid_max_l.is_finite()) {
            return bad(format!("--grid-max-l {} must be nonnegative", self.grid_max_l));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1e-3) {
            return bad(format!("--epsilon {} must lie in [0, 1e-3)", self.epsilon));
        }
        if self.command == ThreeMarginal && self.families == 0 {
            return bad("--families must be at least 1".into());
        }
        if let Some(atoms) = self.atoms {
            if atoms.iter().any(|a| !a.is_finite()) {
                return bad("--atoms must be finite".into());
            }
        }
        if let Some(s) = &self.state {
            s.parse::<StateSpec>().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if self.command == ThreeMarginal && self.state.is_none() {
            self.state = Some(format!("random:{}", self.seed));
        }
        if let Some(p) = &self.pattern {
            p.parse::<phasebell::bell::SignPattern>()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(self)
    }

    pub fn state_spec(&self) -> Option<StateSpec> {
        self.state.as_deref().map(|s| s.parse().expect("validated in resolve"))
    }

    pub fn pattern_spec(&self) -> phasebell::bell::SignPattern {
        self.pattern
            .as_deref()
            .map(|s| s.parse().expect("validated in resolve"))
            .unwrap_or_else(phasebell::bell::SignPattern::theta)
    }

    pub fn grid_n(&self) -> usize {
        self.n.expect("resolved")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_per_command() {
        let c = ExperimentConfig::new(Command::OperatorChecks).resolve().unwrap();
        assert_eq!((c.n, c.box_half_width), (Some(32), Some(10.0)));
        let c = ExperimentConfig::new(Command::QuantumViolation).resolve().unwrap();
        assert_eq!(c.l_values, DEFAULT_L.to_vec());
        let c = ExperimentConfig::new(Command::ThreeMarginal).resolve().unwrap();
        assert_eq!(c.state.as_deref(), Some("random:1"));
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = ExperimentConfig::new(Command::Wigner);
        c.n = Some(24);
        assert!(c.resolve().is_err());
        let mut c = ExperimentConfig::new(Command::QuantumViolation);
        c.l_values = vec![0.5];
        assert!(c.resolve().is_err());
        let mut c = ExperimentConfig::new(Command::Wigner);
        c.state = Some("psi+:-1".into());
        assert!(c.resolve().is_err());
        let mut c = ExperimentConfig::new(Command::Wigner);
        c.pattern = Some("q1>0".into());
        assert!(c.resolve().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = ExperimentConfig::new(Command::ThreeMarginal).resolve().unwrap();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
