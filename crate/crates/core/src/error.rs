use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("{function}: result overflows f64 for argument {arg}")]
    Overflow { function: &'static str, arg: f64 },

    /// Iterative refinement stopped before the requested tolerance was met.
    #[error("{context}: no convergence (last {last}, previous {previous})")]
    Accuracy {
        context: &'static str,
        last: f64,
        previous: f64,
    },

    #[error("numerical inconsistency in {context}: {detail}")]
    Computation {
        context: &'static str,
        detail: String,
    },

    #[error("rate {rate} bits outside feasible interval [{r_min}, {r_max}]")]
    Infeasible { rate: f64, r_min: f64, r_max: f64 },

    #[error("rate R = 0 makes the outage constraint unsatisfiable")]
    DegenerateRate,

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("configuration error{}: key `{key}`: {detail}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config {
        key: String,
        line: Option<usize>,
        detail: String,
    },

    #[error("I/O error on {path}: {detail}")]
    Io { path: String, detail: String },
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParam { .. } => 2,
            _ => 3,
        }
    }
}
