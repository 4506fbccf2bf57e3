use alloc::string::String;
use alloc::vec::Vec;

use crate::model::Violation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {}", join(.0))]
    InvalidModel(Vec<Violation>),
    #[error("invalid initial distribution: {0}")]
    InvalidInitial(String),
    #[error("invalid tandem parameters: {0}")]
    InvalidTandem(String),
    #[error("atom too large: P_-·1 = {mass} exceeds λγ/(b+λγ) = {bound}")]
    AtomTooLarge { mass: f64, bound: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("{what} must be nonnegative and finite, got {value}")]
    BadArgument { what: &'static str, value: f64 },
    #[error("singular matrix (condition estimate {cond:e})")]
    Singular { cond: f64 },
    #[error("iteration diverged")]
    Diverged,
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("zero-rate class is absorbing")]
    AbsorbingZeroClass,
    #[error("M undefined (null recurrent Y)")]
    MUndefined,
    #[error("first-return formula requires non-null-recurrent X and Y")]
    NullRecurrent,
    #[error("boundary condition fails at order {order} (residual {residual:e})")]
    Boundary { order: usize, residual: f64 },
    #[error("limit does not exist: eigenvalue with real part {re} > 0")]
    LimitDiverges { re: f64 },
    #[error("limit does not exist: purely imaginary eigenvalue {im}i")]
    LimitOscillates { im: f64 },
    #[error("limit does not exist: zero eigenvalue is not semisimple")]
    LimitNotSemisimple,
    #[error("unknown example {0}")]
    UnknownExample(usize),
}

fn join(v: &[Violation]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push_str("; ");
        }
        let _ = write!(s, "{x}");
    }
    s
}
