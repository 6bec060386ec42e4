use alloc::string::String;
use core::fmt;

/// Errors raised by game construction, policy validation and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A policy, table or joint action does not fit the game it is used with.
    Dimension {
        /// What was being checked.
        what: &'static str,
        /// Size required by the game.
        expected: usize,
        /// Size that was supplied.
        found: usize,
    },
    /// A probability vector is negative somewhere or does not sum to one.
    InvalidDistribution(String),
    /// Game or trainer parameters violate their invariants.
    InvalidConfig(String),
    /// The zero-sum Nash solver could not certify a solution within tolerance.
    NashNotConverged {
        /// Best restricted-game exploitability that was reached.
        certificate: f64,
        /// Row strategy achieving that certificate.
        row: alloc::vec::Vec<f64>,
        /// Column strategy achieving that certificate.
        col: alloc::vec::Vec<f64>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { what, expected, found } => write!(f, "{what}: expected {expected}, found {found}"),
            Error::InvalidDistribution(msg) => write!(f, "invalid distribution: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NashNotConverged { certificate, .. } => {
                write!(f, "nash solver did not converge (best certificate {certificate:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
