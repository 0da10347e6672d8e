//! Command-line front end for `coalition-forge`: single analyses, reference
//! table checks, `eta` sweeps, the bidding-game solver comparison and a
//! property suite.

pub mod commands;
pub mod record;
pub mod verify;

use std::fmt;

use coalition_forge::Error;

/// A command outcome that ends the process with `code`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const USAGE: u8 = 2;
    pub const BUDGET: u8 = 3;
    pub const CHECK: u8 = 1;

    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Failure {
            code: Self::CHECK,
            message: message.into(),
        }
    }

    pub fn io(err: impl fmt::Display) -> Self {
        Failure {
            code: Self::CHECK,
            message: format!("i/o error: {err}"),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::BudgetExceeded { .. } => Failure::BUDGET,
            Error::NonConvergence { .. } => Failure::CHECK,
            _ => Failure::USAGE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}
