//! Two-prover and k-player free games: exact values, birthday / parallel /
//! threshold repetition, dense CSP encodings, and quasipolynomial estimators.

pub mod cnf;
pub mod combin;
pub mod constructions;
pub mod csp;
pub mod error;
pub mod experiments;
pub mod game;
pub mod json;
pub mod oracle;
pub mod solvers;
pub mod testgames;

pub use error::{Budget, Error, Result};
