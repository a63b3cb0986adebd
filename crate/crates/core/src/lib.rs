//! Reconstruction, factoring and continuation of Fuchsian differential
//! operators from power-series data.

pub mod continuation;
pub mod error;
pub mod ffcore;
pub mod guess;
pub mod localfrob;
pub mod opalgebra;
pub mod field;
pub mod reconstruct;
pub mod theta;

pub use error::*;
pub use field::{default_primes, Field, PrimeField, Rationals};
pub use theta::{ThetaOp, ThetaOperatorP, ThetaOperatorX};
