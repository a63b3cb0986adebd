//! High-precision numerics: tagged big floats, Euler transforms, ratio and
//! continued-fraction tests, amplitude fits, elliptic branch continuation
//! and connection matching between local frames.

pub mod bigfloat;
pub mod elliptic;
pub mod matching;
pub mod numeric;
pub mod planted;

pub use bigfloat::{complex_solve, BigFloat, BigFloatField, Complex};
