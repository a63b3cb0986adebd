//! Finite-field substrate: polynomials, truncated series and nullspaces.

pub mod matrix;
pub mod poly;
pub mod series;

pub use matrix::{nullspace, FpMatrix, Matrix};
pub use poly::Poly;
pub use series::{read_series, series_arith, AnySeries, PrimeSeries, QSeries, Series, SeriesOp};
