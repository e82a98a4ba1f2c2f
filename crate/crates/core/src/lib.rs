//! Matrix-variate normality diagnostics.
//!
//! Fits the Kronecker-structured matrix normal model with the flip-flop
//! algorithm, computes matrix- and vector-based Mahalanobis squared
//! distances, and builds the MHealy, DD and Healy-type plots together with
//! the separability likelihood-ratio test.

pub mod dataset;
pub mod diagnostics;
pub mod distances;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod io;
pub mod linalg;
pub mod params;
pub mod propcheck;
pub mod scalar;
pub mod simharness;

pub use dataset::MatrixDataset;
pub use error::{Error, Result, SingularReason};
pub use linalg::{kron, spd_factorize, unvectorize, vectorize, Matrix, SpdFactor};
pub use params::{MatNormalFactors, MatNormalParams, MvnParams};
pub use scalar::Scalar;

pub type MatrixF64 = Matrix<f64>;
pub type MatrixDatasetF64 = MatrixDataset<f64>;
pub type MatNormalParamsF64 = MatNormalParams<f64>;
pub type MvnParamsF64 = MvnParams<f64>;
pub type PlotSeriesF64 = diagnostics::PlotSeries<f64>;
pub type FlipFlopReportF64 = estimation::FlipFlopReport<f64>;
