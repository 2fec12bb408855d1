//! Robust Hurwitz stability of interval polynomial matrix families.
//!
//! The library decides whether every member of an uncertain polynomial
//! matrix family `M(s) = B(s)A(s) + D(s)C(s)` (with `B`, `D` interval
//! polynomial matrices and `A`, `C` fixed) has a Hurwitz-stable
//! determinant. Instead of sweeping the full coefficient box it
//! enumerates reduced testing sets built from Kharitonov vertices and
//! edges, certifies each low-dimensional edge family by zero exclusion,
//! and cross-checks verdicts with a sampling oracle.

pub mod cli;
pub mod engine;
pub mod freqdom;
pub mod kharitonov;
pub mod poly;
pub mod polymatrix;
pub mod problem;
pub mod testing_sets;

pub use engine::{AnalysisReport, Certificate, EngineSettings, Problem, Verdict};
pub use kharitonov::{EdgeId, EdgeSegment, IntervalPolynomial, VertexId};
pub use poly::{Hurwitz, Polynomial, RouthFailure};
pub use polymatrix::{ComplexMatrix, IntervalPolynomialMatrix, PolynomialMatrix};
pub use problem::ProblemFile;
pub use testing_sets::{EdgeConfiguration, Method, PatternSkeleton, Position, Side};
