//! Numerical analysis of the one-dimensional equation `-y'' + q(x) y = f(x)` on the
//! whole real line: solvability diagnostics built on the Otelbaev function, a
//! Green's-kernel solver with a finite-difference cross-check, the weighted
//! norms that compare solutions, and test-function experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficient;
pub mod error;
pub mod experiments;
pub mod fss;
pub mod grid;
pub mod norms;
pub mod ode;
pub mod otelbaev;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod testfunctions;

pub use coefficient::{Coefficient, CoefficientKind, WindowIntegralMethod};
pub use error::{Error, Result};
