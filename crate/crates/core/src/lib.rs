//! Numerical potential theory for certified lower bounds on the smallest
//! limiting trace-to-degree ratio of totally positive algebraic integers.
//!
//! The pipeline builds probability measures on interval unions whose
//! logarithmic potentials combine a constant, a linear term and `log|Q|`
//! terms for a finite set of integer polynomials, optimises the support by
//! gradient descent on the optimality residuals, and verifies a dual
//! certificate that converts the converged configuration into a rigorous-in-
//! floating-point lower bound.

pub mod certificate;
pub mod closedform;
pub mod descent;
pub mod error;
pub mod measures;
pub mod newton;
pub mod poly;
pub mod quad;

pub use certificate::{certify, Certificate, VerificationReport};
pub use closedform::{solve_schur, solve_siegel, IntervalFamilyParams, SiegelSolution};
pub use descent::{default_init, run_descent, DescentConfig, DescentOutcome, DescentState};
pub use error::{Error, Result};
pub use measures::{
    candidate_measure, capacity_constant, equilibrium_measure, linear_potential_measure,
    log_potential_measure, measure_for_polynomial, DualValues, MeasureBundle, SqrtMeasure,
};
pub use poly::{lagrange_interpolate, IntegerPolynomial, RealPolynomial};
pub use quad::{
    integrate_singular, integrate_singular_union, integrate_smooth, QuadratureConfig, SupportSet,
};
