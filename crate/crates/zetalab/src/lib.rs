//! Exact and numerical computation with zeta and L-functions over finite
//! fields: validated Weil polynomials, explicit formulas, curve zeta
//! functions from point counts, L-functions of elliptic surfaces over
//! F_q(t), asymptotic family diagnostics (Brauer-Siegel ratios, limit zeta
//! functions, Euler-Kronecker constants), and zero-distribution densities.

pub mod asymptotics;
pub mod corpus;
pub mod curve;
pub mod field;
pub mod lfun;
pub mod qpoly;
pub mod report;
pub mod roots;
pub mod surface;
pub mod zero_dist;

pub use lfun::{
    lfunction_from_lambdas, validate_lfunction, LFunction, LfunError, Mode, ZetaFunction,
};
