//! Simplified L-curve parameter choice for Tikhonov-type regularization.
//!
//! The crate builds ill-posed test problems in singular-value form, adds
//! seeded noise, computes Tikhonov and Landweber regularization paths, and
//! evaluates heuristic parameter choice functionals on a geometric α-grid:
//! the simple-L and simple-L ratio rules next to quasi-optimality, the
//! heuristic discrepancy and Hanke–Raus rules, the classical L-curve
//! curvature, the V-curve, CRESO and the Brezinski–Rodriguez–Seatzu rule.
//! A convex branch covers ℓ¹, ℓ^{3/2} and 1-D total-variation penalties via
//! FISTA and Bregman iterates. The [`bench`] module runs the noise-level
//! sweeps and reports median efficiency ratios.

pub mod bench;
pub mod convex;
pub mod error;
pub mod landweber;
pub mod noise;
pub mod par;
pub mod path;
pub mod problem_spec;
pub mod rules;
pub mod spectral;

pub use error::{Error, Result};
pub use noise::{add_noise, condition_constant, ConditionReport, ConditionVariant, NoisySpectrum};
pub use par::Exec;
pub use path::{AlphaGrid, ErrorCurve, PathCurve};
pub use rules::{RuleCurve, RuleId, SelectionResult};
pub use spectral::{make_diagonal_problem, mu_to_p, SpectralProblem};
