//! Second variation of the conformal-isoperimetric deficit at the identity:
//! the quadratic form Q_n and its operator A, sparse assembly with the H_n
//! constraints and the Moebius-algebra kernel basis, coercivity spectra,
//! the volume expansion in elementary symmetric polynomials, the
//! Figalli-Zhang lower expansion of the Dirichlet energy, and the
//! interpolation estimate for the intermediate expansion terms.

pub mod assembly;
pub mod expansion;
pub mod fz;
pub mod interpolation;
pub mod operator;
pub mod sigma;
pub mod spectrum;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadraticsError {
    #[error("symmetric polynomial index k = {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("kernel basis Gram is ill-conditioned (condition number {0})")]
    IllConditionedBasis(f64),
    #[error("eigensolver stalled at relative residual {0}")]
    EigenSolverStalled(f64),
    #[error("linear solver stalled at relative residual {0}")]
    SolverStalled(f64),
    #[error("requested {0} eigenvalues; supported range is 1..=20")]
    TooManyRequested(usize),
}

pub use assembly::{displacement, expand_scalar_gram, QuadraticAssembly};
pub use expansion::{volume_expansion, VolumeExpansion};
pub use fz::{fz_bisect_constant, fz_integrated_residual, fz_lower_expansion, FzMargin};
pub use interpolation::{interpolation_bound_check, InterpolationEntry, InterpolationReport};
pub use operator::{a_pairing, apply_a, q_n, q_tilde, r_n, spherical_divergence, xi_n};
pub use sigma::{sigma_all, sigma_all_with_grad, sigma_grad, sigma_k};
pub use spectrum::{coercivity_spectrum, kernel_spectrum, polynomial_coercivity_spectrum, SpectrumReport};
