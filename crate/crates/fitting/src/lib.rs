//! Realizations of the stability statements as computations: best-Moebius
//! fitting of a map (the left-hand side of the quantitative estimate), the
//! normalization that kills the kernel projection via group parameters, the
//! bubble normalizer from the compactness argument, and a discrete gradient
//! flow of the deficit producing near-minimizers.

pub mod bubble;
pub mod fit;
pub mod flow;
pub mod normalize;
pub mod procrustes;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FittingError {
    #[error("volume {0} below the floor; the fit objective is undefined")]
    VolumeTooSmall(f64),
    #[error("normalization Newton diverged (residual {0}); input outside the local basin")]
    OutsideBasin(f64),
    #[error("total conformal energy {0} below threshold; no bubble to normalize")]
    DegenerateEnergy(f64),
    #[error("flow backtracking collapsed below the minimum step at iteration {0}")]
    StepCollapse(usize),
    #[error(transparent)]
    Moebius(#[from] moebius::MoebiusError),
}

pub use bubble::{bubble_normalize, BubbleConfig, BubbleResult};
pub use fit::{fit_moebius, FitConfig, FitResult, Orientation};
pub use flow::{deficit_flow, FlowConfig, FlowResult};
pub use normalize::{lambda_scale, normalize_projection, NormalizationResult, NormalizeConfig};
pub use procrustes::{procrustes_rotation, rotation_distance};
