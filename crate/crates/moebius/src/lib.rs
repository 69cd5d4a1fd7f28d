//! Mobius transformations of S^{n-1}: evaluation, composition, inversion,
//! stereographic projections, the Lie algebra fields, and random sampling.

pub mod algebra;
pub mod sample;
pub mod stereo;
pub mod transform;

pub use algebra::{algebra_basis, algebra_field, MoebiusAlgebraField};
pub use sample::{random_orthogonal, random_unit, sample_random, sample_with};
pub use stereo::{stereographic, stereographic_inv};
pub use transform::{phi_point, MoebiusError, MoebiusTransform};
