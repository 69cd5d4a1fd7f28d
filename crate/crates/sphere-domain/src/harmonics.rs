//! Ambient spherical-harmonic polynomial basis of degree <= 2 on S^2,
//! used by the mesh reconstruction operator (n = 3 only).

pub const NUM_BASIS: usize = 9;

/// Evaluate the nine degree <= 2 harmonics at an ambient point.
pub fn eval(x: &[f64]) -> [f64; NUM_BASIS] {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    [
        1.0,
        x1,
        x2,
        x3,
        x1 * x2,
        x1 * x3,
        x2 * x3,
        x1 * x1 - x2 * x2,
        2.0 * x3 * x3 - x1 * x1 - x2 * x2,
    ]
}

/// Ambient gradients of the nine harmonics, each a 3-vector.
pub fn grad(x: &[f64]) -> [[f64; 3]; NUM_BASIS] {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [x2, x1, 0.0],
        [x3, 0.0, x1],
        [0.0, x3, x2],
        [2.0 * x1, -2.0 * x2, 0.0],
        [-2.0 * x1, -2.0 * x2, 4.0 * x3],
    ]
}
