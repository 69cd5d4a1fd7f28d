//! Stereographic projection from the antipode of a chosen pole, with an
//! explicit orthonormal basis of the pole's orthogonal complement so that
//! coordinates live in R^{n-1}.

use crate::transform::MoebiusError;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of xi^perp as the first n-1 columns of the Householder
/// reflection sending e_n to xi; basis vector a has components
/// h_a[j] = delta_{aj} - 2 v_a v_j / |v|^2 with v = xi - e_n.
fn basis_vector(xi: &[f64], a: usize, out: &mut [f64]) {
    let n = xi.len();
    let mut v: Vec<f64> = xi.to_vec();
    v[n - 1] -= 1.0;
    let v2 = dot(&v, &v);
    for j in 0..n {
        out[j] = if j == a { 1.0 } else { 0.0 };
    }
    if v2 > 1e-24 {
        let f = 2.0 * v[a] / v2;
        for j in 0..n {
            out[j] -= f * v[j];
        }
    }
}

/// sigma_xi(x) = (x - <x,xi> xi) / (1 + <x,xi>) in basis coordinates of
/// xi^perp; the projection from -xi. Fails within 1e-8 of the co-pole.
pub fn stereographic(xi: &[f64], x: &[f64]) -> Result<Vec<f64>, MoebiusError> {
    let n = xi.len();
    let near: f64 = x.iter().zip(xi).map(|(a, b)| (a + b) * (a + b)).sum();
    if near.sqrt() < 1e-8 {
        return Err(MoebiusError::PoleSingular);
    }
    let c = dot(x, xi);
    let mut p = vec![0.0; n];
    for j in 0..n {
        p[j] = (x[j] - c * xi[j]) / (1.0 + c);
    }
    let mut h = vec![0.0; n];
    let mut y = vec![0.0; n - 1];
    for (a, ya) in y.iter_mut().enumerate() {
        basis_vector(xi, a, &mut h);
        *ya = dot(&p, &h);
    }
    Ok(y)
}

/// Inverse stereographic projection: y in R^{n-1} to the unit sphere.
pub fn stereographic_inv(xi: &[f64], y: &[f64]) -> Vec<f64> {
    let n = xi.len();
    let y2 = dot(y, y);
    let mut x = vec![0.0; n];
    let mut h = vec![0.0; n];
    for (a, &ya) in y.iter().enumerate() {
        basis_vector(xi, a, &mut h);
        for j in 0..n {
            x[j] += 2.0 * ya * h[j] / (1.0 + y2);
        }
    }
    let f = (1.0 - y2) / (1.0 + y2);
    for j in 0..n {
        x[j] += f * xi[j];
    }
    x
}
