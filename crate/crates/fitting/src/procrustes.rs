//! Best orthogonal alignment of a map with the identity in the W^{1,2}
//! inner product, used to measure distance-to-rotation of normalized maps.

use nalgebra::DMatrix;
use sphere_domain::SphereMap;

/// The orthogonal matrix R maximizing <u, R id>_{W^{1,2}} (polar factor of
/// the weighted correlation of values and gradients with the identity's).
pub fn procrustes_rotation(u: &SphereMap) -> DMatrix<f64> {
    let dom = u.domain();
    let n = dom.n();
    let nd = n - 1;
    let uq = u.quad_values();
    let g = u.tangential_gradient();
    let mut m: DMatrix<f64> = DMatrix::zeros(n, n);
    for q in 0..dom.num_quad() {
        let w = dom.quad_weight(q);
        let x = dom.quad_point(q);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] += w * uq[q * n + r] * x[c];
            }
        }
        // Gradient correlation: grad(R id) along tau_i is R tau_i.
        for i in 0..nd {
            let tau = dom.frame(q, i);
            for r in 0..n {
                for c in 0..n {
                    m[(r, c)] += w * g[(q * nd + i) * n + r] * tau[c];
                }
            }
        }
    }
    let svd = m.svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// W^{1,2} distance of u to its best orthogonal alignment R id.
pub fn rotation_distance(u: &SphereMap) -> f64 {
    let dom = u.domain();
    let n = dom.n();
    let r = procrustes_rotation(u);
    let mut diff = u.values().to_vec();
    for (k, chunk) in diff.chunks_mut(n).enumerate() {
        let x = dom.node(k);
        for i in 0..n {
            let mut rx = 0.0;
            for j in 0..n {
                rx += r[(i, j)] * x[j];
            }
            chunk[i] -= rx;
        }
    }
    dom.w12_product(&diff, &diff).sqrt()
}
