//! Expansion of the signed volume of id + w in homogeneous terms,
//!   V_n(id + w) = 1 + sum_{k=1}^{n} t_k,
//! where t_k collects the k-homogeneous part in w. The primary terms are
//! computed from the exact pointwise identity
//!   <u, J(u)> = det(F),  F = sum_i (d_{tau_i} u) tau_i^t + u x^t,
//! so that t_k = fint sigma_k(F - I) and the identity holds to roundoff on
//! any shared quadrature. The per-term integrals in the form
//!   (n/k) fint <w, [sigma_k'(grad_T w P_T^t)]^t x>
//! (forward-mode derivative of the coefficient recurrence) coincide with
//! the primary terms pointwise on the quadrature and are reported alongside
//! as a cross-check.

use crate::sigma::{sigma_all, sigma_all_with_grad};
use functionals::volume;
use sphere_domain::SphereMap;

/// Per-degree terms of the volume expansion of id + w.
#[derive(Debug, Clone)]
pub struct VolumeExpansion {
    /// t_k = fint sigma_k(F - I), k = 1..n. Sums exactly to V_n(id+w) - 1.
    pub terms: Vec<f64>,
    /// Integral forms (n/k) fint <w, [sigma_k'(grad_T w P_T^t)]^t x>;
    /// pointwise equal to `terms` on the shared quadrature.
    pub integral_terms: Vec<f64>,
    /// Sum of `terms`.
    pub sum: f64,
    /// V_n(id + w) computed by the volume functional.
    pub volume: f64,
    /// |volume - 1 - sum| (algebraic identity defect; roundoff-sized).
    pub identity_defect: f64,
}

/// Expand V_n(id + w) for a displacement field w.
pub fn volume_expansion(w: &SphereMap) -> VolumeExpansion {
    let dom = w.domain();
    let n = dom.n();
    let nd = n - 1;
    let u = {
        let mut vals = w.values().to_vec();
        for (k, v) in vals.chunks_mut(n).enumerate() {
            for j in 0..n {
                v[j] += dom.node(k)[j];
            }
        }
        SphereMap::from_values(dom.clone(), vals)
    };
    let gu = u.tangential_gradient();
    let uq = u.quad_values();
    let gw = w.tangential_gradient();
    let wq = w.quad_values();

    let mut terms = vec![0.0; n];
    let mut integral_terms = vec![0.0; n];
    let mut m = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    for q in 0..dom.num_quad() {
        let weight = dom.quad_weight(q);
        let x = dom.quad_point(q);
        // F - I with F = sum_i (d_{tau_i} u) tau_i^t + u x^t.
        m.iter_mut().for_each(|v| *v = 0.0);
        b.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..nd {
            let tau = dom.frame(q, i);
            let cu = &gu[(q * nd + i) * n..(q * nd + i + 1) * n];
            let cw = &gw[(q * nd + i) * n..(q * nd + i + 1) * n];
            for r in 0..n {
                for s in 0..n {
                    m[r * n + s] += cu[r] * tau[s];
                    b[r * n + s] += cw[r] * tau[s];
                }
            }
        }
        for r in 0..n {
            for s in 0..n {
                m[r * n + s] += uq[q * n + r] * x[s];
            }
            m[r * n + r] -= 1.0;
        }
        let sig = sigma_all(&m, n);
        for k in 0..n {
            terms[k] += weight * sig[k];
        }
        let (_, grads) = sigma_all_with_grad(&b, n);
        for k in 0..n {
            // <w, [sigma'_k(B)]^t x> = sum_{r,s} w_r grad_k[r*n+s] x_s
            // (the derivative here is laid out so that the k = 2 term is
            // pointwise equal to <w, A(w)>).
            let mut v = 0.0;
            for r in 0..n {
                for s in 0..n {
                    v += wq[q * n + r] * grads[k][r * n + s] * x[s];
                }
            }
            integral_terms[k] += weight * (n as f64 / (k + 1) as f64) * v;
        }
    }
    let sum: f64 = terms.iter().sum();
    let vol = volume(&u);
    VolumeExpansion {
        terms,
        integral_terms,
        sum,
        volume: vol,
        identity_defect: (vol - 1.0 - sum).abs(),
    }
}
