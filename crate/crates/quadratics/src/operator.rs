//! The first-order operator A, the spherical divergence, and direct
//! quadrature of the second-variation quadratic form
//!   Q_n(w) = n/(2(n-1)) fint |grad_T w|^2
//!          + n(n-3)/(2(n-1)^2) fint (div_S w)^2
//!          - n/2 fint <w, A(w)>,
//! together with its nonlinear companion Q~_n = Q_n + R_n built from the
//! Figalli-Zhang remainder weight N.

use sphere_domain::SphereMap;

/// Spherical divergence at every quadrature point:
/// div_S w = sum_i <tau_i, d_{tau_i} w>.
pub fn spherical_divergence(w: &SphereMap) -> Vec<f64> {
    let dom = w.domain();
    let n = dom.n();
    let nd = n - 1;
    let g = w.tangential_gradient();
    let mut out = vec![0.0; dom.num_quad()];
    for q in 0..dom.num_quad() {
        let mut s = 0.0;
        for i in 0..nd {
            let tau = dom.frame(q, i);
            let col = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            s += tau.iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
        }
        out[q] = s;
    }
    out
}

/// Pointwise evaluation of A(w) = (div_S w) x - sum_j x_j grad_T w^j at the
/// quadrature points (flat layout, num_quad x n). The second sum equals
/// sum_i <x, d_{tau_i} w> tau_i.
pub fn apply_a(w: &SphereMap) -> Vec<f64> {
    let dom = w.domain();
    let n = dom.n();
    let nd = n - 1;
    let g = w.tangential_gradient();
    let mut out = vec![0.0; dom.num_quad() * n];
    for q in 0..dom.num_quad() {
        let x = dom.quad_point(q);
        let mut div = 0.0;
        let mut xdg = [0.0f64; 4];
        for i in 0..nd {
            let tau = dom.frame(q, i);
            let col = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            div += tau.iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
            xdg[i] = x.iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
        }
        for j in 0..n {
            let mut v = div * x[j];
            for i in 0..nd {
                v -= xdg[i] * dom.frame(q, i)[j];
            }
            out[q * n + j] = v;
        }
    }
    out
}

/// fint <w, A(w)> by direct quadrature.
pub fn a_pairing(w: &SphereMap) -> f64 {
    let dom = w.domain();
    let n = dom.n();
    let a = apply_a(w);
    let wq = w.quad_values();
    let mut s = 0.0;
    for q in 0..dom.num_quad() {
        let mut p = 0.0;
        for j in 0..n {
            p += wq[q * n + j] * a[q * n + j];
        }
        s += dom.quad_weight(q) * p;
    }
    s
}

/// Direct quadrature of the quadratic form Q_n. The middle term carries the
/// coefficient n(n-3)/(2(n-1)^2) and is absent for n = 3.
pub fn q_n(w: &SphereMap) -> f64 {
    let dom = w.domain();
    let n = dom.n();
    let nf = n as f64;
    let nd = n - 1;
    let g = w.tangential_gradient();
    let c1 = 0.5 * nf / (nf - 1.0);
    let c2 = nf * (nf - 3.0) / (2.0 * (nf - 1.0) * (nf - 1.0));
    let mut grad2 = 0.0;
    let mut div2 = 0.0;
    for q in 0..dom.num_quad() {
        let wq = dom.quad_weight(q);
        let mut g2 = 0.0;
        let mut div = 0.0;
        for i in 0..nd {
            let tau = dom.frame(q, i);
            let col = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            g2 += col.iter().map(|v| v * v).sum::<f64>();
            div += tau.iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
        }
        grad2 += wq * g2;
        div2 += wq * div * div;
    }
    c1 * grad2 + c2 * div2 - 0.5 * nf * a_pairing(w)
}

/// The weight |N(P_T, grad_T w)|^{n-3} and the radial stretch
/// s = |P_T + grad_T w| - |P_T| at one quadrature point, given
/// f2 = |P_T + grad_T w|^2. |P_T|^2 = n - 1 on the sphere.
fn n_weight_and_stretch(n: usize, f2: f64) -> (f64, f64) {
    let p2 = (n - 1) as f64;
    let s = f2.sqrt() - p2.sqrt();
    let w = if f2 >= p2 { 1.0 } else { (f2 / p2).powf(0.5 * (n as f64 - 2.0)) };
    (w, s)
}

/// Xi_n(w) = n(n-3)/(2(n-1)) fint |N|^{n-3} (|P_T + grad_T w| - |P_T|)^2.
/// Identically zero for n = 3.
pub fn xi_n(w: &SphereMap) -> f64 {
    let dom = w.domain();
    let n = dom.n();
    let nf = n as f64;
    let nd = n - 1;
    if n == 3 {
        return 0.0;
    }
    let g = w.tangential_gradient();
    let c = nf * (nf - 3.0) / (2.0 * (nf - 1.0));
    let mut acc = 0.0;
    for q in 0..dom.num_quad() {
        let mut f2 = 0.0;
        for i in 0..nd {
            let tau = dom.frame(q, i);
            let col = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            f2 += (0..n).map(|j| (tau[j] + col[j]).powi(2)).sum::<f64>();
        }
        let (nw, s) = n_weight_and_stretch(n, f2);
        acc += dom.quad_weight(q) * nw * s * s;
    }
    c * acc
}

/// Q~_n(w) = n/(2(n-1)) fint |grad_T w|^2 - n/2 fint <w, A(w)> + Xi_n(w).
pub fn q_tilde(w: &SphereMap) -> f64 {
    let dom = w.domain();
    let n = dom.n();
    let nf = n as f64;
    let nd = n - 1;
    let g = w.tangential_gradient();
    let c1 = 0.5 * nf / (nf - 1.0);
    let mut grad2 = 0.0;
    for q in 0..dom.num_quad() {
        let mut g2 = 0.0;
        for i in 0..nd {
            let col = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            g2 += col.iter().map(|v| v * v).sum::<f64>();
        }
        grad2 += dom.quad_weight(q) * g2;
    }
    c1 * grad2 - 0.5 * nf * a_pairing(w) + xi_n(w)
}

/// R_n(w) = n(n-3)/(2(n-1)) fint (|N|^{n-3}(|P_T + grad_T w| - |P_T|)^2
///                               - (div_S w)^2/(n-1)),
/// so that Q~_n = Q_n + R_n holds by construction.
pub fn r_n(w: &SphereMap) -> f64 {
    let dom = w.domain();
    let n = dom.n();
    let nf = n as f64;
    let nd = n - 1;
    if n == 3 {
        return 0.0;
    }
    let g = w.tangential_gradient();
    let c = nf * (nf - 3.0) / (2.0 * (nf - 1.0));
    let mut acc = 0.0;
    for q in 0..dom.num_quad() {
        let mut f2 = 0.0;
        let mut div = 0.0;
        for i in 0..nd {
            let tau = dom.frame(q, i);
            let col = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            f2 += (0..n).map(|j| (tau[j] + col[j]).powi(2)).sum::<f64>();
            div += tau.iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
        }
        let (nw, s) = n_weight_and_stretch(n, f2);
        acc += dom.quad_weight(q) * (nw * s * s - div * div / (nf - 1.0));
    }
    c * acc
}
