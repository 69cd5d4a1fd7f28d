//! The conformal (n-1)-Dirichlet energy, the extrinsic volume, and the
//! combined conformal-isoperimetric deficit.

use serde::Serialize;
use sphere_domain::{jacobian_wedge, SphereMap};

/// |V| below this is treated as vanishing volume (deficit flagged +inf).
pub const VOLUME_FLOOR: f64 = 1e-6;

/// Report of the core functionals of one map.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    /// D_{n-1}(u) = fint (|grad_T u|^2/(n-1))^{(n-1)/2}.
    pub dirichlet: f64,
    /// V_n(u) = fint <u, J(u)> (signed).
    pub volume: f64,
    /// E_{n-1}(u) = D^{n/(n-1)}/|V| - 1; +inf when |V| < VOLUME_FLOOR.
    pub deficit: f64,
    /// Set when |V| < VOLUME_FLOOR and deficit is +inf.
    pub deficit_infinite: bool,
    /// Mean value fint u.
    pub mean: Vec<f64>,
    /// H_u = (n-1)^{(n-1)/2} D/V, the constant mean curvature scalar of the
    /// Euler-Lagrange system (meaningful when V > 0).
    pub mean_curvature: f64,
}

/// Squared Frobenius norm of the tangential gradient at quadrature point q.
pub(crate) fn grad_norm2(g: &[f64], q: usize, n: usize) -> f64 {
    let len = (n - 1) * n;
    g[q * len..(q + 1) * len].iter().map(|v| v * v).sum()
}

/// D_{n-1}(u) = fint (|grad_T u|^2/(n-1))^{(n-1)/2}.
pub fn dirichlet_energy(u: &SphereMap) -> f64 {
    let dom = u.domain();
    let n = dom.n();
    let g = u.tangential_gradient();
    let p = 0.5 * (n as f64 - 1.0);
    let mut s = 0.0;
    for q in 0..dom.num_quad() {
        s += dom.quad_weight(q) * (grad_norm2(g, q, n) / (n as f64 - 1.0)).powf(p);
    }
    s
}

/// V_n(u) = fint <u, J(u)>.
pub fn volume(u: &SphereMap) -> f64 {
    let dom = u.domain();
    let j = jacobian_wedge(u);
    dom.fint_dot(u.quad_values(), &j)
}

/// Full energy report.
pub fn deficit(u: &SphereMap) -> EnergyReport {
    let n = u.n() as f64;
    let d = dirichlet_energy(u);
    let v = volume(u);
    let infinite = v.abs() < VOLUME_FLOOR;
    let e = if infinite { f64::INFINITY } else { d.powf(n / (n - 1.0)) / v.abs() - 1.0 };
    let h = if infinite { f64::NAN } else { (n - 1.0).powf(0.5 * (n - 1.0)) * d / v };
    EnergyReport {
        dirichlet: d,
        volume: v,
        deficit: e,
        deficit_infinite: infinite,
        mean: u.mean(),
        mean_curvature: h,
    }
}

/// Pointwise Frobenius norm of (grad u)^t grad u - (|grad u|^2/(n-1)) I,
/// one value per quadrature point; zero exactly where u is conformal.
pub fn conformality_defect(u: &SphereMap) -> Vec<f64> {
    let dom = u.domain();
    let n = dom.n();
    let nd = n - 1;
    let g = u.tangential_gradient();
    let mut out = vec![0.0; dom.num_quad()];
    for q in 0..dom.num_quad() {
        let base = q * nd * n;
        let tr = grad_norm2(g, q, n) / nd as f64;
        let mut f2 = 0.0;
        for a in 0..nd {
            for b in 0..nd {
                let mut e = 0.0;
                for j in 0..n {
                    e += g[base + a * n + j] * g[base + b * n + j];
                }
                if a == b {
                    e -= tr;
                }
                f2 += e * e;
            }
        }
        out[q] = f2.max(0.0).sqrt();
    }
    out
}

/// Composition with the target reflection that negates the last component;
/// flips the sign of the volume while leaving the Dirichlet energy unchanged.
pub fn flip(u: &SphereMap) -> SphereMap {
    let n = u.n();
    let mut values = u.values().to_vec();
    for k in 0..values.len() / n {
        values[k * n + n - 1] = -values[k * n + n - 1];
    }
    let mut m = SphereMap::from_values(u.domain().clone(), values);
    if let Some(src) = u.source().cloned() {
        m = SphereMap::from_fn(u.domain().clone(), move |x, out| {
            src(x, out);
            let last = out.len() - 1;
            out[last] = -out[last];
        });
    }
    m
}

/// Pointwise slack of the Hadamard bound
/// |J(u)| <= (|grad_T u|^2/(n-1))^{(n-1)/2}, per quadrature point (>= 0 up
/// to rounding).
pub fn hadamard_slack(u: &SphereMap) -> Vec<f64> {
    let dom = u.domain();
    let n = dom.n();
    let g = u.tangential_gradient();
    let j = jacobian_wedge(u);
    let p = 0.5 * (n as f64 - 1.0);
    (0..dom.num_quad())
        .map(|q| {
            let bound = (grad_norm2(g, q, n) / (n as f64 - 1.0)).powf(p);
            let jn: f64 = j[q * n..(q + 1) * n].iter().map(|v| v * v).sum::<f64>().sqrt();
            bound - jn
        })
        .collect()
}
