//! Normalization of a near-identity map to the coercivity frame: find
//! psi in the Moebius group killing the kernel projection of
//! u o psi - mean, then the radial scale lambda = fint <u o psi, x> and the
//! displacement w = (u o psi - mean)/lambda - id.

use crate::fit::mat_exp;
use crate::FittingError;
use functionals::{deficit, VOLUME_FLOOR};
use moebius::{algebra_basis, MoebiusAlgebraField, MoebiusTransform};
use nalgebra::{DMatrix, DVector};
use sphere_domain::{Domain, SphereMap};
use std::sync::Arc;

/// Configuration of the projection normalization.
#[derive(Debug, Clone)]
pub struct NormalizeConfig {
    /// Target on the W^{1,2} norm of the kernel projection.
    pub proj_tol: f64,
    pub max_iters: usize,
    /// Basin guard: admissible deficit of the recentered, rescaled input.
    pub eps_n: f64,
    /// Basin guard: admissible fint |grad_T u - P_T|^{n-1}.
    pub theta_n: f64,
    /// Neighborhood scale reserved for callers composing several guards.
    pub delta_n: f64,
}

impl Default for NormalizeConfig {
    fn default() -> NormalizeConfig {
        NormalizeConfig { proj_tol: 1e-9, max_iters: 40, eps_n: 0.05, theta_n: 0.1, delta_n: 0.1 }
    }
}

/// Result of the normalization.
#[derive(Debug, Clone)]
pub struct NormalizationResult {
    /// The group element with Pi_{n,0}(u o psi - mean) = 0.
    pub psi: MoebiusTransform,
    /// lambda = fint <u o psi, x> of the recentered, rescaled input.
    pub lambda: f64,
    /// w = (u o psi - mean)/lambda - id.
    pub w: SphereMap,
    /// W^{1,2} norm of the final kernel projection.
    pub projection_residual: f64,
}

/// lambda_{u,psi} = fint <u o psi, x>.
pub fn lambda_scale(u: &SphereMap, psi: &MoebiusTransform) -> f64 {
    let dom = u.domain().clone();
    let composed = u.compose(psi.closure());
    radial_mean(&composed, &dom)
}

fn radial_mean(v: &SphereMap, dom: &Arc<Domain>) -> f64 {
    let n = dom.n();
    let vq = v.quad_values();
    let mut s = 0.0;
    for q in 0..dom.num_quad() {
        let x = dom.quad_point(q);
        s += dom.quad_weight(q) * (0..n).map(|j| vq[q * n + j] * x[j]).sum::<f64>();
    }
    s
}

/// Nodal values of an algebra field, with the dilation part centered so the
/// field has zero mean (the kernel of the second variation inside H_n).
fn centered_field_values(field: &MoebiusAlgebraField, dom: &Arc<Domain>) -> Vec<f64> {
    let n = dom.n();
    let shift: Vec<f64> = field.xi.iter().map(|x| field.mu * (n as f64 - 1.0) / n as f64 * x).collect();
    let mut vals = vec![0.0; dom.num_nodes() * n];
    let mut out = vec![0.0; n];
    for k in 0..dom.num_nodes() {
        field.eval(dom.node(k), &mut out);
        for j in 0..n {
            vals[k * n + j] = out[j] + shift[j];
        }
    }
    vals
}

/// W^{1,2}-orthonormal basis of the kernel fields (rotations + centered
/// dilations), by double modified Gram-Schmidt.
pub(crate) fn kernel_basis(dom: &Arc<Domain>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> =
        algebra_basis(dom.n()).iter().map(|f| centered_field_values(f, dom)).collect();
    for _pass in 0..2 {
        for i in 0..basis.len() {
            for j in 0..i {
                let prev = basis[j].clone();
                let ip = dom.w12_product(&basis[i], &prev);
                for (v, p) in basis[i].iter_mut().zip(&prev) {
                    *v -= ip * p;
                }
            }
            let nm = dom.w12_product(&basis[i], &basis[i]).sqrt();
            for v in basis[i].iter_mut() {
                *v /= nm;
            }
        }
    }
    basis
}

/// Lorentz-algebra generator of the a-th algebra basis element: rotations
/// E_ij in the spatial block, then boosts of rapidity -1 along each axis
/// (the generator of phi_{e_k, e^t}).
fn lorentz_generator(n: usize, a: usize) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n + 1, n + 1);
    let nrot = n * (n - 1) / 2;
    if a < nrot {
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                if idx == a {
                    l[(i, j)] = 1.0;
                    l[(j, i)] = -1.0;
                }
                idx += 1;
            }
        }
    } else {
        let k = a - nrot;
        l[(k, n)] = -1.0;
        l[(n, k)] = -1.0;
    }
    l
}

/// exp of a tangent vector theta in algebra coordinates, as a group element.
fn group_exp(n: usize, theta: &[f64]) -> Result<MoebiusTransform, FittingError> {
    let mut l = DMatrix::zeros(n + 1, n + 1);
    for (a, &t) in theta.iter().enumerate() {
        l += t * lorentz_generator(n, a);
    }
    Ok(MoebiusTransform::from_lorentz(&mat_exp(&l))?)
}

/// Kernel-projection coefficients of u o psi - mean in the orthonormal basis.
fn coefficients(
    u: &SphereMap,
    psi: &MoebiusTransform,
    basis: &[Vec<f64>],
    dom: &Arc<Domain>,
) -> Vec<f64> {
    let n = dom.n();
    let composed = u.compose(psi.closure());
    let mean = composed.mean();
    let mut vals = composed.values().to_vec();
    for chunk in vals.chunks_mut(n) {
        for j in 0..n {
            chunk[j] -= mean[j];
        }
    }
    basis.iter().map(|b| dom.w12_product(&vals, b)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Drive the kernel projection of u o psi to zero by a damped Newton
/// iteration on the group parameters; then compute lambda and w.
pub fn normalize_projection(
    u: &SphereMap,
    config: &NormalizeConfig,
) -> Result<NormalizationResult, FittingError> {
    let dom = u.domain().clone();
    let n = dom.n();

    // Recenter and rescale first: the Newton basin and the lambda contract
    // are stated for volume-1, mean-zero inputs.
    let rep = deficit(u);
    if rep.volume.abs() < VOLUME_FLOOR {
        return Err(FittingError::VolumeTooSmall(rep.volume));
    }
    let scale = rep.volume.abs().powf(1.0 / n as f64);
    let neg_mean: Vec<f64> = rep.mean.iter().map(|m| -m / scale).collect();
    let u0 = u.affine(1.0 / scale, &neg_mean);

    // Basin guards.
    let rep0 = deficit(&u0);
    if !(rep0.deficit <= config.eps_n) {
        return Err(FittingError::OutsideBasin(rep0.deficit));
    }
    let gid = SphereMap::identity(dom.clone());
    let g0 = u0.tangential_gradient();
    let gi = gid.tangential_gradient();
    let nd = n - 1;
    let p = 0.5 * (n as f64 - 1.0);
    let mut gdist = 0.0;
    for q in 0..dom.num_quad() {
        let mut d2 = 0.0;
        for e in 0..nd * n {
            let d = g0[q * nd * n + e] - gi[q * nd * n + e];
            d2 += d * d;
        }
        gdist += dom.quad_weight(q) * d2.powf(p);
    }
    if !(gdist <= config.theta_n) {
        return Err(FittingError::OutsideBasin(gdist));
    }

    let basis = kernel_basis(&dom);
    let m = basis.len();
    let mut psi = MoebiusTransform::identity(n);
    let mut f = coefficients(&u0, &psi, &basis, &dom);
    let mut res = norm(&f);
    let initial = res.max(1e-30);
    let mut iterations = 0;
    while res > config.proj_tol && iterations < config.max_iters {
        iterations += 1;
        // Forward-difference Jacobian in the group chart at psi.
        let h = 1e-6;
        let mut jac = DMatrix::zeros(m, m);
        for a in 0..m {
            let mut theta = vec![0.0; m];
            theta[a] = h;
            let step = psi.compose(&group_exp(n, &theta)?)?;
            let fp = coefficients(&u0, &step, &basis, &dom);
            for i in 0..m {
                jac[(i, a)] = (fp[i] - f[i]) / h;
            }
        }
        let rhs = DVector::from_column_slice(&f);
        let delta = jac
            .lu()
            .solve(&rhs)
            .ok_or(FittingError::OutsideBasin(res))?;
        // Damped update: take the largest halving step that reduces ||F||.
        let mut alpha = 1.0;
        let mut advanced = false;
        for _ in 0..12 {
            let theta: Vec<f64> = (0..m).map(|a| -alpha * delta[a]).collect();
            let trial = psi.compose(&group_exp(n, &theta)?)?;
            let ft = coefficients(&u0, &trial, &basis, &dom);
            let rt = norm(&ft);
            if rt < res {
                psi = trial;
                f = ft;
                res = rt;
                advanced = true;
                break;
            }
            alpha *= 0.5;
        }
        if !advanced || res > 10.0 * initial {
            return Err(FittingError::OutsideBasin(res));
        }
    }
    if res > config.proj_tol {
        return Err(FittingError::OutsideBasin(res));
    }

    // lambda and w from the converged psi.
    let composed = u0.compose(psi.closure());
    let mean = composed.mean();
    let lambda = radial_mean(&composed, &dom);
    let mut wv = composed.values().to_vec();
    for (k, chunk) in wv.chunks_mut(n).enumerate() {
        for j in 0..n {
            chunk[j] = (chunk[j] - mean[j]) / lambda - dom.node(k)[j];
        }
    }
    let w = SphereMap::from_values(dom.clone(), wv);
    Ok(NormalizationResult { psi, lambda, w, projection_residual: res })
}
