//! Weak-form Euler-Lagrange residual of the deficit functional.
//!
//! A critical point satisfies, for every test field psi,
//!   fint |grad_T u|^{n-3} grad_T u : grad_T psi - H_u fint <J(u), psi> = 0,
//! with H_u = (n-1)^{(n-1)/2} D/V. The residual is assembled against the
//! nodal basis and measured in the dual W^{1,2} norm.

use crate::energy::{deficit, grad_norm2, VOLUME_FLOOR};
use crate::FunctionalError;
use sphere_domain::sparse::{conjugate_gradient, Csr};
use sphere_domain::{jacobian_wedge, Domain, SphereMap};

/// The scalar W^{1,2} Gram matrix on nodal dofs (shared by all components):
/// G[k1,k2] = fint psi_k1 psi_k2 + fint grad psi_k1 . grad psi_k2.
pub fn w12_gram_scalar(dom: &Domain) -> Csr {
    let nn = dom.num_nodes();
    let mut trip: Vec<(u32, u32, f64)> = Vec::new();
    for q in 0..dom.num_quad() {
        let w = dom.quad_weight(q);
        let (vi, vw) = dom.val_stencil(q);
        for (a, &ka) in vi.iter().enumerate() {
            for (b, &kb) in vi.iter().enumerate() {
                trip.push((ka, kb, w * vw[a] * vw[b]));
            }
        }
        for i in 0..dom.n() - 1 {
            let (gi, gw) = dom.grad_stencil(i, q);
            for (a, &ka) in gi.iter().enumerate() {
                for (b, &kb) in gi.iter().enumerate() {
                    trip.push((ka, kb, w * gw[a] * gw[b]));
                }
            }
        }
    }
    Csr::from_triplets(nn, nn, &mut trip)
}

/// The scalar L^2 Gram matrix on nodal dofs.
pub fn l2_gram_scalar(dom: &Domain) -> Csr {
    let nn = dom.num_nodes();
    let mut trip: Vec<(u32, u32, f64)> = Vec::new();
    for q in 0..dom.num_quad() {
        let w = dom.quad_weight(q);
        let (vi, vw) = dom.val_stencil(q);
        for (a, &ka) in vi.iter().enumerate() {
            for (b, &kb) in vi.iter().enumerate() {
                trip.push((ka, kb, w * vw[a] * vw[b]));
            }
        }
    }
    Csr::from_triplets(nn, nn, &mut trip)
}

/// The scalar gradient-seminorm Gram matrix on nodal dofs.
pub fn seminorm_gram_scalar(dom: &Domain) -> Csr {
    let nn = dom.num_nodes();
    let mut trip: Vec<(u32, u32, f64)> = Vec::new();
    for q in 0..dom.num_quad() {
        let w = dom.quad_weight(q);
        for i in 0..dom.n() - 1 {
            let (gi, gw) = dom.grad_stencil(i, q);
            for (a, &ka) in gi.iter().enumerate() {
                for (b, &kb) in gi.iter().enumerate() {
                    trip.push((ka, kb, w * gw[a] * gw[b]));
                }
            }
        }
    }
    Csr::from_triplets(nn, nn, &mut trip)
}

/// Assemble the residual covector r[(k,j)] = r(psi = e_j at node k).
pub fn el_residual_covector(u: &SphereMap, h_u: f64) -> Vec<f64> {
    let dom = u.domain();
    let n = dom.n();
    let nd = n - 1;
    let g = u.tangential_gradient();
    let j = jacobian_wedge(u);
    let mut r = vec![0.0; dom.num_nodes() * n];
    let pw = 0.5 * (n as f64 - 3.0);
    for q in 0..dom.num_quad() {
        let w = dom.quad_weight(q);
        let gfac = if n == 3 { 1.0 } else { grad_norm2(g, q, n).powf(pw) };
        // Gradient part: sum_i |grad u|^{n-3} d_{tau_i} u . d_{tau_i} psi.
        for i in 0..nd {
            let (gi, gw) = dom.grad_stencil(i, q);
            let du = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            for (a, &ka) in gi.iter().enumerate() {
                let c = w * gfac * gw[a];
                let base = ka as usize * n;
                for (jj, &duj) in du.iter().enumerate() {
                    r[base + jj] += c * duj;
                }
            }
        }
        // Curvature part: - H_u <J(u), psi>.
        let (vi, vw) = dom.val_stencil(q);
        for (a, &ka) in vi.iter().enumerate() {
            let c = w * h_u * vw[a];
            let base = ka as usize * n;
            for jj in 0..n {
                r[base + jj] -= c * j[q * n + jj];
            }
        }
    }
    r
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Residual covector and W^{1,2} Gram in the conforming piecewise-linear
/// space on the triangle mesh (n = 3). The conforming pairing makes the
/// discrete integration by parts nearly exact, so the dual norm of the
/// residual at critical points decays faster than O(h).
fn p1_residual_and_gram(u: &SphereMap) -> Result<(Vec<f64>, Csr), FunctionalError> {
    let dom = u.domain();
    let md = dom.mesh_data().expect("mesh backend");
    let nn = dom.num_nodes();
    let nf = dom.num_quad();
    let vals = u.values();

    // Per-face P1 gradient covectors and the P1 energies.
    let mut g_all = vec![[0.0f64; 3]; nf * 3];
    let mut j_all = vec![0.0f64; nf * 3];
    let mut d_tot = 0.0;
    let mut v_tot = 0.0;
    for f in 0..nf {
        let w = dom.quad_weight(f);
        let idx = md.faces[f].map(|k| k as usize);
        let p: Vec<&[f64]> = idx.iter().map(|&k| dom.node(k)).collect();
        let nu = dom.quad_point(f);
        let ab = [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]];
        let ac = [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]];
        let two_a = {
            let cr = cross(&ab, &ac);
            dot(&cr, &cr).sqrt()
        };
        for k in 0..3 {
            let (b, c) = ((k + 1) % 3, (k + 2) % 3);
            let e = [p[c][0] - p[b][0], p[c][1] - p[b][1], p[c][2] - p[b][2]];
            let cx = cross(nu, &e);
            g_all[f * 3 + k] = [cx[0] / two_a, cx[1] / two_a, cx[2] / two_a];
        }
        // Tangential gradient columns along the face frame and the wedge.
        let mut grad2 = 0.0;
        let mut du = [[0.0f64; 3]; 2];
        for i in 0..2 {
            let tau = dom.frame(f, i);
            for k in 0..3 {
                let gt = dot(&g_all[f * 3 + k], tau);
                for j in 0..3 {
                    du[i][j] += gt * vals[idx[k] * 3 + j];
                }
            }
            grad2 += dot(&du[i], &du[i]);
        }
        let jf = cross(&du[0], &du[1]);
        j_all[f * 3..f * 3 + 3].copy_from_slice(&jf);
        d_tot += w * grad2 / 2.0;
        let cen: Vec<f64> = (0..3)
            .map(|j| (vals[idx[0] * 3 + j] + vals[idx[1] * 3 + j] + vals[idx[2] * 3 + j]) / 3.0)
            .collect();
        v_tot += w * dot(&cen, &jf);
    }
    if v_tot.abs() < VOLUME_FLOOR {
        return Err(FunctionalError::VolumeTooSmall(v_tot));
    }
    let h_u = 2.0 * d_tot / v_tot;

    // Residual covector r[(k,j)] = fint grad u : grad psi - H <J, psi> and
    // the scalar P1 W^{1,2} Gram (exact triangle mass + stiffness).
    let mut r = vec![0.0; nn * 3];
    let mut trip: Vec<(u32, u32, f64)> = Vec::new();
    for f in 0..nf {
        let w = dom.quad_weight(f);
        let idx = md.faces[f].map(|k| k as usize);
        let jf = &j_all[f * 3..f * 3 + 3];
        for k in 0..3 {
            let gk = &g_all[f * 3 + k];
            for j in 0..3 {
                // grad u : grad(psi e_j) = <grad of component j of u, g_k>.
                let mut s = 0.0;
                for l in 0..3 {
                    s += vals[idx[l] * 3 + j] * dot(&g_all[f * 3 + l], gk);
                }
                r[idx[k] * 3 + j] += w * (s - h_u / 3.0 * jf[j]);
            }
            for l in 0..3 {
                let mass = if k == l { 1.0 / 6.0 } else { 1.0 / 12.0 };
                let stiff = dot(gk, &g_all[f * 3 + l]);
                trip.push((idx[k] as u32, idx[l] as u32, w * (mass + stiff)));
            }
        }
    }
    Ok((r, Csr::from_triplets(nn, nn, &mut trip)))
}

/// Weak Euler-Lagrange residual: the covector field on nodal dofs and its
/// dual W^{1,2} norm, sqrt(r^T G^{-1} r) computed per component by
/// preconditioned conjugate gradients. Mesh domains use the conforming P1
/// pairing; chart domains use the finite-difference stencils.
pub fn el_residual(u: &SphereMap) -> Result<(Vec<f64>, f64), FunctionalError> {
    let dom = u.domain();
    let n = dom.n();
    let nn = dom.num_nodes();
    let (r, gram) = if dom.mesh_data().is_some() {
        p1_residual_and_gram(u)?
    } else {
        let report = deficit(u);
        if report.volume.abs() < VOLUME_FLOOR {
            return Err(FunctionalError::VolumeTooSmall(report.volume));
        }
        (el_residual_covector(u, report.mean_curvature), w12_gram_scalar(dom))
    };
    let diag = gram.diagonal();
    let mut dual2 = 0.0;
    let mut rhs = vec![0.0; nn];
    let mut z = vec![0.0; nn];
    for j in 0..n {
        for k in 0..nn {
            rhs[k] = r[k * n + j];
        }
        z.iter_mut().for_each(|v| *v = 0.0);
        let res = conjugate_gradient(
            |x, y| gram.matvec(x, y),
            &rhs,
            &mut z,
            Some(&diag),
            1e-10,
            10 * nn,
        );
        if res.relative_residual > 1e-6 {
            return Err(FunctionalError::SolverStalled(res.relative_residual));
        }
        dual2 += rhs.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok((r, dual2.max(0.0).sqrt()))
}
