//! Explicit gradient flow of the deficit on nodal values, with per-step
//! recentering and enforced monotonicity. The nodal gradient is analytic:
//! the Dirichlet part goes through the adjoint of the gradient stencils, the
//! volume part through cofactors of the column matrix [grad u | u].

use crate::FittingError;
use functionals::{deficit, el_residual, EnergyReport, VOLUME_FLOOR};
use sphere_domain::{wedge::det_small, SphereMap};

/// Configuration of the flow.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub steps: usize,
    /// Initial trial step per iteration.
    pub step_size: f64,
    /// Backtracking collapse threshold.
    pub min_step: f64,
    /// Allowed non-monotonicity slack.
    pub slack: f64,
}

impl Default for FlowConfig {
    fn default() -> FlowConfig {
        FlowConfig { steps: 200, step_size: 0.05, min_step: 1e-12, slack: 1e-12 }
    }
}

/// Flow outcome: the deficit trajectory and the final near-minimizer.
#[derive(Debug, Clone)]
pub struct FlowResult {
    /// Energy report after each accepted step (first entry = initial state).
    pub trajectory: Vec<EnergyReport>,
    pub final_map: SphereMap,
    /// Dual-norm of the Euler-Lagrange residual at the final map.
    pub final_residual: f64,
    pub steps_taken: usize,
}

/// Cofactor matrix of a row-major n x n matrix (n <= 5), via signed minors.
fn cofactors(m: &[f64], n: usize, out: &mut [f64]) {
    let mut minor = vec![0.0; (n - 1) * (n - 1)];
    for r in 0..n {
        for c in 0..n {
            let mut idx = 0;
            for i in 0..n {
                if i == r {
                    continue;
                }
                for j in 0..n {
                    if j == c {
                        continue;
                    }
                    minor[idx] = m[i * n + j];
                    idx += 1;
                }
            }
            let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
            out[r * n + c] = sign * det_small(&minor, n - 1);
        }
    }
}

/// Analytic gradient of E_{n-1} with respect to the nodal values.
fn deficit_gradient(u: &SphereMap) -> (Vec<f64>, EnergyReport) {
    let dom = u.domain();
    let n = dom.n();
    let nd = n - 1;
    let rep = deficit(u);
    let g = u.tangential_gradient();
    let uq = u.quad_values();
    let d = rep.dirichlet;
    let v = rep.volume;
    let nf = n as f64;
    let p = 0.5 * (nf - 1.0);
    // dE = a * dD + b * dV for E = D^{n/(n-1)}/|V| - 1.
    let a = nf / (nf - 1.0) * d.powf(1.0 / (nf - 1.0)) / v.abs();
    let b = -v.signum() * d.powf(nf / (nf - 1.0)) / (v * v);

    let mut grad = vec![0.0; dom.num_nodes() * n];
    let mut m = vec![0.0; n * n];
    let mut cof = vec![0.0; n * n];
    for q in 0..dom.num_quad() {
        let w = dom.quad_weight(q);
        let base = q * nd * n;
        // Dirichlet part: d/du (g2/(n-1))^p routed through grad stencils.
        let g2: f64 = g[base..base + nd * n].iter().map(|x| x * x).sum();
        let fac = if g2 > 0.0 {
            w * a * p * (g2 / (nf - 1.0)).powf(p - 1.0) * 2.0 / (nf - 1.0)
        } else {
            0.0
        };
        // Volume part: density = det([d_1 .. d_{n-1} u]) (columns).
        for i in 0..nd {
            for r in 0..n {
                m[r * n + i] = g[base + i * n + r];
            }
        }
        for r in 0..n {
            m[r * n + n - 1] = uq[q * n + r];
        }
        cofactors(&m, n, &mut cof);

        for i in 0..nd {
            let (idx, coef) = dom.grad_stencil(i, q);
            for (s, &node) in idx.iter().enumerate() {
                let c = coef[s];
                let row = node as usize * n;
                for j in 0..n {
                    grad[row + j] += fac * g[base + i * n + j] * c;
                    grad[row + j] += w * b * cof[j * n + i] * c;
                }
            }
        }
        let (idx, coef) = dom.val_stencil(q);
        for (s, &node) in idx.iter().enumerate() {
            let c = coef[s];
            let row = node as usize * n;
            for j in 0..n {
                grad[row + j] += w * b * cof[j * n + n - 1] * c;
            }
        }
    }
    (grad, rep)
}

fn recenter(dom: &std::sync::Arc<sphere_domain::Domain>, vals: &mut [f64]) {
    let n = dom.n();
    let m = SphereMap::from_values(dom.clone(), vals.to_vec());
    let mean = m.mean();
    for chunk in vals.chunks_mut(n) {
        for j in 0..n {
            chunk[j] -= mean[j];
        }
    }
}

/// Run the deficit flow from u0.
pub fn deficit_flow(u0: &SphereMap, config: &FlowConfig) -> Result<FlowResult, FittingError> {
    let dom = u0.domain().clone();
    let rep0 = deficit(u0);
    if rep0.volume.abs() < VOLUME_FLOOR {
        return Err(FittingError::VolumeTooSmall(rep0.volume));
    }
    let mut vals = u0.values().to_vec();
    recenter(&dom, &mut vals);
    let mut u = SphereMap::from_values(dom.clone(), vals);
    let mut trajectory = vec![deficit(&u)];
    let mut steps_taken = 0;
    for step in 0..config.steps {
        let (grad, rep) = deficit_gradient(&u);
        let gnorm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm < 1e-14 {
            break;
        }
        let mut s = config.step_size / gnorm.max(1.0);
        let mut accepted = false;
        while s >= config.min_step {
            let mut vals = u.values().to_vec();
            for (v, g) in vals.iter_mut().zip(&grad) {
                *v -= s * g;
            }
            recenter(&dom, &mut vals);
            let trial = SphereMap::from_values(dom.clone(), vals);
            let rt = deficit(&trial);
            if !rt.deficit_infinite && rt.deficit <= rep.deficit + config.slack {
                u = trial;
                trajectory.push(rt);
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(FittingError::StepCollapse(step));
        }
        steps_taken += 1;
    }
    let final_residual = match el_residual(&u) {
        Ok((_, norm)) => norm,
        Err(_) => f64::NAN,
    };
    Ok(FlowResult { trajectory, final_map: u, final_residual, steps_taken })
}
