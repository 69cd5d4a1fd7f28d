//! Dual stereographic chart backend for general ambient dimension n in 3..=5.
//!
//! Each closed hemisphere is covered by a regular grid on the closed unit
//! ball of R^{n-1} in stereographic coordinates; per-node weight is the cell
//! volume (clipped to the ball) integrated against the conformal density
//! rho(y)^{n-1}, rho(y) = 2/(1+|y|^2). Gradients are finite differences in y
//! scaled by 1/rho, expressed in the pushed-forward orthonormal frame;
//! boundary cells use one-sided differences.

use crate::domain::{BackendKind, ChartData, Domain, DomainError};
use crate::sparse::Csr;
use crate::wedge::wedge;
use std::f64::consts::PI;

/// Exact area of S^{n-1}.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        _ => unreachable!(),
    }
}

fn rho(y: &[f64]) -> f64 {
    let r2: f64 = y.iter().map(|v| v * v).sum();
    2.0 / (1.0 + r2)
}

/// Inverse stereographic projection for chart 0 (pole e_n, projection from
/// -e_n) or chart 1 (pole -e_n, projection from e_n).
fn chart_to_sphere(chart: u8, y: &[f64], x: &mut [f64]) {
    let n = y.len() + 1;
    let r2: f64 = y.iter().map(|v| v * v).sum();
    let den = 1.0 + r2;
    for a in 0..n - 1 {
        x[a] = 2.0 * y[a] / den;
    }
    let last = (1.0 - r2) / den;
    x[n - 1] = if chart == 0 { last } else { -last };
}

/// Jacobian column d x / d y_a of the inverse stereographic projection.
fn chart_jacobian_col(chart: u8, y: &[f64], a: usize, col: &mut [f64]) {
    let n = y.len() + 1;
    let r2: f64 = y.iter().map(|v| v * v).sum();
    let den = 1.0 + r2;
    for b in 0..n - 1 {
        let mut v = -4.0 * y[b] * y[a] / (den * den);
        if b == a {
            v += 2.0 / den;
        }
        col[b] = v;
    }
    let dlast = -4.0 * y[a] / (den * den);
    col[n - 1] = if chart == 0 { dlast } else { -dlast };
}

/// Build the dual chart-grid domain.
pub fn build_chart_grid(n: usize, resolution: u32) -> Result<Domain, DomainError> {
    if !(3..=5).contains(&n) {
        return Err(DomainError::DimensionOutOfRange(n));
    }
    if resolution < 8 {
        return Err(DomainError::ResolutionOutOfRange(resolution));
    }
    let d = n - 1;
    let res = resolution as usize;
    let h = 2.0 / resolution as f64;
    let half_diag = 0.5 * h * (d as f64).sqrt();
    // Sub-sampling density for cell weights: modest inside, fine on cells
    // crossing the ball boundary.
    let k_interior = 3usize;
    let k_boundary = match n {
        3 => 48,
        4 => 10,
        _ => 6,
    };

    let mut nodes: Vec<f64> = Vec::new();
    let mut raw_w: Vec<f64> = Vec::new();
    let mut chart_of: Vec<u8> = Vec::new();
    let mut cell_of: Vec<u32> = Vec::new();
    let grid_size = res.pow(d as u32);
    let mut lookup = [vec![-1i32; grid_size], vec![-1i32; grid_size]];

    let mut y = vec![0.0; d];
    let mut ys = vec![0.0; d];
    let mut x = vec![0.0; n];
    for chart in 0..2u8 {
        let mut idx = vec![0usize; d];
        for flat in 0..grid_size {
            let mut rem = flat;
            for a in 0..d {
                idx[a] = rem % res;
                rem /= res;
            }
            for a in 0..d {
                y[a] = -1.0 + (idx[a] as f64 + 0.5) * h;
            }
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > 1.0 + half_diag {
                continue;
            }
            // Integrate rho^{n-1} over cell /\ ball by midpoint sub-sampling.
            let k = if r + half_diag <= 1.0 { k_interior } else { k_boundary };
            let sub_h = h / k as f64;
            let sub_vol = sub_h.powi(d as i32);
            let mut w = 0.0;
            let sub_count = k.pow(d as u32);
            for sflat in 0..sub_count {
                let mut srem = sflat;
                let mut inside = 0.0;
                for a in 0..d {
                    let sa = srem % k;
                    srem /= k;
                    ys[a] = y[a] - 0.5 * h + (sa as f64 + 0.5) * sub_h;
                    inside += ys[a] * ys[a];
                }
                if inside <= 1.0 {
                    w += rho(&ys).powi(d as i32) * sub_vol;
                }
            }
            if w <= 0.0 {
                continue;
            }
            chart_to_sphere(chart, &y, &mut x);
            lookup[chart as usize][flat] = nodes.len() as i32 / n as i32;
            nodes.extend_from_slice(&x);
            raw_w.push(w);
            chart_of.push(chart);
            cell_of.push(flat as u32);
        }
    }

    let num = raw_w.len();
    let raw_total: f64 = raw_w.iter().sum();
    let raw_weight_ratio = raw_total / sphere_area(n);
    let quad_w: Vec<f64> = raw_w.iter().map(|w| w / raw_total).collect();

    // Frames: normalized Jacobian columns, with the first tangent flipped
    // where needed so that det(tau_1, ..., tau_{n-1}, x) > 0.
    let mut frames = vec![0.0; num * d * n];
    let mut rhos = vec![0.0; num];
    let mut flip = vec![1.0f64; num];
    let mut col = vec![0.0; n];
    let mut cols = vec![0.0; n * d];
    let mut wout = vec![0.0; n];
    for k in 0..num {
        let mut yk = vec![0.0; d];
        let mut rem = cell_of[k] as usize;
        for a in 0..d {
            yk[a] = -1.0 + ((rem % res) as f64 + 0.5) * h;
            rem /= res;
        }
        rhos[k] = rho(&yk);
        for a in 0..d {
            chart_jacobian_col(chart_of[k], &yk, a, &mut col);
            let nm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            for j in 0..n {
                cols[a * n + j] = col[j] / nm;
            }
        }
        wedge(n, &cols, &mut wout);
        let xk = &nodes[k * n..(k + 1) * n];
        let orient: f64 = wout.iter().zip(xk).map(|(a, b)| a * b).sum();
        if orient < 0.0 {
            flip[k] = -1.0;
            for j in 0..n {
                cols[j] = -cols[j];
            }
        }
        frames[k * d * n..(k + 1) * d * n].copy_from_slice(&cols);
    }

    // Stencils: identity values; finite differences along grid axes,
    // divided by rho and carrying the orientation flip on axis 0.
    let mut val_trip: Vec<(u32, u32, f64)> = (0..num).map(|k| (k as u32, k as u32, 1.0)).collect();
    let val_st = Csr::from_triplets(num, num, &mut val_trip);
    let mut grad_st = Vec::with_capacity(d);
    for a in 0..d {
        let stride = res.pow(a as u32);
        let mut trip: Vec<(u32, u32, f64)> = Vec::new();
        for k in 0..num {
            let cell = cell_of[k] as usize;
            let ia = (cell / stride) % res;
            let lk = &lookup[chart_of[k] as usize];
            let prev = if ia > 0 { lk[cell - stride] } else { -1 };
            let next = if ia + 1 < res { lk[cell + stride] } else { -1 };
            let prev2 = if ia > 1 { lk[cell - 2 * stride] } else { -1 };
            let next2 = if ia + 2 < res { lk[cell + 2 * stride] } else { -1 };
            let scale = (if a == 0 { flip[k] } else { 1.0 }) / rhos[k];
            match (prev >= 0, next >= 0) {
                (true, true) if prev2 >= 0 && next2 >= 0 => {
                    // Fourth-order central difference.
                    let c = scale / (12.0 * h);
                    trip.push((k as u32, prev2 as u32, c));
                    trip.push((k as u32, prev as u32, -8.0 * c));
                    trip.push((k as u32, next as u32, 8.0 * c));
                    trip.push((k as u32, next2 as u32, -c));
                }
                (true, true) => {
                    let c = scale / (2.0 * h);
                    trip.push((k as u32, next as u32, c));
                    trip.push((k as u32, prev as u32, -c));
                }
                (false, true) if next2 >= 0 => {
                    // Second-order forward difference.
                    let c = scale / (2.0 * h);
                    trip.push((k as u32, k as u32, -3.0 * c));
                    trip.push((k as u32, next as u32, 4.0 * c));
                    trip.push((k as u32, next2 as u32, -c));
                }
                (true, false) if prev2 >= 0 => {
                    // Second-order backward difference.
                    let c = scale / (2.0 * h);
                    trip.push((k as u32, k as u32, 3.0 * c));
                    trip.push((k as u32, prev as u32, -4.0 * c));
                    trip.push((k as u32, prev2 as u32, c));
                }
                (false, true) => {
                    let c = scale / h;
                    trip.push((k as u32, next as u32, c));
                    trip.push((k as u32, k as u32, -c));
                }
                (true, false) => {
                    let c = scale / h;
                    trip.push((k as u32, k as u32, c));
                    trip.push((k as u32, prev as u32, -c));
                }
                (false, false) => {}
            }
        }
        grad_st.push(Csr::from_triplets(num, num, &mut trip));
    }

    Ok(Domain {
        n,
        backend: BackendKind::Chart { resolution },
        quad_x: nodes.clone(),
        nodes,
        quad_w,
        frames,
        val_st,
        grad_st,
        h,
        mesh: None,
        chart: Some(ChartData {
            resolution,
            chart_of,
            cell_of,
            lookup,
            rho: rhos,
            raw_weight_ratio,
        }),
    })
}

/// Multilinear interpolation of a nodal field at an arbitrary unit point.
pub(crate) fn evaluate(dom: &Domain, values: &[f64], x: &[f64], out: &mut [f64]) {
    let cd = dom.chart.as_ref().unwrap();
    let n = dom.n;
    let d = n - 1;
    let res = cd.resolution as usize;
    let h = 2.0 / cd.resolution as f64;
    let chart: u8 = if x[n - 1] >= 0.0 { 0 } else { 1 };
    let den = 1.0 + if chart == 0 { x[n - 1] } else { -x[n - 1] };
    let mut y = vec![0.0; d];
    for a in 0..d {
        y[a] = x[a] / den;
    }

    let mut base = vec![0usize; d];
    let mut frac = vec![0.0; d];
    for a in 0..d {
        let g = (y[a] + 1.0) / h - 0.5;
        let i = (g.floor() as isize).clamp(0, res as isize - 2) as usize;
        base[a] = i;
        frac[a] = (g - i as f64).clamp(0.0, 1.0);
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut total = 0.0;
    for corner in 0..(1usize << d) {
        let mut flat = 0usize;
        let mut w = 1.0;
        let mut stride = 1usize;
        for a in 0..d {
            let bit = (corner >> a) & 1;
            flat += (base[a] + bit) * stride;
            stride *= res;
            w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
        }
        let node = cd.lookup[chart as usize][flat];
        if node >= 0 && w > 0.0 {
            let k = node as usize;
            for j in 0..n {
                out[j] += w * values[k * n + j];
            }
            total += w;
        }
    }
    if total > 1e-12 {
        for v in out.iter_mut() {
            *v /= total;
        }
    } else {
        // No grid support around the point (deep boundary corner): fall back
        // to the nearest node.
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for k in 0..dom.num_nodes() {
            let nd = dom.node(k);
            let dist: f64 = nd.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if dist < best_d {
                best_d = dist;
                best = k;
            }
        }
        out.copy_from_slice(&values[best * n..(best + 1) * n]);
    }
}
