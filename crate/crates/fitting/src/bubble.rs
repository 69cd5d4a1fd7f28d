//! Bubble normalization: choose a chart pole, scan for the center where a
//! chart ball captures a target share of the conformal energy with the
//! smallest radius, and undo that concentration by the Moebius map
//! phi = sigma^{-1} o T o sigma with T(y) = rho y + q. The normalized map
//! u~ = (u o phi - mean)/V^{1/n} then carries its energy at O(1) scale, with
//! two-sided cap-energy bounds.

use crate::FittingError;
use functionals::{deficit, VOLUME_FLOOR};
use moebius::{random_unit, stereographic, stereographic_inv, MoebiusTransform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sphere_domain::{sphere_area, SphereMap};

/// Configuration of the bubble scan.
#[derive(Debug, Clone)]
pub struct BubbleConfig {
    /// Covering count: the target energy share is 1/(k+1) of the total.
    pub k: usize,
    /// Optional override of the target share (must lie in (0, 1/2]).
    pub fraction: Option<f64>,
    /// Coarse-to-fine rounds of the center scan.
    pub scan_rounds: usize,
    /// Radial samples of the log-polar ball quadrature.
    pub radial_samples: usize,
    /// Direction samples of the ball quadrature.
    pub direction_samples: usize,
    /// Total chart energy below this is degenerate.
    pub energy_floor: f64,
    /// Number of probed cap levels s in [-r0, 0].
    pub cap_probes: usize,
}

impl Default for BubbleConfig {
    fn default() -> BubbleConfig {
        BubbleConfig {
            k: 7,
            fraction: None,
            scan_rounds: 8,
            radial_samples: 160,
            direction_samples: 48,
            energy_floor: 1e-8,
            cap_probes: 5,
        }
    }
}

/// Result of the normalization.
#[derive(Debug, Clone)]
pub struct BubbleResult {
    /// Chart pole (projection is from its antipode).
    pub pole: Vec<f64>,
    /// Selected chart center q.
    pub center: Vec<f64>,
    /// Selected chart radius rho.
    pub radius: f64,
    pub k: usize,
    /// The target share of the total energy actually used.
    pub fraction: f64,
    /// phi = sigma^{-1} o T o sigma as a group element.
    pub transform: MoebiusTransform,
    /// u~ = (u o phi - mean)/V^{1/n}.
    pub normalized: SphereMap,
    /// Total chart energy of the volume-normalized input (= nw_n D).
    pub total_energy: f64,
    /// Probed cap levels s in [-r0, 0] (r0 = 3/5 for the rho0 = 2 covering).
    pub cap_s: Vec<f64>,
    /// Unnormalized cap energies of u~ over {<x, pole> >= s}.
    pub cap_energies: Vec<f64>,
    /// Two-sided window [tot/(k+1), tot k/(k+1)] against which the caps are
    /// validated, with tot the total energy of u~.
    pub window: (f64, f64),
}

/// Chart energy density of the map at chart point y (pole `pole`):
/// (|grad_y v|^2/(n-1))^{(n-1)/2} with v = u o sigma^{-1}, by central
/// finite differences of the evaluated map.
fn chart_density(u: &SphereMap, pole: &[f64], y: &[f64], scale: f64) -> f64 {
    let n = pole.len();
    let d = n - 1;
    let h = 1e-6 * (1.0 + y.iter().map(|v| v * v).sum::<f64>().sqrt());
    let mut g2 = 0.0;
    let mut yp = y.to_vec();
    let mut up = vec![0.0; n];
    let mut um = vec![0.0; n];
    for a in 0..d {
        yp[a] = y[a] + h;
        u.evaluate(&stereographic_inv(pole, &yp), &mut up);
        yp[a] = y[a] - h;
        u.evaluate(&stereographic_inv(pole, &yp), &mut um);
        yp[a] = y[a];
        for j in 0..n {
            let der = scale * (up[j] - um[j]) / (2.0 * h);
            g2 += der * der;
        }
    }
    (g2 / d as f64).powf(0.5 * (d as f64))
}

/// Deterministic direction set on S^{d-1} for the ball quadrature.
fn directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    if d == 2 {
        (0..count)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b0b);
        (0..count).map(|_| random_unit(&mut rng, d)).collect()
    }
}

/// Energy of the chart map in the ball B_r(q), by log-polar quadrature
/// (geometric radii resolve concentrated bubbles).
fn ball_energy(
    u: &SphereMap,
    pole: &[f64],
    scale: f64,
    q: &[f64],
    r: f64,
    dirs: &[Vec<f64>],
    nr: usize,
) -> f64 {
    let d = q.len();
    let surface = sphere_area(d); // |S^{d-1}|
    let r_lo: f64 = r * 1e-5;
    let ratio = (r / r_lo).powf(1.0 / (nr - 1) as f64);
    let mut mean_prev = 0.0;
    let mut r_prev = 0.0f64;
    let mut total = 0.0;
    let mut y = vec![0.0; d];
    let mut rr = r_lo;
    for step in 0..nr {
        let mut mean = 0.0;
        for dir in dirs {
            for a in 0..d {
                y[a] = q[a] + rr * dir[a];
            }
            mean += chart_density(u, pole, &y, scale);
        }
        mean /= dirs.len() as f64;
        if step == 0 {
            // Core ball: constant-density estimate.
            total += mean * surface / d as f64 * rr.powi(d as i32);
        } else {
            // Trapezoid in r of surface * r^{d-1} * mean.
            let f0 = surface * r_prev.powi((d - 1) as i32) * mean_prev;
            let f1 = surface * rr.powi((d - 1) as i32) * mean;
            total += 0.5 * (f0 + f1) * (rr - r_prev);
        }
        mean_prev = mean;
        r_prev = rr;
        rr *= ratio;
    }
    total
}

/// Geometric bisection of rho in [1e-3, 1e3] so the ball energy hits target.
fn bisect_rho(
    u: &SphereMap,
    pole: &[f64],
    scale: f64,
    q: &[f64],
    target: f64,
    dirs: &[Vec<f64>],
    nr: usize,
) -> f64 {
    let (mut lo, mut hi) = (1e-3f64, 1e3f64);
    for _ in 0..34 {
        let mid = (lo * hi).sqrt();
        if ball_energy(u, pole, scale, q, mid, dirs, nr) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Total chart energy = |S^{n-1}| * D_{n-1} of the volume-normalized map
/// (conformal invariance of the energy under the chart).
fn total_energy(u: &SphereMap, scale: f64) -> f64 {
    let dom = u.domain();
    let n = dom.n();
    let nd = n - 1;
    let g = u.tangential_gradient();
    let p = 0.5 * (nd as f64);
    let mut s = 0.0;
    for q in 0..dom.num_quad() {
        let g2: f64 =
            g[q * nd * n..(q + 1) * nd * n].iter().map(|v| v * v).sum::<f64>() * scale * scale;
        s += dom.quad_weight(q) * (g2 / nd as f64).powf(p);
    }
    s * sphere_area(n)
}

/// Normalize a bubble-concentrated map.
pub fn bubble_normalize(u: &SphereMap, config: &BubbleConfig) -> Result<BubbleResult, FittingError> {
    let dom = u.domain().clone();
    let n = dom.n();
    let d = n - 1;
    let rep = deficit(u);
    if rep.volume < VOLUME_FLOOR {
        return Err(FittingError::VolumeTooSmall(rep.volume));
    }
    // Work with the volume-normalized map mu*u via a gradient scale factor.
    let mu = rep.volume.powf(-1.0 / n as f64);
    let tot = total_energy(u, mu);
    if tot < config.energy_floor {
        return Err(FittingError::DegenerateEnergy(tot));
    }
    let fraction = config.fraction.unwrap_or(1.0 / (config.k + 1) as f64);
    assert!(fraction > 0.0 && fraction <= 0.5, "fraction must lie in (0, 1/2]");
    let target = fraction * tot;

    // Pole: coordinate direction nearest the energy maximum, so the bubble
    // sits near the chart origin and far from the projection singularity.
    let g = u.tangential_gradient();
    let nd = n - 1;
    let mut best_q = 0;
    let mut best_g2 = -1.0;
    for q in 0..dom.num_quad() {
        let g2: f64 = g[q * nd * n..(q + 1) * nd * n].iter().map(|v| v * v).sum();
        if g2 > best_g2 {
            best_g2 = g2;
            best_q = q;
        }
    }
    let xmax = dom.quad_point(best_q).to_vec();
    let mut pole = vec![0.0; n];
    let axis = (0..n).max_by(|&a, &b| xmax[a].abs().partial_cmp(&xmax[b].abs()).unwrap()).unwrap();
    pole[axis] = xmax[axis].signum();

    // Center scan, coarse to fine, seeded at the chart image of the maximum.
    // Scan rounds run on a reduced quadrature; the radius at the selected
    // center is then refined on the full quadrature.
    let dirs = directions(d, config.direction_samples);
    let nr = config.radial_samples;
    let dirs_scan = directions(d, (config.direction_samples / 2).max(12));
    let nr_scan = (nr / 2).max(40);
    let mut center = stereographic(&pole, &xmax).unwrap_or_else(|_| vec![0.0; d]);
    let mut window = 2.0f64;
    let span: i64 = if d == 2 { 2 } else { 1 };
    for _round in 0..config.scan_rounds {
        let mut cand: Vec<(f64, f64, Vec<f64>)> = Vec::new();
        let side = (2 * span + 1) as usize;
        let count = side.pow(d as u32);
        for flat in 0..count {
            let mut q = center.clone();
            let mut rem = flat;
            for a in 0..d {
                let off = (rem % side) as i64 - span;
                rem /= side;
                q[a] += off as f64 * window / (2.0 * span as f64);
            }
            let rho = bisect_rho(u, &pole, mu, &q, target, &dirs_scan, nr_scan);
            let qnorm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            cand.push((rho, qnorm, q));
        }
        cand.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
        center = cand[0].2.clone();
        window /= 3.0;
    }
    let radius = bisect_rho(u, &pole, mu, &center, target, &dirs, nr);

    // phi = sigma^{-1} o T o sigma, both as a point map and a group element.
    let (p2, q2, r2) = (pole.clone(), center.clone(), radius);
    let phi_map = move |x: &[f64], out: &mut [f64]| {
        let mut y = match stereographic(&p2, x) {
            Ok(y) => y,
            // The co-pole maps to itself under any chart-affine map.
            Err(_) => {
                for (o, p) in out.iter_mut().zip(&p2) {
                    *o = -p;
                }
                return;
            }
        };
        for (a, ya) in y.iter_mut().enumerate() {
            *ya = r2 * *ya + q2[a];
        }
        out.copy_from_slice(&stereographic_inv(&p2, &y));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0b1);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..8 * (n + 1))
        .map(|_| {
            let x = random_unit(&mut rng, n);
            let mut fx = vec![0.0; n];
            phi_map(&x, &mut fx);
            (x, fx)
        })
        .collect();
    let transform = MoebiusTransform::from_point_action(&pairs)?;

    // u~ = (u o phi - mean)/V^{1/n}.
    let composed = u.compose(phi_map);
    let mean = composed.mean();
    let neg: Vec<f64> = mean.iter().map(|m| -m * mu).collect();
    let normalized = composed.affine(mu, &neg);

    // Cap energies of u~ over {<x, pole> >= s}, s in [-r0, 0], r0 = 3/5
    // (the rho0 = 2 covering radius of the unit-ball cover).
    let r0 = 3.0 / 5.0;
    let gn = normalized.tangential_gradient();
    let area = sphere_area(n);
    let tot_norm = total_energy(&normalized, 1.0);
    let probes = config.cap_probes.max(2);
    let cap_s: Vec<f64> = (0..probes).map(|i| -r0 + r0 * i as f64 / (probes - 1) as f64).collect();
    let mut cap_energies = vec![0.0; probes];
    let p = 0.5 * (nd as f64);
    for q in 0..dom.num_quad() {
        let x = dom.quad_point(q);
        let xn: f64 = (0..n).map(|j| x[j] * pole[j]).sum();
        let g2: f64 = gn[q * nd * n..(q + 1) * nd * n].iter().map(|v| v * v).sum();
        let dens = dom.quad_weight(q) * (g2 / nd as f64).powf(p) * area;
        for (i, &s) in cap_s.iter().enumerate() {
            if xn >= s {
                cap_energies[i] += dens;
            }
        }
    }
    let kf = config.k as f64;
    let window_bounds = (tot_norm / (kf + 1.0), tot_norm * kf / (kf + 1.0));

    Ok(BubbleResult {
        pole,
        center,
        radius,
        k: config.k,
        fraction,
        transform,
        normalized,
        total_energy: tot,
        cap_s,
        cap_energies,
        window: window_bounds,
    })
}
