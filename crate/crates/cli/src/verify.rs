//! Acceptance verification suite: ten numbered criteria covering equality
//! cases, invariances, degree identification, the stability quadratic form,
//! the volume expansion, Moebius fitting, bubble normalization, the
//! renormalized quadratic limit, and the stationarity residual/flow.

use fitting::{
    bubble_normalize, deficit_flow, fit_moebius, rotation_distance, BubbleConfig, FitConfig,
    FlowConfig, Orientation,
};
use functionals::{deficit, el_residual, local_degree_field, volume};
use moebius::{algebra_basis, algebra_field, random_orthogonal, sample_with, MoebiusTransform};
use quadratics::{
    coercivity_spectrum, kernel_spectrum, q_n, q_tilde, volume_expansion, QuadraticAssembly,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphere_domain::{build_chart_grid, build_icosphere, Domain, SphereMap};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    /// One human-readable pass/fail line.
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} [{}] {} — {} ({:.1} s)",
            self.index,
            if self.passed { "pass" } else { "FAIL" },
            self.name,
            self.details,
            self.seconds
        )
    }
}

const NAMES: [&str; 10] = [
    "deficit vanishes on the symmetry group and is nonnegative",
    "conformal invariance of the energy and deficit",
    "volume counts the topological degree",
    "kernel annihilation and quartic deficit order",
    "coercivity spectrum and kernel dimension",
    "volume expansion identity",
    "fit distance controlled by the deficit",
    "bubble normalization recovers rotations",
    "renormalized form has the quadratic limit",
    "stationarity residual decay and monotone flow",
];

// ------------------------------------------------------------ shared state

fn mesh(level: u32) -> Arc<Domain> {
    static CACHE: OnceLock<[OnceLock<Arc<Domain>>; 6]> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    cache[level as usize].get_or_init(|| Arc::new(build_icosphere(level).unwrap())).clone()
}

fn assembly(level: u32) -> &'static QuadraticAssembly {
    static CACHE: OnceLock<[OnceLock<QuadraticAssembly>; 6]> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    cache[level as usize].get_or_init(|| QuadraticAssembly::assemble(mesh(level)).unwrap())
}

// ---------------------------------------------------------------- corpora

/// Fixed low-degree polynomial perturbation directions.
fn poly_field(phase: usize, x: &[f64]) -> [f64; 3] {
    let (a, b, c) = (x[0], x[1], x[2]);
    match phase % 4 {
        0 => [a * b, c * c, a],
        1 => [b * c, a * a - b * b, a * c],
        2 => [c, a * b + b, b * c - a],
        _ => [a * a, b * b, c * a + b],
    }
}

fn perturbed_identity(dom: &Arc<Domain>, amp: f64, phase: usize) -> SphereMap {
    SphereMap::from_fn(dom.clone(), move |x, out| {
        let f = poly_field(phase, x);
        for j in 0..3 {
            out[j] = x[j] + amp * f[j];
        }
    })
}

/// Random vector field with degree <= 2 polynomial components.
fn smooth_field(dom: &Arc<Domain>, seed: u64) -> Vec<f64> {
    let n = dom.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nm = 1 + n + n * (n + 1) / 2;
    let coef: Vec<f64> = (0..n * nm).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut vals = vec![0.0; dom.num_nodes() * n];
    for k in 0..dom.num_nodes() {
        let x = dom.node(k);
        let mut mons = vec![1.0];
        mons.extend_from_slice(x);
        for a in 0..n {
            for b in a..n {
                mons.push(x[a] * x[b]);
            }
        }
        for j in 0..n {
            vals[k * n + j] = (0..nm).map(|m| coef[j * nm + m] * mons[m]).sum();
        }
    }
    vals
}

fn displaced_identity(dom: &Arc<Domain>, vals: &[f64], t: f64) -> SphereMap {
    let n = dom.n();
    let mut uv = vals.to_vec();
    for (k, c) in uv.chunks_mut(n).enumerate() {
        for j in 0..n {
            c[j] = dom.node(k)[j] + t * c[j];
        }
    }
    SphereMap::from_values(dom.clone(), uv)
}

/// The stereographic power map of degree k on S^2.
fn power_map(dom: &Arc<Domain>, k: i32) -> SphereMap {
    SphereMap::from_fn(dom.clone(), move |x, out| {
        let den = 1.0 + x[2];
        if den < 1e-12 {
            out.copy_from_slice(&if k == 0 { [1.0, 0.0, 0.0] } else { [0.0, 0.0, -1.0] });
            return;
        }
        let (mut re, mut im) = (x[0] / den, x[1] / den);
        if k < 0 {
            im = -im;
        }
        let (mut pr, mut pi) = (1.0, 0.0);
        for _ in 0..k.abs() {
            let nr = pr * re - pi * im;
            pi = pr * im + pi * re;
            pr = nr;
        }
        let y2 = pr * pr + pi * pi;
        out[0] = 2.0 * pr / (1.0 + y2);
        out[1] = 2.0 * pi / (1.0 + y2);
        out[2] = (1.0 - y2) / (1.0 + y2);
    })
}

fn lsq_slope(pts: &[(f64, f64)]) -> f64 {
    let nn = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (nn * sxy - sx * sy) / (nn * sxx - sx * sx)
}

// --------------------------------------------------------------- criteria

fn criterion_1(seed: u64) -> (bool, String) {
    let dom = mesh(4);
    let mut ok = true;
    let e_id = deficit(&SphereMap::identity(dom.clone())).deficit;
    ok &= e_id.abs() <= 5e-3;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_moebius = 0.0f64;
    for i in 0..20 {
        let t = sample_with(&mut rng, 3, (0.5, 2.0), i % 2 == 1);
        let e = deficit(&SphereMap::from_fn(dom.clone(), t.closure())).deficit;
        worst_moebius = worst_moebius.max(e.abs());
    }
    ok &= worst_moebius <= 5e-3;

    let mut min_corpus = f64::INFINITY;
    for i in 0..200usize {
        let amp = 0.01 + 0.3 * i as f64 / 200.0;
        let e = deficit(&perturbed_identity(&dom, amp, i)).deficit;
        min_corpus = min_corpus.min(e);
    }
    ok &= min_corpus >= -3e-3;
    (
        ok,
        format!(
            "|E(id)| {:.1e}, max |E| over 20 group elements {:.1e}, corpus min E {:.1e}",
            e_id.abs(),
            worst_moebius,
            min_corpus
        ),
    )
}

/// Analytic test map: id + amp * polynomial field, composable exactly.
fn analytic_map(dom: &Arc<Domain>, amp: f64, phase: usize) -> SphereMap {
    perturbed_identity(dom, amp, phase)
}

fn analytic_composed(
    dom: &Arc<Domain>,
    amp: f64,
    phase: usize,
    t: &MoebiusTransform,
) -> SphereMap {
    let t = t.clone();
    SphereMap::from_fn(dom.clone(), move |x, out| {
        let mut y = [0.0; 3];
        t.apply(x, &mut y);
        let f = poly_field(phase, &y);
        for j in 0..3 {
            out[j] = y[j] + amp * f[j];
        }
    })
}

fn criterion_2(seed: u64) -> (bool, String) {
    let dom = mesh(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(100));
    let mut ok = true;
    let mut worst_d = 0.0f64;
    let mut worst_e = 0.0f64;
    let transforms: Vec<MoebiusTransform> =
        (0..20).map(|i| sample_with(&mut rng, 3, (0.5, 2.0), i % 3 == 1)).collect();
    for (i, t) in transforms.iter().enumerate() {
        let amp = 0.1 + 0.01 * i as f64;
        let r0 = deficit(&analytic_map(&dom, amp, i));
        let r1 = deficit(&analytic_composed(&dom, amp, i, t));
        let dd = (r1.dirichlet - r0.dirichlet).abs() / r0.dirichlet;
        let de = (r1.deficit - r0.deficit).abs();
        worst_d = worst_d.max(dd);
        worst_e = worst_e.max(de);
    }
    ok &= worst_d <= 0.01 && worst_e <= 0.01;

    // One mesh refinement at least halves the invariance error.
    let coarse = mesh(3);
    let mut sums = [0.0f64; 2];
    for (lvl, d) in [(&coarse, 0), (&dom, 1)] {
        for (i, t) in transforms.iter().take(5).enumerate() {
            let amp = 0.1 + 0.01 * i as f64;
            let r0 = deficit(&analytic_map(lvl, amp, i));
            let r1 = deficit(&analytic_composed(lvl, amp, i, t));
            sums[d] += (r1.dirichlet - r0.dirichlet).abs() / r0.dirichlet;
        }
    }
    let halving = sums[1] <= 0.55 * sums[0];
    ok &= halving;
    (
        ok,
        format!(
            "max rel D drift {:.1e}, max E drift {:.1e}, refinement ratio {:.2}",
            worst_d,
            worst_e,
            sums[1] / sums[0]
        ),
    )
}

fn criterion_3(_seed: u64) -> (bool, String) {
    let dom = mesh(4);
    let mut ok = true;
    let mut worst = 0.0f64;
    for k in -2..=3i32 {
        let v = volume(&power_map(&dom, k));
        worst = worst.max((v - k as f64).abs());
    }
    ok &= worst <= 0.05;

    let id = SphereMap::identity(dom.clone());
    let mut grid = Vec::new();
    for &r in &[0.5, 1.5] {
        for a in 0..3 {
            for s in [-1.0, 1.0] {
                let mut p = vec![0.0; 3];
                p[a] = s * r;
                grid.push(p);
            }
        }
    }
    let field = local_degree_field(&id, &grid);
    let mut correct = 0usize;
    let mut accepted = 0usize;
    for (i, p) in grid.iter().enumerate() {
        if field.flagged[i] {
            continue;
        }
        accepted += 1;
        let inside = p.iter().map(|c| c * c).sum::<f64>() < 1.0;
        if field.degree[i] == if inside { 1 } else { 0 } {
            correct += 1;
        }
    }
    ok &= accepted == grid.len() && correct == accepted;
    (
        ok,
        format!(
            "max |V - k| {:.3} over powers -2..3, local degrees {}/{} correct",
            worst, correct, accepted
        ),
    )
}

fn criterion_4(_seed: u64) -> (bool, String) {
    let dom = mesh(4);
    let mut ok = true;
    // The symmetry-group generators annihilate the second variation.
    let mut worst_q = 0.0f64;
    for b in algebra_basis(3) {
        let w = algebra_field(&b, dom.clone());
        let q = q_n(&w);
        let norm2 = dom.w12_product(w.values(), w.values());
        worst_q = worst_q.max(q.abs() / norm2);
    }
    ok &= worst_q <= 1e-5;

    // Along kernel directions the deficit is quartic (log-log slope >= 2.5);
    // orthogonal to the kernel the error against the quadratic model is of
    // higher order too. Slopes are measured at level 3 where the assembled
    // kernel basis lives.
    let asm = assembly(3);
    let ts = [1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3];
    let mut min_kernel_slope = f64::INFINITY;
    for b in asm.kernel_basis.iter().take(5) {
        let pts: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| {
                let e = deficit(&displaced_identity(&asm.domain, b, t)).deficit;
                (t.ln(), e.abs().max(1e-300).ln())
            })
            .collect();
        min_kernel_slope = min_kernel_slope.min(lsq_slope(&pts));
    }
    ok &= min_kernel_slope >= 2.5;

    let mut min_orth_slope = f64::INFINITY;
    for seed in 0..5u64 {
        let vals = smooth_field(&asm.domain, 100 + seed);
        let (_, rem) = asm.project_kernel(&vals).unwrap();
        let qw = asm.q_value(&rem);
        let pts: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| {
                let e = deficit(&displaced_identity(&asm.domain, &rem, t)).deficit;
                (t.ln(), (e - t * t * qw).abs().max(1e-300).ln())
            })
            .collect();
        min_orth_slope = min_orth_slope.min(lsq_slope(&pts));
    }
    ok &= min_orth_slope >= 2.5;
    (
        ok,
        format!(
            "max |Q|/norm^2 {:.1e} over 6 generators, kernel slope {:.2}, Taylor slope {:.2}",
            worst_q, min_kernel_slope, min_orth_slope
        ),
    )
}

fn criterion_5(_seed: u64) -> (bool, String) {
    let mut ok = true;
    let ks = kernel_spectrum(assembly(3), 10).unwrap();
    let dim = ks.eigenvalues.iter().filter(|&&e| e < 1e-6).count();
    ok &= dim == 6;

    let c3 = coercivity_spectrum(assembly(3), 3).unwrap().eigenvalues[0];
    let c4 = coercivity_spectrum(assembly(4), 3).unwrap().eigenvalues[0];
    ok &= c3 > 0.0 && c4 > 0.0;
    let rel = (c3 - c4).abs() / c4;
    ok &= rel <= 0.2;
    (
        ok,
        format!("kernel dimension {dim}, coercivity {:.4} / {:.4} (rel change {:.1e})", c3, c4, rel),
    )
}

fn criterion_6(seed: u64) -> (bool, String) {
    let dom = mesh(3);
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let vals = smooth_field(&dom, seed.wrapping_add(i));
        let w = SphereMap::from_values(dom.clone(), vals);
        worst = worst.max(volume_expansion(&w).identity_defect);
    }
    (worst <= 1e-8, format!("max expansion defect {:.1e} over 20 fields", worst))
}

fn criterion_7(seed: u64) -> (bool, String) {
    let dom = mesh(3);
    let asm = assembly(3);
    let cfg =
        FitConfig { orientation: Orientation::Preserving, multistarts: 2, ..FitConfig::default() };
    let ts = [0.01, 0.02, 0.05, 0.1];
    let mut ok = true;
    let mut max_ratio = [0.0f64; 2];
    let mut worst_slope = [0.0f64; 2];
    for f in 0..10u64 {
        let vals = smooth_field(&dom, seed.wrapping_add(300 + f));
        let (_, rem) = asm.project_kernel(&vals).unwrap();
        let mut pts = [Vec::new(), Vec::new()];
        for &t in &ts {
            let u = displaced_identity(&dom, &rem, t);
            let fit = fit_moebius(&u, &cfg).unwrap();
            max_ratio[0] = max_ratio[0].max(fit.ratio);
            pts[0].push((t.ln(), fit.ratio.ln()));

            // Sphere-valued variant: radially project and compare the fit
            // distance against the degree-one energy excess D - 1.
            let n = dom.n();
            let mut sv = u.values().to_vec();
            for c in sv.chunks_mut(n) {
                let r = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                for v in c.iter_mut() {
                    *v /= r;
                }
            }
            let us = SphereMap::from_values(dom.clone(), sv);
            let fs = fit_moebius(&us, &cfg).unwrap();
            let excess = functionals::dirichlet_energy(&us) - 1.0;
            let ratio = fs.distance / excess.max(1e-300);
            max_ratio[1] = max_ratio[1].max(ratio);
            pts[1].push((t.ln(), ratio.ln()));
        }
        for v in 0..2 {
            let per_t: Vec<(f64, f64)> = pts[v].clone();
            let slope = lsq_slope(&per_t);
            worst_slope[v] = worst_slope[v].max(slope.abs());
        }
    }
    // Observed desk-scale constants: ~1.0 for the free fit and ~2.9 for the
    // sphere-valued variant; the bounds freeze them with headroom.
    ok &= max_ratio[0] <= 2.0 && max_ratio[1] <= 3.5;
    ok &= worst_slope[0] <= 0.2 && worst_slope[1] <= 0.2;
    (
        ok,
        format!(
            "ratio bounds {:.2} / {:.2} (sphere-valued), worst |log-slope| {:.2} / {:.2}",
            max_ratio[0], max_ratio[1], worst_slope[0], worst_slope[1]
        ),
    )
}

fn criterion_8(seed: u64) -> (bool, String) {
    let dom = mesh(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(5));
    let cfg = BubbleConfig { fraction: Some(0.5), ..BubbleConfig::default() };
    let th: f64 = 0.2;
    let xi = vec![th.sin(), 0.0, th.cos()];
    let mut ok = true;
    let mut dists = Vec::new();
    for lam in [10.0, 100.0] {
        let o = random_orthogonal(&mut rng, 3, false);
        let phi = MoebiusTransform::new(o, xi.clone(), lam);
        let u = SphereMap::from_fn(dom.clone(), phi.closure());
        let b = bubble_normalize(&u, &cfg).unwrap();
        // Nodal data cannot resolve features below the mesh edge; for the
        // strongly concentrated map a second stage on the analytically
        // resampled composition finishes the normalization.
        let (dist, caps, window) = if lam <= 10.0 {
            (rotation_distance(&b.normalized), b.cap_energies.clone(), b.window)
        } else {
            let u2 =
                SphereMap::from_fn(dom.clone(), phi.compose(&b.transform).unwrap().closure());
            let b2 = bubble_normalize(&u2, &cfg).unwrap();
            (rotation_distance(&b2.normalized), b2.cap_energies.clone(), b2.window)
        };
        ok &= dist <= 0.1;
        ok &= caps.iter().all(|&c| c >= window.0 - 1e-9 && c <= window.1 + 1e-9);
        dists.push(dist);
    }
    (
        ok,
        format!(
            "distance to rotations {:.1e} (lambda 10), {:.1e} (lambda 100), caps in window",
            dists[0], dists[1]
        ),
    )
}

fn criterion_9(seed: u64) -> (bool, String) {
    // n = 4 chart backend: the renormalized form divided by t^2 extrapolates
    // to the quadratic form (Richardson in t).
    let dom = Arc::new(build_chart_grid(4, 8).unwrap());
    let mut ok = true;
    let mut worst = 0.0f64;
    for i in 0..5u64 {
        let vals = smooth_field(&dom, seed.wrapping_add(400 + i));
        let w = SphereMap::from_values(dom.clone(), vals.clone());
        let q = q_n(&w);
        let f = |t: f64| {
            let scaled: Vec<f64> = vals.iter().map(|v| t * v).collect();
            q_tilde(&SphereMap::from_values(dom.clone(), scaled)) / (t * t)
        };
        let richardson = (10.0 * f(1e-3) - f(1e-2)) / 9.0;
        let rel = (richardson - q).abs() / q.abs().max(1e-300);
        worst = worst.max(rel);
    }
    ok &= worst <= 0.02;

    // For n = 3 the correction vanishes identically.
    let dom3 = mesh(3);
    let vals = smooth_field(&dom3, seed.wrapping_add(450));
    let w3 = SphereMap::from_values(dom3.clone(), vals);
    let diff = (q_tilde(&w3) - q_n(&w3)).abs();
    ok &= diff <= 1e-12 * q_n(&w3).abs().max(1.0);
    (
        ok,
        format!("worst extrapolation error {:.1e} over 5 fields, n=3 correction {:.1e}", worst, diff),
    )
}

fn criterion_10(seed: u64) -> (bool, String) {
    let mut ok = true;
    let (_, n3) = el_residual(&SphereMap::identity(mesh(3))).unwrap();
    let (_, n4) = el_residual(&SphereMap::identity(mesh(4))).unwrap();
    ok &= n3 / n4 >= 2.0;

    let dom = mesh(3);
    let vals = smooth_field(&dom, seed.wrapping_add(11));
    let u = displaced_identity(&dom, &vals, 0.2);
    let cfg = FlowConfig { steps: 100, ..FlowConfig::default() };
    let r = deficit_flow(&u, &cfg).unwrap();
    let violations = r
        .trajectory
        .windows(2)
        .filter(|w| w[1].deficit > w[0].deficit + cfg.slack)
        .count();
    ok &= violations == 0 && r.steps_taken == 100;
    let e0 = r.trajectory[0].deficit;
    let ef = r.trajectory.last().unwrap().deficit;
    (
        ok,
        format!(
            "residual decay {:.2}x per refinement, flow {:.3e} -> {:.3e} with {} violations",
            n3 / n4,
            e0,
            ef,
            violations
        ),
    )
}

/// Run one criterion (1-based) with timing.
pub fn criterion(index: usize, seed: u64) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, details) = match index {
        1 => criterion_1(seed),
        2 => criterion_2(seed),
        3 => criterion_3(seed),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(seed),
        8 => criterion_8(seed),
        9 => criterion_9(seed),
        10 => criterion_10(seed),
        _ => (false, format!("unknown criterion {index}")),
    };
    CriterionOutcome {
        index,
        name: NAMES.get(index.wrapping_sub(1)).copied().unwrap_or("unknown"),
        passed,
        details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Run the selected criteria (all ten when `selection` is None).
pub fn run(seed: u64, selection: Option<&[usize]>) -> Vec<CriterionOutcome> {
    let all: Vec<usize> = (1..=10).collect();
    let picks = selection.unwrap_or(&all);
    picks.iter().map(|&i| criterion(i, seed)).collect()
}
