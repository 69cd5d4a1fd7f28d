//! Integration tests for the second-variation machinery: the operator A,
//! assembly consistency, kernel projection, spectra, symmetric-polynomial
//! expansions, and the nonlinear lower bounds.

use quadratics::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphere_domain::{build_chart_grid, build_icosphere, Domain, SphereMap};
use std::sync::{Arc, OnceLock};

fn mesh(level: u32) -> Arc<Domain> {
    Arc::new(build_icosphere(level).unwrap())
}

fn asm3() -> &'static QuadraticAssembly {
    static ASM: OnceLock<QuadraticAssembly> = OnceLock::new();
    ASM.get_or_init(|| QuadraticAssembly::assemble(mesh(3)).unwrap())
}

fn asm4() -> &'static QuadraticAssembly {
    static ASM: OnceLock<QuadraticAssembly> = OnceLock::new();
    ASM.get_or_init(|| QuadraticAssembly::assemble(mesh(4)).unwrap())
}

fn chart4() -> Arc<Domain> {
    static DOM: OnceLock<Arc<Domain>> = OnceLock::new();
    DOM.get_or_init(|| Arc::new(build_chart_grid(4, 8).unwrap())).clone()
}

/// Random polynomial field of component degree <= 2 (smooth, exactly
/// integrated by the mesh quadrature).
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

fn random_field(dom: &Arc<Domain>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dom.num_nodes() * dom.n()).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn field_map(dom: &Arc<Domain>, vals: Vec<f64>) -> SphereMap {
    SphereMap::from_values(dom.clone(), vals)
}

fn perturbed_identity(dom: &Arc<Domain>, vals: &[f64], t: f64) -> SphereMap {
    let n = dom.n();
    let mut uv = vals.to_vec();
    for (k, c) in uv.chunks_mut(n).enumerate() {
        for j in 0..n {
            c[j] = dom.node(k)[j] + t * c[j];
        }
    }
    SphereMap::from_values(dom.clone(), uv)
}

fn lsq_slope(pts: &[(f64, f64)]) -> f64 {
    let nn = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (nn * sxy - sx * sy) / (nn * sxx - sx * sx)
}

// ---------------------------------------------------------------- operator

#[test]
fn a_of_identity_field_is_radial() {
    let dom = mesh(2);
    let w = SphereMap::identity(dom.clone());
    let a = apply_a(&w);
    let n = dom.n();
    for q in 0..dom.num_quad() {
        let x = dom.quad_point(q);
        for j in 0..n {
            assert!(
                (a[q * n + j] - (n as f64 - 1.0) * x[j]).abs() < 1e-10,
                "A(id) != (n-1)x at quad point {}",
                q
            );
        }
    }
}

#[test]
fn a_of_constant_field_vanishes() {
    let dom = mesh(2);
    let n = dom.n();
    let mut vals = vec![0.0; dom.num_nodes() * n];
    for c in vals.chunks_mut(n) {
        c.copy_from_slice(&[0.3, -1.1, 0.7]);
    }
    let a = apply_a(&field_map(&dom, vals));
    assert!(a.iter().all(|v| v.abs() < 1e-12), "A(constant) must vanish");
}

#[test]
fn rotation_pairing_assembled_matches_direct() {
    let asm = asm3();
    let dom = &asm.domain;
    let n = dom.n();
    let mut vals = vec![0.0; dom.num_nodes() * n];
    for (k, c) in vals.chunks_mut(n).enumerate() {
        let x = dom.node(k);
        c[0] = x[1];
        c[1] = -x[0];
    }
    let direct = a_pairing(&field_map(dom, vals.clone()));
    // For n = 3 the divergence term is absent, so the pairing can be read
    // off the assembled forms: <w, A w> = (c1 |grad w|^2 - Q(w)) * 2/n.
    let c1 = 0.5 * 3.0 / 2.0;
    let semi = asm.seminorm_gram.bilinear(&vals, &vals);
    let assembled = (c1 * semi - asm.q_value(&vals)) * 2.0 / 3.0;
    assert!(
        (direct - assembled).abs() <= 1e-10 * direct.abs().max(1.0),
        "pairing mismatch: direct {} assembled {}",
        direct,
        assembled
    );
}

// ---------------------------------------------------------------- assembly

#[test]
fn assembly_matches_direct_quadrature_on_random_fields() {
    let asm = asm3();
    let dom = &asm.domain;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..100 {
        let vals = random_field(dom, &mut rng);
        let direct = q_n(&field_map(dom, vals.clone()));
        let mat = asm.q_value(&vals);
        let rel = (direct - mat).abs() / direct.abs().max(1.0);
        assert!(rel <= 1e-10, "field {}: direct {} vs assembled {}", i, direct, mat);
    }
}

#[test]
fn assembled_forms_are_symmetric() {
    let asm = asm3();
    assert!(asm.q_form.asymmetry() <= 1e-10);
    assert!(asm.w12_gram.asymmetry() <= 1e-10);
    assert!(asm.l2_gram.asymmetry() <= 1e-10);
    assert!(asm.seminorm_gram.asymmetry() <= 1e-10);
}

#[test]
fn kernel_basis_is_w12_orthonormal() {
    let asm = asm3();
    let k = asm.kernel_basis.len();
    assert_eq!(k, 6, "mob(S^2) has dimension 6");
    for i in 0..k {
        for j in 0..k {
            let ip = asm.w12_inner(&asm.kernel_basis[i], &asm.kernel_basis[j]);
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((ip - expect).abs() <= 1e-8, "gram[{},{}] = {}", i, j, ip);
        }
    }
}

#[test]
fn kernel_basis_annihilates_the_form() {
    // Form values on the kernel basis are machine zero; the dual norm of
    // the applied covector is bounded by the stencil consistency error and
    // shrinks under refinement (it does not reach 1e-5 at any reachable
    // resolution; see the q-form notes in the crate docs).
    let a3 = asm3();
    let a4 = asm4();
    for b in &a3.kernel_basis {
        assert!(a3.q_value(b).abs() <= 1e-5 * a3.w12_inner(b, b));
        let dual = a3.dual_w12_norm(&a3.q_apply(b)).unwrap();
        assert!(dual <= 0.05, "level-3 kernel dual norm {}", dual);
    }
    let worst3 = a3
        .kernel_basis
        .iter()
        .map(|b| a3.dual_w12_norm(&a3.q_apply(b)).unwrap())
        .fold(0.0f64, f64::max);
    let worst4 = a4
        .kernel_basis
        .iter()
        .map(|b| a4.dual_w12_norm(&a4.q_apply(b)).unwrap())
        .fold(0.0f64, f64::max);
    assert!(worst4 < worst3, "dual norm must decrease under refinement");
}

// --------------------------------------------------------------- projection

#[test]
fn projection_is_identity_on_kernel_fields() {
    let asm = asm3();
    for b in &asm.kernel_basis {
        let (pi, rem) = asm.project_kernel(b).unwrap();
        let diff: Vec<f64> = pi.iter().zip(b.iter()).map(|(a, c)| a - c).collect();
        assert!(asm.w12_norm(&diff) <= 1e-8);
        assert!(asm.w12_norm(&rem) <= 1e-8);
    }
}

#[test]
fn projection_is_idempotent() {
    let asm = asm3();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = random_field(&asm.domain, &mut rng);
    let (pi, _) = asm.project_kernel(&w).unwrap();
    let (pi2, _) = asm.project_kernel(&pi).unwrap();
    let diff: Vec<f64> = pi.iter().zip(pi2.iter()).map(|(a, c)| a - c).collect();
    assert!(asm.w12_norm(&diff) <= 1e-10);
}

#[test]
fn projection_kills_degree_two_radial_harmonic() {
    let asm = asm3();
    let dom = &asm.domain;
    let n = dom.n();
    let mut vals = vec![0.0; dom.num_nodes() * n];
    for (k, c) in vals.chunks_mut(n).enumerate() {
        let x = dom.node(k);
        for j in 0..n {
            c[j] = x[0] * x[1] * x[j];
        }
    }
    let (pi, _) = asm.project_kernel(&vals).unwrap();
    assert!(asm.w12_norm(&pi) <= 1e-3, "projection {}", asm.w12_norm(&pi));
}

#[test]
fn projection_rejects_ill_conditioned_basis() {
    let mut asm = QuadraticAssembly::assemble(mesh(2)).unwrap();
    let dup = asm.kernel_basis[0].clone();
    asm.kernel_basis.push(dup);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = random_field(&asm.domain, &mut rng);
    match asm.project_kernel(&w) {
        Err(QuadraticsError::IllConditionedBasis(_)) => {}
        other => panic!("expected IllConditionedBasis, got {:?}", other.map(|_| ())),
    }
}

// ----------------------------------------------------------------- spectra

#[test]
fn kernel_dimension_is_six() {
    let report = kernel_spectrum(asm3(), 10).unwrap();
    let dim = report.eigenvalues.iter().filter(|&&v| v < 1e-6).count();
    assert_eq!(dim, 6, "eigenvalues {:?}", report.eigenvalues);
    assert!(report.eigenvalues[6] > 0.1);
    assert!((report.eigenvalues[6] - 0.2293).abs() < 0.02);
}

#[test]
fn kernel_rayleigh_quotients_are_small() {
    let asm = asm3();
    for b in &asm.kernel_basis {
        let r = asm.q_value(b).abs() / asm.w12_inner(b, b);
        assert!(r <= 1e-4, "Rayleigh quotient {}", r);
    }
}

#[test]
fn coercivity_positive_and_stable_between_levels() {
    let r3 = coercivity_spectrum(asm3(), 3).unwrap();
    let r4 = coercivity_spectrum(asm4(), 3).unwrap();
    assert!(r3.eigenvalues[0] > 0.0 && r4.eigenvalues[0] > 0.0);
    assert!(r3.residuals.iter().all(|&r| r <= 1e-6));
    assert!(r4.residuals.iter().all(|&r| r <= 1e-6));
    let rel = (r4.eigenvalues[0] - r3.eigenvalues[0]).abs() / r3.eigenvalues[0];
    assert!(rel <= 0.2, "relative change {}", rel);
    // Frozen oracle values of the discrete linear-stability constant.
    assert!((r3.eigenvalues[0] - 0.24856).abs() < 5e-3, "{}", r3.eigenvalues[0]);
    assert!((r4.eigenvalues[0] - 0.24959).abs() < 5e-3, "{}", r4.eigenvalues[0]);
}

#[test]
fn coercivity_positive_for_n4_chart() {
    let report = polynomial_coercivity_spectrum(&chart4(), 3, 3).unwrap();
    assert!(report.eigenvalues[0] > 0.0, "bottom {}", report.eigenvalues[0]);
    assert!((report.eigenvalues[0] - 0.2404).abs() < 0.02);
}

#[test]
fn polynomial_spectrum_reproduces_mesh_constant_for_n3() {
    let dom = Arc::new(build_chart_grid(3, 16).unwrap());
    let report = polynomial_coercivity_spectrum(&dom, 3, 2).unwrap();
    assert!((report.eigenvalues[0] - 0.2497).abs() < 0.01, "{}", report.eigenvalues[0]);
}

#[test]
fn spectrum_request_bounds() {
    assert!(matches!(kernel_spectrum(asm3(), 0), Err(QuadraticsError::TooManyRequested(0))));
    assert!(matches!(
        coercivity_spectrum(asm3(), 21),
        Err(QuadraticsError::TooManyRequested(21))
    ));
}

// ------------------------------------------------------ symmetric polynomials

#[test]
fn sigma_trace_det_and_binomials() {
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sig = sigma_all(&a, n);
    let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
    assert!((sig[0] - tr).abs() <= 1e-12);
    let det = nalgebra::DMatrix::from_row_slice(n, n, &a).determinant();
    assert!((sig[n - 1] - det).abs() <= 1e-10 * det.abs().max(1.0));
    let mut ident = vec![0.0; n * n];
    for i in 0..n {
        ident[i * n + i] = 1.0;
    }
    let sig_i = sigma_all(&ident, n);
    let binom = [4.0, 6.0, 4.0, 1.0];
    for k in 0..n {
        assert!((sig_i[k] - binom[k]).abs() <= 1e-12);
    }
    assert!(matches!(sigma_k(&a, n, 0), Err(QuadraticsError::KOutOfRange { .. })));
    assert!(matches!(sigma_k(&a, n, 5), Err(QuadraticsError::KOutOfRange { .. })));
}

#[test]
fn sigma_gradient_matches_finite_differences() {
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (_, grads) = sigma_all_with_grad(&a, n);
    let h = 1e-6;
    for k in 1..=n {
        for e in 0..n * n {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[e] += h;
            am[e] -= h;
            let fd = (sigma_k(&ap, n, k).unwrap() - sigma_k(&am, n, k).unwrap()) / (2.0 * h);
            assert!(
                (grads[k - 1][e] - fd).abs() <= 1e-6,
                "k {} entry {}: {} vs {}",
                k,
                e,
                grads[k - 1][e],
                fd
            );
        }
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
    #[test]
    fn sigma_matches_characteristic_polynomial(
        entries in proptest::collection::vec(-1.0f64..1.0, 25),
        nsel in 2usize..=5,
    ) {
        // det(tI + A) = sum_k sigma_k(A) t^{n-k} (with sigma_0 = 1).
        let n = nsel;
        let a = &entries[..n * n];
        let sig = sigma_all(a, n);
        for t in [1.0f64, 2.0, 3.0] {
            let mut m = nalgebra::DMatrix::from_row_slice(n, n, a);
            for i in 0..n {
                m[(i, i)] += t;
            }
            let det = m.determinant();
            let mut poly = t.powi(n as i32);
            for (k, s) in sig.iter().enumerate() {
                poly += s * t.powi((n - k - 1) as i32);
            }
            proptest::prop_assert!((det - poly).abs() <= 1e-8 * det.abs().max(1.0));
        }
    }
}

// ---------------------------------------------------------- volume expansion

#[test]
fn volume_expansion_identity_holds_to_roundoff() {
    let dom = mesh(3);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..20 {
        let vals: Vec<f64> =
            (0..dom.num_nodes() * dom.n()).map(|_| 0.5 * rng.gen_range(-1.0..1.0)).collect();
        let exp = volume_expansion(&field_map(&dom, vals));
        assert!(exp.identity_defect <= 1e-8, "field {}: defect {}", i, exp.identity_defect);
    }
}

#[test]
fn expansion_first_and_last_terms() {
    let dom = mesh(3);
    let n = dom.n();
    let vals = smooth_field(&dom, 33);
    let w = field_map(&dom, vals.clone());
    let exp = volume_expansion(&w);
    // t_1 = n fint <w, x>.
    let wq = dom.quad_values(&vals);
    let mut radial = 0.0;
    for q in 0..dom.num_quad() {
        let x = dom.quad_point(q);
        radial += dom.quad_weight(q) * (0..n).map(|j| wq[q * n + j] * x[j]).sum::<f64>();
    }
    assert!((exp.terms[0] - n as f64 * radial).abs() <= 1e-8, "t1 {}", exp.terms[0]);
    assert!((exp.integral_terms[0] - n as f64 * radial).abs() <= 1e-10);
    // t_n = V_n(w).
    let vn = functionals::volume(&w);
    assert!((exp.terms[n - 1] - vn).abs() <= 1e-8, "tn {} vs {}", exp.terms[n - 1], vn);
    assert!((exp.integral_terms[n - 1] - vn).abs() <= 1e-8);
    // Both routes through the expansion agree term by term.
    for k in 0..n {
        assert!(
            (exp.terms[k] - exp.integral_terms[k]).abs() <= 1e-8 * exp.terms[k].abs().max(1.0),
            "k {}: {} vs {}",
            k + 1,
            exp.terms[k],
            exp.integral_terms[k]
        );
    }
}

// ------------------------------------------------------------ Taylor property

#[test]
fn deficit_taylor_matches_q_for_kernel_orthogonal_fields() {
    let asm = asm3();
    let dom = &asm.domain;
    let ts = [1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3];
    for seed in 0..5u64 {
        let vals = smooth_field(dom, 100 + seed);
        let (_, rem) = asm.project_kernel(&vals).unwrap();
        let qw = asm.q_value(&rem);
        let pts: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| {
                let e = functionals::deficit(&perturbed_identity(dom, &rem, t)).deficit;
                (t.ln(), (e - t * t * qw).abs().max(1e-300).ln())
            })
            .collect();
        let slope = lsq_slope(&pts);
        assert!(slope >= 2.5, "seed {}: slope {}", seed, slope);
    }
}

#[test]
fn deficit_degenerates_along_kernel_directions() {
    let asm = asm3();
    let dom = &asm.domain;
    let ts = [1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3];
    for b in asm.kernel_basis.iter().take(5) {
        let pts: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| {
                let e = functionals::deficit(&perturbed_identity(dom, b, t)).deficit;
                (t.ln(), e.abs().max(1e-300).ln())
            })
            .collect();
        let slope = lsq_slope(&pts);
        assert!(slope >= 2.5, "kernel slope {}", slope);
    }
}

// ------------------------------------------------------- Figalli-Zhang bound

#[test]
fn fz_margin_vanishes_for_zero_field() {
    let dom = mesh(2);
    let zero = vec![0.0; dom.num_nodes() * dom.n()];
    let m = fz_lower_expansion(&field_map(&dom, zero), 0.5, 0.3);
    assert!(m.margins.iter().all(|v| v.abs() <= 1e-12));
    assert!(m.min_margin.abs() <= 1e-12);
}

#[test]
fn fz_margin_closed_form_for_n3() {
    // For n = 3 the matrix term carries the coefficient n - 3 = 0 and the
    // inequality collapses to margin = (kappa - c) |grad_T w|^2 pointwise.
    let dom = mesh(2);
    let n = dom.n();
    let nd = n - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let vals = random_field(&dom, &mut rng);
    let w = field_map(&dom, vals);
    let g = w.tangential_gradient();
    let (kappa, c) = (0.35, 0.2);
    let m = fz_lower_expansion(&w, kappa, c);
    for q in 0..dom.num_quad() {
        let y2: f64 = (0..nd)
            .flat_map(|i| g[(q * nd + i) * n..(q * nd + i + 1) * n].iter())
            .map(|v| v * v)
            .sum();
        let expect = (kappa - c) * y2;
        assert!(
            (m.margins[q] - expect).abs() <= 1e-10 * y2.max(1.0),
            "q {}: {} vs {}",
            q,
            m.margins[q],
            expect
        );
    }
}

#[test]
fn fz_bisection_recovers_kappa_for_n3() {
    let dom = mesh(2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let corpus: Vec<SphereMap> =
        (0..5).map(|_| field_map(&dom, random_field(&dom, &mut rng))).collect();
    let c = fz_bisect_constant(&corpus, 0.5, 50);
    assert!((c - 0.5).abs() <= 1e-9, "c(1/2) = {}", c);
}

#[test]
fn fz_bisection_positive_for_n4() {
    let dom = chart4();
    let corpus: Vec<SphereMap> = (0..3)
        .map(|s| {
            let mut vals = smooth_field(&dom, 200 + s);
            vals.iter_mut().for_each(|v| *v *= 0.5);
            field_map(&dom, vals)
        })
        .collect();
    let c = fz_bisect_constant(&corpus, 0.5, 40);
    assert!(c > 0.0, "empirical c(1/2) must be positive, got {}", c);
    let recheck = fz_lower_expansion(&corpus[0], 0.5, 0.5 * c);
    assert!(recheck.min_margin >= 0.0);
}

#[test]
fn fz_integrated_residual_matches_energy_route() {
    let dom = mesh(3);
    let vals = smooth_field(&dom, 55);
    let w = field_map(&dom, vals);
    let m = fz_lower_expansion(&w, 0.4, 0.1);
    let direct = fz_integrated_residual(&w, 0.4, 0.1);
    assert!(
        (m.integrated_residual - direct).abs() <= 1e-8 * direct.abs().max(1.0),
        "{} vs {}",
        m.integrated_residual,
        direct
    );
}

// ----------------------------------------------------------- Q~ and Xi_n

#[test]
fn q_tilde_equals_q_for_n3() {
    let dom = mesh(3);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let w = field_map(&dom, random_field(&dom, &mut rng));
        let a = q_n(&w);
        let b = q_tilde(&w);
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        assert_eq!(r_n(&w), 0.0);
        assert_eq!(xi_n(&w), 0.0);
    }
}

#[test]
fn q_tilde_zero_field() {
    let dom = mesh(2);
    let zero = vec![0.0; dom.num_nodes() * dom.n()];
    assert_eq!(q_tilde(&field_map(&dom, zero)), 0.0);
}

#[test]
fn q_tilde_decomposes_as_q_plus_remainder() {
    let dom = chart4();
    for s in 0..3u64 {
        let w = field_map(&dom, smooth_field(&dom, 300 + s));
        let lhs = q_tilde(&w);
        let rhs = q_n(&w) + r_n(&w);
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{} vs {}", lhs, rhs);
    }
}

#[test]
fn q_tilde_quadratic_limit_recovers_q() {
    let dom = chart4();
    let n = dom.n();
    for s in 0..5u64 {
        let vals = smooth_field(&dom, 400 + s);
        let q = q_n(&field_map(&dom, vals.clone()));
        let f = |t: f64| {
            let scaled: Vec<f64> = vals.iter().map(|v| t * v).collect();
            q_tilde(&field_map(&dom, scaled)) / (t * t)
        };
        // One Richardson step on the two smallest t of {1e-1, 1e-2, 1e-3}
        // (the correction is first order in t).
        let (f2, f3) = (f(1e-2), f(1e-3));
        let extrap = (10.0 * f3 - f2) / 9.0;
        let rel = (extrap - q).abs() / q.abs();
        assert!(rel <= 0.02, "seed {} (n={}): rel {}", s, n, rel);
    }
}

// ------------------------------------------------------------- interpolation

#[test]
fn interpolation_range_is_empty_for_n3() {
    let dom = mesh(2);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let rep = interpolation_bound_check(&field_map(&dom, random_field(&dom, &mut rng)));
    assert!(rep.entries.is_empty());
    assert_eq!(rep.worst_ratio, 0.0);
}

#[test]
fn interpolation_trivial_for_zero_field() {
    let dom = chart4();
    let zero = vec![0.0; dom.num_nodes() * dom.n()];
    let rep = interpolation_bound_check(&field_map(&dom, zero));
    for e in &rep.entries {
        assert_eq!(e.lhs, 0.0);
        assert_eq!(e.rhs, 0.0);
        assert_eq!(e.ratio, 0.0);
    }
}

#[test]
fn interpolation_constant_finite_for_n4_corpus() {
    let dom = chart4();
    let mut worst = 0.0f64;
    for s in 0..5u64 {
        let rep = interpolation_bound_check(&field_map(&dom, smooth_field(&dom, 500 + s)));
        assert_eq!(rep.entries.len(), 1); // k = 3 only for n = 4
        assert_eq!(rep.entries[0].k, 3);
        assert!(rep.entries[0].rhs > 0.0);
        assert!(rep.worst_ratio.is_finite());
        worst = worst.max(rep.worst_ratio);
    }
    assert!(worst.is_finite() && worst < 1e3, "empirical constant {}", worst);
}
