//! Oracle tests for Mobius arithmetic: fixed points, projections, group
//! laws, Lie algebra sign convention and sampling determinism.

use moebius::{
    algebra_basis, phi_point, sample_random, stereographic, stereographic_inv, MoebiusError,
    MoebiusTransform,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rand_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    moebius::random_unit(rng, n)
}

#[test]
fn identity_dilation_fixes_everything() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = MoebiusTransform::identity(3);
    let mut out = [0.0; 3];
    for _ in 0..50 {
        let x = rand_unit(&mut rng, 3);
        t.apply(&x, &mut out);
        for j in 0..3 {
            assert!((out[j] - x[j]).abs() < 1e-14);
        }
    }
}

#[test]
fn poles_are_fixed_points_of_the_dilation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 3..=5 {
        let xi = rand_unit(&mut rng, n);
        let o = moebius::random_orthogonal(&mut rng, n, false);
        let t = MoebiusTransform::new(o.clone(), xi.clone(), 3.7);
        let mut out = vec![0.0; n];
        t.apply(&xi, &mut out);
        for j in 0..n {
            let oxi: f64 = (0..n).map(|k| o[(j, k)] * xi[k]).sum();
            assert!((out[j] - oxi).abs() < 1e-12);
        }
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        t.apply(&neg, &mut out);
        for j in 0..n {
            let oxi: f64 = (0..n).map(|k| o[(j, k)] * xi[k]).sum();
            assert!((out[j] + oxi).abs() < 1e-12);
        }
    }
}

#[test]
fn apply_preserves_unit_length_without_correction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let xi = rand_unit(&mut rng, 4);
        let lambda = rng.gen_range(0.1..10.0);
        let t = MoebiusTransform::dilation(xi, lambda);
        let x = rand_unit(&mut rng, 4);
        assert!(t.apply_drift(&x) < 1e-10);
    }
}

#[test]
fn stereographic_fixed_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 3..=5 {
        let xi = rand_unit(&mut rng, n);
        // Pole maps to the origin.
        let y = stereographic(&xi, &xi).unwrap();
        assert!(dot(&y, &y).sqrt() < 1e-12);
        // Equator points map to the unit sphere of R^{n-1}.
        let mut v = rand_unit(&mut rng, n);
        let c = dot(&v, &xi);
        for j in 0..n {
            v[j] -= c * xi[j];
        }
        let nm = dot(&v, &v).sqrt();
        for x in v.iter_mut() {
            *x /= nm;
        }
        let y = stereographic(&xi, &v).unwrap();
        assert!((dot(&y, &y).sqrt() - 1.0).abs() < 1e-12);
        // Co-pole is singular.
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        assert!(matches!(stereographic(&xi, &neg), Err(MoebiusError::PoleSingular)));
    }
}

#[test]
fn stereographic_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let n = rng.gen_range(3..=5);
        let xi = rand_unit(&mut rng, n);
        let x = rand_unit(&mut rng, n);
        if let Ok(y) = stereographic(&xi, &x) {
            let back = stereographic_inv(&xi, &y);
            let err: f64 = back.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err < 1e-10, "round trip error {err}");
        }
    }
}

#[test]
fn inversion_conjugates_to_the_reflection() {
    // sigma_xi^{-1} . (y -> y/|y|^2) . sigma_xi equals the reflection
    // across xi^perp: x -> x - 2<x,xi> xi.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let n = rng.gen_range(3..=5);
        let xi = rand_unit(&mut rng, n);
        let x = rand_unit(&mut rng, n);
        let y = match stereographic(&xi, &x) {
            Ok(y) => y,
            Err(_) => continue,
        };
        let y2 = dot(&y, &y);
        if y2 < 1e-12 {
            continue;
        }
        let inv: Vec<f64> = y.iter().map(|v| v / y2).collect();
        let back = stereographic_inv(&xi, &inv);
        let c = dot(&x, &xi);
        for j in 0..n {
            let refl = x[j] - 2.0 * c * xi[j];
            assert!((back[j] - refl).abs() < 1e-10);
        }
    }
}

#[test]
fn dilations_along_one_axis_compose_multiplicatively() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let xi = rand_unit(&mut rng, 3);
    let a = MoebiusTransform::dilation(xi.clone(), 0.7);
    let b = MoebiusTransform::dilation(xi.clone(), 0.5);
    let c = a.compose(&b).unwrap();
    assert!((c.lambda() - 0.35).abs() < 1e-8);
    for j in 0..3 {
        assert!((c.xi()[j] - xi[j]).abs() < 1e-8);
    }
    assert!((c.o() - nalgebra::DMatrix::identity(3, 3)).norm() < 1e-8);
    // lambda > 1 canonicalizes through the antipodal axis.
    let d = MoebiusTransform::dilation(xi.clone(), 2.0);
    let e = MoebiusTransform::dilation(xi.clone(), 3.0);
    let f = d.compose(&e).unwrap();
    assert!((f.lambda() - 1.0 / 6.0).abs() < 1e-8);
    for j in 0..3 {
        assert!((f.xi()[j] + xi[j]).abs() < 1e-8);
    }
}

#[test]
fn canonical_form_with_large_lambda_acts_identically() {
    // phi_{xi,lambda} = phi_{-xi,1/lambda} exactly.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let n = rng.gen_range(3..=5);
        let xi = rand_unit(&mut rng, n);
        let lambda = rng.gen_range(1.0..20.0);
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        let x = rand_unit(&mut rng, n);
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        phi_point(&xi, lambda, &x, &mut a);
        phi_point(&neg, 1.0 / lambda, &x, &mut b);
        for j in 0..n {
            assert!((a[j] - b[j]).abs() < 1e-12);
        }
    }
}

#[test]
fn composition_matches_sequential_application() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..20 {
        let n = 3 + trial % 3;
        let phi = moebius::sample_with(&mut rng, n, (0.25, 4.0), trial % 2 == 0);
        let psi = moebius::sample_with(&mut rng, n, (0.25, 4.0), trial % 3 == 0);
        let comp = phi.compose(&psi).unwrap();
        let mut mid = vec![0.0; n];
        let mut seq = vec![0.0; n];
        let mut direct = vec![0.0; n];
        for _ in 0..100 {
            let x = rand_unit(&mut rng, n);
            psi.apply(&x, &mut mid);
            phi.apply(&mid, &mut seq);
            comp.apply(&x, &mut direct);
            let err: f64 =
                seq.iter().zip(&direct).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err < 1e-8, "composition error {err}");
        }
    }
}

#[test]
fn inverse_composes_to_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..20 {
        let n = 3 + trial % 3;
        let phi = moebius::sample_with(&mut rng, n, (0.2, 5.0), trial % 2 == 1);
        let inv = phi.inverse().unwrap();
        let round = phi.compose(&inv).unwrap();
        assert!((round.lambda() - 1.0).abs() < 1e-8);
        assert!((round.o() - nalgebra::DMatrix::identity(n, n)).norm() < 1e-8);
        let mut mid = vec![0.0; n];
        let mut back = vec![0.0; n];
        let x = rand_unit(&mut rng, n);
        phi.apply(&x, &mut mid);
        inv.apply(&mid, &mut back);
        let err: f64 = back.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-8);
    }
}

#[test]
fn lorentz_round_trip_preserves_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..40 {
        let n = 3 + trial % 3;
        // Keep lambda <= 1 so the canonical form is unique as sampled.
        let phi = moebius::sample_with(&mut rng, n, (0.2, 1.0), false);
        let back = MoebiusTransform::from_lorentz(&phi.to_lorentz()).unwrap();
        assert!((back.lambda() - phi.lambda()).abs() < 1e-9);
        if phi.lambda() < 0.999 {
            for j in 0..n {
                assert!((back.xi()[j] - phi.xi()[j]).abs() < 1e-8);
            }
        }
        assert!((back.o() - phi.o()).norm() < 1e-8);
    }
}

#[test]
fn point_action_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..10 {
        let n = 3 + trial % 3;
        let phi = moebius::sample_with(&mut rng, n, (0.3, 3.0), false);
        let mut pairs = Vec::new();
        let mut y = vec![0.0; n];
        for _ in 0..(n * (n + 1) / 2 + n) {
            let x = rand_unit(&mut rng, n);
            phi.apply(&x, &mut y);
            pairs.push((x, y.clone()));
        }
        let fit = MoebiusTransform::from_point_action(&pairs).unwrap();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for _ in 0..50 {
            let x = rand_unit(&mut rng, n);
            phi.apply(&x, &mut a);
            fit.apply(&x, &mut b);
            let err: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            assert!(err < 1e-7, "recovered action error {err}");
        }
    }
}

#[test]
fn algebra_fields_match_finite_difference_flow() {
    // d/dt|_0 phi_{xi, e^t}(x) equals the mu = +1 dilation field.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let n = rng.gen_range(3..=5);
        let xi = rand_unit(&mut rng, n);
        let x = rand_unit(&mut rng, n);
        let field = moebius::MoebiusAlgebraField::dilation(xi.clone(), 1.0);
        let mut expected = vec![0.0; n];
        field.eval(&x, &mut expected);
        let h: f64 = 1e-5;
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        phi_point(&xi, h.exp(), &x, &mut fp);
        phi_point(&xi, (-h).exp(), &x, &mut fm);
        for j in 0..n {
            let fd = (fp[j] - fm[j]) / (2.0 * h);
            assert!((fd - expected[j]).abs() < 1e-6, "component {j}");
        }
    }
}

#[test]
fn rotation_fields_are_tangent() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for n in 3..=5 {
        for field in algebra_basis(n).iter().take(n * (n - 1) / 2) {
            let mut v = vec![0.0; n];
            for _ in 0..20 {
                let x = rand_unit(&mut rng, n);
                field.eval(&x, &mut v);
                assert!(dot(&v, &x).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn dilation_field_vanishes_at_its_axis() {
    for n in 3..=5 {
        let basis = algebra_basis(n);
        assert_eq!(basis.len(), n * (n + 1) / 2);
        for k in 0..n {
            let field = &basis[n * (n - 1) / 2 + k];
            let mut v = vec![0.0; n];
            field.eval(&field.xi.clone(), &mut v);
            assert!(dot(&v, &v).sqrt() < 1e-14);
        }
    }
}

#[test]
fn algebra_basis_is_linearly_independent() {
    let dom = std::sync::Arc::new(sphere_domain::build_icosphere(2).unwrap());
    let basis = algebra_basis(3);
    let maps: Vec<_> =
        basis.iter().map(|f| moebius::algebra_field(f, dom.clone())).collect();
    let m = maps.len();
    let mut gram = nalgebra::DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = dom.w12_product(maps[i].values(), maps[j].values());
        }
    }
    let eigs = gram.symmetric_eigenvalues();
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eigs.iter().cloned().fold(0.0f64, f64::max);
    assert!(min > 1e-6, "Gram nearly singular: min eig {min}");
    assert!(max / min < 1e4, "Gram badly conditioned");
}

#[test]
fn sampling_is_deterministic_and_uniform() {
    let a = sample_random(3, 42, (0.5, 2.0), false);
    let b = sample_random(3, 42, (0.5, 2.0), false);
    assert_eq!(a.lambda(), b.lambda());
    assert_eq!(a.xi(), b.xi());
    assert!((a.o() - b.o()).norm() == 0.0);
    assert!(!a.is_orientation_reversing());
    let r = sample_random(3, 7, (0.5, 2.0), true);
    assert!(r.is_orientation_reversing());

    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut mean = [0.0; 3];
    let count = 10_000;
    for _ in 0..count {
        let t = moebius::sample_with(&mut rng, 3, (0.5, 2.0), false);
        for j in 0..3 {
            mean[j] += t.xi()[j] / count as f64;
        }
    }
    let nm = dot(&mean, &mean).sqrt();
    assert!(nm < 0.05, "axis mean {nm}");
}

#[test]
fn serialization_round_trip() {
    let t = sample_random(4, 9, (0.3, 3.0), true);
    let j = t.to_json();
    let back = MoebiusTransform::from_json(&j).unwrap();
    assert!((back.lambda() - t.lambda()).abs() < 1e-15);
    assert!((back.o() - t.o()).norm() < 1e-15);
}

#[test]
fn conformal_factor_matches_jacobian_of_projection_chain() {
    // |d phi(x) v| = mu(x) |v| for tangent v, checked by finite differences
    // along a great circle through x.
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..30 {
        let n = rng.gen_range(3..=5);
        let phi = moebius::sample_with(&mut rng, n, (0.3, 3.0), false);
        let x = rand_unit(&mut rng, n);
        let mut v = rand_unit(&mut rng, n);
        let c = dot(&v, &x);
        for j in 0..n {
            v[j] -= c * x[j];
        }
        let nm = dot(&v, &v).sqrt();
        for w in v.iter_mut() {
            *w /= nm;
        }
        let h: f64 = 1e-6;
        let xp: Vec<f64> = (0..n).map(|j| (h.cos()) * x[j] + (h.sin()) * v[j]).collect();
        let xm: Vec<f64> = (0..n).map(|j| (h.cos()) * x[j] - (h.sin()) * v[j]).collect();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        phi.apply(&xp, &mut fp);
        phi.apply(&xm, &mut fm);
        let speed: f64 =
            fp.iter().zip(&fm).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / (2.0 * h);
        let mu = phi.conformal_factor(&x);
        assert!((speed - mu).abs() < 1e-4 * mu, "speed {speed} vs mu {mu}");
    }
}
