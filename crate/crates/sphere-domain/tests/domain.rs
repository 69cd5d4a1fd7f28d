//! Oracle tests for the sphere discretizations: combinatorics, quadrature
//! exactness, frame geometry, differentiation accuracy and serialization.

use sphere_domain::{
    build_chart_grid, build_icosphere, jacobian_wedge, BackendKind, Domain, SphereMap,
};
use std::sync::{Arc, OnceLock};

fn mesh(level: u32) -> Arc<Domain> {
    static CACHE: OnceLock<[OnceLock<Arc<Domain>>; 6]> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    cache[level as usize]
        .get_or_init(|| Arc::new(build_icosphere(level).unwrap()))
        .clone()
}

fn chart(n: usize, res: u32) -> Arc<Domain> {
    Arc::new(build_chart_grid(n, res).unwrap())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn icosphere_combinatorics() {
    let d0 = mesh(0);
    assert_eq!(d0.num_nodes(), 12);
    assert_eq!(d0.num_quad(), 20);
    let d2 = mesh(2);
    assert_eq!(d2.num_nodes(), 162);
    assert_eq!(d2.num_quad(), 320);
    assert!(matches!(d2.backend(), BackendKind::Mesh { subdivision_level: 2 }));
    assert!(build_icosphere(9).is_err());
}

#[test]
fn quadrature_weights_normalized() {
    for dom in [mesh(0), mesh(3), chart(3, 16), chart(4, 10)] {
        let s: f64 = dom.quad_weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-12, "weight sum {s}");
        assert!(dom.quad_weights().iter().all(|&w| w > 0.0));
    }
}

#[test]
fn chart_grid_contracts() {
    assert!(build_chart_grid(2, 16).is_err());
    assert!(build_chart_grid(6, 16).is_err());
    assert!(build_chart_grid(3, 4).is_err());
    let dom = chart(3, 24);
    let cd = dom.chart_data().unwrap();
    // Raw weights must reproduce the sphere area to 1e-3 before
    // normalization.
    assert!(
        (cd.raw_weight_ratio - 1.0).abs() < 1e-3,
        "raw weight ratio {}",
        cd.raw_weight_ratio
    );
    // Conformal factor: 2 at the chart center, 1 at the equator, and always
    // consistent with the node position.
    let mut max_rho: f64 = 0.0;
    let mut min_rho = f64::INFINITY;
    for k in 0..dom.num_nodes() {
        let x = dom.node(k);
        let den = 1.0 + if cd.chart_of[k] == 0 { x[2] } else { -x[2] };
        let y2 = (x[0] * x[0] + x[1] * x[1]) / (den * den);
        let expected = 2.0 / (1.0 + y2);
        assert!((cd.rho[k] - expected).abs() < 1e-12);
        max_rho = max_rho.max(cd.rho[k]);
        min_rho = min_rho.min(cd.rho[k]);
    }
    assert!(max_rho <= 2.0 + 1e-12 && max_rho > 2.0 - 0.02);
    // Boundary cells may sit up to half a cell diagonal past |y| = 1.
    assert!(min_rho >= 0.9 && min_rho < 1.0 + 0.02);
}

#[test]
fn nodes_and_quad_points_are_unit() {
    for dom in [mesh(2), chart(3, 16), chart(5, 8)] {
        for k in 0..dom.num_nodes() {
            let r = dot(dom.node(k), dom.node(k)).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
        for q in 0..dom.num_quad() {
            let r = dot(dom.quad_point(q), dom.quad_point(q)).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn frames_are_orthonormal_tangent_positive() {
    for dom in [mesh(2), chart(3, 16), chart(4, 10), chart(5, 8)] {
        let n = dom.n();
        let mut cols = vec![0.0; (n - 1) * n];
        let mut w = vec![0.0; n];
        for q in 0..dom.num_quad() {
            let x = dom.quad_point(q);
            for i in 0..n - 1 {
                let ti = dom.frame(q, i);
                assert!((dot(ti, ti) - 1.0).abs() < 1e-10);
                assert!(dot(ti, x).abs() < 1e-10, "tangency at q={q}");
                for j in 0..i {
                    assert!(dot(ti, dom.frame(q, j)).abs() < 1e-10);
                }
                cols[i * n..(i + 1) * n].copy_from_slice(ti);
            }
            sphere_domain::wedge::wedge(n, &cols, &mut w);
            assert!(dot(&w, x) > 0.9, "orientation at q={q}");
        }
    }
}

#[test]
fn gradient_of_constant_vanishes_and_identity_is_exact_on_mesh() {
    let dom = mesh(3);
    let n = dom.n();
    let cst = vec![1.0; dom.num_nodes() * n];
    let g = dom.tangential_gradient(&cst);
    assert!(g.iter().all(|v| v.abs() < 1e-10));

    // id has |grad_T id|^2 = n-1 exactly at every quadrature point.
    let g = dom.tangential_gradient(dom.nodes_flat());
    let nd = n - 1;
    for q in 0..dom.num_quad() {
        let s: f64 = g[q * nd * n..(q + 1) * nd * n].iter().map(|v| v * v).sum();
        assert!((s - nd as f64).abs() < 1e-9, "q={q} s={s}");
    }
}

#[test]
fn gradient_oracle_linear_field_on_mesh() {
    // u = <x, e1> e1 has |grad_T u|^2 = 1 - <x,e1>^2.
    let dom = mesh(3);
    let n = dom.n();
    let mut vals = vec![0.0; dom.num_nodes() * n];
    for k in 0..dom.num_nodes() {
        vals[k * n] = dom.node(k)[0];
    }
    let g = dom.tangential_gradient(&vals);
    let nd = n - 1;
    for q in 0..dom.num_quad() {
        let x1 = dom.quad_point(q)[0];
        let s: f64 = g[q * nd * n..(q + 1) * nd * n].iter().map(|v| v * v).sum();
        assert!((s - (1.0 - x1 * x1)).abs() < 1e-9);
    }
}

#[test]
fn chart_gradient_of_identity_converges() {
    for (n, res, tol) in [(3usize, 32u32, 3e-3), (4, 12, 3e-2), (5, 8, 8e-2)] {
        let dom = chart(n, res);
        let g = dom.tangential_gradient(dom.nodes_flat());
        let nd = n - 1;
        let dens: Vec<f64> = (0..dom.num_quad())
            .map(|q| {
                g[q * nd * n..(q + 1) * nd * n].iter().map(|v| v * v).sum::<f64>() / nd as f64
            })
            .collect();
        let avg = dom.fint(&dens);
        assert!((avg - 1.0).abs() < tol, "n={n} avg={avg}");
    }
}

#[test]
fn quadrature_is_exact_to_degree_five_on_mesh() {
    let dom = mesh(2);
    // fint x1^2 = 1/3, fint <x,a>^4 = |a|^4 / 5 on S^2, fint x1^6 would fail.
    let f2: Vec<f64> = (0..dom.num_quad()).map(|q| dom.quad_point(q)[0].powi(2)).collect();
    assert!((dom.fint(&f2) - 1.0 / 3.0).abs() < 1e-12);
    let a = [0.6, -0.48, 0.64];
    let na2 = dot(&a, &a);
    let f4: Vec<f64> = (0..dom.num_quad())
        .map(|q| dot(dom.quad_point(q), &a).powi(4))
        .collect();
    assert!((dom.fint(&f4) - na2 * na2 / 5.0).abs() < 1e-12);
}

#[test]
fn chart_moments_match_exact_values() {
    for (n, res, tol) in [(3usize, 24u32, 2e-3), (4, 12, 6e-3), (5, 8, 2e-2)] {
        let dom = chart(n, res);
        let f2: Vec<f64> = (0..dom.num_quad()).map(|q| dom.quad_point(q)[0].powi(2)).collect();
        let exact = 1.0 / n as f64;
        let got = dom.fint(&f2);
        assert!((got - exact).abs() < tol, "n={n} got={got} exact={exact}");
    }
}

#[test]
fn quadrature_convergence_order_at_least_two() {
    // Smooth non-polynomial integrand; compare mesh levels 2 and 4 (h/4).
    let exact = {
        // fint exp(x3) over S^2 = (e - 1/e)/2 = sinh(1).
        1f64.sinh()
    };
    let err = |level: u32| {
        let dom = mesh(level);
        let f: Vec<f64> = (0..dom.num_quad()).map(|q| dom.quad_point(q)[2].exp()).collect();
        (dom.fint(&f) - exact).abs()
    };
    let e2 = err(2);
    let e4 = err(4);
    assert!(e2 / e4 > 8.0, "e2={e2} e4={e4}");
}

#[test]
fn jacobian_of_identity_is_the_position() {
    let dom = mesh(3);
    let u = SphereMap::identity(dom.clone());
    let j = jacobian_wedge(&u);
    let n = dom.n();
    for q in 0..dom.num_quad() {
        for c in 0..n {
            assert!((j[q * n + c] - dom.quad_point(q)[c]).abs() < 1e-9);
        }
    }
    // Chart backend: J(id) approximates x.
    let domc = chart(3, 32);
    let uc = SphereMap::identity(domc.clone());
    let jc = jacobian_wedge(&uc);
    let dens: Vec<f64> = (0..domc.num_quad())
        .map(|q| {
            let d: f64 = (0..3)
                .map(|c| (jc[q * 3 + c] - domc.quad_point(q)[c]).powi(2))
                .sum();
            d
        })
        .collect();
    assert!(domc.fint(&dens).sqrt() < 5e-2);
}

#[test]
fn volume_of_identity_is_one() {
    for (dom, tol) in [
        (mesh(3), 1e-9),
        (chart(3, 32), 1e-2),
        (chart(4, 12), 5e-2),
        (chart(5, 8), 1e-1),
    ] {
        let u = SphereMap::identity(dom.clone());
        let j = jacobian_wedge(&u);
        let v = dom.fint_dot(u.quad_values(), &j);
        assert!((v - 1.0).abs() < tol, "n={} v={v}", dom.n());
    }
}

#[test]
fn mesh_evaluation_reproduces_quadratic_fields() {
    let dom = mesh(2);
    let u = SphereMap::from_values(
        dom.clone(),
        (0..dom.num_nodes())
            .flat_map(|k| {
                let x = dom.node(k);
                [x[0] * x[1], x[2] * x[2], x[0] + 0.5 * x[1]]
            })
            .collect(),
    );
    let pts = [[0.3, -0.5, (1.0f64 - 0.34).sqrt()], [-0.8, 0.1, -(1.0f64 - 0.65).sqrt()]];
    let mut out = [0.0; 3];
    for p in pts {
        dom.evaluate(u.values(), &p, &mut out);
        assert!((out[0] - p[0] * p[1]).abs() < 1e-10);
        assert!((out[1] - p[2] * p[2]).abs() < 1e-10);
        assert!((out[2] - (p[0] + 0.5 * p[1])).abs() < 1e-10);
    }
}

#[test]
fn chart_evaluation_interpolates() {
    let dom = chart(3, 32);
    let u = SphereMap::identity(dom.clone());
    let mut out = [0.0; 3];
    for p in [[0.3, -0.5, 0.812403840463596], [0.0, 0.0, -1.0], [0.9539392014169456, 0.3, 0.0]]
    {
        dom.evaluate(u.values(), &p, &mut out);
        let err: f64 = out.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 5e-2, "p={p:?} out={out:?}");
    }
}

#[test]
fn w12_product_is_symmetric_positive() {
    let dom = mesh(2);
    let n = dom.n();
    let a: Vec<f64> = (0..dom.num_nodes() * n).map(|i| ((i * 37 % 101) as f64) / 50.5 - 1.0).collect();
    let b: Vec<f64> = (0..dom.num_nodes() * n).map(|i| ((i * 53 % 89) as f64) / 44.5 - 1.0).collect();
    let ab = dom.w12_product(&a, &b);
    let ba = dom.w12_product(&b, &a);
    assert!((ab - ba).abs() < 1e-12);
    assert!(dom.w12_product(&a, &a) > 0.0);
}

#[test]
fn serialization_round_trip() {
    for dom in [mesh(2), chart(3, 16), chart(4, 10)] {
        let j = dom.to_json();
        let back = Domain::from_json(&j).unwrap();
        assert_eq!(back.n(), dom.n());
        assert_eq!(back.num_nodes(), dom.num_nodes());
        assert_eq!(back.num_quad(), dom.num_quad());
        for k in 0..dom.num_nodes() {
            for c in 0..dom.n() {
                assert!((back.node(k)[c] - dom.node(k)[c]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn map_serialization_round_trip() {
    let dom = mesh(1);
    let u = SphereMap::from_fn(dom.clone(), |x, out| {
        out[0] = x[0] * 2.0;
        out[1] = x[1] - 0.25;
        out[2] = x[2];
    });
    let j = u.to_json(dom.to_json());
    let back = SphereMap::from_json(&j).unwrap();
    assert_eq!(back.values().len(), u.values().len());
    for (a, b) in back.values().iter().zip(u.values()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn mesh_max_edge_halves_per_level() {
    let e2 = mesh(2).resolution_scale();
    let e3 = mesh(3).resolution_scale();
    assert!(e3 < 0.6 * e2 && e3 > 0.4 * e2, "e2={e2} e3={e3}");
}

#[test]
fn composition_resamples_exactly_with_source() {
    let dom = mesh(2);
    let u = SphereMap::from_fn(dom.clone(), |x, out| {
        out.copy_from_slice(x);
        out[0] *= 2.0;
    });
    // Rotate by 90 degrees around e3.
    let v = u.compose(|x: &[f64], out: &mut [f64]| {
        out[0] = -x[1];
        out[1] = x[0];
        out[2] = x[2];
    });
    for k in 0..dom.num_nodes() {
        let x = dom.node(k);
        let got = &v.values()[k * 3..k * 3 + 3];
        assert!((got[0] - (-2.0 * x[1])).abs() < 1e-12);
        assert!((got[1] - x[0]).abs() < 1e-12);
        assert!((got[2] - x[2]).abs() < 1e-12);
    }
}
