//! Icosphere mesh backend (n = 3): recursive icosahedron subdivision,
//! face-area quadrature at the spherical circumcenters, and a per-face
//! least-squares quadratic reconstruction operator providing values and
//! tangential gradients at the quadrature points.
//!
//! The quadrature node of a face is its unit normal (the spherical
//! circumcenter). That node set inherits the icosahedral symmetry at every
//! subdivision level and therefore integrates all polynomials of degree <= 5
//! exactly, which the reconstruction-based functionals rely on.

use crate::domain::{normalize, BackendKind, Domain, DomainError, MeshData};
use crate::harmonics;
use crate::sparse::Csr;
use nalgebra::DMatrix;
use std::collections::HashMap;

const N: usize = 3;

/// Build the icosphere domain at the given subdivision level.
pub fn build_icosphere(level: u32) -> Result<Domain, DomainError> {
    if level > 8 {
        return Err(DomainError::LevelOutOfRange(level));
    }
    let (vertices, faces) = icosphere(level);
    let nv = vertices.len() / N;
    let nf = faces.len();

    // Per-face geometry: flat area, unit normal (quadrature node), frame.
    let mut areas = vec![0.0; nf];
    let mut quad_x = vec![0.0; nf * N];
    let mut frames = vec![0.0; nf * (N - 1) * N];
    let mut max_edge: f64 = 0.0;
    for (f, &[a, b, c]) in faces.iter().enumerate() {
        let pa = &vertices[a as usize * N..a as usize * N + N];
        let pb = &vertices[b as usize * N..b as usize * N + N];
        let pc = &vertices[c as usize * N..c as usize * N + N];
        let e1 = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
        let e2 = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
        let cr = cross(&e1, &e2);
        let cr_norm = norm3(&cr);
        areas[f] = 0.5 * cr_norm;
        let nu = [cr[0] / cr_norm, cr[1] / cr_norm, cr[2] / cr_norm];
        quad_x[f * N..f * N + N].copy_from_slice(&nu);
        max_edge = max_edge.max(norm3(&e1)).max(norm3(&e2));

        // Orthonormal frame in the face plane, oriented so that
        // det(t1, t2, nu) > 0, i.e. t1 x t2 = nu.
        let mut t1 = e1;
        normalize(&mut t1);
        let d = dot3(&e2, &t1);
        let mut t2 = [e2[0] - d * t1[0], e2[1] - d * t1[1], e2[2] - d * t1[2]];
        normalize(&mut t2);
        if dot3(&cross(&t1, &t2), &nu) < 0.0 {
            for x in t2.iter_mut() {
                *x = -*x;
            }
        }
        frames[f * 2 * N..f * 2 * N + N].copy_from_slice(&t1);
        frames[f * 2 * N + N..f * 2 * N + 2 * N].copy_from_slice(&t2);
    }
    let total: f64 = areas.iter().sum();
    let quad_w: Vec<f64> = areas.iter().map(|a| a / total).collect();

    // Vertex 1-rings, then per-face stencils (union of the 1-rings of the
    // face's three vertices).
    let mut rings: Vec<Vec<u32>> = vec![Vec::new(); nv];
    for &[a, b, c] in &faces {
        for &(u, v, w) in &[(a, b, c), (b, a, c), (c, a, b)] {
            let ring = &mut rings[u as usize];
            for x in [v, w] {
                if !ring.contains(&x) {
                    ring.push(x);
                }
            }
        }
    }

    let mut stencils: Vec<Vec<u32>> = Vec::with_capacity(nf);
    let mut fits: Vec<Vec<f64>> = Vec::with_capacity(nf);
    let mut val_trip: Vec<(u32, u32, f64)> = Vec::new();
    let mut grad_trip: [Vec<(u32, u32, f64)>; 2] = [Vec::new(), Vec::new()];
    for (f, &[a, b, c]) in faces.iter().enumerate() {
        let mut st: Vec<u32> = vec![a, b, c];
        for v in [a, b, c] {
            for &r in &rings[v as usize] {
                if !st.contains(&r) {
                    st.push(r);
                }
            }
        }
        st.sort_unstable();
        let ns = st.len();

        // Least-squares fit in the degree <= 2 harmonic basis.
        let mut m = DMatrix::zeros(ns, harmonics::NUM_BASIS);
        for (row, &v) in st.iter().enumerate() {
            let y = harmonics::eval(&vertices[v as usize * N..v as usize * N + N]);
            for (col, &val) in y.iter().enumerate() {
                m[(row, col)] = val;
            }
        }
        let svd = m.svd(true, true);
        let eps = 1e-10 * svd.singular_values.max();
        let pinv = svd
            .pseudo_inverse(eps)
            .expect("pseudo-inverse of reconstruction stencil");

        let nu: [f64; 3] = quad_x[f * N..f * N + N].try_into().unwrap();
        let yv = harmonics::eval(&nu);
        let gy = harmonics::grad(&nu);
        // Tangential part of each basis gradient at nu.
        let mut gyt = [[0.0; 3]; harmonics::NUM_BASIS];
        for bidx in 0..harmonics::NUM_BASIS {
            let gn = dot3(&gy[bidx], &nu);
            for k in 0..3 {
                gyt[bidx][k] = gy[bidx][k] - gn * nu[k];
            }
        }
        let t1 = &frames[f * 2 * N..f * 2 * N + N];
        let t2 = &frames[f * 2 * N + N..f * 2 * N + 2 * N];
        for s in 0..ns {
            let mut vw = 0.0;
            let mut gw = [0.0; 3];
            for bidx in 0..harmonics::NUM_BASIS {
                let p = pinv[(bidx, s)];
                vw += yv[bidx] * p;
                for k in 0..3 {
                    gw[k] += gyt[bidx][k] * p;
                }
            }
            val_trip.push((f as u32, st[s], vw));
            let g1 = t1[0] * gw[0] + t1[1] * gw[1] + t1[2] * gw[2];
            let g2 = t2[0] * gw[0] + t2[1] * gw[1] + t2[2] * gw[2];
            grad_trip[0].push((f as u32, st[s], g1));
            grad_trip[1].push((f as u32, st[s], g2));
        }

        let mut fit = vec![0.0; harmonics::NUM_BASIS * ns];
        for bidx in 0..harmonics::NUM_BASIS {
            for s in 0..ns {
                fit[bidx * ns + s] = pinv[(bidx, s)];
            }
        }
        stencils.push(st);
        fits.push(fit);
    }

    let val_st = Csr::from_triplets(nf, nv, &mut val_trip);
    let [mut g1, mut g2] = grad_trip;
    let grad_st = vec![
        Csr::from_triplets(nf, nv, &mut g1),
        Csr::from_triplets(nf, nv, &mut g2),
    ];

    Ok(Domain {
        n: N,
        backend: BackendKind::Mesh { subdivision_level: level },
        nodes: vertices,
        quad_x,
        quad_w,
        frames,
        val_st,
        grad_st,
        h: max_edge,
        mesh: Some(MeshData { faces, face_areas: areas, stencils, fit: fits, max_edge }),
        chart: None,
    })
}

/// Evaluate a nodal field at an arbitrary unit point: locate the face whose
/// circumcenter is nearest in direction, then evaluate its quadratic fit.
pub(crate) fn evaluate(dom: &Domain, values: &[f64], x: &[f64], out: &mut [f64]) {
    let md = dom.mesh.as_ref().unwrap();
    let nf = md.faces.len();
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for f in 0..nf {
        let nu = &dom.quad_x[f * N..f * N + N];
        let d = nu[0] * x[0] + nu[1] * x[1] + nu[2] * x[2];
        if d > best_dot {
            best_dot = d;
            best = f;
        }
    }
    let st = &md.stencils[best];
    let fit = &md.fit[best];
    let ns = st.len();
    let y = harmonics::eval(x);
    for j in 0..N {
        let mut acc = 0.0;
        for bidx in 0..harmonics::NUM_BASIS {
            let mut coeff = 0.0;
            for s in 0..ns {
                coeff += fit[bidx * ns + s] * values[st[s] as usize * N + j];
            }
            acc += y[bidx] * coeff;
        }
        out[j] = acc;
    }
}

/// Icosphere vertices (flattened, unit) and outward-oriented faces.
fn icosphere(level: u32) -> (Vec<f64>, Vec<[u32; 3]>) {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw: [[f64; 3]; 12] = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut verts: Vec<[f64; 3]> = raw
        .iter()
        .map(|v| {
            let mut w = *v;
            normalize(&mut w);
            w
        })
        .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut get_mid = |i: u32, j: u32, verts: &mut Vec<[f64; 3]>| -> u32 {
            let key = (i.min(j), i.max(j));
            if let Some(&m) = midpoints.get(&key) {
                return m;
            }
            let a = verts[i as usize];
            let b = verts[j as usize];
            let mut m = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
            normalize(&mut m);
            verts.push(m);
            let idx = (verts.len() - 1) as u32;
            midpoints.insert(key, idx);
            idx
        };
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = get_mid(a, b, &mut verts);
            let bc = get_mid(b, c, &mut verts);
            let ca = get_mid(c, a, &mut verts);
            new_faces.push([a, ab, ca]);
            new_faces.push([b, bc, ab]);
            new_faces.push([c, ca, bc]);
            new_faces.push([ab, bc, ca]);
        }
        faces = new_faces;
    }

    // Orient every face outward: det(v_b - v_a, v_c - v_a, centroid) > 0.
    for f in faces.iter_mut() {
        let pa = verts[f[0] as usize];
        let pb = verts[f[1] as usize];
        let pc = verts[f[2] as usize];
        let e1 = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
        let e2 = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
        let cen = [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
            (pa[2] + pb[2] + pc[2]) / 3.0,
        ];
        if dot3(&cross(&e1, &e2), &cen) < 0.0 {
            f.swap(1, 2);
        }
    }

    let flat: Vec<f64> = verts.iter().flatten().copied().collect();
    (flat, faces)
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
