//! Smallest eigenvalues of the assembled quadratic form against a Gram
//! form, restricted to a constrained subspace by orthogonal-projection
//! deflation. The solver is a preconditioned block locally-optimal
//! conjugate-gradient iteration (LOBPCG) with dense Rayleigh-Ritz steps on
//! the small subspace, which needs only matrix-vector products.

use crate::assembly::QuadraticAssembly;
use crate::QuadraticsError;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sphere_domain::BackendKind;

/// Smallest-eigenvalue report of a generalized pencil on the constrained
/// subspace.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Ambient dimension n.
    pub n: usize,
    /// Human-readable backend / resolution metadata.
    pub backend: String,
    /// Number of nodes of the discretization.
    pub num_nodes: usize,
    /// Eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Relative residual norms of the eigenpairs.
    pub residuals: Vec<f64>,
    /// Iterations used by the block solver.
    pub iterations: usize,
}

/// Orthogonal-projection deflation onto the complement of a span of rows.
struct Deflation {
    rows: Vec<Vec<f64>>,
}

impl Deflation {
    /// Build from (not necessarily orthogonal) covectors by Gram-Schmidt.
    fn new(raw: &[Vec<f64>]) -> Deflation {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for r in raw {
            let mut v = r.clone();
            for _ in 0..2 {
                for o in &rows {
                    let c: f64 = o.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                    for (vv, ov) in v.iter_mut().zip(o.iter()) {
                        *vv -= c * ov;
                    }
                }
            }
            let nrm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if nrm > 1e-12 {
                v.iter_mut().for_each(|a| *a /= nrm);
                rows.push(v);
            }
        }
        Deflation { rows }
    }

    fn project(&self, v: &mut [f64]) {
        for o in &self.rows {
            let c: f64 = o.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            for (vv, ov) in v.iter_mut().zip(o.iter()) {
                *vv -= c * ov;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt in the B inner product; returns the B-images of
/// the surviving columns and drops near-dependent ones in place.
fn b_orthonormalize<F>(cols: &mut Vec<Vec<f64>>, b_mv: &F) -> Vec<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut b_kept: Vec<Vec<f64>> = Vec::new();
    for col in cols.drain(..) {
        let mut v = col;
        for _ in 0..2 {
            for (o, bo) in kept.iter().zip(b_kept.iter()) {
                let c = dot(bo, &v);
                for (vv, ov) in v.iter_mut().zip(o.iter()) {
                    *vv -= c * ov;
                }
            }
        }
        let mut bv = vec![0.0; v.len()];
        b_mv(&v, &mut bv);
        let nrm2 = dot(&bv, &v);
        if nrm2 > 1e-20 {
            let nrm = nrm2.sqrt();
            v.iter_mut().for_each(|a| *a /= nrm);
            bv.iter_mut().for_each(|a| *a /= nrm);
            kept.push(v);
            b_kept.push(bv);
        }
    }
    *cols = kept;
    b_kept
}

/// Sorted symmetric eigendecomposition of a small dense matrix.
fn small_eig(g: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let k = g.nrows();
    let sym = (g.clone() + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(k, k);
    for (newc, &oldc) in order.iter().enumerate() {
        vecs.set_column(newc, &eig.eigenvectors.column(oldc));
    }
    (vals, vecs)
}

/// Preconditioned block LOBPCG for the smallest m eigenpairs of
/// A v = lambda B v on the complement of the deflation rows.
#[allow(clippy::too_many_arguments)]
fn lobpcg<FA, FB>(
    ndof: usize,
    m: usize,
    a_mv: &FA,
    b_mv: &FB,
    precond: &[f64],
    deflate: &Deflation,
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>, usize), QuadraticsError>
where
    FA: Fn(&[f64], &mut [f64]),
    FB: Fn(&[f64], &mut [f64]),
{
    let block = (m + 4).min(ndof / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(0x51ec7);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| {
            let mut v: Vec<f64> = (0..ndof).map(|_| rng.gen_range(-1.0..1.0)).collect();
            deflate.project(&mut v);
            v
        })
        .collect();
    let mut bx = b_orthonormalize(&mut x, b_mv);
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut best_res = f64::INFINITY;
    for it in 0..maxit {
        // Rayleigh-Ritz on the current block.
        let k = x.len();
        let ax: Vec<Vec<f64>> = x
            .iter()
            .map(|c| {
                let mut y = vec![0.0; ndof];
                a_mv(c, &mut y);
                y
            })
            .collect();
        let mut gram = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = dot(&x[i], &ax[j]);
            }
        }
        let (theta, c) = small_eig(gram);
        let rot = |cols: &[Vec<f64>]| -> Vec<Vec<f64>> {
            (0..k)
                .map(|j| {
                    let mut v = vec![0.0; ndof];
                    for i in 0..k {
                        let w = c[(i, j)];
                        for (vv, cv) in v.iter_mut().zip(cols[i].iter()) {
                            *vv += w * cv;
                        }
                    }
                    v
                })
                .collect()
        };
        let xr = rot(&x);
        let axr = rot(&ax);
        let bxr = rot(&bx);
        // Residuals of the first m pairs.
        let mut resids = vec![0.0; k];
        let mut ws: Vec<Vec<f64>> = Vec::new();
        for j in 0..k {
            let mut r: Vec<f64> = axr[j]
                .iter()
                .zip(bxr[j].iter())
                .map(|(a, b)| a - theta[j] * b)
                .collect();
            deflate.project(&mut r);
            let den = axr[j].iter().map(|v| v * v).sum::<f64>().sqrt()
                + theta[j].abs() * bxr[j].iter().map(|v| v * v).sum::<f64>().sqrt();
            resids[j] = if den > 0.0 {
                r.iter().map(|v| v * v).sum::<f64>().sqrt() / den
            } else {
                0.0
            };
            let mut w: Vec<f64> = r.iter().zip(precond.iter()).map(|(a, d)| a / d).collect();
            deflate.project(&mut w);
            ws.push(w);
        }
        let max_res = resids.iter().take(m).cloned().fold(0.0f64, f64::max);
        best_res = best_res.min(max_res);
        if max_res <= tol {
            return Ok((
                theta[..m].to_vec(),
                xr[..m].to_vec(),
                resids[..m].to_vec(),
                it,
            ));
        }
        // Expand the search space: [X, W, P], B-orthonormalized.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3 * k);
        basis.extend(xr.iter().cloned());
        basis.extend(ws.iter().take(m + 2).cloned());
        basis.extend(p.iter().cloned());
        let b_basis = b_orthonormalize(&mut basis, b_mv);
        let s = basis.len();
        let a_basis: Vec<Vec<f64>> = basis
            .iter()
            .map(|cv| {
                let mut y = vec![0.0; ndof];
                a_mv(cv, &mut y);
                y
            })
            .collect();
        let mut gram_s = DMatrix::zeros(s, s);
        for i in 0..s {
            for j in 0..s {
                gram_s[(i, j)] = dot(&basis[i], &a_basis[j]);
            }
        }
        let (_, y) = small_eig(gram_s);
        let take = k.min(s);
        let mut x_new: Vec<Vec<f64>> = Vec::with_capacity(take);
        let mut p_new: Vec<Vec<f64>> = Vec::with_capacity(take);
        for j in 0..take {
            let mut xv = vec![0.0; ndof];
            let mut pv = vec![0.0; ndof];
            for i in 0..s {
                let w = y[(i, j)];
                for (a, b) in xv.iter_mut().zip(basis[i].iter()) {
                    *a += w * b;
                }
                if i >= k {
                    for (a, b) in pv.iter_mut().zip(basis[i].iter()) {
                        *a += w * b;
                    }
                }
            }
            x_new.push(xv);
            p_new.push(pv);
        }
        x = x_new;
        bx = b_orthonormalize(&mut x, b_mv);
        p = p_new.into_iter().take(m + 2).collect();
        let _ = b_basis;
    }
    Err(QuadraticsError::EigenSolverStalled(best_res))
}

fn backend_label(asm: &QuadraticAssembly) -> String {
    match asm.domain.backend() {
        BackendKind::Mesh { subdivision_level } => {
            format!("mesh level {}", subdivision_level)
        }
        BackendKind::Chart { resolution } => format!("chart resolution {}", resolution),
    }
}

fn positive_diag(raw: Vec<f64>) -> Vec<f64> {
    let max = raw.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
    raw.into_iter()
        .map(|d| if d > 1e-12 * max { d } else { max })
        .collect()
}

/// Smallest m eigenvalues of Q_n against the W^{1,2} Gram on H_n (only the
/// mean and radial constraints deflated). The count of eigenvalues below
/// 1e-6 is the numerical kernel dimension of Q_n.
pub fn kernel_spectrum(
    asm: &QuadraticAssembly,
    m: usize,
) -> Result<SpectrumReport, QuadraticsError> {
    if m == 0 || m > 20 {
        return Err(QuadraticsError::TooManyRequested(m));
    }
    let ndof = asm.ndof();
    let deflate = Deflation::new(&asm.constraints);
    let a_mv = |v: &[f64], y: &mut [f64]| asm.q_form.matvec(v, y);
    let b_mv = |v: &[f64], y: &mut [f64]| asm.w12_gram.matvec(v, y);
    let dq = asm.q_form.diagonal();
    let dg = asm.w12_gram.diagonal();
    let precond =
        positive_diag(dq.iter().zip(dg.iter()).map(|(a, b)| a + 0.05 * b).collect());
    let (vals, _vecs, resids, iters) =
        lobpcg(ndof, m, &a_mv, &b_mv, &precond, &deflate, 1e-6, 1500)?;
    Ok(SpectrumReport {
        n: asm.domain.n(),
        backend: backend_label(asm),
        num_nodes: asm.domain.num_nodes(),
        eigenvalues: vals,
        residuals: resids,
        iterations: iters,
    })
}

/// Smallest m eigenvalues of Q_n against the gradient-seminorm Gram
/// (regularized by 1e-12 times the L^2 Gram) on H_n intersected with the
/// W^{1,2}-orthogonal complement of the kernel basis. The bottom eigenvalue
/// is the discrete linear-stability (coercivity) constant.
pub fn coercivity_spectrum(
    asm: &QuadraticAssembly,
    m: usize,
) -> Result<SpectrumReport, QuadraticsError> {
    if m == 0 || m > 20 {
        return Err(QuadraticsError::TooManyRequested(m));
    }
    let ndof = asm.ndof();
    let mut rows = asm.constraints.clone();
    for b in &asm.kernel_basis {
        let mut img = vec![0.0; ndof];
        asm.w12_gram.matvec(b, &mut img);
        rows.push(img);
    }
    let deflate = Deflation::new(&rows);
    let a_mv = |v: &[f64], y: &mut [f64]| asm.q_form.matvec(v, y);
    let b_mv = |v: &[f64], y: &mut [f64]| {
        asm.seminorm_gram.matvec(v, y);
        asm.l2_gram.matvec_add(v, y, 1e-12);
    };
    let dq = asm.q_form.diagonal();
    let ds = asm.seminorm_gram.diagonal();
    let dl = asm.l2_gram.diagonal();
    let precond = positive_diag(
        dq.iter()
            .zip(ds.iter().zip(dl.iter()))
            .map(|(a, (b, c))| a + 0.05 * (b + 1e-12 * c))
            .collect(),
    );
    let (vals, _vecs, resids, iters) =
        lobpcg(ndof, m, &a_mv, &b_mv, &precond, &deflate, 1e-6, 1500)?;
    Ok(SpectrumReport {
        n: asm.domain.n(),
        backend: backend_label(asm),
        num_nodes: asm.domain.num_nodes(),
        eigenvalues: vals,
        residuals: resids,
        iterations: iters,
    })
}

/// Multi-indices alpha with |alpha| <= degree in n variables.
fn multi_indices(n: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for d in 0..=left {
            cur[pos] = d;
            rec(pos + 1, left - d, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, degree, &mut cur, &mut out);
    out
}

fn monomial(alpha: &[usize], x: &[f64]) -> f64 {
    alpha.iter().zip(x).map(|(&a, &xi)| xi.powi(a as i32)).product()
}

fn monomial_grad(alpha: &[usize], x: &[f64], out: &mut [f64]) {
    for d in 0..x.len() {
        if alpha[d] == 0 {
            out[d] = 0.0;
            continue;
        }
        let mut v = alpha[d] as f64 * x[d].powi(alpha[d] as i32 - 1);
        for (e, (&a, &xi)) in alpha.iter().zip(x).enumerate() {
            if e != d {
                v *= xi.powi(a as i32);
            }
        }
        out[d] = v;
    }
}

/// Rayleigh-Ritz coercivity spectrum on an analytic trial space of vector
/// fields with monomial components of total degree <= `degree`. Gradients
/// are exact (no finite differences), only the domain quadrature enters, so
/// the pencil is free of the rough-mode artifacts of collocation stencils.
/// Used for chart backends, where the assembled pencil is not spectrally
/// faithful; converges to the continuum constant from above as the degree
/// grows.
pub fn polynomial_coercivity_spectrum(
    dom: &std::sync::Arc<sphere_domain::Domain>,
    degree: usize,
    m: usize,
) -> Result<SpectrumReport, QuadraticsError> {
    if m == 0 || m > 20 {
        return Err(QuadraticsError::TooManyRequested(m));
    }
    let n = dom.n();
    let nf = n as f64;
    let nd = n - 1;
    let alphas = multi_indices(n, degree);
    let na = alphas.len();
    let nfield = na * n; // field (a, j) = monomial a times e_j
    let c1 = 0.5 * nf / (nf - 1.0);
    let c2 = nf * (nf - 3.0) / (2.0 * (nf - 1.0) * (nf - 1.0));

    let mut semi = DMatrix::<f64>::zeros(nfield, nfield);
    let mut mass = DMatrix::<f64>::zeros(nfield, nfield);
    let mut divf = DMatrix::<f64>::zeros(nfield, nfield);
    let mut pair = DMatrix::<f64>::zeros(nfield, nfield);
    let mut cons = vec![vec![0.0; nfield]; n + 1];

    let mut pvals = vec![0.0; na];
    let mut gtan = vec![0.0; na * nd]; // <grad p_a, tau_i>
    let mut grad = vec![0.0; n];
    for q in 0..dom.num_quad() {
        let wq = dom.quad_weight(q);
        let x = dom.quad_point(q);
        for (a, alpha) in alphas.iter().enumerate() {
            pvals[a] = monomial(alpha, x);
            monomial_grad(alpha, x, &mut grad);
            for i in 0..nd {
                let tau = dom.frame(q, i);
                gtan[a * nd + i] = grad.iter().zip(tau).map(|(g, t)| g * t).sum();
            }
        }
        for a in 0..na {
            for j in 0..n {
                let fa = a * n + j;
                // Constraints: fint w_j and fint <w, x>.
                cons[j][fa] += wq * pvals[a];
                cons[n][fa] += wq * pvals[a] * x[j];
                for b in 0..na {
                    let gab: f64 =
                        (0..nd).map(|i| gtan[a * nd + i] * gtan[b * nd + i]).sum();
                    let fb_same = b * n + j;
                    semi[(fa, fb_same)] += wq * gab;
                    mass[(fa, fb_same)] += wq * pvals[a] * pvals[b];
                    for jb in 0..n {
                        let fb = b * n + jb;
                        // div contributions: div(p e_j) = <grad_T p, e_j>.
                        let diva: f64 =
                            (0..nd).map(|i| gtan[a * nd + i] * dom.frame(q, i)[j]).sum();
                        let divb: f64 =
                            (0..nd).map(|i| gtan[b * nd + i] * dom.frame(q, i)[jb]).sum();
                        if c2 != 0.0 {
                            divf[(fa, fb)] += wq * diva * divb;
                        }
                        // <a, A(b)> = p_a [ div_b x_j - sum_i g_b[i] x_jb tau_i[j] ].
                        let mut v = divb * x[j];
                        for i in 0..nd {
                            v -= gtan[b * nd + i] * x[jb] * dom.frame(q, i)[j];
                        }
                        pair[(fa, fb)] += wq * pvals[a] * v;
                    }
                }
            }
        }
    }
    let qd = (&semi * c1) + (&divf * c2) - (&pair + pair.transpose()) * (0.25 * nf);
    let w12d = &semi + &mass;

    // Kernel fields in trial coordinates (all are degree <= 2 polynomials).
    let find = |target: &[usize]| alphas.iter().position(|a| a == target).unwrap();
    let mut kernels: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut k = vec![0.0; nfield];
            let mut e = vec![0usize; n];
            e[j] = 1;
            k[find(&e) * n + i] = 1.0;
            let mut e2 = vec![0usize; n];
            e2[i] = 1;
            k[find(&e2) * n + j] = -1.0;
            kernels.push(k);
        }
    }
    for mdir in 0..n {
        let mut k = vec![0.0; nfield];
        for j in 0..n {
            let mut e = vec![0usize; n];
            e[mdir] += 1;
            e[j] += 1;
            k[find(&e) * n + j] += 1.0;
        }
        let zero = vec![0usize; n];
        k[find(&zero) * n + mdir] -= 1.0 / nf;
        kernels.push(k);
    }

    // Deflation rows in trial coordinates: constraints and W12 images of
    // the kernel fields; orthonormal complement basis by dense projection.
    let mut rows: Vec<Vec<f64>> = cons;
    for k in &kernels {
        let kv = nalgebra::DVector::from_column_slice(k);
        rows.push((&w12d * kv).iter().cloned().collect());
    }
    let deflate = Deflation::new(&rows);
    // Project the identity basis of the trial space and orthonormalize in
    // the W12 metric, dropping near-dependent directions (the monomials are
    // linearly dependent on the sphere).
    let mut span: Vec<Vec<f64>> = Vec::new();
    for f in 0..nfield {
        let mut v = vec![0.0; nfield];
        v[f] = 1.0;
        deflate.project(&mut v);
        span.push(v);
    }
    let w12_mv = |v: &[f64], y: &mut [f64]| {
        let dv = nalgebra::DVector::from_column_slice(v);
        let r = &w12d * dv;
        y.copy_from_slice(r.as_slice());
    };
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for mut v in span {
        for _ in 0..2 {
            for o in &kept {
                let mut img = vec![0.0; nfield];
                w12_mv(o, &mut img);
                let c = dot(&img, &v);
                for (vv, ov) in v.iter_mut().zip(o.iter()) {
                    *vv -= c * ov;
                }
            }
        }
        let mut img = vec![0.0; nfield];
        w12_mv(&v, &mut img);
        let nrm2 = dot(&img, &v);
        if nrm2 > 1e-8 {
            let nrm = nrm2.sqrt();
            v.iter_mut().for_each(|a| *a /= nrm);
            kept.push(v);
        }
    }
    let dim = kept.len();
    if dim < m {
        return Err(QuadraticsError::TooManyRequested(m));
    }
    let basis = DMatrix::<f64>::from_fn(nfield, dim, |r, c| kept[c][r]);
    let a_red = basis.transpose() * &qd * &basis;
    let b_red = basis.transpose() * (&semi + &mass * 1e-12) * &basis;
    // Whiten B and solve the reduced symmetric problem.
    let eig_b = SymmetricEigen::new((b_red.clone() + b_red.transpose()) * 0.5);
    let maxb = eig_b.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let mut cols: Vec<usize> = Vec::new();
    for i in 0..dim {
        if eig_b.eigenvalues[i] > 1e-10 * maxb {
            cols.push(i);
        }
    }
    if cols.len() < m {
        return Err(QuadraticsError::TooManyRequested(m));
    }
    let mut white = DMatrix::<f64>::zeros(dim, cols.len());
    for (c, &i) in cols.iter().enumerate() {
        let s = eig_b.eigenvalues[i].sqrt();
        white.set_column(c, &(eig_b.eigenvectors.column(i) / s));
    }
    let a_w = white.transpose() * &a_red * &white;
    let (vals, _) = small_eig(a_w);
    Ok(SpectrumReport {
        n,
        backend: format!("{} + polynomial trial degree {}", backend_label_dom(dom), degree),
        num_nodes: dom.num_nodes(),
        eigenvalues: vals[..m].to_vec(),
        residuals: vec![0.0; m],
        iterations: 1,
    })
}

fn backend_label_dom(dom: &sphere_domain::Domain) -> String {
    match dom.backend() {
        BackendKind::Mesh { subdivision_level } => format!("mesh level {}", subdivision_level),
        BackendKind::Chart { resolution } => format!("chart resolution {}", resolution),
    }
}
