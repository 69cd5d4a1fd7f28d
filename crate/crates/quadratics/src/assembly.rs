//! Sparse assembly of the second-variation form Q_n and the Gram forms on
//! the nodal vector-field space, the H_n constraint functionals, and the
//! W^{1,2}-orthonormalized kernel basis built from the Moebius algebra
//! fields (rotations and centered dilations).

use crate::QuadraticsError;
use moebius::algebra::MoebiusAlgebraField;
use sphere_domain::sparse::{conjugate_gradient, Csr};
use sphere_domain::{Domain, SphereMap};
use std::sync::Arc;

/// Triplet accumulator with periodic in-place compaction so that large
/// assemblies stay within a bounded memory footprint.
struct Triplets {
    t: Vec<(u32, u32, f64)>,
    limit: usize,
}

impl Triplets {
    fn new() -> Triplets {
        Triplets { t: Vec::new(), limit: 12_000_000 }
    }

    #[inline]
    fn push(&mut self, r: u32, c: u32, v: f64) {
        self.t.push((r, c, v));
        if self.t.len() >= self.limit {
            self.compact();
        }
    }

    fn compact(&mut self) {
        self.t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut out = 0usize;
        for i in 0..self.t.len() {
            if out > 0 && self.t[out - 1].0 == self.t[i].0 && self.t[out - 1].1 == self.t[i].1 {
                self.t[out - 1].2 += self.t[i].2;
            } else {
                self.t[out] = self.t[i];
                out += 1;
            }
        }
        self.t.truncate(out);
    }

    fn finish(mut self, nrows: usize, ncols: usize) -> Csr {
        Csr::from_triplets(nrows, ncols, &mut self.t)
    }
}

/// Expand a scalar nodal Gram to the vector-field dof space (node-major,
/// dof(k, j) = k*n + j), acting identically on every component.
pub fn expand_scalar_gram(scalar: &Csr, n: usize) -> Csr {
    let nn = scalar.nrows;
    let mut trip: Vec<(u32, u32, f64)> = Vec::new();
    for k in 0..nn {
        let (cols, vals) = scalar.row(k);
        for (&c, &v) in cols.iter().zip(vals) {
            for j in 0..n {
                trip.push(((k * n + j) as u32, (c as usize * n + j) as u32, v));
            }
        }
    }
    Csr::from_triplets(nn * n, nn * n, &mut trip)
}

/// Assembled quadratic and Gram forms with the H_n constraints and kernel
/// basis of Q_n.
pub struct QuadraticAssembly {
    /// Underlying discretization.
    pub domain: Arc<Domain>,
    /// Q_n as a sparse symmetric form on nodal vector dofs.
    pub q_form: Csr,
    /// W^{1,2} Gram form (componentwise mass + stiffness).
    pub w12_gram: Csr,
    /// L^2 Gram form.
    pub l2_gram: Csr,
    /// Gradient-seminorm Gram form.
    pub seminorm_gram: Csr,
    /// Scalar W^{1,2} Gram shared by the components (for dual norms).
    pub scalar_w12: Csr,
    /// H_n constraint covectors: fint w_j = 0 for each component j, then
    /// fint <w, x> = 0.
    pub constraints: Vec<Vec<f64>>,
    /// W^{1,2}-orthonormalized kernel basis (n(n+1)/2 nodal fields).
    pub kernel_basis: Vec<Vec<f64>>,
}

impl QuadraticAssembly {
    /// Assemble all forms on a domain.
    pub fn assemble(domain: Arc<Domain>) -> Result<QuadraticAssembly, QuadraticsError> {
        let dom = &domain;
        let n = dom.n();
        let nf = n as f64;
        let nd = n - 1;
        let nn = dom.num_nodes();
        let ndof = nn * n;
        let c1 = 0.5 * nf / (nf - 1.0);
        let c2 = nf * (nf - 3.0) / (2.0 * (nf - 1.0) * (nf - 1.0));

        let mut acc = Triplets::new();
        let mut div_cov: Vec<(u32, f64)> = Vec::new();
        let mut cov_a: Vec<(u32, f64)> = Vec::new();
        let mut cov_b: Vec<(u32, f64)> = Vec::new();
        for q in 0..dom.num_quad() {
            let wq = dom.quad_weight(q);
            let x = dom.quad_point(q);
            let (vi, vv) = dom.val_stencil(q);

            // Gradient part: c1 * sum_{i,j} (d_{tau_i} w^j)^2.
            for i in 0..nd {
                let (gi, gw) = dom.grad_stencil(i, q);
                for (a, &ka) in gi.iter().enumerate() {
                    for (b, &kb) in gi.iter().enumerate() {
                        let v = wq * c1 * gw[a] * gw[b];
                        for j in 0..n {
                            acc.push(ka * n as u32 + j as u32, kb * n as u32 + j as u32, v);
                        }
                    }
                }
            }

            // Divergence covector d: div_S w = sum_i <tau_i, d_{tau_i} w>.
            div_cov.clear();
            for i in 0..nd {
                let tau = dom.frame(q, i);
                let (gi, gw) = dom.grad_stencil(i, q);
                for (a, &ka) in gi.iter().enumerate() {
                    for j in 0..n {
                        div_cov.push((ka * n as u32 + j as u32, gw[a] * tau[j]));
                    }
                }
            }
            if c2 != 0.0 {
                for &(r, rv) in &div_cov {
                    for &(c, cv) in &div_cov {
                        acc.push(r, c, wq * c2 * rv * cv);
                    }
                }
            }

            // Pairing term: -n/2 <w, A(w)>, symmetrized. The first piece is
            // <w, x> div_S w, the second is sum_i <w, tau_i><x, d_{tau_i} w>.
            let s = -0.25 * nf * wq;
            cov_a.clear(); // <w, x> covector
            for (a, &ka) in vi.iter().enumerate() {
                for j in 0..n {
                    cov_a.push((ka * n as u32 + j as u32, vv[a] * x[j]));
                }
            }
            for &(r, rv) in &cov_a {
                for &(c, cv) in &div_cov {
                    let v = s * rv * cv;
                    acc.push(r, c, v);
                    acc.push(c, r, v);
                }
            }
            for i in 0..nd {
                let tau = dom.frame(q, i);
                let (gi, gw) = dom.grad_stencil(i, q);
                cov_a.clear(); // <w, tau_i>
                for (a, &ka) in vi.iter().enumerate() {
                    for j in 0..n {
                        cov_a.push((ka * n as u32 + j as u32, vv[a] * tau[j]));
                    }
                }
                cov_b.clear(); // <x, d_{tau_i} w>
                for (a, &ka) in gi.iter().enumerate() {
                    for j in 0..n {
                        cov_b.push((ka * n as u32 + j as u32, gw[a] * x[j]));
                    }
                }
                for &(r, rv) in &cov_a {
                    for &(c, cv) in &cov_b {
                        let v = -s * rv * cv;
                        acc.push(r, c, v);
                        acc.push(c, r, v);
                    }
                }
            }
        }
        let q_form = acc.finish(ndof, ndof);

        let scalar_w12 = functionals::w12_gram_scalar(dom);
        let scalar_l2 = functionals::l2_gram_scalar(dom);
        let scalar_semi = functionals::seminorm_gram_scalar(dom);
        let w12_gram = expand_scalar_gram(&scalar_w12, n);
        let l2_gram = expand_scalar_gram(&scalar_l2, n);
        let seminorm_gram = expand_scalar_gram(&scalar_semi, n);

        // H_n constraint covectors.
        let mut constraints: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut node_weight = vec![0.0; nn];
        let mut radial = vec![0.0; ndof];
        for q in 0..dom.num_quad() {
            let wq = dom.quad_weight(q);
            let x = dom.quad_point(q);
            let (vi, vv) = dom.val_stencil(q);
            for (a, &ka) in vi.iter().enumerate() {
                node_weight[ka as usize] += wq * vv[a];
                for j in 0..n {
                    radial[ka as usize * n + j] += wq * vv[a] * x[j];
                }
            }
        }
        for j in 0..n {
            let mut c = vec![0.0; ndof];
            for k in 0..nn {
                c[k * n + j] = node_weight[k];
            }
            constraints.push(c);
        }
        constraints.push(radial);

        // Kernel basis: rotation fields S x plus centered dilation fields
        // <x, xi> x - xi/n, W^{1,2}-orthonormalized.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let mut s = vec![0.0; n * n];
                s[i * n + j] = 1.0;
                s[j * n + i] = -1.0;
                let field = MoebiusAlgebraField::rotation(s, n);
                basis.push(eval_at_nodes(dom, &field, None));
            }
        }
        for m in 0..n {
            let mut xi = vec![0.0; n];
            xi[m] = 1.0;
            let field = MoebiusAlgebraField::dilation(xi.clone(), 1.0);
            let mut shift = vec![0.0; n];
            shift[m] = (nf - 1.0) / nf;
            basis.push(eval_at_nodes(dom, &field, Some(&shift)));
        }
        // Modified Gram-Schmidt in the W^{1,2} inner product, run twice.
        let mut tmp = vec![0.0; ndof];
        for pass in 0..2 {
            for i in 0..basis.len() {
                for j in 0..i {
                    let (a, b) = index_pair(&mut basis, j, i);
                    w12_gram.matvec(a, &mut tmp);
                    let c: f64 = tmp.iter().zip(b.iter()).map(|(u, v)| u * v).sum();
                    for (bv, av) in b.iter_mut().zip(a.iter()) {
                        *bv -= c * av;
                    }
                }
                w12_gram.matvec(&basis[i], &mut tmp);
                let nrm: f64 =
                    tmp.iter().zip(basis[i].iter()).map(|(u, v)| u * v).sum::<f64>().sqrt();
                if nrm < 1e-12 {
                    return Err(QuadraticsError::IllConditionedBasis(f64::INFINITY));
                }
                basis[i].iter_mut().for_each(|v| *v /= nrm);
                let _ = pass;
            }
        }

        Ok(QuadraticAssembly {
            domain,
            q_form,
            w12_gram,
            l2_gram,
            seminorm_gram,
            scalar_w12,
            constraints,
            kernel_basis: basis,
        })
    }

    /// Number of scalar dofs (num_nodes * n).
    pub fn ndof(&self) -> usize {
        self.q_form.nrows
    }

    /// Q_n(w) through the assembled matrix.
    pub fn q_value(&self, w: &[f64]) -> f64 {
        self.q_form.bilinear(w, w)
    }

    /// Covector Q_n w (the assembled matrix applied to a nodal field).
    pub fn q_apply(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; w.len()];
        self.q_form.matvec(w, &mut out);
        out
    }

    /// W^{1,2} inner product of nodal fields.
    pub fn w12_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.w12_gram.bilinear(a, b)
    }

    /// W^{1,2} norm of a nodal field.
    pub fn w12_norm(&self, a: &[f64]) -> f64 {
        self.w12_inner(a, a).max(0.0).sqrt()
    }

    /// Dual W^{1,2} norm of a covector, solved per component with
    /// preconditioned conjugate gradients on the scalar Gram.
    pub fn dual_w12_norm(&self, cov: &[f64]) -> Result<f64, QuadraticsError> {
        let n = self.domain.n();
        let nn = self.domain.num_nodes();
        let diag = self.scalar_w12.diagonal();
        let mut rhs = vec![0.0; nn];
        let mut z = vec![0.0; nn];
        let mut dual2 = 0.0;
        for j in 0..n {
            for k in 0..nn {
                rhs[k] = cov[k * n + j];
            }
            z.iter_mut().for_each(|v| *v = 0.0);
            let res = conjugate_gradient(
                |x, y| self.scalar_w12.matvec(x, y),
                &rhs,
                &mut z,
                Some(&diag),
                1e-10,
                10 * nn,
            );
            if res.relative_residual > 1e-6 {
                return Err(QuadraticsError::SolverStalled(res.relative_residual));
            }
            dual2 += rhs.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(dual2.max(0.0).sqrt())
    }

    /// Project a nodal field onto H_n by subtracting the componentwise mean
    /// and the mean radial part (repeated to drive the discrete constraint
    /// residuals to roundoff).
    pub fn project_hn(&self, w: &[f64]) -> Vec<f64> {
        let dom = &self.domain;
        let n = dom.n();
        let mut out = w.to_vec();
        for _ in 0..3 {
            let qv = dom.quad_values(&out);
            let mut mean = vec![0.0; n];
            let mut rad = 0.0;
            for q in 0..dom.num_quad() {
                let wq = dom.quad_weight(q);
                let x = dom.quad_point(q);
                for j in 0..n {
                    mean[j] += wq * qv[q * n + j];
                    rad += wq * qv[q * n + j] * x[j];
                }
            }
            for (k, chunk) in out.chunks_mut(n).enumerate() {
                let node = dom.node(k);
                for j in 0..n {
                    chunk[j] -= mean[j] + rad * node[j];
                }
            }
        }
        out
    }

    /// W^{1,2}-orthogonal projection onto the kernel of Q_n: returns
    /// (Pi w, w - Pi w) after first deflating onto H_n. The least-squares
    /// solve uses the small Gram of the stored basis.
    pub fn project_kernel(&self, w: &[f64]) -> Result<(Vec<f64>, Vec<f64>), QuadraticsError> {
        let whn = self.project_hn(w);
        let k = self.kernel_basis.len();
        let mut gram = nalgebra::DMatrix::<f64>::zeros(k, k);
        let mut rhs = nalgebra::DVector::<f64>::zeros(k);
        let mut tmp = vec![0.0; whn.len()];
        for i in 0..k {
            self.w12_gram.matvec(&self.kernel_basis[i], &mut tmp);
            rhs[i] = tmp.iter().zip(whn.iter()).map(|(a, b)| a * b).sum();
            for j in 0..k {
                gram[(i, j)] = tmp.iter().zip(self.kernel_basis[j].iter()).map(|(a, b)| a * b).sum();
            }
        }
        let eig = nalgebra::SymmetricEigen::new(gram.clone());
        let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        if min <= 0.0 || max / min > 1e8 {
            return Err(QuadraticsError::IllConditionedBasis(if min <= 0.0 {
                f64::INFINITY
            } else {
                max / min
            }));
        }
        let coeffs = gram
            .cholesky()
            .ok_or(QuadraticsError::IllConditionedBasis(max / min))?
            .solve(&rhs);
        let mut pi = vec![0.0; whn.len()];
        for i in 0..k {
            for (p, b) in pi.iter_mut().zip(self.kernel_basis[i].iter()) {
                *p += coeffs[i] * b;
            }
        }
        let rem: Vec<f64> = whn.iter().zip(pi.iter()).map(|(a, b)| a - b).collect();
        Ok((pi, rem))
    }
}

/// Evaluate a Moebius algebra field at the domain nodes, optionally adding a
/// constant shift (used to recenter the dilation fields into H_n).
fn eval_at_nodes(dom: &Domain, field: &MoebiusAlgebraField, shift: Option<&[f64]>) -> Vec<f64> {
    let n = dom.n();
    let mut out = vec![0.0; dom.num_nodes() * n];
    let mut buf = vec![0.0; n];
    for k in 0..dom.num_nodes() {
        field.eval(dom.node(k), &mut buf);
        for j in 0..n {
            out[k * n + j] = buf[j] + shift.map_or(0.0, |s| s[j]);
        }
    }
    out
}

/// Borrow two distinct elements mutably/immutably from a slice of vectors.
fn index_pair<'a>(v: &'a mut [Vec<f64>], a: usize, b: usize) -> (&'a [f64], &'a mut Vec<f64>) {
    assert!(a < b);
    let (lo, hi) = v.split_at_mut(b);
    (&lo[a], &mut hi[0])
}

/// Nodal values of a sphere map's displacement from the identity, w = u - id.
pub fn displacement(u: &SphereMap) -> Vec<f64> {
    let dom = u.domain();
    let n = dom.n();
    let mut out = u.values().to_vec();
    for (k, chunk) in out.chunks_mut(n).enumerate() {
        for j in 0..n {
            chunk[j] -= dom.node(k)[j];
        }
    }
    out
}
