//! The Lie algebra of the Mobius group: vector fields
//! X_{S,xi,mu}(x) = S x + mu (<x,xi> x - xi) on S^{n-1}.
//!
//! Sign convention: the dilation part with mu = +1 is the derivative
//! d/dt|_{t=0} phi_{xi, e^t}(x) = <x,xi> x - xi, fixed against a
//! finite-difference oracle on the closed form.

use sphere_domain::{Domain, SphereMap};
use std::sync::Arc;

/// An infinitesimal Mobius transformation.
#[derive(Debug, Clone)]
pub struct MoebiusAlgebraField {
    /// Skew-symmetric n x n matrix, row-major.
    pub s: Vec<f64>,
    /// Unit axis of the dilation part.
    pub xi: Vec<f64>,
    /// Dilation strength; +1 generates phi_{xi, e^t}.
    pub mu: f64,
}

impl MoebiusAlgebraField {
    pub fn new(s: Vec<f64>, xi: Vec<f64>, mu: f64) -> MoebiusAlgebraField {
        let n = xi.len();
        assert_eq!(s.len(), n * n);
        for i in 0..n {
            for j in 0..n {
                assert!((s[i * n + j] + s[j * n + i]).abs() < 1e-12, "S must be skew");
            }
        }
        MoebiusAlgebraField { s, xi, mu }
    }

    /// Pure rotation field x -> S x.
    pub fn rotation(s: Vec<f64>, n: usize) -> MoebiusAlgebraField {
        let mut xi = vec![0.0; n];
        xi[n - 1] = 1.0;
        MoebiusAlgebraField::new(s, xi, 0.0)
    }

    /// Pure dilation field x -> mu (<x,xi> x - xi).
    pub fn dilation(xi: Vec<f64>, mu: f64) -> MoebiusAlgebraField {
        let n = xi.len();
        MoebiusAlgebraField::new(vec![0.0; n * n], xi, mu)
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        let c: f64 = x.iter().zip(&self.xi).map(|(a, b)| a * b).sum();
        for i in 0..n {
            let mut v = self.mu * (c * x[i] - self.xi[i]);
            for j in 0..n {
                v += self.s[i * n + j] * x[j];
            }
            out[i] = v;
        }
    }
}

/// Evaluate the field at the nodes of a domain.
pub fn algebra_field(field: &MoebiusAlgebraField, domain: Arc<Domain>) -> SphereMap {
    let f = field.clone();
    SphereMap::from_fn(domain, move |x, out| f.eval(x, out))
}

/// The standard basis of mob(S^{n-1}): elementary rotations E_ij (i < j)
/// followed by unit dilations along each coordinate axis; n(n+1)/2 fields.
pub fn algebra_basis(n: usize) -> Vec<MoebiusAlgebraField> {
    let mut basis = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let mut s = vec![0.0; n * n];
            s[i * n + j] = 1.0;
            s[j * n + i] = -1.0;
            basis.push(MoebiusAlgebraField::rotation(s, n));
        }
    }
    for k in 0..n {
        let mut xi = vec![0.0; n];
        xi[k] = 1.0;
        basis.push(MoebiusAlgebraField::dilation(xi, 1.0));
    }
    basis
}
