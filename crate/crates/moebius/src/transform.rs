//! Mobius transformations of S^{n-1} in the canonical form O * phi_{xi,lambda},
//! where phi_{xi,lambda} conjugates the dilation y -> lambda*y by the
//! stereographic projection from -xi.
//!
//! Composition and inversion go through the representation of the Mobius
//! group as the orthochronous Lorentz group O(n,1) acting projectively on the
//! sphere: phi_{xi,lambda} corresponds to the boost of rapidity t = -ln lambda
//! along xi, and O to a spatial rotation block. Products and inverses are
//! then exact matrix operations followed by a canonical parameter extraction.

use nalgebra::DMatrix;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MoebiusError {
    #[error("stereographic projection singular: point within 1e-8 of the co-pole")]
    PoleSingular,
    #[error("parameter recovery failed: {0}")]
    FitFailed(String),
    #[error("invalid transform serialization: {0}")]
    InvalidSerialization(String),
}

/// A Mobius transformation O * phi_{xi,lambda} of S^{n-1}.
#[derive(Debug, Clone)]
pub struct MoebiusTransform {
    o: DMatrix<f64>,
    xi: Vec<f64>,
    lambda: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nm = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= nm;
    }
    nm
}

/// The closed-form conformal dilation phi_{xi,lambda}(x), prior to any
/// rotation. Fixed points: phi(xi) = xi, phi(-xi) = -xi.
pub fn phi_point(xi: &[f64], lambda: f64, x: &[f64], out: &mut [f64]) {
    let c = dot(x, xi);
    let l2 = lambda * lambda;
    let den = l2 * (1.0 - c) + (1.0 + c);
    let a = (-l2 * (1.0 - c) - 2.0 * lambda * c + (1.0 + c)) / den;
    let b = 2.0 * lambda / den;
    for j in 0..x.len() {
        out[j] = a * xi[j] + b * x[j];
    }
}

impl MoebiusTransform {
    /// Construct from the canonical parameters, validating the invariants.
    pub fn new(o: DMatrix<f64>, mut xi: Vec<f64>, lambda: f64) -> MoebiusTransform {
        let n = xi.len();
        assert_eq!(o.nrows(), n);
        assert_eq!(o.ncols(), n);
        assert!(lambda > 0.0, "lambda must be positive");
        let ortho = (o.transpose() * &o - DMatrix::identity(n, n)).norm();
        assert!(ortho < 1e-8, "O must be orthogonal (defect {ortho})");
        let nm = normalize(&mut xi);
        assert!((nm - 1.0).abs() < 1e-6, "xi must be a unit vector");
        MoebiusTransform { o, xi, lambda }
    }

    /// The identity transform on S^{n-1}.
    pub fn identity(n: usize) -> MoebiusTransform {
        let mut xi = vec![0.0; n];
        xi[n - 1] = 1.0;
        MoebiusTransform { o: DMatrix::identity(n, n), xi, lambda: 1.0 }
    }

    /// The pure conformal dilation phi_{xi,lambda}.
    pub fn dilation(xi: Vec<f64>, lambda: f64) -> MoebiusTransform {
        let n = xi.len();
        MoebiusTransform::new(DMatrix::identity(n, n), xi, lambda)
    }

    /// The pure rotation x -> O x.
    pub fn rotation(o: DMatrix<f64>) -> MoebiusTransform {
        let n = o.nrows();
        let mut xi = vec![0.0; n];
        xi[n - 1] = 1.0;
        MoebiusTransform::new(o, xi, 1.0)
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn o(&self) -> &DMatrix<f64> {
        &self.o
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_orientation_reversing(&self) -> bool {
        self.o.determinant() < 0.0
    }

    /// Evaluate at a unit point; the result is renormalized (drift from unit
    /// length before renormalization is at rounding level).
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        let mut p = vec![0.0; n];
        phi_point(&self.xi, self.lambda, x, &mut p);
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.o[(i, j)] * p[j];
            }
            out[i] = s;
        }
        normalize(out);
    }

    /// Norm drift of the closed form before renormalization, for diagnostics.
    pub fn apply_drift(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut p = vec![0.0; n];
        phi_point(&self.xi, self.lambda, x, &mut p);
        (dot(&p, &p).sqrt() - 1.0).abs()
    }

    /// The Lorentz boost of rapidity t along xi, an (n+1)x(n+1) matrix.
    fn boost(xi: &[f64], t: f64) -> DMatrix<f64> {
        let n = xi.len();
        let (ch, sh) = (t.cosh(), t.sinh());
        let mut b = DMatrix::identity(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] += (ch - 1.0) * xi[i] * xi[j];
            }
            b[(i, n)] = sh * xi[i];
            b[(n, i)] = sh * xi[i];
        }
        b[(n, n)] = ch;
        b
    }

    /// The Lorentz representative: diag(O,1) * B(xi, -ln lambda).
    pub fn to_lorentz(&self) -> DMatrix<f64> {
        let n = self.n();
        let b = Self::boost(&self.xi, -self.lambda.ln());
        let mut rot = DMatrix::identity(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                rot[(i, j)] = self.o[(i, j)];
            }
        }
        rot * b
    }

    /// Canonical parameters from a Lorentz matrix. Uses the identity
    /// phi_{xi,lambda} = phi_{-xi,1/lambda} to keep lambda in (0, 1]; at
    /// lambda = 1 the axis is degenerate and canonicalized to e_n.
    pub fn from_lorentz(lam: &DMatrix<f64>) -> Result<MoebiusTransform, MoebiusError> {
        let n = lam.nrows() - 1;
        let corner = lam[(n, n)];
        if !(corner.is_finite() && corner >= 1.0 - 1e-8) {
            return Err(MoebiusError::FitFailed(format!(
                "non-orthochronous corner entry {corner}"
            )));
        }
        // Rapidity from the bottom-row norm (asinh is well-conditioned near
        // the identity, unlike acosh at 1).
        let sh = (0..n).map(|j| lam[(n, j)] * lam[(n, j)]).sum::<f64>().sqrt();
        let t = sh.asinh();
        let (xi, lambda) = if sh < 1e-12 {
            let mut xi = vec![0.0; n];
            xi[n - 1] = 1.0;
            (xi, 1.0)
        } else {
            let mut xi: Vec<f64> = (0..n).map(|j| lam[(n, j)] / sh).collect();
            normalize(&mut xi);
            (xi, (-t).exp())
        };
        let undo = Self::boost(&xi, -t);
        let prod = lam * undo;
        let mut o = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                o[(i, j)] = prod[(i, j)];
            }
        }
        // Re-orthogonalize by polar decomposition to absorb rounding.
        let svd = o.clone().svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let o = u * vt;
        let result = MoebiusTransform::new(o, xi, lambda);
        let residual = (result.to_lorentz() - lam).norm() / lam.norm();
        if residual > 1e-6 {
            return Err(MoebiusError::FitFailed(format!(
                "parameter extraction residual {residual}"
            )));
        }
        Ok(result)
    }

    /// Composition self after other: (self . other)(x) = self(other(x)).
    pub fn compose(&self, other: &MoebiusTransform) -> Result<MoebiusTransform, MoebiusError> {
        Self::from_lorentz(&(self.to_lorentz() * other.to_lorentz()))
    }

    /// Group inverse, via the Lorentz inverse eta * Lambda^T * eta.
    pub fn inverse(&self) -> Result<MoebiusTransform, MoebiusError> {
        let n = self.n();
        let lam = self.to_lorentz();
        let mut inv = lam.transpose();
        for i in 0..n {
            inv[(i, n)] = -inv[(i, n)];
            inv[(n, i)] = -inv[(n, i)];
        }
        Self::from_lorentz(&inv)
    }

    /// Recover the transform from sampled point pairs (x_k, y_k = phi(x_k)).
    /// Solves the homogeneous linear system expressing that the Lorentz
    /// matrix maps (x,1) parallel to (y,1), then rescales to O(n,1).
    pub fn from_point_action(pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<MoebiusTransform, MoebiusError> {
        let n = pairs
            .first()
            .ok_or_else(|| MoebiusError::FitFailed("no point pairs".into()))?
            .0
            .len();
        let m = n + 1;
        let cols = m * m;
        let rows = pairs.len() * n;
        if rows + 1 < cols {
            return Err(MoebiusError::FitFailed(format!(
                "need at least {} pairs, got {}",
                (cols + n - 1) / n,
                pairs.len()
            )));
        }
        // Row for pair (x,y), output i < n: Lam_i . (x,1) - y_i * Lam_n . (x,1) = 0.
        let mut a = DMatrix::zeros(rows, cols);
        for (p, (x, y)) in pairs.iter().enumerate() {
            let mut hx = vec![0.0; m];
            hx[..n].copy_from_slice(x);
            hx[n] = 1.0;
            for i in 0..n {
                let row = p * n + i;
                for (c, &hxc) in hx.iter().enumerate() {
                    a[(row, i * m + c)] += hxc;
                    a[(row, n * m + c)] -= y[i] * hxc;
                }
            }
        }
        let svd = a.svd(false, true);
        let vt = svd.v_t.unwrap();
        let null = vt.row(vt.nrows() - 1);
        let mut lam = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                lam[(i, j)] = null[i * m + j];
            }
        }
        // Rescale so Lam^T eta Lam = eta (Gram must already be proportional).
        let mut eta = DMatrix::identity(m, m);
        eta[(n, n)] = -1.0;
        let gram = lam.transpose() * &eta * &lam;
        let c = (0..n).map(|i| gram[(i, i)]).sum::<f64>() / n as f64;
        if c <= 0.0 {
            return Err(MoebiusError::FitFailed("degenerate point action".into()));
        }
        let defect = (&gram / c - &eta).norm();
        if defect > 1e-5 {
            return Err(MoebiusError::FitFailed(format!(
                "action is not Mobius (Gram defect {defect})"
            )));
        }
        lam /= c.sqrt();
        if lam[(n, n)] < 0.0 {
            lam = -lam;
        }
        Self::from_lorentz(&lam)
    }

    /// Serialize as {"O": [[...]], "xi": [...], "lambda": f64}.
    pub fn to_json(&self) -> Value {
        let n = self.n();
        let o: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| self.o[(i, j)]).collect()).collect();
        json!({ "O": o, "xi": self.xi, "lambda": self.lambda })
    }

    pub fn from_json(v: &Value) -> Result<MoebiusTransform, MoebiusError> {
        let bad = |m: &str| MoebiusError::InvalidSerialization(m.into());
        let o_rows = v.get("O").and_then(Value::as_array).ok_or_else(|| bad("missing O"))?;
        let n = o_rows.len();
        let mut o = DMatrix::zeros(n, n);
        for (i, row) in o_rows.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| bad("O rows must be arrays"))?;
            if row.len() != n {
                return Err(bad("O must be square"));
            }
            for (j, e) in row.iter().enumerate() {
                o[(i, j)] = e.as_f64().ok_or_else(|| bad("O entries must be numbers"))?;
            }
        }
        let xi: Vec<f64> = v
            .get("xi")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing xi"))?
            .iter()
            .map(|e| e.as_f64().ok_or_else(|| bad("xi entries must be numbers")))
            .collect::<Result<_, _>>()?;
        if xi.len() != n {
            return Err(bad("xi length must match O"));
        }
        let lambda = v
            .get("lambda")
            .and_then(Value::as_f64)
            .ok_or_else(|| bad("missing lambda"))?;
        if !(lambda > 0.0) {
            return Err(bad("lambda must be positive"));
        }
        Ok(MoebiusTransform::new(o, xi, lambda))
    }

    /// The conformal factor of phi_{xi,lambda} at x (the O part is an
    /// isometry): mu(x) = lambda * (1 + |y|^2) / (1 + lambda^2 |y|^2) with
    /// |y|^2 = (1-c)/(1+c), c = <x, xi>.
    pub fn conformal_factor(&self, x: &[f64]) -> f64 {
        let c = dot(x, &self.xi).clamp(-1.0, 1.0);
        let l2 = self.lambda * self.lambda;
        // lambda (1 + y2) / (1 + l2 y2) with y2 = (1-c)/(1+c); multiply
        // through by (1+c) to stay finite at the co-pole.
        2.0 * self.lambda / ((1.0 + c) + l2 * (1.0 - c))
    }

    fn as_closure(&self) -> impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static {
        let t = self.clone();
        move |x: &[f64], out: &mut [f64]| t.apply(x, out)
    }

    /// A boxed evaluation closure, convenient for map composition.
    pub fn closure(&self) -> Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync> {
        Box::new(self.as_closure())
    }
}
