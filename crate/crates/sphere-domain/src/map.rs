//! Discrete maps S^{n-1} -> R^n: nodal values on a domain, with lazily
//! computed quadrature values and tangential gradients, and an optional
//! analytic source for exact evaluation at arbitrary points.

use crate::domain::{Domain, DomainError};
use serde_json::{json, Value};
use std::sync::{Arc, OnceLock};

/// Analytic definition of a map, used for exact resampling when available.
pub type MapSource = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A map S^{n-1} -> R^n sampled at the nodes of a domain.
#[derive(Clone)]
pub struct SphereMap {
    domain: Arc<Domain>,
    values: Vec<f64>,
    source: Option<MapSource>,
    quad_vals: OnceLock<Vec<f64>>,
    gradient: OnceLock<Vec<f64>>,
}

impl std::fmt::Debug for SphereMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphereMap")
            .field("n", &self.domain.n())
            .field("num_nodes", &self.domain.num_nodes())
            .field("analytic", &self.source.is_some())
            .finish()
    }
}

impl SphereMap {
    /// Wrap nodal values (num_nodes * n, node-major).
    pub fn from_values(domain: Arc<Domain>, values: Vec<f64>) -> SphereMap {
        assert_eq!(values.len(), domain.num_nodes() * domain.n());
        SphereMap { domain, values, source: None, quad_vals: OnceLock::new(), gradient: OnceLock::new() }
    }

    /// Sample an analytic map at the nodes, keeping the source for exact
    /// evaluation at arbitrary points.
    pub fn from_fn<F>(domain: Arc<Domain>, f: F) -> SphereMap
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let n = domain.n();
        let mut values = vec![0.0; domain.num_nodes() * n];
        let mut out = vec![0.0; n];
        for k in 0..domain.num_nodes() {
            f(domain.node(k), &mut out);
            values[k * n..(k + 1) * n].copy_from_slice(&out);
        }
        SphereMap {
            domain,
            values,
            source: Some(Arc::new(f)),
            quad_vals: OnceLock::new(),
            gradient: OnceLock::new(),
        }
    }

    /// The identity map id_{S^{n-1}}.
    pub fn identity(domain: Arc<Domain>) -> SphereMap {
        let values = domain.nodes_flat().to_vec();
        let mut m = SphereMap::from_values(domain, values);
        m.source = Some(Arc::new(|x: &[f64], out: &mut [f64]| out.copy_from_slice(x)));
        m
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> Option<&MapSource> {
        self.source.as_ref()
    }

    /// Values at quadrature points (num_quad * n), cached.
    pub fn quad_values(&self) -> &[f64] {
        self.quad_vals.get_or_init(|| self.domain.quad_values(&self.values))
    }

    /// Tangential gradient field (num_quad * (n-1) * n), cached; recomputed
    /// from the values on every fresh map, so recomputation is idempotent.
    pub fn tangential_gradient(&self) -> &[f64] {
        self.gradient.get_or_init(|| self.domain.tangential_gradient(&self.values))
    }

    /// Evaluate at an arbitrary unit point: exact via the analytic source
    /// when present, otherwise by local interpolation of the nodal values.
    pub fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        match &self.source {
            Some(f) => f(x, out),
            None => self.domain.evaluate(&self.values, x, out),
        }
    }

    /// Right-composition u o phi for a point transformation phi of the
    /// sphere: resamples u at phi(node) (exactly when u has a source).
    pub fn compose<P>(&self, phi: P) -> SphereMap
    where
        P: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let n = self.n();
        let domain = self.domain.clone();
        let mut values = vec![0.0; domain.num_nodes() * n];
        let mut px = vec![0.0; n];
        let mut out = vec![0.0; n];
        for k in 0..domain.num_nodes() {
            phi(domain.node(k), &mut px);
            self.evaluate(&px, &mut out);
            values[k * n..(k + 1) * n].copy_from_slice(&out);
        }
        let mut composed = SphereMap::from_values(domain, values);
        if let Some(src) = self.source.clone() {
            composed.source = Some(Arc::new(move |x: &[f64], out: &mut [f64]| {
                let mut mid = vec![0.0; x.len()];
                phi(x, &mut mid);
                src(&mid, out);
            }));
        }
        composed
    }

    /// Apply an affine change of values: u -> s*u + c (drops the source
    /// composition only if absent).
    pub fn affine(&self, s: f64, c: &[f64]) -> SphereMap {
        let n = self.n();
        let mut values = self.values.clone();
        for k in 0..self.domain.num_nodes() {
            for j in 0..n {
                values[k * n + j] = s * values[k * n + j] + c[j];
            }
        }
        let mut m = SphereMap::from_values(self.domain.clone(), values);
        if let Some(src) = self.source.clone() {
            let c = c.to_vec();
            m.source = Some(Arc::new(move |x: &[f64], out: &mut [f64]| {
                src(x, out);
                for (o, ci) in out.iter_mut().zip(&c) {
                    *o = s * *o + ci;
                }
            }));
        }
        m
    }

    /// Mean value fint u.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.n();
        let qv = self.quad_values();
        let mut m = vec![0.0; n];
        for q in 0..self.domain.num_quad() {
            let w = self.domain.quad_weight(q);
            for j in 0..n {
                m[j] += w * qv[q * n + j];
            }
        }
        m
    }

    /// Serialize as {"domain": ..., "values": [[f64; n]]}.
    pub fn to_json(&self, domain_ref: Value) -> Value {
        let n = self.n();
        let vals: Vec<Vec<f64>> = (0..self.domain.num_nodes())
            .map(|k| self.values[k * n..(k + 1) * n].to_vec())
            .collect();
        json!({ "domain": domain_ref, "values": vals })
    }

    /// Deserialize; the "domain" field may be an inline domain object or a
    /// path to a JSON file containing one.
    pub fn from_json(v: &Value) -> Result<SphereMap, DomainError> {
        let dv = v
            .get("domain")
            .ok_or_else(|| DomainError::InvalidSerialization("missing domain".into()))?;
        let domain = match dv {
            Value::String(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    DomainError::InvalidSerialization(format!("domain file {path}: {e}"))
                })?;
                let dj: Value = serde_json::from_str(&text)
                    .map_err(|e| DomainError::InvalidSerialization(e.to_string()))?;
                Domain::from_json(&dj)?
            }
            _ => Domain::from_json(dv)?,
        };
        let rows = v
            .get("values")
            .and_then(Value::as_array)
            .ok_or_else(|| DomainError::InvalidSerialization("missing values".into()))?;
        if rows.len() != domain.num_nodes() {
            return Err(DomainError::InvalidSerialization(format!(
                "expected {} value rows, got {}",
                domain.num_nodes(),
                rows.len()
            )));
        }
        let n = domain.n();
        let mut values = Vec::with_capacity(rows.len() * n);
        for row in rows {
            let row = row.as_array().ok_or_else(|| {
                DomainError::InvalidSerialization("values rows must be arrays".into())
            })?;
            if row.len() != n {
                return Err(DomainError::InvalidSerialization(format!(
                    "value row has {} entries, expected {}",
                    row.len(),
                    n
                )));
            }
            for e in row {
                values.push(e.as_f64().ok_or_else(|| {
                    DomainError::InvalidSerialization("values must be numbers".into())
                })?);
            }
        }
        Ok(SphereMap::from_values(Arc::new(domain), values))
    }
}

/// The wedge J(u) of the n-1 tangential derivatives, per quadrature point
/// (num_quad * n). Equals the vector of signed maximal minors of grad_T u.
pub fn jacobian_wedge(u: &SphereMap) -> Vec<f64> {
    let dom = u.domain();
    let n = dom.n();
    let nd = n - 1;
    let g = u.tangential_gradient();
    let mut out = vec![0.0; dom.num_quad() * n];
    for q in 0..dom.num_quad() {
        crate::wedge::wedge(n, &g[q * nd * n..(q + 1) * nd * n], &mut out[q * n..(q + 1) * n]);
    }
    out
}
