//! The quadrature-capable discretization of S^{n-1} shared by every
//! downstream computation: nodal points carrying values, quadrature points
//! with weights and positively oriented tangent frames, and sparse stencils
//! mapping nodal values to per-quadrature-point values and tangential
//! gradients.

use crate::sparse::Csr;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("subdivision level {0} out of range [0, 8]")]
    LevelOutOfRange(u32),
    #[error("ambient dimension {0} out of range [3, 5]")]
    DimensionOutOfRange(usize),
    #[error("resolution {0} out of range (must be >= 8)")]
    ResolutionOutOfRange(u32),
    #[error("invalid domain serialization: {0}")]
    InvalidSerialization(String),
}

/// Which discretization backs the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    /// Icosphere triangle mesh (n = 3 only).
    Mesh { subdivision_level: u32 },
    /// Dual stereographic chart grids (n in 3..=5).
    Chart { resolution: u32 },
}

/// Mesh-specific data kept for resampling and refinement bookkeeping.
#[derive(Debug, Clone)]
pub struct MeshData {
    pub faces: Vec<[u32; 3]>,
    pub face_areas: Vec<f64>,
    /// Per-face reconstruction stencil (vertex indices).
    pub stencils: Vec<Vec<u32>>,
    /// Per-face pseudo-inverse of the basis matrix, NUM_BASIS x stencil_len
    /// row-major; maps stencil values to polynomial coefficients.
    pub fit: Vec<Vec<f64>>,
    pub max_edge: f64,
}

/// Chart-specific data kept for interpolation and finite differences.
#[derive(Debug, Clone)]
pub struct ChartData {
    pub resolution: u32,
    /// Per node: chart id (0 = north pole e_n, 1 = south pole -e_n).
    pub chart_of: Vec<u8>,
    /// Per node: flattened grid index within its chart.
    pub cell_of: Vec<u32>,
    /// Dense grid lookup per chart: res^(n-1) entries, -1 where no node.
    pub lookup: [Vec<i32>; 2],
    /// Conformal factor rho(y) = 2/(1+|y|^2) per node.
    pub rho: Vec<f64>,
    /// Sum of raw (unnormalized) weights divided by the exact sphere area.
    pub raw_weight_ratio: f64,
}

/// A discretized sphere S^{n-1} with quadrature, frames and stencils.
#[derive(Debug, Clone)]
pub struct Domain {
    pub(crate) n: usize,
    pub(crate) backend: BackendKind,
    /// Nodal points carrying map values, num_nodes * n.
    pub(crate) nodes: Vec<f64>,
    /// Quadrature points, num_quad * n.
    pub(crate) quad_x: Vec<f64>,
    /// Normalized quadrature weights (sum 1).
    pub(crate) quad_w: Vec<f64>,
    /// Tangent frames tau_1..tau_{n-1} per quadrature point,
    /// num_quad * (n-1) * n.
    pub(crate) frames: Vec<f64>,
    /// Value stencil: num_quad x num_nodes.
    pub(crate) val_st: Csr,
    /// Gradient stencils, one per frame direction; each num_quad x num_nodes.
    /// Row q of grad_st[i] gives the weights of d/d tau_i at quadrature
    /// point q (identical for every value component).
    pub(crate) grad_st: Vec<Csr>,
    /// Resolution scale (max edge length / grid spacing).
    pub(crate) h: f64,
    pub(crate) mesh: Option<MeshData>,
    pub(crate) chart: Option<ChartData>,
}

impl Domain {
    /// Ambient dimension n (maps go S^{n-1} -> R^n).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> BackendKind {
        self.backend
    }

    /// Number of nodal points carrying map values.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len() / self.n
    }

    /// Number of quadrature points.
    pub fn num_quad(&self) -> usize {
        self.quad_w.len()
    }

    /// Resolution scale: max mesh edge length or chart grid spacing.
    pub fn resolution_scale(&self) -> f64 {
        self.h
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.n..(k + 1) * self.n]
    }

    pub fn nodes_flat(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quad_point(&self, q: usize) -> &[f64] {
        &self.quad_x[q * self.n..(q + 1) * self.n]
    }

    pub fn quad_weight(&self, q: usize) -> f64 {
        self.quad_w[q]
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_w
    }

    /// Tangent vector tau_i at quadrature point q.
    pub fn frame(&self, q: usize, i: usize) -> &[f64] {
        let base = (q * (self.n - 1) + i) * self.n;
        &self.frames[base..base + self.n]
    }

    pub fn val_stencil(&self, q: usize) -> (&[u32], &[f64]) {
        self.val_st.row(q)
    }

    pub fn grad_stencil(&self, i: usize, q: usize) -> (&[u32], &[f64]) {
        self.grad_st[i].row(q)
    }

    pub fn mesh_data(&self) -> Option<&MeshData> {
        self.mesh.as_ref()
    }

    pub fn chart_data(&self) -> Option<&ChartData> {
        self.chart.as_ref()
    }

    /// Normalized average of a scalar field sampled at quadrature points.
    pub fn fint(&self, field: &[f64]) -> f64 {
        debug_assert_eq!(field.len(), self.num_quad());
        self.quad_w.iter().zip(field).map(|(w, f)| w * f).sum()
    }

    /// Normalized average of the pointwise inner product of two vector
    /// fields sampled at quadrature points (num_quad * n each).
    pub fn fint_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for q in 0..self.num_quad() {
            let mut d = 0.0;
            for j in 0..n {
                d += a[q * n + j] * b[q * n + j];
            }
            s += self.quad_w[q] * d;
        }
        s
    }

    /// Values of a nodal field at quadrature points, num_quad * n.
    pub fn quad_values(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(values.len(), self.num_nodes() * n);
        let mut out = vec![0.0; self.num_quad() * n];
        for q in 0..self.num_quad() {
            let (idx, wts) = self.val_st.row(q);
            for (&k, &w) in idx.iter().zip(wts) {
                let base = k as usize * n;
                for j in 0..n {
                    out[q * n + j] += w * values[base + j];
                }
            }
        }
        out
    }

    /// Tangential gradient of a nodal field: num_quad * (n-1) * n, with the
    /// derivative along tau_i at quadrature point q stored contiguously at
    /// [q*(n-1)*n + i*n ..]. This is the n x (n-1) matrix field in the frame.
    pub fn tangential_gradient(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let nd = n - 1;
        debug_assert_eq!(values.len(), self.num_nodes() * n);
        let mut out = vec![0.0; self.num_quad() * nd * n];
        for i in 0..nd {
            let st = &self.grad_st[i];
            for q in 0..self.num_quad() {
                let (idx, wts) = st.row(q);
                let base = (q * nd + i) * n;
                for (&k, &w) in idx.iter().zip(wts) {
                    let vbase = k as usize * n;
                    for j in 0..n {
                        out[base + j] += w * values[vbase + j];
                    }
                }
            }
        }
        out
    }

    /// W^{1,2} inner product of two nodal fields:
    /// fint <a,b> + fint grad a : grad b.
    pub fn w12_product(&self, a: &[f64], b: &[f64]) -> f64 {
        let va = self.quad_values(a);
        let vb = self.quad_values(b);
        let ga = self.tangential_gradient(a);
        let gb = self.tangential_gradient(b);
        self.w12_product_precomputed(&va, &ga, &vb, &gb)
    }

    /// W^{1,2} product from precomputed quadrature values and gradients.
    pub fn w12_product_precomputed(
        &self,
        va: &[f64],
        ga: &[f64],
        vb: &[f64],
        gb: &[f64],
    ) -> f64 {
        let n = self.n;
        let nd = n - 1;
        let mut s = 0.0;
        for q in 0..self.num_quad() {
            let mut d = 0.0;
            for j in 0..n {
                d += va[q * n + j] * vb[q * n + j];
            }
            for k in 0..nd * n {
                d += ga[q * nd * n + k] * gb[q * nd * n + k];
            }
            s += self.quad_w[q] * d;
        }
        s
    }

    /// Evaluate a nodal field at an arbitrary unit point by local
    /// interpolation (quadratic fit on the mesh, multilinear on charts).
    pub fn evaluate(&self, values: &[f64], x: &[f64], out: &mut [f64]) {
        if self.mesh.is_some() {
            crate::mesh::evaluate(self, values, x, out);
        } else {
            crate::chart::evaluate(self, values, x, out);
        }
    }

    /// Serialize to the JSON interchange form.
    pub fn to_json(&self) -> Value {
        match self.backend {
            BackendKind::Mesh { subdivision_level } => {
                let md = self.mesh.as_ref().unwrap();
                let verts: Vec<Vec<f64>> =
                    (0..self.num_nodes()).map(|k| self.node(k).to_vec()).collect();
                let faces: Vec<Vec<u32>> = md.faces.iter().map(|f| f.to_vec()).collect();
                json!({
                    "n": self.n,
                    "backend": "mesh",
                    "level": subdivision_level,
                    "vertices": verts,
                    "faces": faces,
                })
            }
            BackendKind::Chart { resolution } => {
                let nodes: Vec<Vec<f64>> =
                    (0..self.num_nodes()).map(|k| self.node(k).to_vec()).collect();
                json!({
                    "n": self.n,
                    "backend": "chart",
                    "resolution": resolution,
                    "nodes": nodes,
                    "weights": self.quad_w,
                })
            }
        }
    }

    /// Rebuild a domain from its JSON interchange form.
    pub fn from_json(v: &Value) -> Result<Domain, DomainError> {
        let backend = v
            .get("backend")
            .and_then(Value::as_str)
            .ok_or_else(|| DomainError::InvalidSerialization("missing backend".into()))?;
        match backend {
            "mesh" => {
                let level = v
                    .get("level")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| DomainError::InvalidSerialization("missing level".into()))?;
                crate::mesh::build_icosphere(level as u32)
            }
            "chart" => {
                let n = v
                    .get("n")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| DomainError::InvalidSerialization("missing n".into()))?;
                let res = v.get("resolution").and_then(Value::as_u64).ok_or_else(|| {
                    DomainError::InvalidSerialization("missing resolution".into())
                })?;
                crate::chart::build_chart_grid(n as usize, res as u32)
            }
            other => Err(DomainError::InvalidSerialization(format!(
                "unknown backend {other:?}"
            ))),
        }
    }
}

pub(crate) fn normalize(v: &mut [f64]) {
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}
