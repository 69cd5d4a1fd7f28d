//! Topological degree of (near-)sphere-valued maps via the volume integral,
//! and the sampled local degree field of a map into R^n.

use crate::energy::volume;
use crate::FunctionalError;
use serde::Serialize;
use sphere_domain::SphereMap;

/// Acceptable deviation of |u| from 1 for sphere-valued degree computation.
pub const SPHERE_VALUED_TOL: f64 = 0.05;
/// Acceptable distance of the raw volume estimate from an integer.
pub const DEGREE_TOL: f64 = 0.05;

/// The sampled local degree deg(u, B^n; y) over a grid of target points.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeField {
    /// Sample points in R^n.
    pub points: Vec<Vec<f64>>,
    /// Raw volume estimates of the direction maps (NaN where flagged).
    pub raw: Vec<f64>,
    /// Rounded degrees (0 where flagged).
    pub degree: Vec<i64>,
    /// True where the point is inside the exclusion tube or under-resolved.
    pub flagged: Vec<bool>,
    /// Exclusion tube radius around the image of u.
    pub r_min: f64,
}

/// Degree of a near-sphere-valued map: round(volume(u/|u|)).
pub fn degree_sphere_valued(u: &SphereMap) -> Result<i64, FunctionalError> {
    let n = u.n();
    let vals = u.values();
    let mut unit = vals.to_vec();
    for k in 0..vals.len() / n {
        let nm: f64 = vals[k * n..(k + 1) * n].iter().map(|v| v * v).sum::<f64>().sqrt();
        if (nm - 1.0).abs() > SPHERE_VALUED_TOL {
            return Err(FunctionalError::NotSphereValued(nm));
        }
        for j in 0..n {
            unit[k * n + j] /= nm;
        }
    }
    let raw = volume(&SphereMap::from_values(u.domain().clone(), unit));
    let rounded = raw.round();
    if (raw - rounded).abs() > DEGREE_TOL {
        return Err(FunctionalError::DegreeAmbiguous(raw));
    }
    Ok(rounded as i64)
}

/// Gradient-aware exclusion radius: 3 x (max edge) x (max local gradient
/// norm), where the local norm is the largest directional derivative
/// (the Lipschitz estimate of u over one cell).
pub fn degree_tube_radius(u: &SphereMap) -> f64 {
    let dom = u.domain();
    let n = dom.n();
    let nd = n - 1;
    let g = u.tangential_gradient();
    let mut max_g: f64 = 0.0;
    for q in 0..dom.num_quad() {
        for i in 0..nd {
            let col = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            max_g = max_g.max(col.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
    }
    3.0 * dom.resolution_scale() * max_g
}

/// Local degree at each grid point y: degree of the direction map
/// u_y = (u - y)/|u - y|; points within the exclusion tube are flagged.
pub fn local_degree_field(u: &SphereMap, y_grid: &[Vec<f64>]) -> DegreeField {
    let dom = u.domain();
    let n = dom.n();
    let vals = u.values();
    let num = vals.len() / n;
    let r_min = degree_tube_radius(u);
    let mut raw = Vec::with_capacity(y_grid.len());
    let mut degree = Vec::with_capacity(y_grid.len());
    let mut flagged = Vec::with_capacity(y_grid.len());
    let mut dir = vec![0.0; vals.len()];
    for y in y_grid {
        let mut min_d = f64::INFINITY;
        for k in 0..num {
            let d: f64 = (0..n).map(|j| (vals[k * n + j] - y[j]).powi(2)).sum::<f64>().sqrt();
            min_d = min_d.min(d);
            for j in 0..n {
                dir[k * n + j] = (vals[k * n + j] - y[j]) / d;
            }
        }
        if min_d < r_min {
            raw.push(f64::NAN);
            degree.push(0);
            flagged.push(true);
            continue;
        }
        let r = volume(&SphereMap::from_values(dom.clone(), dir.clone()));
        let rounded = r.round();
        raw.push(r);
        degree.push(rounded as i64);
        flagged.push((r - rounded).abs() > DEGREE_TOL);
    }
    DegreeField { points: y_grid.to_vec(), raw, degree, flagged, r_min }
}
