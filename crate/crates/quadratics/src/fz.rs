//! Pointwise margin of the Figalli-Zhang algebraic lower bound with
//! X = P_T and Y = grad_T w,
//!   |X+Y|^{n-1} >= |X|^{n-1} + (n-1)|X|^{n-3} X:Y + c |Y|^{n-1}
//!     + (1-kappa)(n-1)/2 [ |X|^{n-3}|Y|^2
//!                          + (n-3)|M(X,Y)|^{n-3}(|X| - |X+Y|)^2 ],
//! and the integrated residual of the induced lower expansion of the
//! Dirichlet energy. Negative margins are data: they signal that the
//! candidate constant c is too large for the given kappa.

use functionals::dirichlet_energy;
use sphere_domain::SphereMap;

/// Margin data of the pointwise inequality for one field.
#[derive(Debug, Clone)]
pub struct FzMargin {
    /// kappa used.
    pub kappa: f64,
    /// Candidate constant in front of |Y|^{n-1}.
    pub c_candidate: f64,
    /// Pointwise margins at the quadrature points.
    pub margins: Vec<f64>,
    /// Smallest pointwise margin.
    pub min_margin: f64,
    /// Residual of the integrated lower bound on the Dirichlet energy:
    /// D_{n-1}(id + w) minus the expansion side (normalized measure).
    pub integrated_residual: f64,
}

/// |M(X,Y)|^{n-3} with |X|^2 = n-1 and |X+Y|^2 = f2. M = X when
/// |X| <= |X+Y|, else (|X+Y|/|X|)^{1/(n-3)} (X+Y).
fn m_weight(n: usize, f2: f64) -> f64 {
    let p2 = (n - 1) as f64;
    if f2 >= p2 {
        p2.powf(0.5 * (n as f64 - 3.0))
    } else {
        // |M|^{n-3} = (|X+Y|/|X|) |X+Y|^{n-3} = f2^{(n-2)/2} / sqrt(n-1).
        f2.powf(0.5 * (n as f64 - 2.0)) / p2.sqrt()
    }
}

/// Evaluate the pointwise margin field for a displacement `w`, a parameter
/// kappa in (0,1), and a candidate constant c > 0.
pub fn fz_lower_expansion(w: &SphereMap, kappa: f64, c_candidate: f64) -> FzMargin {
    assert!(kappa > 0.0 && kappa < 1.0, "kappa must lie in (0,1)");
    let dom = w.domain();
    let n = dom.n();
    let nf = n as f64;
    let nd = n - 1;
    let p2 = nf - 1.0;
    let g = w.tangential_gradient();
    let mut margins = Vec::with_capacity(dom.num_quad());
    let mut min_margin = f64::INFINITY;
    let mut integral = 0.0;
    for q in 0..dom.num_quad() {
        let mut f2 = 0.0;
        let mut y2 = 0.0;
        let mut xy = 0.0;
        for i in 0..nd {
            let tau = dom.frame(q, i);
            let col = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            for j in 0..n {
                f2 += (tau[j] + col[j]).powi(2);
                y2 += col[j] * col[j];
            }
            xy += tau.iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
        }
        let lead = f2.powf(0.5 * (nf - 1.0))
            - p2.powf(0.5 * (nf - 1.0))
            - (nf - 1.0) * p2.powf(0.5 * (nf - 3.0)) * xy
            - c_candidate * y2.powf(0.5 * (nf - 1.0));
        let stretch = p2.sqrt() - f2.sqrt();
        let quad = 0.5 * (1.0 - kappa) * (nf - 1.0)
            * (p2.powf(0.5 * (nf - 3.0)) * y2 + (nf - 3.0) * m_weight(n, f2) * stretch * stretch);
        let m = lead - quad;
        min_margin = min_margin.min(m);
        margins.push(m);
        integral += dom.quad_weight(q) * m;
    }
    // Dividing the integrated margin by (n-1)^{(n-1)/2} turns the left-hand
    // side into the Dirichlet integrand of id + w, so the integral is the
    // residual of the expanded lower bound on D_{n-1}(id + w). Re-derive it
    // through the energy functional for an independent cross-check in tests.
    let integrated_residual = integral / p2.powf(0.5 * (nf - 1.0));
    FzMargin { kappa, c_candidate, margins, min_margin, integrated_residual }
}

/// Residual of the integrated bound computed the long way round (through
/// the Dirichlet energy), for cross-checking the margin integral.
pub fn fz_integrated_residual(w: &SphereMap, kappa: f64, c_candidate: f64) -> f64 {
    let dom = w.domain();
    let n = dom.n();
    let nf = n as f64;
    let nd = n - 1;
    let p2 = nf - 1.0;
    let g = w.tangential_gradient();
    let u = {
        let mut vals = w.values().to_vec();
        for (k, v) in vals.chunks_mut(n).enumerate() {
            for j in 0..n {
                v[j] += dom.node(k)[j];
            }
        }
        SphereMap::from_values(dom.clone(), vals)
    };
    let mut lin = 0.0;
    let mut y2i = 0.0;
    let mut yn1 = 0.0;
    let mut extra = 0.0;
    for q in 0..dom.num_quad() {
        let wq = dom.quad_weight(q);
        let mut f2 = 0.0;
        let mut y2 = 0.0;
        let mut xy = 0.0;
        for i in 0..nd {
            let tau = dom.frame(q, i);
            let col = &g[(q * nd + i) * n..(q * nd + i + 1) * n];
            for j in 0..n {
                f2 += (tau[j] + col[j]).powi(2);
                y2 += col[j] * col[j];
            }
            xy += tau.iter().zip(col).map(|(a, b)| a * b).sum::<f64>();
        }
        lin += wq * xy;
        y2i += wq * y2;
        yn1 += wq * y2.powf(0.5 * (nf - 1.0));
        let s = p2.sqrt() - f2.sqrt();
        let nw = if f2 >= p2 { 1.0 } else { (f2 / p2).powf(0.5 * (nf - 2.0)) };
        extra += wq * nw * s * s;
    }
    dirichlet_energy(&u)
        - 1.0
        - lin
        - 0.5 * (1.0 - kappa) * y2i
        - c_candidate / p2.powf(0.5 * (nf - 1.0)) * yn1
        - 0.5 * (1.0 - kappa) * (nf - 3.0) * extra
}

/// Largest constant c for which the pointwise margin stays nonnegative over
/// a corpus of fields, found by bisection. Returns 0 if even a vanishing
/// constant fails (should not happen for kappa in (0,1)).
pub fn fz_bisect_constant(corpus: &[SphereMap], kappa: f64, iterations: usize) -> f64 {
    let ok = |c: f64| {
        corpus
            .iter()
            .all(|w| fz_lower_expansion(w, kappa, c).min_margin >= 0.0)
    };
    if !ok(0.0) {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut grow = 0;
    while ok(hi) && grow < 24 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
    }
    if grow == 24 {
        return lo;
    }
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
