//! Minimal sparse-matrix support: CSR storage, triplet assembly and a
//! Jacobi-preconditioned conjugate-gradient solver for SPD operators.

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Build from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &mut Vec<(u32, u32, f64)>) -> Csr {
        triplets.sort_unstable_by_key(|&(r, c, _)| ((r as u64) << 32) | c as u64);
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::new();
        let mut data: Vec<f64> = Vec::new();
        let mut last: Option<(u32, u32)> = None;
        for &(r, c, v) in triplets.iter() {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Csr { nrows, ncols, indptr, indices, data }
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                s += v * x[c as usize];
            }
            y[i] = s;
        }
    }

    /// y += s * A x.
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64], s: f64) {
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c as usize];
            }
            y[i] += s * acc;
        }
    }

    /// Quadratic form x^t A y.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * y[c as usize];
            }
            s += x[i] * acc;
        }
        s
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if c as usize == i {
                    d[i] += v;
                }
            }
        }
        d
    }

    /// Maximum relative asymmetry |A - A^t| / max|A|, for assembly checks.
    pub fn asymmetry(&self) -> f64 {
        let mut max_entry: f64 = 0.0;
        for &v in &self.data {
            max_entry = max_entry.max(v.abs());
        }
        if max_entry == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let vt = self.get(c as usize, i);
                worst = worst.max((v - vt).abs());
            }
        }
        worst / max_entry
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }
}

/// Result of a conjugate-gradient solve.
pub struct CgResult {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solve A x = b for an SPD operator given as a closure, with an optional
/// diagonal (Jacobi) preconditioner. `x` holds the initial guess on entry and
/// the solution on exit.
pub fn conjugate_gradient<F>(
    apply: F,
    b: &[f64],
    x: &mut [f64],
    diag: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> CgResult
where
    F: Fn(&[f64], &mut [f64]),
{
    let m = b.len();
    let mut r = vec![0.0; m];
    let mut z = vec![0.0; m];
    let mut p = vec![0.0; m];
    let mut ap = vec![0.0; m];

    apply(x, &mut r);
    for i in 0..m {
        r[i] = b[i] - r[i];
    }
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let prec = |r: &[f64], z: &mut [f64]| match diag {
        Some(d) => {
            for i in 0..m {
                z[i] = if d[i].abs() > 0.0 { r[i] / d[i] } else { r[i] };
            }
        }
        None => z.copy_from_slice(r),
    };
    prec(&r, &mut z);
    p.copy_from_slice(&z);
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    for _ in 0..max_iter {
        let rnorm = norm(&r);
        if rnorm <= tol * bnorm {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        prec(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
    }
    CgResult { iterations, relative_residual: norm(&r) / bnorm }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let mut t = vec![(0u32, 0u32, 1.0), (0, 0, 2.0), (1, 1, 4.0), (0, 1, -1.0)];
        let a = Csr::from_triplets(2, 2, &mut t);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 1), 4.0);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn cg_solves_spd_system() {
        // 2x2 SPD system.
        let a = [[4.0, 1.0], [1.0, 3.0]];
        let b = [1.0, 2.0];
        let mut x = [0.0, 0.0];
        let res = conjugate_gradient(
            |v, out| {
                out[0] = a[0][0] * v[0] + a[0][1] * v[1];
                out[1] = a[1][0] * v[0] + a[1][1] * v[1];
            },
            &b,
            &mut x,
            None,
            1e-12,
            50,
        );
        assert!(res.relative_residual < 1e-10);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-9);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-9);
    }
}
