//! Elementary symmetric polynomials of the eigenvalues of a square matrix,
//! computed from traces of matrix powers through Newton's identities (the
//! characteristic-polynomial coefficient recurrence), together with their
//! exact gradients obtained by forward-mode differentiation of the same
//! recurrence. No eigen-decomposition is involved anywhere.

use crate::QuadraticsError;

/// Dense row-major n x n matrix product.
fn mat_mul(n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    for r in 0..n {
        for c in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[r * n + k] * b[k * n + c];
            }
            out[r * n + c] = s;
        }
    }
}

fn trace(n: usize, a: &[f64]) -> f64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

/// All elementary symmetric polynomials sigma_1..sigma_n of the eigenvalues
/// of `a` (row-major n x n), via Newton's identities on the power traces
/// p_i = tr(a^i):
///   sigma_k = (1/k) sum_{i=1}^{k} (-1)^{i-1} sigma_{k-i} p_i.
pub fn sigma_all(a: &[f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    // Power traces p_1..p_n.
    let mut p = vec![0.0; n + 1];
    let mut cur = a.to_vec();
    let mut next = vec![0.0; n * n];
    p[1] = trace(n, &cur);
    for i in 2..=n {
        mat_mul(n, &cur, a, &mut next);
        std::mem::swap(&mut cur, &mut next);
        p[i] = trace(n, &cur);
    }
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for k in 1..=n {
        let mut s = 0.0;
        let mut sign = 1.0;
        for i in 1..=k {
            s += sign * e[k - i] * p[i];
            sign = -sign;
        }
        e[k] = s / k as f64;
    }
    e.remove(0);
    e
}

/// sigma_k of the eigenvalues of `a`, 1 <= k <= n.
pub fn sigma_k(a: &[f64], n: usize, k: usize) -> Result<f64, QuadraticsError> {
    if k == 0 || k > n {
        return Err(QuadraticsError::KOutOfRange { k, n });
    }
    Ok(sigma_all(a, n)[k - 1])
}

/// All sigma_k together with their gradient matrices d sigma_k / d a
/// (row-major, entry [r*n+s] = partial derivative with respect to a_{rs}),
/// by forward-mode differentiation of the Newton recurrence. The power
/// traces differentiate exactly as d tr(a^i)/d a = i (a^{i-1})^t, and the
/// recurrence is linear in those duals.
pub fn sigma_all_with_grad(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    // Matrix powers a^0..a^{n-1} (needed for the trace derivatives).
    let mut powers: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut ident = vec![0.0; n * n];
    for i in 0..n {
        ident[i * n + i] = 1.0;
    }
    powers.push(ident);
    for i in 1..n {
        let mut next = vec![0.0; n * n];
        mat_mul(n, &powers[i - 1], a, &mut next);
        powers.push(next);
    }
    let mut p = vec![0.0; n + 1];
    let mut dp: Vec<Vec<f64>> = vec![vec![0.0; n * n]; n + 1];
    for i in 1..=n {
        // p_i = tr(a^i) = tr(a^{i-1} a).
        let mut t = 0.0;
        for r in 0..n {
            for c in 0..n {
                t += powers[i - 1][r * n + c] * a[c * n + r];
            }
        }
        p[i] = t;
        for r in 0..n {
            for s in 0..n {
                dp[i][r * n + s] = i as f64 * powers[i - 1][s * n + r];
            }
        }
    }
    let mut e = vec![0.0; n + 1];
    let mut de: Vec<Vec<f64>> = vec![vec![0.0; n * n]; n + 1];
    e[0] = 1.0;
    for k in 1..=n {
        let mut s = 0.0;
        let mut ds = vec![0.0; n * n];
        let mut sign = 1.0;
        for i in 1..=k {
            s += sign * e[k - i] * p[i];
            for t in 0..n * n {
                ds[t] += sign * (de[k - i][t] * p[i] + e[k - i] * dp[i][t]);
            }
            sign = -sign;
        }
        e[k] = s / k as f64;
        for t in 0..n * n {
            de[k][t] = ds[t] / k as f64;
        }
    }
    e.remove(0);
    de.remove(0);
    (e, de)
}

/// Gradient matrix of sigma_k alone.
pub fn sigma_grad(a: &[f64], n: usize, k: usize) -> Result<Vec<f64>, QuadraticsError> {
    if k == 0 || k > n {
        return Err(QuadraticsError::KOutOfRange { k, n });
    }
    let (_, mut grads) = sigma_all_with_grad(a, n);
    Ok(grads.swap_remove(k - 1))
}
