//! Wedge products of tangential derivative columns: the vector of maximal
//! minors of an n x (n-1) matrix, for ambient dimensions 3..=5.

/// Determinant of a small dense matrix stored row-major (size <= 4).
pub fn det_small(m: &[f64], size: usize) -> f64 {
    match size {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        4 => {
            let mut s = 0.0;
            let mut minor = [0.0; 9];
            for col in 0..4 {
                let mut k = 0;
                for r in 1..4 {
                    for c in 0..4 {
                        if c != col {
                            minor[k] = m[r * 4 + c];
                            k += 1;
                        }
                    }
                }
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * m[col] * det_small(&minor, 3);
            }
            s
        }
        _ => panic!("det_small supports sizes 1..=4"),
    }
}

/// Wedge product of n-1 vectors in R^n: `cols` holds the vectors contiguously
/// (column i at cols[i*n..(i+1)*n]). The result v satisfies
/// v_k = det(d_1, ..., d_{n-1}, e_k), so for n = 3 it is the cross product.
pub fn wedge(n: usize, cols: &[f64], out: &mut [f64]) {
    debug_assert_eq!(cols.len(), n * (n - 1));
    debug_assert_eq!(out.len(), n);
    if n == 3 {
        let (a, b) = (&cols[0..3], &cols[3..6]);
        out[0] = a[1] * b[2] - a[2] * b[1];
        out[1] = a[2] * b[0] - a[0] * b[2];
        out[2] = a[0] * b[1] - a[1] * b[0];
        return;
    }
    let mut minor = vec![0.0; (n - 1) * (n - 1)];
    for k in 0..n {
        let mut idx = 0;
        for r in 0..n {
            if r == k {
                continue;
            }
            for c in 0..n - 1 {
                minor[idx] = cols[c * n + r];
                idx += 1;
            }
        }
        // v_k = det([d_1 .. d_{n-1} e_k]) expanded along the last column.
        let sign = if (n + k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        out[k] = sign * det_small(&minor, n - 1);
    }
}
