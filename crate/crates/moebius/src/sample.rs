//! Deterministic random sampling of Mobius transforms: Haar-ish rotations
//! via QR of a Gaussian matrix, uniform axis, log-uniform dilation factor.

use crate::transform::MoebiusTransform;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A standard normal via Box-Muller.
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Haar-distributed rotation from QR of a Gaussian matrix with the sign fix
/// that makes the diagonal of R positive; det is forced to the requested
/// orientation by flipping the last column if needed.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize, reversing: bool) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let want = if reversing { -1.0 } else { 1.0 };
    if q.determinant() * want < 0.0 {
        for i in 0..n {
            q[(i, n - 1)] = -q[(i, n - 1)];
        }
    }
    q
}

/// A uniform point on S^{n-1}.
pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        let nm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nm > 1e-6 {
            return v.iter().map(|x| x / nm).collect();
        }
    }
}

/// Sample a random transform with log lambda uniform in the given range.
pub fn sample_random(
    n: usize,
    seed: u64,
    lambda_range: (f64, f64),
    reversing: bool,
) -> MoebiusTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(&mut rng, n, lambda_range, reversing)
}

/// Sample using a caller-provided generator (for sequences of transforms).
pub fn sample_with<R: Rng>(
    rng: &mut R,
    n: usize,
    lambda_range: (f64, f64),
    reversing: bool,
) -> MoebiusTransform {
    assert!(lambda_range.0 > 0.0 && lambda_range.1 >= lambda_range.0);
    let o = random_orthogonal(rng, n, reversing);
    let xi = random_unit(rng, n);
    let (lo, hi) = (lambda_range.0.ln(), lambda_range.1.ln());
    let lambda = if hi > lo { rng.gen_range(lo..hi).exp() } else { lambda_range.0 };
    MoebiusTransform::new(o, xi, lambda)
}
