//! Independent oracles for the integration tests. Everything here is
//! deliberately brute-force and shares no code with the library paths it
//! checks.
#![allow(dead_code)]

use ndarray::Array2;

/// `inf { t : t*x - y` has no negative component `}` by doubling plus
/// bisection on the cone-membership test.
pub fn cone_gauge_bisection(x: &[f64], y: &[f64]) -> f64 {
    let member = |t: f64| x.iter().zip(y.iter()).all(|(xi, yi)| t * xi - yi >= 0.0);
    let mut hi = 1.0f64;
    while !member(hi) {
        hi *= 2.0;
        assert!(hi < 1e12, "gauge diverged");
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if member(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Hilbert distance of strictly positive vectors straight from the cone
/// definition: `ln( gauge(x, y) * gauge(y, x) )`.
pub fn hilbert_distance_bisection(x: &[f64], y: &[f64]) -> f64 {
    (cone_gauge_bisection(x, y) * cone_gauge_bisection(y, x)).ln()
}

/// Brute-force projective diameter of a positive 2x2 matrix: maximum
/// Hilbert distance between images of a dense grid of simplex points,
/// simplex vertices included.
pub fn grid_diameter_2x2(l: &Array2<f64>, grid: usize) -> f64 {
    let points: Vec<[f64; 2]> = (0..=grid)
        .map(|i| {
            let t = i as f64 / grid as f64;
            [t, 1.0 - t]
        })
        .collect();
    let images: Vec<[f64; 2]> = points
        .iter()
        .map(|p| {
            [
                l[(0, 0)] * p[0] + l[(0, 1)] * p[1],
                l[(1, 0)] * p[0] + l[(1, 1)] * p[1],
            ]
        })
        .collect();
    let mut best = 0.0f64;
    for a in &images {
        for b in &images {
            let d = hilbert_distance_bisection(a, b);
            best = best.max(d);
        }
    }
    best
}

/// Solves `Q p = 0`, `sum p = 1` by Gaussian elimination with partial
/// pivoting on the augmented system (the last generator row is replaced by
/// the normalization row, which is exactly the redundancy of `Q`).
pub fn null_space_stationary(q: &Array2<f64>) -> Vec<f64> {
    let n = q.nrows();
    let mut a = vec![vec![0.0f64; n + 1]; n];
    for i in 0..n - 1 {
        for j in 0..n {
            a[i][j] = q[(i, j)];
        }
    }
    for j in 0..n {
        a[n - 1][j] = 1.0;
    }
    a[n - 1][n] = 1.0;

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-300, "singular system");
        for row in 0..n {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for k in col..=n {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

/// All eigenvalues of a symmetric matrix by the cyclic Jacobi rotation
/// method.
pub fn jacobi_eigenvalues(matrix: &Array2<f64>) -> Vec<f64> {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Subdominant eigenvalue magnitude of a column-stochastic birth-death
/// transition matrix, via similarity to a symmetric matrix and the Jacobi
/// oracle. `pi` must be the (independently computed) stationary vector.
pub fn subdominant_by_jacobi(l: &Array2<f64>, pi: &[f64]) -> f64 {
    let n = l.nrows();
    let mut sym = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] = l[(i, j)] * (pi[j] / pi[i]).sqrt();
        }
    }
    // Reversibility makes the conjugated matrix symmetric; confirm it.
    for i in 0..n {
        for j in 0..n {
            assert!(
                (sym[(i, j)] - sym[(j, i)]).abs() <= 1e-10,
                "conjugated matrix not symmetric"
            );
        }
    }
    for i in 0..n {
        for j in 0..n {
            let avg = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = avg;
            sym[(j, i)] = avg;
        }
    }
    let mut magnitudes: Vec<f64> = jacobi_eigenvalues(&sym).iter().map(|v| v.abs()).collect();
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    magnitudes[1]
}

/// Fixed point of `x -> normalize(M x)` by plain forward iteration from
/// the uniform vector.
pub fn forward_iteration_fixed_point(m: &Array2<f64>, iterations: usize) -> Vec<f64> {
    let n = m.nrows();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let mut next = vec![0.0f64; n];
        for i in 0..n {
            for j in 0..n {
                next[i] += m[(i, j)] * x[j];
            }
        }
        let sum: f64 = next.iter().sum();
        for v in &mut next {
            *v /= sum;
        }
        x = next;
    }
    x
}

/// Splitmix-style generator for reproducible test inputs.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let unit = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + unit * (hi - lo)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
