//! Hilbert projective metric on the nonnegative cone, projective diameter
//! and Birkhoff contraction ratio of positive matrices, and the simplex
//! projection.
//!
//! The metric is computed in its product form
//! `rho(x, y) = ln( max_i(x_i/y_i) * max_j(y_j/x_j) )`,
//! which is symmetric, scale invariant, and zero exactly on proportional
//! vectors. `+infinity` is a first-class value: it appears whenever one
//! vector has a zero component where the other does not, and it propagates
//! through the Birkhoff bound as a ratio of 1.

use ndarray::{Array2, ArrayView1};

use crate::chain::ProbabilityVector;
use crate::error::{Error, Result};

/// Components smaller than this are pushed through the log-difference path
/// to avoid spurious overflow of direct ratios.
const RATIO_LOG_GUARD: f64 = 1e-300;

/// Relative spread below which two vectors are classified as proportional
/// and their distance snapped to exactly zero.
const PROPORTIONALITY_TOL: f64 = 1e-12;

/// A nonnegative extended-real Hilbert distance.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HilbertDistance {
    value: f64,
}

impl HilbertDistance {
    /// The distance value; `f64::INFINITY` marks boundary degeneracy.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// True when the distance is finite.
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Projective diameter and Birkhoff contraction data for a block of
/// transition-matrix factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCertificate {
    /// Hilbert diameter bound `delta` of the block images.
    pub projective_diameter: f64,
    /// The contraction ratio bound `tanh(delta / 4) < 1`.
    pub birkhoff_ratio: f64,
    /// Number of factor matrices one block covers.
    pub block_length: usize,
}

impl ContractionCertificate {
    /// Builds a certificate from a diameter bound and block length.
    pub fn new(projective_diameter: f64, block_length: usize) -> Result<Self> {
        Ok(Self {
            projective_diameter,
            birkhoff_ratio: birkhoff_ratio(projective_diameter)?,
            block_length,
        })
    }
}

fn validate_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("vectors must be nonempty".into()));
    }
    for v in x.iter().chain(y.iter()) {
        if !v.is_finite() || *v < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "components must be finite and nonnegative, got {v}"
            )));
        }
    }
    if x.iter().all(|&v| v == 0.0) || y.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidParameter(
            "vectors must not be identically zero".into(),
        ));
    }
    Ok(())
}

fn log_ratio_spread(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut max_log = f64::NEG_INFINITY;
    let mut min_log = f64::INFINITY;
    for (xi, yi) in pairs {
        match (xi == 0.0, yi == 0.0) {
            (true, true) => continue,
            (true, false) | (false, true) => return f64::INFINITY,
            (false, false) => {
                let log_ratio = if xi < RATIO_LOG_GUARD || yi < RATIO_LOG_GUARD {
                    xi.ln() - yi.ln()
                } else {
                    (xi / yi).ln()
                };
                max_log = max_log.max(log_ratio);
                min_log = min_log.min(log_ratio);
            }
        }
    }
    let spread = max_log - min_log;
    if spread <= PROPORTIONALITY_TOL {
        0.0
    } else {
        spread
    }
}

/// Hilbert projective distance between two nonnegative vectors.
///
/// Coordinates where both vectors vanish lie on a common face of the cone
/// and are skipped; a zero in exactly one vector makes the distance
/// infinite. Vectors proportional within a relative ratio spread of
/// `1e-12` get distance exactly 0.
pub fn hilbert_distance(x: &[f64], y: &[f64]) -> Result<HilbertDistance> {
    validate_pair(x, y)?;
    Ok(HilbertDistance {
        value: log_ratio_spread(x.iter().copied().zip(y.iter().copied())),
    })
}

/// [`hilbert_distance`] over array views.
pub fn hilbert_distance_views(
    x: ArrayView1<'_, f64>,
    y: ArrayView1<'_, f64>,
) -> Result<HilbertDistance> {
    let xv: Vec<f64> = x.iter().copied().collect();
    let yv: Vec<f64> = y.iter().copied().collect();
    hilbert_distance(&xv, &yv)
}

fn column_pair_diameter(matrix: &Array2<f64>) -> f64 {
    let n = matrix.ncols();
    let mut diameter = 0.0f64;
    for j in 0..n {
        for k in j + 1..n {
            let cj = matrix.column(j);
            let ck = matrix.column(k);
            let d = log_ratio_spread(cj.iter().copied().zip(ck.iter().copied()));
            diameter = diameter.max(d);
        }
    }
    diameter
}

/// Projective diameter of a matrix: the supremum of `rho(Lx, Ly)` over the
/// open cone, which for strictly positive `L` equals the maximum pairwise
/// Hilbert distance of its columns. Any non-positive entry makes the
/// diameter infinite.
pub fn projective_diameter(matrix: &Array2<f64>) -> f64 {
    if matrix.iter().any(|&v| v <= 0.0) {
        return f64::INFINITY;
    }
    column_pair_diameter(matrix)
}

/// Birkhoff's bound `tanh(delta / 4)` on the contraction ratio of a matrix
/// with projective diameter `delta`; an infinite diameter maps to 1.
pub fn birkhoff_ratio(diameter: f64) -> Result<f64> {
    if diameter.is_nan() || diameter < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "projective diameter must be nonnegative, got {diameter}"
        )));
    }
    if diameter.is_infinite() {
        return Ok(1.0);
    }
    Ok((diameter / 4.0).tanh())
}

/// Projects a nonnegative nonzero vector to the simplex by dividing by its
/// component sum.
pub fn project_to_simplex(x: &[f64]) -> Result<ProbabilityVector> {
    for v in x {
        if !v.is_finite() || *v < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "components must be finite and nonnegative, got {v}"
            )));
        }
    }
    let sum: f64 = x.iter().sum();
    if sum <= 0.0 {
        return Err(Error::InvalidParameter(
            "cannot project the zero vector to the simplex".into(),
        ));
    }
    let scaled: Vec<f64> = x.iter().map(|v| v / sum).collect();
    Ok(ProbabilityVector::from_normalized(scaled.into()))
}

/// Projects a vector view to the simplex.
pub fn project_view_to_simplex(x: ArrayView1<'_, f64>) -> Result<ProbabilityVector> {
    let owned: Vec<f64> = x.iter().copied().collect();
    project_to_simplex(&owned)
}

/// Hilbert diameter of the image of the whole simplex under a
/// column-stochastic positive matrix. Numerically identical to
/// [`projective_diameter`]; this is the stopping functional of the
/// pullback solver.
pub fn simplex_image_diameter(matrix: &Array2<f64>) -> f64 {
    projective_diameter(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn identical_vectors_have_zero_distance() {
        let d = hilbert_distance(&[0.3, 0.5, 0.2], &[0.3, 0.5, 0.2]).unwrap();
        assert_eq!(d.value(), 0.0);
    }

    #[test]
    fn reference_pair_is_ln_three() {
        let d = hilbert_distance(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(d.value(), 3.0f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn boundary_mismatch_is_infinite() {
        let d = hilbert_distance(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(d.value().is_infinite());
    }

    #[test]
    fn shared_zero_coordinates_are_skipped() {
        let d = hilbert_distance(&[1.0, 0.0, 2.0], &[2.0, 0.0, 4.0]).unwrap();
        assert_eq!(d.value(), 0.0);
    }

    #[test]
    fn rejects_mismatched_lengths_and_zero_vectors() {
        assert!(hilbert_distance(&[1.0], &[1.0, 2.0]).is_err());
        assert!(hilbert_distance(&[0.0, 0.0], &[1.0, 2.0]).is_err());
        assert!(hilbert_distance(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn diameter_of_reference_matrix_is_ln_four() {
        let l = array![[2.0, 1.0], [1.0, 2.0]];
        assert_abs_diff_eq!(projective_diameter(&l), 4.0f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn rank_one_matrix_has_zero_diameter() {
        let l = array![[0.2, 0.4], [0.3, 0.6]];
        assert_eq!(projective_diameter(&l), 0.0);
    }

    #[test]
    fn zero_entry_means_infinite_diameter() {
        let l = array![[1.0, 0.0], [1.0, 2.0]];
        assert!(projective_diameter(&l).is_infinite());
        assert!(simplex_image_diameter(&Array2::eye(3)).is_infinite());
    }

    #[test]
    fn birkhoff_ratio_reference_values() {
        assert_abs_diff_eq!(
            birkhoff_ratio(4.0f64.ln()).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-14
        );
        assert_eq!(birkhoff_ratio(0.0).unwrap(), 0.0);
        assert_eq!(birkhoff_ratio(f64::INFINITY).unwrap(), 1.0);
        assert!(birkhoff_ratio(-1.0).is_err());
        assert!(birkhoff_ratio(f64::NAN).is_err());
    }

    #[test]
    fn euler_step_image_diameter() {
        let l = array![[0.9, 0.1], [0.1, 0.9]];
        assert_abs_diff_eq!(simplex_image_diameter(&l), 81.0f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn projection_examples() {
        let p = project_to_simplex(&[2.0, 2.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
        let p = project_to_simplex(&[1.0, 3.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.25, 0.75]);
        let q = project_to_simplex(p.as_slice()).unwrap();
        assert_eq!(q.as_slice(), p.as_slice());
        assert!(project_to_simplex(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn tiny_components_use_log_path() {
        let d = hilbert_distance(&[1e-310, 1e-310], &[1e-310, 2e-310]).unwrap();
        assert_abs_diff_eq!(d.value(), 2.0f64.ln(), epsilon = 1e-12);
    }

    fn positive_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(1e-6f64..1e6, n)
    }

    proptest! {
        #[test]
        fn distance_is_symmetric(x in positive_vec(5), y in positive_vec(5)) {
            let a = hilbert_distance(&x, &y).unwrap().value();
            let b = hilbert_distance(&y, &x).unwrap().value();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn distance_satisfies_triangle_inequality(
            x in positive_vec(4),
            y in positive_vec(4),
            z in positive_vec(4),
        ) {
            let xz = hilbert_distance(&x, &z).unwrap().value();
            let xy = hilbert_distance(&x, &y).unwrap().value();
            let yz = hilbert_distance(&y, &z).unwrap().value();
            prop_assert!(xz <= xy + yz + 1e-12);
        }

        #[test]
        fn distance_is_scale_invariant(
            x in positive_vec(4),
            y in positive_vec(4),
            s in 1e-6f64..1e6,
            t in 1e-6f64..1e6,
        ) {
            let base = hilbert_distance(&x, &y).unwrap().value();
            let sx: Vec<f64> = x.iter().map(|v| s * v).collect();
            let ty: Vec<f64> = y.iter().map(|v| t * v).collect();
            let scaled = hilbert_distance(&sx, &ty).unwrap().value();
            prop_assert!((base - scaled).abs() <= 1e-10 * base.max(1.0));
        }

        #[test]
        fn zero_distance_means_proportional(x in positive_vec(5), t in 0.5f64..2.0) {
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            let d = hilbert_distance(&x, &tx).unwrap().value();
            prop_assert_eq!(d, 0.0);
            let ratios: Vec<f64> = x.iter().zip(tx.iter()).map(|(a, b)| a / b).collect();
            let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
            let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert!((max - min).abs() <= 1e-12 * min);
        }

        #[test]
        fn matrices_contract_by_the_birkhoff_bound(
            entries in proptest::collection::vec(0.05f64..5.0, 9),
            x in positive_vec(3),
            y in positive_vec(3),
        ) {
            let l = Array2::from_shape_vec((3, 3), entries).unwrap();
            let ratio = birkhoff_ratio(projective_diameter(&l)).unwrap();
            let d_before = hilbert_distance(&x, &y).unwrap().value();
            let lx = l.dot(&ndarray::Array1::from_vec(x));
            let ly = l.dot(&ndarray::Array1::from_vec(y));
            let d_after = hilbert_distance(
                lx.as_slice().unwrap(),
                ly.as_slice().unwrap(),
            ).unwrap().value();
            prop_assert!(d_after <= ratio * d_before + 1e-10);
        }

        #[test]
        fn max_norm_is_dominated_by_metric_gap(
            x in positive_vec(4),
            y in positive_vec(4),
        ) {
            let p = project_to_simplex(&x).unwrap();
            let q = project_to_simplex(&y).unwrap();
            let rho = hilbert_distance(p.as_slice(), q.as_slice()).unwrap().value();
            prop_assert!(p.max_norm_distance(&q) <= rho.exp_m1() + 1e-15);
        }
    }
}
