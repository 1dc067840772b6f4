//! Finite ordered products of transition matrices along the environment
//! orbit, with the structural checks that make the pullback construction
//! work: band filling, entry floors, and dissipativity into the absorbing
//! sub-simplex.

use ndarray::Array2;

use crate::chain::SimplexSlice;
use crate::driver::EnvironmentDriver;
use crate::error::{Error, Result};
use crate::hilbert::{hilbert_distance, ContractionCertificate};

/// Absolute tolerance on band-entry floors; band zeros themselves are
/// structural and must be exact.
pub const BAND_FLOOR_TOL: f64 = 1e-14;

/// An ordered product of `length` transition matrices whose earliest
/// factor sits at absolute time `start_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleProduct {
    matrix: Array2<f64>,
    start_index: i64,
    length: usize,
}

impl CocycleProduct {
    /// The accumulated dense matrix.
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Absolute time of the first (earliest) factor.
    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    /// Number of factors; zero means the identity.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Matrix order `N`.
    pub fn n_states(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Structural report of [`verify_band_structure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandReport {
    /// True iff every entry outside the central `2n+1` diagonals is
    /// exactly zero.
    pub is_banded: bool,
    /// Smallest entry on the central `2n+1` diagonals.
    pub band_min: f64,
    /// The floor `gamma^n` those entries must reach.
    pub floor: f64,
}

impl BandReport {
    /// True iff the product has the proven band structure and floor.
    pub fn passes(&self) -> bool {
        self.is_banded && self.band_min >= self.floor - BAND_FLOOR_TOL
    }
}

/// The ordered product `L_{start+n-1} ... L_{start+1} L_{start}` of Euler
/// steps along the driver orbit; `n = 0` gives the identity.
pub fn cocycle_matrix(
    driver: &EnvironmentDriver,
    start: i64,
    n: usize,
    delta: f64,
) -> Result<CocycleProduct> {
    let size = driver.n_states();
    let mut matrix = Array2::eye(size);
    for k in 0..n {
        let factor = driver.transition_at(start + k as i64, delta)?;
        // Newest factor is applied last, so it multiplies from the left.
        matrix = factor.entries().dot(&matrix);
    }
    Ok(CocycleProduct {
        matrix,
        start_index: start,
        length: n,
    })
}

/// Checks the band structure of a product of `n <= N-1` factors: outside
/// the central `2n+1` diagonals the entries are exactly zero, and on them
/// they reach the floor `gamma^n`. For `n >= N-1` the band covers the whole
/// matrix and the floor still applies.
pub fn verify_band_structure(product: &CocycleProduct, slice: &SimplexSlice) -> BandReport {
    let n = product.length();
    let mut is_banded = true;
    let mut band_min = f64::INFINITY;
    for ((i, j), &v) in product.matrix().indexed_iter() {
        if i.abs_diff(j) > n {
            if v != 0.0 {
                is_banded = false;
            }
        } else {
            band_min = band_min.min(v);
        }
    }
    BandReport {
        is_banded,
        band_min,
        floor: slice.band_floor(n),
    }
}

/// True iff a product of exactly `N-1` factors maps the whole simplex into
/// the absorbing slice: every matrix entry is at least `gamma^(N-1)`.
pub fn verify_dissipativity(product: &CocycleProduct, slice: &SimplexSlice) -> Result<bool> {
    let expected = product.n_states() - 1;
    if product.length() != expected {
        return Err(Error::InvalidParameter(format!(
            "dissipativity check needs a product of exactly {expected} factors, got {}",
            product.length()
        )));
    }
    let floor = slice.gamma_floor() - BAND_FLOOR_TOL;
    Ok(product.matrix().iter().all(|&v| v >= floor))
}

/// Extreme points of the absorbing slice: one component `1 - (N-1) * g`,
/// the rest `g`, with `g = gamma^(N-1)`.
fn slice_extreme_points(slice: &SimplexSlice) -> Vec<Vec<f64>> {
    let n = slice.n_states();
    let g = slice.gamma_floor();
    let peak = 1.0 - (n as f64 - 1.0) * g;
    (0..n)
        .map(|i| {
            let mut v = vec![g; n];
            v[i] = peak;
            v
        })
        .collect()
}

/// Hilbert diameter bound of the absorbing slice, computed as the maximum
/// pairwise distance among its extreme points.
pub fn slice_diameter(slice: &SimplexSlice) -> f64 {
    let points = slice_extreme_points(slice);
    let mut diameter = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in points.iter().skip(i + 1) {
            let d = hilbert_distance(a, b).expect("positive extreme points").value();
            diameter = diameter.max(d);
        }
    }
    diameter
}

/// The uniform contraction certificate for blocks of `N-1` factors: their
/// images land in the absorbing slice, so their projective diameter is at
/// most [`slice_diameter`] and every block contracts by at least
/// `tanh(diameter / 4) < 1`.
pub fn contraction_certificate(slice: &SimplexSlice) -> Result<ContractionCertificate> {
    ContractionCertificate::new(slice_diameter(slice), slice.n_states() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{positivity_floor, BandParameters, RateBounds, COLUMN_SUM_TOL};
    use crate::driver::RateDistribution;
    use approx::assert_abs_diff_eq;

    fn bounds() -> RateBounds {
        RateBounds::new(1.0, 2.0).unwrap()
    }

    fn random_driver(n: usize, seed: u64) -> EnvironmentDriver {
        EnvironmentDriver::random(n, bounds(), seed, RateDistribution::Uniform).unwrap()
    }

    #[test]
    fn zero_length_product_is_identity() {
        let d = random_driver(4, 3);
        let p = cocycle_matrix(&d, 0, 0, 0.1).unwrap();
        assert_eq!(p.matrix(), &Array2::eye(4));
        assert_eq!(p.length(), 0);
    }

    #[test]
    fn single_factor_product_is_the_transition() {
        let d = random_driver(3, 3);
        let p = cocycle_matrix(&d, 5, 1, 0.1).unwrap();
        assert_eq!(p.matrix(), d.transition_at(5, 0.1).unwrap().entries());
    }

    #[test]
    fn products_split_by_the_cocycle_property() {
        let d = random_driver(4, 17);
        for (start, n, m) in [(0i64, 3usize, 2usize), (-7, 4, 5), (11, 1, 6)] {
            let whole = cocycle_matrix(&d, start, n + m, 0.1).unwrap();
            let first = cocycle_matrix(&d, start, m, 0.1).unwrap();
            let second = cocycle_matrix(&d, start + m as i64, n, 0.1).unwrap();
            let composed = second.matrix().dot(first.matrix());
            let discrepancy = whole
                .matrix()
                .iter()
                .zip(composed.iter())
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            assert!(discrepancy <= 1e-12);
        }
    }

    #[test]
    fn products_stay_column_stochastic() {
        let d = random_driver(5, 23);
        for n in [1usize, 4, 16, 64] {
            let p = cocycle_matrix(&d, -3, n, 0.2).unwrap();
            for j in 0..5 {
                let sum: f64 = p.matrix().column(j).sum();
                assert!((sum - 1.0).abs() <= 1e-12 * n.max(1) as f64);
            }
        }
    }

    #[test]
    fn single_factor_band_report() {
        let d = random_driver(4, 5);
        let slice = positivity_floor(0.1, &bounds(), 4).unwrap();
        let p = cocycle_matrix(&d, 0, 1, 0.1).unwrap();
        let report = verify_band_structure(&p, &slice);
        assert!(report.is_banded);
        assert_abs_diff_eq!(report.floor, slice.gamma(), epsilon = 0.0);
        assert!(report.passes());
    }

    #[test]
    fn two_factor_product_has_five_diagonals() {
        // Brute-force check against an explicitly indexed product of two
        // tridiagonal stochastic factors.
        let d = random_driver(5, 29);
        let slice = positivity_floor(0.1, &bounds(), 5).unwrap();
        let p = cocycle_matrix(&d, 2, 2, 0.1).unwrap();
        let a = d.transition_at(2, 0.1).unwrap();
        let b = d.transition_at(3, 0.1).unwrap();
        let mut manual: Array2<f64> = Array2::zeros((5, 5));
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    manual[(i, j)] += b.entries()[(i, k)] * a.entries()[(k, j)];
                }
            }
        }
        for ((i, j), &v) in manual.indexed_iter() {
            if i.abs_diff(j) > 2 {
                assert_eq!(v, 0.0);
            }
            assert_abs_diff_eq!(v, p.matrix()[(i, j)], epsilon = 1e-15);
        }
        let report = verify_band_structure(&p, &slice);
        assert!(report.passes());
    }

    #[test]
    fn full_block_reaches_the_gamma_floor() {
        for seed in 0..20 {
            let n = 3 + (seed as usize % 5);
            let d = random_driver(n, seed);
            let slice = positivity_floor(0.12, &bounds(), n).unwrap();
            let p = cocycle_matrix(&d, -(n as i64), n - 1, 0.12).unwrap();
            assert!(verify_dissipativity(&p, &slice).unwrap());
            let report = verify_band_structure(&p, &slice);
            assert!(report.passes());
        }
    }

    #[test]
    fn two_state_dissipativity_by_inspection() {
        let tight = RateBounds::new(1.0, 1.0).unwrap();
        let block = BandParameters::new(2, vec![1.0, 1.0]).unwrap();
        let d = EnvironmentDriver::constant(block, tight).unwrap();
        let slice = positivity_floor(0.1, &tight, 2).unwrap();
        assert_abs_diff_eq!(slice.gamma(), 0.1, epsilon = 0.0);
        let p = cocycle_matrix(&d, 0, 1, 0.1).unwrap();
        assert!(verify_dissipativity(&p, &slice).unwrap());
    }

    #[test]
    fn dissipativity_rejects_wrong_length() {
        let d = random_driver(4, 1);
        let slice = positivity_floor(0.1, &bounds(), 4).unwrap();
        let p = cocycle_matrix(&d, 0, 2, 0.1).unwrap();
        assert!(verify_dissipativity(&p, &slice).is_err());
    }

    #[test]
    fn slice_diameter_matches_direct_formula() {
        // All extreme-point pairs are permutations of each other, so the
        // diameter is 2*ln(peak/g).
        for n in [2usize, 3, 6] {
            let slice = positivity_floor(0.1, &bounds(), n).unwrap();
            let g = slice.gamma_floor();
            let peak = 1.0 - (n as f64 - 1.0) * g;
            let expected = 2.0 * (peak / g).ln();
            assert_abs_diff_eq!(slice_diameter(&slice), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn blocks_satisfy_the_certificate() {
        use crate::hilbert::projective_diameter;
        for seed in 0..10 {
            let n = 3 + (seed as usize % 3);
            let d = random_driver(n, 1000 + seed);
            let slice = positivity_floor(0.15, &bounds(), n).unwrap();
            let certificate = contraction_certificate(&slice).unwrap();
            assert!(certificate.birkhoff_ratio < 1.0);
            assert_eq!(certificate.block_length, n - 1);
            for start in [-9i64, 0, 4] {
                let block = cocycle_matrix(&d, start, n - 1, 0.15).unwrap();
                let diameter = projective_diameter(block.matrix());
                assert!(diameter <= certificate.projective_diameter + 1e-12);
            }
        }
    }

    #[test]
    fn column_sums_hold_for_long_products() {
        let d = random_driver(6, 77);
        let p = cocycle_matrix(&d, -200, 400, 0.05).unwrap();
        for j in 0..6 {
            let sum: f64 = p.matrix().column(j).sum();
            assert!((sum - 1.0).abs() <= COLUMN_SUM_TOL * 400.0 * 100.0);
            assert!((sum - 1.0).abs() <= 1e-12 * 400.0);
        }
    }
}
