//! Tridiagonal generators, Euler transition matrices, and the closed-form
//! stationary distribution of the autonomous birth-death chain.
//!
//! The state space is `{1, ..., N}`. One environment state is described by
//! `2N-2` positive rates `q_1 ... q_{2N-2}`: odd-indexed rates move
//! probability up one state, even-indexed rates move it down. The generator
//! `Q` built from them is tridiagonal with zero column sums, and one Euler
//! step of size `delta` gives the column-stochastic transition matrix
//! `L = I + delta * Q`.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Column-sum tolerance for generator and transition matrices, per state.
pub const COLUMN_SUM_TOL: f64 = 1e-14;

/// Sum tolerance for probability vectors.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// Per-step mass drift tolerated before renormalization when applying a
/// transition matrix to a probability vector.
pub const APPLY_DRIFT_TOL: f64 = 1e-13;

/// The `2N-2` positive rates of one environment state.
#[derive(Debug, Clone, PartialEq)]
pub struct BandParameters {
    n_states: usize,
    rates: Vec<f64>,
}

impl BandParameters {
    /// Validates and wraps a rate vector. Requires `n_states >= 2`,
    /// exactly `2*n_states - 2` rates, all strictly positive and finite.
    pub fn new(n_states: usize, rates: Vec<f64>) -> Result<Self> {
        if n_states < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_states must be at least 2, got {n_states}"
            )));
        }
        let expected = 2 * n_states - 2;
        if rates.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: rates.len(),
            });
        }
        if let Some(bad) = rates.iter().find(|q| !q.is_finite() || **q <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rates must be strictly positive and finite, got {bad}"
            )));
        }
        Ok(Self { n_states, rates })
    }

    /// All rates equal to `rate`.
    pub fn uniform(n_states: usize, rate: f64) -> Result<Self> {
        Self::new(n_states, vec![rate; 2 * n_states.max(1) - 2])
    }

    /// Number of chain states `N`.
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// The raw rates `q_1 ... q_{2N-2}` (slot `k` holds `q_{k+1}`).
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }
}

/// Uniform lower and upper bounds `0 < alpha <= beta` on every rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    alpha: f64,
    beta: f64,
}

impl RateBounds {
    /// Validates `0 < alpha <= beta < infinity`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || alpha <= 0.0 || beta < alpha {
            return Err(Error::InvalidParameter(format!(
                "rate bounds must satisfy 0 < alpha <= beta < inf, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Smallest closed interval containing every rate of the given blocks.
    pub fn enclosing(blocks: &[BandParameters]) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for block in blocks {
            for &q in block.rates() {
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        Self::new(lo, hi)
    }

    /// Lower bound `alpha`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Upper bound `beta`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The strict step limit `1/(2*beta)`.
    pub fn step_limit(&self) -> f64 {
        1.0 / (2.0 * self.beta)
    }

    /// Checks `0 <= delta < 1/(2*beta)`.
    pub fn validate_step(&self, delta: f64) -> Result<()> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step must be finite and nonnegative, got {delta}"
            )));
        }
        if delta >= self.step_limit() {
            return Err(Error::StepTooLarge {
                delta,
                limit: self.step_limit(),
            });
        }
        Ok(())
    }

    /// True iff every rate of `bands` lies in `[alpha, beta]`.
    pub fn contains(&self, bands: &BandParameters) -> bool {
        bands
            .rates()
            .iter()
            .all(|&q| q >= self.alpha && q <= self.beta)
    }
}

/// Tridiagonal generator matrix `Q` with zero column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    entries: Array2<f64>,
}

impl GeneratorMatrix {
    /// The dense entries.
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Matrix order `N`.
    pub fn n_states(&self) -> usize {
        self.entries.nrows()
    }

    /// Max-norm residual of `Q * p`.
    pub fn residual_inf(&self, p: &ProbabilityVector) -> f64 {
        self.entries
            .dot(p.components())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// One Euler step `L = I + delta * Q`, column-stochastic for valid steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: Array2<f64>,
    step: f64,
}

impl TransitionMatrix {
    /// The dense entries.
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Matrix order `N`.
    pub fn n_states(&self) -> usize {
        self.entries.nrows()
    }

    /// The Euler step this matrix was built with.
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Applies the matrix to a probability vector and renormalizes to
    /// arrest floating-point drift. The pre-normalization drift must stay
    /// below [`APPLY_DRIFT_TOL`].
    pub fn apply(&self, p: &ProbabilityVector) -> ProbabilityVector {
        let w = self.entries.dot(p.components());
        let sum: f64 = w.sum();
        debug_assert!(
            (sum - 1.0).abs() <= APPLY_DRIFT_TOL,
            "mass drift {} beyond tolerance",
            (sum - 1.0).abs()
        );
        ProbabilityVector {
            components: w / sum,
        }
    }
}

/// A point of the probability simplex: nonnegative components summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    components: Array1<f64>,
}

impl ProbabilityVector {
    /// Validates nonnegativity and unit sum (within [`PROBABILITY_SUM_TOL`]).
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter(
                "probability vector must be nonempty".into(),
            ));
        }
        if let Some(bad) = components.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "probability components must be finite and nonnegative, got {bad}"
            )));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "probability components must sum to 1, got {sum}"
            )));
        }
        Ok(Self {
            components: Array1::from_vec(components),
        })
    }

    /// The uniform vector `(1/N, ..., 1/N)`.
    pub fn uniform(n: usize) -> Self {
        Self {
            components: Array1::from_elem(n, 1.0 / n as f64),
        }
    }

    /// The vertex `e_i` of the simplex.
    pub fn vertex(n: usize, i: usize) -> Self {
        let mut components = Array1::zeros(n);
        components[i] = 1.0;
        Self { components }
    }

    pub(crate) fn from_normalized(components: Array1<f64>) -> Self {
        Self { components }
    }

    /// The components.
    pub fn components(&self) -> &Array1<f64> {
        &self.components
    }

    /// Components as a plain slice.
    pub fn as_slice(&self) -> &[f64] {
        self.components.as_slice().expect("contiguous")
    }

    /// Dimension `N`.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// Never true for a valid vector; kept for slice-like ergonomics.
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Max-norm distance to another vector of the same dimension.
    pub fn max_norm_distance(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(other.components.iter())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// The absorbing sub-simplex: probability vectors with every component at
/// least `gamma^(N-1)`, where `gamma = min(delta*alpha, 1 - 2*delta*beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSlice {
    gamma: f64,
    n_states: usize,
}

impl SimplexSlice {
    /// The positivity constant `gamma`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Chain size `N` this slice is paired with.
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// The component floor `gamma^(N-1)`.
    pub fn gamma_floor(&self) -> f64 {
        self.gamma.powi(self.n_states as i32 - 1)
    }

    /// The band-entry floor `gamma^n` for a product of `n` factors.
    pub fn band_floor(&self, n: usize) -> f64 {
        self.gamma.powi(n as i32)
    }
}

/// Builds the tridiagonal generator `Q` from one set of band rates.
///
/// Column `j` carries the rates out of state `j+1`: the diagonal is
/// `(-q_1, -(q_2+q_3), ..., -q_{2N-2})`, the subdiagonal
/// `(q_1, q_3, ..., q_{2N-3})` and the superdiagonal
/// `(q_2, q_4, ..., q_{2N-2})`, so every column sums to zero exactly.
pub fn build_generator(bands: &BandParameters) -> GeneratorMatrix {
    let n = bands.n_states();
    let q = bands.rates();
    let mut m = Array2::zeros((n, n));
    m[(0, 0)] = -q[0];
    m[(1, 0)] = q[0];
    for j in 1..n - 1 {
        m[(j - 1, j)] = q[2 * j - 1];
        m[(j, j)] = -(q[2 * j - 1] + q[2 * j]);
        m[(j + 1, j)] = q[2 * j];
    }
    m[(n - 2, n - 1)] = q[2 * n - 3];
    m[(n - 1, n - 1)] = -q[2 * n - 3];
    GeneratorMatrix { entries: m }
}

/// Builds the Euler transition matrix `L = I + delta * Q`.
///
/// Requires `delta < 1/(2*beta)` (strict) so all entries are nonnegative
/// with a positive floor; `delta = 0` yields the identity.
pub fn build_transition(
    generator: &GeneratorMatrix,
    delta: f64,
    bounds: &RateBounds,
) -> Result<TransitionMatrix> {
    bounds.validate_step(delta)?;
    let n = generator.n_states();
    let mut entries = generator.entries().mapv(|v| delta * v);
    for i in 0..n {
        entries[(i, i)] += 1.0;
    }
    Ok(TransitionMatrix {
        entries,
        step: delta,
    })
}

/// Closed-form stationary distribution of the autonomous chain.
///
/// The unnormalized solution of `Q x = 0` satisfies
/// `x_{j+1} = x_j * q_{2j-1} / q_{2j}`; normalizing the running products
/// gives the stationary probability vector. For `N > 50` the products are
/// accumulated in log space and recentered before exponentiating, since
/// bounded ratios can still compound geometrically.
pub fn stationary_distribution(bands: &BandParameters) -> ProbabilityVector {
    let n = bands.n_states();
    let q = bands.rates();
    let mut x = Array1::zeros(n);
    if n > 50 {
        let mut log_x = vec![0.0f64; n];
        for j in 0..n - 1 {
            log_x[j + 1] = log_x[j] + q[2 * j].ln() - q[2 * j + 1].ln();
        }
        let max_log = log_x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (xi, li) in x.iter_mut().zip(log_x.iter()) {
            *xi = (li - max_log).exp();
        }
    } else {
        x[0] = 1.0;
        for j in 0..n - 1 {
            x[j + 1] = x[j] * q[2 * j] / q[2 * j + 1];
        }
    }
    let sum = x.sum();
    ProbabilityVector::from_normalized(x / sum)
}

/// The positivity constant `gamma = min(delta*alpha, 1 - 2*delta*beta)`
/// paired with the chain size, so the floors `gamma^n` are available.
///
/// Requires `0 < delta < 1/(2*beta)`.
pub fn positivity_floor(delta: f64, bounds: &RateBounds, n_states: usize) -> Result<SimplexSlice> {
    bounds.validate_step(delta)?;
    if delta == 0.0 {
        return Err(Error::InvalidParameter(
            "positivity floor requires a strictly positive step".into(),
        ));
    }
    if n_states < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_states must be at least 2, got {n_states}"
        )));
    }
    let gamma = (delta * bounds.alpha()).min(1.0 - 2.0 * delta * bounds.beta());
    Ok(SimplexSlice { gamma, n_states })
}
