//! Pullback computation of the singleton attractor with a certified
//! Hilbert-metric error radius, forward-tracking verification, the
//! periodic-case fixed point, and the autonomous spectral check.
//!
//! The pullback solver deepens the product `L_{t-1} L_{t-2} ... L_{t-n}`
//! one factor at a time. The Hilbert diameter of the product's columns is
//! the diameter of the image of the whole simplex, a non-increasing
//! sequence that decays geometrically per block of `N-1` factors; once it
//! drops below the requested tolerance, any column is within that diameter
//! of the true attractor point, so the normalized first column is returned
//! together with the diameter as a certificate.

use ndarray::Array2;

use crate::chain::{
    build_generator, build_transition, positivity_floor, BandParameters, ProbabilityVector,
    RateBounds, SimplexSlice,
};
use crate::cocycle::slice_diameter;
use crate::driver::EnvironmentDriver;
use crate::error::{Error, Result};
use crate::hilbert::{
    birkhoff_ratio, hilbert_distance, project_view_to_simplex, projective_diameter,
    simplex_image_diameter,
};

/// Default Hilbert-metric tolerance for attractor points.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Default power-iteration count for the spectral check.
pub const DEFAULT_POWER_ITERATIONS: usize = 10_000;

/// Default pullback depth budget: `10 * N * ceil(ln(1/epsilon))`.
pub fn default_max_depth(n_states: usize, epsilon: f64) -> usize {
    let factor = (1.0 / epsilon).ln().ceil().max(1.0) as usize;
    10 * n_states * factor
}

/// One attractor point with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorPoint {
    /// The computed point of the simplex.
    pub point: ProbabilityVector,
    /// Hilbert-metric bound on the distance to the true attractor point.
    pub error_radius: f64,
    /// Number of past factors used to certify the point.
    pub pullback_depth: usize,
    /// Absolute time the point belongs to.
    pub target_index: i64,
}

/// One row of a forward-tracking trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// Forward step `n` (0 is the starting time).
    pub step: usize,
    /// Hilbert diameter of the image of the whole simplex under the
    /// product of the first `n` forward factors; infinite until the
    /// product fills its band.
    pub image_diameter: f64,
    /// Hilbert distance from the iterate to the attractor point at the
    /// same time.
    pub forward_distance: f64,
    /// Certified geometric bound on the image diameter, decaying by the
    /// block contraction ratio every `N-1` steps.
    pub certified_bound: f64,
}

/// Per-step record of image diameters and forward-tracking distances.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    rows: Vec<TraceRow>,
    block_length: usize,
    contraction_ratio: f64,
    tolerance: f64,
}

impl ConvergenceTrace {
    /// The recorded rows, one per forward step.
    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    /// Factors per contraction block (`N-1`).
    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// The uniform block contraction ratio `tanh(slice diameter / 4)`.
    pub fn contraction_ratio(&self) -> f64 {
        self.contraction_ratio
    }

    /// True iff the image diameters never increase (within `1e-12`).
    pub fn diameters_non_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| {
            let (prev, next) = (w[0].image_diameter, w[1].image_diameter);
            !prev.is_finite() || next <= prev + 1e-12
        })
    }

    /// True iff the forward distances obey the block-geometric decay
    /// `distance(n + N - 1) <= ratio * distance(n) + 4 * tolerance`.
    /// Distances below the floating-point floor are treated as converged.
    pub fn block_decay_ok(&self) -> bool {
        let floor = (4.0 * self.tolerance).max(2e-12);
        let m = self.block_length;
        (0..self.rows.len().saturating_sub(m)).all(|n| {
            let before = self.rows[n].forward_distance;
            let after = self.rows[n + m].forward_distance;
            if !before.is_finite() || before <= floor {
                return true;
            }
            after <= self.contraction_ratio * before + 4.0 * self.tolerance
        })
    }
}

fn validate_tolerance(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be strictly positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// `rho_H` between two probability vectors, as a plain `f64`.
pub fn point_distance(a: &ProbabilityVector, b: &ProbabilityVector) -> Result<f64> {
    Ok(hilbert_distance(a.as_slice(), b.as_slice())?.value())
}

fn solved_point(
    matrix: &Array2<f64>,
    diameter: f64,
    depth: usize,
    target: i64,
) -> AttractorPoint {
    let point = project_view_to_simplex(matrix.column(0)).expect("stochastic column");
    AttractorPoint {
        point,
        error_radius: diameter,
        pullback_depth: depth,
        target_index: target,
    }
}

/// Depth after which the image diameter is guaranteed below `epsilon`:
/// one dissipativity block plus enough contraction blocks.
fn a_priori_depth_bound(slice: &SimplexSlice, epsilon: f64) -> f64 {
    let block = (slice.n_states() - 1) as f64;
    let diameter = slice_diameter(slice);
    let ratio = birkhoff_ratio(diameter).expect("finite diameter");
    if epsilon > diameter {
        return block;
    }
    let blocks_needed = ((epsilon / diameter).ln() / ratio.ln()).ceil().max(0.0);
    block * (1.0 + blocks_needed)
}

/// Pullback solve that also records the image diameter at every depth.
///
/// Deepens the product by one past factor per step and stops as soon as
/// the Hilbert diameter of the product columns drops below `epsilon`.
/// Depths up to `N-2` are structurally banded, so their diameter is
/// infinite and the loop can never stop before the dissipativity block is
/// complete.
pub fn pullback_point_traced(
    driver: &EnvironmentDriver,
    target: i64,
    delta: f64,
    epsilon: f64,
    max_depth: usize,
) -> Result<(AttractorPoint, Vec<f64>)> {
    validate_tolerance(epsilon)?;
    let slice = positivity_floor(delta, driver.bounds(), driver.n_states())?;
    let n = driver.n_states();
    let mut acc: Array2<f64> = Array2::eye(n);
    let mut diameters = Vec::new();
    let mut diameter = f64::INFINITY;
    for depth in 1..=max_depth {
        let factor = driver.transition_at(target - depth as i64, delta)?;
        // The new factor is the most-past-facing one: it acts first, so it
        // multiplies the accumulated product from the right.
        acc = acc.dot(factor.entries());
        diameter = simplex_image_diameter(&acc);
        diameters.push(diameter);
        if diameter < epsilon {
            let point = solved_point(&acc, diameter, depth, target);
            debug_assert!(
                (depth as f64) <= a_priori_depth_bound(&slice, epsilon),
                "converged later than the a priori depth bound"
            );
            debug_assert!(point
                .point
                .as_slice()
                .iter()
                .all(|&c| c >= slice.gamma_floor() - 1e-12));
            return Ok((point, diameters));
        }
    }
    Err(Error::Unconverged {
        best: Box::new(solved_point(&acc, diameter, max_depth, target)),
        depth: max_depth,
        radius: diameter,
        tolerance: epsilon,
    })
}

/// The attractor point at `target`, certified within `epsilon` in the
/// Hilbert metric.
pub fn pullback_point(
    driver: &EnvironmentDriver,
    target: i64,
    delta: f64,
    epsilon: f64,
    max_depth: usize,
) -> Result<AttractorPoint> {
    pullback_point_traced(driver, target, delta, epsilon, max_depth).map(|(point, _)| point)
}

/// One attractor point per index of the inclusive window `[from, to]`.
pub fn attractor_path(
    driver: &EnvironmentDriver,
    from: i64,
    to: i64,
    delta: f64,
    epsilon: f64,
) -> Result<Vec<AttractorPoint>> {
    if from > to {
        return Err(Error::InvalidParameter(format!(
            "window must satisfy from <= to, got [{from}, {to}]"
        )));
    }
    let max_depth = default_max_depth(driver.n_states(), epsilon);
    (from..=to)
        .map(|index| pullback_point(driver, index, delta, epsilon, max_depth))
        .collect()
}

/// Iterates `p` forward from `target_start` and records, per step, the
/// image diameter of the forward product, the Hilbert distance to the
/// attractor path, and a certified geometric bound on the diameter.
///
/// A start on the simplex boundary is allowed: the first distances are
/// infinite until the orbit enters the interior, which takes at most
/// `N-1` steps.
pub fn forward_tracking_report(
    driver: &EnvironmentDriver,
    p0: &ProbabilityVector,
    target_start: i64,
    steps: usize,
    delta: f64,
    epsilon: f64,
) -> Result<ConvergenceTrace> {
    if p0.len() != driver.n_states() {
        return Err(Error::DimensionMismatch {
            expected: driver.n_states(),
            got: p0.len(),
        });
    }
    let slice = positivity_floor(delta, driver.bounds(), driver.n_states())?;
    let certificate = crate::cocycle::contraction_certificate(&slice)?;
    let path = attractor_path(driver, target_start, target_start + steps as i64, delta, epsilon)?;

    let n = driver.n_states();
    let mut acc: Array2<f64> = Array2::eye(n);
    let mut p = p0.clone();
    let mut diameters = Vec::with_capacity(steps + 1);
    let mut distances = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let diameter = if step == 0 {
            f64::INFINITY
        } else {
            simplex_image_diameter(&acc)
        };
        diameters.push(diameter);
        distances.push(point_distance(&p, &path[step].point)?);
        if step < steps {
            let factor = driver.transition_at(target_start + step as i64, delta)?;
            acc = factor.entries().dot(&acc);
            p = factor.apply(&p);
        }
    }

    // Certified bound: the first finite diameter shows up within one
    // dissipativity block, and every further block contracts it by the
    // certificate ratio. An empty product has infinite diameter, so the
    // reference is the first finite entry rather than row 0.
    let first_finite = diameters.iter().position(|d| d.is_finite());
    let block = certificate.block_length;
    let ratio = certificate.birkhoff_ratio;
    let rows: Vec<TraceRow> = (0..=steps)
        .map(|step| {
            let certified_bound = match first_finite {
                Some(n0) if step >= n0 => {
                    let exponent = (step / block).saturating_sub(1) as i32;
                    ratio.powi(exponent) * diameters[n0]
                }
                _ => f64::INFINITY,
            };
            TraceRow {
                step,
                image_diameter: diameters[step],
                forward_distance: distances[step],
                certified_bound,
            }
        })
        .collect();

    let trace = ConvergenceTrace {
        rows,
        block_length: block,
        contraction_ratio: ratio,
        tolerance: epsilon,
    };
    debug_assert!(trace.diameters_non_increasing());
    debug_assert!(trace.block_decay_ok());
    Ok(trace)
}

/// The `T` phase points of the attractor of a periodically driven chain.
///
/// Finds the fixed point of the period map by iterating the normalized map
/// with a Banach-style stopping rule, then walks it through the phases.
/// The period map is raised to the smallest power whose factor count
/// reaches `N-1`, so its projective diameter is finite and the contraction
/// ratio is strictly below one.
pub fn periodic_attractor(
    blocks: &[BandParameters],
    delta: f64,
    epsilon: f64,
) -> Result<Vec<AttractorPoint>> {
    validate_tolerance(epsilon)?;
    if blocks.is_empty() {
        return Err(Error::InvalidParameter(
            "periodic attractor needs at least one block".into(),
        ));
    }
    let n = blocks[0].n_states();
    let bounds = RateBounds::enclosing(blocks)?;
    let period = blocks.len();
    let transitions: Vec<Array2<f64>> = blocks
        .iter()
        .map(|block| {
            build_transition(&build_generator(block), delta, &bounds)
                .map(|l| l.entries().clone())
        })
        .collect::<Result<_>>()?;

    let mut period_map: Array2<f64> = Array2::eye(n);
    for l in &transitions {
        period_map = l.dot(&period_map);
    }
    // Power up until the factor count reaches the dissipativity block.
    let power = (n - 1).div_ceil(period).max(1);
    let mut iteration_map = period_map.clone();
    for _ in 1..power {
        iteration_map = period_map.dot(&iteration_map);
    }
    let ratio = birkhoff_ratio(projective_diameter(&iteration_map))?;
    debug_assert!(ratio < 1.0);

    let mut x = ProbabilityVector::uniform(n);
    let mut iterations = 0usize;
    let budget = 100_000usize;
    let radius = loop {
        let next = project_view_to_simplex(iteration_map.dot(x.components()).view())?;
        let gap = point_distance(&next, &x)?;
        x = next;
        iterations += 1;
        let radius = ratio * gap / (1.0 - ratio);
        if radius <= epsilon {
            break radius;
        }
        if iterations >= budget {
            return Err(Error::Unconverged {
                best: Box::new(AttractorPoint {
                    point: x,
                    error_radius: radius,
                    pullback_depth: iterations * power * period,
                    target_index: 0,
                }),
                depth: iterations,
                radius,
                tolerance: epsilon,
            });
        }
    };

    let depth = iterations * power * period;
    let mut phases = Vec::with_capacity(period);
    phases.push(AttractorPoint {
        point: x.clone(),
        error_radius: radius,
        pullback_depth: depth,
        target_index: 0,
    });
    for (j, l) in transitions.iter().take(period - 1).enumerate() {
        let next = project_view_to_simplex(l.dot(x.components()).view())?;
        x = next.clone();
        phases.push(AttractorPoint {
            point: next,
            error_radius: radius,
            pullback_depth: depth,
            target_index: j as i64 + 1,
        });
    }
    Ok(phases)
}

/// Estimated magnitude of the subdominant eigenvalue of a column-stochastic
/// matrix: power iteration restricted to the zero-sum subspace, with a
/// re-projection against the all-ones left eigenvector at every step.
pub fn subdominant_spectral_bound(matrix: &Array2<f64>, iterations: usize) -> f64 {
    let n = matrix.nrows();
    if n < 2 {
        return 0.0;
    }
    let mut v = ndarray::Array1::zeros(n);
    v[0] = 1.0 / 2.0f64.sqrt();
    v[1] = -1.0 / 2.0f64.sqrt();
    let mut ratio = 0.0;
    for _ in 0..iterations.max(1) {
        let mut w = matrix.dot(&v);
        let mean = w.sum() / n as f64;
        w.mapv_inplace(|x| x - mean);
        let norm = w.dot(&w).sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        ratio = norm;
        v = w / norm;
    }
    ratio
}

/// Largest Hilbert-metric defect of the one-step invariance
/// `L_n a_n = a_{n+1}` along a computed path.
pub fn equivariance_defect(
    driver: &EnvironmentDriver,
    from: i64,
    delta: f64,
    path: &[AttractorPoint],
) -> Result<f64> {
    let mut defect = 0.0f64;
    for (i, pair) in path.windows(2).enumerate() {
        let l = driver.transition_at(from + i as i64, delta)?;
        let pushed = l.apply(&pair[0].point);
        defect = defect.max(point_distance(&pushed, &pair[1].point)?);
    }
    Ok(defect)
}
