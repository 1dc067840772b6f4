//! The `verify` subcommand: runs the whole invariant suite against the
//! configured chain and prints one pass/fail line per property.

use std::io::Write;

use ndarray::Array2;
use pullback_core::{
    attractor_path, birkhoff_ratio, cocycle_matrix, contraction_certificate, equivariance_defect,
    hilbert_distance, positivity_floor, projective_diameter, pullback_point_traced,
    stationary_distribution, verify_band_structure, verify_dissipativity, EnvironmentDriver,
    SimplexSlice,
};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Set this environment variable to corrupt one matrix entry inside the
/// contraction check; the suite must then fail. Negative-control hook for
/// the test harness, not a user-facing switch.
pub const FAULT_ENV_VAR: &str = "PULLBACK_VERIFY_INJECT_FAULT";

struct Sampler(u64);

impl Sampler {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let unit = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + unit * (hi - lo)
    }

    fn index(&mut self, span: i64) -> i64 {
        (self.next_u64() % (2 * span as u64 + 1)) as i64 - span
    }

    fn positive_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform(1e-3, 1e3)).collect()
    }
}

type CheckResult = Result<(), String>;

fn check_generator_column_sums(driver: &EnvironmentDriver, sampler: &mut Sampler) -> CheckResult {
    let n = driver.n_states();
    for _ in 0..50 {
        let q = pullback_core::build_generator(&driver.env_at(sampler.index(1000)));
        for j in 0..n {
            let sum: f64 = q.entries().column(j).sum();
            if sum.abs() > 1e-14 * n as f64 {
                return Err(format!("column {j} sums to {sum}"));
            }
        }
    }
    Ok(())
}

fn check_transition_stochasticity(
    driver: &EnvironmentDriver,
    delta: f64,
    sampler: &mut Sampler,
) -> CheckResult {
    let n = driver.n_states();
    for _ in 0..50 {
        let l = driver
            .transition_at(sampler.index(1000), delta)
            .map_err(|e| e.to_string())?;
        for j in 0..n {
            let col = l.entries().column(j);
            let sum: f64 = col.sum();
            if (sum - 1.0).abs() > 1e-14 * n as f64 {
                return Err(format!("column {j} sums to {sum}"));
            }
            if col.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(format!("column {j} leaves [0, 1]"));
            }
        }
    }
    Ok(())
}

fn check_metric_symmetry(n: usize, sampler: &mut Sampler) -> CheckResult {
    for _ in 0..200 {
        let x = sampler.positive_vec(n);
        let y = sampler.positive_vec(n);
        let a = hilbert_distance(&x, &y).map_err(|e| e.to_string())?.value();
        let b = hilbert_distance(&y, &x).map_err(|e| e.to_string())?.value();
        if (a - b).abs() > 1e-12 * a.max(1.0) {
            return Err(format!("rho(x,y)={a} but rho(y,x)={b}"));
        }
    }
    Ok(())
}

fn check_metric_triangle(n: usize, sampler: &mut Sampler) -> CheckResult {
    for _ in 0..200 {
        let x = sampler.positive_vec(n);
        let y = sampler.positive_vec(n);
        let z = sampler.positive_vec(n);
        let xz = hilbert_distance(&x, &z).map_err(|e| e.to_string())?.value();
        let xy = hilbert_distance(&x, &y).map_err(|e| e.to_string())?.value();
        let yz = hilbert_distance(&y, &z).map_err(|e| e.to_string())?.value();
        if xz > xy + yz + 1e-12 {
            return Err(format!("rho(x,z)={xz} exceeds {xy}+{yz}"));
        }
    }
    Ok(())
}

fn check_metric_scale_invariance(n: usize, sampler: &mut Sampler) -> CheckResult {
    for _ in 0..200 {
        let x = sampler.positive_vec(n);
        let y = sampler.positive_vec(n);
        let s = sampler.uniform(1e-6, 1e6);
        let t = sampler.uniform(1e-6, 1e6);
        let base = hilbert_distance(&x, &y).map_err(|e| e.to_string())?.value();
        let sx: Vec<f64> = x.iter().map(|v| s * v).collect();
        let ty: Vec<f64> = y.iter().map(|v| t * v).collect();
        let scaled = hilbert_distance(&sx, &ty).map_err(|e| e.to_string())?.value();
        if (base - scaled).abs() > 1e-10 * base.max(1.0) {
            return Err(format!("rho changed from {base} to {scaled} under scaling"));
        }
    }
    Ok(())
}

fn check_birkhoff_contraction(
    driver: &EnvironmentDriver,
    slice: &SimplexSlice,
    delta: f64,
    sampler: &mut Sampler,
) -> CheckResult {
    let n = driver.n_states();
    let certificate = contraction_certificate(slice).map_err(|e| e.to_string())?;
    let inject_fault = std::env::var_os(FAULT_ENV_VAR).is_some();
    for _ in 0..20 {
        let start = sampler.index(500);
        let block = cocycle_matrix(driver, start, n - 1, delta).map_err(|e| e.to_string())?;
        let mut matrix: Array2<f64> = block.matrix().clone();
        if inject_fault {
            matrix[(0, 0)] *= 1e6;
        }
        // Every dissipativity block maps the simplex into the absorbing
        // slice, so its projective diameter must stay under the slice
        // diameter and its contraction under the certificate ratio.
        let diameter = projective_diameter(&matrix);
        if diameter > certificate.projective_diameter + 1e-9 {
            return Err(format!(
                "block at {start} has diameter {diameter}, certificate allows {}",
                certificate.projective_diameter
            ));
        }
        let ratio = birkhoff_ratio(diameter).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let x = sampler.positive_vec(n);
            let y = sampler.positive_vec(n);
            let before = hilbert_distance(&x, &y).map_err(|e| e.to_string())?.value();
            let px = matrix.dot(&ndarray::Array1::from_vec(x));
            let py = matrix.dot(&ndarray::Array1::from_vec(y));
            let after = hilbert_distance(
                px.as_slice().expect("contiguous"),
                py.as_slice().expect("contiguous"),
            )
            .map_err(|e| e.to_string())?
            .value();
            if after > ratio * before + 1e-10 {
                return Err(format!(
                    "block at {start} contracted {before} -> {after}, ratio bound {ratio}"
                ));
            }
        }
    }
    Ok(())
}

fn check_band_structure(
    driver: &EnvironmentDriver,
    slice: &SimplexSlice,
    delta: f64,
    sampler: &mut Sampler,
) -> CheckResult {
    let n = driver.n_states();
    for _ in 0..20 {
        let start = sampler.index(500);
        for length in 1..n {
            let product =
                cocycle_matrix(driver, start, length, delta).map_err(|e| e.to_string())?;
            let report = verify_band_structure(&product, slice);
            if !report.passes() {
                return Err(format!(
                    "length-{length} product at {start}: banded={}, min={}, floor={}",
                    report.is_banded, report.band_min, report.floor
                ));
            }
        }
    }
    Ok(())
}

fn check_dissipativity(
    driver: &EnvironmentDriver,
    slice: &SimplexSlice,
    delta: f64,
    sampler: &mut Sampler,
) -> CheckResult {
    let n = driver.n_states();
    for _ in 0..20 {
        let start = sampler.index(500);
        let block = cocycle_matrix(driver, start, n - 1, delta).map_err(|e| e.to_string())?;
        if !verify_dissipativity(&block, slice).map_err(|e| e.to_string())? {
            return Err(format!("block at {start} misses the component floor"));
        }
    }
    Ok(())
}

fn check_cocycle_property(
    driver: &EnvironmentDriver,
    delta: f64,
    sampler: &mut Sampler,
) -> CheckResult {
    for _ in 0..20 {
        let start = sampler.index(500);
        let n = (sampler.next_u64() % 5 + 1) as usize;
        let m = (sampler.next_u64() % 5 + 1) as usize;
        let whole = cocycle_matrix(driver, start, n + m, delta).map_err(|e| e.to_string())?;
        let first = cocycle_matrix(driver, start, m, delta).map_err(|e| e.to_string())?;
        let second =
            cocycle_matrix(driver, start + m as i64, n, delta).map_err(|e| e.to_string())?;
        let composed = second.matrix().dot(first.matrix());
        let discrepancy = whole
            .matrix()
            .iter()
            .zip(composed.iter())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        if discrepancy > 1e-12 {
            return Err(format!(
                "splitting at {start} with (m, n)=({m}, {n}) differs by {discrepancy}"
            ));
        }
    }
    Ok(())
}

fn check_driver_bounds(driver: &EnvironmentDriver, sampler: &mut Sampler) -> CheckResult {
    let alpha = driver.bounds().alpha();
    let beta = driver.bounds().beta();
    for _ in 0..2000 {
        let block = driver.env_at(sampler.index(100_000));
        for &q in block.rates() {
            if !(alpha..=beta).contains(&q) {
                return Err(format!("rate {q} escapes [{alpha}, {beta}]"));
            }
        }
    }
    Ok(())
}

fn check_shift_equivariance(driver: &EnvironmentDriver, sampler: &mut Sampler) -> CheckResult {
    for _ in 0..200 {
        let m = sampler.index(1000);
        let n = sampler.index(1000);
        let lhs = driver.shift(m).env_at(n);
        let rhs = driver.env_at(n + m);
        let same = lhs
            .rates()
            .iter()
            .zip(rhs.rates().iter())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            return Err(format!("shift({m}) then env_at({n}) differs from env_at({})", n + m));
        }
    }
    Ok(())
}

fn check_stationary_residual(driver: &EnvironmentDriver, sampler: &mut Sampler) -> CheckResult {
    for _ in 0..20 {
        let bands = driver.env_at(sampler.index(1000));
        let p = stationary_distribution(&bands);
        let residual = pullback_core::build_generator(&bands).residual_inf(&p);
        if residual > 1e-12 {
            return Err(format!("residual {residual} above 1e-12"));
        }
    }
    Ok(())
}

fn check_attractor_equivariance(
    driver: &EnvironmentDriver,
    delta: f64,
    epsilon: f64,
) -> CheckResult {
    let path = attractor_path(driver, 0, 8, delta, epsilon).map_err(|e| e.to_string())?;
    let defect = equivariance_defect(driver, 0, delta, &path).map_err(|e| e.to_string())?;
    if defect > 2.0 * epsilon {
        return Err(format!("equivariance defect {defect} above {}", 2.0 * epsilon));
    }
    Ok(())
}

fn check_diameter_nesting_and_decay(
    driver: &EnvironmentDriver,
    slice: &SimplexSlice,
    delta: f64,
    epsilon: f64,
) -> CheckResult {
    let certificate = contraction_certificate(slice).map_err(|e| e.to_string())?;
    let depth_budget = pullback_core::default_max_depth(driver.n_states(), epsilon);
    let (_, diameters) =
        pullback_point_traced(driver, 0, delta, epsilon, depth_budget).map_err(|e| e.to_string())?;
    for (i, w) in diameters.windows(2).enumerate() {
        if w[0].is_finite() && w[1] > w[0] + 1e-12 {
            return Err(format!("diameter grew at depth {i}: {} -> {}", w[0], w[1]));
        }
    }
    let block = certificate.block_length;
    for i in 0..diameters.len().saturating_sub(block) {
        if diameters[i].is_finite()
            && diameters[i + block] > certificate.birkhoff_ratio * diameters[i] + 1e-10
        {
            return Err(format!(
                "block decay failed at depth {i}: {} -> {}",
                diameters[i],
                diameters[i + block]
            ));
        }
    }
    Ok(())
}

/// Runs every check, printing one `PASS name` / `FAIL name: detail` line
/// per property. Returns whether all of them passed.
pub fn run_verify(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
    out: &mut impl Write,
) -> Result<bool, CliError> {
    let driver = config.build_driver(seed_override)?;
    let slice = positivity_floor(config.delta, &config.bounds, config.n_states)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let delta = config.delta;
    let epsilon = config.tolerance;
    let n = config.n_states;
    let mut sampler = Sampler(0x5EED);

    let checks: Vec<(&str, CheckResult)> = vec![
        (
            "generator-column-sums",
            check_generator_column_sums(&driver, &mut sampler),
        ),
        (
            "transition-stochasticity",
            check_transition_stochasticity(&driver, delta, &mut sampler),
        ),
        ("metric-symmetry", check_metric_symmetry(n, &mut sampler)),
        (
            "metric-triangle-inequality",
            check_metric_triangle(n, &mut sampler),
        ),
        (
            "metric-scale-invariance",
            check_metric_scale_invariance(n, &mut sampler),
        ),
        (
            "birkhoff-contraction",
            check_birkhoff_contraction(&driver, &slice, delta, &mut sampler),
        ),
        (
            "band-structure",
            check_band_structure(&driver, &slice, delta, &mut sampler),
        ),
        (
            "dissipativity",
            check_dissipativity(&driver, &slice, delta, &mut sampler),
        ),
        (
            "cocycle-property",
            check_cocycle_property(&driver, delta, &mut sampler),
        ),
        ("driver-bounds", check_driver_bounds(&driver, &mut sampler)),
        (
            "shift-equivariance",
            check_shift_equivariance(&driver, &mut sampler),
        ),
        (
            "stationary-residual",
            check_stationary_residual(&driver, &mut sampler),
        ),
        (
            "attractor-equivariance",
            check_attractor_equivariance(&driver, delta, epsilon),
        ),
        (
            "diameter-nesting-and-decay",
            check_diameter_nesting_and_decay(&driver, &slice, delta, epsilon),
        ),
    ];

    let mut all_passed = true;
    for (name, result) in checks {
        match result {
            Ok(()) => writeln!(out, "PASS {name}").map_err(|e| CliError::Io(e.to_string()))?,
            Err(detail) => {
                all_passed = false;
                writeln!(out, "FAIL {name}: {detail}")
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
    }
    Ok(all_passed)
}
