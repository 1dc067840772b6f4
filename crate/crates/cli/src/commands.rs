//! The experiment subcommands, each a pure function from a validated
//! config to an output structure.

use pullback_core::{
    attractor_path, build_generator, contraction_certificate, default_max_depth,
    forward_tracking_report, positivity_floor, slice_diameter, stationary_distribution,
    Error as CoreError, ProbabilityVector,
};

use crate::config::ExperimentConfig;
use crate::output::{AttractorRow, ContractionOutput, StationaryOutput, TraceRowOut};
use crate::CliError;

fn from_core(error: CoreError) -> CliError {
    match &error {
        CoreError::Unconverged { .. } => CliError::Unconverged(error.to_string()),
        _ => CliError::Config(error.to_string()),
    }
}

/// Stationary distribution of the chain at index 0, with the max-norm
/// residual of the generator applied to it.
pub fn run_stationary(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
) -> Result<StationaryOutput, CliError> {
    let driver = config.build_driver(seed_override)?;
    let bands = driver.env_at(0);
    let vector = stationary_distribution(&bands);
    let residual_max = build_generator(&bands).residual_inf(&vector);
    Ok(StationaryOutput {
        vector: vector.as_slice().to_vec(),
        residual_max,
    })
}

/// The attractor path over the configured window.
pub fn run_attractor(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
) -> Result<Vec<AttractorRow>, CliError> {
    let driver = config.build_driver(seed_override)?;
    let (from, to) = config.window;
    let path = attractor_path(&driver, from, to, config.delta, config.tolerance)
        .map_err(from_core)?;
    Ok(path
        .into_iter()
        .map(|point| AttractorRow {
            index: point.target_index,
            point: point.point.as_slice().to_vec(),
            error_radius: point.error_radius,
            depth: point.pullback_depth,
        })
        .collect())
}

/// Forward-tracking trace from the uniform vector over the configured
/// horizon, starting at the window's left edge.
pub fn run_trace(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
) -> Result<Vec<TraceRowOut>, CliError> {
    let driver = config.build_driver(seed_override)?;
    let p0 = ProbabilityVector::uniform(config.n_states);
    let trace = forward_tracking_report(
        &driver,
        &p0,
        config.window.0,
        config.horizon,
        config.delta,
        config.tolerance,
    )
    .map_err(from_core)?;
    Ok(trace
        .rows()
        .iter()
        .map(|row| TraceRowOut {
            step: row.step,
            image_diameter: row.image_diameter,
            forward_distance: row.forward_distance,
            certified_bound: row.certified_bound,
        })
        .collect())
}

/// The contraction data of the configured chain: the positivity constant,
/// the component floor, the Hilbert diameter of the absorbing slice, and
/// the per-block Birkhoff ratio.
pub fn run_contraction(config: &ExperimentConfig) -> Result<ContractionOutput, CliError> {
    let slice =
        positivity_floor(config.delta, &config.bounds, config.n_states).map_err(from_core)?;
    let certificate = contraction_certificate(&slice).map_err(from_core)?;
    Ok(ContractionOutput {
        gamma: slice.gamma(),
        gamma_floor: slice.gamma_floor(),
        slice_diameter: slice_diameter(&slice),
        contraction_ratio: certificate.birkhoff_ratio,
        block_length: certificate.block_length,
    })
}

/// Depth budget the solver runs with for this config.
pub fn depth_budget(config: &ExperimentConfig) -> usize {
    default_max_depth(config.n_states, config.tolerance)
}
