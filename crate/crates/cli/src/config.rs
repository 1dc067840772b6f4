//! Configuration file parsing and validation.
//!
//! The config is a TOML document. Unknown keys are rejected, and every
//! numeric constraint of the underlying solver is re-validated at parse
//! time so a bad run fails before any work starts.

use std::path::PathBuf;

use pullback_core::{BandParameters, EnvironmentDriver, RateBounds, RateDistribution};
use serde::Deserialize;

use crate::CliError;

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Which environment the experiment runs in.
#[derive(Debug, Clone, PartialEq)]
pub enum DriverSpec {
    Constant { rates: Vec<f64> },
    Periodic { blocks: Vec<Vec<f64>> },
    Random { seed: u64, distribution: RateDistribution },
}

/// A fully validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_states: usize,
    pub delta: f64,
    pub bounds: RateBounds,
    pub tolerance: f64,
    pub horizon: usize,
    pub window: (i64, i64),
    pub output: PathBuf,
    pub format: OutputFormat,
    pub driver: DriverSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_states: usize,
    delta: f64,
    alpha: f64,
    beta: f64,
    tolerance: Option<f64>,
    horizon: Option<usize>,
    window: Option<[i64; 2]>,
    output: Option<String>,
    format: Option<String>,
    driver: RawDriver,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDriver {
    kind: String,
    rates: Option<Vec<f64>>,
    blocks: Option<Vec<Vec<f64>>>,
    seed: Option<u64>,
    distribution: Option<String>,
}

fn semantic(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

fn validate_rates(
    rates: &[f64],
    n_states: usize,
    bounds: &RateBounds,
    what: &str,
) -> Result<BandParameters, CliError> {
    let bands = BandParameters::new(n_states, rates.to_vec())
        .map_err(|e| semantic(format!("{what}: {e}")))?;
    if !bounds.contains(&bands) {
        return Err(semantic(format!(
            "{what}: every rate must lie in [alpha, beta] = [{}, {}]",
            bounds.alpha(),
            bounds.beta()
        )));
    }
    Ok(bands)
}

/// Parses and validates a configuration document.
///
/// Syntax errors keep the TOML parser's line/column diagnostics; semantic
/// errors name the offending key and the violated constraint.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))?;

    if raw.n_states < 2 {
        return Err(semantic(format!(
            "n_states must be at least 2, got {}",
            raw.n_states
        )));
    }
    let bounds = RateBounds::new(raw.alpha, raw.beta).map_err(|e| semantic(e.to_string()))?;
    bounds.validate_step(raw.delta).map_err(|e| {
        semantic(format!(
            "delta violates the step bound delta < 1/(2*beta): {e}"
        ))
    })?;
    if raw.delta <= 0.0 {
        return Err(semantic(format!(
            "delta must be strictly positive, got {}",
            raw.delta
        )));
    }

    let tolerance = raw.tolerance.unwrap_or(pullback_core::DEFAULT_TOLERANCE);
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(semantic(format!(
            "tolerance must be strictly positive, got {tolerance}"
        )));
    }
    let horizon = raw.horizon.unwrap_or(100);
    let window = raw.window.unwrap_or([0, 20]);
    if window[0] > window[1] {
        return Err(semantic(format!(
            "window must satisfy from <= to, got [{}, {}]",
            window[0], window[1]
        )));
    }

    let format = match raw.format.as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => {
            return Err(semantic(format!(
                "format must be \"csv\" or \"json\", got \"{other}\""
            )))
        }
    };

    let default_rates = || vec![0.5 * (raw.alpha + raw.beta); 2 * raw.n_states - 2];
    let driver = match raw.driver.kind.as_str() {
        "constant" => {
            if raw.driver.blocks.is_some() || raw.driver.seed.is_some() {
                return Err(semantic(
                    "constant driver accepts only the \"rates\" key".to_string(),
                ));
            }
            let rates = raw.driver.rates.unwrap_or_else(default_rates);
            validate_rates(&rates, raw.n_states, &bounds, "driver.rates")?;
            DriverSpec::Constant { rates }
        }
        "periodic" => {
            if raw.driver.rates.is_some() || raw.driver.seed.is_some() {
                return Err(semantic(
                    "periodic driver accepts only the \"blocks\" key".to_string(),
                ));
            }
            let blocks = raw
                .driver
                .blocks
                .ok_or_else(|| semantic("periodic driver requires \"blocks\"".to_string()))?;
            if blocks.is_empty() {
                return Err(semantic("driver.blocks must not be empty".to_string()));
            }
            for (i, block) in blocks.iter().enumerate() {
                validate_rates(block, raw.n_states, &bounds, &format!("driver.blocks[{i}]"))?;
            }
            DriverSpec::Periodic { blocks }
        }
        "random" => {
            if raw.driver.rates.is_some() || raw.driver.blocks.is_some() {
                return Err(semantic(
                    "random driver accepts only \"seed\" and \"distribution\"".to_string(),
                ));
            }
            let distribution = match raw.driver.distribution.as_deref() {
                None | Some("uniform") => RateDistribution::Uniform,
                Some("two-point") => RateDistribution::TwoPoint,
                Some(other) => {
                    return Err(semantic(format!(
                        "driver.distribution must be \"uniform\" or \"two-point\", got \"{other}\""
                    )))
                }
            };
            DriverSpec::Random {
                seed: raw.driver.seed.unwrap_or(0),
                distribution,
            }
        }
        other => {
            return Err(semantic(format!(
                "driver.kind must be \"constant\", \"periodic\", or \"random\", got \"{other}\""
            )))
        }
    };

    Ok(ExperimentConfig {
        n_states: raw.n_states,
        delta: raw.delta,
        bounds,
        tolerance,
        horizon,
        window: (window[0], window[1]),
        output: PathBuf::from(raw.output.unwrap_or_else(|| "out".to_string())),
        format,
        driver,
    })
}

impl ExperimentConfig {
    /// Builds the configured environment driver. A seed override is only
    /// meaningful for random drivers and is rejected otherwise.
    pub fn build_driver(&self, seed_override: Option<u64>) -> Result<EnvironmentDriver, CliError> {
        match (&self.driver, seed_override) {
            (DriverSpec::Random { distribution, seed }, over) => EnvironmentDriver::random(
                self.n_states,
                self.bounds,
                over.unwrap_or(*seed),
                *distribution,
            )
            .map_err(|e| semantic(e.to_string())),
            (_, Some(_)) => Err(semantic(
                "--seed can only override a random driver".to_string(),
            )),
            (DriverSpec::Constant { rates }, None) => {
                let bands = BandParameters::new(self.n_states, rates.clone())
                    .map_err(|e| semantic(e.to_string()))?;
                EnvironmentDriver::constant(bands, self.bounds)
                    .map_err(|e| semantic(e.to_string()))
            }
            (DriverSpec::Periodic { blocks }, None) => {
                let blocks = blocks
                    .iter()
                    .map(|b| BandParameters::new(self.n_states, b.clone()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| semantic(e.to_string()))?;
                EnvironmentDriver::periodic(blocks, self.bounds)
                    .map_err(|e| semantic(e.to_string()))
            }
        }
    }

    /// Band parameters of the periodic blocks, when the driver is periodic.
    pub fn periodic_blocks(&self) -> Option<Vec<BandParameters>> {
        match &self.driver {
            DriverSpec::Periodic { blocks } => blocks
                .iter()
                .map(|b| BandParameters::new(self.n_states, b.clone()).ok())
                .collect(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
n_states = 3
delta = 0.1
alpha = 1.0
beta = 2.0

[driver]
kind = "constant"
"#;

    #[test]
    fn minimal_document_fills_defaults() {
        let config = parse_config(MINIMAL).unwrap();
        assert_eq!(config.n_states, 3);
        assert_eq!(config.tolerance, 1e-10);
        assert_eq!(config.horizon, 100);
        assert_eq!(config.window, (0, 20));
        assert_eq!(config.format, OutputFormat::Csv);
        match &config.driver {
            DriverSpec::Constant { rates } => assert_eq!(rates, &vec![1.5; 4]),
            other => panic!("expected constant driver, got {other:?}"),
        }
        config.build_driver(None).unwrap();
    }

    #[test]
    fn step_bound_violation_is_a_semantic_error() {
        let text = MINIMAL.replace("delta = 0.1", "delta = 0.25");
        let err = parse_config(&text).unwrap_err();
        let message = format!("{err}");
        assert!(message.contains("1/(2*beta)"), "message: {message}");
    }

    #[test]
    fn negative_alpha_is_rejected() {
        let text = MINIMAL.replace("alpha = 1.0", "alpha = -1.0");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nunknown_key = 1\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn malformed_syntax_reports_position() {
        let err = parse_config("n_states = [").unwrap_err();
        let message = format!("{err}");
        assert!(message.contains("line"), "message: {message}");
    }

    #[test]
    fn rates_outside_bounds_are_rejected() {
        let text = MINIMAL.replace(
            "kind = \"constant\"",
            "kind = \"constant\"\nrates = [0.5, 1.0, 1.0, 1.0]",
        );
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn seed_override_requires_a_random_driver() {
        let config = parse_config(MINIMAL).unwrap();
        assert!(config.build_driver(Some(7)).is_err());
        let text = MINIMAL.replace("kind = \"constant\"", "kind = \"random\"\nseed = 1");
        let config = parse_config(&text).unwrap();
        config.build_driver(Some(7)).unwrap();
    }

    #[test]
    fn driver_kind_key_mixups_are_rejected() {
        let text = MINIMAL.replace("kind = \"constant\"", "kind = \"constant\"\nseed = 3");
        assert!(parse_config(&text).is_err());
        let text = MINIMAL.replace("kind = \"constant\"", "kind = \"periodic\"");
        assert!(parse_config(&text).is_err());
        let text = MINIMAL.replace("kind = \"constant\"", "kind = \"sinusoidal\"");
        assert!(parse_config(&text).is_err());
    }
}
