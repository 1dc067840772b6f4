//! Deterministic CSV and JSON emission plus the bundled readers.
//!
//! Floats are printed with 17 significant digits so every emitted value
//! round-trips bit-exactly; infinities are spelled `inf` / `-inf` (quoted
//! strings in JSON, bare tokens in CSV). Identical inputs always produce
//! byte-identical files: no timestamps, no map iteration, newline `\n`.

use crate::CliError;

/// Version tag carried by every output file.
pub const SCHEMA_VERSION: u32 = 1;

/// Stationary-distribution output: one probability per state plus the
/// max-norm residual of the generator applied to the vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryOutput {
    pub vector: Vec<f64>,
    pub residual_max: f64,
}

/// One attractor-path row.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorRow {
    pub index: i64,
    pub point: Vec<f64>,
    pub error_radius: f64,
    pub depth: usize,
}

/// One convergence-trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRowOut {
    pub step: usize,
    pub image_diameter: f64,
    pub forward_distance: f64,
    pub certified_bound: f64,
}

/// Contraction summary of the configured chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionOutput {
    pub gamma: f64,
    pub gamma_floor: f64,
    pub slice_diameter: f64,
    pub contraction_ratio: f64,
    pub block_length: usize,
}

/// Shortest text that parses back to exactly the same 64-bit float.
pub fn fmt_float(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

/// Parses a float written by [`fmt_float`].
pub fn parse_float(text: &str) -> Result<f64, CliError> {
    match text {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|e| CliError::Config(format!("malformed float {other:?}: {e}"))),
    }
}

fn json_float(x: f64) -> String {
    if x.is_infinite() {
        format!("\"{}\"", fmt_float(x))
    } else {
        fmt_float(x)
    }
}

fn json_float_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|&v| json_float(v)).collect();
    format!("[{}]", items.join(", "))
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

pub fn stationary_csv(out: &StationaryOutput) -> String {
    let mut text = String::from("schema_version,index,probability,residual_max\n");
    for (i, &p) in out.vector.iter().enumerate() {
        text.push_str(&format!(
            "{SCHEMA_VERSION},{i},{},{}\n",
            fmt_float(p),
            fmt_float(out.residual_max)
        ));
    }
    text
}

pub fn stationary_json(out: &StationaryOutput) -> String {
    format!(
        "{{\n  \"schema_version\": {SCHEMA_VERSION},\n  \"vector\": {},\n  \"residual_max\": {}\n}}\n",
        json_float_array(&out.vector),
        json_float(out.residual_max)
    )
}

pub fn attractor_csv(rows: &[AttractorRow]) -> String {
    let n = rows.first().map_or(0, |r| r.point.len());
    let mut text = String::from("schema_version,index");
    for i in 0..n {
        text.push_str(&format!(",c{i}"));
    }
    text.push_str(",error_radius,depth\n");
    for row in rows {
        text.push_str(&format!("{SCHEMA_VERSION},{}", row.index));
        for &c in &row.point {
            text.push(',');
            text.push_str(&fmt_float(c));
        }
        text.push_str(&format!(
            ",{},{}\n",
            fmt_float(row.error_radius),
            row.depth
        ));
    }
    text
}

pub fn attractor_json(rows: &[AttractorRow]) -> String {
    let mut items = Vec::with_capacity(rows.len());
    for row in rows {
        items.push(format!(
            "    {{\"index\": {}, \"point\": {}, \"error_radius\": {}, \"depth\": {}}}",
            row.index,
            json_float_array(&row.point),
            json_float(row.error_radius),
            row.depth
        ));
    }
    format!(
        "{{\n  \"schema_version\": {SCHEMA_VERSION},\n  \"rows\": [\n{}\n  ]\n}}\n",
        items.join(",\n")
    )
}

pub fn trace_csv(rows: &[TraceRowOut]) -> String {
    let mut text = String::from("schema_version,step,image_diameter,forward_distance,certified_bound\n");
    for row in rows {
        text.push_str(&format!(
            "{SCHEMA_VERSION},{},{},{},{}\n",
            row.step,
            fmt_float(row.image_diameter),
            fmt_float(row.forward_distance),
            fmt_float(row.certified_bound)
        ));
    }
    text
}

pub fn trace_json(rows: &[TraceRowOut]) -> String {
    let mut items = Vec::with_capacity(rows.len());
    for row in rows {
        items.push(format!(
            "    {{\"step\": {}, \"image_diameter\": {}, \"forward_distance\": {}, \"certified_bound\": {}}}",
            row.step,
            json_float(row.image_diameter),
            json_float(row.forward_distance),
            json_float(row.certified_bound)
        ));
    }
    format!(
        "{{\n  \"schema_version\": {SCHEMA_VERSION},\n  \"rows\": [\n{}\n  ]\n}}\n",
        items.join(",\n")
    )
}

pub fn contraction_csv(out: &ContractionOutput) -> String {
    format!(
        "schema_version,gamma,gamma_floor,slice_diameter,contraction_ratio,block_length\n{SCHEMA_VERSION},{},{},{},{},{}\n",
        fmt_float(out.gamma),
        fmt_float(out.gamma_floor),
        fmt_float(out.slice_diameter),
        fmt_float(out.contraction_ratio),
        out.block_length
    )
}

pub fn contraction_json(out: &ContractionOutput) -> String {
    format!(
        "{{\n  \"schema_version\": {SCHEMA_VERSION},\n  \"gamma\": {},\n  \"gamma_floor\": {},\n  \"slice_diameter\": {},\n  \"contraction_ratio\": {},\n  \"block_length\": {}\n}}\n",
        json_float(out.gamma),
        json_float(out.gamma_floor),
        json_float(out.slice_diameter),
        json_float(out.contraction_ratio),
        out.block_length
    )
}

// ---------------------------------------------------------------------------
// Bundled readers
// ---------------------------------------------------------------------------

fn csv_rows(text: &str, expected_header: Option<&str>) -> Result<Vec<Vec<String>>, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config("empty CSV document".into()))?;
    if let Some(expected) = expected_header {
        if header != expected {
            return Err(CliError::Config(format!(
                "unexpected CSV header {header:?}"
            )));
        }
    }
    Ok(lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect())
}

fn check_schema(version: &str) -> Result<(), CliError> {
    if version != SCHEMA_VERSION.to_string() {
        return Err(CliError::Config(format!(
            "unsupported schema version {version}"
        )));
    }
    Ok(())
}

pub fn read_stationary_csv(text: &str) -> Result<StationaryOutput, CliError> {
    let rows = csv_rows(text, Some("schema_version,index,probability,residual_max"))?;
    let mut vector = Vec::with_capacity(rows.len());
    let mut residual_max = 0.0;
    for row in &rows {
        check_schema(&row[0])?;
        vector.push(parse_float(&row[2])?);
        residual_max = parse_float(&row[3])?;
    }
    Ok(StationaryOutput {
        vector,
        residual_max,
    })
}

pub fn read_attractor_csv(text: &str) -> Result<Vec<AttractorRow>, CliError> {
    let rows = csv_rows(text, None)?;
    rows.iter()
        .map(|row| {
            check_schema(&row[0])?;
            let fields = row.len();
            let point = row[2..fields - 2]
                .iter()
                .map(|f| parse_float(f))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(AttractorRow {
                index: row[1]
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad index: {e}")))?,
                point,
                error_radius: parse_float(&row[fields - 2])?,
                depth: row[fields - 1]
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad depth: {e}")))?,
            })
        })
        .collect()
}

pub fn read_trace_csv(text: &str) -> Result<Vec<TraceRowOut>, CliError> {
    let rows = csv_rows(
        text,
        Some("schema_version,step,image_diameter,forward_distance,certified_bound"),
    )?;
    rows.iter()
        .map(|row| {
            check_schema(&row[0])?;
            Ok(TraceRowOut {
                step: row[1]
                    .parse()
                    .map_err(|e| CliError::Config(format!("bad step: {e}")))?,
                image_diameter: parse_float(&row[2])?,
                forward_distance: parse_float(&row[3])?,
                certified_bound: parse_float(&row[4])?,
            })
        })
        .collect()
}

pub fn read_contraction_csv(text: &str) -> Result<ContractionOutput, CliError> {
    let rows = csv_rows(
        text,
        Some("schema_version,gamma,gamma_floor,slice_diameter,contraction_ratio,block_length"),
    )?;
    let row = rows
        .first()
        .ok_or_else(|| CliError::Config("empty contraction CSV".into()))?;
    check_schema(&row[0])?;
    Ok(ContractionOutput {
        gamma: parse_float(&row[1])?,
        gamma_floor: parse_float(&row[2])?,
        slice_diameter: parse_float(&row[3])?,
        contraction_ratio: parse_float(&row[4])?,
        block_length: row[5]
            .parse()
            .map_err(|e| CliError::Config(format!("bad block length: {e}")))?,
    })
}

fn json_value(text: &str) -> Result<serde_json::Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))
}

fn json_number(value: &serde_json::Value) -> Result<f64, CliError> {
    match value {
        serde_json::Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| CliError::Config(format!("non-f64 number {n}"))),
        serde_json::Value::String(s) => parse_float(s),
        other => Err(CliError::Config(format!("expected a number, got {other}"))),
    }
}

fn json_schema_check(value: &serde_json::Value) -> Result<(), CliError> {
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => Ok(()),
        other => Err(CliError::Config(format!(
            "unsupported schema version {other:?}"
        ))),
    }
}

fn json_float_vec(value: &serde_json::Value) -> Result<Vec<f64>, CliError> {
    value
        .as_array()
        .ok_or_else(|| CliError::Config("expected an array".into()))?
        .iter()
        .map(json_number)
        .collect()
}

pub fn read_stationary_json(text: &str) -> Result<StationaryOutput, CliError> {
    let value = json_value(text)?;
    json_schema_check(&value)?;
    Ok(StationaryOutput {
        vector: json_float_vec(&value["vector"])?,
        residual_max: json_number(&value["residual_max"])?,
    })
}

pub fn read_attractor_json(text: &str) -> Result<Vec<AttractorRow>, CliError> {
    let value = json_value(text)?;
    json_schema_check(&value)?;
    value["rows"]
        .as_array()
        .ok_or_else(|| CliError::Config("missing rows".into()))?
        .iter()
        .map(|row| {
            Ok(AttractorRow {
                index: row["index"]
                    .as_i64()
                    .ok_or_else(|| CliError::Config("bad index".into()))?,
                point: json_float_vec(&row["point"])?,
                error_radius: json_number(&row["error_radius"])?,
                depth: row["depth"]
                    .as_u64()
                    .ok_or_else(|| CliError::Config("bad depth".into()))? as usize,
            })
        })
        .collect()
}

pub fn read_trace_json(text: &str) -> Result<Vec<TraceRowOut>, CliError> {
    let value = json_value(text)?;
    json_schema_check(&value)?;
    value["rows"]
        .as_array()
        .ok_or_else(|| CliError::Config("missing rows".into()))?
        .iter()
        .map(|row| {
            Ok(TraceRowOut {
                step: row["step"]
                    .as_u64()
                    .ok_or_else(|| CliError::Config("bad step".into()))? as usize,
                image_diameter: json_number(&row["image_diameter"])?,
                forward_distance: json_number(&row["forward_distance"])?,
                certified_bound: json_number(&row["certified_bound"])?,
            })
        })
        .collect()
}

pub fn read_contraction_json(text: &str) -> Result<ContractionOutput, CliError> {
    let value = json_value(text)?;
    json_schema_check(&value)?;
    Ok(ContractionOutput {
        gamma: json_number(&value["gamma"])?,
        gamma_floor: json_number(&value["gamma_floor"])?,
        slice_diameter: json_number(&value["slice_diameter"])?,
        contraction_ratio: json_number(&value["contraction_ratio"])?,
        block_length: value["block_length"]
            .as_u64()
            .ok_or_else(|| CliError::Config("bad block length".into()))? as usize,
    })
}
