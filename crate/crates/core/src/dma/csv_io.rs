use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{infer_kind, DmaCurve, DmaError, FrequencySweep, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    StressStrain,
    FrequencySweep,
}

impl Schema {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Schema::StressStrain => &["strain", "stress_mpa"],
            Schema::FrequencySweep => &["freq_hz", "storage_mpa", "loss_mpa", "tan_delta", "pre_strain"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DmaData {
    Curve(DmaCurve),
    Sweep(FrequencySweep),
}

impl DmaData {
    pub fn into_curve(self) -> Option<DmaCurve> {
        match self {
            DmaData::Curve(c) => Some(c),
            DmaData::Sweep(_) => None,
        }
    }

    pub fn into_sweep(self) -> Option<FrequencySweep> {
        match self {
            DmaData::Sweep(s) => Some(s),
            DmaData::Curve(_) => None,
        }
    }
}

/// Read a DMA CSV file. The file stem becomes the sample id / material label.
pub fn parse_dma_csv(path: impl AsRef<Path>, schema: Schema) -> Result<DmaData, DmaError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DmaError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let label = path
        .file_name()
        .and_then(|s| s.to_str())
        .map(|s| s.split('.').next().unwrap_or(s).to_string())
        .unwrap_or_default();
    parse_dma_str(&text, schema, &label)
}

/// Parse CSV text already in memory.
pub fn parse_dma_str(text: &str, schema: Schema, label: &str) -> Result<DmaData, DmaError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| DmaError::SchemaMismatch(e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(DmaError::EmptyFile);
    }
    let expected = schema.columns();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(DmaError::SchemaMismatch(format!(
            "expected columns {}, found {}",
            expected.join(","),
            got.join(",")
        )));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| DmaError::MalformedRow {
            row,
            message: e.to_string(),
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != expected.len() {
            return Err(DmaError::MalformedRow {
                row,
                message: format!("expected {} cells, found {}", expected.len(), rec.len()),
            });
        }
        let mut vals = Vec::with_capacity(rec.len());
        for (col, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| DmaError::MalformedRow {
                row,
                message: format!("column {} value {cell:?} is not a number", expected[col]),
            })?;
            if !v.is_finite() {
                return Err(DmaError::MalformedRow {
                    row,
                    message: format!("column {} value {cell:?} is not finite", expected[col]),
                });
            }
            vals.push(v);
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(DmaError::EmptyFile);
    }

    Ok(match schema {
        Schema::StressStrain => {
            let strain: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let stress: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            let kind = infer_kind(&strain);
            let mut c = DmaCurve::new(strain, stress, kind);
            c.sample_id = label.to_string();
            DmaData::Curve(c)
        }
        Schema::FrequencySweep => DmaData::Sweep(FrequencySweep {
            rows: rows
                .iter()
                .map(|r| SweepRow {
                    freq_hz: r[0],
                    storage_mpa: r[1],
                    loss_mpa: r[2],
                    tan_delta: r[3],
                    pre_strain: r[4],
                })
                .collect(),
            material_label: label.to_string(),
        }),
    })
}

// `{}` on f64 prints the shortest representation that parses back to the
// same bits, so write/parse round trips are exact.
pub fn serialize_curve_csv(curve: &DmaCurve) -> String {
    let mut out = String::from("strain,stress_mpa\n");
    for (e, s) in curve.points() {
        out.push_str(&format!("{e},{s}\n"));
    }
    out
}

pub fn serialize_sweep_csv(sweep: &FrequencySweep) -> String {
    let mut out = String::from("freq_hz,storage_mpa,loss_mpa,tan_delta,pre_strain\n");
    for r in &sweep.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.freq_hz, r.storage_mpa, r.loss_mpa, r.tan_delta, r.pre_strain
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_is_empty() {
        let err = parse_dma_str("strain,stress_mpa\n", Schema::StressStrain, "x").unwrap_err();
        assert_eq!(err, DmaError::EmptyFile);
        assert_eq!(parse_dma_str("", Schema::StressStrain, "x").unwrap_err(), DmaError::EmptyFile);
    }

    #[test]
    fn wrong_header_is_schema_mismatch() {
        let err = parse_dma_str("strain,stress\n0,0\n", Schema::StressStrain, "x").unwrap_err();
        assert!(matches!(err, DmaError::SchemaMismatch(_)));
        let err = parse_dma_str("strain,stress_mpa\n0,0\n", Schema::FrequencySweep, "x").unwrap_err();
        assert!(matches!(err, DmaError::SchemaMismatch(_)));
    }

    #[test]
    fn non_numeric_cell_reports_row() {
        let err = parse_dma_str("strain,stress_mpa\n0,0\n0.1,abc\n", Schema::StressStrain, "x").unwrap_err();
        assert!(matches!(err, DmaError::MalformedRow { row: 2, .. }));
        let err = parse_dma_str("strain,stress_mpa\n0,0,1\n", Schema::StressStrain, "x").unwrap_err();
        assert!(matches!(err, DmaError::MalformedRow { row: 1, .. }));
    }

    #[test]
    fn round_trip_is_exact() {
        let c = DmaCurve::from_points(&[(0.0, 0.0), (0.1 + 0.2, 1.0 / 3.0), (0.7, std::f64::consts::PI)]);
        let back = parse_dma_str(&serialize_curve_csv(&c), Schema::StressStrain, "")
            .unwrap()
            .into_curve()
            .unwrap();
        assert_eq!(back.strain, c.strain);
        assert_eq!(back.stress, c.stress);
    }
}
