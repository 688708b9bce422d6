//! Canonical sample CSV.
//!
//! ```text
//! # kind=pressure
//! # r=3
//! # R=5
//! # l=4
//! # t=1.5
//! # axis=y
//! axis,condition,p,u,ext,tau
//! y,free,0,0,0,0
//! y,constrained,0,0.0006,0.0006,-0.0006
//! ```
//!
//! Metadata lines start with `#` and precede the header. Floats are written
//! in shortest round-trip form so ingest → export is byte-stable.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{OracleError, Provenance, SampleSet};
use crate::domain::{ActuationKind, Condition, DesignParam, ModuleDesign, SampleRecord};

const COLUMNS: [&str; 6] = ["axis", "condition", "p", "u", "ext", "tau"];

/// Fallbacks for metadata a file does not carry.
#[derive(Debug, Clone, Default)]
pub struct IngestConfig {
    pub kind: Option<ActuationKind>,
    pub design: Option<ModuleDesign>,
    pub axis_label: Option<String>,
}

pub fn ingest_csv(path: impl AsRef<Path>, cfg: &IngestConfig) -> Result<SampleSet, OracleError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| OracleError::Schema(format!("file is not UTF-8: {e}")))?;
    let mut set = ingest_str(&text, cfg)?;
    set.provenance = Provenance::Ingested {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    Ok(set)
}

pub fn ingest_str(text: &str, cfg: &IngestConfig) -> Result<SampleSet, OracleError> {
    let mut kind = cfg.kind;
    let mut axis_meta: Option<String> = None;
    let mut dims: [Option<f64>; 4] = [None; 4];

    for (lineno, line) in text.lines().enumerate() {
        let Some(meta) = line.trim_start().strip_prefix('#') else { break };
        let Some((key, value)) = meta.split_once('=') else { continue };
        let (key, value) = (key.trim(), value.trim());
        let row = lineno as u64 + 1;
        match key {
            "kind" => kind = Some(value.parse().map_err(|e| OracleError::Parse { row, msg: format!("{e}") })?),
            "axis" => axis_meta = Some(value.to_string()),
            other => {
                if let Some(param) = DesignParam::from_symbol(other) {
                    let v: f64 = value
                        .parse()
                        .map_err(|e| OracleError::Parse { row, msg: format!("design {other}: {e}") })?;
                    dims[param as usize] = Some(v);
                }
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| OracleError::Schema(e.to_string()))?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(OracleError::Schema("missing header row".into()));
    }
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| OracleError::Schema(format!("missing column `{name}`")))?;
    }

    let mut axis_label = axis_meta.or_else(|| cfg.axis_label.clone());
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for result in reader.records() {
        let rec = result.map_err(|e| OracleError::Parse {
            row: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| rec.get(idx[i]).unwrap_or("").trim();
        let num = |i: usize| -> Result<f64, OracleError> {
            field(i).parse::<f64>().map_err(|e| OracleError::Parse {
                row,
                msg: format!("column `{}`: {e}", COLUMNS[i]),
            })
        };
        let axis = field(0);
        match &axis_label {
            Some(a) if a != axis => {
                return Err(OracleError::Invariant { row, msg: format!("axis `{axis}` differs from `{a}`") });
            }
            None => axis_label = Some(axis.to_string()),
            _ => {}
        }
        let condition: Condition =
            field(1).parse().map_err(|e| OracleError::Parse { row, msg: format!("{e}") })?;
        records.push(SampleRecord { p: num(2)?, u: num(3)?, ext: num(4)?, tau: num(5)?, condition });
        rows.push(row);
    }
    if records.is_empty() {
        return Err(OracleError::Schema("no data rows".into()));
    }

    let kind = kind.ok_or_else(|| OracleError::Schema("missing `# kind=` metadata".into()))?;
    let design = match (dims, cfg.design) {
        ([Some(r), Some(big_r), Some(l), Some(t)], _) => ModuleDesign::new(r, big_r, l, t)?,
        ([None, None, None, None], Some(d)) => d,
        _ => return Err(OracleError::Schema("incomplete design metadata (need r, R, l, t)".into())),
    };
    let set = SampleSet {
        design,
        kind,
        axis_label: axis_label.unwrap_or_default(),
        records,
        provenance: Provenance::Ingested { path: String::new(), sha256: String::new() },
    };
    set.check_invariants()
        .map_err(|(i, msg)| OracleError::Invariant { row: rows[i], msg })?;
    Ok(set)
}

pub fn write_csv_string(set: &SampleSet) -> String {
    let mut out = String::new();
    let d = &set.design;
    let _ = writeln!(out, "# kind={}", set.kind);
    for (k, v) in [("r", d.r), ("R", d.big_r), ("l", d.l), ("t", d.t)] {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "# axis={}", set.axis_label);
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in &set.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            set.axis_label,
            r.condition.token(),
            r.p,
            r.u,
            r.ext,
            r.tau
        );
    }
    out
}

pub fn write_csv(set: &SampleSet, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(write_csv_string(set).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{SampleGrid, Sweep};
    use crate::oracle::{generate_samples, GroundTruthLaw};

    const HEADER: &str = "# kind=pressure\n# r=3\n# R=5\n# l=4\n# t=1.5\naxis,condition,p,u,ext,tau\n";

    fn free_only_file() -> String {
        let mut s = HEADER.to_string();
        for i in 0..31 {
            let p = i as f64 * 0.5;
            s.push_str(&format!("y,free,{p},{},0,0\n", p * 0.01));
        }
        s
    }

    #[test]
    fn well_formed_free_loading_file() {
        let set = ingest_str(&free_only_file(), &IngestConfig::default()).unwrap();
        assert_eq!(set.records.len(), 31);
        assert_eq!(set.axis_label, "y");
        assert_eq!(set.kind, ActuationKind::Pressure);
    }

    #[test]
    fn constrained_row_without_free_level_is_rejected() {
        let mut s = free_only_file();
        s.push_str("y,constrained,7.25,0.1,0.01,-0.01\n");
        match ingest_str(&s, &IngestConfig::default()).unwrap_err() {
            OracleError::Invariant { row, .. } => assert_eq!(row, 38),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn free_row_with_load_is_rejected() {
        let s = format!("{HEADER}y,free,0,0,0.5,0\n");
        assert!(matches!(ingest_str(&s, &IngestConfig::default()), Err(OracleError::Invariant { row: 7, .. })));
    }

    #[test]
    fn empty_file_is_a_schema_error() {
        assert!(matches!(ingest_str("", &IngestConfig::default()), Err(OracleError::Schema(_))));
        assert!(matches!(ingest_str(HEADER, &IngestConfig::default()), Err(OracleError::Schema(_))));
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let s = "# kind=pressure\n# r=3\n# R=5\n# l=4\n# t=1.5\naxis,condition,p,u,ext\ny,free,0,0,0\n";
        assert!(matches!(ingest_str(s, &IngestConfig::default()), Err(OracleError::Schema(_))));
    }

    #[test]
    fn malformed_number_reports_row() {
        let s = format!("{HEADER}y,free,0,abc,0,0\n");
        assert!(matches!(ingest_str(&s, &IngestConfig::default()), Err(OracleError::Parse { row: 7, .. })));
    }

    #[test]
    fn missing_kind_uses_config_fallback() {
        let s = "# r=3\n# R=5\n# l=4\n# t=1.5\naxis,condition,p,u,ext,tau\ny,free,0,0,0,0\n";
        assert!(ingest_str(s, &IngestConfig::default()).is_err());
        let cfg = IngestConfig { kind: Some(ActuationKind::TendonForce), ..Default::default() };
        assert_eq!(ingest_str(s, &cfg).unwrap().kind, ActuationKind::TendonForce);
    }

    #[test]
    fn export_ingest_export_is_byte_stable() {
        let law = GroundTruthLaw::separable_linear(2.0, 1.0, 3.0, 0.0, 5.0).with_noise(0.01, 3);
        let grid = SampleGrid::new(Sweep::new(0.0, 15.0, 0.5).unwrap(), Sweep::new(0.0, 0.02, 0.0006).unwrap(), "y")
            .unwrap();
        let set = generate_samples(&law, &grid, &ModuleDesign::new(3.0, 5.0, 4.0, 1.5).unwrap(), ActuationKind::Pressure)
            .unwrap();
        let first = write_csv_string(&set);
        let back = ingest_str(&first, &IngestConfig::default()).unwrap();
        assert_eq!(back.records, set.records);
        assert_eq!(write_csv_string(&back), first);
    }
}
