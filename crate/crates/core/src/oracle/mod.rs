//! Synthetic ground-truth actuator characterization and ingestion of
//! externally produced sample files.
//!
//! Every path produces a [`SampleSet`]: free-loading records (actuation swept,
//! no load, `τ = 0`) and constrained records (actuation fixed, external effort
//! `M` applied, `τ = −M`).

mod csv_io;
mod family;
mod law;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::domain::{
    enumerate_grid, ActuationKind, Condition, DomainError, ModuleDesign, SampleGrid, SampleRecord,
};

pub use csv_io::{ingest_csv, ingest_str, write_csv, write_csv_string, IngestConfig};
pub use family::{AffineCoeff, AxisLawModel, SyntheticFamily};
pub use law::{GroundTruthLaw, LawForm};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("no equilibrium for p={p}, ext={ext} in bracket {bracket:?}")]
    NoRootInBracket { p: f64, ext: f64, bracket: (f64, f64) },
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("row {row}: parse error: {msg}")]
    Parse { row: u64, msg: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("row {row}: invariant violated: {msg}")]
    Invariant { row: u64, msg: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Where a [`SampleSet`] came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic(GroundTruthLaw),
    Ingested { path: String, sha256: String },
}

/// All samples for one module design, actuation kind and axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub design: ModuleDesign,
    pub kind: ActuationKind,
    pub axis_label: String,
    pub records: Vec<SampleRecord>,
    pub provenance: Provenance,
}

pub(crate) fn same_level(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

impl SampleSet {
    /// Checks the free-loading/constrained invariants. Returns the index of the
    /// first offending record together with a message.
    pub fn check_invariants(&self) -> Result<(), (usize, String)> {
        for (i, r) in self.records.iter().enumerate() {
            if ![r.p, r.u, r.ext, r.tau].iter().all(|v| v.is_finite()) {
                return Err((i, "non-finite value".into()));
            }
            if r.condition == Condition::FreeLoading && r.ext != 0.0 {
                return Err((i, format!("free-loading record with ext = {}", r.ext)));
            }
        }
        let free = self.free_levels();
        for (i, r) in self.records.iter().enumerate() {
            if r.condition == Condition::Constrained && !free.iter().any(|&p| same_level(p, r.p)) {
                return Err((i, format!("constrained record at p = {} has no free-loading level", r.p)));
            }
        }
        Ok(())
    }

    pub fn free_records(&self) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(|r| r.condition == Condition::FreeLoading)
    }

    pub fn constrained_records(&self) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(|r| r.condition == Condition::Constrained)
    }

    /// Distinct free-loading actuation levels, ascending.
    pub fn free_levels(&self) -> Vec<f64> {
        distinct_sorted(self.free_records().map(|r| r.p))
    }

    /// Constrained records grouped by actuation level, levels ascending and
    /// records within a level ordered by deformation.
    pub fn constrained_by_level(&self) -> Vec<(f64, Vec<SampleRecord>)> {
        let levels = distinct_sorted(self.constrained_records().map(|r| r.p));
        levels
            .into_iter()
            .map(|p| {
                let mut recs: Vec<SampleRecord> =
                    self.constrained_records().filter(|r| same_level(r.p, p)).copied().collect();
                recs.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.ext.total_cmp(&b.ext)));
                (p, recs)
            })
            .collect()
    }

    /// `max τ − min τ` over all records.
    pub fn effort_range(&self) -> f64 {
        let (lo, hi) = self
            .records
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.tau), hi.max(r.tau)));
        if lo.is_finite() { hi - lo } else { 0.0 }
    }

    /// `(min, max)` of actuation and deformation over all records.
    pub fn operating_box(&self) -> ((f64, f64), (f64, f64)) {
        let mut p = (f64::INFINITY, f64::NEG_INFINITY);
        let mut u = (f64::INFINITY, f64::NEG_INFINITY);
        for r in &self.records {
            p = (p.0.min(r.p), p.1.max(r.p));
            u = (u.0.min(r.u), u.1.max(r.u));
        }
        (p, u)
    }
}

fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| same_level(*a, *b));
    v
}

/// Emulates the two-condition characterization protocol on a synthetic law.
///
/// For each actuation level the free-loading record holds the natural
/// deflection (`τ_gt(p, u*) = 0`); every external level `M` adds a
/// constrained record at the deformation where `τ_gt(p, u) + M = 0`.
pub fn generate_samples(
    law: &GroundTruthLaw,
    grid: &SampleGrid,
    design: &ModuleDesign,
    kind: ActuationKind,
) -> Result<SampleSet, OracleError> {
    law.validate()?;
    grid.validate()?;
    design.check_positive()?;
    let mut rng = ChaCha8Rng::seed_from_u64(law.seed);
    let mut perturb = |u: f64| -> f64 {
        if law.noise_std == 0.0 {
            u
        } else {
            let xi: f64 = StandardNormal.sample(&mut rng);
            u * (1.0 + law.noise_std * xi)
        }
    };

    let ext_levels = grid.external.levels();
    let mut records = Vec::with_capacity(grid.actuation.count() * (ext_levels.len() + 1));
    for p in grid.actuation.levels() {
        let u_free = law.equilibrium_deformation(p, 0.0)?;
        records.push(SampleRecord::free(p, perturb(u_free)));
    }
    for (p, m) in enumerate_grid(grid) {
        let u = law.equilibrium_deformation(p, m)?;
        records.push(SampleRecord::constrained(p, perturb(u), m));
    }
    Ok(SampleSet {
        design: *design,
        kind,
        axis_label: grid.axis_label.clone(),
        records,
        provenance: Provenance::Synthetic(law.clone()),
    })
}
