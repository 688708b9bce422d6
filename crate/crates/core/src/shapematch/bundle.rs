use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::design::ActuatorDesign;
use super::search::{RefitReport, ShapeMatchOutcome};
use super::ShapeError;

/// Files written by [`write_bundle`].
pub const BUNDLE_FILES: [&str; 4] = ["best_design.json", "leaderboard.csv", "centerlines.csv", "metrics.json"];

#[derive(Serialize, Deserialize)]
struct BestDesign {
    structure: String,
    rmse: f64,
    e_max: f64,
    design: ActuatorDesign,
}

#[derive(Serialize)]
struct Metrics<'a> {
    rmse: f64,
    e_max: f64,
    objective: f64,
    saturated: bool,
    candidates: usize,
    failed_candidates: usize,
    total_evaluations: usize,
    refit: Option<&'a RefitReport>,
}

fn csv_err(e: csv::Error) -> ShapeError {
    ShapeError::Format(e.to_string())
}

/// Best-design manifest, leaderboard, centerlines and metrics summary.
pub fn write_bundle(dir: &Path, outcome: &ShapeMatchOutcome, refit: Option<&RefitReport>) -> Result<(), ShapeError> {
    fs::create_dir_all(dir)?;
    let best = &outcome.best;
    let manifest = BestDesign {
        structure: best.design.structure().label(),
        rmse: best.rmse,
        e_max: best.e_max,
        design: best.design.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| ShapeError::Format(e.to_string()))?;
    fs::write(dir.join(BUNDLE_FILES[0]), json + "\n")?;

    let mut w = csv::Writer::from_path(dir.join(BUNDLE_FILES[1])).map_err(csv_err)?;
    w.write_record(["rank", "candidate", "structure", "total", "rmse", "e_max", "objective", "evaluations", "failed", "generations", "stop"])
        .map_err(csv_err)?;
    for (rank, c) in outcome.leaderboard.iter().enumerate() {
        let (rmse, e_max, obj) = match &c.best {
            Some(b) => (b.rmse.to_string(), b.e_max.to_string(), b.objective.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        let stop = serde_json::to_value(c.stop_reason).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        w.write_record([
            (rank + 1).to_string(),
            c.index.to_string(),
            c.structure.label(),
            c.structure.total().to_string(),
            rmse,
            e_max,
            obj,
            c.evaluations.to_string(),
            c.failed_evaluations.to_string(),
            c.generations.to_string(),
            stop,
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join(BUNDLE_FILES[2])).map_err(csv_err)?;
    w.write_record(["k", "sim_x", "sim_y", "sim_z", "target_x", "target_y", "target_z"]).map_err(csv_err)?;
    for (k, (a, b)) in best.simulated.points().iter().zip(best.resampled_target.points()).enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(a.iter().chain(b.iter()).map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;

    let metrics = Metrics {
        rmse: best.rmse,
        e_max: best.e_max,
        objective: best.objective,
        saturated: best.saturated,
        candidates: outcome.leaderboard.len(),
        failed_candidates: outcome.leaderboard.iter().filter(|c| c.best.is_none()).count(),
        total_evaluations: outcome.leaderboard.iter().map(|c| c.evaluations).sum(),
        refit,
    };
    let json = serde_json::to_string_pretty(&metrics).map_err(|e| ShapeError::Format(e.to_string()))?;
    fs::write(dir.join(BUNDLE_FILES[3]), json + "\n")?;
    Ok(())
}

/// The actuator design stored in a bundle's `best_design.json`.
pub fn read_best_design(path: &Path) -> Result<ActuatorDesign, ShapeError> {
    let text = fs::read_to_string(path)?;
    let b: BestDesign = serde_json::from_str(&text).map_err(|e| ShapeError::Format(e.to_string()))?;
    Ok(b.design)
}
