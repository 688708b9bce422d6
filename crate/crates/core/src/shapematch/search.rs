use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::{ActuatorDesign, DesignSpace, MetaLaws, SimSettings};
use super::target::{match_metrics, resample_target, MatchMetrics, TargetShape};
use super::{ShapeError, StructuralCandidate};
use crate::domain::Curve3;
use crate::mlp::{train, Affine, MlpSpec, TrainConfig};
use crate::optimize::{CmaConfig, CmaEs, GenerationStats, StopReason};
use crate::oracle::{SampleSet, SyntheticFamily};
use crate::polyfit::{assemble_surrogate, extract_stiffness, FitConfig};
use crate::prbm::{JointLaw, JointType};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeConfig {
    pub sigma0: f64,
    /// CMA-ES generations per candidate.
    pub max_iterations: usize,
    pub population: Option<usize>,
    /// Extra runs per candidate from random starts.
    pub restarts: usize,
    /// Population multiplier applied at each restart.
    pub restart_growth: usize,
    /// A candidate stops once both rmse and e_max fall below this, mm.
    pub stop_below_mm: f64,
    /// e_max above this adds `emax_weight · (e_max − knee)` to the objective, mm.
    pub emax_knee_mm: f64,
    pub emax_weight: f64,
    pub seed: u64,
    pub sim: SimSettings,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        Self {
            sigma0: 0.3,
            max_iterations: 60,
            population: None,
            restarts: 1,
            restart_growth: 2,
            stop_below_mm: 5.0,
            emax_knee_mm: 5.0,
            emax_weight: 0.25,
            seed: 0,
            sim: SimSettings::default(),
        }
    }
}

impl ShapeConfig {
    pub fn objective(&self, m: &MatchMetrics) -> f64 {
        m.rmse + self.emax_weight * (m.e_max - self.emax_knee_mm).max(0.0)
    }

    fn below_threshold(&self, m: &MatchMetrics) -> bool {
        m.rmse < self.stop_below_mm && m.e_max < self.stop_below_mm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub rmse: f64,
    pub e_max: f64,
    pub objective: f64,
    pub design: ActuatorDesign,
    pub simulated: Curve3,
    pub resampled_target: Curve3,
    /// Some joint settled outside its characterized range.
    pub saturated: bool,
}

impl MatchResult {
    pub fn metrics(&self) -> MatchMetrics {
        MatchMetrics { rmse: self.rmse, e_max: self.e_max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateResult {
    pub index: usize,
    pub structure: StructuralCandidate,
    pub best: Option<MatchResult>,
    pub evaluations: usize,
    pub failed_evaluations: usize,
    pub generations: usize,
    pub stop_reason: StopReason,
    pub history: Vec<GenerationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeMatchOutcome {
    /// Highest-ranked result meeting the stopping threshold, or the top
    /// entry when none does.
    pub best: MatchResult,
    /// Candidates ordered by (rmse, e_max); failed candidates last.
    pub leaderboard: Vec<CandidateResult>,
}

fn score(
    design: ActuatorDesign,
    laws: Vec<JointLaw>,
    joint_type: JointType,
    target: &TargetShape,
    cfg: &ShapeConfig,
) -> Result<MatchResult, ShapeError> {
    let state = cfg.sim.simulate(&design, laws, joint_type, target.base_pose)?;
    let saturated = state.is_saturated();
    let simulated = state.centerline;
    let resampled_target = resample_target(target, &simulated)?;
    let m = match_metrics(&simulated, &resampled_target)?;
    Ok(MatchResult {
        rmse: m.rmse,
        e_max: m.e_max,
        objective: cfg.objective(&m),
        design,
        simulated,
        resampled_target,
        saturated,
    })
}

/// Simulates one design on the behavior meta-models and scores it.
pub fn evaluate_design(
    design: &ActuatorDesign,
    target: &TargetShape,
    laws: &MetaLaws,
    cfg: &ShapeConfig,
) -> Result<MatchResult, ShapeError> {
    let joint_laws = laws.laws_for(design)?;
    score(design.clone(), joint_laws, laws.joint_type, target, cfg)
}

fn run_candidate(
    index: usize,
    structure: &StructuralCandidate,
    target: &TargetShape,
    laws: &MetaLaws,
    cfg: &ShapeConfig,
) -> CandidateResult {
    let space = DesignSpace::new(structure.clone(), laws.family(), laws.actuation_range());
    let bounds = space.bounds();
    let seed = cfg.seed.wrapping_add(index as u64);
    let mut result = CandidateResult {
        index,
        structure: structure.clone(),
        best: None,
        evaluations: 0,
        failed_evaluations: 0,
        generations: 0,
        stop_reason: StopReason::MaxIterations,
        history: Vec::new(),
    };
    let mut starts = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_5eed);
    let mut population = cfg.population;
    for run in 0..=cfg.restarts {
        let initial_mean = (run > 0).then(|| bounds.iter().map(|&(lo, hi)| starts.random_range(lo..=hi)).collect());
        let cma = CmaConfig {
            sigma0: cfg.sigma0,
            population,
            max_iterations: cfg.max_iterations,
            seed: seed.wrapping_add((run as u64) << 32),
            initial_mean,
            ..CmaConfig::new(bounds.clone())
        };
        let Ok(mut es) = CmaEs::new(&cma) else { return result };
        population = Some(cfg.restart_growth.max(1) * es.lambda());
        let eval = |x: &[f64], result: &mut CandidateResult| -> f64 {
            match evaluate_design(&space.decode(x), target, laws, cfg) {
                Ok(m) => {
                    let f = m.objective;
                    if result.best.as_ref().is_none_or(|b| f < b.objective) {
                        result.best = Some(m);
                    }
                    f
                }
                Err(_) => {
                    result.failed_evaluations += 1;
                    f64::NAN
                }
            }
        };
        let f0 = eval(&es.mean(), &mut result);
        es.tell_mean(f0);
        let reason = loop {
            if result.best.as_ref().is_some_and(|b| cfg.below_threshold(&b.metrics())) {
                break StopReason::Custom;
            }
            if let Some(r) = es.should_stop() {
                break r;
            }
            let xs = es.ask();
            let fs: Vec<f64> = xs.iter().map(|x| eval(x, &mut result)).collect();
            es.tell(&fs).expect("one value per candidate");
        };
        let offset = result.evaluations;
        let prior = result.history.last().map_or(f64::INFINITY, |h| h.best_so_far);
        result.evaluations += es.evaluations();
        result.generations += es.generation();
        result.stop_reason = reason;
        let done = result.history.len();
        result.history.extend(es.history().iter().map(|h| GenerationStats {
            generation: done + h.generation,
            evaluations: h.evaluations + offset,
            best_so_far: h.best_so_far.min(prior),
            ..h.clone()
        }));
        if reason == StopReason::Custom {
            break;
        }
    }
    result
}

fn rank(a: &CandidateResult, b: &CandidateResult) -> std::cmp::Ordering {
    match (&a.best, &b.best) {
        (Some(x), Some(y)) => x.rmse.total_cmp(&y.rmse).then(x.e_max.total_cmp(&y.e_max)).then(a.index.cmp(&b.index)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.index.cmp(&b.index),
    }
}

/// Runs CMA-ES over the continuous parameters of every structural
/// candidate (in parallel) and ranks the results.
pub fn optimize_design(
    target: &TargetShape,
    candidates: &[StructuralCandidate],
    laws: &MetaLaws,
    cfg: &ShapeConfig,
) -> Result<ShapeMatchOutcome, ShapeError> {
    if candidates.is_empty() {
        return Err(ShapeError::InvalidConfig("no structural candidates".into()));
    }
    let mut leaderboard: Vec<CandidateResult> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_candidate(i, c, target, laws, cfg))
        .collect();
    leaderboard.sort_by(rank);
    let best = leaderboard
        .iter()
        .filter_map(|c| c.best.as_ref())
        .find(|b| cfg.below_threshold(&b.metrics()))
        .or(leaderboard[0].best.as_ref())
        .cloned()
        .ok_or(ShapeError::AllCandidatesFailed)?;
    Ok(ShapeMatchOutcome { best, leaderboard })
}

/// How per-design joint laws are rebuilt from fresh oracle data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RefitModel {
    Poly { fit: FitConfig },
    Mlp { hidden: Vec<usize>, train: TrainConfig, seed: u64 },
}

impl Default for RefitModel {
    fn default() -> Self {
        RefitModel::Poly { fit: FitConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefitReport {
    pub meta: MatchMetrics,
    pub refit: MatchResult,
    /// Refit minus meta-model rmse, mm.
    pub rmse_drift: f64,
    pub e_max_drift: f64,
    /// Largest distance between the two simulated centerlines, mm.
    pub centerline_gap: f64,
}

pub(crate) fn axis_law(set: &SampleSet, model: &RefitModel) -> Result<crate::prbm::AxisLaw, ShapeError> {
    let (p_range, u_range) = set.operating_box();
    match model {
        RefitModel::Poly { fit } => {
            let s = assemble_surrogate(&extract_stiffness(set, fit)?);
            Ok(JointLaw::poly(s, p_range, u_range)?)
        }
        RefitModel::Mlp { hidden, train: cfg, seed } => {
            let inputs: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.p, r.u]).collect();
            let outputs: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.tau]).collect();
            let spec = MlpSpec::new(2, hidden.clone(), 1, *seed)?;
            let norm = Affine::from_bounds(&[p_range.0, u_range.0], &[p_range.1, u_range.1]);
            let cfg = TrainConfig { input_normalizer: Some(norm), ..cfg.clone() };
            let (m, _) = train(&spec, &inputs, &outputs, &cfg)?;
            Ok(JointLaw::mlp(m.with_kind(set.kind), p_range, u_range)?)
        }
    }
}

/// Replaces the meta-model laws of `best` with laws fitted directly on
/// fresh oracle data for each segment design and simulates again.
pub fn refit_and_verify(
    best: &MatchResult,
    target: &TargetShape,
    oracle: &SyntheticFamily,
    laws: &MetaLaws,
    model: &RefitModel,
    cfg: &ShapeConfig,
) -> Result<RefitReport, ShapeError> {
    let labels: Vec<&str> = laws.models.iter().map(|m| m.axis.as_str()).collect();
    let mut joint_laws = Vec::with_capacity(best.design.segments.len());
    for seg in &best.design.segments {
        let sets = oracle.generate(&seg.design)?;
        let axes = labels
            .iter()
            .map(|l| {
                let set = sets
                    .iter()
                    .find(|s| s.axis_label == *l)
                    .ok_or_else(|| ShapeError::InvalidConfig(format!("oracle has no axis `{l}`")))?;
                axis_law(set, model)
            })
            .collect::<Result<Vec<_>, _>>()?;
        joint_laws.push(JointLaw { axes });
    }
    let refit = score(best.design.clone(), joint_laws, laws.joint_type, target, cfg)?;
    let centerline_gap = best
        .simulated
        .points()
        .iter()
        .zip(refit.simulated.points())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(RefitReport {
        meta: best.metrics(),
        rmse_drift: refit.rmse - best.rmse,
        e_max_drift: refit.e_max - best.e_max,
        centerline_gap,
        refit,
    })
}
