//! Bounded black-box minimization with CMA-ES.
//!
//! The search runs in box-normalized coordinates `[0, 1]^d`. Samples that
//! leave the box are clamped before evaluation and pay a quadratic penalty
//! on their distance to the box, scaled by the interquartile range of the
//! generation's objective values so that ranking stays invariant under
//! positive affine rescaling of the objective.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CmaError {
    #[error("invalid CMA-ES configuration: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} objective values, got {got}")]
    BatchSize { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmaConfig {
    /// Initial step size on the normalized `[0, 1]` scale.
    pub sigma0: f64,
    /// Offspring per generation; `None` selects `4 + ⌊3 ln d⌋`.
    pub population: Option<usize>,
    pub max_iterations: usize,
    pub max_evaluations: Option<usize>,
    pub target_value: Option<f64>,
    pub seed: u64,
    /// Per-coordinate `(lo, hi)`; its length fixes the dimension.
    pub bounds: Vec<(f64, f64)>,
    /// Start point in original units; the box centre when absent.
    pub initial_mean: Option<Vec<f64>>,
}

impl Default for CmaConfig {
    fn default() -> Self {
        Self {
            sigma0: 0.3,
            population: None,
            max_iterations: 1000,
            max_evaluations: None,
            target_value: None,
            seed: 0,
            bounds: Vec::new(),
            initial_mean: None,
        }
    }
}

impl CmaConfig {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Self { bounds, ..Self::default() }
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn default_population(dimension: usize) -> usize {
        4 + (3.0 * (dimension as f64).ln()).floor() as usize
    }

    pub fn lambda(&self) -> usize {
        self.population.unwrap_or_else(|| Self::default_population(self.dimension()))
    }

    pub fn validate(&self) -> Result<(), CmaError> {
        let bad = |m: String| Err(CmaError::InvalidConfig(m));
        if self.bounds.is_empty() {
            return bad("no variables".into());
        }
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("bounds of variable {i} are ({lo}, {hi})"));
            }
        }
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return bad(format!("sigma0 must be positive, got {}", self.sigma0));
        }
        if self.lambda() < 2 {
            return bad(format!("population must be at least 2, got {}", self.lambda()));
        }
        if let Some(m) = &self.initial_mean {
            if m.len() != self.dimension() || m.iter().any(|v| !v.is_finite()) {
                return bad("initial mean has the wrong length or a non-finite entry".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    MaxIterations,
    MaxEvaluations,
    SigmaCollapse,
    /// Ended by the caller's own criterion.
    Custom,
}

/// Step sizes below this on the normalized scale end the run.
pub const SIGMA_COLLAPSE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub evaluations: usize,
    pub sigma: f64,
    /// Lowest objective value of this generation.
    pub best_f: f64,
    /// Mean of the finite objective values of this generation.
    pub mean_f: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmaResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evaluations: usize,
    pub generations: usize,
    pub history: Vec<GenerationStats>,
    pub stop_reason: StopReason,
}

impl CmaResult {
    /// Per-generation trace: generation, evaluations, sigma, best f, mean f.
    pub fn write_trace_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["generation", "evaluations", "sigma", "best_f", "mean_f"])?;
        for g in &self.history {
            out.write_record([
                g.generation.to_string(),
                g.evaluations.to_string(),
                format!("{:e}", g.sigma),
                format!("{:e}", g.best_f),
                format!("{:e}", g.mean_f),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Strategy state driven by [`CmaEs::ask`] / [`CmaEs::tell`].
#[derive(Debug, Clone)]
pub struct CmaEs {
    lo: DVector<f64>,
    width: DVector<f64>,
    lambda: usize,
    weights: Vec<f64>,
    mueff: f64,
    cc: f64,
    cs: f64,
    c1: f64,
    cmu: f64,
    damps: f64,
    chi_n: f64,
    mean: DVector<f64>,
    sigma: f64,
    cov: DMatrix<f64>,
    basis: DMatrix<f64>,
    scales: DVector<f64>,
    pc: DVector<f64>,
    ps: DVector<f64>,
    rng: ChaCha8Rng,
    pending: Vec<DVector<f64>>,
    generation: usize,
    evaluations: usize,
    best_x: Vec<f64>,
    best_f: f64,
    history: Vec<GenerationStats>,
    max_iterations: usize,
    max_evaluations: Option<usize>,
    target_value: Option<f64>,
}

fn finite_or_inf(f: f64) -> f64 {
    if f.is_finite() { f } else { f64::INFINITY }
}

fn interquartile_range(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|f| f.is_finite()).collect();
    if v.len() < 2 {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let x = p * (v.len() - 1) as f64;
        let i = x.floor() as usize;
        let j = (i + 1).min(v.len() - 1);
        v[i] + (x - i as f64) * (v[j] - v[i])
    };
    q(0.75) - q(0.25)
}

impl CmaEs {
    pub fn new(cfg: &CmaConfig) -> Result<Self, CmaError> {
        cfg.validate()?;
        let n = cfg.dimension();
        let nf = n as f64;
        let lambda = cfg.lambda();
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu).map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln()).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let cc = (4.0 + mueff / nf) / (nf + 4.0 + 2.0 * mueff / nf);
        let cs = (mueff + 2.0) / (nf + mueff + 5.0);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mueff);
        let cmu = (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nf + 2.0).powi(2) + mueff)).max(0.0);
        let damps = 1.0 + 2.0 * (((mueff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));

        let lo = DVector::from_iterator(n, cfg.bounds.iter().map(|b| b.0));
        let width = DVector::from_iterator(n, cfg.bounds.iter().map(|b| b.1 - b.0));
        let mean = match &cfg.initial_mean {
            Some(m) => DVector::from_iterator(n, (0..n).map(|i| ((m[i] - lo[i]) / width[i]).clamp(0.0, 1.0))),
            None => DVector::from_element(n, 0.5),
        };
        Ok(Self {
            lo,
            width,
            lambda,
            weights,
            mueff,
            cc,
            cs,
            c1,
            cmu,
            damps,
            chi_n,
            mean,
            sigma: cfg.sigma0,
            cov: DMatrix::identity(n, n),
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
            pc: DVector::zeros(n),
            ps: DVector::zeros(n),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            pending: Vec::new(),
            generation: 0,
            evaluations: 0,
            best_x: Vec::new(),
            best_f: f64::INFINITY,
            history: Vec::new(),
            max_iterations: cfg.max_iterations,
            max_evaluations: cfg.max_evaluations,
            target_value: cfg.target_value,
        })
    }

    fn to_original(&self, y: &DVector<f64>) -> Vec<f64> {
        (0..y.len()).map(|i| self.lo[i] + y[i].clamp(0.0, 1.0) * self.width[i]).collect()
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.best_x, self.best_f)
    }

    pub fn history(&self) -> &[GenerationStats] {
        &self.history
    }

    /// Current distribution mean in original units.
    pub fn mean(&self) -> Vec<f64> {
        self.to_original(&self.mean)
    }

    fn record(&mut self, x: Vec<f64>, f: f64) {
        if f < self.best_f || self.best_x.is_empty() {
            self.best_f = f;
            self.best_x = x;
        }
    }

    /// Records an evaluation of the current mean (counted, not ranked).
    pub fn tell_mean(&mut self, f: f64) {
        self.evaluations += 1;
        let x = self.mean();
        self.record(x, finite_or_inf(f));
    }

    /// Draws the next generation; returns clamped points in original units.
    pub fn ask(&mut self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        let bd = &self.basis * DMatrix::from_diagonal(&self.scales);
        self.pending = (0..self.lambda)
            .map(|_| {
                let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut self.rng)));
                &self.mean + (&bd * z) * self.sigma
            })
            .collect();
        self.pending.iter().map(|y| self.to_original(y)).collect()
    }

    /// Updates the distribution from the objective values of the last
    /// [`CmaEs::ask`], in the same order.
    pub fn tell(&mut self, values: &[f64]) -> Result<(), CmaError> {
        if values.len() != self.pending.len() || self.pending.is_empty() {
            return Err(CmaError::BatchSize { expected: self.pending.len(), got: values.len() });
        }
        let n = self.dimension();
        let ys = std::mem::take(&mut self.pending);
        let raw: Vec<f64> = values.iter().map(|f| finite_or_inf(*f)).collect();
        self.evaluations += raw.len();
        self.generation += 1;

        let iqr = interquartile_range(&raw);
        let weight = if iqr > 0.0 { iqr } else { 1.0 };
        let penalized: Vec<f64> = ys
            .iter()
            .zip(&raw)
            .map(|(y, f)| {
                let d2: f64 = y.iter().map(|v| (v - v.clamp(0.0, 1.0)).powi(2)).sum();
                f + weight * d2
            })
            .collect();
        let mut order: Vec<usize> = (0..ys.len()).collect();
        order.sort_by(|&a, &b| penalized[a].total_cmp(&penalized[b]).then(a.cmp(&b)));

        let gen_best = order.iter().map(|&i| raw[i]).fold(f64::INFINITY, f64::min);
        let best_i = (0..raw.len()).min_by(|&a, &b| raw[a].total_cmp(&raw[b])).expect("non-empty");
        let x = self.to_original(&ys[best_i]);
        self.record(x, raw[best_i]);
        let finite: Vec<f64> = raw.iter().copied().filter(|f| f.is_finite()).collect();
        let mean_f = if finite.is_empty() { f64::INFINITY } else { finite.iter().sum::<f64>() / finite.len() as f64 };
        let flat = finite.len() == raw.len() && finite.iter().all(|f| *f == finite[0]);

        // recombination
        let old = self.mean.clone();
        let mut mean = DVector::zeros(n);
        for (w, &i) in self.weights.iter().zip(&order) {
            mean += &ys[i] * *w;
        }
        self.mean = mean;
        let step = (&self.mean - &old) / self.sigma;

        // C^{-1/2} step
        let inv_sqrt = &self.basis
            * DMatrix::from_diagonal(&self.scales.map(|d| 1.0 / d))
            * self.basis.transpose();
        self.ps = &self.ps * (1.0 - self.cs) + (&inv_sqrt * &step) * (self.cs * (2.0 - self.cs) * self.mueff).sqrt();
        let g = self.generation as f64;
        let ps_norm = self.ps.norm();
        let hsig = ps_norm / (1.0 - (1.0 - self.cs).powf(2.0 * g)).sqrt() / self.chi_n < 1.4 + 2.0 / (n as f64 + 1.0);
        let h = if hsig { 1.0 } else { 0.0 };
        self.pc = &self.pc * (1.0 - self.cc) + &step * (h * (self.cc * (2.0 - self.cc) * self.mueff).sqrt());

        let mut rank_mu = DMatrix::zeros(n, n);
        for (w, &i) in self.weights.iter().zip(&order) {
            let d = (&ys[i] - &old) / self.sigma;
            rank_mu += (&d * d.transpose()) * *w;
        }
        let decay = 1.0 - self.c1 - self.cmu;
        let correction = (1.0 - h) * self.cc * (2.0 - self.cc);
        self.cov = &self.cov * decay
            + (&self.pc * self.pc.transpose() + &self.cov * correction) * self.c1
            + rank_mu * self.cmu;
        self.cov = (&self.cov + self.cov.transpose()) * 0.5;

        if flat {
            self.sigma *= 0.5;
        } else {
            self.sigma *= ((self.cs / self.damps) * (ps_norm / self.chi_n - 1.0)).exp();
        }
        let eig = SymmetricEigen::new(self.cov.clone());
        self.basis = eig.eigenvectors;
        self.scales = eig.eigenvalues.map(|v| v.max(1e-20).sqrt());

        self.history.push(GenerationStats {
            generation: self.generation,
            evaluations: self.evaluations,
            sigma: self.sigma,
            best_f: gen_best,
            mean_f,
            best_so_far: self.best_f,
        });
        Ok(())
    }

    /// The configured stopping rules, checked between generations.
    pub fn should_stop(&self) -> Option<StopReason> {
        if self.target_value.is_some_and(|t| self.best_f <= t) {
            return Some(StopReason::TargetReached);
        }
        if self.sigma < SIGMA_COLLAPSE {
            return Some(StopReason::SigmaCollapse);
        }
        if self.generation >= self.max_iterations {
            return Some(StopReason::MaxIterations);
        }
        if self.max_evaluations.is_some_and(|m| self.evaluations + self.lambda > m) {
            return Some(StopReason::MaxEvaluations);
        }
        None
    }

    pub fn result(&self, stop_reason: StopReason) -> CmaResult {
        CmaResult {
            best_x: self.best_x.clone(),
            best_f: self.best_f,
            evaluations: self.evaluations,
            generations: self.generation,
            history: self.history.clone(),
            stop_reason,
        }
    }
}

/// Minimizes with a population evaluator that maps a generation of points
/// to their objective values in order. The start mean is evaluated first.
pub fn minimize_batch<F>(mut f_batch: F, cfg: &CmaConfig) -> Result<CmaResult, CmaError>
where
    F: FnMut(&[Vec<f64>]) -> Vec<f64>,
{
    let mut es = CmaEs::new(cfg)?;
    let start = f_batch(&[es.mean()]);
    es.tell_mean(start.first().copied().unwrap_or(f64::INFINITY));
    loop {
        if let Some(reason) = es.should_stop() {
            return Ok(es.result(reason));
        }
        let xs = es.ask();
        let fs = f_batch(&xs);
        es.tell(&fs)?;
    }
}

pub fn minimize<F>(mut f: F, cfg: &CmaConfig) -> Result<CmaResult, CmaError>
where
    F: FnMut(&[f64]) -> f64,
{
    minimize_batch(|xs| xs.iter().map(|x| f(x)).collect(), cfg)
}
