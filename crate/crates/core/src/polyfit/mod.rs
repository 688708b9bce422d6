//! Polynomial joint-law surrogate built from a stiffness decomposition.
//!
//! Finite differences of the constrained samples give the total tangent
//! stiffness `K(p, u) = −∂τ/∂u`, which is split into an actuation term
//! `k_a(p)` and an elastic term `k_e(u)` by a joint separable least-squares
//! fit. The free-loading samples then pin `τ_n(p, 0)`, and the surrogate is
//!
//! ```text
//! τ_n(p, u) = −∫₀ᵘ (k_a(p) + k_e(v)) dv + τ_n(p, 0)
//! ```
//!
//! integrated exactly on the polynomial coefficients.

mod poly;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::ActuationKind;
use crate::linalg::{lstsq, LstsqError};
use crate::oracle::SampleSet;

pub use poly::Poly;

/// Highest polynomial degree accepted for any stiffness term.
pub const MAX_DEGREE: usize = 5;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PolyfitError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("ill-conditioned {term} fit: condition number {cond:.3e} above {limit:.1e}")]
    IllConditioned { term: &'static str, cond: f64, limit: f64 },
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error("actuation kind mismatch: surrogate is {surrogate}, data is {data}")]
    KindMismatch { surrogate: ActuationKind, data: ActuationKind },
    #[error("holdout set is empty")]
    EmptyHoldout,
    #[error("surrogate document: {0}")]
    Format(String),
}

/// Which stiffness term absorbs the constant part of `K(p, u)`.
///
/// Only the sum `k_a(0) + k_e(0)` is observable from samples of `τ`, so one
/// of the two intercepts is pinned to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterceptSplit {
    /// `k_e(0) = 0`; the shared intercept is reported as `b_a`.
    #[default]
    Actuation,
    /// `k_a(0) = 0`; the shared intercept is reported as `b_e`.
    Elastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub ka_degree: usize,
    pub ke_degree: usize,
    pub kfree_degree: usize,
    pub intercept: InterceptSplit,
    pub cond_limit: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { ka_degree: 1, ke_degree: 1, kfree_degree: 1, intercept: InterceptSplit::Actuation, cond_limit: 1e10 }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<(), PolyfitError> {
        for (name, d) in [("k_a", self.ka_degree), ("k_e", self.ke_degree), ("k_free", self.kfree_degree)] {
            if d > MAX_DEGREE {
                return Err(PolyfitError::InvalidConfig(format!("{name} degree {d} above {MAX_DEGREE}")));
            }
        }
        if self.kfree_degree == 0 {
            return Err(PolyfitError::InvalidConfig("k_free must have degree >= 1 (fit through origin)".into()));
        }
        if !(self.cond_limit > 1.0) {
            return Err(PolyfitError::InvalidConfig("cond_limit must exceed 1".into()));
        }
        Ok(())
    }
}

/// Goodness of fit for one stiffness term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    /// `None` when the target has zero variance and the fit is not exact.
    pub r2: Option<f64>,
    pub max_residual: f64,
    pub samples: usize,
    pub condition_number: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub k_a: TermReport,
    pub k_e: TermReport,
    pub k_free: TermReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiffnessTerms {
    pub k_a: Poly,
    pub k_e: Poly,
    pub k_free: Poly,
    pub kind: ActuationKind,
    pub report: FitReport,
}

fn r_squared_opt(pred: &[f64], target: &[f64]) -> Option<f64> {
    let n = target.len() as f64;
    let mean = target.iter().sum::<f64>() / n;
    let ss_tot: f64 = target.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = pred.iter().zip(target).map(|(p, y)| (y - p).powi(2)).sum();
    if ss_tot > 0.0 {
        Some(1.0 - ss_res / ss_tot)
    } else if ss_res == 0.0 {
        Some(1.0)
    } else {
        None
    }
}

fn term_report(pred: &[f64], target: &[f64], cond: f64) -> TermReport {
    TermReport {
        r2: r_squared_opt(pred, target),
        max_residual: pred.iter().zip(target).map(|(p, y)| (y - p).abs()).fold(0.0, f64::max),
        samples: target.len(),
        condition_number: cond,
    }
}

/// Derivative at `x[at]` of the quadratic through three points.
fn lagrange3_derivative(x: [f64; 3], y: [f64; 3], at: usize) -> f64 {
    let xa = x[at];
    let mut d = 0.0;
    for i in 0..3 {
        let mut denom = 1.0;
        for j in 0..3 {
            if j != i {
                denom *= x[i] - x[j];
            }
        }
        let mut num = 0.0;
        for m in 0..3 {
            if m == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..3 {
                if j != i && j != m {
                    prod *= xa - x[j];
                }
            }
            num += prod;
        }
        d += y[i] * num / denom;
    }
    d
}

/// Tangent stiffness samples `(p, u, −∂τ/∂u)` along each constrained level.
/// Centred three-point stencils inside a level, one-sided at its ends.
fn stiffness_samples(set: &SampleSet) -> Result<Vec<(f64, f64, f64)>, PolyfitError> {
    let mut out = Vec::new();
    let levels = set.constrained_by_level();
    if levels.is_empty() {
        return Err(PolyfitError::InsufficientData("no constrained records".into()));
    }
    for (p, recs) in levels {
        let mut pts: Vec<(f64, f64)> = recs.iter().map(|r| (r.u, r.tau)).collect();
        pts.dedup_by(|a, b| a.0 == b.0);
        if pts.len() < 3 {
            return Err(PolyfitError::InsufficientData(format!(
                "actuation level {p} has {} distinct constrained deformations, need 3",
                pts.len()
            )));
        }
        let n = pts.len();
        for j in 0..n {
            let start = j.saturating_sub(1).min(n - 3);
            let x = [pts[start].0, pts[start + 1].0, pts[start + 2].0];
            let y = [pts[start].1, pts[start + 1].1, pts[start + 2].1];
            let slope = lagrange3_derivative(x, y, j - start);
            out.push((p, pts[j].0, -slope));
        }
    }
    Ok(out)
}

fn is_null_actuator(set: &SampleSet) -> bool {
    set.records.iter().all(|r| r.u == 0.0 && r.tau == 0.0)
}

/// Splits finite-difference stiffness into `k_a(p)` and `k_e(u)` and fits the
/// free-loading effort `τ_n(p, 0)`.
pub fn extract_stiffness(set: &SampleSet, cfg: &FitConfig) -> Result<StiffnessTerms, PolyfitError> {
    cfg.validate()?;
    let n_free = set.free_records().count();
    if n_free < 3 {
        return Err(PolyfitError::InsufficientData(format!("{n_free} free-loading records, need 3")));
    }
    if is_null_actuator(set) {
        let exact = TermReport { r2: Some(1.0), max_residual: 0.0, samples: set.records.len(), condition_number: 1.0 };
        return Ok(StiffnessTerms {
            k_a: Poly::zero(cfg.ka_degree),
            k_e: Poly::zero(cfg.ke_degree),
            k_free: Poly::zero(cfg.kfree_degree),
            kind: set.kind,
            report: FitReport { k_a: exact.clone(), k_e: exact.clone(), k_free: exact },
        });
    }

    // --- stiffness decomposition ---
    let samples = stiffness_samples(set)?;
    let (ka_first, ke_first) = match cfg.intercept {
        InterceptSplit::Actuation => (0, 1),
        InterceptSplit::Elastic => (1, 0),
    };
    let ka_cols: Vec<usize> = (ka_first..=cfg.ka_degree).collect();
    let ke_cols: Vec<usize> = (ke_first..=cfg.ke_degree).collect();
    let ncols = ka_cols.len() + ke_cols.len();
    let a = DMatrix::from_fn(samples.len(), ncols, |i, j| {
        let (p, u, _) = samples[i];
        if j < ka_cols.len() {
            p.powi(ka_cols[j] as i32)
        } else {
            u.powi(ke_cols[j - ka_cols.len()] as i32)
        }
    });
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.2));
    let (x, cond) = lstsq(&a, &b, cfg.cond_limit).map_err(|e| lstsq_error("stiffness", e))?;

    let mut k_a = Poly::zero(cfg.ka_degree);
    for (j, &deg) in ka_cols.iter().enumerate() {
        k_a.0[deg] = x[j];
    }
    let mut k_e = Poly::zero(cfg.ke_degree);
    for (j, &deg) in ke_cols.iter().enumerate() {
        k_e.0[deg] = x[ka_cols.len() + j];
    }

    let ka_target: Vec<f64> = samples.iter().map(|&(_, u, k)| k - k_e.eval(u)).collect();
    let ka_pred: Vec<f64> = samples.iter().map(|&(p, _, _)| k_a.eval(p)).collect();
    let ke_target: Vec<f64> = samples.iter().map(|&(p, _, k)| k - k_a.eval(p)).collect();
    let ke_pred: Vec<f64> = samples.iter().map(|&(_, u, _)| k_e.eval(u)).collect();

    // --- free-loading effort τ_n(p, 0) = k_a(p)·u* + ∫₀^u* k_e ---
    let ke_int = k_e.integral();
    let free: Vec<(f64, f64)> =
        set.free_records().map(|r| (r.p, k_a.eval(r.p) * r.u + ke_int.eval(r.u))).collect();
    let (k_free, free_cond) = if free.iter().all(|&(p, y)| p == 0.0 && y == 0.0) {
        (Poly::zero(cfg.kfree_degree), 1.0)
    } else {
        let af = DMatrix::from_fn(free.len(), cfg.kfree_degree, |i, j| free[i].0.powi(j as i32 + 1));
        let bf = DVector::from_iterator(free.len(), free.iter().map(|f| f.1));
        let (g, c) = lstsq(&af, &bf, cfg.cond_limit).map_err(|e| lstsq_error("free-loading", e))?;
        let mut k_free = Poly::zero(cfg.kfree_degree);
        for j in 0..cfg.kfree_degree {
            k_free.0[j + 1] = g[j];
        }
        (k_free, c)
    };
    let free_target: Vec<f64> = free.iter().map(|f| f.1).collect();
    let free_pred: Vec<f64> = free.iter().map(|f| k_free.eval(f.0)).collect();

    Ok(StiffnessTerms {
        report: FitReport {
            k_a: term_report(&ka_pred, &ka_target, cond),
            k_e: term_report(&ke_pred, &ke_target, cond),
            k_free: term_report(&free_pred, &free_target, free_cond),
        },
        k_a,
        k_e,
        k_free,
        kind: set.kind,
    })
}

fn lstsq_error(term: &'static str, e: LstsqError) -> PolyfitError {
    match e {
        LstsqError::IllConditioned { cond, limit } => PolyfitError::IllConditioned { term, cond, limit },
        LstsqError::Underdetermined { rows, cols } => {
            PolyfitError::InsufficientData(format!("{term} fit has {rows} samples for {cols} coefficients"))
        }
    }
}

/// Closed-form net-effort surrogate `τ_n(p, u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolyDocument", try_from = "PolyDocument")]
pub struct PolySurrogate {
    pub k_a: Poly,
    pub k_e: Poly,
    pub k_free: Poly,
    pub kind: ActuationKind,
    pub fit_report: Option<FitReport>,
    ke_integral: Poly,
}

/// The five coefficients of the default linear surrogate, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveCoefficients {
    pub m_a: f64,
    pub b_a: f64,
    pub m_e: f64,
    pub b_e: f64,
    pub k_n: f64,
}

impl FiveCoefficients {
    pub const NAMES: [&'static str; 5] = ["m_a", "b_a", "m_e", "b_e", "k_n"];

    pub fn to_array(self) -> [f64; 5] {
        [self.m_a, self.b_a, self.m_e, self.b_e, self.k_n]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self { m_a: a[0], b_a: a[1], m_e: a[2], b_e: a[3], k_n: a[4] }
    }
}

pub fn assemble_surrogate(terms: &StiffnessTerms) -> PolySurrogate {
    PolySurrogate::from_polys(
        terms.k_a.clone(),
        terms.k_e.clone(),
        terms.k_free.clone(),
        terms.kind,
        Some(terms.report.clone()),
    )
}

impl PolySurrogate {
    pub fn from_polys(k_a: Poly, k_e: Poly, mut k_free: Poly, kind: ActuationKind, fit_report: Option<FitReport>) -> Self {
        // τ_n(0, 0) = 0 by construction
        if let Some(c0) = k_free.0.first_mut() {
            *c0 = 0.0;
        }
        let ke_integral = k_e.integral();
        Self { k_a, k_e, k_free, kind, fit_report, ke_integral }
    }

    pub fn from_coefficients(c: FiveCoefficients, kind: ActuationKind) -> Self {
        Self::from_polys(Poly(vec![c.b_a, c.m_a]), Poly(vec![c.b_e, c.m_e]), Poly(vec![0.0, c.k_n]), kind, None)
    }

    /// `(m_a, b_a, m_e, b_e, k_n)`; `None` unless all terms are degree 1.
    pub fn coefficients(&self) -> Option<FiveCoefficients> {
        if self.k_a.degree() != 1 || self.k_e.degree() != 1 || self.k_free.degree() != 1 {
            return None;
        }
        Some(FiveCoefficients {
            m_a: self.k_a.coeff(1),
            b_a: self.k_a.coeff(0),
            m_e: self.k_e.coeff(1),
            b_e: self.k_e.coeff(0),
            k_n: self.k_free.coeff(1),
        })
    }

    /// Net effort at actuation `p` and deformation `u`. No range clamping.
    pub fn eval(&self, p: f64, u: f64) -> f64 {
        -self.k_a.eval(p) * u - self.ke_integral.eval(u) + self.k_free.eval(p)
    }

    /// Analytic `∂τ_n/∂u = −(k_a(p) + k_e(u))`.
    pub fn d_du(&self, p: f64, u: f64) -> f64 {
        -(self.k_a.eval(p) + self.k_e.eval(u))
    }

    /// Analytic `∂τ_n/∂p`.
    pub fn d_dp(&self, p: f64, u: f64) -> f64 {
        -self.k_a.derivative().eval(p) * u + self.k_free.derivative().eval(p)
    }

    /// Elastic potential `V(p, u) = −∫₀ᵘ τ_n(p, v) dv`, so that `τ_n = −∂V/∂u`.
    pub fn potential(&self, p: f64, u: f64) -> f64 {
        let ka = self.k_a.eval(p);
        ka * u * u / 2.0 + self.ke_integral.integral().eval(u) - self.k_free.eval(p) * u
    }
}

/// Prediction error of a surrogate on held-out samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub rmse: f64,
    pub max_abs_error: f64,
    /// Errors divided by the holdout effort range; `None` for a zero range.
    pub rmse_normalized: Option<f64>,
    pub max_normalized: Option<f64>,
    pub effort_range: f64,
    pub samples: usize,
}

pub fn fit_quality(s: &PolySurrogate, holdout: &SampleSet) -> Result<QualityReport, PolyfitError> {
    if holdout.records.is_empty() {
        return Err(PolyfitError::EmptyHoldout);
    }
    if s.kind != holdout.kind {
        return Err(PolyfitError::KindMismatch { surrogate: s.kind, data: holdout.kind });
    }
    let errs: Vec<f64> = holdout.records.iter().map(|r| s.eval(r.p, r.u) - r.tau).collect();
    let rmse = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
    let max_abs_error = errs.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let range = holdout.effort_range();
    let norm = |v: f64| if range > 0.0 { Some(v / range) } else { None };
    Ok(QualityReport {
        rmse,
        max_abs_error,
        rmse_normalized: norm(rmse),
        max_normalized: norm(max_abs_error),
        effort_range: range,
        samples: errs.len(),
    })
}

pub const POLY_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Serialize, Deserialize)]
struct PolyDocument {
    format_version: u32,
    model: String,
    kind: ActuationKind,
    degrees: PolyDegrees,
    coefficients: PolyCoefficients,
    #[serde(default)]
    fit_report: Option<FitReport>,
}

#[derive(Clone, Serialize, Deserialize)]
struct PolyDegrees {
    k_a: usize,
    k_e: usize,
    k_free: usize,
}

#[derive(Clone, Serialize, Deserialize)]
struct PolyCoefficients {
    k_a: Poly,
    k_e: Poly,
    k_free: Poly,
}

impl From<PolySurrogate> for PolyDocument {
    fn from(s: PolySurrogate) -> Self {
        PolyDocument {
            format_version: POLY_FORMAT_VERSION,
            model: "poly".into(),
            kind: s.kind,
            degrees: PolyDegrees { k_a: s.k_a.degree(), k_e: s.k_e.degree(), k_free: s.k_free.degree() },
            coefficients: PolyCoefficients { k_a: s.k_a, k_e: s.k_e, k_free: s.k_free },
            fit_report: s.fit_report,
        }
    }
}

impl TryFrom<PolyDocument> for PolySurrogate {
    type Error = PolyfitError;

    fn try_from(doc: PolyDocument) -> Result<Self, PolyfitError> {
        if doc.format_version != POLY_FORMAT_VERSION || doc.model != "poly" {
            return Err(PolyfitError::Format(format!(
                "unsupported document (model `{}`, version {})",
                doc.model, doc.format_version
            )));
        }
        let c = doc.coefficients;
        if c.k_a.degree() != doc.degrees.k_a || c.k_e.degree() != doc.degrees.k_e || c.k_free.degree() != doc.degrees.k_free {
            return Err(PolyfitError::Format("coefficient lengths disagree with degrees".into()));
        }
        if c.k_a.0.is_empty() || c.k_e.0.is_empty() || c.k_free.0.is_empty() {
            return Err(PolyfitError::Format("empty coefficient list".into()));
        }
        Ok(Self::from_polys(c.k_a, c.k_e, c.k_free, doc.kind, doc.fit_report))
    }
}

impl PolySurrogate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surrogate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PolyfitError> {
        serde_json::from_str(text).map_err(|e| PolyfitError::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests;
