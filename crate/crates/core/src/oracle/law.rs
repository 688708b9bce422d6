use serde::{Deserialize, Serialize};

use super::OracleError;

/// Closed-form family of a synthetic ground-truth joint law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawForm {
    /// `τ = −(a₁p + a₀)u − (e₁u²/2 + e₀u) + c·p`, params `[a₁, a₀, e₁, e₀, c]`.
    SeparableLinear,
    /// `τ = −(a₁p + a₀)u − (e₂u³/3 + e₁u²/2 + e₀u) + c·p`, params `[a₁, a₀, e₂, e₁, e₀, c]`.
    SeparableCubic,
    /// `τ = −(a₁p + a₀)u − e₁u³ − g·p·u² + c·p`, params `[a₁, a₀, e₁, g, c]`.
    Nonseparable,
}

impl LawForm {
    pub fn param_count(self) -> usize {
        match self {
            LawForm::SeparableLinear => 5,
            LawForm::SeparableCubic => 6,
            LawForm::Nonseparable => 5,
        }
    }
}

fn default_bracket() -> (f64, f64) {
    (-10.0, 10.0)
}

fn default_scan_cells() -> usize {
    2000
}

/// Synthetic stand-in for a finite-element characterization of one module axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthLaw {
    pub form: LawForm,
    pub params: Vec<f64>,
    /// Relative multiplicative noise applied to stored deformations.
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
    /// Deformation interval searched for equilibria.
    #[serde(default = "default_bracket")]
    pub bracket: (f64, f64),
    /// Bisection stops once the bracket is this narrow; 0 runs to floating-point resolution.
    #[serde(default)]
    pub root_tol: f64,
    /// Number of cells scanned for sign changes before bisecting.
    #[serde(default = "default_scan_cells")]
    pub scan_cells: usize,
}

impl GroundTruthLaw {
    pub fn new(form: LawForm, params: Vec<f64>) -> Result<Self, OracleError> {
        let law = Self {
            form,
            params,
            noise_std: 0.0,
            seed: 0,
            bracket: default_bracket(),
            root_tol: 0.0,
            scan_cells: default_scan_cells(),
        };
        law.validate()?;
        Ok(law)
    }

    /// `[a₁, a₀, e₁, e₀, c]`.
    pub fn separable_linear(a1: f64, a0: f64, e1: f64, e0: f64, c: f64) -> Self {
        Self::new(LawForm::SeparableLinear, vec![a1, a0, e1, e0, c]).expect("five finite params")
    }

    pub fn with_noise(mut self, noise_std: f64, seed: u64) -> Self {
        self.noise_std = noise_std;
        self.seed = seed;
        self
    }

    pub fn with_bracket(mut self, lo: f64, hi: f64) -> Self {
        self.bracket = (lo, hi);
        self
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.params.len() != self.form.param_count() {
            return Err(OracleError::InvalidLaw(format!(
                "{:?} expects {} params, got {}",
                self.form,
                self.form.param_count(),
                self.params.len()
            )));
        }
        if self.params.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::InvalidLaw("non-finite parameter".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(OracleError::InvalidLaw(format!("noise_std must be >= 0, got {}", self.noise_std)));
        }
        if !(self.bracket.0 < self.bracket.1) {
            return Err(OracleError::InvalidLaw(format!("empty bracket {:?}", self.bracket)));
        }
        if self.scan_cells == 0 {
            return Err(OracleError::InvalidLaw("scan_cells must be positive".into()));
        }
        Ok(())
    }

    /// Net joint effort `τ_gt(p, u)`.
    pub fn tau(&self, p: f64, u: f64) -> f64 {
        let k = &self.params;
        match self.form {
            LawForm::SeparableLinear => {
                let (a1, a0, e1, e0, c) = (k[0], k[1], k[2], k[3], k[4]);
                -(a1 * p + a0) * u - (e1 * u * u / 2.0 + e0 * u) + c * p
            }
            LawForm::SeparableCubic => {
                let (a1, a0, e2, e1, e0, c) = (k[0], k[1], k[2], k[3], k[4], k[5]);
                -(a1 * p + a0) * u - (e2 * u * u * u / 3.0 + e1 * u * u / 2.0 + e0 * u) + c * p
            }
            LawForm::Nonseparable => {
                let (a1, a0, e1, g, c) = (k[0], k[1], k[2], k[3], k[4]);
                -(a1 * p + a0) * u - e1 * u * u * u - g * p * u * u + c * p
            }
        }
    }

    /// Analytic `∂τ_gt/∂u`.
    pub fn dtau_du(&self, p: f64, u: f64) -> f64 {
        let k = &self.params;
        match self.form {
            LawForm::SeparableLinear => -(k[0] * p + k[1]) - (k[2] * u + k[3]),
            LawForm::SeparableCubic => -(k[0] * p + k[1]) - (k[2] * u * u + k[3] * u + k[4]),
            LawForm::Nonseparable => -(k[0] * p + k[1]) - 3.0 * k[2] * u * u - 2.0 * k[3] * p * u,
        }
    }

    /// Deformation at which the joint balances an external effort `m`:
    /// the root of `τ_gt(p, u) + m = 0` inside the bracket.
    ///
    /// The bracket is scanned for downward sign changes (stable equilibria,
    /// where the restoring effort decreases through zero); the one closest to
    /// `u = 0` is refined by bisection.
    pub fn equilibrium_deformation(&self, p: f64, m: f64) -> Result<f64, OracleError> {
        let f = |u: f64| self.tau(p, u) + m;
        let (lo, hi) = self.bracket;
        let n = self.scan_cells;
        let node = |i: usize| lo + (hi - lo) * i as f64 / n as f64;

        let mut best: Option<(f64, f64, f64)> = None; // (distance to 0, a, b)
        let mut prev_x = node(0);
        let mut prev_f = f(prev_x);
        let consider = |a: f64, b: f64, best: &mut Option<(f64, f64, f64)>| {
            let d = if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()) };
            if best.is_none_or(|(bd, _, _)| d < bd) {
                *best = Some((d, a, b));
            }
        };
        for i in 1..=n {
            let x = node(i);
            let fx = f(x);
            if prev_f == 0.0 && fx < 0.0 {
                consider(prev_x, prev_x, &mut best);
            } else if prev_f > 0.0 && fx <= 0.0 {
                if fx == 0.0 {
                    consider(x, x, &mut best);
                } else {
                    consider(prev_x, x, &mut best);
                }
            }
            prev_x = x;
            prev_f = fx;
        }
        let Some((_, mut a, mut b)) = best else {
            return Err(OracleError::NoRootInBracket { p, ext: m, bracket: self.bracket });
        };
        if a == b {
            return Ok(a);
        }
        // invariant: f(a) > 0 >= f(b)
        loop {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b || (b - a) <= self.root_tol {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        // pick the endpoint with the smaller residual
        Ok(if f(a).abs() <= f(b).abs() { a } else { b })
    }
}
