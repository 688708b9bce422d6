use serde::{Deserialize, Serialize};

use super::{generate_samples, GroundTruthLaw, LawForm, OracleError, SampleSet};
use crate::domain::{ActuationKind, DesignParam, ModuleDesign, SampleGrid, Sweep};

/// `base · (1 + Σ slope_k · (d_k / ref_k − 1))` over `[r, R, l, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineCoeff {
    pub base: f64,
    #[serde(default)]
    pub slopes: [f64; 4],
}

impl AffineCoeff {
    pub const fn constant(base: f64) -> Self {
        Self { base, slopes: [0.0; 4] }
    }

    pub const fn new(base: f64, slopes: [f64; 4]) -> Self {
        Self { base, slopes }
    }

    pub fn eval(&self, d: &ModuleDesign, reference: &ModuleDesign) -> f64 {
        let rel: f64 = DesignParam::ALL
            .iter()
            .zip(self.slopes)
            .map(|(p, s)| s * (d.get(*p) / reference.get(*p) - 1.0))
            .sum();
        self.base * (1.0 + rel)
    }
}

/// Design-dependent separable-linear law for one joint axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisLawModel {
    pub axis: String,
    pub a1: AffineCoeff,
    pub a0: AffineCoeff,
    pub e1: AffineCoeff,
    pub e0: AffineCoeff,
    pub c: AffineCoeff,
    pub grid: SampleGrid,
}

impl AxisLawModel {
    pub fn law(&self, d: &ModuleDesign, reference: &ModuleDesign) -> GroundTruthLaw {
        let params = [&self.a1, &self.a0, &self.e1, &self.e0, &self.c].map(|k| k.eval(d, reference));
        GroundTruthLaw::new(LawForm::SeparableLinear, params.to_vec()).expect("five finite params")
    }
}

/// Ground truth for a whole design family: every design gets one smooth
/// separable law per characterized axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticFamily {
    pub kind: ActuationKind,
    pub reference: ModuleDesign,
    pub axes: Vec<AxisLawModel>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

fn sweep(min: f64, max: f64, step: f64) -> Sweep {
    Sweep::new(min, max, step).expect("preset sweep")
}

fn grid(p: Sweep, m: Sweep, axis: &str) -> SampleGrid {
    SampleGrid::new(p, m, axis).expect("preset grid")
}

impl SyntheticFamily {
    /// Single bending axis around the gripper baseline (r=3.5, R=7.5, l=10, t=1.5),
    /// sampled on the 0–15 kPa, 0–0.02 N·m bellow grid.
    pub fn gripper() -> Self {
        let reference = ModuleDesign::new(3.5, 7.5, 10.0, 1.5).expect("positive");
        let y = AxisLawModel {
            axis: "y".into(),
            a1: AffineCoeff::new(2e-4, [0.0, 2.0, -0.3, 0.5]),
            a0: AffineCoeff::new(6e-3, [-0.4, 2.5, -0.8, 1.0]),
            e1: AffineCoeff::new(2e-3, [0.0, 1.5, -0.5, 0.5]),
            e0: AffineCoeff::constant(0.0),
            c: AffineCoeff::new(6e-4, [-0.5, 1.8, 0.9, -0.2]),
            grid: grid(sweep(0.0, 15.0, 0.5), sweep(0.0, 0.02, 0.0006), "y"),
        };
        Self { kind: ActuationKind::Pressure, reference, axes: vec![y], noise_std: 0.0, seed: 0 }
    }

    /// Three-axis spherical-joint module around the helical baseline
    /// (r=3, R=6, l=5, t=1.5): active bending about y, passive bending about x
    /// and passive twist about z. Moments are swept symmetrically over the
    /// range reached by gravity and tip loads.
    pub fn helical() -> Self {
        let reference = ModuleDesign::new(3.0, 6.0, 5.0, 1.5).expect("positive");
        let y = AxisLawModel {
            axis: "y".into(),
            a1: AffineCoeff::new(4e-3, [0.0, 1.5, -0.4, 0.0]),
            a0: AffineCoeff::new(0.5, [0.0, 2.0, -0.6, 0.0]),
            e1: AffineCoeff::new(0.1, [0.0, 1.0, -0.5, 0.0]),
            e0: AffineCoeff::constant(0.0),
            c: AffineCoeff::new(0.012, [0.0, 1.6, 0.8, 0.0]),
            grid: grid(sweep(0.0, 15.0, 0.5), sweep(-0.05, 0.05, 0.00625), "y"),
        };
        let x = AxisLawModel {
            axis: "x".into(),
            a1: AffineCoeff::new(2e-3, [0.0, 1.2, -0.3, 0.0]),
            a0: AffineCoeff::new(0.8, [0.0, 2.0, -0.6, 0.0]),
            e1: AffineCoeff::constant(0.0),
            e0: AffineCoeff::constant(0.0),
            c: AffineCoeff::constant(0.0),
            grid: grid(sweep(0.0, 15.0, 0.5), sweep(-0.0375, 0.0375, 0.0025), "x"),
        };
        let z = AxisLawModel {
            axis: "z".into(),
            a1: AffineCoeff::new(1e-3, [0.0, 1.0, -0.2, 0.0]),
            a0: AffineCoeff::new(0.6, [0.0, 1.8, -0.5, 0.0]),
            e1: AffineCoeff::constant(0.0),
            e0: AffineCoeff::constant(0.0),
            c: AffineCoeff::constant(0.0),
            grid: grid(sweep(0.0, 15.0, 0.5), sweep(-0.0375, 0.0375, 0.0025), "z"),
        };
        Self { kind: ActuationKind::Pressure, reference, axes: vec![y, x, z], noise_std: 0.0, seed: 0 }
    }

    /// Tendon-driven finger module: tendon force 0–8 N, moment 0–0.05 N·m.
    pub fn tendon() -> Self {
        let reference = ModuleDesign::new(3.0, 6.0, 12.0, 1.5).expect("positive");
        let y = AxisLawModel {
            axis: "y".into(),
            a1: AffineCoeff::new(2e-3, [0.0, 1.0, -0.3, 0.5]),
            a0: AffineCoeff::new(0.04, [0.0, 2.0, -0.8, 1.0]),
            e1: AffineCoeff::new(0.01, [0.0, 1.0, -0.5, 0.5]),
            e0: AffineCoeff::constant(0.0),
            c: AffineCoeff::new(5e-3, [0.0, 1.0, 0.0, 0.0]),
            grid: grid(sweep(0.0, 8.0, 0.05), sweep(0.0, 0.05, 0.0025), "y"),
        };
        Self { kind: ActuationKind::TendonForce, reference, axes: vec![y], noise_std: 0.0, seed: 0 }
    }

    pub fn axis_labels(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.axis.clone()).collect()
    }

    pub fn axis(&self, label: &str) -> Option<&AxisLawModel> {
        self.axes.iter().find(|a| a.axis == label)
    }

    pub fn law(&self, d: &ModuleDesign, axis: &str) -> Option<GroundTruthLaw> {
        let mut law = self.axis(axis)?.law(d, &self.reference);
        law.noise_std = self.noise_std;
        law.seed = self.seed;
        Some(law)
    }

    /// Replaces every axis grid's actuation and external sweeps with
    /// coarser ones of the same span.
    pub fn with_step_factor(mut self, factor: f64) -> Self {
        for a in &mut self.axes {
            a.grid.actuation.step *= factor;
            a.grid.external.step *= factor;
        }
        self
    }

    /// One sample set per axis, in axis order.
    pub fn generate(&self, d: &ModuleDesign) -> Result<Vec<SampleSet>, OracleError> {
        self.axes
            .iter()
            .map(|a| {
                let law = self.law(d, &a.axis).expect("axis exists");
                generate_samples(&law, &a.grid, d, self.kind)
            })
            .collect()
    }
}
