//! Coefficient meta-model over a 16-design gripper family, then a coarse
//! behavior meta-model over four helical designs.

use prbm_surrogate::domain::{DesignParam, ModuleDesign};
use prbm_surrogate::metamodel::{build_family, fit_behavior_metamodel, fit_coeff_metamodel, Constraint, FixedValue, MetaConfig, ParamLevels};
use prbm_surrogate::oracle::SyntheticFamily;
use prbm_surrogate::polyfit::{assemble_surrogate, extract_stiffness, FitConfig};

fn family(r: [f64; 2], l: [f64; 2], n: usize, inner: f64, constraint: Constraint) -> prbm_surrogate::metamodel::DesignFamily {
    let levels = |(a, b): (f64, f64)| (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    build_family(
        vec![
            ParamLevels { param: DesignParam::AverageRadius, levels: levels((r[0], r[1])) },
            ParamLevels { param: DesignParam::Length, levels: levels((l[0], l[1])) },
        ],
        vec![
            FixedValue { param: DesignParam::InnerRadius, value: inner },
            FixedValue { param: DesignParam::Thickness, value: 1.5 },
        ],
        constraint,
    )
    .unwrap()
}

fn main() {
    let truth = SyntheticFamily::gripper();
    let fam = family([6.75, 9.0], [9.0, 12.0], 4, 3.5, Constraint::Wall);
    let fits: Vec<_> = fam
        .designs
        .iter()
        .map(|d| assemble_surrogate(&extract_stiffness(&truth.generate(d).unwrap()[0], &FitConfig::default()).unwrap()))
        .collect();
    let meta = fit_coeff_metamodel(&fam, &fits, &MetaConfig::coefficient_default()).unwrap();
    println!("coefficient meta-model: pooled R² {:?}", meta.report.pooled_r2);
    let unseen = ModuleDesign::new(3.5, 7.1, 10.4, 1.5).unwrap();
    println!("instantiated for {unseen:?}: {:?}", meta.predict(&unseen).unwrap());

    let truth = SyntheticFamily::helical().with_step_factor(4.0);
    let fam = family([5.5, 6.5], [4.5, 5.5], 2, 3.0, Constraint::Always);
    let sets: Vec<_> = fam.designs.iter().map(|d| truth.generate(d).unwrap()).collect();
    let mut cfg = MetaConfig::behavior_default();
    cfg.train.max_iterations = 300;
    let models = fit_behavior_metamodel(&fam, &sets, &cfg).unwrap();
    for a in &models.axes {
        println!("behavior axis {}: train R² {:?}", a.axis, a.report.train_r2);
    }
}
