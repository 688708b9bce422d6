//! Short search matching a two-segment actuator to a quarter-turn helix
//! with meta-models trained on four designs.

use prbm_surrogate::domain::DesignParam;
use prbm_surrogate::metamodel::{build_family, fit_behavior_metamodel, Constraint, FixedValue, MetaConfig, ParamLevels};
use prbm_surrogate::oracle::SyntheticFamily;
use prbm_surrogate::shapematch::{optimize_design, MetaLaws, ShapeConfig, StructuralCandidate, TargetShape};

fn main() {
    let truth = SyntheticFamily::helical().with_step_factor(4.0);
    let family = build_family(
        vec![
            ParamLevels { param: DesignParam::AverageRadius, levels: vec![5.0, 7.0] },
            ParamLevels { param: DesignParam::Length, levels: vec![4.0, 6.0] },
        ],
        vec![
            FixedValue { param: DesignParam::InnerRadius, value: 3.0 },
            FixedValue { param: DesignParam::Thickness, value: 1.5 },
        ],
        Constraint::Always,
    )
    .unwrap();
    let sets: Vec<_> = family.designs.iter().map(|d| truth.generate(d).unwrap()).collect();
    let mut cfg = MetaConfig::behavior_default();
    cfg.train.max_iterations = 300;
    let models = fit_behavior_metamodel(&family, &sets, &cfg).unwrap();
    let laws = MetaLaws::new(&models).unwrap();

    let target = TargetShape::helix(15.0, 20.0, 0.25, Default::default(), 181).unwrap();
    let candidates: Vec<_> = [vec![3, 3], vec![4, 3], vec![4, 4]].into_iter().map(StructuralCandidate::new).collect();
    let search = ShapeConfig { max_iterations: 25, ..ShapeConfig::default() };
    let out = optimize_design(&target, &candidates, &laws, &search).unwrap();
    for c in &out.leaderboard {
        if let Some(b) = &c.best {
            println!("{:>6}: rmse {:6.2} mm, e_max {:6.2} mm", c.structure.label(), b.rmse, b.e_max);
        }
    }
    println!("pressure {:.2} kPa", out.best.design.pressure);
}
