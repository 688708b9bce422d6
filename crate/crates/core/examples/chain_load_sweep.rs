//! Horizontal three-segment chain at 10 kPa under increasing tip masses.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use prbm_surrogate::oracle::SyntheticFamily;
use prbm_surrogate::polyfit::{assemble_surrogate, extract_stiffness, FitConfig};
use prbm_surrogate::prbm::{
    sweep_loadcases, ChainSpec, JointLaw, JointType, LoadCase, SegmentSpec, SolverConfig, DEFAULT_DENSITY, SPHERICAL_AXES,
};

fn main() {
    let truth = SyntheticFamily::helical();
    let sets = truth.generate(&truth.reference).unwrap();
    let axes = SPHERICAL_AXES
        .iter()
        .map(|a| {
            let set = sets.iter().find(|s| s.axis_label == *a).unwrap();
            let (p, u) = set.operating_box();
            JointLaw::poly(assemble_surrogate(&extract_stiffness(set, &FitConfig::default()).unwrap()), p, u).unwrap()
        })
        .collect();
    let law = JointLaw { axes };
    let segments = (0..3).map(|_| SegmentSpec { n: 5, design: truth.reference, phi: 0.0, law: law.clone() }).collect();
    let mut chain = ChainSpec::new(segments, JointType::Spherical, DEFAULT_DENSITY).unwrap();
    chain.base_pose = Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_scaled_axis(Vector3::y() * -FRAC_PI_2));

    let masses = [0.0, 10.0, 20.0, 50.0];
    let loads: Vec<_> = masses.iter().map(|g| LoadCase::actuated(10.0).with_tip_mass(*g)).collect();
    for (g, s) in masses.iter().zip(sweep_loadcases(&chain, &loads, &SolverConfig::default())) {
        let s = s.unwrap();
        let tip = s.centerline.last();
        println!("{g:>4} g: tip ({:7.2}, {:7.2}, {:7.2}) mm, {} Newton steps", tip.x, tip.y, tip.z, s.iterations);
    }
}
