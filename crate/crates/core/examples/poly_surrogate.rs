//! Recover a known five-coefficient law from noiseless samples.

use prbm_surrogate::domain::{ActuationKind, ModuleDesign, SampleGrid, Sweep};
use prbm_surrogate::oracle::{generate_samples, GroundTruthLaw};
use prbm_surrogate::polyfit::{assemble_surrogate, extract_stiffness, fit_quality, FitConfig};

fn main() {
    let law = GroundTruthLaw::separable_linear(2.0, 1.0, 3.0, 0.0, 5.0);
    let grid = SampleGrid::new(Sweep::new(0.0, 15.0, 0.5).unwrap(), Sweep::new(0.0, 0.02, 0.0006).unwrap(), "y").unwrap();
    let design = ModuleDesign::new(3.0, 5.0, 4.0, 1.5).unwrap();
    let set = generate_samples(&law, &grid, &design, ActuationKind::Pressure).expect("samples");
    let s = assemble_surrogate(&extract_stiffness(&set, &FitConfig::default()).expect("fit"));
    println!("{:?}", s.coefficients().unwrap());
    let q = fit_quality(&s, &set).unwrap();
    println!("rmse {:.3e}, max normalized error {:.3e}", q.rmse, q.max_normalized.unwrap());
    println!("tau(10 kPa, 0.5 rad) = {:.6}", s.eval(10.0, 0.5));
}
