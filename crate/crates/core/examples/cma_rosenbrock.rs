//! CMA-ES on the 5-D Rosenbrock function.

use prbm_surrogate::optimize::{minimize, CmaConfig};

fn main() {
    let f = |x: &[f64]| x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum::<f64>();
    let cfg = CmaConfig { target_value: Some(1e-10), max_evaluations: Some(30_000), seed: 3, ..CmaConfig::new(vec![(-2.0, 2.0); 5]) };
    let r = minimize(f, &cfg).unwrap();
    println!("f = {:.3e} at {:?}", r.best_f, r.best_x);
    println!("{} evaluations, {} generations, stopped: {:?}", r.evaluations, r.generations, r.stop_reason);
}
