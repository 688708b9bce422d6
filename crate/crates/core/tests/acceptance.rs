//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! `cargo test --test acceptance -- 3 7` runs a subset.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prbm_surrogate::cli::{RunManifest, MANIFEST_FILE};
use prbm_surrogate::domain::{ActuationKind, DesignParam, ModuleDesign, SampleGrid, Sweep};
use prbm_surrogate::metamodel::{
    build_family, fit_behavior_metamodel, fit_coeff_metamodel, BehaviorMetaModels, Constraint, DesignFamily, FixedValue,
    MetaConfig, ParamLevels,
};
use prbm_surrogate::mlp::{gradient_check, r_squared, train, MlpSpec, TrainConfig};
use prbm_surrogate::oracle::{generate_samples, GroundTruthLaw, SampleSet, SyntheticFamily};
use prbm_surrogate::optimize::{minimize, CmaConfig, StopReason};
use prbm_surrogate::polyfit::{assemble_surrogate, extract_stiffness, fit_quality, FitConfig, FiveCoefficients, PolySurrogate};
use prbm_surrogate::prbm::{
    solve_equilibrium, sweep_loadcases, AxisLaw, ChainSpec, JointLaw, JointType, Kinematics, LoadCase, SegmentSpec,
    SolverConfig, TipForce, DEFAULT_DENSITY, SPHERICAL_AXES,
};
use prbm_surrogate::shapematch::{
    enumerate_structures, optimize_design, refit_and_verify, ActuatorDesign, DesignSpace, MetaLaws, RefitModel, ShapeConfig,
    StructuralCandidate, StructureConfig, TargetShape, TargetSpec,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn grasp_grid() -> SampleGrid {
    SampleGrid::new(Sweep::new(0.0, 15.0, 0.5).unwrap(), Sweep::new(0.0, 0.02, 0.0006).unwrap(), "y").unwrap()
}

fn poly_fit(set: &SampleSet) -> PolySurrogate {
    assemble_surrogate(&extract_stiffness(set, &FitConfig::default()).unwrap())
}

fn polynomial_round_trip() -> Outcome {
    let want = [2.0, 1.0, 3.0, 0.0, 5.0];
    let law = GroundTruthLaw::separable_linear(want[0], want[1], want[2], want[3], want[4]);
    let d = ModuleDesign::new(3.0, 5.0, 4.0, 1.5).unwrap();
    let set = generate_samples(&law, &grasp_grid(), &d, ActuationKind::Pressure).unwrap();
    let s = poly_fit(&set);
    let got = s.coefficients().unwrap().to_array();
    let coeff_err = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    let q = fit_quality(&s, &set).unwrap();
    let norm = q.max_normalized.unwrap();
    check(
        coeff_err <= 1e-6 && norm <= 1e-6,
        format!("coefficients {got:.9?}, max |Δ| {coeff_err:.1e}, max normalized error {norm:.1e}"),
    )
}

fn derivative_consistency() -> Outcome {
    let mut surrogates: Vec<(PolySurrogate, (f64, f64), (f64, f64))> = Vec::new();
    let law = GroundTruthLaw::separable_linear(2.0, 1.0, 3.0, 0.0, 5.0);
    let set = generate_samples(&law, &grasp_grid(), &ModuleDesign::new(3.0, 5.0, 4.0, 1.5).unwrap(), ActuationKind::Pressure)
        .unwrap();
    let (pb, ub) = set.operating_box();
    surrogates.push((poly_fit(&set), pb, ub));
    for truth in [SyntheticFamily::gripper(), SyntheticFamily::helical(), SyntheticFamily::tendon()] {
        for set in truth.generate(&truth.reference).unwrap() {
            let (pb, ub) = set.operating_box();
            surrogates.push((poly_fit(&set), pb, ub));
        }
    }
    surrogates.push((
        PolySurrogate::from_polys(
            prbm_surrogate::polyfit::Poly(vec![0.3, 1.2, -0.05, 0.004]),
            prbm_surrogate::polyfit::Poly(vec![0.7, 2.0, 0.4, -0.02, 0.001]),
            prbm_surrogate::polyfit::Poly(vec![0.0, 4.0, 0.1]),
            ActuationKind::TendonForce,
            None,
        ),
        (0.0, 8.0),
        (-2.0, 2.0),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for (s, (p0, p1), (u0, u1)) in &surrogates {
        for _ in 0..1000 {
            let p = rng.random_range(*p0..=*p1);
            let u = rng.random_range(*u0..=*u1);
            let h = 2e-6 * (u1 - u0).max(1e-3);
            let fd = (s.eval(p, u + h) - s.eval(p, u - h)) / (2.0 * h);
            let an = s.d_du(p, u);
            worst = worst.max((fd - an).abs() / an.abs().max(1e-12));
        }
    }
    check(worst <= 1e-6, format!("{} surrogates × 1000 points, max relative deviation {worst:.1e}", surrogates.len()))
}

fn mlp_quality() -> Outcome {
    let truth = SyntheticFamily::gripper();
    let set = &truth.generate(&truth.reference).unwrap()[0];
    let xs: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.p, r.u]).collect();
    let ys: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.tau]).collect();
    let spec = MlpSpec::new(2, vec![64, 64], 1, 0).unwrap();
    let cfg = TrainConfig {
        learning_rate: 3e-3,
        final_lr_fraction: 0.05,
        batch_size: 32,
        max_iterations: 600,
        ..TrainConfig::default()
    };
    let (_, h) = train(&spec, &xs, &ys, &cfg).unwrap();
    let r2 = h.min_holdout_r2().unwrap();
    check(r2 >= 0.999, format!("{} records, holdout R² {r2:.6}", xs.len()))
}

fn mlp_gradient() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (k, (inp, hidden, out)) in [(2, vec![64, 64], 1), (3, vec![7, 5], 2), (6, vec![32, 16], 1)].into_iter().enumerate() {
        let spec = MlpSpec::new(inp, hidden, out, k as u64).unwrap();
        // a few steps move the biases off zero
        let xs: Vec<Vec<f64>> = (0..40).map(|_| (0..inp).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| (0..out).map(|j| (x[0] * (j + 1) as f64).sin()).collect()).collect();
        let (m, _) = train(&spec, &xs, &ys, &TrainConfig { max_iterations: 5, ..TrainConfig::default() }).unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..inp).map(|_| rng.random_range(-1.5..1.5)).collect();
            let y: Vec<f64> = (0..out).map(|_| rng.random_range(-1.0..1.0)).collect();
            worst = worst.max(gradient_check(&m, &x, &y).unwrap());
        }
    }
    check(worst <= 1e-4, format!("max relative deviation {worst:.1e}"))
}

fn gripper_family() -> DesignFamily {
    build_family(
        vec![
            ParamLevels { param: DesignParam::AverageRadius, levels: vec![6.75, 7.5, 8.25, 9.0] },
            ParamLevels { param: DesignParam::Length, levels: vec![9.0, 10.0, 11.0, 12.0] },
        ],
        vec![
            FixedValue { param: DesignParam::InnerRadius, value: 3.5 },
            FixedValue { param: DesignParam::Thickness, value: 1.5 },
        ],
        Constraint::Wall,
    )
    .unwrap()
}

fn coefficient_metamodel() -> Outcome {
    let truth = SyntheticFamily::gripper();
    let family = gripper_family();
    let fits: Vec<PolySurrogate> = family.designs.iter().map(|d| poly_fit(&truth.generate(d).unwrap()[0])).collect();
    let meta = fit_coeff_metamodel(&family, &fits, &MetaConfig::coefficient_default()).unwrap();
    let pooled = meta.report.pooled_r2.unwrap_or(f64::NAN);
    let mut worst: f64 = 0.0;
    for (d, f) in family.designs.iter().zip(&fits) {
        let direct = f.coefficients().unwrap().to_array();
        let inst = meta.predict(d).unwrap().to_array();
        for (a, b) in inst.iter().zip(direct) {
            if b != 0.0 {
                worst = worst.max(((a - b) / b).abs());
            } else {
                worst = worst.max(a.abs());
            }
        }
    }
    check(
        family.len() == 16 && pooled >= 0.99 && worst <= 0.05,
        format!("{} designs, pooled R² {pooled:.5}, max coefficient relative error {:.2}%", family.len(), 100.0 * worst),
    )
}

struct Behavior {
    models: BehaviorMetaModels,
    seconds: f64,
}

static BEHAVIOR: OnceLock<Behavior> = OnceLock::new();

fn behavior() -> &'static Behavior {
    BEHAVIOR.get_or_init(|| {
        let t = Instant::now();
        let family = DesignFamily::helical_grid().unwrap();
        let truth = SyntheticFamily::helical();
        let sets: Vec<_> = family.designs.iter().map(|d| truth.generate(d).unwrap()).collect();
        let models = fit_behavior_metamodel(&family, &sets, &MetaConfig::behavior_default()).unwrap();
        Behavior { models, seconds: t.elapsed().as_secs_f64() }
    })
}

fn behavior_metamodel() -> Outcome {
    let b = behavior();
    let truth = SyntheticFamily::helical();
    let family = DesignFamily::helical_grid().unwrap();
    let mut lines = Vec::new();
    let mut ok = b.seconds < 120.0;
    for m in &b.models.axes {
        let (mut pred, mut target) = (Vec::new(), Vec::new());
        for d in &family.designs {
            let set = truth.generate(d).unwrap().into_iter().find(|s| s.axis_label == m.axis).unwrap();
            for r in &set.records {
                pred.push(m.predict(d, r.p, r.u));
                target.push(r.tau);
            }
        }
        let all = r_squared(&pred, &target).unwrap();
        let holdout = m.report.holdout_r2.unwrap_or(f64::NAN);
        ok &= all >= 0.999 && holdout >= 0.999;
        lines.push(format!("{} R² {all:.5} (holdout {holdout:.5})", m.axis));
    }
    check(ok, format!("{} designs, trained in {:.1} s; {}", family.len(), b.seconds, lines.join(", ")))
}

fn linear_law(m_a: f64, b_a: f64, m_e: f64, b_e: f64, k_n: f64) -> PolySurrogate {
    PolySurrogate::from_coefficients(FiveCoefficients { m_a, b_a, m_e, b_e, k_n }, ActuationKind::Pressure)
}

fn spring(k: f64) -> AxisLaw {
    AxisLaw::unbounded_poly(linear_law(0.0, k, 0.0, 0.0, 0.0))
}

fn segment(n: usize, l: f64, phi: f64, law: JointLaw) -> SegmentSpec {
    SegmentSpec { n, design: ModuleDesign::new(3.0, 6.0, l, 1.5).unwrap(), phi, law }
}

fn energy(chain: &ChainSpec, laws: &[PolySurrogate], p: f64, f: Vector3<f64>, q: &[f64]) -> f64 {
    let k = Kinematics::compute(chain, q);
    let elastic: f64 = q.iter().zip(laws).map(|(u, s)| s.potential(p, *u)).sum();
    let gravity: f64 =
        k.link_midpoints.iter().zip(&chain.link_masses).map(|(x, m)| -m * chain.gravity.dot(&x.coords) * 1e-3).sum();
    elastic + gravity - f.dot(&k.tip.coords) * 1e-3
}

fn equilibrium_correctness() -> Outcome {
    let tight = SolverConfig { tol: 1e-12, ..SolverConfig::default() };

    // horizontal pendulum: k q = m g (L/2) cos q
    let seg = segment(1, 100.0, 0.0, JointLaw::revolute(spring(1.0)));
    let mut chain = ChainSpec::new(vec![seg], JointType::Revolute, DEFAULT_DENSITY).unwrap();
    chain.joint_position = 0.0;
    chain.link_masses = vec![0.1];
    chain.base_pose = Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_scaled_axis(Vector3::y() * 0.5 * std::f64::consts::PI));
    let s = solve_equilibrium(&chain, &LoadCase::actuated(0.0), &tight).unwrap();
    let g = |q: f64| q - 0.1 * 9.81 * 0.05 * q.cos();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 { hi = mid } else { lo = mid }
    }
    let pendulum = (s.q[0] - lo).abs();

    // three joints against compass search on the total potential
    let laws = [
        linear_law(0.002, 0.05, 0.02, 0.0, 0.004),
        linear_law(0.001, 0.04, 0.01, 0.0, 0.003),
        linear_law(0.003, 0.06, 0.03, 0.0, 0.002),
    ];
    let segs = laws.iter().map(|l| segment(1, 20.0, 0.0, JointLaw::revolute(AxisLaw::unbounded_poly(l.clone())))).collect();
    let chain = ChainSpec::new(segs, JointType::Revolute, DEFAULT_DENSITY).unwrap();
    let f = Vector3::new(0.3, 0.0, -0.2);
    let p = 5.0;
    let mut lc = LoadCase::actuated(p);
    lc.tip_force = TipForce::Constant { force: f.into() };
    let s = solve_equilibrium(&chain, &lc, &SolverConfig::default()).unwrap();
    let mut q = vec![0.0; 3];
    let mut best = energy(&chain, &laws, p, f, &q);
    let mut h = 0.05;
    while h > 1e-9 {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..3 {
                for d in [h, -h] {
                    let mut c = q.clone();
                    c[i] += d;
                    let e = energy(&chain, &laws, p, f, &c);
                    if e < best {
                        best = e;
                        q = c;
                        improved = true;
                    }
                }
            }
        }
        h *= 0.5;
    }
    let brute = s.q.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    // rigid motion of base, gravity and load moves the centerline with it
    let law = |k: f64| JointLaw::spherical(spring(k), spring(2.0 * k), spring(3.0 * k));
    let chain = ChainSpec::new(
        vec![segment(2, 15.0, 0.0, law(0.05)), segment(2, 10.0, 0.7, law(0.03))],
        JointType::Spherical,
        DEFAULT_DENSITY,
    )
    .unwrap();
    let f = Vector3::new(0.2, -0.1, 0.05);
    let mut lc = LoadCase::actuated(0.0);
    lc.tip_force = TipForce::Constant { force: f.into() };
    let base = solve_equilibrium(&chain, &lc, &tight).unwrap();
    let iso = Isometry3::from_parts(Translation3::new(4.0, -7.0, 2.5), UnitQuaternion::from_scaled_axis(Vector3::new(0.3, -1.1, 0.6)));
    let mut moved = chain.clone();
    moved.base_pose = iso * chain.base_pose;
    moved.gravity = iso.rotation * chain.gravity;
    lc.tip_force = TipForce::Constant { force: (iso.rotation * f).into() };
    let other = solve_equilibrium(&moved, &lc, &tight).unwrap();
    let objectivity = base
        .centerline
        .points()
        .iter()
        .zip(other.centerline.points())
        .map(|(a, b)| (iso * a - b).norm())
        .fold(0.0, f64::max);

    check(
        pendulum <= 1e-6 && brute <= 1e-4 && objectivity <= 1e-9 && q.iter().any(|v| v.abs() > 0.05),
        format!("pendulum |Δq| {pendulum:.1e} rad, 3-joint max |Δq| {brute:.1e} rad, objectivity {objectivity:.1e} mm"),
    )
}

/// Spherical joint law of one helical-family design from direct polynomial fits.
fn helical_joint(truth: &SyntheticFamily, d: &ModuleDesign) -> JointLaw {
    let sets = truth.generate(d).unwrap();
    let axes = SPHERICAL_AXES
        .iter()
        .map(|a| {
            let set = sets.iter().find(|s| s.axis_label == *a).unwrap();
            let (pb, ub) = set.operating_box();
            JointLaw::poly(poly_fit(set), pb, ub).unwrap()
        })
        .collect();
    JointLaw { axes }
}

fn load_sweep() -> Outcome {
    let truth = SyntheticFamily::helical();
    let law = helical_joint(&truth, &truth.reference);
    let segs = (0..3).map(|i| SegmentSpec { n: 5, design: truth.reference, phi: 0.4 * i as f64, law: law.clone() }).collect();
    let mut chain = ChainSpec::new(segs, JointType::Spherical, DEFAULT_DENSITY).unwrap();
    chain.base_pose =
        Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_scaled_axis(Vector3::y() * -0.5 * std::f64::consts::PI));
    let masses = [0.0, 10.0, 20.0, 50.0];
    let loads: Vec<LoadCase> = masses.iter().map(|g| LoadCase::actuated(10.0).with_tip_mass(*g)).collect();
    let states: Vec<_> = sweep_loadcases(&chain, &loads, &SolverConfig::default()).into_iter().map(|s| s.unwrap()).collect();
    let unloaded = states[0].centerline.last();
    let defl: Vec<f64> = states.iter().map(|s| (s.centerline.last() - unloaded).norm()).collect();
    let drop: Vec<f64> = states.iter().map(|s| s.centerline.last().z).collect();
    let ok = states.iter().all(|s| s.converged)
        && defl.windows(2).all(|w| w[1] > w[0])
        && drop.windows(2).all(|w| w[1] < w[0]);
    check(ok, format!("tip deflection {defl:.3?} mm at {masses:?} g"))
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
}

fn cma_benchmarks() -> Outcome {
    let sphere_cfg = |seed| CmaConfig {
        target_value: Some(1e-8),
        max_evaluations: Some(5000),
        seed,
        initial_mean: Some((0..10).map(|i| if i % 2 == 0 { 3.0 } else { -2.0 }).collect()),
        ..CmaConfig::new(vec![(-5.0, 5.0); 10])
    };
    let s = minimize(sphere, &sphere_cfg(1)).unwrap();
    let rcfg = CmaConfig {
        target_value: Some(1e-4),
        max_evaluations: Some(30_000),
        max_iterations: 100_000,
        seed: 3,
        ..CmaConfig::new(vec![(-2.0, 2.0); 5])
    };
    let r = minimize(rosenbrock, &rcfg).unwrap();
    let a = minimize(rosenbrock, &rcfg).unwrap();
    let same = a == r && minimize(sphere, &sphere_cfg(1)).unwrap() == s;
    check(
        s.best_f <= 1e-8 && s.evaluations <= 5000 && s.stop_reason == StopReason::TargetReached
            && r.best_f <= 1e-4 && r.evaluations <= 30_000 && same,
        format!(
            "sphere {:.1e} in {} evals, Rosenbrock {:.1e} in {} evals, repeat runs identical: {same}",
            s.best_f, s.evaluations, r.best_f, r.evaluations
        ),
    )
}

fn shape_round_trip() -> Outcome {
    let models = &behavior().models;
    let laws = MetaLaws::new(models).unwrap();
    let structure = StructuralCandidate::new(vec![4, 6, 5]);
    let space = DesignSpace::new(structure.clone(), laws.family(), laws.actuation_range());
    let fractions = [0.3, 0.7, 0.6, 0.4, 0.8, 0.2, 0.15, 0.3, 0.6];
    let x: Vec<f64> = space.bounds().iter().zip(fractions).map(|((lo, hi), f)| lo + f * (hi - lo)).collect();
    let known: ActuatorDesign = space.decode(&x);
    let cfg = ShapeConfig { stop_below_mm: 0.5, max_iterations: 100, restarts: 2, seed: 7, ..ShapeConfig::default() };
    let state = cfg.sim.simulate(&known, laws.laws_for(&known).unwrap(), laws.joint_type, Isometry3::identity()).unwrap();
    let target = TargetShape::from_curve(state.centerline, Isometry3::identity());
    let candidates: Vec<StructuralCandidate> =
        [vec![4, 6, 5], vec![5, 6, 4], vec![5, 5, 5]].into_iter().map(StructuralCandidate::new).collect();
    let out = optimize_design(&target, &candidates, &laws, &cfg).unwrap();
    let b = &out.best;
    check(
        b.rmse <= 0.5 && b.e_max <= 1.0,
        format!("best {} rmse {:.3} mm, e_max {:.3} mm", b.design.structure().label(), b.rmse, b.e_max),
    )
}

fn shape_threshold_run() -> Outcome {
    let models = &behavior().models;
    let laws = MetaLaws::new(models).unwrap();
    let target = TargetSpec::Helix { radius: 18.0, height: 60.0, turns: 1.0, handedness: Default::default(), samples: 721 }
        .build()
        .unwrap();
    let range = laws.family().bounds_of(DesignParam::Length).unwrap();
    let candidates = enumerate_structures(target.arc_length(), 4, range, &StructureConfig::default()).unwrap();
    let cfg = ShapeConfig::default();
    let out = optimize_design(&target, &candidates, &laws, &cfg).unwrap();
    let b = &out.best;
    let refit =
        refit_and_verify(b, &target, &SyntheticFamily::helical(), &laws, &RefitModel::default(), &cfg).unwrap();
    check(
        b.rmse < 5.0 && b.e_max < 5.0 && refit.rmse_drift.abs() <= 0.5,
        format!(
            "{} candidates, best {} rmse {:.3} mm, e_max {:.3} mm; refit rmse {:.3} mm (drift {:+.3})",
            candidates.len(),
            b.design.structure().label(),
            b.rmse,
            b.e_max,
            refit.refit.rmse,
            refit.rmse_drift
        ),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_prbm-surrogate")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn end_to_end_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let p = |name: &str| root.join(name).to_str().unwrap().to_string();
    fs::write(
        root.join("small.toml"),
        r#"seed = 3
[generate]
preset = "helical"
step_factor = 4.0
noise_std = 0.002
family = { type = "grid", varying = [{ param = "R", levels = [5.5, 6.5] }, { param = "l", levels = [4.5, 5.5] }], fixed = [{ param = "r", value = 3.0 }, { param = "t", value = 1.5 }] }
[fit_nn]
hidden = [16, 16]
[fit_nn.train]
max_iterations = 60
[fit_meta.meta]
hidden = [32, 32]
seed = 0
guard = true
[fit_meta.meta.train]
max_iterations = 200
batch_size = 64
[shapematch]
segments = 2
candidates = [[3, 4]]
[shapematch.search]
max_iterations = 3
[shapematch.refit]
"#,
    )
    .map_err(|e| e.to_string())?;
    let cfg = p("small.toml");
    let steps: Vec<(&str, Vec<String>)> = vec![
        ("gen", vec!["generate".into(), "--seed".into(), "9".into()]),
        ("hgen", vec!["generate".into(), "--config".into(), cfg.clone()]),
        ("ingest", vec!["ingest".into(), "-i".into(), p("gen")]),
        ("poly", vec!["fit-poly".into(), "-i".into(), p("gen")]),
        ("nn", vec!["fit-nn".into(), "--config".into(), cfg.clone(), "-i".into(), p("gen")]),
        ("meta", vec!["fit-meta".into(), "--config".into(), cfg.clone(), "-i".into(), p("hgen")]),
        ("sim", vec!["simulate".into()]),
        ("msim", vec!["simulate".into(), "-i".into(), p("meta/behavior.json")]),
        ("sm", vec!["shapematch".into(), "--config".into(), cfg.clone(), "-i".into(), p("meta/behavior.json")]),
        ("rep", vec!["report".into(), "-i".into(), p("poly"), "-i".into(), p("sim"), "-i".into(), p("sm")]),
    ];
    let mut commands = Vec::new();
    for (dir, mut args) in steps {
        args.extend(["--out".into(), p(dir)]);
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        cli(&a)?;
        commands.push((dir, args[0].clone()));
    }
    let mut files = 0;
    let mut lines = Vec::new();
    for (dir, name) in &commands {
        let manifest = Path::new(&p(dir)).join(MANIFEST_FILE);
        let m = RunManifest::read(&manifest).map_err(|e| e.to_string())?;
        let again = root.join(format!("{dir}_replay"));
        cli(&["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()])?;
        let r = RunManifest::read(&again.join(MANIFEST_FILE)).map_err(|e| e.to_string())?;
        if m.outputs.is_empty() || r.outputs != m.outputs {
            return Err(format!("{name} ({dir}) replay differs"));
        }
        for o in &m.outputs {
            let a = fs::read(Path::new(&p(dir)).join(&o.path)).map_err(|e| e.to_string())?;
            let b = fs::read(again.join(&o.path)).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{name}: {} differs byte-wise", o.path));
            }
        }
        files += m.outputs.len();
        lines.push(name.clone());
    }
    lines.dedup();
    Ok(format!("{} runs ({}) replayed, {files} output files bit-identical", commands.len(), lines.join(", ")))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "polynomial round trip", budget: Duration::from_secs(1), run: polynomial_round_trip },
        Criterion { id: 2, name: "derivative consistency", budget: Duration::from_secs(1), run: derivative_consistency },
        Criterion { id: 3, name: "MLP surrogate quality", budget: Duration::from_secs(60), run: mlp_quality },
        Criterion { id: 4, name: "MLP gradient check", budget: Duration::from_secs(5), run: mlp_gradient },
        Criterion { id: 5, name: "coefficient meta-model", budget: Duration::from_secs(120), run: coefficient_metamodel },
        Criterion { id: 6, name: "behavior meta-model", budget: Duration::from_secs(120), run: behavior_metamodel },
        Criterion { id: 7, name: "equilibrium correctness", budget: Duration::from_secs(10), run: equilibrium_correctness },
        Criterion { id: 8, name: "load-sweep monotonicity", budget: Duration::from_secs(10), run: load_sweep },
        Criterion { id: 9, name: "CMA-ES benchmarks", budget: Duration::from_secs(30), run: cma_benchmarks },
        Criterion { id: 10, name: "shape-match round trip", budget: Duration::from_secs(300), run: shape_round_trip },
        Criterion { id: 11, name: "shape-match threshold run", budget: Duration::from_secs(900), run: shape_threshold_run },
        Criterion { id: 12, name: "end-to-end determinism", budget: Duration::from_secs(120), run: end_to_end_determinism },
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let cold = BEHAVIOR.get().is_none();
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let mut elapsed = t.elapsed();
        // the shared behavior training is charged to its own criterion
        if c.id != 6 && cold {
            if let Some(b) = BEHAVIOR.get() {
                elapsed = elapsed.saturating_sub(Duration::from_secs_f64(b.seconds));
            }
        }
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} budget", c.budget)),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {} ({:.2} s): {detail}",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.name,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
