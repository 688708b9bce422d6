use std::f64::consts::FRAC_PI_2;

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};

use super::*;
use crate::domain::{ActuationKind, ModuleDesign};
use crate::polyfit::{FiveCoefficients, PolySurrogate};

fn linear_law(m_a: f64, b_a: f64, m_e: f64, b_e: f64, k_n: f64) -> PolySurrogate {
    PolySurrogate::from_coefficients(FiveCoefficients { m_a, b_a, m_e, b_e, k_n }, ActuationKind::Pressure)
}

fn spring(k: f64) -> AxisLaw {
    AxisLaw::unbounded_poly(linear_law(0.0, k, 0.0, 0.0, 0.0))
}

fn design(l: f64) -> ModuleDesign {
    ModuleDesign::new(3.0, 6.0, l, 1.5).unwrap()
}

fn revolute_chain(n: usize, l: f64, law: AxisLaw) -> ChainSpec {
    let seg = SegmentSpec { n, design: design(l), phi: 0.0, law: JointLaw::revolute(law) };
    ChainSpec::new(vec![seg], JointType::Revolute, DEFAULT_DENSITY).unwrap()
}

fn tight() -> SolverConfig {
    SolverConfig { tol: 1e-12, ..SolverConfig::default() }
}

fn load(p: f64) -> LoadCase {
    LoadCase::actuated(p)
}

#[test]
fn horizontal_pendulum_matches_scalar_root() {
    let mut chain = revolute_chain(1, 100.0, spring(1.0));
    chain.joint_position = 0.0;
    chain.link_masses = vec![0.1];
    chain.base_pose = Isometry3::from_parts(
        Translation3::identity(),
        UnitQuaternion::from_scaled_axis(Vector3::y() * FRAC_PI_2),
    );
    let s = solve_equilibrium(&chain, &load(0.0), &tight()).unwrap();

    // q = (m g L/2) cos q with k = 1 N·m/rad
    let g = |q: f64| q - 0.1 * 9.81 * 0.05 * q.cos();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 { hi = mid } else { lo = mid }
    }
    assert!((s.q[0] - lo).abs() < 1e-6, "{} vs {}", s.q[0], lo);
    assert!((s.q[0] - 0.0489911).abs() < 1e-6);
    assert!(s.converged && !s.is_saturated());
}

#[test]
fn unloaded_chain_rests_at_free_deformation() {
    // τ = -u + 0.1 p
    let law = AxisLaw::unbounded_poly(linear_law(0.0, 1.0, 0.0, 0.0, 0.1));
    let chain = revolute_chain(3, 20.0, law);
    let s = solve_equilibrium(&chain, &load(3.0).without_gravity(), &SolverConfig::default()).unwrap();
    for q in &s.q {
        assert!((q - 0.3).abs() < 1e-9);
    }
    assert!(s.residual_norm <= 1e-8);
}

#[test]
fn pure_tip_moment_bends_identical_joints_equally() {
    let chain = revolute_chain(2, 20.0, spring(1.0));
    let mut lc = load(0.0).without_gravity();
    lc.tip_moment = Some([0.0, 0.2, 0.0]);
    let s = solve_equilibrium(&chain, &lc, &tight()).unwrap();
    assert!((s.q[0] - s.q[1]).abs() < 1e-10);
    assert!((s.q[0] - 0.2).abs() < 1e-10);
}

#[test]
fn straight_chain_has_collinear_centerline() {
    let chain = revolute_chain(4, 12.5, spring(1.0));
    let c = centerline(&chain, &[0.0; 4]);
    assert_eq!(c.len(), 5);
    for (i, p) in c.points().iter().enumerate() {
        assert!((p - Point3::new(0.0, 0.0, 12.5 * i as f64)).norm() < 1e-12);
    }
}

#[test]
fn right_angle_bend_places_tip_by_hand() {
    let l = 10.0;
    let chain = revolute_chain(1, 2.0 * l, spring(1.0));
    let k = Kinematics::compute(&chain, &[FRAC_PI_2]);
    assert!((k.tip - Point3::new(l, 0.0, l)).norm() < 1e-12);
    assert!((k.joints[0] - Point3::new(0.0, 0.0, l)).norm() < 1e-12);
}

#[test]
fn spherical_axes_follow_intrinsic_order() {
    let law = JointLaw::spherical(spring(1.0), spring(1.0), spring(1.0));
    let seg = SegmentSpec { n: 1, design: design(10.0), phi: 0.0, law };
    let chain = ChainSpec::new(vec![seg], JointType::Spherical, DEFAULT_DENSITY).unwrap();
    let k = Kinematics::compute(&chain, &[FRAC_PI_2, 0.3, 0.0]);
    // after a quarter turn about y, the local x axis points along -z
    assert!((k.axes[0] - Vector3::y()).norm() < 1e-12);
    assert!((k.axes[1] - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    // a pure twist leaves the tip on the axis
    let k = Kinematics::compute(&chain, &[0.0, 0.0, 1.0]);
    assert!((k.tip - Point3::new(0.0, 0.0, 10.0)).norm() < 1e-12);
}

#[test]
fn segment_rotation_turns_bending_plane() {
    let a = SegmentSpec { n: 1, design: design(10.0), phi: 0.0, law: JointLaw::revolute(spring(1.0)) };
    let b = SegmentSpec { n: 1, design: design(10.0), phi: FRAC_PI_2, law: JointLaw::revolute(spring(1.0)) };
    let chain = ChainSpec::new(vec![a, b], JointType::Revolute, DEFAULT_DENSITY).unwrap();
    let k = Kinematics::compute(&chain, &[0.0, FRAC_PI_2]);
    // the second joint bends about the rotated y axis, i.e. about -x
    assert!((k.axes[1] - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
    assert!((k.tip - Point3::new(0.0, 5.0, 15.0)).norm() < 1e-12);
}

fn twisted_spherical_chain() -> ChainSpec {
    let law = |k: f64| JointLaw::spherical(spring(k), spring(2.0 * k), spring(3.0 * k));
    let a = SegmentSpec { n: 2, design: design(15.0), phi: 0.0, law: law(0.05) };
    let b = SegmentSpec { n: 2, design: design(10.0), phi: 0.7, law: law(0.03) };
    ChainSpec::new(vec![a, b], JointType::Spherical, DEFAULT_DENSITY).unwrap()
}

#[test]
fn equilibrium_is_frame_independent() {
    let chain = twisted_spherical_chain();
    let mut lc = load(0.0);
    let f = Vector3::new(0.2, -0.1, 0.05);
    lc.tip_force = TipForce::Constant { force: f.into() };
    let base = solve_equilibrium(&chain, &lc, &tight()).unwrap();

    let iso = Isometry3::from_parts(
        Translation3::new(4.0, -7.0, 2.5),
        UnitQuaternion::from_scaled_axis(Vector3::new(0.3, -1.1, 0.6)),
    );
    let mut moved = chain.clone();
    moved.base_pose = iso * chain.base_pose;
    moved.gravity = iso.rotation * chain.gravity;
    let mut lc2 = lc.clone();
    lc2.tip_force = TipForce::Constant { force: (iso.rotation * f).into() };
    let other = solve_equilibrium(&moved, &lc2, &tight()).unwrap();

    for (a, b) in base.q.iter().zip(&other.q) {
        assert!((a - b).abs() < 1e-9);
    }
    for (a, b) in base.centerline.points().iter().zip(other.centerline.points()) {
        assert!((iso * a - b).norm() < 1e-9);
    }
}

fn total_energy(chain: &ChainSpec, laws: &[PolySurrogate], p: f64, f: Vector3<f64>, q: &[f64]) -> f64 {
    let k = Kinematics::compute(chain, q);
    let elastic: f64 = q.iter().zip(laws).map(|(u, s)| s.potential(p, *u)).sum();
    let gravity: f64 = k
        .link_midpoints
        .iter()
        .zip(&chain.link_masses)
        .map(|(x, m)| -m * chain.gravity.dot(&x.coords) * 1e-3)
        .sum();
    elastic + gravity - f.dot(&k.tip.coords) * 1e-3
}

#[test]
fn newton_agrees_with_brute_force_energy_minimum() {
    let laws = [
        linear_law(0.002, 0.05, 0.02, 0.0, 0.004),
        linear_law(0.001, 0.04, 0.01, 0.0, 0.003),
        linear_law(0.003, 0.06, 0.03, 0.0, 0.002),
    ];
    let segs: Vec<SegmentSpec> = laws
        .iter()
        .map(|s| SegmentSpec {
            n: 1,
            design: design(20.0),
            phi: 0.0,
            law: JointLaw::revolute(AxisLaw::unbounded_poly(s.clone())),
        })
        .collect();
    let chain = ChainSpec::new(segs, JointType::Revolute, DEFAULT_DENSITY).unwrap();
    let f = Vector3::new(0.3, 0.0, -0.2);
    let p = 5.0;
    let mut lc = load(p);
    lc.tip_force = TipForce::Constant { force: f.into() };
    let s = solve_equilibrium(&chain, &lc, &SolverConfig::default()).unwrap();

    // compass search on the total potential
    let mut q = vec![0.0; 3];
    let mut best = total_energy(&chain, &laws, p, f, &q);
    let mut h = 0.05;
    while h > 1e-8 {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..3 {
                for d in [h, -h] {
                    let mut c = q.clone();
                    c[i] += d;
                    let e = total_energy(&chain, &laws, p, f, &c);
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
    for (a, b) in s.q.iter().zip(&q) {
        assert!((a - b).abs() < 1e-4, "{:?} vs {:?}", s.q, q);
    }
    assert!(s.q.iter().any(|v| v.abs() > 0.05));
}

#[test]
fn reported_residual_matches_recomputation() {
    let chain = twisted_spherical_chain();
    let mut lc = load(0.0);
    lc.tip_force = TipForce::Toward { point: [40.0, 20.0, 0.0], magnitude: 0.3 };
    let s = solve_equilibrium(&chain, &lc, &SolverConfig::default()).unwrap();
    let r = residual(&chain, &lc, &s.q);
    let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(n <= 1.5 * 1e-8);
    assert!((n - s.residual_norm).abs() < 1e-12);
}

#[test]
fn warm_start_reaches_same_equilibrium() {
    let chain = twisted_spherical_chain();
    let mut lc = load(0.0);
    lc.tip_force = TipForce::Constant { force: [0.2, 0.15, -0.2] };
    let cold = solve_equilibrium(&chain, &lc, &SolverConfig::default()).unwrap();
    let warm_cfg = SolverConfig { initial_q: Some(vec![0.1; chain.dof()]), ..SolverConfig::default() };
    let warm = solve_equilibrium(&chain, &lc, &warm_cfg).unwrap();
    for (a, b) in cold.q.iter().zip(&warm.q) {
        assert!((a - b).abs() < 1e-6);
    }
    assert!(cold.q.iter().any(|v| v.abs() > 0.05));
}

#[test]
fn heavier_tip_droops_further() {
    let mut chain = revolute_chain(4, 15.0, spring(0.05));
    chain.base_pose = Isometry3::from_parts(
        Translation3::identity(),
        UnitQuaternion::from_scaled_axis(Vector3::y() * FRAC_PI_2),
    );
    let loads: Vec<LoadCase> = [0.0, 10.0, 20.0, 50.0].iter().map(|g| load(0.0).with_tip_mass(*g)).collect();
    let states = sweep_loadcases(&chain, &loads, &SolverConfig::default());
    let tips: Vec<f64> = states.iter().map(|s| s.as_ref().unwrap().centerline.last().z).collect();
    for w in tips.windows(2) {
        assert!(w[1] < w[0], "{tips:?}");
    }
}

#[test]
fn out_of_range_equilibrium_is_flagged_not_failed() {
    let law = JointLaw::poly(linear_law(0.0, 0.05, 0.0, 0.0, 0.0), (0.0, 10.0), (-0.2, 0.2)).unwrap();
    let mut chain = revolute_chain(2, 20.0, law);
    chain.base_pose = Isometry3::from_parts(
        Translation3::identity(),
        UnitQuaternion::from_scaled_axis(Vector3::y() * FRAC_PI_2),
    );
    let s = solve_equilibrium(&chain, &load(0.0).with_tip_mass(100.0), &SolverConfig::default()).unwrap();
    assert!(s.converged);
    assert!(s.is_saturated());
    assert!(s.clamp_events.iter().all(|e| e.kind == ClampKind::Deformation && e.bound == 0.2));

    let s = solve_equilibrium(&chain, &load(25.0).without_gravity(), &SolverConfig::default()).unwrap();
    assert!(s.clamp_events.iter().any(|e| e.kind == ClampKind::Actuation && e.bound == 10.0));
}

#[test]
fn iteration_budget_exhaustion_returns_best_state() {
    let chain = twisted_spherical_chain();
    let cfg = SolverConfig { max_iterations: 1, ..SolverConfig::default() };
    let mut lc = load(0.0);
    lc.tip_force = TipForce::Constant { force: [0.5, 0.2, 0.0] };
    match solve_equilibrium(&chain, &lc, &cfg) {
        Err(PrbmError::NonConvergence { iterations, best, .. }) => {
            assert_eq!(iterations, 1);
            assert!(!best.converged);
            assert_eq!(best.q.len(), chain.dof());
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn malformed_chains_are_rejected() {
    let mut chain = twisted_spherical_chain();
    chain.segments[0].phi = 0.1;
    assert!(matches!(chain.validate(), Err(PrbmError::InvalidChain(_))));

    let mut chain = twisted_spherical_chain();
    chain.link_masses.pop();
    assert!(chain.validate().is_err());

    let seg = SegmentSpec { n: 1, design: design(10.0), phi: 0.0, law: JointLaw::revolute(spring(1.0)) };
    assert!(ChainSpec::new(vec![seg], JointType::Spherical, DEFAULT_DENSITY).is_err());

    let chain = revolute_chain(2, 10.0, spring(1.0));
    let lc = LoadCase { actuation: Actuation::PerSegment(vec![1.0, 2.0]), ..load(0.0) };
    assert!(matches!(solve_equilibrium(&chain, &lc, &SolverConfig::default()), Err(PrbmError::InvalidLoad(_))));
}

#[test]
fn link_masses_split_modules_at_the_joint() {
    let chain = revolute_chain(3, 10.0, spring(1.0));
    let m = DEFAULT_DENSITY * design(10.0).wall_volume();
    assert!((chain.link_masses[0] - m).abs() < 1e-15);
    assert!((chain.link_masses[2] - 0.5 * m).abs() < 1e-15);
    let total: f64 = chain.link_masses.iter().sum();
    // the part of the first module below its joint belongs to the base
    assert!((total - 2.5 * m).abs() < 1e-15);
}

#[test]
fn load_jacobian_matches_differences() {
    let mut chain = twisted_spherical_chain();
    chain.base_pose = Isometry3::from_parts(
        Translation3::new(1.0, -2.0, 3.0),
        UnitQuaternion::from_scaled_axis(Vector3::new(0.3, -1.1, 0.4)),
    );
    let mut lc = LoadCase::actuated(0.0);
    lc.tip_force = TipForce::Constant { force: [0.05, -0.2, 0.1] };
    lc.tip_moment = Some([0.002, 0.001, -0.003]);
    let q: Vec<f64> = (0..chain.dof()).map(|i| 0.3 * ((i * 7 % 11) as f64 / 5.0 - 1.0)).collect();
    let jac = solve::load_jacobian(&chain, &lc, &Kinematics::compute(&chain, &q));
    assert!(jac.amax() > 1e-3);
    let h = 1e-6;
    let mut probe = q.clone();
    for c in 0..q.len() {
        probe[c] = q[c] + h;
        let up = load_efforts(&chain, &lc, &probe);
        probe[c] = q[c] - h;
        let down = load_efforts(&chain, &lc, &probe);
        probe[c] = q[c];
        for r in 0..q.len() {
            let fd = (up[r] - down[r]) / (2.0 * h);
            assert!((jac[(r, c)] - fd).abs() < 1e-7, "({r}, {c}): {} vs {fd}", jac[(r, c)]);
        }
    }
}
