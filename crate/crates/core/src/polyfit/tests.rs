use super::*;
use crate::domain::{ModuleDesign, SampleGrid, SampleRecord, Sweep};
use crate::oracle::{generate_samples, GroundTruthLaw, LawForm, Provenance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grasp_grid() -> SampleGrid {
    SampleGrid::new(Sweep::new(0.0, 15.0, 0.5).unwrap(), Sweep::new(0.0, 0.02, 0.0006).unwrap(), "y").unwrap()
}

fn design() -> ModuleDesign {
    ModuleDesign::new(3.0, 5.0, 4.0, 1.5).unwrap()
}

fn reference_set() -> SampleSet {
    let law = GroundTruthLaw::separable_linear(2.0, 1.0, 3.0, 0.0, 5.0);
    generate_samples(&law, &grasp_grid(), &design(), ActuationKind::Pressure).unwrap()
}

fn fit(set: &SampleSet) -> PolySurrogate {
    assemble_surrogate(&extract_stiffness(set, &FitConfig::default()).unwrap())
}

#[test]
fn noiseless_round_trip_recovers_generating_coefficients() {
    let set = reference_set();
    let s = fit(&set);
    let got = s.coefficients().unwrap().to_array();
    let want = [2.0, 1.0, 3.0, 0.0, 5.0];
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= 1e-6, "{got:?}");
    }
    let q = fit_quality(&s, &set).unwrap();
    assert!(q.max_normalized.unwrap() <= 1e-6, "{q:?}");
}

#[test]
fn elastic_intercept_convention_moves_the_offset() {
    let set = reference_set();
    let cfg = FitConfig { intercept: InterceptSplit::Elastic, ..FitConfig::default() };
    let s = assemble_surrogate(&extract_stiffness(&set, &cfg).unwrap());
    let c = s.coefficients().unwrap();
    assert!(c.b_a.abs() < 1e-6 && (c.b_e - 1.0).abs() < 1e-6, "{c:?}");
    // same law either way
    let d = fit(&set);
    for &(p, u) in &[(3.0, 0.1), (12.0, 2.0)] {
        assert!((s.eval(p, u) - d.eval(p, u)).abs() < 1e-6);
    }
}

#[test]
fn closed_form_hand_value() {
    let c = FiveCoefficients { m_a: 1.0, b_a: 0.0, m_e: 0.0, b_e: 0.0, k_n: 2.0 };
    let s = PolySurrogate::from_coefficients(c, ActuationKind::Pressure);
    assert_eq!(s.eval(10.0, 0.5), 15.0);
    assert_eq!(s.eval(0.0, 0.0), 0.0);
    assert_eq!(s.eval(7.0, 0.0), 14.0);
    let zero = PolySurrogate::from_coefficients(FiveCoefficients::from_array([0.0; 5]), ActuationKind::Pressure);
    assert_eq!(zero.eval(3.0, -2.0), 0.0);
}

#[test]
fn analytic_partials_match_central_differences() {
    let s = PolySurrogate::from_polys(
        Poly(vec![0.3, 1.2, -0.05]),
        Poly(vec![0.7, 2.0, 0.4]),
        Poly(vec![0.0, 4.0, 0.1]),
        ActuationKind::TendonForce,
        None,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let p = rng.random_range(0.0..15.0);
        let u = rng.random_range(-2.0..2.0);
        let h = 1e-5;
        let fu = (s.eval(p, u + h) - s.eval(p, u - h)) / (2.0 * h);
        let fp = (s.eval(p + h, u) - s.eval(p - h, u)) / (2.0 * h);
        let du = s.d_du(p, u);
        let dp = s.d_dp(p, u);
        assert!((fu - du).abs() <= 1e-6 * du.abs().max(1.0));
        assert!((fp - dp).abs() <= 1e-6 * dp.abs().max(1.0));
        let fv = -(s.potential(p, u + h) - s.potential(p, u - h)) / (2.0 * h);
        assert!((fv - s.eval(p, u)).abs() <= 1e-6 * s.eval(p, u).abs().max(1.0));
    }
}

#[test]
fn fit_is_invariant_to_record_order() {
    let set = reference_set();
    let mut shuffled = set.clone();
    shuffled.records.shuffle(&mut ChaCha8Rng::seed_from_u64(11));
    let a = extract_stiffness(&set, &FitConfig::default()).unwrap();
    let b = extract_stiffness(&shuffled, &FitConfig::default()).unwrap();
    assert_eq!(a.k_a, b.k_a);
    assert_eq!(a.k_e, b.k_e);
    assert_eq!(a.k_free, b.k_free);
}

#[test]
fn two_points_per_level_is_insufficient() {
    let law = GroundTruthLaw::separable_linear(2.0, 1.0, 3.0, 0.0, 5.0);
    let grid = SampleGrid::new(Sweep::new(0.0, 15.0, 0.5).unwrap(), Sweep::new(0.0, 0.001, 0.001).unwrap(), "y").unwrap();
    let set = generate_samples(&law, &grid, &design(), ActuationKind::Pressure).unwrap();
    assert!(matches!(extract_stiffness(&set, &FitConfig::default()), Err(PolyfitError::InsufficientData(_))));
}

#[test]
fn null_actuator_gives_zero_polynomials() {
    let mut records: Vec<SampleRecord> = (0..5).map(|i| SampleRecord::free(i as f64, 0.0)).collect();
    for i in 0..5 {
        for _ in 0..3 {
            records.push(SampleRecord { p: i as f64, u: 0.0, ext: 0.0, tau: 0.0, condition: crate::domain::Condition::Constrained });
        }
    }
    let set = SampleSet {
        design: design(),
        kind: ActuationKind::Pressure,
        axis_label: "y".into(),
        records,
        provenance: Provenance::Ingested { path: "-".into(), sha256: String::new() },
    };
    let t = extract_stiffness(&set, &FitConfig::default()).unwrap();
    assert!(t.k_a.is_zero() && t.k_e.is_zero() && t.k_free.is_zero());
    assert_eq!(t.report.k_a.r2, Some(1.0));
}

#[test]
fn nonseparable_law_leaves_a_reported_residual() {
    let law = GroundTruthLaw::new(LawForm::Nonseparable, vec![2.0, 1.0, 3.0, 0.4, 5.0]).unwrap();
    let set = generate_samples(&law, &grasp_grid(), &design(), ActuationKind::Pressure).unwrap();
    let s = fit(&set);
    let q = fit_quality(&s, &set).unwrap();
    assert!(q.max_normalized.unwrap() > 0.0);
    assert!(q.rmse.is_finite());
}

#[test]
fn cubic_elastic_term_is_recovered_at_degree_two() {
    let law = GroundTruthLaw::new(LawForm::SeparableCubic, vec![2.0, 1.0, 0.5, 3.0, 0.0, 5.0]).unwrap();
    let set = generate_samples(&law, &grasp_grid(), &design(), ActuationKind::Pressure).unwrap();
    let cfg = FitConfig { ke_degree: 2, ..FitConfig::default() };
    let t = extract_stiffness(&set, &cfg).unwrap();
    assert!((t.k_e.coeff(2) - 0.5).abs() < 1e-4, "{:?}", t.k_e);
    assert!((t.k_a.coeff(1) - 2.0).abs() < 1e-4);
}

#[test]
fn single_record_holdout_equals_pointwise_residual() {
    let set = reference_set();
    let s = fit(&set);
    let mut one = set.clone();
    one.records.truncate(1);
    one.records[0] = set.records[40];
    let r = set.records[40];
    let q = fit_quality(&s, &one).unwrap();
    assert_eq!(q.max_abs_error, (s.eval(r.p, r.u) - r.tau).abs());
    assert_eq!(q.rmse, q.max_abs_error);
}

#[test]
fn kind_mismatch_is_rejected() {
    let set = reference_set();
    let mut s = fit(&set);
    s.kind = ActuationKind::TendonForce;
    assert!(matches!(fit_quality(&s, &set), Err(PolyfitError::KindMismatch { .. })));
}

#[test]
fn json_round_trip_is_exact() {
    let s = fit(&reference_set());
    let back = PolySurrogate::from_json(&s.to_json()).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.eval(4.5, 0.3).to_bits(), s.eval(4.5, 0.3).to_bits());
}

#[test]
fn degree_above_five_is_rejected() {
    let cfg = FitConfig { ka_degree: 6, ..FitConfig::default() };
    assert!(matches!(extract_stiffness(&reference_set(), &cfg), Err(PolyfitError::InvalidConfig(_))));
}
