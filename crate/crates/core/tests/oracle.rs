use num_complex::Complex64;
use seqpd::fock::{equivalence_suite, tmsts_fock, CaseKind, Oracle, SuiteOptions};
use seqpd::{
    chsh_value, make_tmsts, DetectorModel, MeasurementSetting, OrderParameter, Party, SettingsQuad,
    TmstsSpec,
};

fn envelope_states() -> Vec<TmstsSpec> {
    vec![
        TmstsSpec::tmsv(0.3).unwrap(),
        TmstsSpec::tmsv(0.75).unwrap(),
        TmstsSpec::tmsv(1.2).unwrap(),
        TmstsSpec::new(1.2, 1.2, 0.8).unwrap(),
        TmstsSpec::new(1.5, 1.1, 0.5).unwrap(),
        TmstsSpec::new(1.5, 1.5, 1.2).unwrap(),
    ]
}

fn quad(a: (f64, f64), ap: (f64, f64), b: (f64, f64), bp: (f64, f64)) -> SettingsQuad {
    let m = |(u, x): (f64, f64)| MeasurementSetting::real(u, x).unwrap();
    SettingsQuad { a: m(a), a_prime: m(ap), b: m(b), b_prime: m(bp) }
}

fn full_optimum() -> SettingsQuad {
    quad((0.97, -0.17), (1.65, 0.62), (0.97, 0.17), (1.65, -0.62))
}

#[test]
fn randomized_matrix_over_envelope() {
    let rep = equivalence_suite(&envelope_states(), &SuiteOptions::default()).unwrap();
    assert_eq!(rep.cases.len(), 200);
    assert!(rep.max_abs_error < 1e-6, "max error {:e}", rep.max_abs_error);
    assert!(rep.max_leakage < 1e-8, "leakage {:e}", rep.max_leakage);
    for kind in [CaseKind::Joint, CaseKind::SingleA, CaseKind::SingleB] {
        assert!(rep.cases.iter().any(|c| c.kind == kind));
    }
    for s in [0.0, -0.5, -1.0] {
        assert!(rep.cases.iter().any(|c| c.s == s));
    }
    // Observables O = (1−s)Π + s stay within their ±1 outcomes.
    for c in &rep.cases {
        let o = (1.0 - c.s) * c.oracle + c.s;
        assert!((-1.0 - 1e-8..=1.0 + 1e-8).contains(&o), "{o}");
    }
}

#[test]
fn randomized_matrix_with_detector_loss() {
    let opts = SuiteOptions { cases: 40, seed: 11, eta: 0.7, ..SuiteOptions::default() };
    let rep = equivalence_suite(&envelope_states()[..4], &opts).unwrap();
    assert!(rep.max_abs_error < 1e-6, "max error {:e}", rep.max_abs_error);
}

#[test]
fn chsh_from_fock_expectations() {
    let spec = TmstsSpec::tmsv(0.75).unwrap();
    let oracle = Oracle::new(spec).unwrap();
    let sigma = make_tmsts(spec).unwrap();
    let q = full_optimum();
    let s = OrderParameter::HUSIMI;
    let from_fock = oracle.chsh(&q, s, DetectorModel::PERFECT).unwrap();
    let closed = chsh_value(&sigma, &q, s, DetectorModel::PERFECT).unwrap().value;
    assert!((from_fock - closed).abs() < 1e-6, "{from_fock} vs {closed}");
    assert!(closed > 2.5);
}

#[test]
fn lossy_chsh_from_fock_expectations() {
    // Binomial photon loss at the detector, evaluated in Fock space, against
    // the order-parameter substitution in the closed form.
    let spec = TmstsSpec::tmsv(0.4).unwrap();
    let oracle = Oracle::new(spec).unwrap();
    let sigma = make_tmsts(spec).unwrap();
    let q = quad((1.05, -0.13), (1.65, 0.62), (1.05, 0.13), (1.65, -0.62));
    for (s, eta) in [(-1.0, 0.67), (-0.5, 0.8), (0.0, 0.9)] {
        let s = OrderParameter::new(s).unwrap();
        let det = DetectorModel::new(eta).unwrap();
        let from_fock = oracle.chsh(&q, s, det).unwrap();
        let closed = chsh_value(&sigma, &q, s, det).unwrap().value;
        assert!((from_fock - closed).abs() < 1e-6, "s={} eta={eta}: {from_fock} vs {closed}", s.value());
    }
}

#[test]
fn low_order_branch_matches_fock() {
    let spec = TmstsSpec::new(1.2, 1.2, 0.6).unwrap();
    let oracle = Oracle::new(spec).unwrap();
    let sigma = make_tmsts(spec).unwrap();
    let q = quad((1.2, 0.1), (0.7, -0.4), (0.9, 0.3), (1.5, 0.2));
    let s = OrderParameter::new(-2.5).unwrap();
    let from_fock = oracle.chsh(&q, s, DetectorModel::PERFECT).unwrap();
    let closed = chsh_value(&sigma, &q, s, DetectorModel::PERFECT).unwrap().value;
    assert!((from_fock - closed).abs() < 1e-6, "{from_fock} vs {closed}");
}

#[test]
fn vacuum_squeezed_projection_example() {
    let oracle = Oracle::new(TmstsSpec::tmsv(0.0).unwrap()).unwrap();
    let a = MeasurementSetting::real(3.0, 0.0).unwrap();
    let b = MeasurementSetting::real(1.0, 0.0).unwrap();
    let v = oracle.pi_joint(&a, &b, OrderParameter::HUSIMI, DetectorModel::PERFECT).unwrap();
    assert!((v.value - 3.0f64.sqrt() / 2.0).abs() < 1e-12);
}

#[test]
fn single_mode_marginal_matches_vacuum_probability() {
    let r: f64 = 0.75;
    let oracle = Oracle::new(TmstsSpec::tmsv(r).unwrap()).unwrap();
    let id = MeasurementSetting::real(1.0, 0.0).unwrap();
    let v = oracle.pi_single(Party::A, &id, OrderParameter::HUSIMI, DetectorModel::PERFECT).unwrap();
    // Thermal marginal: P(0) = 2/(p+1) with p = cosh 2r.
    assert!((v.value - 2.0 / ((2.0 * r).cosh() + 1.0)).abs() < 1e-12);
}

#[test]
fn dense_state_invariants() {
    let st = tmsts_fock(TmstsSpec::new(1.3, 1.1, 0.4).unwrap(), 30).unwrap();
    let rho = st.to_dense().unwrap();
    assert!(rho.hermiticity_error() < 1e-12);
    assert!((rho.trace().re - 1.0).abs() < 1e-8);
    assert!(rho.min_eigenvalue() > -1e-10);
}

#[test]
fn banded_expectation_matches_dense_trace() {
    // Build the two-mode operator explicitly at a small cutoff and compare
    // against the band-structured evaluation.
    use seqpd::fock::{pi_operator, FockOperator};
    let st = tmsts_fock(TmstsSpec::new(1.1, 1.2, 0.3).unwrap(), 24).unwrap();
    let rho = st.to_dense().unwrap();
    let a = MeasurementSetting::new(1.4, Complex64::new(0.2, -0.1)).unwrap();
    let b = MeasurementSetting::new(0.8, Complex64::new(-0.3, 0.25)).unwrap();
    let s = OrderParameter::new(-0.5).unwrap();
    let pa = pi_operator(&a, s, DetectorModel::PERFECT, 24).unwrap();
    let pb = pi_operator(&b, s, DetectorModel::PERFECT, 24).unwrap();
    let dense = rho.expect(&FockOperator::kron(&pa.op, &pb.op));
    let banded = st.expect_product(pa.op.entries(), pb.op.entries());
    assert!((dense - banded).norm() < 1e-13);
    assert!(dense.im.abs() < 1e-13);
}
