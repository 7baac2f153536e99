use stablefrac::verifier::*;
use stablefrac::*;

fn grid2() -> Grid {
    Grid::new(2, 8.0, 128).unwrap()
}

#[test]
fn pseudo_poincare_frac_passes_in_one_dimension() {
    let m = StableModel::product(1.5, &[0.5]).unwrap();
    let g = Grid::new(1, 8.0, 1024).unwrap();
    let r = evaluate_inequality("pseudo_poincare_frac", &m, &g, &CheckInputs::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.margin > 0.0);
}

#[test]
fn composition_rot_symbol_error_is_tiny() {
    let m = StableModel::rotational(1.4, 2).unwrap();
    let inputs = CheckInputs { beta: Some(1.3), ..CheckInputs::default() };
    let r = evaluate_inequality("composition_rot", &m, &grid2(), &inputs).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.lhs < 1e-10, "{}", r.lhs);
}

#[test]
fn isoperimetric_cl_for_the_square() {
    let m = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    let r = evaluate_inequality("isoperimetric_cl", &m, &grid2(), &CheckInputs::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let sq = r.cases.iter().find(|c| c.input == "square cl").unwrap();
    assert!((sq.lhs - 2.0).abs() < 1e-12);
    let c2 = r.details["C2"].as_f64().unwrap();
    assert!((sq.rhs - 8.0 * c2).abs() < 1e-9 * sq.rhs);
}

#[test]
fn lorentz_hardy_for_euclidean_cone() {
    let m = StableModel::rotational(1.5, 2).unwrap();
    let r = evaluate_inequality("lorentz_hardy_identity", &m, &grid2(), &CheckInputs::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let cone = r.cases.iter().find(|c| c.input.starts_with("cone(euclidean)")).unwrap();
    assert!((cone.lhs - cone.rhs).abs() < 1e-3 * cone.rhs);
}

#[test]
fn exploratory_entries_never_fail() {
    let m = StableModel::product(1.5, &[1.0, 1.0]).unwrap();
    let ids = suite("exploratory").unwrap();
    let (reps, _) = run_suite(&ids, &m, &grid2(), &CheckInputs::default()).unwrap();
    assert!(!reps.is_empty());
    for r in reps {
        assert_eq!(r.verdict, Verdict::Exploratory, "{}", r.name);
        assert!(r.details["empirical_constant"].as_f64().unwrap() > 0.0);
        assert!(r.cases.iter().all(|c| c.margin >= -1e-12 * c.rhs.abs()));
    }
}

#[test]
fn reports_are_deterministic_and_seeded() {
    let m = StableModel::product(1.3, &[1.0, 1.0]).unwrap();
    let a = evaluate_inequality("riesz_sigma_bound", &m, &grid2(), &CheckInputs::default()).unwrap();
    let b = evaluate_inequality("riesz_sigma_bound", &m, &grid2(), &CheckInputs::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let other = CheckInputs { seed: 7, ..CheckInputs::default() };
    let c = evaluate_inequality("riesz_sigma_bound", &m, &grid2(), &other).unwrap();
    assert_ne!(a.inputs_digest, c.inputs_digest);
}

#[test]
fn unknown_and_inapplicable_checks() {
    let m = StableModel::product(1.5, &[1.0]).unwrap();
    let g = Grid::new(1, 8.0, 256).unwrap();
    assert!(matches!(
        evaluate_inequality("no_such_check", &m, &g, &CheckInputs::default()),
        Err(Error::UnknownCheck(_))
    ));
    assert!(matches!(
        evaluate_inequality("lorentz_sobolev", &m, &g, &CheckInputs::default()),
        Err(Error::UnsupportedModelForCheck { .. })
    ));
    let (_, skipped) = run_suite(&CORE_SUITE, &m, &g, &CheckInputs::default()).unwrap();
    assert_eq!(skipped.len(), 2);
}

#[test]
fn suites_resolve() {
    assert_eq!(suite("core").unwrap(), CORE_SUITE.to_vec());
    assert_eq!(suite("all").unwrap().len(), 21);
    assert_eq!(suite("nash, 17").unwrap(), vec![5, 17]);
    assert!(suite("core,bogus").is_err());
}

#[test]
fn family_has_ten_members_and_random_fields_are_mean_free() {
    let fam = default_family(&grid2(), 3).unwrap();
    assert_eq!(fam.len(), 10);
    for f in fam.iter().filter(|f| f.label.starts_with("random")) {
        assert!(f.field.mean().abs() < 1e-12, "{} {}", f.label, f.field.mean());
        if !f.label.ends_with("shifted") {
            assert!((f.field.max_abs() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn bbm_example_strictly_decreasing() {
    let g = grid2();
    let m = StableModel::rotational(1.6, 2).unwrap();
    let f = GridField::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
    let s = asymptotic_study(AsymptoticKind::Bbm, &m, &g, &f, &[1.6, 1.7, 1.8, 1.9, 1.95], 2.0).unwrap();
    assert!(s.errors.windows(2).all(|w| w[1] < w[0]), "{:?}", s.errors);
}

#[test]
fn ms_example_decreases() {
    let g = grid2();
    let m = StableModel::product(1.4, &[1.0, 1.0]).unwrap();
    let f = GridField::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
    let s = asymptotic_study(AsymptoticKind::Ms, &m, &g, &f, &[1.4, 1.3, 1.2, 1.1, 1.05], 2.0).unwrap();
    assert!(s.errors.windows(2).all(|w| w[1] < w[0]));
    // the error is first order in α − 1, so five steps to 1.05 give ≈ 1/8
    assert!(s.ratio < 0.15, "{}", s.ratio);
    assert!(asymptotic_study(AsymptoticKind::Ms, &m, &g, &f, &[1.4, 1.3, 1.5, 1.1, 1.05], 2.0).is_err());
}

#[test]
fn pichorides_constant_values() {
    assert!((pichorides(2.0) - 1.0).abs() < 1e-15);
    assert!((pichorides(4.0) - pichorides(4.0 / 3.0)).abs() < 1e-12);
}
