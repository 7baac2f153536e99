use stablefrac::quad::{gamma, lq_ball_volume};
use stablefrac::stable_model::{ModelSpec, SpectralMeasure, StableModel};
use stablefrac::Error;
use std::f64::consts::PI;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn product_sigma_alpha_is_l_alpha_norm() {
    let m = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    assert!(rel(m.sigma_alpha(&[1.0, 1.0]), 2f64.powf(2.0 / 3.0)) < 1e-12);
    assert_eq!(m.sigma_alpha(&[0.0, 0.0]), 0.0);
}

#[test]
fn product_sigma_alpha_matches_sphere_quadrature_of_lambda1() {
    // the same measure written as a spherical density concentrated near the axes
    let m = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    let xi: [f64; 2] = [0.3, -1.7];
    let direct: f64 = [0usize, 1].iter().map(|&k| 2.0 * 0.5 * xi[k].abs().powf(1.5)).sum();
    assert!(rel(m.sigma_alpha_pow(&xi), direct) < 1e-12);
}

#[test]
fn rotational_sigma_alpha() {
    let m = StableModel::rotational(1.5, 2).unwrap();
    assert!(rel(m.sigma_alpha(&[1.0, 0.0]), 2f64.powf(-2.0 / 3.0)) < 1e-12);
    let m3 = StableModel::rotational(1.3, 3).unwrap();
    assert!(rel(m3.sigma_alpha(&[0.0, 0.0, 2.0]), 2.0 / 2f64.powf(1.0 / 1.3)) < 1e-10);
}

#[test]
fn degenerate_and_bad_alpha_rejected() {
    let line = SpectralMeasure::discrete(&[(vec![1.0, 0.0], 0.5)]);
    assert!(matches!(
        StableModel::new(1.5, 2, line),
        Err(Error::DegenerateMeasure(_))
    ));
    assert!(matches!(StableModel::product(2.0, &[0.5, 0.5]), Err(Error::BadAlpha(_))));
    assert!(matches!(StableModel::product(1.0, &[0.5, 0.5]), Err(Error::BadAlpha(_))));
}

#[test]
fn dual_norms() {
    let m = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    assert!(rel(m.sigma_alpha_dual(&[1.0, 0.0]), 1.0) < 1e-12);
    let r = StableModel::rotational(1.5, 2).unwrap();
    assert!(rel(r.sigma_alpha_dual(&[1.0, 0.0]), 2f64.powf(2.0 / 3.0)) < 1e-12);
    assert_eq!(r.sigma_alpha_dual(&[0.0, 0.0]), 0.0);
}

#[test]
fn dual_norm_sampled_path_agrees_with_closed_form() {
    // three atoms break the product fast path; compare against brute force
    let sig = SpectralMeasure::discrete(&[
        (vec![1.0, 0.0], 0.4),
        (vec![0.0, 1.0], 0.3),
        (vec![1.0, 1.0], 0.2),
    ]);
    let m = StableModel::new(1.6, 2, sig).unwrap();
    for x in [[1.0, 0.2], [-0.3, 0.9], [0.7, -0.7]] {
        let mut best: f64 = 0.0;
        for k in 0..400_000 {
            let t = 2.0 * PI * k as f64 / 400_000.0;
            let z = [t.cos(), t.sin()];
            best = best.max((z[0] * x[0] + z[1] * x[1]).abs() / m.sigma_alpha(&z));
        }
        assert!(rel(m.sigma_alpha_dual(&x), best) < 1e-6, "{x:?}");
    }
}

#[test]
fn tau_and_generator_identity() {
    for m in [
        StableModel::product(1.5, &[0.5, 0.5]).unwrap(),
        StableModel::rotational(1.5, 2).unwrap(),
        StableModel::new(
            1.3,
            2,
            SpectralMeasure::discrete(&[(vec![1.0, 0.3], 0.7), (vec![-0.2, 1.0], 0.4)]),
        )
        .unwrap(),
    ] {
        for xi in [[0.4, -1.2], [2.0, 0.5], [-0.1, 0.03]] {
            let t = m.tau_alpha_im(&xi);
            let lhs = (xi[0] * t[0] + xi[1] * t[1]) / m.alpha();
            assert!(rel(lhs, m.sigma_alpha_pow(&xi)) < 1e-8);
            let tm = m.tau_alpha_im(&[-xi[0], -xi[1]]);
            assert_eq!(tm, vec![-t[0], -t[1]]);
            assert_eq!(m.psi_alpha(&xi), m.psi_alpha(&[-xi[0], -xi[1]]));
        }
        assert_eq!(m.tau_alpha_im(&[0.0, 0.0]), vec![0.0, 0.0]);
    }
}

#[test]
fn tau_product_closed_form() {
    let m = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    let xi: [f64; 2] = [0.7, -2.0];
    let t = m.tau_alpha_im(&xi);
    for k in 0..2 {
        let want = 1.5 * xi[k].signum() * xi[k].abs().powf(0.5);
        assert!(rel(t[k], want) < 1e-12);
    }
}

#[test]
fn tau_rotational_closed_form() {
    let m = StableModel::rotational(1.5, 2).unwrap();
    let xi = [0.6, 0.8];
    let t = m.tau_alpha_im(&xi);
    for k in 0..2 {
        assert!(rel(t[k], 0.75 * xi[k]) < 1e-10);
    }
}

#[test]
fn m_sigma_rotational_and_sigma_matrix() {
    let lim = stablefrac::stable_model::rotational_constant_limit(2);
    let m = StableModel::new(1.5, 2, SpectralMeasure::RotationInvariant { mass: lim }).unwrap();
    let xi = [3.0, 4.0];
    let ms = m.m_sigma_im(&xi);
    assert!(rel(ms[0], 0.5 * 0.6) < 1e-8 && rel(ms[1], 0.5 * 0.8) < 1e-8);
    let p = StableModel::new(1.5, 2, SpectralMeasure::axes(&[0.5, 0.5])).unwrap();
    let s = p.sigma_matrix();
    assert!(rel(s.entries[0][0], 1.0) < 1e-14 && s.entries[0][1].abs() < 1e-14);
    let mass = match m.sigma() {
        SpectralMeasure::RotationInvariant { mass } => *mass * 2.0 * PI,
        _ => unreachable!(),
    };
    let sr = m.sigma_matrix();
    assert!(rel(sr.entries[1][1], mass / 2.0) < 1e-10);
}

#[test]
fn geometry_constants_closed_forms() {
    let m = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    let g = m.geometry_constants();
    let want = (2.0 * gamma(5.0 / 3.0)).powi(2) / gamma(7.0 / 3.0);
    assert!(rel(g.vol_k_alpha, want) < 1e-12);
    assert!((g.vol_k_alpha - 2.7379).abs() < 1e-4);
    assert!(rel(g.vol_k_alpha_polar, lq_ball_volume(2, 3.0)) < 1e-12);
    let r = StableModel::rotational(1.5, 2).unwrap().geometry_constants();
    assert!(rel(r.vol_k_alpha, PI * 2f64.powf(4.0 / 3.0)) < 1e-12);
    assert!(rel(r.vol_k_alpha_polar, PI * 2f64.powf(-4.0 / 3.0)) < 1e-12);
}

#[test]
fn geometry_constants_quadrature_path() {
    // a rotated product model has no axis fast path for the sampled polar
    let c = (0.3f64).cos();
    let s = (0.3f64).sin();
    let sig = SpectralMeasure::discrete(&[(vec![c, s], 0.5), (vec![-s, c], 0.5), (vec![1.0, 1.0], 1e-9)]);
    let m = StableModel::from_lambda1(1.5, 2, sig).unwrap();
    let g = m.geometry_constants();
    assert!(rel(g.vol_k_alpha, lq_ball_volume(2, 1.5)) < 1e-5);
    assert!(rel(g.vol_k_alpha_polar, lq_ball_volume(2, 3.0)) < 1e-4);
}

#[test]
fn homogeneity_and_norm_equivalence() {
    let m = StableModel::new(
        1.7,
        3,
        SpectralMeasure::discrete(&[
            (vec![1.0, 0.0, 0.0], 0.3),
            (vec![0.0, 1.0, 1.0], 0.5),
            (vec![1.0, -1.0, 2.0], 0.2),
        ]),
    )
    .unwrap();
    let mass = m.lambda1_mass();
    for xi in [[0.3, 0.4, -1.0], [1.0, 1.0, 1.0], [-2.0, 0.1, 0.0]] {
        let n = (xi.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let s = m.sigma_alpha(&xi);
        let scaled: Vec<f64> = xi.iter().map(|v| 3.7 * v).collect();
        assert!(rel(m.sigma_alpha(&scaled), 3.7 * s) < 1e-12);
        assert!(m.nondeg_margin().powf(1.0 / 1.7) * n <= s * (1.0 + 1e-9));
        assert!(s <= mass.powf(1.0 / 1.7) * n * (1.0 + 1e-9));
    }
}

#[test]
fn json_round_trip_and_schema_errors() {
    let text = r#"{"alpha":1.5,"dim":2,"sigma":{"kind":"discrete","atoms":[{"direction":[1,0],"weight":0.5},{"direction":[0,1],"weight":0.5}]}}"#;
    let m = StableModel::from_json(text).unwrap();
    assert!(rel(m.sigma_alpha(&[1.0, 1.0]), 2f64.powf(2.0 / 3.0)) < 1e-12);
    let back = serde_json::to_string(&m.to_spec()).unwrap();
    let m2 = StableModel::from_json(&back).unwrap();
    assert!(rel(m2.sigma_alpha(&[0.3, 1.0]), m.sigma_alpha(&[0.3, 1.0])) < 1e-12);
    let bad = text.replace("1.5", "2.0");
    match StableModel::from_json(&bad) {
        Err(Error::SchemaViolation { pointer, .. }) => assert_eq!(pointer, "/alpha"),
        other => panic!("{other:?}"),
    }
    let unknown = text.replace("\"dim\"", "\"dimm\"");
    assert!(StableModel::from_json(&unknown).is_err());
    let spec: ModelSpec = serde_json::from_str(text).unwrap();
    assert_eq!(spec.dim, 2);
}

#[test]
fn rotinv_and_density_json() {
    let r = StableModel::from_json(r#"{"alpha":1.5,"dim":2,"sigma":{"kind":"rotinv"}}"#).unwrap();
    assert!(rel(r.sigma_alpha(&[1.0, 0.0]), 2f64.powf(-2.0 / 3.0)) < 1e-12);
    let d = StableModel::from_json(
        r#"{"alpha":1.5,"dim":2,"sigma":{"kind":"density","matrix":[[1,0],[0,2]],"resolution":256}}"#,
    );
    assert!(d.is_ok(), "{d:?}");
}
