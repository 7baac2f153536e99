use stablefrac::densities::{abs_moment_1d, density_1d};
use stablefrac::geometry::*;
use stablefrac::quad::{gamma, lq_ball_volume};
use stablefrac::{Error, Grid, GridField, StableModel};
use std::f64::consts::PI;
use std::time::Instant;

fn grid512() -> Grid {
    Grid::new(2, 8.0, 512).unwrap()
}

#[test]
fn volumes_in_closed_form() {
    assert!((volume(&Shape::rect(&[1.0, 1.0])).unwrap() - 4.0).abs() < 1e-15);
    let v = volume(&Shape::lq_ball(2, 1.5, 1.0)).unwrap();
    let exact = (2.0 * gamma(1.0 + 1.0 / 1.5)).powi(2) / gamma(1.0 + 2.0 / 1.5);
    assert!((v - exact).abs() < 1e-12);
    assert!((v - 2.7379).abs() < 1e-4);
    let g = Grid::new(2, 8.0, 256).unwrap();
    let raster = rasterize(&Shape::rect(&[1.0, 1.0]), &g).unwrap();
    assert!((raster.integral() - 4.0).abs() < 1e-12);
    assert!(raster.values().iter().all(|v| *v == 0.0 || *v == 1.0));
}

#[test]
fn lq_ball_area_matches_monte_carlo() {
    let shape = Shape::lq_ball(2, 1.5, 1.0);
    let (est, se) = volume_monte_carlo(&shape, 10_000_000, 7).unwrap();
    let exact = lq_ball_volume(2, 1.5);
    assert!((est - exact).abs() < 3.0 * se, "{est} ± {se} vs {exact}");
}

#[test]
fn sigma_dual_ball_of_the_discrete_model_is_an_lq_ball() {
    let al = 1.5;
    let model = StableModel::product(al, &[0.5, 0.5]).unwrap();
    let dual = Shape::sigma_dual_ball(&model, 1.0);
    let q = al / (al - 1.0);
    let ball = Shape::lq_ball(2, q, 1.0);
    assert!((volume(&dual).unwrap() - volume(&ball).unwrap()).abs() < 1e-12);
    let g = Grid::new(2, 4.0, 128).unwrap();
    let a = rasterize(&dual, &g).unwrap();
    let b = rasterize(&ball, &g).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn rasterization_margin_is_enforced() {
    let g = Grid::new(2, 2.0, 64).unwrap();
    assert!(matches!(rasterize(&Shape::rect(&[1.6, 0.5]), &g), Err(Error::ShapeTooLarge)));
    assert!(rasterize(&Shape::rect(&[1.5, 0.5]), &g).is_ok());
}

#[test]
fn anisotropic_surface_perimeters() {
    for al in [1.2, 1.5, 1.9] {
        let dis = StableModel::product(al, &[0.5, 0.5]).unwrap();
        let p = surface_perimeter_aniso(&dis, &Shape::rect(&[1.0, 1.0])).unwrap();
        assert!((p - 8.0).abs() < 1e-12);
        let rot = StableModel::rotational(al, 2).unwrap();
        let disc = Shape::lq_ball(2, 2.0, 1.0);
        let p = surface_perimeter_aniso(&rot, &disc).unwrap();
        let exact = 2.0 * PI * 2f64.powf(-1.0 / al);
        assert!((p - exact).abs() < 1e-9 * exact, "{p} vs {exact}");
        let p2 = surface_perimeter_aniso(&rot, &disc.dilate(1.7).unwrap()).unwrap();
        assert!((p2 - 1.7 * p).abs() < 1e-9 * p);
    }
    // weights (2w_i)^{1/α} on the faces
    let m = StableModel::product(1.5, &[0.25, 1.0]).unwrap();
    let p = surface_perimeter_aniso(&m, &Shape::rect(&[1.0, 2.0])).unwrap();
    let exact = 2.0 * (0.5f64.powf(1.0 / 1.5) * 4.0 + 2f64.powf(1.0 / 1.5) * 2.0);
    assert!((p - exact).abs() < 1e-12);
    // the boundary quadrature agrees with the cone-volume identity
    let dual = Shape::sigma_dual_ball(&StableModel::product(1.5, &[0.5, 0.5]).unwrap(), 1.0);
    let via_volume = surface_perimeter_aniso(&StableModel::product(1.5, &[0.5, 0.5]).unwrap(), &dual).unwrap();
    let via_quadrature = surface_perimeter_aniso(
        &StableModel::product(1.5, &[0.5, 0.5]).unwrap(),
        &Shape::lq_ball(2, 3.0, 1.0),
    )
    .unwrap();
    assert!((via_volume - via_quadrature).abs() < 1e-6 * via_volume, "{via_volume} {via_quadrature}");
    // three dimensions: Euclidean sphere
    let rot3 = StableModel::rotational(1.5, 3).unwrap();
    let p = surface_perimeter_aniso(&rot3, &Shape::lq_ball(3, 2.0, 1.0)).unwrap();
    let exact = 4.0 * PI * 2f64.powf(-1.0 / 1.5);
    assert!((p - exact).abs() < 1e-9 * exact);
    assert!(surface_perimeter_aniso(&rot3, &Shape::Mask { grid: Grid::new(3, 1.0, 16).unwrap(), inside: vec![true; 4096] }).is_err());
}

#[test]
fn heat_content_small_time_and_separation() {
    let g = Grid::new(2, 8.0, 256).unwrap();
    let model = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    let flow = HeatFlow::stable(&model, g).unwrap();
    let sq = Shape::rect(&[1.0, 1.0]);
    let t = 1e-3;
    let k = heat_content_complement(&flow, &sq, t).unwrap();
    let bound = t.powf(1.0 / 1.5) / 2.0 * abs_moment_1d(1.5, 1.0) * 8.0 * 1.05;
    assert!(k > 0.0 && k <= bound, "{k} vs {bound}");

    let a = Shape::Hyperrectangle { half_widths: vec![0.5, 0.5], center: vec![-3.0, 0.0] };
    let b = Shape::Hyperrectangle { half_widths: vec![0.5, 0.5], center: vec![3.0, 0.0] };
    assert!(heat_content(&flow, &a, &b, 1e-6).unwrap().abs() < 1e-6);

    // ⟨P_t 1_E, 1_E⟩ ≤ 2^{d/α} ‖p_α‖_∞ t^{-d/α} 𝓛_d(E)²
    let p_sup = density_1d(1.5, 0.0).powi(2);
    for t in [0.5, 1.0, 2.0] {
        let lhs = heat_content(&flow, &sq, &sq, t).unwrap();
        let rhs = 2f64.powf(2.0 / 1.5) * p_sup * t.powf(-2.0 / 1.5) * 16.0;
        assert!(lhs <= rhs, "t={t}: {lhs} > {rhs}");
    }
    assert!(heat_content(&flow, &sq, &sq, -1.0).is_err());
}

#[test]
fn masks_feed_heat_contents_but_not_perimeters() {
    let g = Grid::new(2, 8.0, 128).unwrap();
    let model = StableModel::rotational(1.5, 2).unwrap();
    let flow = HeatFlow::stable(&model, g).unwrap();
    let disc = Shape::lq_ball(2, 2.0, 1.5);
    let mask = Shape::mask(&rasterize(&disc, &g).unwrap());
    let a = heat_content_complement(&flow, &disc, 0.1).unwrap();
    let b = heat_content_complement(&flow, &mask, 0.1).unwrap();
    assert!((a - b).abs() < 1e-12);
    let ts = study_times(1.5, &g);
    assert!(matches!(perimeter_cl(&flow, &mask, &ts), Err(Error::UnsupportedShape(_))));
}

#[test]
fn time_sequences_are_validated() {
    let g = grid512();
    let model = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    let flow = HeatFlow::stable(&model, g).unwrap();
    let sq = Shape::rect(&[1.0, 1.0]);
    assert!(matches!(perimeter_cl(&flow, &sq, &[0.1, 0.05, 0.02]), Err(Error::BadTimeSequence(_))));
    assert!(matches!(perimeter_cl(&flow, &sq, &[0.1, 0.2, 0.05, 0.02]), Err(Error::BadTimeSequence(_))));
    assert!(matches!(
        perimeter_cl(&flow, &sq, &[0.1, 0.05, 0.02, 1e-4]),
        Err(Error::ResolutionGuard { .. })
    ));
}

#[test]
fn rectangle_perimeter_and_heat_slope_discrete_model() {
    let start = Instant::now();
    let g = grid512();
    let model = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    let flow = HeatFlow::stable(&model, g).unwrap();
    let sq = Shape::rect(&[1.0, 1.0]);
    let ts = study_times(1.5, &g);
    let cl = perimeter_cl(&flow, &sq, &ts).unwrap();
    assert!(cl.monotone);
    assert!(cl.limit >= 7.84 && cl.limit <= 8.16, "P_cl = {}", cl.limit);
    let slope = heat_content_slope(&flow, &sq, &ts).unwrap();
    let exact = 2.0 / PI * gamma(1.0 / 3.0) * 4.0;
    assert!((slope.slope / exact - 1.0).abs() < 0.03, "slope {}", slope.slope);
    assert!((slope.reference.unwrap() - exact).abs() < 1e-9);
    let r = slope.slope / cl.limit;
    assert!((r / (gamma(1.0 / 3.0) / PI) - 1.0).abs() < 0.03, "ratio {r}");
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn rotational_disc_and_gaussian_endpoint_slopes() {
    let g = grid512();
    let disc = Shape::lq_ball(2, 2.0, 1.0);
    let model = StableModel::rotational(1.5, 2).unwrap();
    let flow = HeatFlow::stable(&model, g).unwrap();
    let s = heat_content_slope(&flow, &disc, &study_times(1.5, &g)).unwrap();
    let exact = 2f64.powf(1.0 / 3.0) * gamma(1.0 / 3.0);
    assert!((s.slope / exact - 1.0).abs() < 0.03, "slope {}", s.slope);

    let flow = HeatFlow::Gaussian(g);
    let s = heat_content_slope(&flow, &disc, &study_times(2.0, &g)).unwrap();
    let exact = 2.0 * PI.sqrt();
    assert!((s.slope / exact - 1.0).abs() < 0.03, "slope {}", s.slope);
    assert!((s.reference.unwrap() - exact).abs() < 1e-9);
}

#[test]
fn fractional_perimeter_scaling() {
    let g = grid512();
    let al = 1.5;
    let model = StableModel::rotational(al, 2).unwrap();
    let eng = stablefrac::SpectralEngine::new(&model, g).unwrap();
    let ts = study_times(al, &g);
    let disc = Shape::lq_ball(2, 2.0, 1.0);
    let a = perimeter_frac(&eng, &disc, &ts).unwrap();
    let b = perimeter_frac(&eng, &disc.dilate(2.0).unwrap(), &ts).unwrap();
    assert!(a.monotone && b.monotone);
    let ratio = b.limit / a.limit;
    let exact = 2f64.powf(2.0 - al + 1.0);
    assert!((ratio / exact - 1.0).abs() < 0.03, "{ratio} vs {exact}");
}

#[test]
fn disc_has_less_heat_loss_than_the_square_of_equal_area() {
    let model = StableModel::rotational(1.5, 2).unwrap();
    let g = grid512();
    let flow = HeatFlow::stable(&model, g).unwrap();
    // a square whose edges fall on cell boundaries, and the disc of equal area
    let half = 28.0 * g.spacing();
    let sq = Shape::rect(&[half, half]);
    let disc = Shape::lq_ball(2, 2.0, 2.0 * half / PI.sqrt());
    let (va, vb) = (rasterize(&disc, &g).unwrap().integral(), rasterize(&sq, &g).unwrap().integral());
    assert!((va / vb - 1.0).abs() < 5e-3);
    for t in [0.05, 0.2, 1.0, 3.0] {
        let a = heat_content_complement(&flow, &disc, t).unwrap();
        let b = heat_content_complement(&flow, &sq, t).unwrap();
        assert!(a < b, "t={t}: {a} > {b}");
    }
}

#[test]
fn study_csv_has_the_documented_columns() {
    let g = Grid::new(2, 8.0, 128).unwrap();
    let model = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    let flow = HeatFlow::stable(&model, g).unwrap();
    let study = geometry_study(&flow, &Shape::rect(&[1.0, 1.0]), &study_times(1.5, &g)).unwrap();
    let mut buf = Vec::new();
    study.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,K_t,K_t/t^(1/alpha),Pfrac_t,Pcl_t\n"));
    assert_eq!(text.lines().count(), 11);
    let summary = study.summary();
    for key in ["slope", "slope_stderr", "reference", "ratio"] {
        assert!(summary.get(key).is_some());
    }
    let _ = GridField::zeros(g);
}
