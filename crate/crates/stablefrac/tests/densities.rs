use stablefrac::densities::{
    abs_moment_1d, density_1d, density_1d_deriv, density_1d_quadrature, kernel_axes, kernel_kt,
    moment_1d_quadrature, moments, potential_kernel, radial_density, Density,
};
use stablefrac::quad::{gamma, sphere_area};
use stablefrac::spectral_engine::{inverse_fourier, Spectrum};
use stablefrac::{Grid, SpectralMeasure, StableModel};
use num_complex::Complex64;
use std::f64::consts::PI;

fn skew_model(alpha: f64) -> StableModel {
    // two independent but non-orthogonal directions: product path
    let a = (1.0f64 / 5.0f64.sqrt(), 2.0 / 5.0f64.sqrt());
    let s = SpectralMeasure::discrete(&[(vec![1.0, 0.0], 0.7), (vec![a.0, a.1], 0.4)]);
    StableModel::from_lambda1(alpha, 2, s).unwrap()
}

fn three_atom_model(alpha: f64) -> StableModel {
    let mut atoms = Vec::new();
    for (k, w) in [(0.0f64, 0.5), (1.1, 0.3), (2.2, 0.4)] {
        atoms.push((vec![k.cos(), k.sin()], w));
    }
    StableModel::from_lambda1(alpha, 2, SpectralMeasure::discrete(&atoms)).unwrap()
}

#[test]
fn one_dimensional_density_matches_direct_quadrature() {
    for &al in &[1.1, 1.5, 1.9] {
        for k in 0..200 {
            let x = -25.0 + 0.2503 * k as f64;
            let a = density_1d(al, x);
            let b = density_1d_quadrature(al, x);
            assert!((a - b).abs() < 1e-9 + 1e-6 * b.abs(), "α={al} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn one_dimensional_derivative_is_consistent() {
    for &al in &[1.3, 1.7] {
        for &x in &[-30.0f64, -3.0, -0.4, 0.0, 0.7, 5.5, 19.99, 20.01, 50.0] {
            let h = 1e-4 * (1.0f64).max(x.abs());
            let fd = (density_1d(al, x + h) - density_1d(al, x - h)) / (2.0 * h);
            let d = density_1d_deriv(al, x);
            assert!((fd - d).abs() < 1e-7 * (1.0 + d.abs()) + 1e-8 * d.abs().max(1e-6), "α={al} x={x}: {fd} vs {d}");
        }
    }
}

#[test]
fn gaussian_endpoint() {
    for &x in &[0.0, 0.5, 2.0] {
        let g = (-x * x / 4.0f64).exp() / (2.0 * PI.sqrt());
        assert!((density_1d(2.0, x) - g).abs() < 1e-15);
    }
}

#[test]
fn unit_mass_and_peak_value() {
    for &al in &[1.2, 1.5, 1.8] {
        let m = moment_1d_quadrature(al, 0.0);
        assert!((m - 1.0).abs() < 1e-6, "α={al}: mass {m}");
    }
    let p0 = density_1d(1.5, 0.0);
    assert!((p0 - gamma(5.0 / 3.0) / PI).abs() < 1e-6);
}

#[test]
fn first_absolute_moment() {
    for &al in &[1.3, 1.5, 1.9] {
        let a = abs_moment_1d(al, 1.0);
        let b = moment_1d_quadrature(al, 1.0);
        assert!((a - b).abs() < 1e-4, "α={al}: {a} vs {b}");
    }
}

#[test]
fn product_path_agrees_with_cone_representation() {
    let model = skew_model(1.6);
    let dens = Density::new(&model).unwrap();
    assert!(dens.is_product());
    for x in [[0.0, 0.0], [0.3, -0.2], [1.5, 2.0], [-4.0, 1.0]] {
        let a = dens.value(&x);
        let b = dens.cone_value(&x).unwrap();
        assert!((a - b).abs() < 1e-6 * a, "x={x:?}: {a} vs {b}");
    }
}

#[test]
fn density_integrates_to_one_on_a_grid() {
    let model = three_atom_model(1.7);
    let dens = Density::new(&model).unwrap();
    assert!(!dens.is_product() && !dens.is_radial());
    // p at the origin against the Fourier inversion of e^{-σ_α^α}
    let grid = Grid::new(2, 40.0, 128).unwrap();
    let spec = Spectrum {
        grid,
        data: grid
            .frequencies()
            .iter()
            .map(|xi| Complex64::new((-model.sigma_alpha_pow(xi)).exp(), 0.0))
            .collect(),
    };
    let f = inverse_fourier(&spec).unwrap();
    for x in [[0.0, 0.0], [0.625, -1.25], [1.875, 0.625]] {
        let i = grid.ravel(&[
            ((x[0] + 40.0) / grid.spacing()).round() as usize,
            ((x[1] + 40.0) / grid.spacing()).round() as usize,
            0,
        ]);
        let a = dens.value(&x);
        assert!((a - f.values()[i]).abs() < 2e-4 * a, "x={x:?}: {a} vs {}", f.values()[i]);
    }
}

#[test]
fn rotational_density_peak_and_mass() {
    for d in [2usize, 3] {
        let al = 1.5;
        let (p0, _) = radial_density(al, d, 0.0);
        let exact = sphere_area(d) * gamma(d as f64 / al) / al / (2.0 * PI).powi(d as i32);
        assert!((p0 - exact).abs() < 1e-7 * exact, "d={d}: {p0} vs {exact}");
        // continuity across the switch to the large-radius expansion
        let e = d as f64 + al;
        let a = radial_density(al, d, 39.999).0 * 39.999f64.powf(e);
        let b = radial_density(al, d, 40.001).0 * 40.001f64.powf(e);
        assert!((a - b).abs() < 1e-4 * a, "d={d}: {a} vs {b}");
    }
    let model = StableModel::rotational(1.5, 2).unwrap();
    let dens = Density::new(&model).unwrap();
    let m = moments(&model, &[]).unwrap();
    assert!((m.p_sup - dens.value(&[0.0, 0.0])).abs() < 1e-15);
}

#[test]
fn homogeneity_of_the_semigroup_densities() {
    // p_t(x) = t^{-d/α} p(t^{-1/α} x) through σ ↦ tσ
    let model = skew_model(1.4);
    let t = 2.5f64;
    let scaled = StableModel::new(1.4, 2, model.sigma().scaled(t)).unwrap();
    let (a, b) = (Density::new(&model).unwrap(), Density::new(&scaled).unwrap());
    for x in [[0.4, 0.1], [-2.0, 3.0]] {
        let lhs = b.value(&x);
        let s = t.powf(-1.0 / 1.4);
        let rhs = t.powf(-2.0 / 1.4) * a.value(&[s * x[0], s * x[1]]);
        assert!((lhs - rhs).abs() < 1e-10 * lhs);
    }
}

#[test]
fn kernel_matches_its_fourier_symbol() {
    let al = 1.6;
    let model = StableModel::product(al, &[0.5, 0.5]).unwrap();
    let dens = Density::new(&model).unwrap();
    let t_max: f64 = 1.5;
    let grid = Grid::new(2, 32.0, 512).unwrap();
    let comps: Vec<_> = (0..2)
        .map(|k| {
            let data = grid
                .frequencies()
                .iter()
                .map(|xi| {
                    let s = model.sigma_alpha_pow(xi);
                    if s == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, -xi[k] * (-s / t_max.powf(al)).exp() / s)
                    }
                })
                .collect();
            inverse_fourier(&Spectrum { grid, data }).unwrap()
        })
        .collect();
    let h = grid.spacing();
    for idx in [[260usize, 256usize], [270, 250], [276, 272], [256, 236]] {
        let x = [idx[0] as f64 * h - 32.0, idx[1] as f64 * h - 32.0];
        let k = kernel_kt(&dens, &x, t_max).unwrap();
        let i = grid.ravel(&[idx[0], idx[1], 0]);
        for c in 0..2 {
            let f = comps[c].values()[i];
            let scale = k[0].hypot(k[1]);
            assert!((k[c] - f).abs() < 2e-3 * scale, "x={x:?} c={c}: {} vs {f}", k[c]);
        }
    }
}

#[test]
fn kernel_axes_is_the_infinite_horizon_limit() {
    let al = 1.5;
    let x = [0.7, -0.4];
    let k = kernel_axes(al, 2, &x).unwrap();
    let dens = Density::new(&StableModel::product(al, &[0.5, 0.5]).unwrap()).unwrap();
    let k_big = kernel_kt(&dens, &x, 1e7).unwrap();
    for c in 0..2 {
        assert!((k[c] - k_big[c]).abs() < 1e-6 * k[0].hypot(k[1]));
    }
    // homogeneous of degree α - 1 - d
    let k2 = kernel_axes(al, 2, &[1.4, -0.8]).unwrap();
    for c in 0..2 {
        assert!((k2[c] - k[c] * 2f64.powf(al - 3.0)).abs() < 1e-8 * k[0].hypot(k[1]));
    }
    assert!(kernel_axes(al, 2, &[0.0, 0.0]).is_err());
    let on_axis = kernel_axes(al, 2, &[0.0, 1.0]).unwrap();
    assert!(on_axis[0].abs() < 1e-14 && on_axis[1] > 0.0);
}

#[test]
fn potential_kernel_oracles() {
    let al = 1.5;
    let model = StableModel::rotational(al, 3).unwrap();
    let dens = Density::new(&model).unwrap();
    let kappa = model.rotational_kappa().unwrap();
    let x = [0.3, -0.4, 1.2];
    let r = (0.09f64 + 0.16 + 1.44).sqrt();
    let expected = gamma((3.0 - al) / 2.0) / (2f64.powf(al) * PI.powf(1.5) * gamma(al / 2.0))
        * r.powf(al - 3.0)
        / kappa;
    let v = potential_kernel(&dens, &x).unwrap();
    assert!((v - expected).abs() < 1e-12 * expected);

    // product path: α ∫ t^{d-α-1} p(tx) dt equals the Riesz kernel for the
    // isotropic Gaussian endpoint check, and is homogeneous of degree α - d
    let pm = skew_model(1.7);
    let pd = Density::new(&pm).unwrap();
    let a = potential_kernel(&pd, &[0.5, 0.2]).unwrap();
    let b = potential_kernel(&pd, &[1.5, 0.6]).unwrap();
    assert!((b - a * 3f64.powf(1.7 - 2.0)).abs() < 1e-7 * a, "{a} {b}");
    assert!(potential_kernel(&pd, &[0.0, 0.0]).is_err());
    let one_d = Density::new(&StableModel::product(1.5, &[0.5]).unwrap()).unwrap();
    assert!(potential_kernel(&one_d, &[1.0]).is_err());
}

#[test]
fn moments_record_serializes_with_expected_keys() {
    let model = StableModel::product(1.5, &[0.5, 0.5]).unwrap();
    let m = moments(&model, &[2.0]).unwrap();
    let v: serde_json::Value = serde_json::to_value(&m).unwrap();
    for key in ["E_abs_Y", "radial_mean", "p_sup", "grad_p_L1", "logderiv_Lp"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!((m.p_sup - (gamma(5.0 / 3.0) / PI).powi(2)).abs() < 1e-9);
    // ∫|∂_1 p| = 2 p_1(0) ∫ p_1 for a product law; the gradient norm is
    // bounded by the sum of the partials
    let g = m.grad_p_l1.unwrap();
    let one = 2.0 * density_1d(1.5, 0.0);
    assert!(g > one && g < 2.0 * one, "{g}");
    // radial mean of a product law: E‖Y‖ with Y = (Y_1, Y_2) iid
    assert!(m.radial_mean > m.e_abs_y && m.radial_mean < 2.0 * m.e_abs_y);
}

#[test]
fn log_derivative_norm_one_dimensional() {
    let model = StableModel::product(1.5, &[0.5]).unwrap();
    let m = moments(&model, &[1.0]).unwrap();
    // ∫|p'| = 2 p(0)
    let (_, l1) = m.logderiv_lp[0];
    assert!((l1 - 2.0 * density_1d(1.5, 0.0)).abs() < 1e-7, "{l1}");
}
