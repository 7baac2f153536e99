use proptest::prelude::*;
use stablefrac::optimizer::rayleigh_quotient;
use stablefrac::verifier::random_band_limited;
use stablefrac::{Grid, SpectralEngine, StableModel};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sigma_alpha_is_homogeneous(al in 1.05f64..1.95, w in 0.1f64..2.0, x in -3.0f64..3.0, y in -3.0f64..3.0, c in 0.1f64..10.0) {
        let m = StableModel::product(al, &[w, 1.0]).unwrap();
        let a = m.sigma_alpha(&[c * x, c * y]);
        let b = c * m.sigma_alpha(&[x, y]);
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn semigroup_conserves_mass_and_contracts(al in 1.05f64..1.95, t in 0.0f64..2.0, seed in 0u64..1000) {
        let g = Grid::new(2, 4.0, 32).unwrap();
        let e = SpectralEngine::new(&StableModel::rotational(al, 2).unwrap(), g).unwrap();
        let f = random_band_limited(&g, seed).unwrap().map(|v| v + 2.0);
        let u = e.semigroup(&f, t).unwrap();
        prop_assert!((u.integral() - f.integral()).abs() <= 1e-10 * f.integral());
        prop_assert!(u.inner(&u) <= f.inner(&f) * (1.0 + 1e-12));
    }

    #[test]
    fn rayleigh_quotient_ignores_amplitude(c in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0], seed in 0u64..1000) {
        let g = Grid::new(2, 4.0, 32).unwrap();
        let m = StableModel::rotational(1.5, 2).unwrap();
        let f = random_band_limited(&g, seed).unwrap();
        let a = rayleigh_quotient(&m, &g, &f, 2.0).unwrap();
        let b = rayleigh_quotient(&m, &g, &f.scale(c), 2.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }
}
