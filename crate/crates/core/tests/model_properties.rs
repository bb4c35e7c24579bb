use outflow_core::model::{
    check_phiG_bound, energy_distance_G, energy_distance_G_quadrature, log_lower_bound, normalized_g,
    relative_entropy_H,
};
use outflow_core::Params;
use proptest::prelude::*;

fn gamma_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), 1.0f64..=2.0]
}

fn params(gamma: f64, k: f64) -> Params {
    Params::new(2, gamma, k, 1.0, 1.0, -0.05).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn g_closed_form_matches_quadrature(v in 0.1f64..10.0, vt in 0.1f64..10.0, gamma in gamma_strategy(), k in 0.2f64..5.0) {
        let p = params(gamma, k);
        let a = energy_distance_G(v, vt, &p).unwrap();
        let b = energy_distance_G_quadrature(v, vt, &p, 1e-15, 1e-13).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()) + 1e-15, "{} vs {}", a, b);
    }

    #[test]
    fn g_vanishes_only_on_diagonal(v in 0.1f64..10.0, vt in 0.1f64..10.0, gamma in gamma_strategy()) {
        let g = energy_distance_G(v, vt, &params(gamma, 1.0)).unwrap();
        if (v - vt).abs() >= 1e-12 * vt {
            prop_assert!(g > 0.0);
        } else {
            prop_assert_eq!(g, 0.0);
        }
    }

    #[test]
    fn small_g_lower_bound(s in 1e-6f64..=100.0, gamma in gamma_strategy()) {
        prop_assert!(normalized_g(s, gamma).unwrap() >= log_lower_bound(s).unwrap());
    }

    #[test]
    fn phi_g_bound_holds(v in 0.1f64..10.0, vt in 0.1f64..10.0, gamma in gamma_strategy(), k in 0.2f64..5.0) {
        let c = check_phiG_bound(v, vt, &params(gamma, k)).unwrap();
        prop_assert!(c.holds, "{:?}", c);
    }

    #[test]
    fn h_matches_rho_g(rho in 0.1f64..10.0, sigma in 0.1f64..10.0, gamma in gamma_strategy()) {
        let p = params(gamma, 1.3);
        let h = relative_entropy_H(rho, sigma, &p).unwrap();
        let via_g = rho * energy_distance_G(1.0 / rho, 1.0 / sigma, &p).unwrap();
        prop_assert!((h - via_g).abs() <= 1e-8 * h.abs().max(via_g.abs()) + 1e-15, "{} vs {}", h, via_g);
    }

    #[test]
    fn g_is_midpoint_convex(a in 0.1f64..9.0, step in 1e-3f64..0.5, vt in 0.1f64..10.0, gamma in gamma_strategy()) {
        let p = params(gamma, 1.0);
        let g = |v: f64| energy_distance_G(v, vt, &p).unwrap();
        let (l, m, r) = (g(a), g(a + step), g(a + 2.0 * step));
        prop_assert!(2.0 * m <= l + r + 1e-12 * (l + r + 1.0));
    }
}
