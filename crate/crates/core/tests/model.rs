use approx::assert_relative_eq;
use outflow_core::model::{
    check_phiG_bound, energy_density, energy_distance_G, energy_distance_G_quadrature, log_lower_bound, normalized_g,
    pressure_eulerian, pressure_lagrangian, relative_entropy_H, Branch, EnergyFunctions,
};
use outflow_core::{Error, Params, Params32};

fn params(k: f64, gamma: f64) -> Params {
    Params::new(2, gamma, k, 1.0, 1.0, -0.05).unwrap()
}

/// Independent oracle: composite Simpson on the defining integral of G.
fn simpson_g(v: f64, vt: f64, k: f64, gamma: f64) -> f64 {
    let (a, b) = (1.0 / vt, 1.0 / v);
    let m = 200_000;
    let h = (b - a) / m as f64;
    let pt = k * vt.powf(-gamma);
    let f = |z: f64| (k * z.powf(gamma) - pt) / (z * z);
    let mut s = f(a) + f(b);
    for i in 1..m {
        let z = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(z);
    }
    s * h / 3.0
}

/// Independent oracle for g(s) = s - 1 - int_1^s eta^{-gamma}.
fn simpson_small_g(s: f64, gamma: f64) -> f64 {
    let m = 200_000;
    let h = (s - 1.0) / m as f64;
    let f = |e: f64| e.powf(-gamma);
    let mut acc = f(1.0) + f(s);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(1.0 + h * i as f64);
    }
    s - 1.0 - acc * h / 3.0
}

#[test]
fn pressure_examples() {
    assert_eq!(pressure_eulerian(1.0, &params(1.0, 1.4)).unwrap(), 1.0);
    assert_eq!(pressure_eulerian(3.0, &params(2.0, 1.0)).unwrap(), 6.0);
    assert_eq!(pressure_eulerian(0.5, &params(1.0, 2.0)).unwrap(), 0.25);
    assert_eq!(pressure_lagrangian(1.0, &params(1.0, 1.4)).unwrap(), 1.0);
    assert_eq!(pressure_lagrangian(2.0, &params(1.0, 1.0)).unwrap(), 0.5);
    assert_eq!(pressure_lagrangian(0.5, &params(3.0, 2.0)).unwrap(), 12.0);
    let p = params(1.7, 1.3);
    for &v in &[0.2, 1.0, 3.5] {
        assert_relative_eq!(
            pressure_lagrangian(v, &p).unwrap(),
            pressure_eulerian(1.0 / v, &p).unwrap(),
            max_relative = 1e-14
        );
    }
}

#[test]
fn pressure_rejects_nonpositive() {
    assert!(matches!(pressure_eulerian(0.0, &params(1.0, 1.4)), Err(Error::Domain(_))));
    assert!(matches!(pressure_lagrangian(-1.0, &params(1.0, 1.4)), Err(Error::Domain(_))));
}

#[test]
fn oracle_reproduces_frozen_g_values() {
    // Frozen from the Simpson oracle; they coincide with 1 - ln 2 and 1/2.
    assert!((simpson_g(2.0, 1.0, 1.0, 1.0) - 0.306_852_819_440_054_7).abs() < 1e-10);
    assert!((simpson_g(2.0, 1.0, 1.0, 2.0) - 0.5).abs() < 1e-10);
    assert!((simpson_small_g(2.0, 1.0) - 0.306_852_819_440_054_7).abs() < 1e-10);
    assert!((simpson_small_g(2.0, 2.0) - 0.5).abs() < 1e-10);
}

#[test]
fn energy_distance_frozen_values() {
    assert_eq!(energy_distance_G(1.3, 1.3, &params(1.0, 1.4)).unwrap(), 0.0);
    assert_relative_eq!(
        energy_distance_G(2.0, 1.0, &params(1.0, 1.0)).unwrap(),
        0.306_852_819_440_054_7,
        max_relative = 1e-12
    );
    assert_relative_eq!(energy_distance_G(2.0, 1.0, &params(1.0, 2.0)).unwrap(), 0.5, max_relative = 1e-12);
}

#[test]
fn quadrature_mode_matches_closed_form() {
    for &gamma in &[1.0, 1.4, 2.0] {
        let p = params(1.3, gamma);
        let f = EnergyFunctions::quadrature(p, 1e-10);
        let c = EnergyFunctions::closed_form(p);
        for &(v, vt) in &[(2.0, 1.0), (0.3, 1.7), (5.0, 0.2), (1.0, 1.0001)] {
            let a = f.G(v, vt).unwrap();
            let b = c.G(v, vt).unwrap();
            assert!((a - b).abs() <= 1e-10, "{gamma} {v} {vt}: {a} vs {b}");
            assert!((a - simpson_g(v, vt, 1.3, gamma)).abs() <= 1e-9);
        }
    }
}

#[test]
fn near_diagonal_returns_zero() {
    let p = params(1.0, 1.5);
    assert_eq!(energy_distance_G(1.0 + 1e-13, 1.0, &p).unwrap(), 0.0);
    assert!(energy_distance_G(1.0 + 1e-9, 1.0, &p).unwrap() > 0.0);
}

#[test]
fn normalized_g_values() {
    assert_eq!(normalized_g(1.0, 1.4).unwrap(), 0.0);
    assert_relative_eq!(normalized_g(2.0, 1.0).unwrap(), 0.306_852_819_440_054_7, max_relative = 1e-12);
    assert_relative_eq!(normalized_g(2.0, 2.0).unwrap(), 0.5, max_relative = 1e-12);
    assert!(matches!(normalized_g(0.0, 1.4), Err(Error::Domain(_))));
    for &s in &[0.01, 0.5, 1.5, 7.0, 90.0] {
        for &gamma in &[1.0, 1.5, 2.0] {
            let g = normalized_g(s, gamma).unwrap();
            assert!(g >= log_lower_bound(s).unwrap());
            assert!((g - simpson_small_g(s, gamma)).abs() < 1e-9 * (1.0 + g));
        }
    }
}

#[test]
fn g_identity_with_big_g() {
    let p = params(1.7, 1.6);
    for &(v, vt) in &[(0.4, 1.2), (3.0, 1.1)] {
        let pt = pressure_lagrangian(vt, &p).unwrap();
        assert_relative_eq!(
            energy_distance_G(v, vt, &p).unwrap(),
            vt * pt * normalized_g(v / vt, p.gamma).unwrap(),
            max_relative = 1e-13
        );
    }
}

#[test]
fn energy_density_examples() {
    let p = params(1.0, 1.0);
    assert_eq!(energy_density(0.3, 0.3, 1.2, 1.2, &p).unwrap(), 0.0);
    assert_eq!(energy_density(1.0, 0.0, 1.2, 1.2, &p).unwrap(), 0.5);
    assert_relative_eq!(
        energy_density(0.0, 0.0, 2.0, 1.0, &p).unwrap(),
        0.306_852_819_440_054_7,
        max_relative = 1e-12
    );
}

#[test]
fn relative_entropy_values() {
    assert_eq!(relative_entropy_H(0.7, 0.7, &params(1.0, 1.4)).unwrap(), 0.0);
    // Frozen from rho * G(1/rho, 1/sigma) with the Simpson oracle.
    let h1 = 2.0 * simpson_g(0.5, 1.0, 1.0, 1.0);
    let h2 = 2.0 * simpson_g(0.5, 1.0, 1.0, 2.0);
    assert!((h1 - 0.386_294_361_119_890_6).abs() < 1e-10);
    assert!((h2 - 1.0).abs() < 1e-10);
    assert_relative_eq!(
        relative_entropy_H(2.0, 1.0, &params(1.0, 1.0)).unwrap(),
        0.386_294_361_119_890_6,
        max_relative = 1e-12
    );
    assert_relative_eq!(relative_entropy_H(2.0, 1.0, &params(1.0, 2.0)).unwrap(), 1.0, max_relative = 1e-12);
}

#[test]
fn bound_check_examples() {
    let c = check_phiG_bound(1.0, 1.0, &params(1.0, 1.4)).unwrap();
    assert!(c.holds);
    assert_eq!(c.lhs, 0.0);
    assert_eq!(c.rhs, 0.0);

    let c = check_phiG_bound(0.5, 1.0, &params(1.0, 1.5)).unwrap();
    assert_eq!(c.branch, Branch::Compressed);
    assert!(c.holds);
    // Independent evaluation with the Simpson oracle.
    let g = simpson_g(0.5, 1.0, 1.0, 1.5);
    assert!(0.75 * 0.25 <= g);

    let c = check_phiG_bound(4.0, 1.0, &params(1.0, 2.0)).unwrap();
    assert_eq!(c.branch, Branch::Expanded);
    assert!(c.holds);
    // gamma = 2 makes this branch an identity: both sides equal 9.
    assert_relative_eq!(c.lhs, 9.0, max_relative = 1e-14);
    assert_relative_eq!(c.rhs, 9.0, max_relative = 1e-12);
}

#[test]
fn bound_check_rejects_gamma_out_of_range() {
    let mut p = params(1.0, 1.4);
    p.gamma = 2.5;
    assert!(matches!(check_phiG_bound(1.0, 2.0, &p), Err(Error::Precondition(_))));
}

#[test]
fn params_validation() {
    assert!(Params::new(1, 1.4, 1.0, 1.0, 1.0, -0.05).is_err());
    assert!(Params::new(2, 2.5, 1.0, 1.0, 1.0, -0.05).is_err());
    assert!(Params::new(2, 1.4, 1.0, 1.0, 1.0, 0.05).is_err());
    assert!(Params::new(2, 1.4, 1.0, 1.0, 1.0, 0.0).is_ok());
}

#[test]
fn single_precision_kernels() {
    let p = Params32::new(2, 2.0, 1.0, 1.0, 1.0, -0.05).unwrap();
    let g = energy_distance_G(2.0f32, 1.0f32, &p).unwrap();
    assert!((g - 0.5).abs() < 1e-6);
    let q = energy_distance_G_quadrature(2.0f32, 1.0f32, &p, 1e-6, 0.0).unwrap();
    assert!((q - 0.5).abs() < 1e-5);
}
