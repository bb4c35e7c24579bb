use std::sync::Arc;

use outflow_core::lagrangian::{
    mass_at_radius, mass_coordinate_X, outer_mass_M, radii, radius_R, verify_coordinate_identities, CoordinateMap,
    MassGrid,
};
use outflow_core::solver::{family_initial_data, initialize_lagrangian, InitialFamily, LagrangianState, SolverConfig};
use outflow_core::stationary::solve_stationary;
use outflow_core::{Error, Params};
use proptest::prelude::*;

fn standard() -> Params {
    Params::new(2, 1.4, 1.0, 1.0, 1.0, -0.05).unwrap()
}

#[test]
fn outer_mass_is_affine() {
    let map = CoordinateMap::new(2, 20.0, 10.0, 0.9, -0.1);
    assert_eq!(outer_mass_M(&map, 0.0).unwrap(), 10.0);
    assert!((outer_mass_M(&map, 5.0).unwrap() - 10.45).abs() < 1e-14);
    let (m1, m2) = (outer_mass_M(&map, 1.25).unwrap(), outer_mass_M(&map, 7.5).unwrap());
    assert!(((m2 - m1) / 6.25 - 0.09).abs() < 1e-14);
    assert!(matches!(outer_mass_M(&map, -1.0), Err(Error::Range(_))));
}

#[test]
fn mass_coordinate_examples() {
    let r: Vec<f64> = (0..=40).map(|i| 1.0 + 0.1 * i as f64).collect();
    let rho = vec![1.7; r.len()];
    assert_eq!(mass_coordinate_X(&r, &rho, 1.0, 0.25, 2).unwrap(), 0.25);
    // The integrand rho0 r is linear, so the trapezoid is exact.
    for &x in &[1.05, 2.0, 3.33, 5.0] {
        let exact = 1.7 * (x * x - 1.0) / 2.0;
        assert!((mass_coordinate_X(&r, &rho, x, 0.0, 2).unwrap() - exact).abs() < 1e-12);
    }
    let mut bad = rho.clone();
    bad[7] = 0.0;
    assert!(matches!(mass_coordinate_X(&r, &bad, 2.0, 0.0, 2), Err(Error::Domain(_))));
    assert!(matches!(mass_coordinate_X(&r, &rho, 6.0, 0.0, 2), Err(Error::Range(_))));
}

#[test]
fn radius_examples() {
    let x: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
    let v = vec![1.0; x.len()];
    assert_eq!(radius_R(&x, &v, 0.0, 2).unwrap(), 1.0);
    assert!((radius_R(&x, &v, 1.5, 2).unwrap() - 2.0).abs() < 1e-14);
    assert!(matches!(radius_R(&x, &v, 2.5, 2), Err(Error::Range(_))));
    assert!(matches!(radius_R(&x, &v, -0.1, 2), Err(Error::Range(_))));
    let r = radii(&x, &v, 3);
    assert_eq!(r[0], 1.0);
    assert!(r.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn mass_grid_endpoints_are_exact() {
    let s: Vec<f64> = (0..=10).map(|i| (i as f64 / 10.0).powi(2)).collect();
    let g = MassGrid::new(1.0, s, 0.123_456_789, 987.654_321).unwrap();
    let x = g.xs();
    assert_eq!(x[0], 0.123_456_789);
    assert_eq!(*x.last().unwrap(), 987.654_321);
    assert!(x.windows(2).all(|w| w[1] > w[0]));
    assert!(g.widths().iter().all(|&w| w > 0.0));
}

proptest! {
    #[test]
    fn round_trip_is_exact(
        vs in prop::collection::vec(0.2f64..5.0, 8..60),
        b in 0.0f64..50.0,
        len in 1.0f64..500.0,
        n in 2usize..4,
        fracs in prop::collection::vec(0.0f64..1.0, 10),
    ) {
        let k = vs.len();
        let x: Vec<f64> = (0..k).map(|i| b + len * i as f64 / (k - 1) as f64).collect();
        let m = *x.last().unwrap();
        for f in fracs {
            let xi = b + f * len;
            let r = radius_R(&x, &vs, xi, n).unwrap();
            let back = mass_at_radius(&x, &vs, r, n).unwrap();
            prop_assert!((back - xi).abs() <= 1e-10 * m, "{} vs {}", back, xi);
        }
    }

    #[test]
    fn radius_is_increasing(vs in prop::collection::vec(0.01f64..10.0, 3..40), n in 2usize..4) {
        let x: Vec<f64> = (0..vs.len()).map(|i| i as f64 * 0.7).collect();
        let r = radii(&x, &vs, n);
        prop_assert_eq!(r[0], 1.0);
        prop_assert!(r.windows(2).all(|w| w[1] > w[0]));
    }
}

fn static_state(v: f64, cells: usize) -> LagrangianState {
    let s: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    let grid = MassGrid::new(0.0, s, 0.0, 10.0).unwrap();
    let x = grid.xs();
    let vv = vec![v; x.len()];
    let r = radii(&x, &vv, 2);
    LagrangianState {
        t: 0.0,
        n: 2,
        grid,
        v: vv.clone(),
        u: vec![0.0; x.len()],
        r,
        vt: vv,
        ut: vec![0.0; x.len()],
        step: 0,
    }
}

#[test]
fn identities_on_static_state() {
    let a = static_state(0.8, 64);
    let mut b = a.clone();
    b.t = 1.0;
    b.grid.t = 1.0;
    let rep = verify_coordinate_identities(&[&a, &b], true).unwrap();
    assert_eq!(rep.rt_deviation, Some(0.0));
    let fine = verify_coordinate_identities(&[&static_state(0.8, 128)], false).unwrap();
    assert!(rep.rx_deviation >= 3.0 * fine.rx_deviation, "{rep:?} vs {fine:?}");
    assert!(matches!(
        verify_coordinate_identities(&[&a], true),
        Err(Error::InsufficientData(_))
    ));
    assert!(verify_coordinate_identities(&[&a], false).unwrap().rt_deviation.is_none());
}

fn perturbed_final(nodes: usize, t_end: f64) -> (LagrangianState, LagrangianState) {
    let p = standard();
    let prof = Arc::new(solve_stationary(&p, 50.0, 1e-3).unwrap());
    let init = family_initial_data(InitialFamily::standard(1.0), prof, 40.0).unwrap();
    let cfg = SolverConfig::new(40.0, nodes, t_end);
    let mut sim = initialize_lagrangian(&init, &p, &cfg).unwrap();
    let mut prev = None;
    sim.evolve_with(t_end, |a, _, _| {
        prev = Some(a.clone());
        Ok(())
    })
    .unwrap();
    (prev.unwrap(), sim.state)
}

#[test]
fn rx_identity_converges_at_second_order() {
    let dev = |nodes| {
        let (a, b) = perturbed_final(nodes, 2.0);
        verify_coordinate_identities(&[&a, &b], true).unwrap()
    };
    let (coarse, fine) = (dev(129), dev(257));
    assert!(coarse.rx_deviation >= 3.0 * fine.rx_deviation, "{coarse:?} vs {fine:?}");
    assert!(fine.rt_deviation.unwrap() < 1e-2, "{fine:?}");
}

#[test]
fn stationary_transplant_satisfies_rx() {
    let p = standard();
    let prof = Arc::new(solve_stationary(&p, 50.0, 1e-3).unwrap());
    let init = family_initial_data(InitialFamily::Stationary, prof, 40.0).unwrap();
    let coarse = initialize_lagrangian(&init, &p, &SolverConfig::new(40.0, 256, 1.0)).unwrap();
    let sim = initialize_lagrangian(&init, &p, &SolverConfig::new(40.0, 511, 1.0)).unwrap();
    let rc = verify_coordinate_identities(&[&coarse.state], false).unwrap();
    let rf = verify_coordinate_identities(&[&sim.state], false).unwrap();
    assert!(rc.rx_deviation >= 3.0 * rf.rx_deviation, "{rc:?} vs {rf:?}");
    // The discrete radii reproduce the sampled ones.
    for (&(_, r0), &r) in sim.map.r0.iter().zip(&sim.state.r) {
        assert!((r0 - r).abs() < 1e-4 * r0);
    }
}

#[test]
fn boundary_curve_stays_affine() {
    let p = standard();
    let prof = Arc::new(solve_stationary(&p, 50.0, 1e-3).unwrap());
    let init = family_initial_data(InitialFamily::standard(1.0), prof, 40.0).unwrap();
    let mut sim = initialize_lagrangian(&init, &p, &SolverConfig::new(40.0, 128, 20.0)).unwrap();
    sim.evolve_with(20.0, |a, b, _| {
        assert!(b.grid.b > a.grid.b);
        assert!(b.grid.m > b.grid.b);
        Ok(())
    })
    .unwrap();
    let env = sim.map.b_envelope();
    assert!(!env.superlinear);
    assert!((env.slope - 0.05).abs() < 0.01, "{env:?}");
    assert!(sim.map.b_at(10.0).unwrap() > 0.0);
    assert!(matches!(sim.map.b_at(21.0), Err(Error::Range(_))));
}
