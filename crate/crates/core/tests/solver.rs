use std::sync::Arc;

use outflow_core::lagrangian::mass_drift;
use outflow_core::solver::{
    build_initial_data, check_compatibility, family_initial_data, initialize_lagrangian, InitialFamily, LagrangianState,
    Simulation, SolverConfig,
};
use outflow_core::stationary::{solve_stationary, StationaryProfile};
use outflow_core::{Error, Params};

fn standard() -> Params {
    Params::new(2, 1.4, 1.0, 1.0, 1.0, -0.05).unwrap()
}

fn profile(p: &Params) -> Arc<StationaryProfile> {
    Arc::new(solve_stationary(p, 50.0, 1e-3).unwrap())
}

fn simulation(p: &Params, family: InitialFamily, nodes: usize, t_end: f64) -> Simulation {
    let init = family_initial_data(family, profile(p), 40.0).unwrap();
    initialize_lagrangian(&init, p, &SolverConfig::new(40.0, nodes, t_end)).unwrap()
}

#[test]
fn config_validation() {
    let ok = SolverConfig::new(40.0, 512, 10.0);
    assert!(ok.validate().is_ok());
    let bad = [
        SolverConfig { nodes: 15, ..ok },
        SolverConfig { theta: 0.4, ..ok },
        SolverConfig { theta: 1.1, ..ok },
        SolverConfig { cfl: 0.0, ..ok },
        SolverConfig { cfl: 1.0, ..ok },
    ];
    for c in bad {
        assert!(matches!(c.validate(), Err(Error::Precondition(_))), "{c:?}");
    }
}

#[test]
fn initial_data_blending() {
    let p = standard();
    let prof = profile(&p);
    let stat = family_initial_data(InitialFamily::Stationary, prof.clone(), 40.0).unwrap();
    for &r in &[1.0, 3.7, 19.9, 25.0, 33.3, 40.0] {
        let s = prof.sample(r).unwrap();
        assert_eq!(stat.rho(r), s.rho_t);
        assert_eq!(stat.u(r), s.u_t);
    }
    let init = build_initial_data(|r| 1.0 + 0.1 * r.sin(), |r| -0.05 / (r * r), prof.clone(), 40.0).unwrap();
    for &r in &[1.0, 5.5, 20.0] {
        assert_eq!(init.rho(r), 1.0 + 0.1 * r.sin());
        assert_eq!(init.u(r), -0.05 / (r * r));
    }
    let end = prof.sample(40.0).unwrap();
    assert_eq!(init.rho(40.0), end.rho_t);
    assert_eq!(init.u(40.0), end.u_t);
    // Uniform bounds between the data and the profile.
    for j in 0..=400 {
        let r = 1.0 + 39.0 * j as f64 / 400.0;
        assert!(init.rho(r) >= 0.9 - 1e-12 && init.rho(r) <= 1.1 + 1e-12);
    }
    let neg = build_initial_data(|r| if r > 3.0 { -1.0 } else { 1.0 }, |_| 0.0, prof, 40.0);
    assert!(matches!(neg, Err(Error::Domain(_))));
}

#[test]
fn compatibility_records() {
    let p = standard();
    let prof = profile(&p);
    let stat = family_initial_data(InitialFamily::Stationary, prof.clone(), 40.0).unwrap();
    let rec = check_compatibility(&stat, &p, 0.02, 1e-3).unwrap();
    assert!(rec.passes, "{rec:?}");
    assert_eq!(rec.velocity_mismatch, 0.0);

    let p2 = prof.clone();
    let off = build_initial_data(
        move |r| p2.sample(r).unwrap().rho_t,
        |_| -0.05 + 0.1,
        prof.clone(),
        40.0,
    )
    .unwrap();
    let rec = check_compatibility(&off, &p, 0.02, 1e-3).unwrap();
    assert!((rec.velocity_mismatch - 0.1).abs() < 1e-15);
    assert!(!rec.passes);

    let bump = family_initial_data(
        InitialFamily::CompactBump {
            center: 2.5,
            width: 0.5,
            amp_rho: 0.2,
            amp_u: 0.0,
        },
        prof,
        40.0,
    )
    .unwrap();
    let coarse = check_compatibility(&bump, &p, 0.1, 1e-3).unwrap();
    let fine = check_compatibility(&bump, &p, 0.05, 1e-3).unwrap();
    assert!(coarse.momentum_residual < 1e-3, "{coarse:?}");
    assert!(
        coarse.momentum_residual >= 3.0 * fine.momentum_residual || fine.momentum_residual < 1e-9,
        "{coarse:?} vs {fine:?}"
    );
    assert!(matches!(
        check_compatibility(&stat, &p, 10.0, 1e-3),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn uniform_initial_mass() {
    let p = Params::new(2, 1.4, 1.0, 1.0, 1.0, 0.0).unwrap();
    let prof = Arc::new(solve_stationary(&p, 10.0, 1e-6).unwrap());
    let init = build_initial_data(|_| 1.0, |_| 0.0, prof, 3.0).unwrap();
    let sim = initialize_lagrangian(&init, &p, &SolverConfig::new(3.0, 33, 1.0)).unwrap();
    assert!((sim.map.m0 - 4.0).abs() < 1e-12, "{}", sim.map.m0);
    let s = &sim.state;
    assert_eq!(s.r[0], 1.0);
    assert_eq!(s.u[0], 0.0);
    assert!((s.r.last().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(*s.v.last().unwrap(), 1.0);
}

#[test]
fn endpoints_of_initial_state() {
    let p = standard();
    let sim = simulation(&p, InitialFamily::standard(1.0), 256, 1.0);
    let s = &sim.state;
    let end = sim.profile.sample(40.0).unwrap();
    assert_eq!(s.grid.x(0), 0.0);
    assert_eq!(s.r[0], 1.0);
    assert_eq!(s.u[0], -0.05);
    assert_eq!(*s.v.last().unwrap(), end.vt());
    assert_eq!(*s.u.last().unwrap(), end.u_t);
    assert!((s.r.last().unwrap() - 40.0).abs() < 1e-3);
}

#[test]
fn constant_state_is_fixed() {
    let p = Params::new(2, 1.4, 1.0, 1.0, 1.0, 0.0).unwrap();
    let mut sim = simulation(&p, InitialFamily::Stationary, 64, 5.0);
    let before = sim.state.clone();
    let traj = sim.evolve(5.0, &mut []).unwrap();
    let after = traj.last().unwrap();
    assert_eq!(after.t, 5.0);
    for i in 0..before.len() {
        assert!((after.v[i] - before.v[i]).abs() <= 1e-14);
        assert!(after.u[i].abs() <= 1e-14);
    }
    assert_eq!(after.grid.b, 0.0);
}

fn fixed_point_drift(nodes: usize) -> f64 {
    let p = standard();
    let mut sim = simulation(&p, InitialFamily::Stationary, nodes, 10.0);
    let start = sim.state.deviation();
    let mut worst = 0.0f64;
    sim.evolve_with(10.0, |_, s, _| {
        worst = worst.max(s.deviation());
        Ok(())
    })
    .unwrap();
    worst.max(start)
}

#[test]
fn stationary_data_is_nearly_fixed() {
    let coarse = fixed_point_drift(512);
    let fine = fixed_point_drift(1023);
    assert!(coarse <= 1e-3, "{coarse}");
    assert!(coarse >= 2.0 * fine, "{coarse} vs {fine}");
}

#[test]
fn boundary_values_and_mass_accounting() {
    let p = standard();
    let mut sim = simulation(&p, InitialFamily::standard(1.0), 256, 10.0);
    let (vm, um) = sim.outer_values;
    let mut b_quad = 0.0;
    let mut worst_drift = 0.0f64;
    sim.evolve_with(10.0, |a, b, _| {
        assert_eq!(b.u[0], -0.05);
        assert_eq!(*b.v.last().unwrap(), vm);
        assert_eq!(*b.u.last().unwrap(), um);
        assert!(b.v.iter().all(|&v| v > 0.0));
        assert_eq!(b.r[0], 1.0);
        assert!(b.r.windows(2).all(|w| w[1] > w[0]));
        b_quad += 0.5 * (b.t - a.t) * 0.05 * (1.0 / a.v[0] + 1.0 / b.v[0]);
        worst_drift = worst_drift.max(mass_drift(b, 40.0, vm).abs());
        Ok(())
    })
    .unwrap();
    // Heun uses the predicted boundary density, so agreement is to quadrature order.
    assert!((sim.state.grid.b - b_quad).abs() < 1e-5, "{} vs {b_quad}", sim.state.grid.b);
    assert!(worst_drift < 0.05, "{worst_drift}");
}

#[test]
fn time_refinement_agrees() {
    let p = standard();
    let run = |cfl: f64| {
        let init = family_initial_data(InitialFamily::standard(1.0), profile(&p), 40.0).unwrap();
        let cfg = SolverConfig {
            cfl,
            ..SolverConfig::new(40.0, 256, 5.0)
        };
        let mut sim = initialize_lagrangian(&init, &p, &cfg).unwrap();
        sim.evolve(5.0, &mut []).unwrap();
        sim.state.psi().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    };
    let (a, b, c) = (run(0.4), run(0.2), run(0.1));
    assert!((a - b).abs() <= 1e-2 * a, "{a} {b}");
    assert!((b - c).abs() <= (a - b).abs() + 1e-12, "{a} {b} {c}");
}

#[test]
fn evolve_snapshots() {
    let p = standard();
    let mut sim = simulation(&p, InitialFamily::standard(1.0), 64, 2.0);
    let same = sim.evolve(0.0, &mut []).unwrap();
    assert_eq!(same.len(), 1);
    sim.config.snapshot_dt = Some(0.5);
    let mut seen = Vec::new();
    let mut hook = |s: &LagrangianState| {
        seen.push(s.t);
        Ok(())
    };
    let traj = sim.evolve(2.0, &mut [&mut hook]).unwrap();
    let times: Vec<f64> = traj.iter().map(|s| s.t).collect();
    assert_eq!(times, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    assert_eq!(seen, times);
    assert!(matches!(sim.evolve(1.0, &mut []), Err(Error::Precondition(_))));
}

#[test]
fn hook_failure_aborts() {
    let p = standard();
    let mut sim = simulation(&p, InitialFamily::standard(1.0), 64, 2.0);
    sim.config.snapshot_stride = 1;
    let mut hook = |s: &LagrangianState| {
        if s.t > 0.2 {
            Err(Error::Input("stop".into()))
        } else {
            Ok(())
        }
    };
    let res = sim.evolve(2.0, &mut [&mut hook]);
    assert!(matches!(res, Err(Error::Input(msg)) if msg.contains("stop")));
    assert!(sim.state.t < 2.0);
}

#[test]
fn snapshot_rows() {
    let p = standard();
    let sim = simulation(&p, InitialFamily::standard(1.0), 32, 1.0);
    let rows = sim.state.rows();
    assert_eq!(rows.len(), 32);
    assert_eq!(LagrangianState::CSV_HEADER.join(","), "t,x,s,r,v,u,phi,psi");
    let phi = sim.state.phi();
    assert_eq!(rows[5][6], phi[5]);
    assert_eq!(rows[31][2], 1.0);
}
