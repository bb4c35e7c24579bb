use outflow_core::stationary::{
    ode_residual, sample_profile, solve_stationary, solve_stationary_with, stationary_report, StationaryOptions,
    StationaryProfile,
};
use outflow_core::{Error, Params};

fn standard(n: usize) -> Params {
    Params::new(n, 1.4, 1.0, 1.0, 1.0, -0.05).unwrap()
}

/// Independent oracle: RK4 backward shooting of the density form
/// `rho'' = (2/rho) rho'^2 - a2 rho' - a3` from a far radius, with its own
/// fixed point on `rho(1)`.
struct Shooting {
    rho1: f64,
    /// `(r, rho_plus - rho)` at the probe radii.
    samples: Vec<(f64, f64)>,
}

fn shoot(p: &Params, r_far: f64, probes: &[f64]) -> Shooting {
    let n = p.n as f64;
    let c2 = p.sound_speed_sq(p.rho_plus);
    let mut rho1 = p.rho_plus;
    let mut samples = Vec::new();
    for _ in 0..40 {
        let b = rho1 * p.u_b;
        // State is (d, d') with d = rho_plus - rho, to keep the far tail exact.
        let rhs = |r: f64, y: [f64; 2]| -> [f64; 2] {
            let (rho, rho_r) = (p.rho_plus - y[0], -y[1]);
            let rn1 = r.powf(n - 1.0);
            let a2 = p.sound_speed_sq(rho) * rho * rho * rn1 / (p.mu * b) - b / (p.mu * rn1) - (n - 1.0) / r;
            let a3 = -(n - 1.0) * b * rho / (p.mu * rn1 * r);
            [y[1], -(2.0 * rho_r * rho_r / rho - a2 * rho_r - a3)]
        };
        let def = b * b / (2.0 * c2 * p.rho_plus * r_far.powf(2.0 * n - 2.0));
        let mut y = [def, -(2.0 * n - 2.0) * def / r_far];
        let mut r = r_far;
        let mut probe_vals = Vec::new();
        let mut targets: Vec<f64> = probes.to_vec();
        targets.sort_by(|a, b| b.partial_cmp(a).unwrap());
        targets.push(1.0);
        for &target in &targets {
            while r > target {
                let rn1 = r.powf(n - 1.0);
                let stiff = (c2 * rn1 / (p.mu * b)).abs() + 1.0;
                let h = (1e-3f64).min(1.5 / stiff).min(r - target);
                let k1 = rhs(r, y);
                let k2 = rhs(r - 0.5 * h, [y[0] - 0.5 * h * k1[0], y[1] - 0.5 * h * k1[1]]);
                let k3 = rhs(r - 0.5 * h, [y[0] - 0.5 * h * k2[0], y[1] - 0.5 * h * k2[1]]);
                let k4 = rhs(r - h, [y[0] - h * k3[0], y[1] - h * k3[1]]);
                y[0] -= h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                y[1] -= h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
                r -= h;
            }
            probe_vals.push((target, y[0]));
        }
        let next = p.rho_plus - y[0];
        samples = probe_vals;
        if (next - rho1).abs() < 1e-13 {
            rho1 = next;
            break;
        }
        rho1 = next;
    }
    Shooting { rho1, samples }
}

#[test]
fn oracle_frozen_boundary_density() {
    // Frozen from the shooting oracle.
    let s2 = shoot(&standard(2), 100.0, &[]);
    let s3 = shoot(&standard(3), 100.0, &[]);
    assert!((s2.rho1 - 0.999_163_672_4).abs() < 2e-10, "{}", s2.rho1);
    assert!((s3.rho1 - 0.999_211_117_6).abs() < 2e-10, "{}", s3.rho1);
}

#[test]
fn zero_flux_is_constant() {
    let p = Params::new(2, 1.4, 1.0, 1.0, 1.3, 0.0).unwrap();
    let prof = solve_stationary(&p, 50.0, 1e-6).unwrap();
    assert!(prof.rho_t.iter().all(|&r| r == 1.3));
    assert!(prof.u_t.iter().all(|&u| u == 0.0));
    let rep = stationary_report(&prof).unwrap();
    assert!(rep.slope_deficit.is_none() && rep.slope_du.is_none());
    assert_eq!(rep.flux_deviation, 0.0);
    assert!(rep.worst_slope_error().is_none());
}

#[test]
fn matches_shooting_oracle() {
    for n in [2usize, 3] {
        let p = standard(n);
        let prof = solve_stationary(&p, 50.0, 1e-3).unwrap();
        let probes = [1.5, 2.0, 5.0, 10.0, 20.0];
        let oracle = shoot(&p, 100.0, &probes);
        assert!((prof.rho1 - oracle.rho1).abs() < 1e-7, "n={n}: {} vs {}", prof.rho1, oracle.rho1);
        for &(r, d) in &oracle.samples {
            let def = p.rho_plus - prof.sample(r).unwrap().rho_t;
            let def_o = d;
            assert!((def - def_o).abs() <= 2e-3 * def_o, "n={n} r={r}: {def} vs {def_o}");
        }
    }
}

#[test]
fn flux_and_algebraic_identities() {
    for n in [2usize, 3] {
        let prof = solve_stationary(&standard(n), 50.0, 1e-3).unwrap();
        let rep = stationary_report(&prof).unwrap();
        assert!(rep.flux_deviation <= 1e-8, "{}", rep.flux_deviation);
        assert!(rep.algebraic_deviation <= 1e-10, "{}", rep.algebraic_deviation);
        assert!(rep.rho_increasing && rep.rho_below_plus && rep.du_positive);
        assert!(prof.rho_t.iter().all(|&r| r > 0.5 && r < 1.0));
        assert_eq!(prof.u_t[0], -0.05);
        assert!((prof.rho_t.last().unwrap() - 1.0).abs() < 1e-3);
    }
}

#[test]
fn decay_exponents() {
    for n in [2usize, 3] {
        let prof = solve_stationary(&standard(n), 50.0, 1e-3).unwrap();
        let rep = stationary_report(&prof).unwrap();
        assert_eq!(rep.window, (10.0, 40.0));
        assert!(rep.worst_slope_error().unwrap() <= 0.3, "{rep:?}");
        // Tail sign pattern: rho_r > 0 and rho_rr < 0.
        let far: Vec<usize> = (0..prof.r_nodes.len()).filter(|&i| prof.r_nodes[i] > 10.0).collect();
        assert!(far.iter().all(|&i| prof.drho[i] > 0.0 && prof.ddrho[i] < 0.0));
    }
}

#[test]
fn leading_tail_coefficient() {
    let p = standard(2);
    let prof = solve_stationary(&p, 50.0, 1e-3).unwrap();
    let c2 = p.sound_speed_sq(p.rho_plus);
    let lead = prof.flux * prof.flux / (2.0 * c2 * p.rho_plus);
    let s = prof.sample(30.0).unwrap();
    let scaled = (p.rho_plus - s.rho_t) * 30.0f64.powi(2);
    assert!((scaled - lead).abs() <= 0.02 * lead, "{scaled} vs {lead}");
}

#[test]
fn residual_drops_under_refinement() {
    let p = standard(2);
    let worst = |nodes: usize| {
        let pr = solve_stationary_with(
            &p,
            &StationaryOptions {
                nodes,
                ..StationaryOptions::new(50.0, 1e-2)
            },
        )
        .unwrap();
        ode_residual(&pr).iter().fold(0.0f64, |m, x| m.max(x.abs()))
    };
    let (coarse, fine) = (worst(1000), worst(2000));
    assert!(coarse >= 3.0 * fine, "{coarse} vs {fine}");
}

#[test]
fn sampling_contract() {
    let prof: StationaryProfile = solve_stationary(&standard(2), 50.0, 1e-3).unwrap();
    let i = 137;
    let s = sample_profile(&prof, prof.r_nodes[i]).unwrap();
    assert_eq!(s.rho_t, prof.rho_t[i]);
    assert_eq!(s.u_t, prof.u_t[i]);
    assert_eq!(s.drho, prof.drho[i]);
    let s1 = sample_profile(&prof, 1.0).unwrap();
    assert_eq!(s1.rho_t, prof.rho1);
    assert_eq!(s1.u_t, -0.05);
    let mid = 0.5 * (prof.r_nodes[i] + prof.r_nodes[i + 1]);
    let m = sample_profile(&prof, mid).unwrap().rho_t;
    assert!(m >= prof.rho_t[i] && m <= prof.rho_t[i + 1]);
    assert!(matches!(sample_profile(&prof, 0.5), Err(Error::Range(_))));
    assert!(matches!(sample_profile(&prof, 51.0), Err(Error::Range(_))));
}

#[test]
fn report_needs_enough_nodes() {
    let prof = solve_stationary_with(
        &standard(2),
        &StationaryOptions {
            nodes: 20,
            tol: 1.0,
            ..StationaryOptions::new(10.0, 1.0)
        },
    )
    .unwrap();
    assert!(matches!(stationary_report(&prof), Err(Error::InsufficientData(_))));
}

#[test]
fn rejects_bad_inputs() {
    assert!(matches!(solve_stationary(&standard(2), 5.0, 1e-3), Err(Error::Precondition(_))));
    assert!(matches!(solve_stationary(&standard(2), 50.0, 0.0), Err(Error::Precondition(_))));
    let fast = Params::new(2, 1.4, 1.0, 1.0, 1.0, -2.0).unwrap();
    assert!(matches!(solve_stationary(&fast, 50.0, 1e-3), Err(Error::ParameterRegime(_))));
}

#[test]
fn mass_function_is_increasing() {
    let prof = solve_stationary(&standard(3), 50.0, 1e-3).unwrap();
    let m = prof.mass_function();
    assert_eq!(m[0], 0.0);
    assert!(m.windows(2).all(|w| w[1] > w[0]));
}
