//! Stationary outflow profile on a truncated ray `[1, R_max]`.
//!
//! The unknown is the specific-volume excess `e = vt - 1/rho_plus`, which
//! satisfies
//!
//! ```text
//! e'' + A(r, e) e' + C(r, e) = 0,
//! A = -(n-1)/r - (b/mu) r^{1-n} + gamma K vt^{-gamma-1} r^{n-1} / (mu b),
//! C = (n-1) (b/mu) r^{-n} vt,            b = rho_t(1) u_b,
//! ```
//!
//! the specific-volume form of the stationary density equation. For `b < 0`
//! one homogeneous mode grows like `exp(c r^n)`, so both closing conditions sit
//! at `R_max`: the power-law tail `e ~ r^{2-2n}` fixes the value and slope there.
//! The centred Newton system is then triangular in the far-to-near ordering
//! and is solved by back substitution; an outer fixed point updates the flux
//! constant `b` through `rho_t(1)`.

use crate::error::{Error, Result};
use crate::numeric::{fd_weights, linear_fit, Pchip};
use crate::Params;

/// Discretized stationary solution.
#[derive(Debug, Clone)]
pub struct StationaryProfile {
    pub params: Params,
    pub r_nodes: Vec<f64>,
    pub rho_t: Vec<f64>,
    pub u_t: Vec<f64>,
    pub drho: Vec<f64>,
    pub ddrho: Vec<f64>,
    pub du: Vec<f64>,
    /// `rho_plus - rho_t`, kept separately to avoid cancellation in the tail.
    pub deficit: Vec<f64>,
    pub rho1: f64,
    /// Mass flux constant `b = rho_t(1) u_b`.
    pub flux: f64,
    /// Outer fixed-point iterations used.
    pub outer_iterations: usize,
    interp: Option<ProfileInterp>,
}

#[derive(Debug, Clone)]
struct ProfileInterp {
    deficit: Pchip,
    u: Pchip,
    drho: Pchip,
    du: Pchip,
    ddrho: Pchip,
}

/// Interpolated stationary values at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub rho_t: f64,
    pub u_t: f64,
    pub drho: f64,
    pub du: f64,
    pub ddrho: f64,
}

impl ProfileSample {
    /// Specific volume `1 / rho_t`.
    pub fn vt(&self) -> f64 {
        1.0 / self.rho_t
    }

    /// `d vt / dr`.
    pub fn dvt(&self) -> f64 {
        -self.drho / (self.rho_t * self.rho_t)
    }

    /// `d^2 vt / dr^2`.
    pub fn ddvt(&self) -> f64 {
        let r = self.rho_t;
        -self.ddrho / (r * r) + 2.0 * self.drho * self.drho / (r * r * r)
    }
}

/// Mesh and iteration controls for [`solve_stationary_with`].
#[derive(Debug, Clone, Copy)]
pub struct StationaryOptions {
    pub r_max: f64,
    pub tol: f64,
    pub nodes: usize,
    /// Ratio of the last to the first cell width of the geometric mesh.
    pub stretch: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl StationaryOptions {
    pub fn new(r_max: f64, tol: f64) -> Self {
        Self {
            r_max,
            tol,
            nodes: 2000,
            stretch: 50.0,
            max_newton: 50,
            max_outer: 200,
        }
    }
}

/// Geometric mesh on `[1, r_max]`, finest at `r = 1`.
pub fn geometric_mesh(r_max: f64, nodes: usize, stretch: f64) -> Vec<f64> {
    let cells = nodes - 1;
    if stretch == 1.0 || cells < 2 {
        return (0..nodes).map(|i| 1.0 + (r_max - 1.0) * i as f64 / cells as f64).collect();
    }
    let q = stretch.powf(1.0 / (cells as f64 - 1.0));
    let total = q.powi(cells as i32) - 1.0;
    let mut r: Vec<f64> = (0..nodes)
        .map(|i| 1.0 + (r_max - 1.0) * (q.powi(i as i32) - 1.0) / total)
        .collect();
    r[0] = 1.0;
    r[cells] = r_max;
    r
}

/// Solves the stationary problem with the default mesh (2000 nodes).
pub fn solve_stationary(params: &Params, r_max: f64, tol: f64) -> Result<StationaryProfile> {
    solve_stationary_with(params, &StationaryOptions::new(r_max, tol))
}

struct Coeffs {
    n: f64,
    gamma: f64,
    k: f64,
    mu: f64,
    v_plus: f64,
    b: f64,
}

impl Coeffs {
    /// `(A, dA/de, C, dC/de)` at radius `r` and excess `e`.
    fn eval(&self, r: f64, e: f64) -> (f64, f64, f64, f64) {
        let vt = self.v_plus + e;
        let rn1 = r.powf(self.n - 1.0);
        let stiff = self.gamma * self.k * vt.powf(-self.gamma - 1.0) * rn1 / (self.mu * self.b);
        let a = -(self.n - 1.0) / r - self.b / (self.mu * rn1) + stiff;
        let da = -(self.gamma + 1.0) * stiff / vt;
        let c0 = (self.n - 1.0) * self.b / (self.mu * rn1 * r);
        (a, da, c0 * vt, c0)
    }

    /// Excess at `r` such that a pure power law `e ~ r^{2-2n}` satisfies the ODE there.
    fn tail_value(&self, r: f64) -> Result<f64> {
        let p = 2.0 * self.n - 2.0;
        let mut e = self.b * self.b * self.v_plus.powf(self.gamma + 2.0) * r.powf(-p) / (2.0 * self.gamma * self.k);
        for _ in 0..100 {
            let (a, da, c, dc) = self.eval(r, e);
            let f = p * (p + 1.0) * e / (r * r) - a * p * e / r + c;
            let df = p * (p + 1.0) / (r * r) - (a + da * e) * p / r + dc;
            let step = f / df;
            e -= step;
            if !e.is_finite() || self.v_plus + e <= 0.0 {
                return Err(Error::ParameterRegime("far-field tail equation has no admissible root".into()));
            }
            if step.abs() <= 1e-15 * e.abs() {
                return Ok(e);
            }
        }
        Err(Error::NonConvergence {
            iterations: 100,
            residual: f64::NAN,
        })
    }
}

/// Centred three-point weights `(d1, d2)` at every interior node.
fn interior_weights(r: &[f64]) -> Vec<([f64; 3], [f64; 3])> {
    (0..r.len())
        .map(|i| {
            if i == 0 || i + 1 == r.len() {
                ([0.0; 3], [0.0; 3])
            } else {
                let w = fd_weights(r[i], &r[i - 1..i + 2], 2);
                ([w[1][0], w[1][1], w[1][2]], [w[2][0], w[2][1], w[2][2]])
            }
        })
        .collect()
}

/// Damped Newton for the local problem at fixed flux `b`.
fn inner_solve(co: &Coeffs, r: &[f64], weights: &[([f64; 3], [f64; 3])], e: &mut [f64], max_newton: usize) -> Result<()> {
    let n = r.len();
    let r_end = r[n - 1];
    let e_end = co.tail_value(r_end)?;
    let p = 2.0 * co.n - 2.0;
    let e_prev = e_end * (r[n - 2] / r_end).powf(-p);

    let residual = |e: &[f64], out: &mut [f64]| {
        for i in 1..n - 1 {
            let (w1, w2) = weights[i];
            let d1 = w1[0] * e[i - 1] + w1[1] * e[i] + w1[2] * e[i + 1];
            let d2 = w2[0] * e[i - 1] + w2[1] * e[i] + w2[2] * e[i + 1];
            let (a, _, c, _) = co.eval(r[i], e[i]);
            let scale = d2.abs() + (a * d1).abs() + c.abs();
            out[i] = (d2 + a * d1 + c) / scale.max(f64::MIN_POSITIVE);
        }
        out[0] = 0.0;
        out[n - 1] = (e[n - 1] - e_end) / e_end.abs().max(f64::MIN_POSITIVE);
        out[n - 2] = (e[n - 2] - e_prev) / e_prev.abs().max(f64::MIN_POSITIVE);
    };
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut res = vec![0.0; n];
    let mut delta = vec![0.0; n];
    let mut trial = vec![0.0; n];
    residual(e, &mut res);
    let mut rnorm = norm(&res);
    for _ in 0..max_newton {
        // Back substitution from the far-field rows inward.
        delta[n - 1] = e_end - e[n - 1];
        delta[n - 2] = e_prev - e[n - 2];
        for i in (1..n - 1).rev() {
            let (w1, w2) = weights[i];
            let d1 = w1[0] * e[i - 1] + w1[1] * e[i] + w1[2] * e[i + 1];
            let d2 = w2[0] * e[i - 1] + w2[1] * e[i] + w2[2] * e[i + 1];
            let (a, da, c, dc) = co.eval(r[i], e[i]);
            let f = d2 + a * d1 + c;
            let j_lo = w2[0] + a * w1[0];
            let j_mid = w2[1] + a * w1[1] + da * d1 + dc;
            let j_hi = w2[2] + a * w1[2];
            delta[i - 1] = (-f - j_mid * delta[i] - j_hi * delta[i + 1]) / j_lo;
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            for i in 0..n {
                trial[i] = e[i] + lambda * delta[i];
            }
            if trial.iter().all(|&x| x.is_finite() && co.v_plus + x > 0.0) {
                residual(&trial, &mut res);
                let tn = norm(&res);
                if tn < rnorm || tn <= 1e-13 {
                    e.copy_from_slice(&trial);
                    rnorm = tn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        let step = norm(&delta) * lambda;
        let scale = norm(e).max(f64::MIN_POSITIVE);
        if !accepted {
            if rnorm <= 1e-10 {
                return Ok(());
            }
            return Err(Error::NonConvergence {
                iterations: max_newton,
                residual: rnorm,
            });
        }
        if step <= 1e-14 * scale || rnorm <= 1e-14 {
            return Ok(());
        }
    }
    if rnorm <= 1e-10 {
        Ok(())
    } else {
        Err(Error::NonConvergence {
            iterations: max_newton,
            residual: rnorm,
        })
    }
}

/// Solves the stationary problem with explicit mesh controls.
pub fn solve_stationary_with(params: &Params, opts: &StationaryOptions) -> Result<StationaryProfile> {
    params.validate()?;
    if !(opts.r_max >= 10.0) {
        return Err(Error::Precondition("r_max must be at least 10".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition("tol must be positive".into()));
    }
    if opts.nodes < 16 {
        return Err(Error::Precondition("need at least 16 mesh nodes".into()));
    }
    let r = geometric_mesh(opts.r_max, opts.nodes, opts.stretch);
    let nn = r.len();
    if params.u_b == 0.0 {
        return Ok(StationaryProfile::from_parts(
            *params,
            r,
            vec![0.0; nn],
            vec![0.0; nn],
            vec![0.0; nn],
            params.rho_plus,
            0,
        ));
    }

    let v_plus = 1.0 / params.rho_plus;
    let weights = interior_weights(&r);
    let mut rho1 = params.rho_plus;
    let mut e = vec![0.0; nn];
    let mut co = Coeffs {
        n: params.n as f64,
        gamma: params.gamma,
        k: params.k,
        mu: params.mu,
        v_plus,
        b: rho1 * params.u_b,
    };
    for (ei, &ri) in e.iter_mut().zip(&r) {
        *ei = co.b * co.b * v_plus.powf(co.gamma + 2.0) * ri.powf(2.0 - 2.0 * co.n) / (2.0 * co.gamma * co.k);
    }

    let mut last_change = f64::INFINITY;
    let mut growth = 0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..opts.max_outer {
        iterations = it + 1;
        co.b = rho1 * params.u_b;
        inner_solve(&co, &r, &weights, &mut e, opts.max_newton).map_err(|err| match err {
            Error::NonConvergence { .. } | Error::ParameterRegime(_) => Error::ParameterRegime(format!(
                "inner stationary solve failed at outer iteration {iterations} (|u_b| likely too large): {err}"
            )),
            other => other,
        })?;
        let next = 1.0 / (v_plus + e[0]);
        if !next.is_finite() || next <= 0.0 {
            return Err(Error::ParameterRegime("boundary density left the admissible range".into()));
        }
        let change = (next - rho1).abs();
        rho1 = next;
        if change <= 1e-15 * rho1 {
            converged = true;
            break;
        }
        if change > last_change {
            growth += 1;
            if growth >= 3 {
                return Err(Error::ParameterRegime(format!(
                    "boundary-density fixed point diverges for u_b = {}",
                    params.u_b
                )));
            }
        } else {
            growth = 0;
        }
        last_change = change;
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            residual: last_change / rho1,
        });
    }

    // Derivatives: centred differences for e', the ODE itself for e''.
    let mut de = vec![0.0; nn];
    let mut dde = vec![0.0; nn];
    for i in 0..nn {
        let lo = i.saturating_sub(1).min(nn - 3);
        let w = fd_weights(r[i], &r[lo..lo + 3], 1);
        de[i] = (0..3).map(|j| w[1][j] * e[lo + j]).sum();
        let (a, _, c, _) = co.eval(r[i], e[i]);
        dde[i] = -a * de[i] - c;
    }
    let b = rho1 * params.u_b;
    let mut profile = StationaryProfile::from_excess(*params, r, &e, &de, &dde, b, iterations);
    profile.u_t[0] = params.u_b;

    let res = ode_residual(&profile);
    let worst = res.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tail_gap = (profile.rho_t[nn - 1] - params.rho_plus).abs();
    if worst > opts.tol || tail_gap > opts.tol {
        return Err(Error::NonConvergence {
            iterations,
            residual: worst.max(tail_gap),
        });
    }
    Ok(profile)
}

impl StationaryProfile {
    #[allow(clippy::too_many_arguments)]
    fn from_excess(
        params: Params,
        r: Vec<f64>,
        e: &[f64],
        de: &[f64],
        dde: &[f64],
        b: f64,
        outer_iterations: usize,
    ) -> Self {
        let v_plus = 1.0 / params.rho_plus;
        let n = params.n as f64;
        let nn = r.len();
        let mut rho = vec![0.0; nn];
        let mut deficit = vec![0.0; nn];
        let mut drho = vec![0.0; nn];
        let mut ddrho = vec![0.0; nn];
        let mut u = vec![0.0; nn];
        let mut du = vec![0.0; nn];
        for i in 0..nn {
            let vt = v_plus + e[i];
            deficit[i] = e[i] / (v_plus * vt);
            rho[i] = params.rho_plus - deficit[i];
            drho[i] = -de[i] / (vt * vt);
            ddrho[i] = -dde[i] / (vt * vt) + 2.0 * de[i] * de[i] / (vt * vt * vt);
            let rn1 = r[i].powf(n - 1.0);
            u[i] = b * vt / rn1;
            du[i] = b * ((1.0 - n) * vt / (rn1 * r[i]) + de[i] / rn1);
        }
        let rho1 = rho[0];
        let mut p = Self {
            params,
            r_nodes: r,
            rho_t: rho,
            u_t: u,
            drho,
            ddrho,
            du,
            deficit,
            rho1,
            flux: rho1 * params.u_b,
            outer_iterations,
            interp: None,
        };
        p.build_interp();
        p
    }

    fn from_parts(
        params: Params,
        r: Vec<f64>,
        u: Vec<f64>,
        drho: Vec<f64>,
        du: Vec<f64>,
        rho1: f64,
        outer_iterations: usize,
    ) -> Self {
        let nn = r.len();
        let mut p = Self {
            params,
            rho_t: vec![params.rho_plus; nn],
            deficit: vec![0.0; nn],
            ddrho: vec![0.0; nn],
            r_nodes: r,
            u_t: u,
            drho,
            du,
            rho1,
            flux: rho1 * params.u_b,
            outer_iterations,
            interp: None,
        };
        p.build_interp();
        p
    }

    fn build_interp(&mut self) {
        let r = &self.r_nodes;
        self.interp = Some(ProfileInterp {
            deficit: Pchip::new(r, &self.deficit),
            u: Pchip::new(r, &self.u_t),
            drho: Pchip::new(r, &self.drho),
            du: Pchip::new(r, &self.du),
            ddrho: Pchip::new(r, &self.ddrho),
        });
    }

    pub fn r_max(&self) -> f64 {
        *self.r_nodes.last().unwrap()
    }

    /// Monotone cubic interpolation of all stored fields at `r`.
    pub fn sample(&self, r: f64) -> Result<ProfileSample> {
        let r_max = self.r_max();
        // Allow round-off overshoot at the ends.
        let slack = 1e-12 * r_max;
        if !(r >= 1.0 - slack && r <= r_max + slack) {
            return Err(Error::Range(format!("radius {r} outside [1, {r_max}]")));
        }
        let r = r.clamp(1.0, r_max);
        let it = self.interp.as_ref().expect("profile interpolants");
        Ok(ProfileSample {
            rho_t: self.params.rho_plus - it.deficit.eval(r),
            u_t: it.u.eval(r),
            drho: it.drho.eval(r),
            du: it.du.eval(r),
            ddrho: it.ddrho.eval(r),
        })
    }

    /// `(vt, ut)` at `r`, the pair the evolution needs every step.
    pub fn vt_ut(&self, r: f64) -> Result<(f64, f64)> {
        let s = self.sample(r)?;
        Ok((s.vt(), s.u_t))
    }

    /// Stationary mass `int_1^r rho_t y^{n-1} dy` at every node (trapezoid).
    pub fn mass_function(&self) -> Vec<f64> {
        let n = self.params.n as i32;
        let f: Vec<f64> = self
            .r_nodes
            .iter()
            .zip(&self.rho_t)
            .map(|(r, rho)| rho * r.powi(n - 1))
            .collect();
        crate::numeric::cumulative_trapezoid(&self.r_nodes, &f)
    }

    /// CSV header for [`Self::rows`].
    pub const CSV_HEADER: [&'static str; 6] = ["r", "rho_t", "u_t", "drho", "du", "ddrho"];

    /// One row per node in the CSV column order.
    pub fn rows(&self) -> Vec<[f64; 6]> {
        (0..self.r_nodes.len())
            .map(|i| {
                [
                    self.r_nodes[i],
                    self.rho_t[i],
                    self.u_t[i],
                    self.drho[i],
                    self.du[i],
                    self.ddrho[i],
                ]
            })
            .collect()
    }
}

/// `sample_profile` as a free function.
pub fn sample_profile(profile: &StationaryProfile, r: f64) -> Result<ProfileSample> {
    profile.sample(r)
}

/// Scaled residual of the density form
/// `rho'' - (2/rho) rho'^2 + a2 rho' + a3 = 0`, with
/// `a2 = P'(rho) rho^2 r^{n-1}/(mu b) - b/(mu r^{n-1}) - (n-1)/r` and
/// `a3 = -(n-1) b rho / (mu r^n)`, using five-point derivatives of the stored
/// density. Each entry is divided by the sum of the absolute term sizes.
pub fn ode_residual(profile: &StationaryProfile) -> Vec<f64> {
    let p = &profile.params;
    let r = &profile.r_nodes;
    let nn = r.len();
    let b = profile.flux;
    if b == 0.0 {
        return vec![0.0; nn];
    }
    let n = p.n as f64;
    (0..nn)
        .map(|i| {
            let lo = i.saturating_sub(2).min(nn - 5);
            let w = fd_weights(r[i], &r[lo..lo + 5], 2);
            // Derivatives of rho = rho_plus - deficit.
            let d1: f64 = -(0..5).map(|j| w[1][j] * profile.deficit[lo + j]).sum::<f64>();
            let d2: f64 = -(0..5).map(|j| w[2][j] * profile.deficit[lo + j]).sum::<f64>();
            let rho = profile.rho_t[i];
            let rn1 = r[i].powf(n - 1.0);
            let a1 = -2.0 / rho;
            let a2 = p.sound_speed_sq(rho) * rho * rho * rn1 / (p.mu * b) - b / (p.mu * rn1) - (n - 1.0) / r[i];
            let a3 = -(n - 1.0) * b * rho / (p.mu * rn1 * r[i]);
            let terms = [d2, a1 * d1 * d1, a2 * d1, a3];
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            terms.iter().sum::<f64>() / scale.max(f64::MIN_POSITIVE)
        })
        .collect()
}

/// Structural summary of a profile.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub window: (f64, f64),
    pub nodes_in_window: usize,
    /// Fitted log-log slopes, `None` when the profile is constant.
    pub slope_deficit: Option<f64>,
    pub slope_drho: Option<f64>,
    pub slope_du: Option<f64>,
    pub slope_ddrho: Option<f64>,
    pub target_deficit: f64,
    pub target_drho: f64,
    pub target_du: f64,
    pub target_ddrho: f64,
    pub rho_increasing: bool,
    pub rho_below_plus: bool,
    pub du_positive: bool,
    /// `max |r^{n-1} rho u - b| / |b|` (absolute when `b = 0`).
    pub flux_deviation: f64,
    /// `max |u - b r^{1-n}/rho| / |u|` over nodes.
    pub algebraic_deviation: f64,
}

impl DecayReport {
    /// Largest slope miss, or `None` for a constant profile.
    pub fn worst_slope_error(&self) -> Option<f64> {
        let pairs = [
            (self.slope_deficit, self.target_deficit),
            (self.slope_drho, self.target_drho),
            (self.slope_du, self.target_du),
            (self.slope_ddrho, self.target_ddrho),
        ];
        pairs
            .iter()
            .map(|(s, t)| s.map(|s| (s - t).abs()))
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.into_iter().fold(0.0, f64::max))
    }
}

/// Fits the tail exponents over `[r_max/5, 4 r_max/5]` and checks the structural signs.
pub fn stationary_report(profile: &StationaryProfile) -> Result<DecayReport> {
    stationary_report_window(profile, profile.r_max() / 5.0, 0.8 * profile.r_max())
}

/// [`stationary_report`] over an explicit fit window.
pub fn stationary_report_window(profile: &StationaryProfile, lo: f64, hi: f64) -> Result<DecayReport> {
    let r = &profile.r_nodes;
    let idx: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= lo && r[i] <= hi).collect();
    if idx.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "fit window [{lo}, {hi}] holds {} nodes, need 20",
            idx.len()
        )));
    }
    let n = profile.params.n as f64;
    let b = profile.flux;
    let constant = b == 0.0;
    let fit = |vals: &dyn Fn(usize) -> f64| -> Option<f64> {
        if constant {
            return None;
        }
        let xs: Vec<f64> = idx.iter().map(|&i| r[i].ln()).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| vals(i).abs().ln()).collect();
        if ys.iter().any(|y| !y.is_finite()) {
            return None;
        }
        linear_fit(&xs, &ys).map(|(s, _)| s)
    };
    let nn = r.len();
    let rho_increasing = constant || profile.deficit.windows(2).all(|w| w[1] < w[0]);
    let rho_below_plus = constant || profile.deficit.iter().all(|&d| d > 0.0);
    let du_positive = constant || (1..nn - 1).all(|i| profile.du[i] > 0.0);
    let mut flux_dev = 0.0f64;
    let mut alg_dev = 0.0f64;
    for i in 0..nn {
        let rn1 = r[i].powf(n - 1.0);
        let f = rn1 * profile.rho_t[i] * profile.u_t[i];
        let d = if constant { f.abs() } else { (f - b).abs() / b.abs() };
        flux_dev = flux_dev.max(d);
        let u_alg = b / (rn1 * profile.rho_t[i]);
        let denom = profile.u_t[i].abs();
        let a = if denom > 0.0 {
            (profile.u_t[i] - u_alg).abs() / denom
        } else {
            (profile.u_t[i] - u_alg).abs()
        };
        alg_dev = alg_dev.max(a);
    }
    Ok(DecayReport {
        window: (lo, hi),
        nodes_in_window: idx.len(),
        slope_deficit: fit(&|i| profile.deficit[i]),
        slope_drho: fit(&|i| profile.drho[i]),
        slope_du: fit(&|i| profile.du[i]),
        slope_ddrho: fit(&|i| profile.ddrho[i]),
        target_deficit: -(2.0 * n - 2.0),
        target_drho: -(2.0 * n - 1.0),
        target_du: -n,
        target_ddrho: -2.0 * n,
        rho_increasing,
        rho_below_plus,
        du_positive,
        flux_deviation: flux_dev,
        algebraic_deviation: alg_dev,
    })
}
