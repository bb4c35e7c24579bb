//! Mass-coordinate transformation: boundary curves `B(t)`, `M(t)`, the maps
//! `X(r, t)` and `R(x, t)`, and their consistency checks.
//!
//! On a discrete Lagrangian field the radius is built cell by cell from
//! `R^n = 1 + n int_B^x v dy` with the cell-average volume, so inside a cell
//! `R^n` is affine in `x` and the inverse `X` is available in closed form.

use crate::error::{Error, Result};
use crate::numeric::{derivative, linear_fit, locate};
use crate::solver::LagrangianState;

/// Boundary curves of one simulation.
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    pub n: usize,
    /// Outer radius of the annulus.
    pub m: f64,
    /// Initial mass `int_1^m rho_m^0 r^{n-1} dr`.
    pub m0: f64,
    /// `rho_t(1)`.
    pub rho1_t: f64,
    /// `|u_b|`.
    pub outflow_speed: f64,
    /// Accumulated outflow `(t, B(t))`, appended by the solver.
    pub b_curve: Vec<(f64, f64)>,
    /// Initial inverse map as `(x, R_0(x))` node pairs.
    pub r0: Vec<(f64, f64)>,
}

impl CoordinateMap {
    pub fn new(n: usize, m: f64, m0: f64, rho1_t: f64, u_b: f64) -> Self {
        Self {
            n,
            m,
            m0,
            rho1_t,
            outflow_speed: u_b.abs(),
            b_curve: vec![(0.0, 0.0)],
            r0: Vec::new(),
        }
    }

    /// Slope `M'(t) = rho_t(1) |u_b|`.
    pub fn outer_speed(&self) -> f64 {
        self.rho1_t * self.outflow_speed
    }

    /// `B(t)` by linear interpolation of the recorded curve.
    pub fn b_at(&self, t: f64) -> Result<f64> {
        let (ts, bs): (Vec<f64>, Vec<f64>) = self.b_curve.iter().copied().unzip();
        let last = *ts.last().unwrap();
        if t < 0.0 || t > last {
            return Err(Error::Range(format!("t = {t} outside recorded [0, {last}]")));
        }
        if ts.len() == 1 {
            return Ok(bs[0]);
        }
        Ok(crate::numeric::interp_linear(&ts, &bs, t))
    }

    /// Records `B` at a new time (times must increase).
    pub fn record_b(&mut self, t: f64, b: f64) {
        if let Some(&(t_last, _)) = self.b_curve.last() {
            if t <= t_last {
                return;
            }
        }
        self.b_curve.push((t, b));
    }

    /// Affine envelope of `B` and a super-linear growth flag.
    pub fn b_envelope(&self) -> BEnvelope {
        let (ts, bs): (Vec<f64>, Vec<f64>) = self.b_curve.iter().copied().unzip();
        let (slope, intercept) = linear_fit(&ts, &bs).unwrap_or((0.0, bs[0]));
        let max_excess = ts
            .iter()
            .zip(&bs)
            .map(|(t, b)| b - (slope * t + intercept))
            .fold(0.0f64, f64::max);
        // Slopes over dyadic windows [T/2^{k+1}, T/2^k], latest first.
        let t_end = *ts.last().unwrap();
        let mut window_slopes = Vec::new();
        let mut hi = t_end;
        while hi > 0.0 && window_slopes.len() < 8 {
            let lo = 0.5 * hi;
            let pts: Vec<(f64, f64)> = self
                .b_curve
                .iter()
                .copied()
                .filter(|&(t, _)| t >= lo && t <= hi)
                .collect();
            if pts.len() < 3 {
                break;
            }
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            if let Some((s, _)) = linear_fit(&x, &y) {
                window_slopes.push(s);
            }
            hi = lo;
        }
        // Super-linear: slopes strictly increase with time across every window
        // and the latest exceeds the earliest by half.
        let superlinear = window_slopes.len() >= 3
            && window_slopes.windows(2).all(|w| w[0] > w[1])
            && window_slopes[0] > 1.5 * window_slopes.last().unwrap();
        BEnvelope {
            slope,
            intercept,
            max_excess,
            window_slopes,
            superlinear,
        }
    }
}

/// Affine fit of the recorded `B(t)`.
#[derive(Debug, Clone)]
pub struct BEnvelope {
    pub slope: f64,
    pub intercept: f64,
    pub max_excess: f64,
    pub window_slopes: Vec<f64>,
    pub superlinear: bool,
}

/// `M(t) = M0 + rho_t(1) |u_b| t`.
#[allow(non_snake_case)]
pub fn outer_mass_M(map: &CoordinateMap, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Range(format!("time {t} must be nonnegative")));
    }
    Ok(map.m0 + map.outer_speed() * t)
}

/// Fixed normalized nodes mapped affinely onto `[B(t), M(t)]`.
#[derive(Debug, Clone)]
pub struct MassGrid {
    pub t: f64,
    pub s_nodes: Vec<f64>,
    pub b: f64,
    pub m: f64,
}

impl MassGrid {
    pub fn new(t: f64, s_nodes: Vec<f64>, b: f64, m: f64) -> Result<Self> {
        if s_nodes.len() < 2 || s_nodes[0] != 0.0 || *s_nodes.last().unwrap() != 1.0 {
            return Err(Error::Input("s nodes must run from 0 to 1".into()));
        }
        if !s_nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Input("s nodes must increase strictly".into()));
        }
        if !(m > b) {
            return Err(Error::Numerical(format!("domain collapsed: B = {b} >= M = {m}")));
        }
        Ok(Self { t, s_nodes, b, m })
    }

    /// Mass coordinate of node `i`; the endpoints are exactly `B` and `M`.
    pub fn x(&self, i: usize) -> f64 {
        let last = self.s_nodes.len() - 1;
        if i == 0 {
            self.b
        } else if i == last {
            self.m
        } else {
            self.b + self.s_nodes[i] * (self.m - self.b)
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.s_nodes.len()).map(|i| self.x(i)).collect()
    }

    /// Cell widths in mass units.
    pub fn widths(&self) -> Vec<f64> {
        let x = self.xs();
        x.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// `X(r) = B_t + int_1^r rho y^{n-1} dy` for an Eulerian density on `r_nodes`
/// (composite trapezoid, linear density inside the last partial cell).
#[allow(non_snake_case)]
pub fn mass_coordinate_X(r_nodes: &[f64], rho: &[f64], r: f64, b_t: f64, n: usize) -> Result<f64> {
    if r_nodes.len() != rho.len() || r_nodes.len() < 2 {
        return Err(Error::Input("density field and radii differ in length".into()));
    }
    if rho.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("density must be positive".into()));
    }
    let (lo, hi) = (r_nodes[0], *r_nodes.last().unwrap());
    if !(r >= lo && r <= hi) {
        return Err(Error::Range(format!("radius {r} outside [{lo}, {hi}]")));
    }
    let f = |i: usize| rho[i] * r_nodes[i].powi(n as i32 - 1);
    let k = locate(r_nodes, r);
    let mut acc = b_t;
    for i in 0..k {
        acc += 0.5 * (f(i) + f(i + 1)) * (r_nodes[i + 1] - r_nodes[i]);
    }
    let h = r_nodes[k + 1] - r_nodes[k];
    let w = (r - r_nodes[k]) / h;
    let rho_r = rho[k] + w * (rho[k + 1] - rho[k]);
    acc += 0.5 * (f(k) + rho_r * r.powi(n as i32 - 1)) * (r - r_nodes[k]);
    Ok(acc)
}

/// `R(x) = (1 + n int_B^x v dy)^{1/n}` on a Lagrangian field, cell-average rule.
#[allow(non_snake_case)]
pub fn radius_R(x_nodes: &[f64], v: &[f64], x: f64, n: usize) -> Result<f64> {
    if x_nodes.len() != v.len() || x_nodes.len() < 2 {
        return Err(Error::Input("volume field and mass nodes differ in length".into()));
    }
    if v.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::Domain("specific volume must be positive".into()));
    }
    let (lo, hi) = (x_nodes[0], *x_nodes.last().unwrap());
    if !(x >= lo && x <= hi) {
        return Err(Error::Range(format!("mass coordinate {x} outside [{lo}, {hi}]")));
    }
    if x == lo {
        return Ok(1.0);
    }
    let rn = radius_powers(x_nodes, v, n);
    let k = locate(x_nodes, x);
    let vbar = 0.5 * (v[k] + v[k + 1]);
    Ok((rn[k] + n as f64 * (x - x_nodes[k]) * vbar).powf(1.0 / n as f64))
}

/// `R^n` at every node under the cell-average rule (`R^n = 1` at the first node).
pub fn radius_powers(x_nodes: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut rn = Vec::with_capacity(v.len());
    rn.push(1.0);
    for i in 1..v.len() {
        let prev = rn[i - 1];
        rn.push(prev + nf * (x_nodes[i] - x_nodes[i - 1]) * 0.5 * (v[i - 1] + v[i]));
    }
    rn
}

/// Radii at every node under the cell-average rule.
pub fn radii(x_nodes: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    let inv = 1.0 / n as f64;
    let mut r: Vec<f64> = radius_powers(x_nodes, v, n).into_iter().map(|p| p.powf(inv)).collect();
    r[0] = 1.0;
    r
}

/// Exact inverse of [`radius_R`] on the same field: the mass coordinate at radius `r`.
pub fn mass_at_radius(x_nodes: &[f64], v: &[f64], r: f64, n: usize) -> Result<f64> {
    let rn = radius_powers(x_nodes, v, n);
    let target = r.powi(n as i32);
    let (lo, hi) = (rn[0], *rn.last().unwrap());
    if !(target >= lo && target <= hi * (1.0 + 1e-14)) {
        return Err(Error::Range(format!("radius {r} outside the current domain")));
    }
    let k = locate(&rn, target.min(hi));
    let vbar = 0.5 * (v[k] + v[k + 1]);
    Ok(x_nodes[k] + (target - rn[k]) / (n as f64 * vbar))
}

/// Deviations of the discrete `R_x = r^{1-n} v` and `R_t = u` identities.
#[derive(Debug, Clone, Copy)]
pub struct IdentityReport {
    /// `max |R_x - r^{1-n} v| / max r^{1-n} v`.
    pub rx_deviation: f64,
    /// `max |R_t - u| / max |u|` (absolute if `u = 0`), when two snapshots were given.
    pub rt_deviation: Option<f64>,
}

/// Checks the differential relations of the coordinate map on stored snapshots.
///
/// `R_x` uses three-point differences at the last snapshot; `R_t` compares the
/// change of `R` at fixed mass coordinate between the last two snapshots with
/// the time-averaged velocity there.
pub fn verify_coordinate_identities(snaps: &[&LagrangianState], check_rt: bool) -> Result<IdentityReport> {
    let last = *snaps.last().ok_or_else(|| Error::InsufficientData("no snapshot given".into()))?;
    if check_rt && snaps.len() < 2 {
        return Err(Error::InsufficientData("R_t check needs two snapshots".into()));
    }
    let n = last.n;
    let x = last.grid.xs();
    let rx = derivative(&x, &last.r);
    let mut dev = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..x.len() {
        let exact = last.r[i].powi(1 - n as i32) * last.v[i];
        dev = dev.max((rx[i] - exact).abs());
        scale = scale.max(exact.abs());
    }
    let rx_deviation = dev / scale;
    let rt_deviation = if check_rt {
        let prev = snaps[snaps.len() - 2];
        let dt = last.t - prev.t;
        if !(dt > 0.0) {
            return Err(Error::Input("snapshots must be in increasing time".into()));
        }
        let xp = prev.grid.xs();
        let mut dev = 0.0f64;
        let mut umax = 0.0f64;
        for i in 0..x.len() {
            if x[i] < xp[0] || x[i] > *xp.last().unwrap() {
                continue;
            }
            let r_prev = radius_R(&xp, &prev.v, x[i], n)?;
            let u_prev = crate::numeric::interp_linear(&xp, &prev.u, x[i]);
            let rt = (last.r[i] - r_prev) / dt;
            let u_mid = 0.5 * (u_prev + last.u[i]);
            dev = dev.max((rt - u_mid).abs());
            umax = umax.max(u_mid.abs());
        }
        Some(if umax > 0.0 { dev / umax } else { dev })
    } else {
        None
    };
    Ok(IdentityReport {
        rx_deviation,
        rt_deviation,
    })
}

/// Mass accounting defect `(1 + n int v dx - m^n) / (n vt(m))` in mass units:
/// zero when the discrete domain ends exactly at radius `m`.
pub fn mass_drift(state: &LagrangianState, m: f64, vt_m: f64) -> f64 {
    let x = state.grid.xs();
    let rn = radius_powers(&x, &state.v, state.n);
    (rn.last().unwrap() - m.powi(state.n as i32)) / (state.n as f64 * vt_m)
}
