//! The effective flux `F = mu phi_x / v - psi / r^{n-1}` and the residual of its
//! damped transport equation
//! `F_t + (gamma K / mu) v^{-gamma} F = (n-1) psi^2 / r^n
//!   + gamma (p(v) - p(vt)) rho_t' / (r^{n-1} rho_t^2) + Q psi / r^{n-1}`,
//! `Q = ut' + (n-1) ut / r - (gamma K / mu) v^{-gamma} + mu r^{n-1} d/dr(rho_t' / (r^{n-1} rho_t^2))`.

use crate::numeric::{derivative, interp_cubic, interp_linear, trapezoid};
use crate::solver::LagrangianState;
use crate::Result;

use super::{check_pair, DiagContext, StationaryField};

#[derive(Debug, Clone, PartialEq)]
pub struct FRecord {
    pub t: f64,
    /// `F` at the nodes of the later snapshot.
    pub f: Vec<f64>,
    /// `int_{B}^{M0} r^{2n-2} F^2 dx` at the later snapshot.
    pub norm: f64,
    /// Discrete `L^2(B, M0)` norm of the equation residual at fixed `x`.
    pub residual_l2: f64,
    /// Set when `B(t) > M0 - 2`: the norm then covers less than two mass units.
    pub notice: Option<String>,
}

/// `F` at every node.
pub fn f_field(state: &LagrangianState, ctx: &DiagContext) -> Vec<f64> {
    let n = state.n as i32;
    let x = state.x();
    let phi = state.phi();
    let psi = state.psi();
    let phi_x = derivative(&x, &phi);
    (0..x.len())
        .map(|i| ctx.params.mu * phi_x[i] / state.v[i] - psi[i] / state.r[i].powi(n - 1))
        .collect()
}

/// `(gamma K / mu) v^{-gamma} F - right side`, so that the equation reads `F_t + source = 0`.
fn source(state: &LagrangianState, f: &[f64], ctx: &DiagContext) -> Result<Vec<f64>> {
    let p = &ctx.params;
    let n = state.n as f64;
    let field = StationaryField::at(&ctx.profile, &state.r)?;
    let psi = state.psi();
    let mut out = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        let (r, v, ps) = (state.r[i], state.v[i], psi[i]);
        let (rt, dr, ddr) = (field.rho_t[i], field.drho[i], field.ddrho[i]);
        let rn1 = r.powf(n - 1.0);
        let damp = p.gamma * p.k / p.mu * v.powf(-p.gamma);
        let weight = dr / (rn1 * rt * rt);
        let dweight = ddr / (rn1 * rt * rt) - (n - 1.0) * dr / (rn1 * r * rt * rt) - 2.0 * dr * dr / (rn1 * rt * rt * rt);
        let q = field.du[i] + (n - 1.0) * field.ut[i] / r - damp + p.mu * rn1 * dweight;
        let dp = p.k * (v.powf(-p.gamma) - state.vt[i].powf(-p.gamma));
        let rhs = (n - 1.0) * ps * ps / (rn1 * r) + p.gamma * dp * weight + q * ps / rn1;
        out.push(damp * f[i] - rhs);
    }
    Ok(out)
}

/// Trapezoid over `[x_0, upper]`, linear inside the last partial cell.
fn trapezoid_to(x: &[f64], y: &[f64], upper: f64) -> f64 {
    if upper <= x[0] {
        return 0.0;
    }
    let k = x.partition_point(|&xi| xi <= upper);
    let mut acc = trapezoid(&x[..k], &y[..k]);
    if k < x.len() && upper > x[k - 1] {
        let yu = interp_linear(x, y, upper);
        acc += 0.5 * (upper - x[k - 1]) * (y[k - 1] + yu);
    }
    acc
}

/// `int_{B}^{M0} r^{2n-2} F^2 dx`.
pub fn f_norm(state: &LagrangianState, f: &[f64], m0: f64) -> f64 {
    let n = state.n as f64;
    let x = state.x();
    let weighted: Vec<f64> = (0..x.len()).map(|i| state.r[i].powf(2.0 * n - 2.0) * f[i] * f[i]).collect();
    trapezoid_to(&x, &weighted, m0)
}

/// `F`, its weighted norm and the residual of its evolution equation between
/// two consecutive snapshots of one run.
pub fn f_diagnostics(prev: &LagrangianState, next: &LagrangianState, ctx: &DiagContext) -> Result<FRecord> {
    let dt = check_pair(prev, next)?;
    let xp = prev.x();
    let xn = next.x();
    let fp = f_field(prev, ctx);
    let fn_ = f_field(next, ctx);
    let sp = source(prev, &fp, ctx)?;
    let sn = source(next, &fn_, ctx)?;
    let norm = f_norm(next, &fn_, ctx.m0);
    let b = next.grid.b;
    let notice = (b > ctx.m0 - 2.0).then(|| format!("B(t) = {b} exceeds M0 - 2 at t = {}; norm restricted", next.t));
    // Residual at fixed x: the earlier snapshot is interpolated onto the later nodes.
    let mut xs = Vec::new();
    let mut res2 = Vec::new();
    for i in 0..xn.len() {
        if xn[i] > ctx.m0 || xn[i] < xp[0] {
            continue;
        }
        let f_old = interp_cubic(&xp, &fp, xn[i]);
        let s_old = interp_cubic(&xp, &sp, xn[i]);
        let r = (fn_[i] - f_old) / dt + 0.5 * (sn[i] + s_old);
        xs.push(xn[i]);
        res2.push(r * r);
    }
    let residual_l2 = if xs.len() >= 2 { trapezoid(&xs, &res2).sqrt() } else { 0.0 };
    Ok(FRecord {
        t: next.t,
        f: fn_,
        norm,
        residual_l2,
        notice,
    })
}
