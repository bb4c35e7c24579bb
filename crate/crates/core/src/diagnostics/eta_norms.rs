//! `eta`-weighted norms of `psi_x` and the two interpolation inequalities that
//! bound `sup eta r^{3n-4} psi_x^2` and `sup eta r^{3n-3} psi_x^2`.
//!
//! The constants are explicit. Differentiating `eta r^a psi_x^2` and using
//! `|eta_x| <= sqrt(8 eta) v / r^{n-1}`, `r >= 1` and Young's inequality gives
//! `v_max (sqrt 8 + 3n - 4 + 1/delta)` for the first form and
//! `v_max (sqrt 8 + 3n - 3 + 1/delta)` for the second.

use crate::lagrangian::radius_R;
use crate::numeric::{derivative, second_derivative, trapezoid};
use crate::solver::LagrangianState;
use crate::{Error, Params, Result};

use super::cutoff::eta;
use super::holds_with_slack;

#[derive(Debug, Clone, PartialEq)]
pub struct EtaRecord {
    pub t: f64,
    pub delta: f64,
    /// `eta(x, t)` at the nodes.
    pub eta: Vec<f64>,
    /// `int eta r^{2n-4} psi_x^2`.
    pub norm_low: f64,
    /// `int eta r^{2n-2} psi_x^2`.
    pub norm_high: f64,
    /// `sup eta r^{n-1} psi^2`.
    pub sup_eta_psi: f64,
    /// Left and right sides of the first inequality.
    pub lhs_a: f64,
    pub rhs_a: f64,
    pub holds_a: bool,
    /// Left and right sides of the second inequality.
    pub lhs_b: f64,
    pub rhs_b: f64,
    pub holds_b: bool,
}

/// Evaluates the weighted norms and both inequalities at one snapshot.
pub fn eta_weighted_norms(state: &LagrangianState, m0: f64, params: &Params, delta: f64) -> Result<EtaRecord> {
    params.validate()?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
    }
    let n = state.n as f64;
    let x = state.x();
    let len = x.len();
    // eta vanishes identically once M0 has left the domain.
    let r_m0 = if m0 < x[0] {
        None
    } else {
        Some(radius_R(&x, &state.v, m0.min(*x.last().unwrap()), state.n)?)
    };
    let eta_v: Vec<f64> = match r_m0 {
        Some(rm) => state.r.iter().map(|&r| eta(r, rm)).collect(),
        None => vec![0.0; len],
    };
    let psi = state.psi();
    let psi_x = derivative(&x, &psi);
    let psi_xx = second_derivative(&x, &psi);
    let v_max = state.v_max();
    let mut low = vec![0.0; len];
    let mut high = vec![0.0; len];
    let mut plain = vec![0.0; len];
    let mut hess_a = vec![0.0; len];
    let mut hess_b = vec![0.0; len];
    let (mut sup_psi, mut lhs_a, mut lhs_b) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..len {
        let (r, v, e) = (state.r[i], state.v[i], eta_v[i]);
        let px2 = psi_x[i] * psi_x[i];
        let pxx2 = psi_xx[i] * psi_xx[i];
        low[i] = e * r.powf(2.0 * n - 4.0) * px2;
        high[i] = e * r.powf(2.0 * n - 2.0) * px2;
        plain[i] = r.powf(2.0 * n - 2.0) * px2;
        hess_a[i] = e * r.powf(4.0 * n - 6.0) * pxx2 / v;
        hess_b[i] = e * r.powf(4.0 * n - 4.0) * pxx2 / v;
        sup_psi = sup_psi.max(e * r.powf(n - 1.0) * psi[i] * psi[i]);
        lhs_a = lhs_a.max(e * r.powf(3.0 * n - 4.0) * px2);
        lhs_b = lhs_b.max(e * r.powf(3.0 * n - 3.0) * px2);
    }
    let grad = trapezoid(&x, &plain);
    let root8 = 8f64.sqrt();
    let rhs_a = v_max * (root8 + 3.0 * n - 4.0 + 1.0 / delta) * grad + delta * trapezoid(&x, &hess_a);
    let rhs_b = v_max * (root8 + 3.0 * n - 3.0 + 1.0 / delta) * grad + delta * trapezoid(&x, &hess_b);
    Ok(EtaRecord {
        t: state.t,
        delta,
        eta: eta_v,
        norm_low: trapezoid(&x, &low),
        norm_high: trapezoid(&x, &high),
        sup_eta_psi: sup_psi,
        lhs_a,
        rhs_a,
        holds_a: holds_with_slack(lhs_a, rhs_a, 0.0),
        lhs_b,
        rhs_b,
        holds_b: holds_with_slack(lhs_b, rhs_b, 0.0),
    })
}
