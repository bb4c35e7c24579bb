//! Eulerian decay functionals `I1 = int (u - ut)^2 / r^{n-1} dr`,
//! `J1 = |rho(1) - rho_t(1)|^2`, `J2 = int (rho - rho_t)_r^2 / r^{n-1} dr`, the
//! sup-norm distance to the stationary solution, and dyadic trend fits.

use crate::numeric::{derivative, linear_fit, trapezoid};
use crate::solver::LagrangianState;
use crate::stationary::StationaryProfile;
use crate::Result;

use super::{check_pair, sup_abs, StationaryField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRecord {
    pub t: f64,
    pub i1: f64,
    pub j1: f64,
    pub j2: f64,
    /// Backward differences over the snapshot pair.
    pub di1: f64,
    pub dj1: f64,
    pub dj2: f64,
}

/// `(I1, J1, J2)` of one snapshot, on its own radii.
pub fn decay_values(state: &LagrangianState, profile: &StationaryProfile) -> Result<(f64, f64, f64)> {
    let n = state.n as f64;
    let field = StationaryField::at(profile, &state.r)?;
    let r = &state.r;
    let drho: Vec<f64> = (0..r.len()).map(|i| 1.0 / state.v[i] - field.rho_t[i]).collect();
    let drho_r = derivative(r, &drho);
    let w: Vec<f64> = r.iter().map(|ri| ri.powf(1.0 - n)).collect();
    let i1: Vec<f64> = (0..r.len()).map(|i| (state.u[i] - field.ut[i]).powi(2) * w[i]).collect();
    let j2: Vec<f64> = (0..r.len()).map(|i| drho_r[i] * drho_r[i] * w[i]).collect();
    let j1 = (1.0 / state.v[0] - profile.rho1).powi(2);
    Ok((trapezoid(r, &i1), j1, trapezoid(r, &j2)))
}

/// Functionals at the later snapshot and their difference quotients.
pub fn decay_functionals(
    prev: &LagrangianState,
    next: &LagrangianState,
    profile: &StationaryProfile,
) -> Result<DecayRecord> {
    let dt = check_pair(prev, next)?;
    let (a1, b1, c1) = decay_values(prev, profile)?;
    let (a2, b2, c2) = decay_values(next, profile)?;
    Ok(DecayRecord {
        t: next.t,
        i1: a2,
        j1: b2,
        j2: c2,
        di1: (a2 - a1) / dt,
        dj1: (b2 - b1) / dt,
        dj2: (c2 - c1) / dt,
    })
}

/// `sup |rho - rho_t| + sup |u - ut|` over the snapshot radii.
pub fn convergence_metric(state: &LagrangianState, profile: &StationaryProfile) -> Result<f64> {
    let field = StationaryField::at(profile, &state.r)?;
    let d_rho: Vec<f64> = (0..state.len()).map(|i| 1.0 / state.v[i] - field.rho_t[i]).collect();
    let d_u: Vec<f64> = (0..state.len()).map(|i| state.u[i] - field.ut[i]).collect();
    Ok(sup_abs(&d_rho) + sup_abs(&d_u))
}

/// Linear fits of a time series over dyadic windows `[T/2^{k+1}, T/2^k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trend {
    /// `(lo, hi, slope)`, latest window first.
    pub windows: Vec<(f64, f64, f64)>,
    /// The two latest windows both slope down.
    pub downward: bool,
    /// The two latest windows both slope up.
    pub growing: bool,
}

/// Fits the series over dyadic windows ending at its last time.
pub fn dyadic_trend(ts: &[f64], ys: &[f64]) -> Trend {
    let mut windows = Vec::new();
    if let Some(&t_end) = ts.last() {
        let mut hi = t_end;
        while hi > 0.0 && windows.len() < 8 {
            let lo = 0.5 * hi;
            let (x, y): (Vec<f64>, Vec<f64>) = ts
                .iter()
                .zip(ys)
                .filter(|(&t, _)| t >= lo && t <= hi)
                .map(|(&t, &y)| (t, y))
                .unzip();
            if x.len() < 3 {
                break;
            }
            if let Some((s, _)) = linear_fit(&x, &y) {
                windows.push((lo, hi, s));
            }
            hi = lo;
        }
    }
    let latest: Vec<f64> = windows.iter().take(2).map(|w| w.2).collect();
    let downward = !latest.is_empty() && latest.iter().all(|&s| s < 0.0);
    let growing = latest.len() == 2 && latest.iter().all(|&s| s > 0.0);
    Trend {
        windows,
        downward,
        growing,
    }
}
