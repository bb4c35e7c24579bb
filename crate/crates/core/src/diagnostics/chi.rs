//! Self-convergence in the truncation radius `m`: runs with different `m` are
//! extended to `[1, inf)` by blending with the stationary solution and compared
//! on a common window.

use std::sync::Arc;

use crate::lagrangian::radius_R;
use crate::numeric::interp_cubic;
use crate::solver::LagrangianState;
use crate::stationary::StationaryProfile;
use crate::{Error, Result};

use super::cutoff::{chi_m, phi_m};

/// One run of the family, with its snapshots.
#[derive(Debug, Clone)]
pub struct ChiRun {
    pub m: f64,
    pub m0: f64,
    pub profile: Arc<StationaryProfile>,
    pub snapshots: Vec<LagrangianState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiTable {
    pub ms: Vec<f64>,
    /// `(r_max, t_max)` of the comparison window `[1, r_max] x [0, t_max]`.
    pub window: (f64, f64),
    /// `(m_i, m_j, sup-difference)` for every pair `i < j`.
    pub pairs: Vec<(f64, f64, f64)>,
    /// Differences between neighbouring members, in increasing `m`.
    pub consecutive: Vec<f64>,
    /// `consecutive` strictly decreases.
    pub decreasing: bool,
    /// `chi_m = 1` on the whole window for every run and time.
    pub chi_is_one: bool,
}

/// `(rho, u)` of the blended extension on the radii `rs`.
fn extension(run: &ChiRun, snap: &LagrangianState, rs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let rho: Vec<f64> = snap.v.iter().map(|v| 1.0 / v).collect();
    let r_end = *snap.r.last().unwrap();
    let mut out_rho = Vec::with_capacity(rs.len());
    let mut out_u = Vec::with_capacity(rs.len());
    for &r in rs {
        let s = run.profile.sample(r)?;
        let w = phi_m(r, run.m);
        let (rr, uu) = if r <= r_end {
            (interp_cubic(&snap.r, &rho, r), interp_cubic(&snap.r, &snap.u, r))
        } else {
            (s.rho_t, s.u_t)
        };
        out_rho.push(rr * w + s.rho_t * (1.0 - w));
        out_u.push(uu * w + s.u_t * (1.0 - w));
    }
    Ok((out_rho, out_u))
}

/// Pairwise sup-differences of the extended solutions on `[1, r_max] x [0, t_max]`.
pub fn chi_refinement_study(runs: &[ChiRun], r_max: f64, t_max: f64) -> Result<ChiTable> {
    if runs.len() < 2 {
        return Err(Error::Input("the study needs at least two runs".into()));
    }
    if runs.windows(2).any(|w| !(w[1].m > w[0].m)) {
        return Err(Error::Input("runs must be ordered by increasing m".into()));
    }
    let params = runs[0].profile.params;
    if runs.iter().any(|r| r.profile.params != params) {
        return Err(Error::Input("runs use different parameters".into()));
    }
    if !(r_max > 1.0 && r_max <= 0.5 * runs[0].m) {
        return Err(Error::Input(format!(
            "window radius {r_max} must lie in (1, m_1/2 = {}]",
            0.5 * runs[0].m
        )));
    }
    let times: Vec<f64> = runs[0].snapshots.iter().map(|s| s.t).filter(|&t| t <= t_max).collect();
    if times.is_empty() {
        return Err(Error::InsufficientData("no snapshot inside the time window".into()));
    }
    for run in runs {
        let ts: Vec<f64> = run.snapshots.iter().map(|s| s.t).filter(|&t| t <= t_max).collect();
        if ts != times {
            return Err(Error::Input(format!("run m = {} stores different snapshot times", run.m)));
        }
    }
    let rs: Vec<f64> = (0..=400).map(|j| 1.0 + (r_max - 1.0) * j as f64 / 400.0).collect();
    // Extensions of every run at every time, plus the chi check.
    let mut fields = Vec::with_capacity(runs.len());
    let mut chi_is_one = true;
    for run in runs {
        let mut per_time = Vec::with_capacity(times.len());
        for snap in run.snapshots.iter().filter(|s| s.t <= t_max) {
            let x = snap.x();
            let r_m0 = radius_R(&x, &snap.v, run.m0.clamp(x[0], *x.last().unwrap()), snap.n)?;
            chi_is_one &= rs.iter().all(|&r| chi_m(r, r_m0) == 1.0);
            per_time.push(extension(run, snap, &rs)?);
        }
        fields.push(per_time);
    }
    let diff = |a: usize, b: usize| -> f64 {
        let mut worst = 0.0f64;
        for (fa, fb) in fields[a].iter().zip(&fields[b]) {
            let d_rho = fa.0.iter().zip(&fb.0).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            let d_u = fa.1.iter().zip(&fb.1).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            worst = worst.max(d_rho + d_u);
        }
        worst
    };
    let mut pairs = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            pairs.push((runs[i].m, runs[j].m, diff(i, j)));
        }
    }
    let consecutive: Vec<f64> = (0..runs.len() - 1).map(|i| diff(i, i + 1)).collect();
    let decreasing = consecutive.windows(2).all(|w| w[1] < w[0]);
    Ok(ChiTable {
        ms: runs.iter().map(|r| r.m).collect(),
        window: (r_max, t_max),
        pairs,
        consecutive,
        decreasing,
        chi_is_one,
    })
}
