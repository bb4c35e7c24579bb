//! Trajectory diagnostics that certify the analytical estimates numerically.
//!
//! Every function here is a pure function of immutable snapshots. Spatial
//! integrals use the trapezoid rule on the solver grid; time integrals use the
//! trapezoid rule over the snapshots handed in.

pub mod chi;
pub mod cutoff;
pub mod decay;
pub mod energy;
pub mod eta_norms;
pub mod fquantity;
pub mod ledger;
pub mod pointwise;
pub mod representation;

use std::sync::Arc;

use crate::model::VERDICT_SLACK;
use crate::solver::{LagrangianState, Simulation};
use crate::stationary::StationaryProfile;
use crate::{Error, Params, Result};

pub use chi::{chi_refinement_study, ChiRun, ChiTable};
pub use decay::{convergence_metric, decay_functionals, decay_values, dyadic_trend, DecayRecord, Trend};
pub use energy::{energy_ledger, energy_terms, EnergyAccumulator, EnergyStep, EnergyTerms, SnapshotEnergy};
pub use eta_norms::{eta_weighted_norms, EtaRecord};
pub use fquantity::{f_diagnostics, f_field, f_norm, FRecord};
pub use ledger::{LedgerBuilder, LedgerRecord};
pub use pointwise::{pointwise_monitors, unit_window_range, PointwiseRecord};
pub use representation::{representation_check, FFunction, Reconstruction, Variant};

/// What every diagnostic needs besides the snapshots.
#[derive(Debug, Clone)]
pub struct DiagContext {
    pub params: Params,
    pub profile: Arc<StationaryProfile>,
    /// Mass of the initial domain.
    pub m0: f64,
    /// Outer radius.
    pub m: f64,
}

impl DiagContext {
    pub fn new(params: Params, profile: Arc<StationaryProfile>, m0: f64, m: f64) -> Self {
        Self { params, profile, m0, m }
    }

    pub fn from_simulation(sim: &Simulation) -> Self {
        Self::new(sim.params, sim.profile.clone(), sim.map.m0, sim.config.m)
    }
}

/// Stationary quantities at a list of radii (clamped to the profile range).
#[derive(Debug, Clone)]
pub struct StationaryField {
    pub rho_t: Vec<f64>,
    pub drho: Vec<f64>,
    pub ddrho: Vec<f64>,
    pub du: Vec<f64>,
    pub vt: Vec<f64>,
    pub ut: Vec<f64>,
}

impl StationaryField {
    pub fn at(profile: &StationaryProfile, r: &[f64]) -> Result<Self> {
        let hi = profile.r_max();
        let mut f = Self {
            rho_t: Vec::with_capacity(r.len()),
            drho: Vec::with_capacity(r.len()),
            ddrho: Vec::with_capacity(r.len()),
            du: Vec::with_capacity(r.len()),
            vt: Vec::with_capacity(r.len()),
            ut: Vec::with_capacity(r.len()),
        };
        for &ri in r {
            let s = profile.sample(ri.clamp(1.0, hi))?;
            f.rho_t.push(s.rho_t);
            f.drho.push(s.drho);
            f.ddrho.push(s.ddrho);
            f.du.push(s.du);
            f.vt.push(s.vt());
            f.ut.push(s.u_t);
        }
        Ok(f)
    }
}

/// `lhs <= rhs + eps` up to the shared relative slack.
pub fn holds_with_slack(lhs: f64, rhs: f64, eps: f64) -> bool {
    lhs <= rhs + eps.abs() + VERDICT_SLACK * lhs.abs().max(rhs.abs())
}

/// Rejects snapshot pairs that do not come from one run in time order.
pub(crate) fn check_pair(prev: &LagrangianState, next: &LagrangianState) -> Result<f64> {
    if prev.len() != next.len() || prev.grid.s_nodes != next.grid.s_nodes {
        return Err(Error::Input("snapshots live on different grids".into()));
    }
    if prev.n != next.n {
        return Err(Error::Input("snapshots have different dimensions".into()));
    }
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::Input(format!(
            "snapshots must be in increasing time (got {} then {})",
            prev.t, next.t
        )));
    }
    Ok(dt)
}

/// `max |a_i|`.
pub(crate) fn sup_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
