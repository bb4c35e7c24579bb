//! Per-snapshot ledger records and the step-by-step builder that fills them.

use crate::solver::LagrangianState;
use crate::Result;

use super::decay::{convergence_metric, decay_values};
use super::energy::{EnergyAccumulator, SnapshotEnergy};
use super::fquantity::{f_diagnostics, f_field, f_norm};
use super::DiagContext;

/// One JSON-lines ledger entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation_visc: f64,
    pub dissipation_bdry: f64,
    pub sink_psi: f64,
    pub sink_g: f64,
    pub sup_psi_w: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub f_norm: f64,
    pub i1: f64,
    pub j1: f64,
    pub j2: f64,
    pub conv_metric: f64,
    pub ineq_violation: f64,
}

impl LedgerRecord {
    /// Field names in export order.
    pub const FIELDS: [&'static str; 15] = [
        "t",
        "energy",
        "dissipation_visc",
        "dissipation_bdry",
        "sink_psi",
        "sink_G",
        "sup_psi_w",
        "v_min",
        "v_max",
        "F_norm",
        "I1",
        "J1",
        "J2",
        "conv_metric",
        "ineq_violation",
    ];

    pub fn values(&self) -> [f64; 15] {
        [
            self.t,
            self.energy,
            self.dissipation_visc,
            self.dissipation_bdry,
            self.sink_psi,
            self.sink_g,
            self.sup_psi_w,
            self.v_min,
            self.v_max,
            self.f_norm,
            self.i1,
            self.j1,
            self.j2,
            self.conv_metric,
            self.ineq_violation,
        ]
    }

    pub fn from_values(v: [f64; 15]) -> Self {
        Self {
            t: v[0],
            energy: v[1],
            dissipation_visc: v[2],
            dissipation_bdry: v[3],
            sink_psi: v[4],
            sink_g: v[5],
            sup_psi_w: v[6],
            v_min: v[7],
            v_max: v[8],
            f_norm: v[9],
            i1: v[10],
            j1: v[11],
            j2: v[12],
            conv_metric: v[13],
            ineq_violation: v[14],
        }
    }
}

/// Builds ledger records from the solver's step callback.
#[derive(Debug, Clone)]
pub struct LedgerBuilder {
    ctx: DiagContext,
    acc: EnergyAccumulator,
    pub records: Vec<LedgerRecord>,
    pub energy: Vec<SnapshotEnergy>,
}

impl LedgerBuilder {
    pub fn new(ctx: DiagContext) -> Self {
        Self {
            acc: EnergyAccumulator::new(ctx.clone()),
            ctx,
            records: Vec::new(),
            energy: Vec::new(),
        }
    }

    fn record(&self, state: &LagrangianState, e: &SnapshotEnergy, f_norm: f64) -> Result<LedgerRecord> {
        let (i1, j1, j2) = decay_values(state, &self.ctx.profile)?;
        Ok(LedgerRecord {
            t: state.t,
            energy: e.terms.energy,
            dissipation_visc: e.terms.visc_weak,
            dissipation_bdry: e.terms.bdry,
            sink_psi: e.terms.sink_psi,
            sink_g: e.terms.sink_g,
            sup_psi_w: e.terms.sup_psi_w,
            v_min: state.v_min(),
            v_max: state.v_max(),
            f_norm,
            i1,
            j1,
            j2,
            conv_metric: convergence_metric(state, &self.ctx.profile)?,
            ineq_violation: e.violation,
        })
    }

    /// Records the initial snapshot.
    pub fn start(&mut self, state: &LagrangianState) -> Result<()> {
        let e = self.acc.start(state)?;
        let f = f_field(state, &self.ctx);
        let f_norm = f_norm(state, &f, self.ctx.m0);
        let rec = self.record(state, &e, f_norm)?;
        self.records.push(rec);
        self.energy.push(e);
        Ok(())
    }

    /// Feeds one solver step.
    pub fn push(&mut self, prev: &LagrangianState, next: &LagrangianState, is_snapshot: bool) -> Result<()> {
        if let Some(e) = self.acc.push(prev, next, is_snapshot)? {
            let f_norm = f_diagnostics(prev, next, &self.ctx)?.norm;
            let rec = self.record(next, &e, f_norm)?;
            self.records.push(rec);
            self.energy.push(e);
        }
        Ok(())
    }

    pub fn eps_total(&self) -> f64 {
        self.acc.eps_total()
    }
}
