//! Energy balance of the perturbation `(phi, psi)` along a trajectory.
//!
//! The exact balance reads
//! `d/dt int E + |u_b| G(v, vt)/v |_{x=B} + mu int {r^{2n-2} psi_x^2 / v + (n-1) v psi^2 / r^2}
//!  + int {(gamma-1) rho_t(1) |u_b| rho_t' / (r^{n-1} rho_t^2) G + ut' psi^2} = int L phi psi`
//! with `L = mu u_b rho_t(1) d/dr(r^{1-n} vt')`. Its discrete defect is the
//! discretization error `eps_disc`; the inequality form keeps the boundary term
//! and the viscous term with `(n-1)/2` on `v psi^2 / r^2`.

use crate::model::energy_distance_G;
use crate::numeric::{derivative, trapezoid};
use crate::solver::LagrangianState;
use crate::Result;

use super::{check_pair, holds_with_slack, DiagContext, StationaryField};

/// Spatial energy integrals of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    pub t: f64,
    /// `int E dx`.
    pub energy: f64,
    /// `mu int {r^{2n-2} psi_x^2 / v + (n-1) v psi^2 / r^2}`.
    pub visc_full: f64,
    /// `mu int {r^{2n-2} psi_x^2 / v + (n-1)/2 v psi^2 / r^2}`.
    pub visc_weak: f64,
    /// `|u_b| G(v, vt) / v` at `x = B(t)`.
    pub bdry: f64,
    /// Exact sink `int {(gamma-1) rho_t(1) |u_b| rho_t' / (r^{n-1} rho_t^2) G + ut' psi^2}`.
    pub sink_exact: f64,
    /// `int L phi psi`.
    pub forcing: f64,
    /// `|u_b| int psi^2 / r^n`.
    pub sink_psi: f64,
    /// `|u_b|^3 int G / r^{3n-2}`.
    pub sink_g: f64,
    /// `sup r^{n-2} psi^2`.
    pub sup_psi_w: f64,
}

/// Evaluates every spatial energy integral of a snapshot.
pub fn energy_terms(state: &LagrangianState, ctx: &DiagContext) -> Result<EnergyTerms> {
    let p = &ctx.params;
    let n = state.n as f64;
    let x = state.x();
    let psi = state.psi();
    let phi = state.phi();
    let field = StationaryField::at(&ctx.profile, &state.r)?;
    let psi_x = derivative(&x, &psi);
    let ub = p.u_b.abs();
    let rho1 = ctx.profile.rho1;
    let len = x.len();
    let mut e = vec![0.0; len];
    let mut vf = vec![0.0; len];
    let mut vw = vec![0.0; len];
    let mut sk = vec![0.0; len];
    let mut fo = vec![0.0; len];
    let mut sp = vec![0.0; len];
    let mut sg = vec![0.0; len];
    let mut sup = 0.0f64;
    for i in 0..len {
        let (r, v, ps) = (state.r[i], state.v[i], psi[i]);
        let g = energy_distance_G(v, state.vt[i], p)?;
        let rn1 = r.powf(n - 1.0);
        let grad = rn1 * rn1 * psi_x[i] * psi_x[i] / v;
        let zero = (n - 1.0) * v * ps * ps / (r * r);
        let (rt, dr, ddr) = (field.rho_t[i], field.drho[i], field.ddrho[i]);
        let dv = -dr / (rt * rt);
        let ddv = -ddr / (rt * rt) + 2.0 * dr * dr / (rt * rt * rt);
        let l_op = p.mu * p.u_b * rho1 * (ddv / rn1 - (n - 1.0) * dv / (rn1 * r));
        e[i] = 0.5 * ps * ps + g;
        vf[i] = p.mu * (grad + zero);
        vw[i] = p.mu * (grad + 0.5 * zero);
        sk[i] = (p.gamma - 1.0) * rho1 * ub * dr / (rn1 * rt * rt) * g + field.du[i] * ps * ps;
        fo[i] = l_op * phi[i] * ps;
        sp[i] = ub * ps * ps / r.powf(n);
        sg[i] = ub.powi(3) * g / r.powf(3.0 * n - 2.0);
        sup = sup.max(r.powf(n - 2.0) * ps * ps);
    }
    let bdry = ub * energy_distance_G(state.v[0], state.vt[0], p)? / state.v[0];
    Ok(EnergyTerms {
        t: state.t,
        energy: trapezoid(&x, &e),
        visc_full: trapezoid(&x, &vf),
        visc_weak: trapezoid(&x, &vw),
        bdry,
        sink_exact: trapezoid(&x, &sk),
        forcing: trapezoid(&x, &fo),
        sink_psi: trapezoid(&x, &sp),
        sink_g: trapezoid(&x, &sg),
        sup_psi_w: sup,
    })
}

/// Balance over one interval between two snapshots of the same run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyStep {
    pub t0: f64,
    pub t1: f64,
    /// `int E(t1) - int E(t0)`.
    pub energy_change: f64,
    /// Time integral of boundary, full viscous and exact sink terms.
    pub dissipation: f64,
    /// Time integral of the forcing `int L phi psi`.
    pub forcing: f64,
    /// Defect of the exact balance: the discretization error of the step.
    pub defect: f64,
    /// `energy_change + int (bdry + visc_weak) dt`: positive parts violate the inequality form.
    pub violation: f64,
}

fn step_from_terms(a: &EnergyTerms, b: &EnergyTerms) -> EnergyStep {
    let h = 0.5 * (b.t - a.t);
    let dissipation = h * (a.bdry + a.visc_full + a.sink_exact + b.bdry + b.visc_full + b.sink_exact);
    let forcing = h * (a.forcing + b.forcing);
    let energy_change = b.energy - a.energy;
    EnergyStep {
        t0: a.t,
        t1: b.t,
        energy_change,
        dissipation,
        forcing,
        defect: energy_change + dissipation - forcing,
        violation: energy_change + h * (a.bdry + a.visc_weak + b.bdry + b.visc_weak),
    }
}

/// Discrete energy balance between two snapshots of one run.
pub fn energy_ledger(prev: &LagrangianState, next: &LagrangianState, ctx: &DiagContext) -> Result<EnergyStep> {
    check_pair(prev, next)?;
    Ok(step_from_terms(&energy_terms(prev, ctx)?, &energy_terms(next, ctx)?))
}

/// Energy bookkeeping at one snapshot, summed over the steps since the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotEnergy {
    pub terms: EnergyTerms,
    /// `sum |defect|` since the previous snapshot.
    pub eps_disc: f64,
    /// Inequality violation since the previous snapshot.
    pub violation: f64,
    /// `int E` change since the previous snapshot.
    pub energy_change: f64,
    /// `sum |defect|` since the start of the run.
    pub eps_total: f64,
    /// `violation <= eps_disc` up to the relative slack.
    pub inequality_holds: bool,
    /// `energy_change <= eps_disc` up to the relative slack.
    pub nonincreasing: bool,
}

/// Accumulates the balance step by step and reports it at snapshots.
#[derive(Debug, Clone)]
pub struct EnergyAccumulator {
    ctx: DiagContext,
    last: Option<EnergyTerms>,
    eps: f64,
    violation: f64,
    change: f64,
    eps_total: f64,
}

impl EnergyAccumulator {
    pub fn new(ctx: DiagContext) -> Self {
        Self {
            ctx,
            last: None,
            eps: 0.0,
            violation: 0.0,
            change: 0.0,
            eps_total: 0.0,
        }
    }

    /// Record for the initial snapshot; also primes the accumulator.
    pub fn start(&mut self, state: &LagrangianState) -> Result<SnapshotEnergy> {
        let terms = energy_terms(state, &self.ctx)?;
        self.last = Some(terms);
        Ok(SnapshotEnergy {
            terms,
            eps_disc: 0.0,
            violation: 0.0,
            energy_change: 0.0,
            eps_total: 0.0,
            inequality_holds: true,
            nonincreasing: true,
        })
    }

    /// Feeds one solver step; returns the snapshot record when `is_snapshot`.
    pub fn push(
        &mut self,
        prev: &LagrangianState,
        next: &LagrangianState,
        is_snapshot: bool,
    ) -> Result<Option<SnapshotEnergy>> {
        check_pair(prev, next)?;
        let a = match self.last {
            Some(t) if t.t == prev.t => t,
            _ => energy_terms(prev, &self.ctx)?,
        };
        let b = energy_terms(next, &self.ctx)?;
        let st = step_from_terms(&a, &b);
        self.eps += st.defect.abs();
        self.eps_total += st.defect.abs();
        self.violation += st.violation;
        self.change += st.energy_change;
        self.last = Some(b);
        if !is_snapshot {
            return Ok(None);
        }
        let rec = SnapshotEnergy {
            terms: b,
            eps_disc: self.eps,
            violation: self.violation,
            energy_change: self.change,
            eps_total: self.eps_total,
            inequality_holds: holds_with_slack(self.violation, 0.0, self.eps),
            nonincreasing: holds_with_slack(self.change, 0.0, self.eps),
        };
        self.eps = 0.0;
        self.violation = 0.0;
        self.change = 0.0;
        Ok(Some(rec))
    }

    pub fn eps_total(&self) -> f64 {
        self.eps_total
    }
}
