//! Reconstruction of `v(x, tau)^gamma` from the exponential representation
//! formulas, using only quantities stored along a trajectory.
//!
//! All three variants rest on the pointwise identity
//! `(psi / r^{n-1} - f(r))_s + (n-1) psi^2 / r^n - (n-1) ut^2 / r^n = (mu (log v)_s - K v^{-gamma})_y`,
//! tested against a cut-off in `y` and integrated in time. With `Y = v^gamma A D`
//! one gets `Y' = (K gamma / mu) A D`, hence
//! `v(x, tau)^gamma = (v(x, t0)^gamma + (K gamma / mu) int_{t0}^tau A D ds) / (A D)(tau)`.
//!
//! * `Interior`: cut-off `zeta_{k,t}` on `[x, M0]`, window `[B(t)+k, B(t)+k+1]`.
//! * `NearM0`: no cut-off on `[x, M0]`; the window is the single point `M0`, which
//!   contributes `v(M0, s)^{-gamma}` and `log v(M0, s)`.
//! * `Outer`: cut-off `xi_{k,t}` on `[B(s), x]`, window `[M(t)-k-1, M(t)-k]`,
//!   starting at the entry time `t_x = (x - M0) / (rho_t(1) |u_b|)` with
//!   `v(x, t_x) = vt(m)`.

use crate::lagrangian::radius_powers;
use crate::numeric::{cumulative_trapezoid, interp_linear, locate, trapezoid};
use crate::solver::LagrangianState;
use crate::stationary::StationaryProfile;
use crate::{Error, Result};

use super::cutoff::{xi, zeta};
use super::DiagContext;

/// `f(r) = rho_t(1) |u_b| int_1^r vt'(s) / s^{2(n-1)} ds`, tabulated on the profile nodes.
///
/// Since `rho_t' > 0`, `vt' < 0` and `f` is nonincreasing with `f(1) = 0`.
#[derive(Debug, Clone)]
pub struct FFunction {
    r: Vec<f64>,
    f: Vec<f64>,
}

impl FFunction {
    pub fn new(profile: &StationaryProfile) -> Self {
        let n = profile.params.n as f64;
        let c = profile.rho1 * profile.params.u_b.abs();
        let integrand: Vec<f64> = (0..profile.r_nodes.len())
            .map(|i| {
                let (r, rt) = (profile.r_nodes[i], profile.rho_t[i]);
                -c * profile.drho[i] / (rt * rt) / r.powf(2.0 * n - 2.0)
            })
            .collect();
        let f = cumulative_trapezoid(&profile.r_nodes, &integrand);
        Self {
            r: profile.r_nodes.clone(),
            f,
        }
    }

    /// `f(r)`, held constant past the tabulated range.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.r[0] {
            return self.f[0];
        }
        if r >= *self.r.last().unwrap() {
            return *self.f.last().unwrap();
        }
        interp_linear(&self.r, &self.f, r)
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.r, &self.f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Interior,
    Outer,
    NearM0,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Interior => "interior",
            Variant::Outer => "outer",
            Variant::NearM0 => "near-M0",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub variant: Variant,
    pub x: f64,
    pub t: f64,
    pub k: usize,
    /// Reconstructed and solver values of `v(x, t)^gamma`.
    pub reconstructed: f64,
    pub actual: f64,
    pub rel_error: f64,
    /// Largest relative error over every stored time in `[t0, t]`.
    pub max_rel_error: f64,
    /// Number of time samples used.
    pub samples: usize,
}

/// One snapshot seen as a function of the mass coordinate.
struct Field<'a> {
    x: Vec<f64>,
    rn: Vec<f64>,
    psi: Vec<f64>,
    state: &'a LagrangianState,
}

impl<'a> Field<'a> {
    fn new(state: &'a LagrangianState) -> Self {
        let x = state.x();
        let rn = radius_powers(&x, &state.v, state.n);
        Self {
            psi: state.psi(),
            x,
            rn,
            state,
        }
    }

    /// `(v, psi, r)` at `y`, with `r` from the same cell-average rule as the solver.
    fn at(&self, y: f64) -> (f64, f64, f64) {
        let k = locate(&self.x, y);
        let v = interp_linear(&self.x, &self.state.v, y);
        let psi = interp_linear(&self.x, &self.psi, y);
        let vbar = 0.5 * (self.state.v[k] + self.state.v[k + 1]);
        let nf = self.state.n as f64;
        let r = (self.rn[k] + nf * (y - self.x[k]) * vbar).powf(1.0 / nf);
        (v, psi, r)
    }

    /// Trapezoid of `g(y, v, psi, r)` over `[a, b]` on the nodes inside plus `extra` breakpoints.
    fn integrate(&self, a: f64, b: f64, extra: &[f64], g: &dyn Fn(f64, f64, f64, f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut pts: Vec<f64> = vec![a, b];
        pts.extend(extra.iter().copied().filter(|&e| e > a && e < b));
        pts.extend(self.x.iter().copied().filter(|&xi| xi > a && xi < b));
        pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        pts.dedup();
        let vals: Vec<f64> = pts
            .iter()
            .map(|&y| {
                let (v, psi, r) = self.at(y);
                g(y, v, psi, r)
            })
            .collect();
        trapezoid(&pts, &vals)
    }
}

/// Per-snapshot scalars entering the formula.
#[derive(Debug, Clone, Copy, Default)]
struct Sample {
    t: f64,
    /// `int w (psi / r^{n-1} - f)`.
    p: f64,
    /// `int w psi^2 / r^n`.
    q: f64,
    /// `int w ut^2 / r^n`.
    u: f64,
    /// Window integral of `v^{-gamma}` (or its point value).
    kw: f64,
    /// Window integral of `log v` (or its point value).
    lw: f64,
    /// `v(x, s)`.
    vx: f64,
}

impl Sample {
    fn lerp(a: &Sample, b: &Sample, t: f64) -> Sample {
        let w = (t - a.t) / (b.t - a.t);
        let l = |p: f64, q: f64| p + w * (q - p);
        Sample {
            t,
            p: l(a.p, b.p),
            q: l(a.q, b.q),
            u: l(a.u, b.u),
            kw: l(a.kw, b.kw),
            lw: l(a.lw, b.lw),
            vx: l(a.vx, b.vx),
        }
    }
}

fn precondition(variant: Variant, msg: String) -> Error {
    Error::Precondition(format!("{} representation: {msg}", variant.name()))
}

/// Reconstructs `v(x, t)^gamma` from the trajectory and compares it with the solver.
///
/// `traj` holds the stored snapshots of one run in time order, starting at `t = 0`;
/// `t` must be one of their times.
pub fn representation_check(
    traj: &[LagrangianState],
    ctx: &DiagContext,
    x: f64,
    t: f64,
    k: usize,
    variant: Variant,
) -> Result<Reconstruction> {
    let p = &ctx.params;
    let n = p.n as f64;
    let m0 = ctx.m0;
    let end = traj
        .iter()
        .position(|s| (s.t - t).abs() <= 1e-12 * t.max(1.0))
        .ok_or_else(|| precondition(variant, format!("no stored snapshot at t = {t}")))?;
    if traj[0].t != 0.0 {
        return Err(precondition(variant, "trajectory must start at t = 0".into()));
    }
    let snap_t = &traj[end];
    let (b_t, m_t) = (snap_t.grid.b, snap_t.grid.m);
    let kf = k as f64;
    // Integration range, cut-off, breakpoints and window for the chosen variant.
    let (t0, sigma) = match variant {
        Variant::Interior => {
            if k == 0 || x < b_t + kf - 1.0 || x > b_t + kf || x > m0 - 2.0 {
                return Err(precondition(
                    variant,
                    format!("x = {x} outside [B+k-1, B+k] with B = {b_t}, k = {k}, or above M0 - 2 = {}", m0 - 2.0),
                ));
            }
            (0.0, 1.0)
        }
        Variant::NearM0 => {
            if !(x > m0 - 2.0 && x <= m0) || x < b_t {
                return Err(precondition(variant, format!("x = {x} outside (M0 - 2, M0] with M0 = {m0}")));
            }
            (0.0, 1.0)
        }
        Variant::Outer => {
            if k == 0 || x < m0 || x > m_t || x < m_t - kf || x > m_t - kf + 1.0 || b_t > m_t - kf - 1.0 {
                return Err(precondition(
                    variant,
                    format!("x = {x} outside [M-k, M-k+1] within [M0, M] with M = {m_t}, k = {k}"),
                ));
            }
            ((x - m0) / (ctx.profile.rho1 * p.u_b.abs()), -1.0)
        }
    };
    let ff = FFunction::new(&ctx.profile);
    let profile = &ctx.profile;
    let r_hi = profile.r_max();
    // A failed profile lookup turns into NaN and is reported after the sweep.
    let ut_at = |r: f64| profile.sample(r.clamp(1.0, r_hi)).map_or(f64::NAN, |s| s.u_t);
    let gamma = p.gamma;

    let mut samples = Vec::new();
    for snap in &traj[..=end] {
        if snap.t < t0 && variant == Variant::Outer {
            continue;
        }
        let field = Field::new(snap);
        let (lo, hi, extra, window): (f64, f64, Vec<f64>, Option<(f64, f64)>) = match variant {
            Variant::Interior => (x, b_t + kf + 1.0, vec![b_t + kf], Some((b_t + kf, b_t + kf + 1.0))),
            Variant::NearM0 => (x, m0, vec![], None),
            Variant::Outer => {
                let lo = (m_t - kf - 1.0).max(snap.grid.b);
                (lo, x, vec![m_t - kf], Some((m_t - kf - 1.0, m_t - kf)))
            }
        };
        if hi > snap.grid.m || lo < snap.grid.b {
            return Err(precondition(
                variant,
                format!("integration range [{lo}, {hi}] leaves the domain at t = {}", snap.t),
            ));
        }
        let weight = |y: f64| match variant {
            Variant::Interior => zeta(y, b_t, kf),
            Variant::NearM0 => 1.0,
            Variant::Outer => xi(y, m_t, kf),
        };
        let p_int = field.integrate(lo, hi, &extra, &|y, _v, psi, r| {
            weight(y) * (psi / r.powf(n - 1.0) - ff.eval(r))
        });
        let q_int = field.integrate(lo, hi, &extra, &|y, _v, psi, r| weight(y) * psi * psi / r.powf(n));
        let u_int = field.integrate(lo, hi, &extra, &|y, _v, _psi, r| {
            let u = ut_at(r);
            weight(y) * u * u / r.powf(n)
        });
        let (kw, lw) = match window {
            Some((a, b)) => (
                field.integrate(a, b, &[], &|_, v, _, _| v.powf(-gamma)),
                field.integrate(a, b, &[], &|_, v, _, _| v.ln()),
            ),
            None => {
                let v = field.at(m0).0;
                (v.powf(-gamma), v.ln())
            }
        };
        samples.push(Sample {
            t: snap.t,
            p: p_int,
            q: q_int,
            u: u_int,
            kw,
            lw,
            vx: field.at(x).0,
        });
    }
    let y0 = match variant {
        Variant::Outer => {
            if samples.len() < 2 {
                return Err(Error::InsufficientData(format!(
                    "outer representation needs stored snapshots after t_x = {t0}"
                )));
            }
            let vm = *snap_t.v.last().unwrap();
            if samples[0].t > t0 {
                let mut first = Sample::lerp(&samples[0], &samples[1], t0);
                first.vx = vm;
                samples.insert(0, first);
            }
            vm.powf(gamma)
        }
        _ => samples[0].vx.powf(gamma),
    };
    let count = samples.len();
    if count < 5 {
        return Err(Error::InsufficientData(format!(
            "{} time samples in [{t0}, {t}]; at least 5 are needed",
            count
        )));
    }
    let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let col = |f: &dyn Fn(&Sample) -> f64| -> Vec<f64> { samples.iter().map(f).collect() };
    let ck = cumulative_trapezoid(&ts, &col(&|s| s.kw));
    let cu = cumulative_trapezoid(&ts, &col(&|s| s.u));
    let cq = cumulative_trapezoid(&ts, &col(&|s| s.q));
    let (p0, l0) = (samples[0].p, samples[0].lw);
    let (kg, mu) = (p.k * gamma, p.mu);
    let ad: Vec<f64> = (0..count)
        .map(|j| {
            let s = &samples[j];
            (kg / mu * ck[j] - sigma * (n - 1.0) * gamma / mu * cu[j]
                + sigma * gamma / mu * (s.p - p0)
                + sigma * (n - 1.0) * gamma / mu * cq[j]
                - gamma * (s.lw - l0))
                .exp()
        })
        .collect();
    let cad = cumulative_trapezoid(&ts, &ad);
    if ad.iter().any(|a| !a.is_finite()) {
        return Err(Error::Numerical(format!(
            "{} representation at x = {x}: non-finite exponential factor",
            variant.name()
        )));
    }
    let mut max_rel = 0.0f64;
    let mut last = (0.0, 0.0);
    for j in 0..count {
        let rec = (y0 + kg / mu * cad[j]) / ad[j];
        let act = samples[j].vx.powf(gamma);
        max_rel = max_rel.max((rec - act).abs() / act);
        last = (rec, act);
    }
    Ok(Reconstruction {
        variant,
        x,
        t,
        k,
        reconstructed: last.0,
        actual: last.1,
        rel_error: (last.0 - last.1).abs() / last.1,
        max_rel_error: max_rel,
        samples: count,
    })
}
