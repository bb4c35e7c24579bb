//! Time integration of the Lagrangian system on the moving mass interval
//! `[B(t), M(t)]`.
//!
//! Nodes sit at fixed normalized positions `s` with `x = B + s (M - B)`, so
//! time derivatives at fixed `s` pick up the mesh-advection term `w f_x`,
//! `w = B' + s (M' - B')`. Per step: Heun predictor-corrector for the
//! pressure, transport and boundary-curve terms, and a theta-weighted
//! tridiagonal solve for the viscous term.

use std::sync::Arc;

use crate::diagnostics::cutoff::phi_m;
use crate::error::{Error, Result};
use crate::lagrangian::{mass_coordinate_X, outer_mass_M, radii, CoordinateMap, MassGrid};
use crate::numeric::{fd_weights, solve_tridiagonal};
use crate::quadrature::integrate;
use crate::stationary::StationaryProfile;
use crate::Params;

/// Discretization and output controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Outer radius of the annulus.
    pub m: f64,
    /// Node count.
    pub nodes: usize,
    pub cfl: f64,
    pub t_end: f64,
    /// Implicitness of the viscous term.
    pub theta: f64,
    /// Snapshot every this many steps (ignored when `snapshot_dt` is set).
    pub snapshot_stride: usize,
    /// Snapshot at exact multiples of this interval.
    pub snapshot_dt: Option<f64>,
    /// Upper bound on the step size.
    pub dt_max: Option<f64>,
    /// Step-halving retries after a positivity loss.
    pub max_retries: usize,
    /// Ratio of the outermost radial spacing to the uniform one. Mass entering at
    /// `r = m` forms a layer of width `M'(t) t` that uniform cells do not resolve.
    pub outer_grading: f64,
}

impl SolverConfig {
    pub fn new(m: f64, nodes: usize, t_end: f64) -> Self {
        Self {
            m,
            nodes,
            cfl: 0.5,
            t_end,
            theta: 0.5,
            snapshot_stride: 10,
            snapshot_dt: None,
            dt_max: None,
            max_retries: 8,
            outer_grading: 1.0 / 16.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::Precondition("need at least 16 nodes".into()));
        }
        if !(self.theta >= 0.5 && self.theta <= 1.0) {
            return Err(Error::Precondition("theta must lie in [0.5, 1]".into()));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Precondition("cfl must lie in (0, 1)".into()));
        }
        if !(self.m > 2.0) || !self.m.is_finite() {
            return Err(Error::Precondition("m must exceed 2".into()));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Precondition("t_end must be nonnegative".into()));
        }
        if !(self.outer_grading > 0.0 && self.outer_grading <= 1.0) {
            return Err(Error::Precondition("outer grading must lie in (0, 1]".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Precondition("snapshot stride must be positive".into()));
        }
        if let Some(dt) = self.snapshot_dt {
            if !(dt > 0.0) {
                return Err(Error::Precondition("snapshot_dt must be positive".into()));
            }
        }
        if let Some(dt) = self.dt_max {
            if !(dt > 0.0) {
                return Err(Error::Precondition("dt_max must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Lagrangian fields at one time.
#[derive(Debug, Clone)]
pub struct LagrangianState {
    pub t: f64,
    pub n: usize,
    pub grid: MassGrid,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// Radius per node from the discrete mass relation.
    pub r: Vec<f64>,
    /// Stationary `vt(r)` and `ut(r)` at the node radii.
    pub vt: Vec<f64>,
    pub ut: Vec<f64>,
    /// Steps taken since the initial state.
    pub step: usize,
}

impl LagrangianState {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn x(&self) -> Vec<f64> {
        self.grid.xs()
    }

    /// `phi = v - vt(r)`.
    pub fn phi(&self) -> Vec<f64> {
        self.v.iter().zip(&self.vt).map(|(a, b)| a - b).collect()
    }

    /// `psi = u - ut(r)`.
    pub fn psi(&self) -> Vec<f64> {
        self.u.iter().zip(&self.ut).map(|(a, b)| a - b).collect()
    }

    /// `sup |phi| + sup |psi|`.
    pub fn deviation(&self) -> f64 {
        let sp = self.phi().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let ss = self.psi().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        sp + ss
    }

    pub fn v_min(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn v_max(&self) -> f64 {
        self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV header for [`Self::rows`].
    pub const CSV_HEADER: [&'static str; 8] = ["t", "x", "s", "r", "v", "u", "phi", "psi"];

    pub fn rows(&self) -> Vec<[f64; 8]> {
        let x = self.x();
        (0..self.len())
            .map(|i| {
                [
                    self.t,
                    x[i],
                    self.grid.s_nodes[i],
                    self.r[i],
                    self.v[i],
                    self.u[i],
                    self.v[i] - self.vt[i],
                    self.u[i] - self.ut[i],
                ]
            })
            .collect()
    }
}

type Field = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Cut-off modified Eulerian initial data on `[1, m]`.
#[derive(Clone)]
pub struct InitialData {
    pub m: f64,
    pub profile: Arc<StationaryProfile>,
    rho0: Field,
    u0: Field,
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialData").field("m", &self.m).finish_non_exhaustive()
    }
}

impl InitialData {
    /// `rho_m^0 = (rho0 - rho_t) phi_m + rho_t`.
    pub fn rho(&self, r: f64) -> f64 {
        let phi = phi_m(r, self.m);
        if phi == 1.0 {
            return (self.rho0)(r);
        }
        let rt = self.profile.sample(r).map(|s| s.rho_t).unwrap_or(f64::NAN);
        if phi == 0.0 {
            return rt;
        }
        ((self.rho0)(r) - rt) * phi + rt
    }

    /// `u_m^0 = (u0 - ut) phi_m + ut`.
    pub fn u(&self, r: f64) -> f64 {
        let phi = phi_m(r, self.m);
        if phi == 1.0 {
            return (self.u0)(r);
        }
        let ut = self.profile.sample(r).map(|s| s.u_t).unwrap_or(f64::NAN);
        if phi == 0.0 {
            return ut;
        }
        ((self.u0)(r) - ut) * phi + ut
    }
}

/// Blends `(rho0, u0)` into the stationary profile with `phi_m`.
pub fn build_initial_data(
    rho0: impl Fn(f64) -> f64 + Send + Sync + 'static,
    u0: impl Fn(f64) -> f64 + Send + Sync + 'static,
    profile: Arc<StationaryProfile>,
    m: f64,
) -> Result<InitialData> {
    if !(m > 2.0) {
        return Err(Error::Precondition("m must exceed 2".into()));
    }
    if m > profile.r_max() {
        return Err(Error::Precondition(format!(
            "profile ends at {} before m = {m}",
            profile.r_max()
        )));
    }
    let init = InitialData {
        m,
        profile,
        rho0: Arc::new(rho0),
        u0: Arc::new(u0),
    };
    let samples = 4000;
    for j in 0..=samples {
        let r = 1.0 + (m - 1.0) * j as f64 / samples as f64;
        let rho = init.rho(r);
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("initial density {rho} at r = {r} is not positive")));
        }
        if !init.u(r).is_finite() {
            return Err(Error::Domain(format!("initial velocity is not finite at r = {r}")));
        }
    }
    Ok(init)
}

/// Named initial perturbations of the stationary profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialFamily {
    Stationary,
    /// `rho_t + a_rho exp(-((r-c)/w)^2)`, velocity bump damped at `r = 1`.
    GaussianBump {
        center: f64,
        width: f64,
        amp_rho: f64,
        amp_u: f64,
    },
    /// `(1 - y^2)^4` bump on `[c - w, c + w]`.
    CompactBump {
        center: f64,
        width: f64,
        amp_rho: f64,
        amp_u: f64,
    },
}

impl InitialFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Stationary => "stationary",
            Self::GaussianBump { .. } => "gaussian-bump",
            Self::CompactBump { .. } => "compact-bump",
        }
    }

    /// The standard perturbed run: Gaussian density bump of amplitude `0.3 rho_plus`.
    pub fn standard(rho_plus: f64) -> Self {
        Self::GaussianBump {
            center: 6.0,
            width: 2.0,
            amp_rho: 0.3 * rho_plus,
            amp_u: 0.0,
        }
    }
}

/// Initial data of a named family on top of `profile`.
pub fn family_initial_data(family: InitialFamily, profile: Arc<StationaryProfile>, m: f64) -> Result<InitialData> {
    let p1 = profile.clone();
    let p2 = profile.clone();
    let rho_t = move |r: f64| p1.sample(r).map(|s| s.rho_t).unwrap_or(f64::NAN);
    let u_t = move |r: f64| p2.sample(r).map(|s| s.u_t).unwrap_or(f64::NAN);
    match family {
        InitialFamily::Stationary => build_initial_data(rho_t, u_t, profile, m),
        InitialFamily::GaussianBump {
            center,
            width,
            amp_rho,
            amp_u,
        } => {
            if !(width > 0.0) {
                return Err(Error::Precondition("bump width must be positive".into()));
            }
            let bump = move |r: f64| (-((r - center) / width).powi(2)).exp();
            let damp = move |r: f64| -((-((r - 1.0) / width).powi(2)).exp_m1());
            build_initial_data(
                move |r| rho_t(r) + amp_rho * bump(r),
                move |r| u_t(r) + amp_u * bump(r) * damp(r),
                profile,
                m,
            )
        }
        InitialFamily::CompactBump {
            center,
            width,
            amp_rho,
            amp_u,
        } => {
            if !(width > 0.0) {
                return Err(Error::Precondition("bump width must be positive".into()));
            }
            if center - width < 1.0 {
                return Err(Error::Precondition("compact bump must stay inside r > 1".into()));
            }
            let bump = move |r: f64| {
                let y = (r - center) / width;
                if y.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - y * y).powi(4)
                }
            };
            build_initial_data(
                move |r| rho_t(r) + amp_rho * bump(r),
                move |r| u_t(r) + amp_u * bump(r),
                profile,
                m,
            )
        }
    }
}

/// Compatibility residuals of the initial data at `r = 1`.
#[derive(Debug, Clone, Copy)]
pub struct CompatibilityRecord {
    /// `|u_0(1) - u_b|`.
    pub velocity_mismatch: f64,
    /// `mu (r^{1-n} (r^{n-1} u)_r)_r - P(rho)_r - rho u u_r` at `r = 1`.
    pub momentum_residual: f64,
    pub tolerance: f64,
    pub passes: bool,
}

/// Evaluates both compatibility conditions with one-sided five-point
/// differences of spacing `h` at `r = 1`.
pub fn check_compatibility(init: &InitialData, params: &Params, h: f64, tol: f64) -> Result<CompatibilityRecord> {
    if !(h > 0.0) || 1.0 + 4.0 * h > init.m {
        return Err(Error::InsufficientData(format!(
            "stencil spacing {h} leaves fewer than five nodes in [1, m]"
        )));
    }
    let n = params.n as f64;
    let nodes: Vec<f64> = (0..5).map(|j| 1.0 + h * j as f64).collect();
    let w = fd_weights(1.0, &nodes, 2);
    let d = |f: &dyn Fn(f64) -> f64, k: usize| -> f64 { (0..5).map(|j| w[k][j] * f(nodes[j])).sum() };
    let g = |r: f64| r.powf(n - 1.0) * init.u(r);
    let pressure = |r: f64| params.k * init.rho(r).powf(params.gamma);
    let (g1, g2) = (d(&g, 1), d(&g, 2));
    // (r^{1-n} g_r)_r at r = 1.
    let visc = params.mu * (g2 + (1.0 - n) * g1);
    let u1 = init.u(1.0);
    let rho1 = init.rho(1.0);
    let du = d(&|r| init.u(r), 1);
    let residual = visc - d(&pressure, 1) - rho1 * u1 * du;
    let mismatch = (u1 - params.u_b).abs();
    Ok(CompatibilityRecord {
        velocity_mismatch: mismatch,
        momentum_residual: residual.abs(),
        tolerance: tol,
        passes: mismatch <= tol && residual.abs() <= tol,
    })
}

/// `g(xi) = xi + (1 - a)(1 - xi) xi^4`: `g'(0) = 1`, `g'(1) = a`, `g' >= a` in between.
fn outer_grading_map(xi: f64, a: f64) -> f64 {
    xi + (1.0 - a) * (1.0 - xi) * xi.powi(4)
}

/// Fixed normalized nodes: the stationary mass fraction at radii that are uniform
/// near `r = 1` and refined by the factor `grading` towards `r = m`.
pub fn stationary_s_nodes(profile: &StationaryProfile, m: f64, nodes: usize, grading: f64) -> Result<Vec<f64>> {
    if !(grading > 0.0 && grading <= 1.0) {
        return Err(Error::Precondition("outer grading must lie in (0, 1]".into()));
    }
    let n = profile.params.n;
    let total = mass_coordinate_X(&profile.r_nodes, &profile.rho_t, m, 0.0, n)?;
    let mut s = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let xi = i as f64 / (nodes - 1) as f64;
        let r = 1.0 + (m - 1.0) * outer_grading_map(xi, grading);
        s.push(mass_coordinate_X(&profile.r_nodes, &profile.rho_t, r, 0.0, n)? / total);
    }
    s[0] = 0.0;
    s[nodes - 1] = 1.0;
    Ok(s)
}

/// One running simulation: parameters, reference profile, boundary curves and state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub params: Params,
    pub profile: Arc<StationaryProfile>,
    pub config: SolverConfig,
    pub map: CoordinateMap,
    pub state: LagrangianState,
    /// `(vt(m), ut(m))`, the right boundary values.
    pub outer_values: (f64, f64),
    weights: StencilWeights,
}

/// Difference weights on the fixed `s` nodes (scaled by `1/L` to act in `x`).
#[derive(Debug, Clone)]
struct StencilWeights {
    /// First-derivative weights and the offset of their first node.
    central: Vec<(usize, [f64; 3])>,
    /// Forward-biased first-derivative weights for the mesh advection.
    forward: Vec<(usize, [f64; 3])>,
}

impl StencilWeights {
    fn new(s: &[f64]) -> Self {
        let n = s.len();
        let mk = |i: usize, lo: usize| -> (usize, [f64; 3]) {
            let w = fd_weights(s[i], &s[lo..lo + 3], 1);
            (lo, [w[1][0], w[1][1], w[1][2]])
        };
        let central = (0..n).map(|i| mk(i, i.saturating_sub(1).min(n - 3))).collect();
        let forward = (0..n).map(|i| mk(i, i.min(n - 3))).collect();
        Self { central, forward }
    }

    fn apply(w: &(usize, [f64; 3]), f: &[f64], inv_len: f64) -> f64 {
        let (lo, c) = w;
        (c[0] * f[*lo] + c[1] * f[lo + 1] + c[2] * f[lo + 2]) * inv_len
    }
}

/// Geometry of one stage.
struct Stage {
    x: Vec<f64>,
    rn1: Vec<f64>,
    w: Vec<f64>,
    inv_len: f64,
}

/// Mass below each radius of the initial data, tabulated with one 15-point
/// Gauss–Kronrod rule per cell of a fine uniform grid.
struct MassTable {
    r: Vec<f64>,
    cum: Vec<f64>,
}

impl MassTable {
    fn new(f: &dyn Fn(f64) -> f64, m: f64, cells: usize) -> Result<Self> {
        let r: Vec<f64> = (0..=cells).map(|j| 1.0 + (m - 1.0) * j as f64 / cells as f64).collect();
        let mut cum = vec![0.0; cells + 1];
        for j in 0..cells {
            let q = integrate(f, r[j], r[j + 1], 0.0, 1e-14).or_else(|_| integrate(f, r[j], r[j + 1], 1e-13, 1e-10))?;
            cum[j + 1] = cum[j] + q.value;
        }
        Ok(Self { r, cum })
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Radius whose mass equals `x`, by safeguarded Newton inside one cell.
    fn invert(&self, f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
        let j = crate::numeric::locate(&self.cum, x);
        let (mut lo, mut hi) = (self.r[j], self.r[j + 1]);
        let base = self.cum[j];
        let mut r = lo + (hi - lo) * (x - base) / (self.cum[j + 1] - base);
        for _ in 0..60 {
            let val = base + integrate(f, self.r[j], r, 1e-15, 1e-14)?.value - x;
            if val > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let step = val / f(r);
            let mut next = r - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 1e-15 * r {
                return Ok(next);
            }
            r = next;
        }
        Ok(r)
    }
}

/// Builds the initial Lagrangian state and boundary curves.
pub fn initialize_lagrangian(init: &InitialData, params: &Params, cfg: &SolverConfig) -> Result<Simulation> {
    cfg.validate()?;
    params.validate()?;
    if (init.m - cfg.m).abs() > 0.0 {
        return Err(Error::Input(format!("initial data built for m = {} but config has m = {}", init.m, cfg.m)));
    }
    let profile = init.profile.clone();
    let n = params.n;
    let m = cfg.m;
    let density = |r: f64| init.rho(r) * r.powi(n as i32 - 1);
    let table = MassTable::new(&density, m, 8 * cfg.nodes)?;
    let m0 = table.total();
    if !(m0 > 0.0) {
        return Err(Error::Domain("initial mass is not positive".into()));
    }
    let s = stationary_s_nodes(&profile, m, cfg.nodes, cfg.outer_grading)?;
    let grid = MassGrid::new(0.0, s.clone(), 0.0, m0)?;
    let x = grid.xs();
    let mut r0 = Vec::with_capacity(x.len());
    for (i, &xi) in x.iter().enumerate() {
        let r = if i == 0 {
            1.0
        } else if i + 1 == x.len() {
            m
        } else {
            table.invert(&density, xi)?
        };
        r0.push(r);
    }
    let outer = profile.sample(m)?;
    let outer_values = (outer.vt(), outer.u_t);
    let mut v: Vec<f64> = r0.iter().map(|&r| 1.0 / init.rho(r)).collect();
    let mut u: Vec<f64> = r0.iter().map(|&r| init.u(r)).collect();
    let last = v.len() - 1;
    u[0] = params.u_b;
    v[last] = outer_values.0;
    u[last] = outer_values.1;
    if v.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::Domain("initial specific volume is not positive".into()));
    }

    let mut map = CoordinateMap::new(n, m, m0, profile.rho1, params.u_b);
    map.r0 = x.iter().copied().zip(r0.iter().copied()).collect();
    let r = radii(&x, &v, n);
    let (vt, ut) = stationary_at(&profile, &r)?;
    let state = LagrangianState {
        t: 0.0,
        n,
        grid,
        v,
        u,
        r,
        vt,
        ut,
        step: 0,
    };
    Ok(Simulation {
        params: *params,
        profile,
        config: *cfg,
        map,
        state,
        outer_values,
        weights: StencilWeights::new(&s),
    })
}

/// Stationary `(vt, ut)` at the given radii (clamped into the profile range).
pub fn stationary_at(profile: &StationaryProfile, r: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let r_max = profile.r_max();
    let mut vt = Vec::with_capacity(r.len());
    let mut ut = Vec::with_capacity(r.len());
    for &ri in r {
        let s = profile.sample(ri.clamp(1.0, r_max))?;
        vt.push(s.vt());
        ut.push(s.u_t);
    }
    Ok((vt, ut))
}

/// Ordered snapshots of one run, including the initial and final states.
pub type Trajectory = Vec<LagrangianState>;

impl Simulation {
    fn stage(&self, b: f64, m_t: f64, v: &[f64]) -> Stage {
        let grid = MassGrid {
            t: 0.0,
            s_nodes: self.state.grid.s_nodes.clone(),
            b,
            m: m_t,
        };
        let x = grid.xs();
        let n = self.params.n;
        let r = radii(&x, v, n);
        let rn1: Vec<f64> = r.iter().map(|ri| ri.powi(n as i32 - 1)).collect();
        let b_dot = self.params.u_b.abs() / v[0];
        let m_dot = self.map.outer_speed();
        let w = self
            .state
            .grid
            .s_nodes
            .iter()
            .map(|s| b_dot + s * (m_dot - b_dot))
            .collect();
        Stage {
            x,
            rn1,
            w,
            inv_len: 1.0 / (m_t - b),
        }
    }

    /// Explicit rates `(dv/dt, du/dt)` at fixed `s`, without viscosity.
    fn explicit_rates(&self, st: &Stage, v: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nn = v.len();
        let p = &self.params;
        let flux: Vec<f64> = st.rn1.iter().zip(u).map(|(a, b)| a * b).collect();
        let pres: Vec<f64> = v.iter().map(|&vi| p.k * vi.powf(-p.gamma)).collect();
        let mut dv = vec![0.0; nn];
        let mut du = vec![0.0; nn];
        let wts = &self.weights;
        for i in 0..nn - 1 {
            let fwd = &wts.forward[i];
            let cen = if i == 0 { fwd } else { &wts.central[i] };
            dv[i] = StencilWeights::apply(cen, &flux, st.inv_len) + st.w[i] * StencilWeights::apply(fwd, v, st.inv_len);
            if i > 0 {
                du[i] = -st.rn1[i] * StencilWeights::apply(cen, &pres, st.inv_len)
                    + st.w[i] * StencilWeights::apply(fwd, u, st.inv_len);
            }
        }
        (dv, du)
    }

    /// Tridiagonal viscous operator `mu r^{n-1} ((r^{n-1} u)_x / v)_x` as bands.
    fn viscous_bands(&self, st: &Stage, v: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let nn = v.len();
        let mu = self.params.mu;
        let mut lo = vec![0.0; nn];
        let mut di = vec![0.0; nn];
        let mut up = vec![0.0; nn];
        for i in 1..nn - 1 {
            let hm = st.x[i] - st.x[i - 1];
            let hp = st.x[i + 1] - st.x[i];
            let cm = 1.0 / (hm * 0.5 * (v[i - 1] + v[i]));
            let cp = 1.0 / (hp * 0.5 * (v[i] + v[i + 1]));
            let scale = mu * st.rn1[i] / (0.5 * (hm + hp));
            lo[i] = scale * cm * st.rn1[i - 1];
            up[i] = scale * cp * st.rn1[i + 1];
            di[i] = -scale * (cm + cp) * st.rn1[i];
        }
        (lo, di, up)
    }

    fn apply_bands(bands: &(Vec<f64>, Vec<f64>, Vec<f64>), u: &[f64]) -> Vec<f64> {
        let nn = u.len();
        let mut out = vec![0.0; nn];
        for i in 1..nn - 1 {
            out[i] = bands.0[i] * u[i - 1] + bands.1[i] * u[i] + bands.2[i] * u[i + 1];
        }
        out
    }

    /// Solves `(I - theta dt L) u_new = rhs` with Dirichlet ends.
    fn implicit_solve(&self, bands: &(Vec<f64>, Vec<f64>, Vec<f64>), rhs: &[f64], dt: f64) -> Result<Vec<f64>> {
        let nn = rhs.len();
        let th = self.config.theta * dt;
        let mut lo = vec![0.0; nn];
        let mut di = vec![1.0; nn];
        let mut up = vec![0.0; nn];
        for i in 1..nn - 1 {
            lo[i] = -th * bands.0[i];
            di[i] = 1.0 - th * bands.1[i];
            up[i] = -th * bands.2[i];
        }
        let mut b = rhs.to_vec();
        b[0] = self.params.u_b;
        b[nn - 1] = self.outer_values.1;
        solve_tridiagonal(&lo, &di, &up, &b)
    }

    /// Stable step size from the current state.
    pub fn stable_dt(&self) -> f64 {
        let st = &self.state;
        let p = &self.params;
        let x = st.x();
        let m_dot = self.map.outer_speed();
        let b_dot = p.u_b.abs() / st.v[0];
        let mut dt = f64::INFINITY;
        for i in 0..st.len() {
            let left = if i > 0 { x[i] - x[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < st.len() { x[i + 1] - x[i] } else { f64::INFINITY };
            let dx = left.min(right);
            let rho = 1.0 / st.v[i];
            let c = p.sound_speed_sq(rho).sqrt();
            let w = b_dot + st.grid.s_nodes[i] * (m_dot - b_dot);
            let speed = w.abs() + st.r[i].powi(p.n as i32 - 1) * rho * c + 1e-12;
            dt = dt.min(dx / speed);
        }
        let mut dt = self.config.cfl * dt;
        if let Some(cap) = self.config.dt_max {
            dt = dt.min(cap);
        }
        dt
    }

    fn try_step(&self, dt: f64) -> Result<Option<LagrangianState>> {
        let s0 = &self.state;
        let ub = self.params.u_b.abs();
        let nn = s0.len();
        let t1 = s0.t + dt;
        let m0 = s0.grid.m;
        let m1 = outer_mass_M(&self.map, t1)?;
        let b0 = s0.grid.b;

        let g0 = self.stage(b0, m0, &s0.v);
        let (ev0, eu0) = self.explicit_rates(&g0, &s0.v, &s0.u);
        let bdot0 = ub / s0.v[0];
        let l0 = self.viscous_bands(&g0, &s0.v);

        // Predictor.
        let v1: Vec<f64> = (0..nn).map(|i| s0.v[i] + dt * ev0[i]).collect();
        if !v1.iter().all(|&y| y > 0.0 && y.is_finite()) {
            return Ok(None);
        }
        let b1 = b0 + dt * bdot0;
        let lu0 = Self::apply_bands(&l0, &s0.u);
        let rhs: Vec<f64> = (0..nn)
            .map(|i| s0.u[i] + dt * eu0[i] + (1.0 - self.config.theta) * dt * lu0[i])
            .collect();
        let u1 = self.implicit_solve(&l0, &rhs, dt)?;
        if !(m1 > b1) {
            return Err(Error::Numerical(format!("domain collapsed at t = {t1}")));
        }

        // Corrector.
        let g1 = self.stage(b1, m1, &v1);
        let (ev1, eu1) = self.explicit_rates(&g1, &v1, &u1);
        let bdot1 = ub / v1[0];
        let mut v2: Vec<f64> = (0..nn).map(|i| s0.v[i] + 0.5 * dt * (ev0[i] + ev1[i])).collect();
        v2[nn - 1] = self.outer_values.0;
        if !v2.iter().all(|&y| y > 0.0 && y.is_finite()) {
            return Ok(None);
        }
        let b2 = b0 + 0.5 * dt * (bdot0 + bdot1);
        let vm: Vec<f64> = (0..nn).map(|i| 0.5 * (s0.v[i] + v1[i])).collect();
        let gm = self.stage(0.5 * (b0 + b1), 0.5 * (m0 + m1), &vm);
        let lm = self.viscous_bands(&gm, &vm);
        let lum = Self::apply_bands(&lm, &s0.u);
        let rhs: Vec<f64> = (0..nn)
            .map(|i| s0.u[i] + 0.5 * dt * (eu0[i] + eu1[i]) + (1.0 - self.config.theta) * dt * lum[i])
            .collect();
        let u2 = self.implicit_solve(&lm, &rhs, dt)?;
        if !u2.iter().all(|y| y.is_finite()) {
            return Ok(None);
        }
        if !(m1 > b2) {
            return Err(Error::Numerical(format!("domain collapsed at t = {t1}")));
        }
        let grid = MassGrid::new(t1, s0.grid.s_nodes.clone(), b2, m1)?;
        let x = grid.xs();
        let r = radii(&x, &v2, self.params.n);
        let (vt, ut) = stationary_at(&self.profile, &r)?;
        Ok(Some(LagrangianState {
            t: t1,
            n: s0.n,
            grid,
            v: v2,
            u: u2,
            r,
            vt,
            ut,
            step: s0.step + 1,
        }))
    }

    /// Advances by at most `dt_cap` (the stable step if `None`), halving after
    /// positivity losses. Returns the step taken.
    pub fn step(&mut self, dt_cap: Option<f64>) -> Result<f64> {
        let mut dt = self.stable_dt();
        if let Some(cap) = dt_cap {
            dt = dt.min(cap);
        }
        for _ in 0..=self.config.max_retries {
            if let Some(next) = self.try_step(dt)? {
                self.map.record_b(next.t, next.grid.b);
                self.state = next;
                return Ok(dt);
            }
            dt *= 0.5;
        }
        Err(Error::PositivityLoss {
            t: self.state.t,
            retries: self.config.max_retries,
        })
    }

    /// Advances to `t_end`, calling `on_step(prev, next, is_snapshot)` after
    /// every step. Snapshot times follow the configured schedule and the final
    /// time is always a snapshot.
    pub fn evolve_with<F>(&mut self, t_end: f64, mut on_step: F) -> Result<()>
    where
        F: FnMut(&LagrangianState, &LagrangianState, bool) -> Result<()>,
    {
        if t_end < self.state.t {
            return Err(Error::Precondition(format!("t_end {t_end} precedes t = {}", self.state.t)));
        }
        let t0 = self.state.t;
        let mut k_snap = 1usize;
        let mut steps_since = 0usize;
        while self.state.t < t_end {
            let mut target = t_end;
            if let Some(sdt) = self.config.snapshot_dt {
                target = target.min(t0 + sdt * k_snap as f64);
            }
            let remaining = target - self.state.t;
            let stable = self.stable_dt();
            // Land exactly on the target rather than leaving a sliver step.
            let cap = if remaining <= stable * (1.0 + 1e-9) {
                remaining
            } else if remaining < 2.0 * stable {
                0.5 * remaining
            } else {
                stable
            };
            let prev = self.state.clone();
            let taken = self.step(Some(cap))?;
            let mut hit = false;
            if taken == remaining {
                self.state.t = target;
                self.state.grid.t = target;
                hit = true;
            }
            steps_since += 1;
            let snapshot = match self.config.snapshot_dt {
                Some(_) => {
                    if hit && target < t_end {
                        k_snap += 1;
                    }
                    hit
                }
                None => steps_since % self.config.snapshot_stride == 0 || self.state.t >= t_end,
            };
            on_step(&prev, &self.state, snapshot)?;
        }
        Ok(())
    }

    /// Runs to `t_end` and returns the snapshots; each hook sees every snapshot.
    pub fn evolve(
        &mut self,
        t_end: f64,
        hooks: &mut [&mut dyn FnMut(&LagrangianState) -> Result<()>],
    ) -> Result<Trajectory> {
        let mut traj = vec![self.state.clone()];
        for h in hooks.iter_mut() {
            h(&self.state)?;
        }
        self.evolve_with(t_end, |_, next, snap| {
            if snap {
                traj.push(next.clone());
                for h in hooks.iter_mut() {
                    h(next).map_err(|e| Error::Input(format!("snapshot hook failed at t = {}: {e}", next.t)))?;
                }
            }
            Ok(())
        })?;
        Ok(traj)
    }
}
