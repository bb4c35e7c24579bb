//! Pressure laws and the convex energy functions of the relative-energy method.
//!
//! Everything here is generic over the scalar type. The closed forms are
//! evaluated through `L = ln(v / vt)` and the smooth kernel
//! `q(y) = (e^y - 1 - y) / y^2`, which is algebraically identical to the
//! textbook expressions but free of cancellation near the diagonal.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::numeric::expm1_defect;
use crate::quadrature::integrate;

/// Physical constants of the radial outflow problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T> {
    /// Spatial dimension.
    pub n: usize,
    /// Adiabatic exponent.
    pub gamma: T,
    /// Pressure constant in `P = K rho^gamma`.
    pub k: T,
    /// Combined viscosity `2 mu_1 + mu_2`.
    pub mu: T,
    /// Far-field density.
    pub rho_plus: T,
    /// Boundary velocity at `r = 1` (outflow: negative; zero is the no-flow check).
    pub u_b: T,
}

impl<T: Float> Params<T> {
    /// Builds a validated parameter set.
    pub fn new(n: usize, gamma: T, k: T, mu: T, rho_plus: T, u_b: T) -> Result<Self> {
        let p = Self {
            n,
            gamma,
            k,
            mu,
            rho_plus,
            u_b,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let one = T::one();
        let two = one + one;
        if self.n < 2 {
            return Err(Error::Precondition(format!("n = {} must be at least 2", self.n)));
        }
        if !(self.gamma >= one && self.gamma <= two) {
            return Err(Error::Precondition("gamma must lie in [1, 2]".into()));
        }
        if !(self.k > T::zero()) || !self.k.is_finite() {
            return Err(Error::Precondition("K must be positive".into()));
        }
        if !(self.mu > T::zero()) || !self.mu.is_finite() {
            return Err(Error::Precondition("mu must be positive".into()));
        }
        if !(self.rho_plus > T::zero()) || !self.rho_plus.is_finite() {
            return Err(Error::Precondition("rho_plus must be positive".into()));
        }
        if !(self.u_b <= T::zero()) || !self.u_b.is_finite() {
            return Err(Error::Precondition("u_b must be negative (outflow) or zero".into()));
        }
        Ok(())
    }

    /// Squared sound speed `P'(rho)`.
    pub fn sound_speed_sq(&self, rho: T) -> T {
        self.gamma * self.k * rho.powf(self.gamma - T::one())
    }
}

fn positive<T: Float>(x: T, what: &str) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive and finite")))
    }
}

/// `P(rho) = K rho^gamma`.
pub fn pressure_eulerian<T: Float>(rho: T, params: &Params<T>) -> Result<T> {
    positive(rho, "density")?;
    Ok(params.k * rho.powf(params.gamma))
}

/// `p(v) = K v^{-gamma}`.
pub fn pressure_lagrangian<T: Float>(v: T, params: &Params<T>) -> Result<T> {
    positive(v, "specific volume")?;
    Ok(params.k * v.powf(-params.gamma))
}

/// `ln(a / b)` computed from the difference so it stays accurate when `a ~ b`.
fn log_ratio<T: Float>(a: T, b: T) -> T {
    ((a - b) / b).ln_1p()
}

fn g_of_log<T: Float>(l: T, gamma: T) -> T {
    let base = expm1_defect(l);
    if gamma == T::one() {
        l * l * base
    } else {
        let extra = (gamma - T::one()) * expm1_defect((T::one() - gamma) * l);
        l * l * (base + extra)
    }
}

/// `g(s) = s - 1 - int_1^s eta^{-gamma} d eta`.
pub fn normalized_g<T: Float>(s: T, gamma: T) -> Result<T> {
    positive(s, "volume ratio")?;
    Ok(g_of_log(log_ratio(s, T::one()), gamma))
}

/// `s - 1 - ln s`, evaluated with the same kernel as [`normalized_g`] so the two
/// compare exactly in floating point.
pub fn log_lower_bound<T: Float>(s: T) -> Result<T> {
    positive(s, "volume ratio")?;
    let l = log_ratio(s, T::one());
    Ok(l * l * expm1_defect(l))
}

/// Closed-form `G(v, vt) = vt p(vt) g(v / vt)`; returns 0 when `|v - vt| < 1e-12 vt`.
#[allow(non_snake_case)]
pub fn energy_distance_G<T: Float>(v: T, vt: T, params: &Params<T>) -> Result<T> {
    positive(v, "specific volume")?;
    positive(vt, "reference specific volume")?;
    if (v - vt).abs() < T::from(1e-12).unwrap() * vt {
        return Ok(T::zero());
    }
    let l = log_ratio(v, vt);
    Ok(params.k * vt.powf(T::one() - params.gamma) * g_of_log(l, params.gamma))
}

/// `G` from its defining integral `int_{1/vt}^{1/v} (p(1/z) - p(vt)) / z^2 dz`.
#[allow(non_snake_case)]
pub fn energy_distance_G_quadrature<T: Float>(v: T, vt: T, params: &Params<T>, abs_tol: T, rel_tol: T) -> Result<T> {
    positive(v, "specific volume")?;
    positive(vt, "reference specific volume")?;
    let pt = params.k * vt.powf(-params.gamma);
    let k = params.k;
    let gamma = params.gamma;
    let q = integrate(
        move |z: T| (k * z.powf(gamma) - pt) / (z * z),
        vt.recip(),
        v.recip(),
        abs_tol,
        rel_tol,
    )?;
    Ok(q.value)
}

/// `E = (u - ut)^2 / 2 + G(v, vt)`.
pub fn energy_density<T: Float>(u: T, ut: T, v: T, vt: T, params: &Params<T>) -> Result<T> {
    let du = u - ut;
    Ok(T::from(0.5).unwrap() * du * du + energy_distance_G(v, vt, params)?)
}

/// `H(rho, sigma) = rho G(1/rho, 1/sigma)` through its closed forms in `h(rho / sigma)`.
#[allow(non_snake_case)]
pub fn relative_entropy_H<T: Float>(rho: T, sigma: T, params: &Params<T>) -> Result<T> {
    positive(rho, "density")?;
    positive(sigma, "reference density")?;
    let one = T::one();
    let gamma = params.gamma;
    let l = log_ratio(rho, sigma);
    if gamma == one {
        let h = if l.abs() < one {
            l * l * (one + (l - one) * expm1_defect(l))
        } else {
            let s = rho / sigma;
            s * (l - one) + one
        };
        Ok(params.k * sigma * h)
    } else {
        // h(s) / (gamma - 1) with h(s) = s^gamma - 1 - gamma (s - 1)
        let h_scaled = if l.abs() < T::from(0.1).unwrap() {
            let lg = gamma.ln();
            let mut fact = one + one;
            let mut lk = one;
            let mut sum = T::zero();
            for k in 0..20 {
                if k > 0 {
                    fact = fact * T::from(k + 2).unwrap();
                    lk = lk * l;
                }
                let gk = (T::from(k + 1).unwrap() * lg).exp_m1() / (gamma - one);
                sum = sum + lk * gk / fact;
            }
            gamma * l * l * sum
        } else {
            let s = rho / sigma;
            (s.powf(gamma) - one - gamma * (s - one)) / (gamma - one)
        };
        Ok(params.k * sigma.powf(gamma) * h_scaled)
    }
}

/// Which side of the diagonal a sample lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `v <= vt`: compared against `vt^{1+gamma} G`.
    Compressed,
    /// `v > vt`: compared against `vt^gamma v G`.
    Expanded,
}

/// Outcome of one lower-bound certification.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck<T> {
    pub branch: Branch,
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Relative slack used by every inequality verdict.
pub const VERDICT_SLACK: f64 = 1e-8;

/// Certifies `(gamma K / 2) |v - vt|^2 <= vt^{1+gamma} G` (for `v <= vt`) or
/// `<= vt^gamma v G` (for `v > vt`).
///
/// For `gamma = 2` the second branch is an identity, so the verdict carries the
/// shared relative slack.
#[allow(non_snake_case)]
pub fn check_phiG_bound<T: Float>(v: T, vt: T, params: &Params<T>) -> Result<BoundCheck<T>> {
    let one = T::one();
    if !(params.gamma >= one && params.gamma <= one + one) {
        return Err(Error::Precondition("gamma must lie in [1, 2]".into()));
    }
    let g = energy_distance_G(v, vt, params)?;
    let d = v - vt;
    let lhs = params.gamma * params.k * T::from(0.5).unwrap() * d * d;
    let (branch, rhs) = if v <= vt {
        (Branch::Compressed, vt.powf(one + params.gamma) * g)
    } else {
        (Branch::Expanded, vt.powf(params.gamma) * v * g)
    };
    // The near-diagonal cut in G leaves at most this much on the left.
    let cut = T::from(1e-12).unwrap() * vt;
    let floor = params.gamma * params.k * cut * cut;
    let holds = lhs <= rhs * (one + T::from(VERDICT_SLACK).unwrap()) + floor;
    Ok(BoundCheck {
        branch,
        lhs,
        rhs,
        holds,
    })
}

/// How [`EnergyFunctions`] evaluates `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMode<T> {
    ClosedForm,
    Quadrature { abs_tol: T },
}

/// Energy functions bound to a parameter set and an evaluation mode.
#[derive(Debug, Clone, Copy)]
pub struct EnergyFunctions<T> {
    pub params: Params<T>,
    pub mode: EvalMode<T>,
}

impl<T: Float> EnergyFunctions<T> {
    pub fn closed_form(params: Params<T>) -> Self {
        Self {
            params,
            mode: EvalMode::ClosedForm,
        }
    }

    pub fn quadrature(params: Params<T>, abs_tol: T) -> Self {
        Self {
            params,
            mode: EvalMode::Quadrature { abs_tol },
        }
    }

    #[allow(non_snake_case)]
    pub fn G(&self, v: T, vt: T) -> Result<T> {
        match self.mode {
            EvalMode::ClosedForm => energy_distance_G(v, vt, &self.params),
            EvalMode::Quadrature { abs_tol } => energy_distance_G_quadrature(v, vt, &self.params, abs_tol, T::zero()),
        }
    }

    pub fn energy_density(&self, u: T, ut: T, v: T, vt: T) -> Result<T> {
        let du = u - ut;
        Ok(T::from(0.5).unwrap() * du * du + self.G(v, vt)?)
    }

    #[allow(non_snake_case)]
    pub fn H(&self, rho: T, sigma: T) -> Result<T> {
        match self.mode {
            EvalMode::ClosedForm => relative_entropy_H(rho, sigma, &self.params),
            EvalMode::Quadrature { .. } => Ok(rho * self.G(rho.recip(), sigma.recip())?),
        }
    }
}
