//! Randomized certification of the pointwise inequalities, keyed by a seed.
//!
//! Each check draws from its own ChaCha8 stream, so adding samples to one check
//! never changes the draws of another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::cutoff::{chi_m, chi_m_prime, eta_tilde, eta_tilde_prime, xi, xi_prime, zeta, zeta_prime};
use crate::model::{
    check_phiG_bound, energy_distance_G, energy_distance_G_quadrature, log_lower_bound, normalized_g,
};
use crate::{Params, Result};

use super::config::VerifySpec;

const GAMMAS: [f64; 3] = [1.0, 1.5, 2.0];

/// Outcome of one randomized check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    /// Largest violation (or relative disagreement) seen; 0 when none.
    pub worst: f64,
    /// Threshold `worst` is compared with, when the check is quantitative.
    pub tolerance: Option<f64>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}: {} samples, {} failures, worst {:.3e}",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.name,
                    c.samples,
                    c.failures,
                    c.worst
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let checks: Vec<serde_json::Value> = self
            .checks
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name,
                    "samples": c.samples,
                    "failures": c.failures,
                    "worst": c.worst,
                    "tolerance": c.tolerance,
                    "passed": c.passed(),
                })
            })
            .collect();
        serde_json::json!({ "seed": self.seed, "passed": self.passed(), "checks": checks })
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn params(gamma: f64) -> Params {
    Params::new(2, gamma, 1.0, 1.0, 1.0, -0.05).expect("verifier parameters are valid")
}

/// Tallies a boolean verdict and a nonnegative excess per sample.
struct Tally {
    result: CheckResult,
}

impl Tally {
    fn new(name: &'static str, tolerance: Option<f64>) -> Self {
        Self {
            result: CheckResult {
                name,
                samples: 0,
                failures: 0,
                worst: 0.0,
                tolerance,
            },
        }
    }

    fn add(&mut self, ok: bool, excess: f64) {
        self.result.samples += 1;
        if !ok {
            self.result.failures += 1;
        }
        if excess > self.result.worst || excess.is_nan() {
            self.result.worst = excess;
        }
    }
}

/// Both branches of the lower bound of `G` by `|v - vt|^2`.
fn branch_bounds(seed: u64, samples: usize) -> Result<CheckResult> {
    let mut rng = stream(seed, 1);
    let ps = GAMMAS.map(params);
    let mut t = Tally::new("phi-G lower bound (both branches)", None);
    for i in 0..samples {
        let v = rng.gen_range(0.1..=10.0);
        let vt = rng.gen_range(0.1..=10.0);
        let c = check_phiG_bound(v, vt, &ps[i % 3])?;
        t.add(c.holds, (c.lhs - c.rhs).max(0.0));
    }
    Ok(t.result)
}

/// `g(s) >= s - 1 - log s`.
fn log_bound(seed: u64, samples: usize) -> Result<CheckResult> {
    let mut rng = stream(seed, 2);
    let mut t = Tally::new("g(s) >= s - 1 - log s", None);
    for i in 0..samples {
        // Log-uniform over [1e-3, 1e3].
        let s = 10f64.powf(rng.gen_range(-3.0..=3.0));
        let g = normalized_g(s, GAMMAS[i % 3])?;
        let lb = log_lower_bound(s)?;
        let excess = lb - g;
        t.add(excess <= 1e-12 * lb.abs().max(1.0), excess.max(0.0));
    }
    Ok(t.result)
}

/// `|eta_tilde'|^2 <= 8 eta_tilde` and `eta_tilde` in `[0, 1]`.
fn eta_bound(seed: u64, samples: usize) -> CheckResult {
    let mut rng = stream(seed, 3);
    let mut t = Tally::new("|eta'|^2 <= 8 eta", None);
    for _ in 0..samples {
        let y: f64 = rng.gen_range(-2.0..=1.0);
        let (e, d): (f64, f64) = (eta_tilde(y), eta_tilde_prime(y));
        let excess = d * d - 8.0 * e;
        t.add(excess <= 1e-14 && (0.0..=1.0).contains(&e), excess.max(0.0));
    }
    t.result
}

/// Range, derivative and support of `zeta`, `xi` and `chi_m`.
fn cutoff_properties(seed: u64, samples: usize) -> CheckResult {
    let mut rng = stream(seed, 4);
    let mut t = Tally::new("zeta / xi / chi range and support", None);
    let root8 = 8f64.sqrt();
    for _ in 0..samples {
        let b = rng.gen_range(0.0..=5.0);
        let k = rng.gen_range(1..=8) as f64;
        let y = rng.gen_range(-5.0..=20.0);
        let z = zeta(y, b, k);
        let dz = zeta_prime(y, b, k);
        let mut ok = (0.0..=1.0).contains(&z) && (-1.0..=0.0).contains(&dz);
        ok &= (dz != 0.0) == (y >= b + k && y <= b + k + 1.0);
        ok &= y > b + k || z == 1.0;
        ok &= y < b + k + 1.0 || z == 0.0;

        let mt = rng.gen_range(10.0..=30.0);
        let yx = rng.gen_range(-5.0..=40.0);
        let x = xi(yx, mt, k);
        let dx = xi_prime(yx, mt, k);
        ok &= (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&dx);
        ok &= (dx != 0.0) == (yx >= mt - k - 1.0 && yx <= mt - k);
        ok &= yx > mt - k - 1.0 || x == 0.0;
        ok &= yx < mt - k || x == 1.0;

        let rm0 = rng.gen_range(2.0..=50.0);
        let r = rng.gen_range(1.0..=60.0);
        let c = chi_m(r, rm0);
        let dc: f64 = chi_m_prime(r, rm0);
        ok &= (0.0..=1.0).contains(&c) && dc.abs() <= root8;
        ok &= r > rm0 - 1.0 || c == 1.0;
        ok &= r < rm0 || c == 0.0;
        t.add(ok, if ok { 0.0 } else { 1.0 });
    }
    t.result
}

/// Closed-form `G` against adaptive quadrature of its defining integral.
fn closed_form_vs_quadrature(seed: u64, samples: usize) -> Result<CheckResult> {
    const TOL: f64 = 1e-8;
    let mut rng = stream(seed, 5);
    let ps = GAMMAS.map(params);
    let mut t = Tally::new("closed-form G vs quadrature", Some(TOL));
    for i in 0..samples {
        let v = rng.gen_range(0.1..=10.0);
        let vt = rng.gen_range(0.1..=10.0);
        let p = &ps[i % 3];
        let a = energy_distance_G(v, vt, p)?;
        let b = energy_distance_G_quadrature(v, vt, p, 1e-15, 1e-13)?;
        let scale = a.abs().max(b.abs());
        let rel = if scale > 0.0 { (a - b).abs() / scale } else { 0.0 };
        t.add(rel <= TOL || (a - b).abs() <= 1e-15, rel);
    }
    Ok(t.result)
}

/// Runs every certifier with the given seed.
pub fn run_verification(seed: u64, spec: &VerifySpec) -> Result<VerifyReport> {
    Ok(VerifyReport {
        seed,
        checks: vec![
            branch_bounds(seed, spec.branch_samples)?,
            log_bound(seed, spec.log_samples)?,
            eta_bound(seed, spec.cutoff_samples),
            cutoff_properties(seed, spec.cutoff_samples),
            closed_form_vs_quadrature(seed, spec.quadrature_samples)?,
        ],
    })
}
