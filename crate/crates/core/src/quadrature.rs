//! Adaptive Gauss–Kronrod quadrature (7-point Gauss, 15-point Kronrod).

use num_traits::Float;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

fn gk15<T: Float, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let c = T::from(0.5).unwrap() * (a + b);
    let h = T::from(0.5).unwrap() * (b - a);
    let fc = f(c);
    let mut rk = fc * T::from(WGK[7]).unwrap();
    let mut rg = fc * T::from(WG[3]).unwrap();
    for j in 0..7 {
        let dx = h * T::from(XGK[j]).unwrap();
        let s = f(c - dx) + f(c + dx);
        rk = rk + T::from(WGK[j]).unwrap() * s;
        if j % 2 == 1 {
            rg = rg + T::from(WG[j / 2]).unwrap() * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Integrates `f` over `[a, b]` (either orientation) until the summed error
/// estimate is below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<T: Float, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> Result<Quadrature<T>> {
    if a == b {
        return Ok(Quadrature {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let (v0, e0) = gk15(&f, lo, hi);
    let mut parts = vec![(lo, hi, v0, e0)];
    const MAX_INTERVALS: usize = 2000;
    loop {
        let value = parts.iter().fold(T::zero(), |s, p| s + p.2);
        let error = parts.iter().fold(T::zero(), |s, p| s + p.3);
        if !value.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature {
                value: sign * value,
                error,
                intervals: parts.len(),
            });
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence {
                iterations: parts.len(),
                residual: error.to_f64().unwrap_or(f64::NAN),
            });
        }
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.partial_cmp(&parts[j].3).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        let (a0, b0, _, _) = parts.swap_remove(worst);
        let mid = T::from(0.5).unwrap() * (a0 + b0);
        let (vl, el) = gk15(&f, a0, mid);
        let (vr, er) = gk15(&f, mid, b0);
        parts.push((a0, mid, vl, el));
        parts.push((mid, b0, vr, er));
    }
}
