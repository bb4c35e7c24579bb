//! Small numerical kernels shared by the solvers and diagnostics.

use num_traits::Float;

use crate::error::{Error, Result};

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (ignored for `i = 0`), `upper[i]`
/// multiplies `x[i+1]` (ignored for the last row).
pub fn solve_tridiagonal<T: Float>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Input("tridiagonal band lengths differ".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let tiny = T::min_positive_value();
    let mut piv = diag[0];
    if piv.abs() <= tiny || !piv.is_finite() {
        return Err(Error::Numerical("singular tridiagonal pivot in row 0".into()));
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if piv.abs() <= tiny || !piv.is_finite() {
            return Err(Error::Numerical(format!("singular tridiagonal pivot in row {i}")));
        }
        c[i] = if i + 1 < n { upper[i] / piv } else { T::zero() };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] = x[i] - c[i] * next;
    }
    Ok(x)
}

/// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
///
/// Returns `w[k][j]`, the weight of `f(x[j])` in the `k`-th derivative at `z`,
/// for `k = 0..=order`.
pub fn fd_weights(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Second-order first derivative of `f` on the nonuniform grid `x` at every node.
///
/// Central three-point weights inside, one-sided three-point weights at the ends.
pub fn derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    nodal_derivative(x, f, 1)
}

/// Second derivative with the same stencils as [`derivative`].
pub fn second_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    nodal_derivative(x, f, 2)
}

fn nodal_derivative(x: &[f64], f: &[f64], order: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 3, "need at least three nodes");
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1).min(n - 3);
            let w = fd_weights(x[i], &x[lo..lo + 3], order);
            (0..3).map(|j| w[order][j] * f[lo + j]).sum()
        })
        .collect()
}

/// Composite trapezoid rule.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Running composite trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// Index `i` with `xs[i] <= x <= xs[i+1]`, clamped to the valid cell range.
pub fn locate(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    if n < 2 || x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    let idx = xs.partition_point(|&v| v <= x);
    idx.saturating_sub(1).min(n - 2)
}

/// Piecewise-linear interpolation (linear extrapolation past the ends).
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = locate(xs, x);
    let h = xs[i + 1] - xs[i];
    let w = (x - xs[i]) / h;
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Four-point Lagrange interpolation on the nodes surrounding `x`.
pub fn interp_cubic(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n < 4 {
        return interp_linear(xs, ys, x);
    }
    let i = locate(xs, x);
    let lo = i.saturating_sub(1).min(n - 4);
    let w = fd_weights(x, &xs[lo..lo + 4], 0);
    (0..4).map(|j| w[0][j] * ys[lo + j]).sum()
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = locate(&self.x, x);
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// `(e^y - 1 - y) / y^2`, accurate for small `|y|`.
pub fn expm1_defect<T: Float>(y: T) -> T {
    let half = T::from(0.5).unwrap();
    if y.abs() < T::from(0.1).unwrap() {
        // Taylor series: sum_k y^k / (k + 2)!
        let mut term = half;
        let mut sum = half;
        for k in 1..16 {
            term = term * y / T::from(k + 2).unwrap();
            sum = sum + term;
        }
        sum
    } else {
        (y.exp_m1() - y) / (y * y)
    }
}
