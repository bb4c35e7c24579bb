//! Cut-off functions: the initial-data blend `phi_m`, the unit-window
//! localizers `zeta` and `xi`, and the `C^1` ramp `eta_tilde` with its
//! Lagrangian (`eta`) and Eulerian (`chi_m`) versions.

use num_traits::Float;

fn c<T: Float>(x: f64) -> T {
    T::from(x).unwrap()
}

/// `C^3` blend equal to 1 on `[1, m/2]` and 0 on `[m, inf)`.
pub fn phi_m<T: Float>(r: T, m: T) -> T {
    let half = c::<T>(0.5) * m;
    if r <= half {
        return T::one();
    }
    if r >= m {
        return T::zero();
    }
    let y = (r - half) / half;
    T::one() - smoothstep7(y)
}

/// `d phi_m / dr`.
pub fn phi_m_prime<T: Float>(r: T, m: T) -> T {
    let half = c::<T>(0.5) * m;
    if r <= half || r >= m {
        return T::zero();
    }
    let y = (r - half) / half;
    -smoothstep7_prime(y) / half
}

/// `35 y^4 - 84 y^5 + 70 y^6 - 20 y^7`: 0 at 0, 1 at 1, three vanishing derivatives at both ends.
fn smoothstep7<T: Float>(y: T) -> T {
    let y4 = y.powi(4);
    y4 * (c::<T>(35.0) + y * (c::<T>(-84.0) + y * (c::<T>(70.0) - c::<T>(20.0) * y)))
}

fn smoothstep7_prime<T: Float>(y: T) -> T {
    let y3 = y.powi(3);
    let one = T::one();
    c::<T>(140.0) * y3 * (one - y).powi(3)
}

/// `zeta_{k,t}(y)`: 1 on `[B+k-1, B+k]`, linear down to 0 on `[B+k, B+k+1]`, 0 after.
pub fn zeta<T: Float>(y: T, b_t: T, k: T) -> T {
    let a = b_t + k;
    if y <= a {
        T::one()
    } else if y >= a + T::one() {
        T::zero()
    } else {
        T::one() - y + a
    }
}

/// One-sided-consistent derivative of [`zeta`]: `-1` on the closed window `[B+k, B+k+1]`.
pub fn zeta_prime<T: Float>(y: T, b_t: T, k: T) -> T {
    let a = b_t + k;
    if y >= a && y <= a + T::one() {
        -T::one()
    } else {
        T::zero()
    }
}

/// `xi_{k,t}(y)`: 0 up to `M-k-1`, linear up to 1 at `M-k`, 1 after.
pub fn xi<T: Float>(y: T, m_t: T, k: T) -> T {
    let a = m_t - k - T::one();
    if y <= a {
        T::zero()
    } else if y >= a + T::one() {
        T::one()
    } else {
        y - a
    }
}

/// Derivative of [`xi`]: 1 on the closed window `[M-k-1, M-k]`.
pub fn xi_prime<T: Float>(y: T, m_t: T, k: T) -> T {
    let a = m_t - k - T::one();
    if y >= a && y <= a + T::one() {
        T::one()
    } else {
        T::zero()
    }
}

/// `C^1` ramp: 1 for `y <= -1`, `1 - 2(y+1)^2` on `[-1, -1/2]`, `2 y^2` on `[-1/2, 0]`, 0 for `y >= 0`.
pub fn eta_tilde<T: Float>(y: T) -> T {
    let half = c::<T>(0.5);
    let two = c::<T>(2.0);
    if y <= -T::one() {
        T::one()
    } else if y <= -half {
        T::one() - two * (y + T::one()).powi(2)
    } else if y <= T::zero() {
        two * y * y
    } else {
        T::zero()
    }
}

pub fn eta_tilde_prime<T: Float>(y: T) -> T {
    let half = c::<T>(0.5);
    let four = c::<T>(4.0);
    if y <= -T::one() || y >= T::zero() {
        T::zero()
    } else if y <= -half {
        -four * (y + T::one())
    } else {
        four * y
    }
}

/// `eta(x, t) = eta_tilde(R(x, t) - R(M0, t))`, given both radii.
pub fn eta<T: Float>(r: T, r_at_m0: T) -> T {
    eta_tilde(r - r_at_m0)
}

/// `chi_m(r, t) = eta_tilde(r - R_m(M0, t))`.
pub fn chi_m<T: Float>(r: T, r_at_m0: T) -> T {
    eta_tilde(r - r_at_m0)
}

/// `d chi_m / dr`.
pub fn chi_m_prime<T: Float>(r: T, r_at_m0: T) -> T {
    eta_tilde_prime(r - r_at_m0)
}
