//! Closed-form rates, capacities, error bounds and the privacy-leakage budget.
//!
//! All rates are in bits; natural logarithms only appear inside the
//! exponentials of the error bounds. Nothing here draws random numbers or keeps
//! state.

use serde::Serialize;

use crate::{Error, Real, Result};

fn check_positive<T: Real>(param: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value > T::zero() {
        Ok(value)
    } else {
        Err(Error::domain(param, value.to_f64_lossy(), "(0, inf)"))
    }
}

fn check_nonnegative<T: Real>(param: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value >= T::zero() {
        Ok(value)
    } else {
        Err(Error::domain(param, value.to_f64_lossy(), "[0, inf)"))
    }
}

fn check_transmissivity<T: Real>(eta: T) -> Result<T> {
    if eta > T::zero() && eta <= T::one() {
        Ok(eta)
    } else {
        Err(Error::domain("eta", eta.to_f64_lossy(), "(0, 1]"))
    }
}

/// `log2(1 + x)` without losing precision for small `x`.
fn log2_1p<T: Real>(x: T) -> T {
    x.ln_1p() / T::LN_2()
}

/// Entropy in bits of a thermal state with mean photon number `x`:
/// `(x+1) log2(x+1) - x log2(x)`, with `g(0) = 0`.
pub fn g_entropy<T: Real>(x: T) -> Result<T> {
    let x = check_nonnegative("x", x)?;
    if x == T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    Ok((x + one) * log2_1p(x) - x * x.log2())
}

/// Capacity `1/2 log2(1 + P/N)` of the real AWGN channel, bits per use.
pub fn awgn_capacity<T: Real>(power: T, noise: T) -> Result<T> {
    let power = check_nonnegative("power", power)?;
    let noise = check_positive("noise", noise)?;
    Ok(T::lit(0.5) * log2_1p(power / noise))
}

/// Homodyne noise variance of the thermal lossy channel after Bob rescales
/// his outcome by `1/sqrt(eta)`: `1/(4 eta) + (1 - eta) n_th / (2 eta)`.
pub fn induced_sigma2<T: Real>(eta: T, n_th: T) -> Result<T> {
    let eta = check_transmissivity(eta)?;
    let n_th = check_nonnegative("n_th", n_th)?;
    let one = T::one();
    Ok(one / (T::lit(4.0) * eta) + (one - eta) * n_th / (T::lit(2.0) * eta))
}

/// Physical parameters that fix every closed-form rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateQuery<T> {
    pub mean_photons: T,
    pub noise_variance: T,
    pub transmissivity: T,
    pub thermal_photons: T,
}

impl<T: Real> RateQuery<T> {
    pub fn new(mean_photons: T, noise_variance: T, transmissivity: T, thermal_photons: T) -> Result<Self> {
        Ok(Self {
            mean_photons: check_positive("n_s", mean_photons)?,
            noise_variance: check_positive("sigma2", noise_variance)?,
            transmissivity: check_transmissivity(transmissivity)?,
            thermal_photons: check_nonnegative("n_th", thermal_photons)?,
        })
    }

    /// Query whose noise variance is the induced homodyne variance of the channel.
    pub fn from_channel(eta: T, n_th: T, mean_photons: T) -> Result<Self> {
        let sigma2 = induced_sigma2(eta, n_th)?;
        Self::new(mean_photons, sigma2, eta, n_th)
    }

    /// Coherent-state, homodyne-receiver rate `P_H`.
    pub fn coherent_rate(&self) -> T {
        rate_coherent_homodyne(self)
    }
}

/// Blocklength and nominal rate on top of a [`RateQuery`].
///
/// `rate >= P_H` is accepted: the bounds become vacuous rather than erroneous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundQuery<T> {
    /// Rounds after the initial one.
    pub blocklength: u32,
    pub rate: T,
    pub rates: RateQuery<T>,
}

impl<T: Real> BoundQuery<T> {
    pub fn new(blocklength: u32, rate: T, rates: RateQuery<T>) -> Result<Self> {
        if blocklength == 0 {
            return Err(Error::domain("n", 0.0, "[1, inf)"));
        }
        Ok(Self {
            blocklength,
            rate: check_positive("rate", rate)?,
            rates,
        })
    }

    fn n(&self) -> T {
        T::from_u32(self.blocklength).expect("u32 fits any float")
    }
}

/// `P_H = 1/2 log2(1 + N_S / sigma2)`.
pub fn rate_coherent_homodyne<T: Real>(q: &RateQuery<T>) -> T {
    awgn_capacity(q.mean_photons, q.noise_variance).expect("validated by RateQuery")
}

/// Squeezed-state encoding rate with a homodyne receiver over the pure-loss
/// channel. Undefined at `eta = 1`, where callers fall back to the coherent rate.
pub fn rate_squeezed_homodyne<T: Real>(eta: T, mean_photons: T) -> Result<T> {
    if !(eta > T::zero() && eta < T::one()) {
        return Err(Error::domain("eta", eta.to_f64_lossy(), "(0, 1)"));
    }
    let n_s = check_positive("n_s", mean_photons)?;
    let one = T::one();
    let two = T::lit(2.0);
    let loss_ratio = (one - eta) / eta;
    let inner = one + two * loss_ratio * ((one + eta) / (two * eta) + two * n_s);
    let f = eta * (inner.sqrt() - one) / (one - eta);
    let snr = (T::lit(4.0) * n_s + two - f + f.recip()) / (loss_ratio + f.recip());
    Ok(T::lit(0.5) * log2_1p(snr))
}

/// Natural log of [`sk_error_bound`]; finite even where the bound itself
/// underflows to zero.
pub fn sk_error_bound_ln<T: Real>(b: &BoundQuery<T>) -> T {
    let q = &b.rates;
    let gap = rate_coherent_homodyne(q) - b.rate;
    let two = T::lit(2.0);
    let growth = two.powf(two * b.n() * gap - T::one());
    let prefactor = (two / T::PI()).sqrt().ln();
    prefactor - growth * q.mean_photons / q.noise_variance
}

/// Doubly-exponential decoding-error bound of the feedback protocol:
/// `sqrt(2/pi) exp(-2^(2n(P_H - R) - 1) N_S / sigma2)`, at most `sqrt(2/pi)`.
pub fn sk_error_bound<T: Real>(b: &BoundQuery<T>) -> T {
    let cap = (T::lit(2.0) / T::PI()).sqrt();
    sk_error_bound_ln(b).exp().min(cap)
}

/// Chebyshev bound for the affine channel `a (X + N)`:
/// `a^2 2^(-2n(C - R)) Var[N] / N_S` with `C = awgn_capacity(N_S, Var[N])`.
pub fn chebyshev_error_bound<T: Real>(gain: T, noise_variance: T, b: &BoundQuery<T>) -> Result<T> {
    if gain == T::zero() || !gain.is_finite() {
        return Err(Error::domain("gain", gain.to_f64_lossy(), "nonzero finite"));
    }
    let var = check_positive("noise_variance", noise_variance)?;
    let n_s = b.rates.mean_photons;
    let capacity = awgn_capacity(n_s, var)?;
    let two = T::lit(2.0);
    Ok(gain * gain * two.powf(-two * b.n() * (capacity - b.rate)) * var / n_s)
}

fn phi_unchecked<T: Real>(nu: T, n_s: T, sigma2: T) -> T {
    nu / T::lit(2.0) * log2_1p(n_s / (sigma2 * nu))
}

/// `phi(nu) = nu/2 log2(1 + N_S / (sigma2 nu))` on `(0, 1]`; `phi(1) = P_H`.
pub fn phi<T: Real>(nu: T, n_s: T, sigma2: T) -> Result<T> {
    if !(nu > T::zero() && nu <= T::one()) {
        return Err(Error::domain("nu", nu.to_f64_lossy(), "(0, 1]"));
    }
    let n_s = check_positive("n_s", n_s)?;
    let sigma2 = check_positive("sigma2", sigma2)?;
    Ok(phi_unchecked(nu, n_s, sigma2))
}

/// Inverse of [`phi`] by bisection on `(0, 1]`, run until the bracket can no
/// longer be halved in `T`.
pub fn phi_inverse<T: Real>(rate: T, n_s: T, sigma2: T) -> Result<T> {
    let p_h = phi(T::one(), n_s, sigma2)?;
    if !(rate > T::zero() && rate <= p_h) {
        return Err(Error::domain("rate", rate.to_f64_lossy(), "(0, P_H]"));
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    loop {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi_unchecked(mid, n_s, sigma2) < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == T::zero() {
        return Ok(hi);
    }
    let lo_err = (phi_unchecked(lo, n_s, sigma2) - rate).abs();
    let hi_err = (phi_unchecked(hi, n_s, sigma2) - rate).abs();
    Ok(if hi_err <= lo_err { hi } else { lo })
}

/// Order `f(n) = floor(n (1 - nu*) - 5 (1 - nu*) / (P_H - R))` of the tower
/// bound, `nu* = phi^-1(R)`. Nonpositive values mean the bound is not active yet.
pub fn tetration_order<T: Real>(b: &BoundQuery<T>) -> Result<i64> {
    let q = &b.rates;
    let p_h = rate_coherent_homodyne(q);
    if b.rate >= p_h {
        return Err(Error::domain("rate", b.rate.to_f64_lossy(), "(0, P_H)"));
    }
    let nu = phi_inverse(b.rate, q.mean_photons, q.noise_variance)?;
    let slack = T::one() - nu;
    let order = (b.n() * slack - T::lit(5.0) * slack / (p_h - b.rate)).floor();
    order
        .to_i64()
        .ok_or_else(|| Error::Internal(format!("tower order {order} not representable")))
}

/// Value of `1 / (e^^k)`, or the order alone once the tower leaves the range of `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TetrationBound<T> {
    Finite { order: u32, value: T },
    Underflow { order: u32 },
}

impl<T: Real> TetrationBound<T> {
    pub fn order(&self) -> u32 {
        match *self {
            TetrationBound::Finite { order, .. } | TetrationBound::Underflow { order } => order,
        }
    }

    /// The bound as a number; zero for the underflow marker.
    pub fn value(&self) -> T {
        match *self {
            TetrationBound::Finite { value, .. } => value,
            TetrationBound::Underflow { .. } => T::zero(),
        }
    }
}

/// `1 / (e^^order)`. Since `e^^k = exp(e^^(k-1))`, the reciprocal is
/// `exp(-e^^(k-1))` and only the shorter tower has to be represented.
pub fn tetration_bound_for_order<T: Real>(order: i64) -> Result<TetrationBound<T>> {
    if order < 1 {
        return Err(Error::BoundInactive { order });
    }
    let order_u32 = u32::try_from(order).unwrap_or(u32::MAX);
    let mut exponent = T::one(); // e^^0
    for _ in 1..order {
        exponent = exponent.exp();
        if !exponent.is_finite() {
            return Ok(TetrationBound::Underflow { order: order_u32 });
        }
    }
    let value = (-exponent).exp();
    if value == T::zero() {
        Ok(TetrationBound::Underflow { order: order_u32 })
    } else {
        Ok(TetrationBound::Finite {
            order: order_u32,
            value,
        })
    }
}

/// Tower-exponent error bound `1 / (e^^f(n))`.
pub fn tetration_error_bound<T: Real>(b: &BoundQuery<T>) -> Result<TetrationBound<T>> {
    tetration_bound_for_order(tetration_order(b)?)
}

/// Standard Gaussian tail `Q(x) = P(Z > x)`.
pub fn q_function<T: Real>(x: T) -> T {
    let x = x.to_f64_lossy();
    T::lit(0.5 * libm::erfc(x / std::f64::consts::SQRT_2))
}

/// Analytic upper bound on what Eve learns about the message, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakageBudget<T> {
    /// Capacity of the AWGN tap at input power `N_S + sigma2`.
    pub tap_capacity: T,
    /// `g((1 - eta) N_S + eta n_th)`, the entropy ceiling of Eve's optical mode.
    pub eve_entropy_bound: T,
    pub total_bits: T,
    /// `total_bits / (n + 1)`.
    pub per_mode_bits: T,
}

/// Leakage budget of an `(n + 1)`-use run with an AWGN tap of variance `tap_variance`.
pub fn leakage_budget<T: Real>(
    eta: T,
    n_th: T,
    n_s: T,
    sigma2: T,
    tap_variance: T,
    rounds: u32,
) -> Result<LeakageBudget<T>> {
    let eta = check_transmissivity(eta)?;
    let n_th = check_nonnegative("n_th", n_th)?;
    let n_s = check_positive("n_s", n_s)?;
    let sigma2 = check_positive("sigma2", sigma2)?;
    let tap_variance = check_positive("tap_variance", tap_variance)?;
    if rounds == 0 {
        return Err(Error::domain("n", 0.0, "[1, inf)"));
    }
    let tap_capacity = awgn_capacity(n_s + sigma2, tap_variance)?;
    let eve_entropy_bound = g_entropy((T::one() - eta) * n_s + eta * n_th)?;
    let total_bits = tap_capacity + eve_entropy_bound;
    let uses = T::from_u32(rounds).expect("u32 fits any float") + T::one();
    Ok(LeakageBudget {
        tap_capacity,
        eve_entropy_bound,
        total_bits,
        per_mode_bits: total_bits / uses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn query(n_s: f64, sigma2: f64) -> RateQuery<f64> {
        RateQuery::new(n_s, sigma2, 1.0, 0.0).unwrap()
    }

    #[test]
    fn g_entropy_values() {
        assert_eq!(g_entropy(0.0).unwrap(), 0.0);
        assert!(close(g_entropy(1.0).unwrap(), 2.0, 1e-15));
        assert!(close(g_entropy(3.0).unwrap(), 3.245112497836531, 1e-14));
        assert!(matches!(g_entropy(-0.1), Err(Error::Domain { param: "x", .. })));
    }

    #[test]
    fn g_entropy_is_increasing_and_concave() {
        let grid: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
        let g: Vec<f64> = grid.iter().map(|&x| g_entropy(x).unwrap()).collect();
        assert!(g.iter().all(|&v| v >= 0.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] <= 1e-12));
    }

    #[test]
    fn awgn_capacity_values() {
        assert_eq!(awgn_capacity(3.0, 1.0).unwrap(), 1.0);
        assert_eq!(awgn_capacity(0.0, 1.0).unwrap(), 0.0);
        assert!(close(awgn_capacity(4.0, 1.0).unwrap(), 1.160964047443681, 1e-15));
        assert!(awgn_capacity(1.0, 0.0).is_err());
        assert!(awgn_capacity(1.0, -1.0).is_err());
    }

    #[test]
    fn coherent_rate_values() {
        assert_eq!(rate_coherent_homodyne(&query(3.0, 1.0)), 1.0);
        assert!(rate_coherent_homodyne(&query(1e-12, 1.0)) < 1e-11);
        let q = RateQuery::from_channel(1.0, 0.0, 10.0).unwrap();
        assert_eq!(q.noise_variance, 0.25);
        assert!(close(q.coherent_rate(), 2.678776002309042, 1e-14));
    }

    #[test]
    fn rate_query_rejects_bad_parameters() {
        assert!(RateQuery::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(RateQuery::new(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(RateQuery::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(RateQuery::new(1.0, 1.0, 1.5, 0.0).is_err());
        assert!(RateQuery::new(1.0, 1.0, 0.5, -1.0).is_err());
        assert!(BoundQuery::new(0, 0.5, query(1.0, 1.0)).is_err());
        assert!(BoundQuery::new(1, 0.0, query(1.0, 1.0)).is_err());
        // Rates above P_H are allowed.
        assert!(BoundQuery::new(1, 5.0, query(1.0, 1.0)).is_ok());
    }

    #[test]
    fn induced_sigma2_values() {
        assert_eq!(induced_sigma2(1.0, 0.0).unwrap(), 0.25);
        assert_eq!(induced_sigma2(0.5, 1.0).unwrap(), 1.0);
        assert!(close(induced_sigma2(0.1, 2.0).unwrap(), 11.5, 1e-12));
        assert!(induced_sigma2(0.0, 1.0).is_err());
        assert!(induced_sigma2(1.1, 1.0).is_err());
    }

    #[test]
    fn squeezed_rate_matches_high_precision_evaluation() {
        // Reference values from a 40-digit evaluation of the closed form.
        assert!(close(rate_squeezed_homodyne(0.5, 1.0).unwrap(), 1.0090059311424344, 1e-13));
        assert!(close(rate_squeezed_homodyne(0.9, 5.0).unwrap(), 2.9639256689525944, 1e-13));
        assert!(close(rate_squeezed_homodyne(0.3, 0.5).unwrap(), 0.5440685840411919, 1e-13));
        // The closed form tends to 1/2 bit, not zero, as N_S -> 0.
        assert!(close(rate_squeezed_homodyne(0.5, 1e-9).unwrap(), 0.5000000005410106, 1e-12));
        assert!(matches!(
            rate_squeezed_homodyne(1.0, 1.0),
            Err(Error::Domain { param: "eta", .. })
        ));
    }

    #[test]
    fn squeezed_rate_exceeds_coherent_rate() {
        for &eta in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            for &n_s in &[0.1, 0.5, 1.0, 3.0, 10.0, 100.0] {
                let coherent = RateQuery::from_channel(eta, 0.0, n_s).unwrap().coherent_rate();
                let squeezed = rate_squeezed_homodyne(eta, n_s).unwrap();
                assert!(squeezed >= coherent, "eta={eta} n_s={n_s}: {squeezed} < {coherent}");
            }
        }
    }

    #[test]
    fn sk_bound_values() {
        let q = query(3.0, 1.0);
        let b = BoundQuery::new(10, 0.5, q).unwrap();
        assert!(sk_error_bound(&b) < 1e-300);
        assert!(close(sk_error_bound_ln(&b), 0.5 * (2.0 / std::f64::consts::PI).ln() - 512.0 * 3.0, 1e-9));

        let at_capacity = BoundQuery::new(7, 1.0, q).unwrap();
        let expected = (2.0 / std::f64::consts::PI).sqrt() * (-1.5f64).exp();
        assert!(close(sk_error_bound(&at_capacity), expected, 1e-15));

        let observable = BoundQuery::new(2, 0.95, q).unwrap();
        assert!(close(sk_error_bound(&observable), 0.14243936406839356, 1e-14));

        // Above capacity the bound is vacuous but capped.
        let above = BoundQuery::new(50, 4.0, q).unwrap();
        assert!(sk_error_bound(&above) <= (2.0 / std::f64::consts::PI).sqrt());
    }

    #[test]
    fn chebyshev_bound_values() {
        let q = query(3.0, 1.0);
        let b5 = BoundQuery::new(5, 0.5, q).unwrap();
        let one = chebyshev_error_bound(1.0, 1.0, &b5).unwrap();
        assert!(close(one, 0.010416666666666666, 1e-16));
        assert!(close(chebyshev_error_bound(2.0, 1.0, &b5).unwrap(), 4.0 * one, 1e-16));
        let b10 = BoundQuery::new(10, 0.5, q).unwrap();
        assert!(close(chebyshev_error_bound(1.0, 1.0, &b10).unwrap(), 0.0003255208333333333, 1e-18));
        assert!(chebyshev_error_bound(0.0, 1.0, &b10).is_err());
        assert!(chebyshev_error_bound(1.0, 0.0, &b10).is_err());
    }

    #[test]
    fn bounds_are_nonincreasing_in_n() {
        let q = query(3.0, 1.0);
        for &r in &[0.1, 0.5, 0.9, 0.99] {
            let sk: Vec<f64> = (1..60).map(|n| sk_error_bound(&BoundQuery::new(n, r, q).unwrap())).collect();
            assert!(sk.windows(2).all(|w| w[1] <= w[0]));
            let ch: Vec<f64> = (1..60)
                .map(|n| chebyshev_error_bound(1.0, 1.0, &BoundQuery::new(n, r, q).unwrap()).unwrap())
                .collect();
            assert!(ch.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn phi_values() {
        assert!(close(phi(1.0, 3.0, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(phi(0.5, 3.0, 1.0).unwrap(), 0.701_838_730_514_401, 1e-15));
        assert!(phi(1e-12, 3.0, 1.0).unwrap() < 1e-10);
        assert!(phi(0.0, 3.0, 1.0).is_err());
        assert!(phi(1.5, 3.0, 1.0).is_err());
    }

    #[test]
    fn phi_is_strictly_increasing() {
        let values: Vec<f64> = (1..=1000).map(|i| phi(i as f64 / 1000.0, 3.0, 1.0).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
        let q = RateQuery::from_channel(0.3, 0.5, 2.0).unwrap();
        assert!(close(phi(1.0, 2.0, q.noise_variance).unwrap(), q.coherent_rate(), 1e-12));
    }

    #[test]
    fn phi_inverse_values() {
        assert!(close(phi_inverse(1.0, 3.0, 1.0).unwrap(), 1.0, 1e-15));
        let nu = phi_inverse(0.5f64, 3.0, 1.0).unwrap();
        assert!((phi(nu, 3.0, 1.0).unwrap() - 0.5).abs() < 1e-10);
        let back = phi_inverse(phi(0.5, 3.0, 1.0).unwrap(), 3.0, 1.0).unwrap();
        assert!(close(back, 0.5, 1e-10));
        assert!(phi_inverse(0.0, 3.0, 1.0).is_err());
        assert!(phi_inverse(1.01, 3.0, 1.0).is_err());
    }

    #[test]
    fn tetration_order_values() {
        let q = query(3.0, 1.0);
        let nu = phi_inverse(0.5f64, 3.0, 1.0).unwrap();
        let b = BoundQuery::new(100, 0.5, q).unwrap();
        let expected = (100.0 * (1.0 - nu) - 10.0 * (1.0 - nu)).floor() as i64;
        assert_eq!(tetration_order(&b).unwrap(), expected);
        assert!(tetration_order(&BoundQuery::new(1, 0.5, q).unwrap()).unwrap() <= 0);
        let orders: Vec<i64> = (1..300)
            .map(|n| tetration_order(&BoundQuery::new(n, 0.5, q).unwrap()).unwrap())
            .collect();
        assert!(orders.windows(2).all(|w| w[1] >= w[0] && w[1] - w[0] <= 1));
        assert!(tetration_order(&BoundQuery::new(10, 1.0, q).unwrap()).is_err());
        assert!(tetration_order(&BoundQuery::new(10, 1.5, q).unwrap()).is_err());
    }

    #[test]
    fn tetration_bound_values() {
        let one: TetrationBound<f64> = tetration_bound_for_order(1).unwrap();
        assert!(close(one.value(), 0.36787944117144233, 1e-15));
        let two: TetrationBound<f64> = tetration_bound_for_order(2).unwrap();
        assert!(close(two.value(), 0.06598803584531254, 1e-16));
        let three: TetrationBound<f64> = tetration_bound_for_order(3).unwrap();
        assert!(close(three.value(), 2.621727389461353e-7, 1e-20));
        assert_eq!(
            tetration_bound_for_order::<f64>(4).unwrap(),
            TetrationBound::Underflow { order: 4 }
        );
        assert_eq!(tetration_bound_for_order::<f64>(1_000_000).unwrap().order(), 1_000_000);
        assert_eq!(
            tetration_bound_for_order::<f64>(0),
            Err(Error::BoundInactive { order: 0 })
        );
        let b = BoundQuery::new(3, 0.5, query(3.0, 1.0)).unwrap();
        assert!(matches!(tetration_error_bound(&b), Err(Error::BoundInactive { .. })));
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!(close(q_function(1.0), 0.15865525393145705, 1e-15));
        let tail = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!(close(tail, 0.24197072451914337, 1e-15));
        assert!(q_function(1.0) <= tail);
    }

    #[test]
    fn q_function_tail_bound_on_grid() {
        for i in 0..=900 {
            let x = 1.0 + i as f64 * 0.01;
            let bound = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            assert!(q_function(x) <= bound, "x = {x}");
        }
    }

    #[test]
    fn leakage_budget_values() {
        let l = leakage_budget(0.5, 0.0, 2.0, 0.5, 1.0, 99).unwrap();
        assert!(close(l.tap_capacity, 0.9036774610288021, 1e-15));
        assert!(close(l.eve_entropy_bound, 2.0, 1e-15));
        assert!(close(l.per_mode_bits, 0.029_036_774_610_288_02, 1e-15));
        let vacuum = leakage_budget(1.0, 0.0, 2.0, 0.25, 1.0, 1).unwrap();
        assert_eq!(vacuum.eve_entropy_bound, 0.0);
        assert!(matches!(
            leakage_budget(0.5, 0.0, 2.0, 0.5, 0.0, 99),
            Err(Error::Domain { param: "tap_variance", .. })
        ));
    }

    #[test]
    fn leakage_per_mode_decreases_with_n() {
        let per_mode: Vec<f64> = (1..200)
            .map(|n| leakage_budget(0.5, 1.0, 2.0, 1.0, 0.5, n).unwrap().per_mode_bits)
            .collect();
        assert!(per_mode.windows(2).all(|w| w[1] < w[0]));
        for n in [1u32, 9, 99, 999, 99_999] {
            let l = leakage_budget(0.5, 1.0, 2.0, 1.0, 0.5, n).unwrap();
            assert!(close(l.per_mode_bits * (n as f64 + 1.0), l.total_bits, 1e-12 * l.total_bits));
        }
    }

    #[test]
    fn single_precision_instantiation() {
        let q = RateQuery::<f32>::new(3.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(q.coherent_rate(), 1.0f32);
        assert!((g_entropy(3.0f32).unwrap() - 3.2451125).abs() < 1e-5);
        let nu = phi_inverse(0.5f32, 3.0, 1.0).unwrap();
        assert!((phi(nu, 3.0, 1.0).unwrap() - 0.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn coherent_rate_is_awgn_capacity_of_induced_noise(
            eta in 0.01f64..=1.0, n_th in 0.0f64..10.0, n_s in 1e-3f64..100.0
        ) {
            let q = RateQuery::from_channel(eta, n_th, n_s).unwrap();
            let sigma2 = induced_sigma2(eta, n_th).unwrap();
            prop_assert_eq!(q.coherent_rate(), awgn_capacity(n_s, sigma2).unwrap());
        }

        #[test]
        fn phi_inverse_round_trip(frac in 1e-6f64..1.0, n_s in 0.1f64..50.0, sigma2 in 0.05f64..20.0) {
            let p_h = phi(1.0, n_s, sigma2).unwrap();
            let r = frac * p_h;
            let nu = phi_inverse(r, n_s, sigma2).unwrap();
            prop_assert!(nu > 0.0 && nu <= 1.0);
            prop_assert!((phi(nu, n_s, sigma2).unwrap() - r).abs() < 1e-10);
        }

        #[test]
        fn q_function_symmetry(x in -30.0f64..30.0) {
            prop_assert!((q_function(x) + q_function(-x) - 1.0).abs() < 1e-12);
        }
    }
}
