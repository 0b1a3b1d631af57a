use serde::Serialize;

use crate::infotheory::awgn_capacity;
use crate::{Error, Real, Result};

/// Precomputed coefficients of the scalar MMSE recursion.
///
/// With unit-gain, zero-mean observations `Y_i = X_i + N_i`:
///
/// * `V_0 = sigma2`, `V_i = V_{i-1} sigma2 / (N_S + sigma2)` is `Var[N_0 | Y^i]`;
/// * `gamma_i = sqrt(N_S / V_{i-1})` makes `E[X_i^2] = N_S`;
/// * `K_i = gamma_i V_{i-1} / (N_S + sigma2)` updates the estimate of `N_0`.
///
/// A channel gain `a` only enters by dividing received values by `a` before
/// the recursion; a declared noise mean is subtracted at the same point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkSchedule<T> {
    mean_photons: T,
    noise_variance: T,
    gain: T,
    noise_mean: T,
    amplifier_gains: Vec<T>,
    estimator_gains: Vec<T>,
    variances: Vec<T>,
}

impl<T: Real> SkSchedule<T> {
    /// Number of feedback rounds `n`.
    pub fn rounds(&self) -> u32 {
        self.amplifier_gains.len() as u32
    }

    pub fn mean_photons(&self) -> T {
        self.mean_photons
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    pub fn gain(&self) -> T {
        self.gain
    }

    pub fn noise_mean(&self) -> T {
        self.noise_mean
    }

    /// Declare a known noise mean; it becomes the prior estimate of `N_0` and
    /// is removed from every received value.
    pub fn with_noise_mean(mut self, mean: T) -> Self {
        self.noise_mean = mean;
        self
    }

    /// `gamma_i` for `i` in `1..=n`.
    pub fn amplifier_gain(&self, round: u32) -> T {
        self.amplifier_gains[round as usize - 1]
    }

    /// `K_i` for `i` in `1..=n`.
    pub fn estimator_gain(&self, round: u32) -> T {
        self.estimator_gains[round as usize - 1]
    }

    /// `V_i` for `i` in `0..=n`.
    pub fn variance(&self, round: u32) -> T {
        self.variances[round as usize]
    }

    pub fn amplifier_gains(&self) -> &[T] {
        &self.amplifier_gains
    }

    pub fn estimator_gains(&self) -> &[T] {
        &self.estimator_gains
    }

    pub fn variances(&self) -> &[T] {
        &self.variances
    }

    /// `V_n`, the variance of the final estimation error in unit-gain units.
    pub fn final_variance(&self) -> T {
        *self.variances.last().expect("V_0 always present")
    }

    /// `P_H = 1/2 log2(1 + N_S / sigma2)` for this schedule's channel.
    pub fn capacity(&self) -> T {
        awgn_capacity(self.mean_photons, self.noise_variance).expect("validated schedule")
    }

    /// Received value mapped to the unit-gain, zero-mean frame the recursion runs in.
    pub fn normalize(&self, received: T) -> T {
        received / self.gain - self.noise_mean
    }
}

/// Schedule for `n` rounds with photon budget `n_s`, noise variance `sigma2`
/// and channel gain `gain`.
pub fn make_schedule<T: Real>(rounds: u32, n_s: T, sigma2: T, gain: T) -> Result<SkSchedule<T>> {
    make_schedule_perturbed(rounds, n_s, sigma2, gain, T::zero())
}

/// [`make_schedule`] with the variance contraction factor scaled by
/// `1 + perturbation`. Only used to check that the verification suite notices
/// a wrong recursion.
#[doc(hidden)]
pub fn make_schedule_perturbed<T: Real>(
    rounds: u32,
    n_s: T,
    sigma2: T,
    gain: T,
    perturbation: T,
) -> Result<SkSchedule<T>> {
    if rounds == 0 {
        return Err(Error::domain("n", 0.0, "[1, inf)"));
    }
    if !(n_s.is_finite() && n_s > T::zero()) {
        return Err(Error::domain("n_s", n_s.to_f64_lossy(), "(0, inf)"));
    }
    if !(sigma2.is_finite() && sigma2 > T::zero()) {
        return Err(Error::domain("sigma2", sigma2.to_f64_lossy(), "(0, inf)"));
    }
    if gain == T::zero() || !gain.is_finite() {
        return Err(Error::domain("gain", gain.to_f64_lossy(), "nonzero finite"));
    }

    let total = n_s + sigma2;
    let contraction = sigma2 / total * (T::one() + perturbation);
    let capacity = awgn_capacity(n_s, sigma2)?;
    // Past ~30% of the exponent range the products below start losing to
    // underflow; switch to logarithms there.
    let log_space_bits = -T::min_positive_value().log2() * T::lit(0.3);
    let log_space = T::from_u32(rounds).unwrap() * capacity > log_space_bits;

    let n = rounds as usize;
    let mut amplifier_gains = Vec::with_capacity(n);
    let mut estimator_gains = Vec::with_capacity(n);
    let mut variances = Vec::with_capacity(n + 1);
    variances.push(sigma2);

    if log_space {
        let ln_contraction = contraction.ln();
        let ln_n_s = n_s.ln();
        let half = T::lit(0.5);
        let mut ln_v = sigma2.ln();
        for _ in 0..n {
            amplifier_gains.push((half * (ln_n_s - ln_v)).exp());
            estimator_gains.push((half * (ln_n_s + ln_v)).exp() / total);
            ln_v = ln_v + ln_contraction;
            variances.push(ln_v.exp());
        }
    } else {
        let mut v = sigma2;
        for _ in 0..n {
            let gamma = (n_s / v).sqrt();
            amplifier_gains.push(gamma);
            estimator_gains.push(gamma * v / total);
            v = v * contraction;
            variances.push(v);
        }
    }

    let representable = |v: &T| v.is_finite() && *v > T::zero();
    if !(amplifier_gains.iter().all(representable) && estimator_gains.iter().all(representable)) {
        return Err(Error::domain(
            "n",
            f64::from(rounds),
            "small enough that 2n P_H stays inside the exponent range",
        ));
    }

    Ok(SkSchedule {
        mean_photons: n_s,
        noise_variance: sigma2,
        gain,
        noise_mean: T::zero(),
        amplifier_gains,
        estimator_gains,
        variances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_round_coefficients() {
        let s = make_schedule(3, 3.0f64, 1.0, 1.0).unwrap();
        assert_eq!(s.amplifier_gain(1), 3f64.sqrt());
        assert!((s.estimator_gain(1) - 0.4330127018922193).abs() < 1e-15);
        assert_eq!(s.variance(0), 1.0);
        assert!((s.final_variance() - 0.015625).abs() < 1e-16);
        assert!((s.amplifier_gain(2) - 12f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn final_variance_identity() {
        for &(n_s, sigma2) in &[(0.5, 0.25), (3.0, 1.0), (10.0, 11.5), (100.0, 0.3)] {
            for n in [1u32, 5, 20, 50] {
                let s = make_schedule(n, n_s, sigma2, 1.0).unwrap();
                let expected = sigma2 * 2f64.powf(-2.0 * n as f64 * s.capacity());
                let rel = (s.final_variance() - expected).abs() / expected;
                assert!(rel < 1e-12, "n_s={n_s} sigma2={sigma2} n={n}: rel {rel}");
            }
        }
    }

    #[test]
    fn log_space_keeps_long_schedules_finite() {
        // n P_H = 400 bits, past the log-space threshold.
        let s = make_schedule(200, 15.0f64, 1.0, 1.0).unwrap();
        assert!(s.amplifier_gains().iter().all(|g| g.is_finite() && *g > 0.0));
        assert!(s.estimator_gains().iter().all(|k| k.is_finite() && *k > 0.0));
        for (round, bits) in [(100u32, -400), (200, -800)] {
            let expected = 2f64.powi(bits);
            let rel = (s.variance(round) - expected).abs() / expected;
            assert!(rel < 1e-12, "round {round}: rel {rel}");
        }
    }

    #[test]
    fn gain_and_mean_do_not_change_coefficients() {
        let a = make_schedule(6, 2.0f64, 0.7, 1.0).unwrap();
        let b = make_schedule(6, 2.0f64, 0.7, -3.0).unwrap().with_noise_mean(0.4);
        assert_eq!(a.amplifier_gains(), b.amplifier_gains());
        assert_eq!(a.estimator_gains(), b.estimator_gains());
        assert!((b.normalize(-3.0 * 1.4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_schedule(0, 1.0f64, 1.0, 1.0).is_err());
        assert!(make_schedule(1, 0.0f64, 1.0, 1.0).is_err());
        assert!(make_schedule(1, 1.0f64, 0.0, 1.0).is_err());
        assert!(make_schedule(1, 1.0f64, 1.0, 0.0).is_err());
        // gamma_3 = 10^450 overflows f64.
        assert!(make_schedule(3, 1.0f64, 1e-300, 1.0).is_err());
    }

    #[test]
    fn perturbation_moves_final_variance() {
        let exact = make_schedule(10, 3.0f64, 1.0, 1.0).unwrap();
        let off = make_schedule_perturbed(10, 3.0, 1.0, 1.0, 1e-6).unwrap();
        let rel = off.final_variance() / exact.final_variance() - 1.0;
        assert!(rel > 9e-6);
    }

    #[test]
    fn single_precision_schedule() {
        let s = make_schedule(3, 3.0f32, 1.0, 1.0).unwrap();
        assert!((s.final_variance() - 0.015625).abs() < 1e-8);
        // f32 switches to log space far earlier.
        let long = make_schedule(60, 3.0f32, 1.0, 1.0).unwrap();
        assert!(long.amplifier_gains().iter().all(|g| g.is_finite()));
    }
}
