use serde::Serialize;

use crate::{Error, Real, Result};

/// Largest `ceil(nR)` accepted; message indices stay well inside `u64` and
/// midpoints stay resolvable in `f64`.
pub const MAX_CODEBOOK_BITS: u32 = 40;

/// `M = 2^ceil(nR)` equal-length intervals of `[-sqrt(N_S), sqrt(N_S)]`; message
/// `m` (1-based) is sent as the midpoint of interval `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codebook<T> {
    message_count: u64,
    bits: u32,
    amplitude: T,
    blocklength: u32,
    nominal_rate: T,
}

impl<T: Real> Codebook<T> {
    pub fn message_count(&self) -> u64 {
        self.message_count
    }

    /// `log2(M)`.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `sqrt(N_S)`, the half-width of the signalling interval.
    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn blocklength(&self) -> u32 {
        self.blocklength
    }

    pub fn nominal_rate(&self) -> T {
        self.nominal_rate
    }

    /// `log2(M) / n` bits per round.
    pub fn realized_rate(&self) -> T {
        T::from_u32(self.bits).unwrap() / T::from_u32(self.blocklength).unwrap()
    }

    /// Rate per channel use once the initial transmission is counted: `n/(n+1)` of the realized rate.
    pub fn effective_rate(&self) -> T {
        let n = T::from_u32(self.blocklength).unwrap();
        self.realized_rate() * n / (n + T::one())
    }

    /// Half the distance between neighbouring midpoints, `sqrt(N_S) / M`.
    pub fn half_gap(&self) -> T {
        self.amplitude / self.count_t()
    }

    fn count_t(&self) -> T {
        T::from_u64(self.message_count).unwrap()
    }

    fn midpoint_unchecked(&self, m: u64) -> T {
        let count = self.count_t();
        let two_m = T::from_u64(2 * m).unwrap();
        self.amplitude * (two_m - T::one() - count) / count
    }

    /// `theta(m) = sqrt(N_S) (2m - 1 - M) / M`.
    pub fn midpoint(&self, m: u64) -> Result<T> {
        if m == 0 || m > self.message_count {
            return Err(Error::Config(format!(
                "message {m} outside [1, {}]",
                self.message_count
            )));
        }
        Ok(self.midpoint_unchecked(m))
    }

    pub fn midpoints(&self) -> impl Iterator<Item = T> + '_ {
        (1..=self.message_count).map(move |m| self.midpoint_unchecked(m))
    }

    /// Index of the midpoint closest to `theta`. Ties go to the smaller index
    /// and values outside the interval clamp to the boundary messages.
    pub fn nearest(&self, theta: T) -> u64 {
        if theta.is_nan() {
            return 1;
        }
        if theta.is_infinite() {
            return if theta > T::zero() { self.message_count } else { 1 };
        }
        let count = self.count_t();
        let continuous = (theta * count / self.amplitude + count + T::one()) / T::lit(2.0);
        let guess = (continuous - T::lit(0.5)).ceil();
        let guess = if guess <= T::one() {
            1
        } else if guess >= count {
            self.message_count
        } else {
            guess.to_u64().unwrap()
        };
        let lo = guess.saturating_sub(1).max(1);
        let hi = (guess + 1).min(self.message_count);
        let mut best = lo;
        let mut best_dist = (theta - self.midpoint_unchecked(lo)).abs();
        for m in lo + 1..=hi {
            let d = (theta - self.midpoint_unchecked(m)).abs();
            if d < best_dist {
                best = m;
                best_dist = d;
            }
        }
        best
    }
}

/// Codebook for blocklength `n`, nominal rate `rate` and photon budget `n_s`.
pub fn make_codebook<T: Real>(blocklength: u32, rate: T, n_s: T) -> Result<Codebook<T>> {
    if blocklength == 0 {
        return Err(Error::domain("n", 0.0, "[1, inf)"));
    }
    if !(rate.is_finite() && rate > T::zero()) {
        return Err(Error::domain("rate", rate.to_f64_lossy(), "(0, inf)"));
    }
    if !(n_s.is_finite() && n_s > T::zero()) {
        return Err(Error::domain("n_s", n_s.to_f64_lossy(), "(0, inf)"));
    }
    let bits = (T::from_u32(blocklength).unwrap() * rate).ceil();
    if bits > T::from_u32(MAX_CODEBOOK_BITS).unwrap() {
        return Err(Error::Config(format!(
            "codebook needs 2^{bits} messages; at most 2^{MAX_CODEBOOK_BITS} supported"
        )));
    }
    let bits = bits.to_u32().unwrap().max(1);
    Ok(Codebook {
        message_count: 1u64 << bits,
        bits,
        amplitude: n_s.sqrt(),
        blocklength,
        nominal_rate: rate,
    })
}
