//! Induced classical channels and Eve's round-0 tap.
//!
//! The bosonic channel is represented only through the statistics it induces
//! on Bob's homodyne outcome: a coherent state with real amplitude `x`, an
//! x-quadrature measurement and a rescaling by `1/sqrt(eta)`, giving
//! `Y = X + N` with `N ~ Normal(0, sigma2)`. The vacuum quadrature variance is
//! 1/4. Optical modes are never represented.

mod rng;

pub use rng::{Lane, Role, RngStream};

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::infotheory::{awgn_capacity, induced_sigma2, RateQuery};
use crate::{Error, Real, Result};

/// Thermal-noise lossy bosonic wiretap channel with an input photon budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalWiretapParams<T> {
    pub eta: T,
    pub n_th: T,
    pub n_s: T,
}

impl<T: Real> ThermalWiretapParams<T> {
    pub fn new(eta: T, n_th: T, n_s: T) -> Result<Self> {
        let p = Self { eta, n_th, n_s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        RateQuery::from_channel(self.eta, self.n_th, self.n_s).map(|_| ())
    }

    pub fn sigma2(&self) -> T {
        induced_sigma2(self.eta, self.n_th).expect("validated parameters")
    }

    pub fn rate_query(&self) -> RateQuery<T> {
        RateQuery::from_channel(self.eta, self.n_th, self.n_s).expect("validated parameters")
    }

    /// The induced channel: unit gain, zero-mean Gaussian noise of variance `sigma2`.
    pub fn as_affine(&self) -> AffineChannel<T> {
        let noise = NoiseModel::new(NoiseFamily::Gaussian, self.sigma2(), T::zero())
            .expect("induced variance is finite and positive");
        AffineChannel::new(T::one(), noise).expect("unit gain")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseFamily {
    Gaussian,
    Uniform,
    TwoPoint,
    ShiftedExponential,
}

/// Additive noise law with declared mean and variance. The mean is public
/// knowledge and is removed by the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct NoiseModel<T> {
    pub family: NoiseFamily,
    pub variance: T,
    #[serde(default = "zero")]
    pub mean: T,
}

fn zero<T: Real>() -> T {
    T::zero()
}

impl<T: Real> NoiseModel<T> {
    pub fn new(family: NoiseFamily, variance: T, mean: T) -> Result<Self> {
        let m = Self { family, variance, mean };
        m.validate()?;
        Ok(m)
    }

    pub fn gaussian(variance: T) -> Result<Self> {
        Self::new(NoiseFamily::Gaussian, variance, T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance.is_finite() && self.variance > T::zero()) {
            return Err(Error::domain("noise.variance", self.variance.to_f64_lossy(), "(0, inf)"));
        }
        if !self.mean.is_finite() {
            return Err(Error::domain("noise.mean", self.mean.to_f64_lossy(), "finite"));
        }
        Ok(())
    }

    /// One draw with the declared mean and variance.
    ///
    /// Uniform draws lie in `mean +- sqrt(3 var)`, two-point draws are
    /// `mean +- sqrt(var)` equiprobably, and shifted-exponential draws are
    /// `mean + sqrt(var) (E - 1)` with `E` standard exponential.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let sd = self.variance.to_f64_lossy().sqrt();
        let unit: f64 = match self.family {
            NoiseFamily::Gaussian => rng.sample(StandardNormal),
            NoiseFamily::Uniform => 3f64.sqrt() * (2.0 * rng.gen::<f64>() - 1.0),
            NoiseFamily::TwoPoint => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            NoiseFamily::ShiftedExponential => rng.sample::<f64, _>(Exp1) - 1.0,
        };
        self.mean + T::lit(sd * unit)
    }
}

/// `Y = a (X + N)` with `a != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct AffineChannel<T> {
    pub gain: T,
    pub noise: NoiseModel<T>,
}

impl<T: Real> AffineChannel<T> {
    pub fn new(gain: T, noise: NoiseModel<T>) -> Result<Self> {
        let ch = Self { gain, noise };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gain == T::zero() || !self.gain.is_finite() {
            return Err(Error::domain("gain", self.gain.to_f64_lossy(), "nonzero finite"));
        }
        self.noise.validate()
    }

    /// `a (x + n)` for a given noise realization.
    pub fn transmit_with_noise(&self, x: T, noise: T) -> T {
        self.gain * (x + noise)
    }

    /// `a (x + n)` with `n` drawn from the noise model. The realized noise is
    /// `y / a - x`.
    pub fn forward_transmit<R: Rng + ?Sized>(&self, x: T, rng: &mut R) -> T {
        self.transmit_with_noise(x, self.noise.sample(rng))
    }
}

/// Eve's noisy copy of Bob's round-0 feedback: `W = Y + S`, `S ~ Normal(0, N_tap)`.
///
/// Only round 0 goes through the tap. Later feedback reaches Eve noiselessly
/// but carries nothing about the message beyond what round 0 did, so it is not
/// recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EveTap<T> {
    pub variance: T,
}

impl<T: Real> EveTap<T> {
    pub fn new(variance: T) -> Result<Self> {
        let tap = Self { variance };
        tap.validate()?;
        Ok(tap)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variance.is_finite() && self.variance > T::zero() {
            Ok(())
        } else {
            Err(Error::domain("tap.variance", self.variance.to_f64_lossy(), "(0, inf)"))
        }
    }

    pub fn transmit_with_noise(&self, y: T, noise: T) -> T {
        y + noise
    }

    pub fn eve_tap_transmit<R: Rng + ?Sized>(&self, y: T, rng: &mut R) -> T {
        self.transmit_with_noise(y, self.sample_noise(rng))
    }

    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let z: f64 = rng.sample(StandardNormal);
        T::lit(self.variance.to_f64_lossy().sqrt() * z)
    }

    /// Capacity of the tap for inputs of mean power `input_power`.
    pub fn capacity(&self, input_power: T) -> Result<T> {
        awgn_capacity(input_power, self.variance)
    }
}
