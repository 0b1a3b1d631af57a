//! Closed-form tables behind the `rates` and `bounds` commands.

use serde::Serialize;

use super::ChannelSpec;
use crate::channel::EveTap;
use crate::infotheory::{
    chebyshev_error_bound, leakage_budget, rate_squeezed_homodyne, sk_error_bound, sk_error_bound_ln,
    tetration_bound_for_order, tetration_order, BoundQuery, LeakageBudget, RateQuery, TetrationBound,
};
use crate::protocol::make_codebook;
use crate::{Error, Result};

fn rate_query(channel: &ChannelSpec) -> Result<RateQuery<f64>> {
    channel.validate()?;
    match channel {
        ChannelSpec::Thermal(p) => Ok(p.rate_query()),
        ChannelSpec::Affine(a) => RateQuery::new(a.n_s, a.noise.variance, 1.0, 0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatesTable {
    pub eta: Option<f64>,
    pub n_th: Option<f64>,
    pub n_s: f64,
    pub sigma2: f64,
    pub p_h: f64,
    /// Squeezed-state rate; only defined for thermal channels with `eta < 1`.
    pub p_sq: Option<f64>,
    pub n: u32,
    pub rate: f64,
    pub message_count: u64,
    pub realized_rate: f64,
    pub effective_rate: f64,
}

/// All closed-form rates. With `require_squeezed` an undefined squeezed rate
/// is an error instead of a missing entry.
pub fn rates_table(channel: &ChannelSpec, n: u32, rate: f64, require_squeezed: bool) -> Result<RatesTable> {
    let q = rate_query(channel)?;
    let (eta, n_th, p_sq) = match channel {
        ChannelSpec::Thermal(p) => {
            let sq = rate_squeezed_homodyne(p.eta, p.n_s);
            let sq = if require_squeezed { Some(sq?) } else { sq.ok() };
            (Some(p.eta), Some(p.n_th), sq)
        }
        ChannelSpec::Affine(_) if require_squeezed => {
            return Err(Error::Config("squeezed rate needs a thermal channel".into()))
        }
        ChannelSpec::Affine(_) => (None, None, None),
    };
    let codebook = make_codebook(n, rate, q.mean_photons)?;
    Ok(RatesTable {
        eta,
        n_th,
        n_s: q.mean_photons,
        sigma2: q.noise_variance,
        p_h: q.coherent_rate(),
        p_sq,
        n,
        rate,
        message_count: codebook.message_count(),
        realized_rate: codebook.realized_rate(),
        effective_rate: codebook.effective_rate(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TetrationEntry {
    /// `R >= P_H`: the tower bound is not defined.
    NotApplicable,
    /// `f(n) < 1`: `n` is not yet large enough.
    NotActive { order: i64 },
    Finite { order: u32, value: f64 },
    Underflow { order: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsTable {
    pub n_s: f64,
    pub sigma2: f64,
    pub p_h: f64,
    pub n: u32,
    pub rate: f64,
    pub sk_bound: f64,
    /// Natural log of `sk_bound`, reported because the bound underflows quickly.
    pub sk_bound_ln: f64,
    pub sk_bound_log10: f64,
    pub chebyshev_bound: f64,
    pub tetration: TetrationEntry,
    pub leakage: Option<LeakageBudget<f64>>,
}

pub fn bounds_table(channel: &ChannelSpec, n: u32, rate: f64, tap: &EveTap<f64>) -> Result<BoundsTable> {
    tap.validate()?;
    let q = rate_query(channel)?;
    let b = BoundQuery::new(n, rate, q)?;
    let p_h = q.coherent_rate();
    let gain = match channel {
        ChannelSpec::Thermal(_) => 1.0,
        ChannelSpec::Affine(a) => a.gain,
    };
    let tetration = if rate >= p_h {
        TetrationEntry::NotApplicable
    } else {
        let order = tetration_order(&b)?;
        if order < 1 {
            TetrationEntry::NotActive { order }
        } else {
            match tetration_bound_for_order::<f64>(order)? {
                TetrationBound::Finite { order, value } => TetrationEntry::Finite { order, value },
                TetrationBound::Underflow { order } => TetrationEntry::Underflow { order },
            }
        }
    };
    let leakage = match channel {
        ChannelSpec::Thermal(p) => Some(leakage_budget(p.eta, p.n_th, p.n_s, p.sigma2(), tap.variance, n)?),
        ChannelSpec::Affine(_) => None,
    };
    Ok(BoundsTable {
        n_s: q.mean_photons,
        sigma2: q.noise_variance,
        p_h,
        n,
        rate,
        sk_bound: sk_error_bound(&b),
        sk_bound_ln: sk_error_bound_ln(&b),
        sk_bound_log10: sk_error_bound_ln(&b) / std::f64::consts::LN_10,
        chebyshev_bound: chebyshev_error_bound(gain, q.noise_variance, &b)?,
        tetration,
        leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ThermalWiretapParams;

    fn thermal(eta: f64, n_th: f64, n_s: f64) -> ChannelSpec {
        ChannelSpec::Thermal(ThermalWiretapParams::new(eta, n_th, n_s).unwrap())
    }

    #[test]
    fn rates_at_unit_transmissivity() {
        let t = rates_table(&thermal(1.0, 0.0, 3.0), 10, 0.5, false).unwrap();
        assert_eq!(t.sigma2, 0.25);
        assert!((t.p_h - 0.5 * 13f64.log2()).abs() < 1e-15);
        assert_eq!(t.p_sq, None);
        assert!((t.effective_rate - 5.0 / 11.0).abs() < 1e-15);
        assert!(matches!(
            rates_table(&thermal(1.0, 0.0, 3.0), 10, 0.5, true),
            Err(Error::Domain { param: "eta", .. })
        ));
        assert!(rates_table(&thermal(0.5, 0.0, 3.0), 10, 0.5, true).unwrap().p_sq.is_some());
    }

    #[test]
    fn bounds_reference_config() {
        let t = bounds_table(&thermal(0.25, 0.0, 3.0), 10, 0.5, &EveTap::new(1.0).unwrap()).unwrap();
        assert_eq!(t.sk_bound, 0.0);
        assert!((t.sk_bound_ln - (0.5 * (2.0 / std::f64::consts::PI).ln() - 1536.0)).abs() < 1e-9);
        assert!(matches!(t.tetration, TetrationEntry::NotActive { .. }));
        let above = bounds_table(&thermal(0.25, 0.0, 3.0), 10, 1.5, &EveTap::new(1.0).unwrap()).unwrap();
        assert_eq!(above.tetration, TetrationEntry::NotApplicable);
        let long = bounds_table(&thermal(0.25, 0.0, 3.0), 400, 0.5, &EveTap::new(1.0).unwrap()).unwrap();
        assert!(matches!(long.tetration, TetrationEntry::Underflow { .. }));
    }

    #[test]
    fn bounds_leakage_matches_direct_computation() {
        let ch = thermal(0.5, 0.0, 2.0);
        let t = bounds_table(&ch, 99, 0.5, &EveTap::new(1.0).unwrap()).unwrap();
        let l = t.leakage.unwrap();
        assert!((l.per_mode_bits - 0.029_036_774_610_288_02).abs() < 1e-12);
    }
}
