use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the range the formula is defined on.
    #[error("domain error: {param} = {value} is outside {range}")]
    Domain {
        param: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("configuration error: {0}")]
    Config(String),

    /// A protocol state machine was driven out of order.
    #[error("protocol-order error: round {round} requested but the schedule has {rounds} rounds")]
    ProtocolOrder { round: u32, rounds: u32 },

    /// The tower-exponent bound needs a positive tower order.
    #[error("tower bound not active: order f(n) = {order} < 1")]
    BoundInactive { order: i64 },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(param: &'static str, value: f64, range: &'static str) -> Self {
        Error::Domain {
            param,
            value,
            range,
        }
    }
}
