use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = AuctionError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AuctionError {
    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("exact search exceeded its budget of {budget} nodes")]
    BudgetExceeded { budget: u64 },

    #[error("invalid instance:\n{0}")]
    InvalidInstance(ValidationReport),

    #[error("bid {0} lies outside the distribution support [0, 1]")]
    OutsideSupport(f64),

    #[error("virtual value {value} lies outside [{lo}, {hi}]")]
    OutsideRange { value: f64, lo: f64, hi: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("payment undefined for request {0}: its fractional allocation is zero")]
    UndefinedPayment(usize),

    #[error("lottery decomposition failed with residual {residual:e}")]
    Decomposition { residual: f64 },

    #[error("internal solver error: {0}")]
    Internal(String),
}
