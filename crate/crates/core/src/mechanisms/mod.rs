//! Objective switching, virtual valuations, payment rules and the lottery
//! mechanism.

mod cate;
mod critical;
mod distribution;
mod framework;
mod vcg;

pub use cate::{alpha, cate_decompose, cate_payment, CateDecomposition, MAX_COLUMNS};
pub use critical::mdca_critical_payment;
pub use distribution::BidDistribution;
pub use framework::{
    cate_lottery, run_framework, AuctionOutcome, Lottery, LotteryEntry, Mechanism, MechanismConfig, Objective,
    PaymentRule,
};
pub use vcg::vcg_payments;
