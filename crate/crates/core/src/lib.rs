//! Truthful spectrum auctions for secondary markets where channels are reused
//! across space and time.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: requests, channels, conflict structure, time segmentation and
//!   the feasibility checker shared by every allocator.
//! - [`lp_core`]: a dense bounded-variable simplex solver and an exact
//!   branch-and-bound solver for the integral allocation problem.
//! - [`allocation_lp`]: the LP relaxation, randomized rounding and the two
//!   derandomized allocators (DCA and the bid-monotone MDCA).
//! - [`allocation_greedy`]: the monotone greedy allocator with preemption
//!   (MGCA) and its exact critical values.
//! - [`mechanisms`]: virtual valuations, the objective-switching framework,
//!   VCG, bisection critical payments and the CATE lottery mechanism.
//! - [`sim`]: scenario generation and the experiment sweep.
//! - [`cli`]: the command line front end.

pub mod allocation_greedy;
pub mod allocation_lp;
pub mod cli;
pub mod error;
pub mod lp_core;
pub mod mechanisms;
pub mod model;
pub mod sim;

pub use error::{AuctionError, Result};

/// Values above this are treated as strictly positive (fractional guards,
/// LP feasibility slack).
pub const EPS: f64 = 1e-9;
