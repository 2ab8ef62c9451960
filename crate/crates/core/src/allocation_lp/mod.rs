//! The channel-allocation relaxation, its randomized rounding and the two
//! derandomized allocators built on it.

mod cliques;
mod dca;
mod lp2;
mod mdca;
mod rounding;

pub use cliques::maximal_cliques;
pub use dca::{dca_allocate, dca_allocate_with, dca_round, DcaTrace};
pub use lp2::{
    build_lp2, solve_lp2, Decision, FractionalAllocation, Lp2Model, Lp2Program, Relaxation, SliceShare,
};
pub use mdca::{mdca_allocate, mdca_allocate_with, mdca_wins};
pub use rounding::{
    allocation_probability, conditional_expected_weight, conditional_probability, expected_weight,
    randomized_round,
};
