//! Auction domain: channels with license areas, requests with fixed time
//! windows, and the derived conflict structure.

mod allocation;
mod conflict;
mod geometry;
mod instance;
mod validate;

pub use allocation::{check_feasibility, FeasibilityViolation, IntegralAllocation};
pub use conflict::{
    build_conflict_tensor, build_location_matrix, segment_timeline, ConflictStructure,
    SliceRange, Timeline, TimeSlice,
};
pub use geometry::{Disk, Point};
pub use instance::{AuctionInstance, Channel, GeometryMode, Location, Minutes, Request};
pub use validate::{validate_instance, ValidationIssue, ValidationReport};
