//! Exact algorithms for the line-based Dial-a-Ride Problem (maximize served
//! requests) and for turn minimization over its optimal solutions.

pub mod exact;
pub mod feasibility;
pub mod model;
pub mod multicover;
pub mod oracle;
pub mod polycase;
pub mod random;
pub mod reductions;
