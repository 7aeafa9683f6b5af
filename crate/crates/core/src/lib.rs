//! Optimal placement of two-layer threat detectors on a gridded facility.
//!
//! The pipeline runs scenario → attacker paths → detection coverage →
//! placement optimization:
//!
//! * [`scenario`] parses and validates the grid, entrances, targets and
//!   detector parameters.
//! * [`pathing`] finds each entrance/target shortest route on the 8-connected
//!   grid and the prefix on which a primary alarm is still timely.
//! * [`coverage`] turns route/disk overlap into detection probabilities.
//! * [`objective`] scores a placement in expected casualties.
//! * [`solver`] finds the optimal placement, by enumeration or by
//!   branch-and-bound over a linear relaxation solved with [`lp`].
//! * [`cli`] and [`report`] back the `detplace` binary.

pub mod cli;
pub mod coverage;
pub mod geometry;
pub mod lp;
pub mod objective;
pub mod pathing;
pub mod report;
pub mod scenario;
pub mod solver;
