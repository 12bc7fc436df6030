//! Desk-scale toolkit for manipulating unknown single-joint articulated
//! objects: synthesize single-view depth observations, pick an informative
//! one-step push, reconstruct an explicit kinematic twin from the two point
//! clouds, and drive the object to a target joint state with sampling-based
//! MPC — with a benchmark harness measuring the twin-vs-world gap.

pub mod affordance;
pub mod bench;
pub mod geom;
pub mod model;
pub mod percept;
pub mod planner;
pub mod seeds;
pub mod sim;
pub mod twin;
