//! Sampling-based MPC.
