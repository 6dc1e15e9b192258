//! Benchmark crate for the splitstep library.
//!
//! Criterion-based benchmarks of the hot paths:
//!
//! - `walk_evolution`: sparse walk steps of the decoupled schedule
//! - `winding_number`: bulk index with a fine momentum grid
//! - `phase_diagram`: a small parameter-plane sweep
//! - `protocol_run`: one interferometric read-out (four sub-simulations)
//! - `monte_carlo`: the error model at a reduced sample count
//!
//! Run with `cargo bench -p splitstep-bench`.
