//! Simulation and verification laboratory for the (k,d) Kob-Andersen
//! kinetically constrained lattice gas.
//!
//! The crate is organised around the objects the model is built from:
//!
//! * [`lattice`] — finite lattice regions, bit-packed occupancy fields, the
//!   kinetic constraint and legal transitions;
//! * [`bootstrap`] — the k-neighbour bootstrap percolation map, the origin
//!   cluster, the boundary test function and pivotal-edge detection;
//! * [`dynamics`] — event-driven kinetic Monte Carlo for the conserved
//!   dynamics and tagged-particle diffusion estimation;
//! * [`moves`] — replayable multi-step move traces: the elementary column
//!   exchange / framing / permutation / jump moves and the composed
//!   block-exchange move (k = d = 2), with information-loss accounting;
//! * [`coarse`] — droplet scales, box goodness and frameability, super-good
//!   paths, the induced coarse bond percolation and the auxiliary random
//!   walk diffusion;
//! * [`estimators`] — the variational upper bound driven by the bootstrap
//!   test function, and the closed-form bound curves.

pub mod bootstrap;
pub mod coarse;
pub mod dynamics;
pub mod estimators;
pub mod lattice;
pub mod moves;
pub mod rng;
pub mod stats;

/// Concrete scalar used by the simulation layer. The numeric helpers in
/// [`stats`] and the closed-form formulas stay generic over
/// `num_traits::Float`; everything that touches an RNG is pinned here.
pub type Real = f64;
