//! Scattering resonances of quantum graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: metric graphs with leads, combinatorial invariants, named graphs.
//! * [`scattering`]: Kirchhoff bond scattering and the secular function.
//! * [`poly`]: the exact multivariate secular polynomial.
//! * [`finder`]: argument-principle root finding and resonant states.
//! * [`analysis`]: energy identity, Weyl and N(ε) counting, gap estimates,
//!   compact spectra, eigenfunctions vanishing on V₀ and branch tracing.
//! * [`verify`]: the end-to-end checks behind the `verify` subcommand.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod finder;
pub mod graph;
pub mod poly;
pub mod scattering;
pub mod verify;

pub use error::{Error, Result};
pub use finder::{FinderConfig, FinderReport, Resonance, ResonantState, SearchRegion};
pub use graph::{catalog, compute_invariants, load_graph, GraphInvariants, MetricGraph};
pub use poly::SecularPolynomial;
pub use scattering::{BondScattering, SecularFunction};
