//! Phase distributions of entangled two-mode coherent states from s-ordered
//! quasi-probability distributions.
//!
//! * [`model`]: quasi-Bell states and their normalization
//! * [`specfun`]: scaled Bessel and Kummer functions
//! * [`quasiprob`]: characteristic function and quasi-probability distribution
//! * [`phasedist`]: Fourier-series phase distributions and moments
//! * [`oracle`]: quadrature and truncated-Fock cross-checks
//! * [`cli`]: the command-line front end

pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod phasedist;
pub mod quasiprob;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{ComplexValue, OrderingParameter, PresetKind, QuasiBellState};
