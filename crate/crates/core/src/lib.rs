//! Quantum stochastic walks on layered networks, used as trainable
//! discriminators of known quantum states.
//!
//! A network of `M` input, `N` intermediate and `O` output (sink) nodes
//! evolves under a Lindblad generator that interpolates between a quantum
//! walk (`p = 0`) and a classical random walk (`p = 1`). Each sink absorbs
//! population from its sinker node; the population collected in sink `n`
//! after time `tau` is the probability of guessing hypothesis `n`.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dense complex linear algebra and density matrices.
//! - [`topology`]: layered `M-N-O` networks and their degree/transition matrices.
//! - [`schemes`]: the four ways of turning a parameter vector into `(H, T)`.
//! - [`dynamics`]: the Liouvillian, propagation and sink read-out.
//! - [`discrimination`]: state ensembles, success probability and optimal bounds.
//! - [`optimizer`]: Nelder-Mead / combinatorial search and the `(p, tau)` sweep.

pub mod discrimination;
pub mod dynamics;
pub mod error;
pub mod numerics;
pub mod optimizer;
pub mod schemes;
pub mod topology;

pub use discrimination::{MeasurementSet, StateEnsemble};
pub use dynamics::{Liouvillian, SinkReport};
pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, DensityMatrix, RealMatrix, Tolerances, C64};
pub use optimizer::{OptimizeOptions, SweepRecord};
pub use schemes::{SchemeId, WalkParameters};
pub use topology::NetworkTopology;
