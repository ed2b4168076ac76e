//! Capacity and rank statistics of multiplicative matrix channels over finite
//! fields, `Y = G X`, where the transfer matrix `G` is uniform given its rank.
//!
//! - [`gf`]: exact linear algebra over prime fields and matrix samplers.
//! - [`enumeration`]: exact matrix and subspace counts.
//! - [`rank_channel`]: rank distributions and the rank-transition kernel.
//! - [`capacity`]: mutual information, capacity and asymptotic limits.
//! - [`oracle`]: brute-force ground truth on tiny instances.
//! - [`netsim`]: Monte Carlo rank statistics of layered relay networks.

pub mod capacity;
pub mod enumeration;
pub mod error;
pub mod gf;
pub mod netsim;
pub mod oracle;
pub mod rank_channel;

pub use capacity::{CapacityResult, OptimizerConfig};
pub use error::{Error, Result};
pub use gf::{Field, FqMatrix, Subspace};
pub use rank_channel::{ChannelDims, RankDistribution, RankKernel};
