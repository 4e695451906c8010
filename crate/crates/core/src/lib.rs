//! Bayesian nonparametric cluster analysis for univariate binned data.
//!
//! Observations are only known through a `(bin, frequency)` table. The model
//! places a Dirichlet-process partition prior, restricted to gap-free
//! (contiguous, index-ordered) partitions, over the latent observations, uses a
//! normal kernel with a conjugate normal-gamma prior inside every group, and
//! recovers the unobserved values by data augmentation with truncated normals.
//! Inference is by Markov chain Monte Carlo with split, merge and shuffle
//! partition moves.
//!
//! The crate is organised bottom-up:
//!
//! * [`types`] and [`binning`]: the data records and bin construction.
//! * [`prior`]: the restricted partition prior.
//! * [`conjugate`]: normal-gamma posterior updates and marginal likelihoods.
//! * [`distributions`]: truncated normal, gamma and beta samplers.
//! * [`sampler`]: the MCMC kernel and chain runner.
//! * [`estimators`]: modal partition, conditional parameters and density.
//! * [`synthetic`] and [`oracle`]: data generators and independent checks.
//! * [`cli`]: file formats and the `binclust` command line.

pub mod binning;
pub mod cli;
pub mod conjugate;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod prior;
pub mod sampler;
pub mod synthetic;
pub mod types;

pub use error::{Error, Result};
pub use types::{BinLayout, BinnedDataset, ChainState, GroupParams, Hyperparams, Partition, Trace};
