//! Quantum channels between weighted Bergman spaces of the unit disk.
//!
//! The library models the holomorphic discrete series of `SU(1,1)` on
//! truncated weighted Bergman spaces `H_nu`, the equivariant channels
//! `T(A) = P_k (A ⊗ I) P_k*` obtained from the tensor product decomposition,
//! and the transforms (covariant symbol, Toeplitz, Berezin, Husimi) used to
//! study their behaviour as the auxiliary weight grows.
//!
//! ## Modules
//!
//! - [`specfun`] - log-Gamma, Pochhammer symbols, terminating `2F1` at one,
//!   channel constants and Berezin eigenvalues
//! - [`disk`] - Möbius geometry and quadrature for the invariant measure
//! - [`bergman`] - truncated spaces, kernels, coherent states, group action
//! - [`channel`] - projection coefficients and the channel itself
//! - [`transforms`] - covariant symbol, Toeplitz, Berezin, Husimi, `E_{mu,k}`
//! - [`spectral`] - Helgason eigenfunctions, spherical functions, kernel chains
//! - [`experiment`] - config driven sweeps and report emission
//!
//! ## Examples
//!
//! ```text
//! examples/
//! ├── special_functions.rs   # constants, Pochhammer, Berezin eigenvalues
//! ├── disk_quadrature.rs     # invariant measure and Möbius maps
//! ├── bergman_space.rs       # kernels, coherent states, group action
//! ├── channel_spectrum.rs    # apply a channel and inspect its output
//! ├── berezin_husimi.rs      # transforms and the E_{mu,k} identity
//! ├── spectral_multipliers.rs
//! ├── kernel_chain.rs        # Monte Carlo chained kernel integrals
//! └── limit_sweep.rs         # run a configured sweep programmatically
//! ```
//!
//! ```bash
//! cargo run --release -p holomorphic-channels --example channel_spectrum
//! ```

pub mod bergman;
pub mod channel;
pub mod disk;
pub mod error;
pub mod experiment;
pub mod specfun;
pub mod spectral;
pub mod transforms;

mod sum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
