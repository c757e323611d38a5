//! Free-fermion machinery for the disordered XY spin chain
//!
//! ```text
//! H = -Σ μ_j [(1+γ_j) σˣ_j σˣ_{j+1} + (1-γ_j) σʸ_j σʸ_{j+1}] - Σ ν_j σᶻ_j
//! ```
//!
//! The Jordan-Wigner transform turns `H` into a quadratic form `C* M C` in the
//! fermionic operators `C = (c_1, c_1*, ..., c_n, c_n*)`, where `M` is a real
//! symmetric 2×2-block Jacobi matrix. Everything about the 2^n eigenstates of
//! `H` that matters for bipartite entanglement is then encoded in spectral
//! projections of the 2n×2n matrix `M`.
//!
//! Module map:
//!
//! * [`model`]: chain parameters, disorder ensembles, `M` and its `A`/`B` blocks.
//! * [`linalg`]: dense symmetric eigensolver, SVD, Pfaffian, matrix functions.
//! * [`freefermion`]: Bogoliubov diagonalization, eigenstate correlation
//!   matrices, restricted correlation matrices and entanglement entropies.
//! * [`localization`]: eigenfunction correlators and decay fits.
//! * [`oracle`]: brute-force 2^n reference implementation used for validation.
//! * [`seed`]: reproducible per-realization seeding.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod freefermion;
pub mod linalg;
pub mod localization;
pub mod model;
pub mod oracle;
pub mod seed;

pub use error::{Error, Result};

pub use linalg::Mat;

pub use freefermion::{
    BogoliubovDecomposition, CorrelationMatrix, EntropySearch, OccupationPattern, SearchStrategy,
    SubInterval,
};
pub use localization::{CorrelatorKind, CorrelatorMatrix, DecayFit, DecayModel, DecayProfile};
pub use model::{ChainParams, CouplingSpec, DisorderEnsemble, EffectiveHamiltonian};
