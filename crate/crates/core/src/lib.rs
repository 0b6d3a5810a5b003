//! Construction, validation and existence checks for (N,M)-POVMs.
//!
//! An (N,M)-POVM is a family of `N` POVMs with `M` outcomes each in dimension
//! `d` whose elements satisfy
//!
//! ```text
//! Tr Π_{α,a}            = d/M
//! Tr Π_{α,a} Π_{α,a'}   = x δ_{aa'} + (1 − δ_{aa'}) (d − M x)/(M(M − 1))
//! Tr Π_{α,a} Π_{β,b}    = d/M²          (α ≠ β)
//! ```
//!
//! for a single real parameter `d/M² < x ≤ min(d²/M², d/M)`.

pub mod bases;
pub mod cli;
pub mod conditions;
pub mod construct;
pub mod error;
pub mod geometry;
pub mod herm;
pub mod io;
pub mod model;
pub mod random;

pub use bases::{
    gell_mann_basis, make_partition, pauli_tensor_basis, verify_basis, OperatorBasis, Partition,
};
pub use conditions::{
    check_optimal_m2, check_optimal_m_between, check_optimal_m_ge_d, feasibility_screen, radii,
};
pub use construct::{
    fixture_povm, mum3_optimal_partition, optimal_n2_pauli, sufficient_construct, Fixture,
};
pub use error::{PovmError, Result};
pub use herm::{eigh, hs_inner, is_psd, CMatrix, HermitianOperator, Spectrum};
pub use model::{born_probabilities, povm_params, validate_povm, NmPovm, PovmParams, PovmReport};
