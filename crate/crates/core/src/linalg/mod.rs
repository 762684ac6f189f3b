//! Dense symmetric-indefinite factorization used by every saddle-point solve.

mod ldlt;

pub use ldlt::SymmetricFactorization;
