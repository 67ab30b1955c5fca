//! Optimal robustness-inducing quantum noise channels.
//!
//! This crate is `no_std` (it only needs `alloc`) and contains the numerical
//! core:
//!
//! - [`qmat`]: dense complex matrices, Kronecker products, partial traces and
//!   a cyclic Jacobi eigensolver for Hermitian matrices.
//! - [`channels`]: channels as Choi matrices, Kraus interop, POVM outcome
//!   probabilities and CPTP validation.
//! - [`dpbounds`]: closed-form ε-DP and certified-radius mathematics for
//!   (α, γ)-channels.
//! - [`sdp`]: the pre-/post-order channel design programs and an operator
//!   splitting conic solver.
//! - [`qml`]: a deterministic statevector / density-matrix simulator for
//!   strongly entangling classifiers, training and FGSM attacks.
//! - [`data`]: dataset preprocessing (normalization, PCA, seeded splits).
//!
//! # Conventions
//!
//! Tensor products are big-endian: in `A ⊗ B` the index of `A` is the most
//! significant factor, and qubit 0 is the most significant qubit of a
//! register. Choi matrices put the channel input first:
//! `J = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, unnormalized so that `Tr J = d`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channels;
pub mod consts;
pub mod data;
pub mod dpbounds;
pub mod gates;
pub mod qmat;
pub mod qml;
pub mod random;
pub mod sdp;

pub use channels::{ChoiMatrix, DensityMatrix, KrausSet, PovmSet};
pub use dpbounds::AlphaGamma;
pub use qmat::{CMatrix, C64};
