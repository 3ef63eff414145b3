//! Topology of photon-mediated emitter Hamiltonians.
//!
//! Emitters coupled to a gapped photonic lattice inherit an effective
//! Hamiltonian `H_a(k) = omega + g^2 (omega - H_p(k))^{-1}` from the bath
//! resolvent. This crate builds photonic baths, maps them to their atomic
//! counterparts, classifies their symmetries, computes their topological
//! invariants and reproduces the finite-lattice numerics that go with them.

pub mod bloch;
pub mod error;
pub mod experiments;
pub mod invariants;
pub mod linalg;
pub mod mediator;
pub mod models;
pub mod realspace;
pub mod serde_complex;
pub mod symmetry;

pub use bloch::{band_flatten, band_structure, gap_check, unitarize, BlochModel, GapKind, GapReport, KGrid};
pub use error::{Error, Result};
pub use invariants::{
    chern_2d, chern_isv_2d, winding_chiral_1d, winding_spectral_1d, BandSelection, InvariantKind,
    InvariantResult,
};
pub use linalg::{CMatrix, C64};
pub use mediator::{
    deformation_gap_certificate, effective_bloch, full_bloch, mediated_couplings_realspace, EmitterLayout,
    Mediated, Projector,
};
pub use models::ModelParams;
pub use symmetry::{
    check_symmetry, classify, predict_inherited_class, AzClass, Candidates, ClassLabel, Flavor, SymmetryOp, Variant,
};
