//! Exact computations of gr(n) = Im / v_n·Im for the images of Chern classes of
//! versal Spin(2ℓ+1) and SO(2ℓ+1) torsors inside k̃(n)* ⊗ P(y).
//!
//! The pipeline: [`model::GroupModel`] fixes the generator table and the images
//! of `c_i` and `e`; [`lattice::ImageModule`] spans those images degree by degree
//! over Z_(2) and reads off invariant factors, vanishing classes, saturation
//! thresholds and coefficient ideals; [`verifier`] checks a registry of known
//! statements against those computations.
//!
//! The image module is taken to be the one generated by Chern-monomial images
//! (closed under multiplication by `v`); everything downstream depends on that.

pub mod algebra;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod verifier;

pub use algebra::{AmbientElement, GeneratorTable, MonoProduct, Monomial, SquareRule, TheorySpec};
pub use lattice::{
    default_max_factors, torsion_bound_search, Certificate, ClassVerdict, DegreeLattice, Factor, GrComponent, ImageModule, NormTable,
    Order, Profile, QuotientComponent, Saturation, TorsionBound,
};
pub use model::{ChernMonomial, ChernSymbol, Family, GroupModel, ModelInfo, SymbolKind};
pub use scalar::{Dyadic, Val};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("denominator must be odd and nonzero: {0}")]
    EvenDenominator(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("elements belong to different theories")]
    TheoryMismatch,
    #[error("unknown fact id {0:?}")]
    UnknownFact(String),
}
