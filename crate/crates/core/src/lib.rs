//! Dixmier traces, Connes–Moscovici residues and zeta-regularised determinants
//! for matrix-valued symbols on compact Lie groups.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod determinants;
pub mod error;
pub mod estimators;
pub mod group;
pub mod quadrature;
pub mod residue;
pub mod summation;
pub mod symbols;

pub use error::{Error, Result};
pub use group::{make_group, CutoffMode, DualElement, GroupDescriptor, Label};
pub use symbols::MatrixSymbol;
