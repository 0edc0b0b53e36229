//! Symbolic operator product expansions for the level-`n` gl(r|r) WZW model.
//!
//! Operators are products of supertrace chains of the fields `J`, `J̄`, `M`,
//! `M⁻¹` and constant parameter matrices. Products are expanded with the
//! index-free contraction rules in [`contract`], then post-processed with
//! [`connected_part`], [`angular_average`] and [`radial_integrate`]. The
//! beta functions of the current-current perturbations are assembled from
//! those pieces in [`beta`].

mod beta;
mod contract;
mod expansion;
mod expr;
mod text;
mod transform;
mod vocab;

pub use beta::{
    beta_system, delta_q, delta_q_exact, flow_contribution, scaling_dimension_m,
    scaling_dimension_m_symbolic, BetaSystem, ProductContribution,
};
pub use contract::ope;
pub use expansion::{Expansion, OperatorTerm, PoleMonomial};
pub use expr::{Atom, FieldKind, ParamMatrix, Point, TraceChain};
pub use text::{parse_coeff, parse_expansion, ParseError};
pub use transform::{angular_average, connected_part, parity_transform, radial_integrate, Region};
pub use vocab::{
    contract_current_current, contract_current_m, ope_with_t, ope_with_tbar, Operator, Side,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpeError {
    #[error("no contraction rule between {0:?} and {1:?}")]
    UnknownVocabulary(FieldKind, FieldKind),
    #[error("operand fields sit at more than one point")]
    NotLocal,
    #[error("first operand carries no fields")]
    NoFields,
    #[error("operands sit at the same point")]
    CoincidentPoints,
    #[error("integral of a pole of order ({0}, {0}) over the region diverges")]
    DivergentIntegral(u32),
    #[error("pole ({1}, {2}) at separation {0} is not rotation invariant")]
    NotAngularAveraged(Point, u32, u32),
    #[error("invalid integration region")]
    InvalidRegion,
}
