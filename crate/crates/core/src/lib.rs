//! Factorization of `SL_2` matrices over S-integer rings of `Q` and
//! quadratic fields into short words of elementary matrices.

pub mod chains;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod reduction;
mod residue;
pub mod ring;
pub mod rng;
pub mod sl2;
pub mod stats;

pub use chains::{find_length2, find_terminating_chain, recommended_depth, ChainSearcher, SearchBudget};
pub use engine::{factor, factor_permissive, verify, FactorizationResult};
pub use error::{Error, Result};
pub use reduction::{DivisionChain, Reduction, RowPair};
pub use ring::{FieldKind, Ring, RingElement, RingSpec};
pub use sl2::{ElemLetter, ElemWord, Mat2, Side};
