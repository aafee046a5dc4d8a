//! LDGM codes with a non-uniform output alphabet: message bits XOR into
//! check variables, and each group of `d` checks is mapped through `φ` to
//! one codeword symbol.

mod encode;
mod graph;
mod mapping;
mod profile;

pub use encode::{encode_sum_product, EncodeOutcome, MessagePassingParams, PADDING};
pub use graph::{build_graph, forward_map, LdgmGraph};
pub use mapping::{select_mapping, SymbolMapping};
pub use profile::{DegreeProfile, ProfileSide, DEFAULT_PROFILE};
