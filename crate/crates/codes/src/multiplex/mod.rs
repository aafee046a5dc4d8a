//! The multiplexing code design: one action code, then one source code per
//! action symbol applied to the positions carrying that action.

mod design;
mod pipeline;
mod report;

pub use design::{Branch, BranchCode, Design, DesignOptions, LdgmCode, SourceCodeKind};
pub use pipeline::{
    decode, decode_actions, demux, encode, reconstruct, sample_source, BranchPayload, Decoded, EncoderState,
    Message, SideInfoOracle,
};
pub use report::{evaluate, run_trial, trials_csv, Aggregate, Evaluation, TrialReport};
