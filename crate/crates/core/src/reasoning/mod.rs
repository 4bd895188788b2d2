//! Network-free multi-object reasoning over objectness fields.

pub mod boundary;
pub mod center;
mod config;
pub mod detect;
mod engine;
pub mod proposal;
pub mod split;

pub use config::ReasoningConfig;
pub use detect::{ConfidenceParts, DetectedObject};
pub use engine::{discover, ConvergedProposal, Discovery, DiscoveryStats};
pub use proposal::{Proposal, ProposalState};
