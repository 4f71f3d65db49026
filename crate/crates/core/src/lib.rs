//! Chip-firing on the infinite binary tree with a self-loop at the root.
pub mod census;
pub mod colored;
pub mod config;
pub mod labeled;
pub mod manifest;
pub mod poset;
pub mod sampler;
pub mod tree;
pub mod unlabeled;
pub mod verify;

pub use config::{
    stabilize, Chip, ChipConfig, ColorTriple, ColoredConfig, Colors, EngineError, FiringMove,
    LabeledConfig, MoveLog, Payload, Strategy, UnlabeledConfig,
};
pub use tree::NodeId;
