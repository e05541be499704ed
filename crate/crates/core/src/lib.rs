//! Polar codes with nonuniform, minimum-distortion quantized decoders.
//!
//! The crate is organized bottom-up:
//!
//! * [`code`]: beta-expansion construction and nonsystematic encoding.
//! * [`channel`]: BPSK over AWGN, LLR conversion and the uniform
//!   pre-quantization grid with its exact discrete distribution.
//! * [`quantizer`]: minimum-distortion scalar quantizer design for discrete
//!   distributions by dynamic programming, plus a uniform baseline.
//! * [`density`]: quantized density evolution over the SC decoding tree,
//!   emitting per-node lookup tables.
//! * [`decode`]: float-point and lookup-table SC/SCL decoders.
//! * [`sim`] and [`tables`]: Monte-Carlo BLER simulation and table files.

pub mod channel;
pub mod code;
pub mod decode;
pub mod density;
mod error;
pub mod quantizer;
pub mod sim;
pub mod tables;

pub use channel::{ChannelParams, UniformGrid};
pub use code::CodeConfig;
pub use density::{DesignRule, LutSet, NodePath};
pub use error::{Error, Result};
pub use quantizer::{DiscreteDistribution, Quantizer};
pub use sim::{BlerPoint, DecoderKind, SimConfig};
