//! Event-by-event simulation of deterministic learning machines (DLMs).
//!
//! A DLM holds a small internal state, and for every incoming event it applies
//! whichever of a fixed set of update rules minimizes a local cost, then routes
//! a message to one output channel. Networks of such machines reproduce the
//! frequency patterns of single-photon interference experiments, and a
//! line-segment variant performs blind classification of a drifting stream.
//!
//! The crate is organized around a tiny discrete-event kernel ([`network`])
//! plus the machines built on top of it:
//!
//! * [`scalar`]: machines learning a point on the real line or an interval;
//! * [`vector`]: circle, hypersphere and two-input front-end machines;
//! * [`optics`]: rotators, polarizers, beam splitters and interferometers;
//! * [`slm`]: stochastic output selection for the beam-splitter back-end;
//! * [`classifier`]: the separatrix learner and its PCA baseline;
//! * [`oracle`]: exact amplitude propagation used as the reference;
//! * [`harness`]: configurations, presets, block runs and CSV output.

pub mod classifier;
pub mod error;
pub mod harness;
pub mod message;
pub mod network;
pub mod optics;
pub mod oracle;
pub mod scalar;
pub mod slm;
pub mod source;
pub mod topology;
pub mod vector;

pub use error::{Error, Result};
pub use message::Message;
pub use network::{
    Endpoint, EventSource, Network, NetworkBuilder, Node, NodeId, SinkId, TallyCounters, TapId,
};
