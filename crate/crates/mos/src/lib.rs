//! Wire-protocol client for an external perceptual scoring (MOS
//! prediction) service. The model itself runs out of process; this crate
//! ships the client plus a mock server used by the test suite.

pub mod client;
pub mod mock;

pub use client::{
    batch_mos, decode_pcm16, encode_pcm16, request_mos, MosError, PerceptionScore,
    DEFAULT_CONCURRENCY, DEFAULT_TIMEOUT_MS,
};
pub use mock::{MockBehavior, MockMosServer};
