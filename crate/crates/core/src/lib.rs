//! Cooperative UAV relaying with distributed space-time block codes and
//! random all-pass virtual channels.

pub mod bicm;
pub mod channel;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod stbc;
pub mod vchan;

pub use error::{Error, Result};
