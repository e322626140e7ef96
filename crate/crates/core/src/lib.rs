//! Acoustic power and communication links for micron-scale implanted devices.

pub mod comms;
pub mod directivity;
pub mod error;
pub mod fem;
pub mod medium;
pub mod par;
pub mod pattern;
pub mod special;
pub mod safety;
pub mod sphere;
pub mod units;

pub use error::{Error, Result};
pub use medium::{AttenuationModel, Medium, ViscositySplit};
pub use par::Exec;
pub use pattern::{DirectivityPattern, PatternSource};
