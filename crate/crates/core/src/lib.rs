//! Symbolic dynamics on dendrite Julia sets: itineraries over `{0, 1, *}`,
//! kneading analysis, pseudo-orbit shadowing and omega-limit construction.

pub mod battery;
pub mod error;
pub mod ict_omega;
pub mod julia_bridge;
pub mod kneading;
pub mod pseudo_orbit;
pub mod shadowing;
pub mod symbolic;

pub use error::{Error, Result};
