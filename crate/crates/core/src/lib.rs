//! Single-machine infinite-bus dynamics and control workbench.

pub mod cli;
pub mod config;
pub mod design;
pub mod error;
pub mod fbl;
pub mod frames;
pub mod linearize;
pub mod numlin;
pub mod ode;
pub mod params;
pub mod reduced_model;
pub mod sim;
pub mod tf;
pub mod truth_model;

pub use error::{Result, SmibError};
