pub mod ad;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod hierarchy;
pub mod linalg;
pub mod master;
pub mod modular;
pub mod report;
pub mod sampling;
pub mod systems;
pub mod verify;

pub use error::{Error, Result};
