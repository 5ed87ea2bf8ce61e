//! Shift+mirror codecs that guarantee a floor on the eavesdropper's error.
//!
//! [`scalar`] holds the `k`-bit scalar codec, posterior variance and the
//! worst-case distortion scans. [`vector`] applies it coordinate-wise after
//! standardization and [`trajectory`] extends it to whole state trajectories
//! by transmitting increments in the clear.

pub mod scalar;
pub mod trajectory;
pub mod vector;

pub use scalar::*;
pub use trajectory::*;
pub use vector::*;
