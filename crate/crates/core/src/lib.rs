//! Block-wise EtC image encryption and the tools around it: the cipher and its
//! inverse, the patch-embedding adaptation that absorbs uniform-key encryption,
//! JPEG/SSIM evaluation, and a linear probe for classification experiments.

pub mod blocks;
pub mod cipher;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod io;
pub mod keying;
pub mod probe;

pub use error::{Error, Result};
