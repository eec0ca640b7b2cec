//! Quad layouts from cross-field separatrices, simplified by chord collapse.

pub mod build;
pub mod chord;
pub mod error;
pub mod export;
pub mod field;
pub mod fixtures;
pub mod geom;
pub mod hyperbola;
pub mod layout;
pub mod mesh;
pub mod pipeline;
pub mod simplify;
pub mod singularity;
pub mod synth;
pub mod trace;

pub use error::*;
pub use mesh::{Surface, TriMesh, V3};
