//! Local isomorphism, symmetry and rigidity analysis for finite windows of
//! uniformly locally finite relational structures.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod format;
pub mod generators;
pub mod iso;
pub mod refine;
pub mod report;
pub mod rigidity;
pub mod search;
pub mod structure;
pub mod symmetry;

pub use error::{Error, Result};
pub use structure::{
    validate_structure, Compact, Elem, Language, PointedBall, RawStructure, Structure, StructureBuilder, Symbol,
    INFINITE,
};
