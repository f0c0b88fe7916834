//! Exact computation of Khovanov homology, its pointed variants, Koszul
//! complexes over the rings R_m, and the exterior-degree filtration
//! spectral sequence, together with a verification harness comparing
//! Koszul homology ranks against catalogued instanton dimensions.

pub mod error;
pub mod matrix;
pub mod snf;
pub mod group;
pub mod field;
pub mod link;
pub mod complex;
pub mod cube;
pub mod pointed;
pub mod koszul;
pub mod ss;
pub mod catalog;
pub mod report;

pub use error::KhError;
