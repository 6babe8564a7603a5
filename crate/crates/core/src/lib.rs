//! Systolic invariants on triangulated surfaces embedded in ℝⁿ.
//!
//! The crate computes the shortest non-separating cycle of a triangle mesh,
//! replays the coordinate-sweep length/area argument on concrete instances and
//! checks the inequality `ℓ² ≤ M·(area − π)` for surfaces whose single boundary
//! component is the unit circle in the x₁x₂-plane.
//!
//! Module map:
//! - [`mesh`]: embedded triangle meshes, validation, SMESH/OBJ I/O, refinement.
//! - [`homology`]: Z₂ tree-cotree signatures and an exact cut oracle.
//! - [`systole`]: shortest non-separating cycle search and the Loewner check.
//! - [`generators`]: parametric instance families.
//! - [`sweep`]: level sets, co-area, interval detection and the proof tracer.
//! - [`harness`]: inequality reports and family runs.

pub mod generators;
pub mod harness;
pub mod homology;
pub mod mesh;
pub mod sweep;
pub mod systole;

mod error;

pub use error::Error;
pub use homology::{build_basis, CycleSig, EdgeCycle, HomologyBasis};
pub use mesh::{EmbeddedMesh, SurfaceInfo};
pub use systole::{shortest_nonseparating, SystoleReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;
