use thiserror::Error;

use crate::generators::GeneratorError;
use crate::harness::HarnessError;
use crate::homology::HomologyError;
use crate::mesh::MeshError;
use crate::sweep::SweepError;
use crate::systole::SystoleError;

/// Crate-level error, one variant per module.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Systole(#[from] SystoleError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
