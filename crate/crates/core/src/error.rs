use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] crate::clifford::AlgebraError),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    Spinor(#[from] crate::spinor::SpinorError),
    #[error(transparent)]
    Interaction(#[from] crate::interaction::InteractionError),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    Verification(#[from] crate::verification::VerificationError),
    #[error(transparent)]
    Io(#[from] crate::io::IoError),
}
