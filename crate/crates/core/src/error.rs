use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension m = {m} is outside the supported range {min}..={max}")]
    Dimension { m: usize, min: usize, max: usize },

    #[error("player index {player} is invalid for m = {m}")]
    Player { player: usize, m: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("facet of player {player} (x_{player} = {bit}) is disjoint from the requested intersection")]
    DisjointFacet { player: usize, bit: u8 },

    #[error("matrix dimensions do not match: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("tensor product of dimension {dim} exceeds the cap of {cap} entries")]
    TooLarge { dim: usize, cap: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("expectation has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("operator is not a reflection")]
    NotReflection,

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("S^2 + T^2 deviates from the identity by {0:e}")]
    Constraint(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(m: usize, min: usize, max: usize) -> Result<()> {
    if m < min || m > max {
        Err(Error::Dimension { m, min, max })
    } else {
        Ok(())
    }
}
