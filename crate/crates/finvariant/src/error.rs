use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("permutation is not a bijection of 0..{0}")]
    NonBijective(usize),
    #[error("generator permutations do not act transitively on the cosets")]
    NotTransitive,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("word does not lie in the subgroup (ends in coset {0})")]
    NotInSubgroup(usize),
    #[error("closure of the generator permutations exceeds the bound {0}")]
    ImageTooLarge(usize),
    #[error("matrix is not row-stochastic: {0}")]
    BadStochastic(String),
    #[error("stationary vector is not preserved by generator {0}")]
    NotStationary(usize),
    #[error("probability vector has a zero (or negative) entry at {0}; prune the symbol first")]
    ZeroMass(usize),
    #[error("measure is not invariant under generator {0}")]
    NotInvariant(usize),
    #[error("marginalization domain too large: {0}")]
    HullTooLarge(String),
    #[error("set is not right connected")]
    NotRightConnected,
    #[error("set is not left connected")]
    NotLeftConnected,
    #[error("set is not bi-connected")]
    NotBiConnected,
    #[error("set does not contain the identity")]
    MissingIdentity,
    #[error("pair marginals are inconsistent: {0}")]
    InconsistentMarginals(String),
    #[error("entries do not form a probability distribution: {0}")]
    NotADistribution(String),
    #[error("bad generating set: {0}")]
    BadGenSet(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}
