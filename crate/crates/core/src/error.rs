use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    CompositeModulus(u64),
    #[error("modulus {0} is below 2")]
    ModulusTooSmall(u64),
    #[error("modulus {0} exceeds the 2^32 ceiling of the bitset backend")]
    FieldTooLarge(u64),
    #[error("operands live in different fields (q = {left} and q = {right})")]
    FieldMismatch { left: u64, right: u64 },
    #[error("residue {value} is out of range for q = {q}")]
    ResidueOutOfRange { value: u64, q: u64 },
    #[error("0 has no multiplicative inverse")]
    ZeroInverse,
    #[error("denominator set contains 0")]
    ZeroDenominator,
    #[error("set must be nonempty")]
    EmptySet,
    #[error("set must not contain 0")]
    ZeroInSet,
    #[error("set must have more than one element")]
    SingletonSet,
    #[error("set is not contained in the subgroup")]
    NotSubsetOfGroup,
    #[error("the map (a, b) -> a + b*xi is injective on A x A for xi = {xi}")]
    NoCollision { xi: u64 },
    #[error("hypothesis |A| > sqrt(q) fails: |A|^2 = {size_sq} <= q = {q}")]
    TooSmall { size_sq: u64, q: u64 },
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("scan of {subsets} subsets exceeds the limit of {limit}")]
    ScanTooLarge { subsets: u128, limit: u128 },
    /// A guaranteed inequality failed. Always a bug.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}
