use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid recurrence: {0}")]
    InvalidRecurrence(String),
    #[error("working precision exceeded the cap of {cap} bits")]
    PrecisionExhausted { cap: u32 },
    #[error("could not certify which characteristic root dominates")]
    DominanceUndecided,
    #[error("no dominant root: two characteristic roots share the maximal modulus")]
    NoDominantRoot,
    #[error("recurrence is degenerate: a ratio of distinct roots is a root of unity")]
    DegenerateRecurrence,
    #[error("dominant root is an integer larger than one")]
    DominantRootIntegerGt1,
    #[error("dominant root is not simple, so its Binet coefficient is not constant")]
    NotConstantLeadCoefficient,
    #[error("could not certify that the dominant Binet coefficient is nonzero")]
    Eta1Uncertified,
    #[error("dominant root is not a real number larger than one")]
    DominantRootNotRealGt1,
    #[error("{0} has a prime factor outside S")]
    NotSmooth(BigInt),
    #[error("invalid prime set: {0}")]
    InvalidPrimeSet(String),
    #[error("invalid Matveev input: {0}")]
    InvalidMatveevInput(String),
    #[error("growth constants could not be certified: {0}")]
    GrowthUncertified(String),
    #[error("search limits out of range: {0}")]
    SearchLimits(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable reason code.
    pub fn reason_code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidRecurrence(_) => "invalid_recurrence",
            Error::PrecisionExhausted { .. } => "precision_exhausted",
            Error::DominanceUndecided => "dominance_undecided",
            Error::NoDominantRoot => "no_dominant_root",
            Error::DegenerateRecurrence => "degenerate",
            Error::DominantRootIntegerGt1 => "dominant_root_integer_gt1",
            Error::NotConstantLeadCoefficient => "not_constant_lead_coefficient",
            Error::Eta1Uncertified => "eta1_uncertified",
            Error::DominantRootNotRealGt1 => "dominant_root_not_real_gt1",
            Error::NotSmooth(_) => "not_smooth",
            Error::InvalidPrimeSet(_) => "invalid_prime_set",
            Error::InvalidMatveevInput(_) => "invalid_matveev_input",
            Error::GrowthUncertified(_) => "growth_uncertified",
            Error::SearchLimits(_) => "search_limits",
            Error::Internal(_) => "internal",
        }
    }
}
