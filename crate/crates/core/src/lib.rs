//! Certified bounds and exhaustive search for sums of S-units in linear recurrences.

pub mod bounds;
pub mod error;
pub mod exactmath;
pub mod heights;
pub mod recurrence;
pub mod search;
pub mod sunits;

pub use bounds::{final_bound, BoundCertificate, CertificateBounds, ProblemInstance};
pub use error::{Error, Result};
pub use exactmath::{Ball, Real};
pub use heights::GrowthConstants;
pub use recurrence::{BinetForm, Dominance, LinearRecurrence, SpectralData};
pub use search::{brute_solutions, verify_solution, SearchOptions, SearchOutcome, SearchStats, SolutionRecord};
pub use sunits::{Epsilon, PrimeSet, SUnit};

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
