//! Run configuration: a JSON file, optionally overridden by flags.

use std::fmt;
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use recsum_core::exactmath::DEFAULT_PRECISION_CAP;
use recsum_core::search::DEFAULT_INDEX_CAP;
use recsum_core::{Epsilon, LinearRecurrence, PrimeSet, ProblemInstance};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceConfig {
    pub coefficients: Vec<String>,
    pub initials: Vec<String>,
}

/// The config file as written; every problem integer is a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub recurrence: RecurrenceConfig,
    pub primes: Vec<String>,
    pub a: String,
    pub b: String,
    pub r: usize,
    pub epsilon: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zmax: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moduli: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict_dominance: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominance_only: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_cap: Option<usize>,
}

/// Flag values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub nmax: Option<u64>,
    pub zmax: Option<String>,
    pub moduli: Option<Vec<u64>>,
    pub precision_cap: Option<u32>,
    pub strict_dominance: Option<bool>,
    pub dominance_only: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }

    /// Fills defaults and applies flag overrides.
    pub fn resolve(mut self, o: &Overrides) -> Self {
        if o.nmax.is_some() {
            self.nmax = o.nmax;
        }
        if o.zmax.is_some() {
            self.zmax.clone_from(&o.zmax);
        }
        if o.moduli.is_some() {
            self.moduli.clone_from(&o.moduli);
        }
        if o.precision_cap.is_some() {
            self.precision_cap = o.precision_cap;
        }
        if o.strict_dominance.is_some() {
            self.strict_dominance = o.strict_dominance;
        }
        if o.dominance_only.is_some() {
            self.dominance_only = o.dominance_only;
        }
        self.precision_cap.get_or_insert(DEFAULT_PRECISION_CAP);
        self.strict_dominance.get_or_insert(true);
        self
    }

    pub fn instance(&self) -> Result<ProblemInstance, ConfigError> {
        let coeffs = int_list("recurrence.coefficients", &self.recurrence.coefficients)?;
        let initials = int_list("recurrence.initials", &self.recurrence.initials)?;
        let rec = LinearRecurrence::new(coeffs, initials).map_err(|e| bad(format!("recurrence: {e}")))?;
        let primes = self
            .primes
            .iter()
            .enumerate()
            .map(|(i, p)| nat(&format!("primes[{i}]"), p))
            .collect::<Result<Vec<_>, _>>()?;
        let primes = PrimeSet::new(primes).map_err(|e| bad(format!("primes: {e}")))?;
        let a = nat("a", &self.a)?;
        let b = nat("b", &self.b)?;
        let eps: Epsilon = self.epsilon.parse().map_err(|e| bad(format!("epsilon: {e}")))?;
        let inst = ProblemInstance::new(rec, primes, a, b, self.r, eps).map_err(|e| bad(e.to_string()))?;
        Ok(inst.with_strict_dominance(self.strict_dominance.unwrap_or(true)))
    }

    pub fn nmax(&self) -> Result<u64, ConfigError> {
        self.nmax.ok_or_else(|| bad("search needs nmax (config field or --nmax)"))
    }

    pub fn zmax(&self) -> Result<BigUint, ConfigError> {
        let z = self
            .zmax
            .as_deref()
            .ok_or_else(|| bad("search needs zmax (config field or --zmax)"))?;
        let z = nat("zmax", z)?;
        if z == BigUint::from(0u32) {
            return Err(bad("zmax must be at least 1"));
        }
        Ok(z)
    }

    pub fn precision_cap(&self) -> u32 {
        self.precision_cap.unwrap_or(DEFAULT_PRECISION_CAP)
    }

    pub fn index_cap(&self) -> usize {
        self.index_cap.unwrap_or(DEFAULT_INDEX_CAP)
    }
}

fn int(field: &str, s: &str) -> Result<BigInt, ConfigError> {
    s.trim()
        .parse()
        .map_err(|_| bad(format!("field `{field}`: expected an integer string, got {s:?}")))
}

fn nat(field: &str, s: &str) -> Result<BigUint, ConfigError> {
    s.trim()
        .parse()
        .map_err(|_| bad(format!("field `{field}`: expected a nonnegative integer string, got {s:?}")))
}

fn int_list(field: &str, v: &[String]) -> Result<Vec<BigInt>, ConfigError> {
    v.iter()
        .enumerate()
        .map(|(i, s)| int(&format!("{field}[{i}]"), s))
        .collect()
}
