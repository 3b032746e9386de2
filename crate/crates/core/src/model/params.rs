use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Branching rule applied when a symbol grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branching {
    /// `X -> YZ` with `Y`, `Z` drawn independently and uniformly.
    RandomPair,
    /// `X -> XX`.
    Duplicate,
}

impl fmt::Display for Branching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branching::RandomPair => "random-pair",
            Branching::Duplicate => "duplicate",
        })
    }
}

impl FromStr for Branching {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-pair" | "yz" => Ok(Branching::RandomPair),
            "duplicate" | "xx" => Ok(Branching::Duplicate),
            other => Err(Error::invalid(format!("unknown branching `{other}`"))),
        }
    }
}

/// All physical and grammatical parameters of one simulation.
///
/// `temperature` is `k_B T` with `k_B = 1`. An infinite temperature is
/// accepted and means `beta = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Alphabet size (number of Potts states).
    #[serde(rename = "K")]
    pub k: usize,
    /// Coupling constant.
    #[serde(rename = "J")]
    pub coupling: f64,
    /// Probability that a step applies a growth rule.
    pub q: f64,
    /// Termination weight inside the growth branch.
    pub t: f64,
    /// Interaction decay exponent; couplings fall off as `1 / l^(1+s)`.
    pub s: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    #[serde(with = "temperature_serde")]
    pub temperature: f64,
    pub branching: Branching,
    /// Sampling length `N`.
    pub target_length: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            k: 2,
            coupling: 1.0,
            q: 1e-2,
            t: 0.0,
            s: 0.9,
            r_minus: 0.25,
            r_plus: 0.25,
            temperature: 1.0,
            branching: Branching::RandomPair,
            target_length: 256,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid(format!("K must be >= 2, got {}", self.k)));
        }
        if self.k > u16::MAX as usize {
            return Err(Error::invalid(format!("K = {} exceeds the supported alphabet size", self.k)));
        }
        if !self.coupling.is_finite() {
            return Err(Error::invalid("J must be finite"));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::invalid(format!("q must lie in (0, 1], got {}", self.q)));
        }
        if !(self.t >= 0.0 && self.t < 1.0) {
            return Err(Error::invalid(format!("t must lie in [0, 1), got {}", self.t)));
        }
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(Error::invalid(format!("s must be positive, got {}", self.s)));
        }
        for (name, r) in [("r_minus", self.r_minus), ("r_plus", self.r_plus)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {r}")));
            }
        }
        if !(self.temperature > 0.0) {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.target_length < 2 {
            return Err(Error::invalid(format!(
                "target_length must be >= 2, got {}",
                self.target_length
            )));
        }
        Ok(())
    }

    /// Inverse temperature; zero for an infinite temperature.
    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// `(floor(N r_minus), floor(N r_plus))` for a sentence of length `n`.
    pub fn windows(&self, n: usize) -> (usize, usize) {
        let nf = n as f64;
        ((nf * self.r_minus).floor() as usize, (nf * self.r_plus).floor() as usize)
    }
}

/// Temperatures serialize as plain numbers, with `"inf"` standing in for
/// infinity since JSON has no literal for it.
pub(crate) mod temperature_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => s.parse::<f64>().map_err(de::Error::custom),
        }
    }
}

/// Lists of temperatures in the same representation.
pub(crate) mod temperature_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Temperature(#[serde(with = "super::temperature_serde")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&t| Temperature(t)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Temperature>::deserialize(d)?.into_iter().map(|t| t.0).collect())
    }
}
