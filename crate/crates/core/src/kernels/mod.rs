//! The two cutoff kernels: a Fejér-type kernel on `Z` and a cosine-power
//! kernel on `T^D`, their property checks, and the Fourier inversion sum
//! that ties them together.

mod chi;
mod fejer;
mod inversion;

pub use chi::*;
pub use fejer::*;
pub use inversion::*;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("expansion size {size} exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("normalization Z = {z} is not positive")]
    NotNormalizable { z: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
    Quadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub method: Method,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_sample: Option<String>,
}

impl PropertyCheck {
    fn new(name: &str, method: Method, passed: bool, detail: String) -> Self {
        PropertyCheck {
            name: name.into(),
            method,
            passed,
            detail,
            failing_sample: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub kernel: String,
    pub parameters: Value,
    pub properties: Vec<PropertyCheck>,
}

impl KernelReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Natural log of a positive big integer via its top 64 bits.
pub(crate) fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top: BigInt = x >> shift;
    let top: f64 = num_traits::ToPrimitive::to_f64(&top).expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn ln_ratio(x: &BigRational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}
