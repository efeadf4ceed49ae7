//! Serialized family data file.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::field::StepCoeff;
use crate::poly::PolyTerm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    /// Tower steps, each constant-first with leading coefficient `"1"`.
    pub field: Vec<Vec<StepCoeff>>,
    #[serde(rename = "A")]
    pub a: Vec<PolyTerm>,
    /// `f(x1)` as terms with `e2 = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<PolyTerm>>,
    /// `g = sign_of_g · σ(f)`.
    pub sign_of_g: i64,
    /// `τA = tau_sign · σA`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_sign: Option<i64>,
    pub expected: ExpectedFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedFile {
    pub m: u64,
    pub e: u64,
    /// `"d"` or `"d-1"`.
    pub nu: String,
    pub kernel_template: Vec<TemplateFactorFile>,
}

/// `(Z/divisor)^{Σ c_N g_N(d)}`, keys `N` and rational `c_N` as strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateFactorFile {
    pub divisor: String,
    pub exponent: BTreeMap<String, String>,
}
