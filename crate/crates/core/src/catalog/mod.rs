//! Family data and expected results. The variant oracle reconciles
//! transcription ambiguities in the bundled CNC factors.

pub mod cyclotomic;
mod data;
pub mod datafile;
pub mod dickson;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::diffrep::{self, DiffBlock, PolyMatrix};
use crate::field::{FieldElement, FieldError, FieldTower, StepPoly};
use crate::geometry;
use crate::lattice::AbelianGroup;
use crate::poly::{CoeffAction, CorrPoly, Monomial, PolyError};
use crate::rational::{format_rational, parse_rational, EchelonSystem};

use datafile::{ExpectedFile, FamilyFile, TemplateFactorFile};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("family {0}: external data required")]
    ExternalDataRequired(u32),
    #[error("malformed family data: {0}")]
    Malformed(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("family data for n = {n} disagrees with the table row: {detail}")]
    ExpectedMismatch { n: u64, detail: String },
    #[error("kernel exponent {exponent} is not a nonnegative integer at d = {d}")]
    TemplateNotIntegral { d: u64, exponent: String },
    #[error("no variant of the bundled A passes: {0}")]
    NoVariant(String),
    #[error("variants with different D pass: {0}")]
    AmbiguousVariant(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FamilyId {
    /// One of the CNC families 7, 11, 13, 15, 21, 31, or an `n` read from a file.
    Cnc(u32),
    Cyclotomic(u32),
    Dickson(u32),
}

pub const CNC_FAMILIES: [u32; 6] = [7, 11, 13, 15, 21, 31];
pub const BUNDLED_FAMILIES: [u32; 4] = [7, 11, 13, 21];

impl FromStr for FamilyId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || CatalogError::UnknownFamily(s.to_string());
        let parse_n = |v: &str| v.trim().parse::<u32>().map_err(|_| unknown());
        if let Some(v) = s.strip_prefix("cyclotomic:") {
            let n = parse_n(v)?;
            return if n >= 3 { Ok(FamilyId::Cyclotomic(n)) } else { Err(unknown()) };
        }
        if let Some(v) = s.strip_prefix("dickson:") {
            let n = parse_n(v)?;
            return if n >= 3 && n % 2 == 1 { Ok(FamilyId::Dickson(n)) } else { Err(unknown()) };
        }
        let n = parse_n(s)?;
        if CNC_FAMILIES.contains(&n) {
            Ok(FamilyId::Cnc(n))
        } else {
            Err(unknown())
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyId::Cnc(n) => write!(f, "{n}"),
            FamilyId::Cyclotomic(n) => write!(f, "cyclotomic:{n}"),
            FamilyId::Dickson(n) => write!(f, "dickson:{n}"),
        }
    }
}

impl Serialize for FamilyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NuTemplate {
    #[serde(rename = "d")]
    D,
    #[serde(rename = "d-1")]
    DMinus1,
}

impl NuTemplate {
    pub fn evaluate(self, d: u64) -> u64 {
        match self {
            NuTemplate::D => d,
            NuTemplate::DMinus1 => d - 1,
        }
    }

    fn parse(s: &str) -> Result<Self, CatalogError> {
        match s.trim() {
            "d" => Ok(NuTemplate::D),
            "d-1" | "d - 1" => Ok(NuTemplate::DMinus1),
            other => Err(CatalogError::Malformed(format!("nu must be \"d\" or \"d-1\", got {other:?}"))),
        }
    }
}

impl fmt::Display for NuTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NuTemplate::D => "d",
            NuTemplate::DMinus1 => "d-1",
        })
    }
}

/// `Π (Z/divisor)^{Σ_N c_N g_N(d)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelTemplate {
    pub factors: Vec<(u64, BTreeMap<u64, BigRational>)>,
}

impl KernelTemplate {
    fn from_spec(factors: &[(u64, &[(u64, i64, i64)])]) -> Self {
        KernelTemplate {
            factors: factors
                .iter()
                .map(|(m, exp)| {
                    let exp = exp
                        .iter()
                        .map(|&(n, p, q)| (n, BigRational::new(p.into(), q.into())))
                        .collect();
                    (*m, exp)
                })
                .collect(),
        }
    }

    pub fn trivial() -> Self {
        KernelTemplate { factors: Vec::new() }
    }

    fn from_file(factors: &[TemplateFactorFile]) -> Result<Self, CatalogError> {
        let bad = |what: &str, v: &str| CatalogError::Malformed(format!("kernel_template {what} {v:?}"));
        let mut out = Vec::new();
        for f in factors {
            let m: u64 = f.divisor.trim().parse().map_err(|_| bad("divisor", &f.divisor))?;
            if m < 2 {
                return Err(bad("divisor", &f.divisor));
            }
            let mut exp = BTreeMap::new();
            for (k, v) in &f.exponent {
                let n: u64 = k.trim().parse().map_err(|_| bad("genus index", k))?;
                let c = parse_rational(v).map_err(|_| bad("coefficient", v))?;
                if !c.is_zero() {
                    exp.insert(n, c);
                }
            }
            out.push((m, exp));
        }
        Ok(KernelTemplate { factors: out })
    }

    fn to_file(&self) -> Vec<TemplateFactorFile> {
        self.factors
            .iter()
            .map(|(m, exp)| TemplateFactorFile {
                divisor: m.to_string(),
                exponent: exp.iter().map(|(n, c)| (n.to_string(), format_rational(c))).collect(),
            })
            .collect()
    }

    /// Exponent of each factor at `d`.
    pub fn exponents(&self, d: u64) -> Result<Vec<(u64, u64)>, CatalogError> {
        self.factors
            .iter()
            .map(|(m, exp)| {
                let value = exp.iter().fold(BigRational::zero(), |acc, (n, c)| {
                    acc + c * BigRational::from_integer(geometry::genus(d, *n).into())
                });
                let count = value
                    .is_integer()
                    .then(|| value.to_integer().to_u64())
                    .flatten()
                    .ok_or_else(|| CatalogError::TemplateNotIntegral {
                        d,
                        exponent: format_rational(&value),
                    })?;
                Ok((*m, count))
            })
            .collect()
    }

    pub fn evaluate(&self, d: u64) -> Result<AbelianGroup, CatalogError> {
        Ok(self
            .exponents(d)?
            .into_iter()
            .fold(AbelianGroup::trivial(), |acc, (m, count)| {
                acc.direct_sum(&AbelianGroup::cyclic_power(m, count as usize))
            }))
    }
}

fn format_exponent(exp: &BTreeMap<u64, BigRational>) -> String {
    let mut out = String::new();
    for (i, (n, c)) in exp.iter().rev().enumerate() {
        let (num, den) = (c.numer().abs(), c.denom().clone());
        if i > 0 {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        } else if c.is_negative() {
            out.push('-');
        }
        if !num.is_one() {
            out.push_str(&format!("{num} "));
        }
        out.push_str(&format!("g{n}"));
        if !den.is_one() {
            out.push_str(&format!("/{den}"));
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

impl fmt::Display for KernelTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(m, exp)| format!("(Z/{m})^{{{}}}", format_exponent(exp)))
            .collect();
        f.write_str(&parts.join(" x "))
    }
}

impl Serialize for KernelTemplate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub m: Option<u64>,
    pub e: usize,
    pub nu: Option<NuTemplate>,
    pub kernel: Option<KernelTemplate>,
}

/// One row of the expected-results table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub n: u32,
    pub nu: NuTemplate,
    pub e: usize,
    pub m: u64,
    pub kernel: KernelTemplate,
    /// Primes (or integers) of good simplicity, inert metadata.
    pub s_set: &'static str,
    pub tau_sign: i64,
    /// `g = sign_of_g · σ(f)`.
    pub sign_of_g: i64,
}

pub fn table_rows() -> Vec<TableRow> {
    use NuTemplate::{DMinus1, D};
    let row = |n, nu, e, m, kernel: &[(u64, &[(u64, i64, i64)])], s_set, tau_sign, sign_of_g| TableRow {
        n,
        nu,
        e,
        m,
        kernel: KernelTemplate::from_spec(kernel),
        s_set,
        tau_sign,
        sign_of_g,
    };
    vec![
        row(7, D, 2, 2, &[(2, &[(7, 1, 1)])], "Z>=2", -1, 1),
        row(11, DMinus1, 2, 3, &[(3, &[(11, 1, 1)])], "P \\ {11}", -1, 1),
        row(13, D, 4, 3, &[(3, &[(13, 1, 1)])], "Z>=2", 1, 1),
        row(
            15,
            D,
            2,
            4,
            &[(4, &[(15, 1, 1), (5, -1, 1), (3, -1, 1)]), (2, &[(5, 2, 1), (3, 2, 1)])],
            "P \\ {3,5,7}",
            1,
            -1,
        ),
        row(21, DMinus1, 2, 4, &[(4, &[(21, 1, 1), (3, -1, 1)]), (2, &[(3, 2, 1)])], "P \\ {3,5,7}", -1, 1),
        row(
            31,
            DMinus1,
            6,
            8,
            &[(8, &[(31, 1, 3)]), (4, &[(31, 2, 3)]), (2, &[(31, 2, 3)])],
            "P \\ {3,5,31}",
            -1,
            1,
        ),
    ]
}

pub fn table_row(n: u32) -> Option<TableRow> {
    table_rows().into_iter().find(|r| r.n == n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "source", content = "path")]
pub enum Provenance {
    BundledFromText,
    ExternalFile(String),
    Constructed,
}

/// A family `(field, A, f, g)` with its expected results.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub id: FamilyId,
    pub n: usize,
    pub field: Arc<FieldTower>,
    pub a: CorrPoly,
    pub f: Option<CorrPoly>,
    pub sign_of_g: i64,
    /// `τA = tau_sign · σA` when known.
    pub tau_sign: Option<i64>,
    pub expected: Expected,
    pub provenance: Provenance,
    pub s_set: Option<&'static str>,
    /// `x1`-degree of `A`.
    pub r: usize,
}

impl FamilySpec {
    /// `g = sign_of_g · σ(f)`.
    pub fn g(&self) -> Option<CorrPoly> {
        self.f.as_ref().map(|f| {
            let s = f.sigma();
            if self.sign_of_g < 0 {
                -s
            } else {
                s
            }
        })
    }

    /// `f(x1) − g(x2)`.
    pub fn difference(&self) -> Option<CorrPoly> {
        Some(self.f.as_ref()? - &self.g()?.tau())
    }

    pub fn has_t(&self) -> bool {
        self.a.involves_t() || self.f.as_ref().is_some_and(CorrPoly::involves_t)
    }

    fn from_file(file: &FamilyFile, id: FamilyId, provenance: Provenance) -> Result<Self, CatalogError> {
        let n = file.n as usize;
        if n < 2 {
            return Err(CatalogError::Malformed(format!("n = {n}")));
        }
        let steps = file
            .field
            .iter()
            .map(|s| StepPoly::from_serialized(s))
            .collect::<Result<Vec<_>, _>>()?;
        let field = match &file.generators {
            Some(names) if names.len() == steps.len() => FieldTower::with_names(steps, names.clone(), true)?,
            Some(names) => {
                return Err(CatalogError::Malformed(format!(
                    "{} generator names for {} steps",
                    names.len(),
                    steps.len()
                )))
            }
            None => FieldTower::new(steps, true)?,
        };
        let a = CorrPoly::from_serialized(&field, &file.a)?;
        let r = a.shape_check(n)?;
        let f = match &file.f {
            Some(terms) => {
                let f = CorrPoly::from_serialized(&field, terms)?;
                if f.deg_x2() != 0 || f.deg_x1() as usize != n {
                    return Err(CatalogError::Malformed(format!("f must be univariate of degree {n} in x1")));
                }
                Some(f)
            }
            None => None,
        };
        let sign = |v: i64, what: &str| {
            if v == 1 || v == -1 {
                Ok(v)
            } else {
                Err(CatalogError::Malformed(format!("{what} must be 1 or -1, got {v}")))
            }
        };
        let sign_of_g = sign(file.sign_of_g, "sign_of_g")?;
        let tau_sign = file.tau_sign.map(|v| sign(v, "tau_sign")).transpose()?;
        let expected = expected_from_file(&file.expected)?;
        if expected.e != field.degree() {
            return Err(CatalogError::Malformed(format!(
                "expected e = {} but the field has degree {}",
                expected.e,
                field.degree()
            )));
        }
        let row = table_row(file.n as u32);
        if let Some(row) = &row {
            check_against_row(file.n, &expected, sign_of_g, tau_sign, row)?;
        }
        Ok(FamilySpec {
            id,
            n,
            field,
            a,
            f,
            sign_of_g,
            tau_sign: tau_sign.or(row.as_ref().map(|r| r.tau_sign)),
            expected,
            provenance,
            s_set: row.map(|r| r.s_set),
            r,
        })
    }

    /// Serializable form of the spec.
    pub fn to_file(&self) -> FamilyFile {
        FamilyFile {
            family: Some(self.id.to_string()),
            n: self.n as u64,
            generators: Some(self.field.names().to_vec()),
            field: self.field.steps().iter().map(StepPoly::to_serialized).collect(),
            a: self.a.to_serialized(),
            f: self.f.as_ref().map(CorrPoly::to_serialized),
            sign_of_g: self.sign_of_g,
            tau_sign: self.tau_sign,
            expected: ExpectedFile {
                m: self.expected.m.unwrap_or(0),
                e: self.expected.e as u64,
                nu: self.expected.nu.map_or_else(String::new, |v| v.to_string()),
                kernel_template: self.expected.kernel.as_ref().map(KernelTemplate::to_file).unwrap_or_default(),
            },
        }
    }
}

fn expected_from_file(e: &ExpectedFile) -> Result<Expected, CatalogError> {
    Ok(Expected {
        m: Some(e.m),
        e: e.e as usize,
        nu: Some(NuTemplate::parse(&e.nu)?),
        kernel: Some(KernelTemplate::from_file(&e.kernel_template)?),
    })
}

fn check_against_row(
    n: u64,
    expected: &Expected,
    sign_of_g: i64,
    tau_sign: Option<i64>,
    row: &TableRow,
) -> Result<(), CatalogError> {
    let mismatch = |detail: String| Err(CatalogError::ExpectedMismatch { n, detail });
    if expected.m != Some(row.m) {
        return mismatch(format!("m = {:?}, table has {}", expected.m, row.m));
    }
    if expected.e != row.e {
        return mismatch(format!("e = {}, table has {}", expected.e, row.e));
    }
    if expected.nu != Some(row.nu) {
        return mismatch(format!("nu = {:?}, table has {}", expected.nu, row.nu));
    }
    // Compare templates by value over a range of d, so equivalent spellings agree.
    let template = expected.kernel.as_ref().expect("file templates are present");
    for d in 2..=12 {
        let (a, b) = (template.evaluate(d).ok(), row.kernel.evaluate(d).ok());
        if a != b {
            return mismatch(format!("kernel template {template} differs from {} at d = {d}", row.kernel));
        }
    }
    if sign_of_g != row.sign_of_g {
        return mismatch(format!("sign_of_g = {sign_of_g}, table has {}", row.sign_of_g));
    }
    if tau_sign.is_some_and(|s| s != row.tau_sign) {
        return mismatch(format!("tau_sign = {tau_sign:?}, table has {}", row.tau_sign));
    }
    Ok(())
}

fn bundled_text(n: u32) -> Option<&'static str> {
    match n {
        7 => Some(include_str!("../../data/family-7.json")),
        11 => Some(include_str!("../../data/family-11.json")),
        13 => Some(include_str!("../../data/family-13.json")),
        21 => Some(include_str!("../../data/family-21.json")),
        _ => None,
    }
}

pub fn parse_family_file(text: &str) -> Result<FamilyFile, CatalogError> {
    serde_json::from_str(text).map_err(|e| CatalogError::Malformed(e.to_string()))
}

fn read_file(path: &Path) -> Result<FamilyFile, CatalogError> {
    let text = std::fs::read_to_string(path).map_err(|e| CatalogError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_family_file(&text)
}

/// Loads a family. CNC families 15 and 31 need `file`; the bundled families
/// use the shipped data unless `file` overrides it.
pub fn load_family(id: FamilyId, file: Option<&Path>) -> Result<FamilySpec, CatalogError> {
    match id {
        FamilyId::Cnc(n) => {
            if let Some(path) = file {
                let data = read_file(path)?;
                if data.n != n as u64 {
                    return Err(CatalogError::Malformed(format!("file has n = {}, family is {n}", data.n)));
                }
                return FamilySpec::from_file(&data, id, Provenance::ExternalFile(path.display().to_string()));
            }
            let Some(text) = bundled_text(n) else {
                return Err(if CNC_FAMILIES.contains(&n) {
                    CatalogError::ExternalDataRequired(n)
                } else {
                    CatalogError::UnknownFamily(n.to_string())
                });
            };
            FamilySpec::from_file(&parse_family_file(text)?, id, Provenance::BundledFromText)
        }
        FamilyId::Cyclotomic(n) => Ok(cyclotomic_family(n)),
        FamilyId::Dickson(n) => dickson_family(n),
    }
}

/// Loads any family data file; the id is the file's `n`.
pub fn load_family_file(path: &Path) -> Result<FamilySpec, CatalogError> {
    let data = read_file(path)?;
    let n = u32::try_from(data.n).map_err(|_| CatalogError::Malformed(format!("n = {}", data.n)))?;
    FamilySpec::from_file(&data, FamilyId::Cnc(n), Provenance::ExternalFile(path.display().to_string()))
}

fn cyclotomic_family(n: u32) -> FamilySpec {
    let field = cyclotomic::cyclotomic_field(n);
    let a = cyclotomic::cyclotomic_corr_in(&field, n, 1);
    FamilySpec {
        id: FamilyId::Cyclotomic(n),
        n: n as usize,
        expected: Expected {
            m: Some(1),
            e: field.degree(),
            nu: None,
            kernel: Some(KernelTemplate::trivial()),
        },
        field,
        a,
        f: None,
        sign_of_g: 1,
        tau_sign: None,
        provenance: Provenance::Constructed,
        s_set: None,
        r: 1,
    }
}

fn dickson_family(n: u32) -> Result<FamilySpec, CatalogError> {
    let field = cyclotomic::real_cyclotomic_field(n);
    let a = dickson::dickson_factor_in(&field, 1);
    let f = dickson::dickson(n, &FieldElement::one(&field));
    Ok(FamilySpec {
        id: FamilyId::Dickson(n),
        n: n as usize,
        r: a.shape_check(n as usize)?,
        expected: Expected {
            m: None,
            e: field.degree(),
            nu: None,
            kernel: None,
        },
        field,
        a,
        f: Some(f),
        sign_of_g: 1,
        tau_sign: Some(1),
        provenance: Provenance::Constructed,
        s_set: None,
    })
}

/// `A(a1 x1 + b1, a2 x2 + b2)`.
pub fn transform_pair(
    a: &CorrPoly,
    a1: &FieldElement,
    b1: &FieldElement,
    a2: &FieldElement,
    b2: &FieldElement,
) -> Result<CorrPoly, PolyError> {
    a.map_coeffs(&CoeffAction::Affine {
        a1: a1.clone(),
        b1: b1.clone(),
        a2: a2.clone(),
        b2: b2.clone(),
    })
}

/// The printed `D(A_7)_6` over the given copy of `Q(α7)`.
pub fn printed_d7(field: &Arc<FieldTower>) -> PolyMatrix {
    let mut rows = vec![vec![CorrPoly::zero(field); 6]; 6];
    for &(i, j, t, c) in data::PRINTED_D7 {
        rows[i][j] = CorrPoly::term(FieldElement::from_ints(field, &c), Monomial::new(0, 0, t));
    }
    PolyMatrix::new(field, rows)
}

/// Result of [`resolve_variant`].
#[derive(Clone, Debug)]
pub struct Resolution {
    pub a: CorrPoly,
    /// `"as-printed"`, or the transformations applied, joined by `+`.
    pub variant: String,
    pub block: DiffBlock,
    pub m: Option<u64>,
    /// `f(x1) − g(x2) = A·B` when `f` is known.
    pub quotient: Option<CorrPoly>,
}

/// σ on the `t`-linear coefficients only.
fn sigma_t1(a: &CorrPoly) -> CorrPoly {
    CorrPoly::from_terms(
        a.field(),
        a.terms().map(|(m, c)| (*m, if m.t == 1 { c.sigma() } else { c.clone() })),
    )
}

fn orbit(a: &CorrPoly) -> Vec<(String, CorrPoly)> {
    let mut out = Vec::new();
    for sigma in [false, true] {
        for t1 in [false, true] {
            for neg in [false, true] {
                let mut p = a.clone();
                let mut tag = Vec::new();
                if sigma {
                    p = p.sigma();
                    tag.push("sigma");
                }
                if t1 {
                    p = sigma_t1(&p);
                    tag.push("sigma-t1");
                }
                if neg {
                    p = -p;
                    tag.push("neg");
                }
                let tag = if tag.is_empty() { "as-printed".to_string() } else { tag.join("+") };
                out.push((tag, p));
            }
        }
    }
    out
}

/// Outcome of the three acceptance conditions on one candidate.
struct Candidate {
    tag: String,
    a: CorrPoly,
    block: DiffBlock,
    m: Option<u64>,
    quotient: Option<CorrPoly>,
    failures: Vec<&'static str>,
}

fn evaluate_candidate(spec: &FamilySpec, tag: String, a: CorrPoly, diff: Option<&CorrPoly>) -> Result<Candidate, CatalogError> {
    let mut failures = Vec::new();
    if let Some(s) = spec.tau_sign {
        let target = if s < 0 { -a.sigma() } else { a.sigma() };
        if a.tau() != target {
            failures.push("tau-symmetry");
        }
    }
    let block = diffrep::differential_block(&a, spec.n)?;
    let m = diffrep::split_factor(&block.matrix.mul(&diffrep::differential_block(&a.tau(), spec.n)?.matrix));
    if spec.expected.m.is_some() && m != spec.expected.m {
        failures.push("split");
    }
    let quotient = match diff {
        Some(diff) => match diff.exact_divide(&a) {
            Ok(q) => Some(q),
            Err(PolyError::NonzeroRemainder { .. }) => {
                failures.push("factorization");
                None
            }
            Err(e) => return Err(e.into()),
        },
        None => None,
    };
    Ok(Candidate { tag, a, block, m, quotient, failures })
}

/// Searches `{σ} × {σ on t-linear terms} × {±1}` applied to the bundled `A`
/// for the member satisfying the printed τ-symmetry, the expected split
/// factor and (when `f` is known) exact division of `f(x1) − g(x2)`.
///
/// When no member passes and `f` is known, the `t`-linear part is refitted
/// from the first-order factorization equation on the bundled `t`-support.
/// When only `{D, σD}` remain and `f` is absent, the as-printed member wins.
pub fn resolve_variant(spec: &FamilySpec) -> Result<Resolution, CatalogError> {
    let diff = spec.difference();
    let mut passing = Vec::new();
    let mut report = Vec::new();
    for (tag, a) in orbit(&spec.a) {
        let c = evaluate_candidate(spec, tag, a, diff.as_ref())?;
        if c.failures.is_empty() {
            passing.push(c);
        } else {
            report.push(format!("{}: {}", c.tag, c.failures.join(",")));
        }
    }
    if passing.is_empty() {
        if let Some(diff) = &diff {
            for c in refit_candidates(spec, diff)? {
                let c = evaluate_candidate(spec, c.0, c.1, Some(diff))?;
                if c.failures.is_empty() {
                    passing.push(c);
                } else {
                    report.push(format!("{}: {}", c.tag, c.failures.join(",")));
                }
            }
        }
    }
    if passing.is_empty() {
        return Err(CatalogError::NoVariant(report.join("; ")));
    }
    let mut groups: Vec<Vec<Candidate>> = Vec::new();
    for c in passing {
        match groups.iter_mut().find(|g| g[0].block.matrix == c.block.matrix) {
            Some(g) => g.push(c),
            None => groups.push(vec![c]),
        }
    }
    let chosen = match groups.len() {
        1 => groups.swap_remove(0),
        2 if diff.is_none() && groups[1][0].block.matrix == groups[0][0].block.matrix.sigma() => {
            let idx = groups
                .iter()
                .position(|g| g.iter().any(|c| c.tag == "as-printed"))
                .ok_or_else(|| CatalogError::AmbiguousVariant(tags(&groups)))?;
            groups.swap_remove(idx)
        }
        _ => return Err(CatalogError::AmbiguousVariant(tags(&groups))),
    };
    let c = chosen.into_iter().next().expect("groups are nonempty");
    Ok(Resolution {
        a: c.a,
        variant: c.tag,
        block: c.block,
        m: c.m,
        quotient: c.quotient,
    })
}

fn tags(groups: &[Vec<Candidate>]) -> String {
    groups
        .iter()
        .map(|g| g.iter().map(|c| c.tag.as_str()).collect::<Vec<_>>().join("|"))
        .collect::<Vec<_>>()
        .join(" vs ")
}

fn basis_element(field: &Arc<FieldTower>, b: usize) -> FieldElement {
    let mut coords = vec![BigRational::zero(); field.degree()];
    coords[b] = BigRational::one();
    FieldElement::from_coords(field, &coords).expect("unit vector has the right length")
}

/// Solves `A0·B1 + L·B0 = F1` for the `t`-linear part `L` of `A`, where
/// `A0` is the `t`-free part of the bundled `A` (or its σ-image),
/// `B0 = F0 / A0`, and `L` is supported on the bundled `t`-linear monomials.
fn refit_candidates(spec: &FamilySpec, diff: &CorrPoly) -> Result<Vec<(String, CorrPoly)>, CatalogError> {
    let a = &spec.a;
    if a.deg_t() > 1 || diff.deg_t() == 0 {
        return Ok(Vec::new());
    }
    let field = a.field().clone();
    let e = field.degree();
    let support: Vec<Monomial> = a.coeff_t(1).terms().map(|(m, _)| *m).collect();
    let (f0, f1) = (diff.coeff_t(0), diff.coeff_t(1));
    let r = spec.r as u32;
    let b1_degree = spec.n as u32 - r;
    let b1_support: Vec<Monomial> = (0..=b1_degree)
        .flat_map(|i| (0..=b1_degree - i).map(move |j| Monomial::new(i, j, 0)))
        .collect();
    let basis: Vec<FieldElement> = (0..e).map(|b| basis_element(&field, b)).collect();
    let mut out = Vec::new();
    for (tag, a0) in [("refit-t1", a.coeff_t(0)), ("sigma+refit-t1", a.coeff_t(0).sigma())] {
        let Ok(b0) = f0.exact_divide(&a0) else { continue };
        let mut columns: Vec<CorrPoly> = Vec::new();
        for m in &support {
            let mono = CorrPoly::monomial(&field, m.x1, m.x2, 0);
            let prod = &mono * &b0;
            columns.extend(basis.iter().map(|eb| prod.scale(eb)));
        }
        let l_unknowns = columns.len();
        for m in &b1_support {
            let prod = &CorrPoly::monomial(&field, m.x1, m.x2, 0) * &a0;
            columns.extend(basis.iter().map(|eb| prod.scale(eb)));
        }
        let mut monomials: Vec<Monomial> = columns.iter().flat_map(|c| c.terms().map(|(m, _)| *m)).collect();
        monomials.extend(f1.terms().map(|(m, _)| *m));
        monomials.sort_unstable();
        monomials.dedup();
        let mut rows = Vec::with_capacity(monomials.len() * e);
        for m in &monomials {
            let coords: Vec<Vec<BigRational>> = columns.iter().map(|c| c.coefficient(m).coords()).collect();
            let rhs = f1.coefficient(m).coords();
            for k in 0..e {
                let mut row: Vec<BigRational> = coords.iter().map(|c| c[k].clone()).collect();
                row.push(rhs[k].clone());
                rows.push(row);
            }
        }
        let Some(system) = EchelonSystem::solve(rows, columns.len()) else { continue };
        if !system.determines(0..l_unknowns) {
            continue;
        }
        let x = system.particular();
        let l = CorrPoly::from_terms(
            &field,
            support.iter().enumerate().map(|(s, m)| {
                let coords = &x[s * e..(s + 1) * e];
                (
                    Monomial::new(m.x1, m.x2, 1),
                    FieldElement::from_coords(&field, coords).expect("length e"),
                )
            }),
        );
        out.push((tag.to_string(), &a0 + &l));
    }
    Ok(out)
}
