//! Number fields presented as towers of monic extensions.
//!
//! A tower `Q ⊂ Q(g_1) ⊂ Q(g_1, g_2) ⊂ …` is fixed by its step polynomials;
//! each step's coefficients live in the field built so far. Elements are
//! exact rational coordinate vectors on the power-product basis
//! `g_1^{a_1} ⋯ g_s^{a_s}` (`0 ≤ a_i < deg_i`), ordered lexicographically
//! with the top generator most significant. The multiplication table is
//! computed once at construction.
//!
//! When the top step is quadratic the tower carries a CM involution `σ`,
//! the nontrivial automorphism of that step over the field below it.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, format_rational, parse_rational, ParseRationalError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("step {step} has degree 0")]
    ConstantStep { step: usize },
    #[error("step {step} is not monic")]
    NonMonic { step: usize },
    #[error("step {step} has a coefficient outside the field below it")]
    CoefficientOutsideLowerField { step: usize },
    #[error("a CM involution needs a quadratic top step, found degree {degree}")]
    TopStepNotQuadratic { degree: usize },
    #[error("inversion of zero")]
    DivisionByZero,
    #[error("element is a zero divisor; the tower is not a field")]
    ZeroDivisor,
    #[error("operands belong to different towers")]
    MixedTowers,
    #[error("element is not integral in the order basis (denominators {denominators:?})")]
    NonIntegral { denominators: Vec<String> },
    #[error("expected {expected} coordinates, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("generator images do not satisfy step {step}")]
    NotAHomomorphism { step: usize },
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
}

/// A monic step polynomial, constant-to-leading. Each coefficient is a
/// coordinate vector over the basis of the field below the step (shorter
/// vectors are zero-padded).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepPoly {
    coeffs: Vec<Vec<BigRational>>,
}

impl StepPoly {
    pub fn new(coeffs: Vec<Vec<BigRational>>) -> Self {
        StepPoly { coeffs }
    }

    /// A step with rational coefficients.
    pub fn rational(coeffs: &[i64]) -> Self {
        StepPoly {
            coeffs: coeffs
                .iter()
                .map(|&c| vec![BigRational::from_integer(c.into())])
                .collect(),
        }
    }

    pub fn coeffs(&self) -> &[Vec<BigRational>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Serialized step coefficient: a bare rational (embedded from Q) or a
/// coordinate vector over the lower field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepCoeff {
    Scalar(String),
    Coords(Vec<String>),
}

impl StepPoly {
    pub fn from_serialized(coeffs: &[StepCoeff]) -> Result<Self, FieldError> {
        let coeffs = coeffs
            .iter()
            .map(|c| match c {
                StepCoeff::Scalar(s) => Ok(vec![parse_rational(s)?]),
                StepCoeff::Coords(v) => v.iter().map(|s| parse_rational(s)).collect(),
            })
            .collect::<Result<Vec<_>, ParseRationalError>>()?;
        Ok(StepPoly { coeffs })
    }

    pub fn to_serialized(&self) -> Vec<StepCoeff> {
        self.coeffs
            .iter()
            .map(|c| {
                let nonzero = c.iter().rposition(|q| !q.is_zero()).map_or(0, |i| i + 1);
                if nonzero <= 1 {
                    StepCoeff::Scalar(format_rational(&c.first().cloned().unwrap_or_else(BigRational::zero)))
                } else {
                    StepCoeff::Coords(c.iter().map(format_rational).collect())
                }
            })
            .collect()
    }
}

type SparseRow = Vec<(usize, BigInt)>;

pub struct FieldTower {
    steps: Vec<StepPoly>,
    names: Vec<String>,
    step_degrees: Vec<usize>,
    degree: usize,
    basis: Vec<Vec<u32>>,
    /// `table[i * e + j]` holds the numerators of `b_i b_j` over `table_den`.
    table: Vec<SparseRow>,
    table_den: BigInt,
    /// `sigma[b]` are the coordinates of `σ(b_b)`; `None` means identity.
    sigma: Option<Vec<Vec<BigRational>>>,
    gen_scale: Vec<BigInt>,
    /// Order basis: `γ_b = order_scale[b] · b_b`.
    order_scale: Vec<BigInt>,
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        self.steps == other.steps && self.sigma.is_some() == other.sigma.is_some()
    }
}

impl Eq for FieldTower {}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldTower")
            .field("names", &self.names)
            .field("step_degrees", &self.step_degrees)
            .field("cm", &self.sigma.is_some())
            .finish()
    }
}

fn mixed_radix(step_degrees: &[usize], mut index: usize) -> Vec<u32> {
    step_degrees
        .iter()
        .map(|&d| {
            let a = index % d;
            index /= d;
            a as u32
        })
        .collect()
}

fn radix_index(step_degrees: &[usize], exps: &[u32]) -> usize {
    let mut index = 0;
    let mut radix = 1;
    for (&d, &a) in step_degrees.iter().zip(exps) {
        index += a as usize * radix;
        radix *= d;
    }
    index
}

impl FieldTower {
    /// Builds a tower from its steps. `with_sigma` requests the CM involution
    /// on the (quadratic) top step; the rational field accepts it as identity.
    pub fn new(steps: Vec<StepPoly>, with_sigma: bool) -> Result<Arc<FieldTower>, FieldError> {
        let names = (1..=steps.len()).map(|i| format!("g{i}")).collect();
        Self::with_names(steps, names, with_sigma)
    }

    pub fn rationals() -> Arc<FieldTower> {
        Self::new(Vec::new(), true).expect("empty tower is valid")
    }

    pub fn with_names(
        steps: Vec<StepPoly>,
        names: Vec<String>,
        with_sigma: bool,
    ) -> Result<Arc<FieldTower>, FieldError> {
        assert_eq!(steps.len(), names.len(), "one name per generator");
        let mut normalized = Vec::with_capacity(steps.len());
        let mut step_degrees = Vec::with_capacity(steps.len());
        let mut lower = 1usize;
        for (s, step) in steps.into_iter().enumerate() {
            let deg = step.degree();
            if deg == 0 {
                return Err(FieldError::ConstantStep { step: s });
            }
            let mut coeffs = Vec::with_capacity(deg + 1);
            for c in step.coeffs {
                if c.len() > lower && c[lower..].iter().any(|q| !q.is_zero()) {
                    return Err(FieldError::CoefficientOutsideLowerField { step: s });
                }
                let mut padded: Vec<BigRational> = c.into_iter().take(lower).collect();
                padded.resize(lower, BigRational::zero());
                coeffs.push(padded);
            }
            let lead = &coeffs[deg];
            if !lead[0].is_one() || lead[1..].iter().any(|q| !q.is_zero()) {
                return Err(FieldError::NonMonic { step: s });
            }
            normalized.push(StepPoly { coeffs });
            step_degrees.push(deg);
            lower *= deg;
        }
        let degree = lower;
        let basis: Vec<Vec<u32>> = (0..degree).map(|i| mixed_radix(&step_degrees, i)).collect();

        let mut tower = FieldTower {
            steps: normalized,
            names,
            step_degrees,
            degree,
            basis,
            table: Vec::new(),
            table_den: BigInt::one(),
            sigma: None,
            gen_scale: Vec::new(),
            order_scale: Vec::new(),
        };
        tower.build_table();
        tower.build_order();
        if with_sigma && !tower.steps.is_empty() {
            let top = tower.steps.len() - 1;
            if tower.step_degrees[top] != 2 {
                return Err(FieldError::TopStepNotQuadratic {
                    degree: tower.step_degrees[top],
                });
            }
            tower.sigma = Some(tower.build_sigma());
        }
        Ok(Arc::new(tower))
    }

    /// Reduces a sparse sum of generator monomials (exponents unbounded) to
    /// basis coordinates.
    fn reduce(&self, mut terms: BTreeMap<Vec<u32>, BigRational>) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.degree];
        while let Some((exps, coeff)) = terms.pop_last() {
            if coeff.is_zero() {
                continue;
            }
            let overflow = (0..exps.len())
                .rev()
                .find(|&i| exps[i] as usize >= self.step_degrees[i]);
            let Some(i) = overflow else {
                out[radix_index(&self.step_degrees, &exps)] += coeff;
                continue;
            };
            // g_i^{deg} = -Σ_j c_j g_i^j with c_j in the field below step i.
            let deg = self.step_degrees[i];
            for (j, c) in self.steps[i].coeffs[..deg].iter().enumerate() {
                for (lb, q) in c.iter().enumerate() {
                    if q.is_zero() {
                        continue;
                    }
                    let lower = mixed_radix(&self.step_degrees[..i], lb);
                    let mut e = exps.clone();
                    e[i] = e[i] - deg as u32 + j as u32;
                    for (k, a) in lower.into_iter().enumerate() {
                        e[k] += a;
                    }
                    let entry = terms.entry(e).or_insert_with(BigRational::zero);
                    *entry -= &coeff * q;
                }
            }
        }
        out
    }

    fn build_table(&mut self) {
        let e = self.degree;
        let mut rational_table = Vec::with_capacity(e * e);
        for i in 0..e {
            for j in 0..e {
                let exps: Vec<u32> = self.basis[i]
                    .iter()
                    .zip(&self.basis[j])
                    .map(|(a, b)| a + b)
                    .collect();
                let mut terms = BTreeMap::new();
                terms.insert(exps, BigRational::one());
                rational_table.push(self.reduce(terms));
            }
        }
        let den = rational_table
            .iter()
            .fold(BigInt::one(), |acc, row| acc.lcm(&rational::lcm_denominators(row)));
        self.table = rational_table
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .enumerate()
                    .filter(|(_, q)| !q.is_zero())
                    .map(|(k, q)| (k, (q * BigRational::from_integer(den.clone())).to_integer()))
                    .collect()
            })
            .collect();
        self.table_den = den;
    }

    /// Chooses generator rescalings making every step polynomial integral
    /// over the order built below it.
    fn build_order(&mut self) {
        let mut gen_scale: Vec<BigInt> = Vec::new();
        for (s, step) in self.steps.iter().enumerate() {
            let lower_scale: Vec<BigInt> = (0..self.step_degrees[..s].iter().product::<usize>())
                .map(|lb| {
                    let exps = mixed_radix(&self.step_degrees[..s], lb);
                    scale_for(&gen_scale, &exps)
                })
                .collect();
            let deg = self.step_degrees[s];
            let order_coeffs: Vec<Vec<BigRational>> = step.coeffs[..deg]
                .iter()
                .map(|c| {
                    c.iter()
                        .zip(&lower_scale)
                        .map(|(q, sc)| q / BigRational::from_integer(sc.clone()))
                        .collect()
                })
                .collect();
            let bound = order_coeffs
                .iter()
                .fold(BigInt::one(), |acc, c| acc.lcm(&rational::lcm_denominators(c)));
            let mut d = BigInt::one();
            while d < bound {
                let ok = order_coeffs.iter().enumerate().all(|(j, c)| {
                    let factor = BigRational::from_integer(num_traits::pow(d.clone(), deg - j));
                    c.iter().all(|q| (q * &factor).is_integer())
                });
                if ok {
                    break;
                }
                d += 1;
            }
            gen_scale.push(d);
        }
        self.order_scale = self.basis.iter().map(|b| scale_for(&gen_scale, b)).collect();
        self.gen_scale = gen_scale;
    }

    fn build_sigma(&self) -> Vec<Vec<BigRational>> {
        let top = self.steps.len() - 1;
        let lower = self.degree / 2;
        // σ(g) = -c_1 - g for g^2 + c_1 g + c_0.
        let mut conj = vec![BigRational::zero(); self.degree];
        for (lb, q) in self.steps[top].coeffs[1].iter().enumerate() {
            conj[lb] = -q.clone();
        }
        conj[lower] -= BigRational::one();
        let (conj_num, conj_den) = to_numerators(&conj);
        (0..self.degree)
            .map(|b| {
                if b < lower {
                    let mut v = vec![BigRational::zero(); self.degree];
                    v[b] = BigRational::one();
                    v
                } else {
                    let mut unit = vec![BigInt::zero(); self.degree];
                    unit[b - lower] = BigInt::one();
                    let (num, den) = self.mul_raw(&unit, &BigInt::one(), &conj_num, &conj_den);
                    from_numerators(&num, &den)
                }
            })
            .collect()
    }

    fn mul_raw(
        &self,
        a: &[BigInt],
        a_den: &BigInt,
        b: &[BigInt],
        b_den: &BigInt,
    ) -> (Vec<BigInt>, BigInt) {
        let e = self.degree;
        let mut out = vec![BigInt::zero(); e];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let ab = ai * bj;
                for (k, t) in &self.table[i * e + j] {
                    out[*k] += &ab * t;
                }
            }
        }
        let den = a_den * b_den * &self.table_den;
        normalize(out, den)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[StepPoly] {
        &self.steps
    }

    pub fn step_degrees(&self) -> &[usize] {
        &self.step_degrees
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn basis_exponents(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn is_cm(&self) -> bool {
        self.sigma.is_some()
    }

    /// Per-generator rescaling used to build the integral order basis.
    pub fn generator_scales(&self) -> &[BigInt] {
        &self.gen_scale
    }

    pub fn order_scales(&self) -> &[BigInt] {
        &self.order_scale
    }

    pub fn is_rescaled(&self) -> bool {
        self.gen_scale.iter().any(|d| !d.is_one())
    }

    /// Human-readable name of a basis monomial (`"1"` for the unit).
    pub fn basis_name(&self, b: usize) -> String {
        let parts: Vec<String> = self.basis[b]
            .iter()
            .zip(&self.names)
            .filter(|(a, _)| **a > 0)
            .map(|(a, n)| if *a == 1 { n.clone() } else { format!("{n}^{a}") })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Structure constants of the order basis: `γ_i γ_j = Σ_k Γ^{(i)}_{jk} γ_k`.
    /// Every entry is an integer by construction of the order.
    pub fn order_structure_constants(self: &Arc<Self>) -> Vec<Vec<Vec<BigInt>>> {
        (0..self.degree)
            .map(|i| {
                let gi = self.order_basis_element(i);
                (0..self.degree)
                    .map(|j| {
                        let gj = self.order_basis_element(j);
                        (&gi * &gj)
                            .order_coords()
                            .into_iter()
                            .map(|q| {
                                assert!(q.is_integer(), "order basis not closed");
                                q.to_integer()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn order_basis_element(self: &Arc<Self>, b: usize) -> FieldElement {
        let mut num = vec![BigInt::zero(); self.degree];
        num[b] = self.order_scale[b].clone();
        FieldElement::from_raw(self.clone(), num, BigInt::one())
    }
}

fn scale_for(gen_scale: &[BigInt], exps: &[u32]) -> BigInt {
    gen_scale
        .iter()
        .zip(exps)
        .fold(BigInt::one(), |acc, (d, &a)| acc * num_traits::pow(d.clone(), a as usize))
}

fn to_numerators(v: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let den = rational::lcm_denominators(v);
    let num = v
        .iter()
        .map(|q| (q * BigRational::from_integer(den.clone())).to_integer())
        .collect();
    (num, den)
}

fn from_numerators(num: &[BigInt], den: &BigInt) -> Vec<BigRational> {
    num.iter()
        .map(|n| BigRational::new(n.clone(), den.clone()))
        .collect()
}

fn normalize(mut num: Vec<BigInt>, mut den: BigInt) -> (Vec<BigInt>, BigInt) {
    if den.is_negative() {
        den = -den;
        for n in num.iter_mut() {
            *n = -n.clone();
        }
    }
    let g = num.iter().fold(den.clone(), |acc, n| acc.gcd(n));
    if !g.is_one() && !g.is_zero() {
        for n in num.iter_mut() {
            *n = &*n / &g;
        }
        den = &den / &g;
    }
    if num.iter().all(Zero::is_zero) {
        den = BigInt::one();
    }
    (num, den)
}

/// Element of a [`FieldTower`]: rational coordinates stored as integer
/// numerators over a common positive denominator in lowest terms.
#[derive(Clone)]
pub struct FieldElement {
    field: Arc<FieldTower>,
    num: Vec<BigInt>,
    den: BigInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Inv,
}

/// Checked arithmetic entry point; `b` is ignored for `Inv`.
pub fn arith(a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement, FieldError> {
    match op {
        ArithOp::Inv => a.inv(),
        ArithOp::Add => {
            a.check_same(b)?;
            Ok(a + b)
        }
        ArithOp::Mul => {
            a.check_same(b)?;
            Ok(a * b)
        }
    }
}

pub fn same_tower(a: &Arc<FieldTower>, b: &Arc<FieldTower>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl FieldElement {
    fn from_raw(field: Arc<FieldTower>, num: Vec<BigInt>, den: BigInt) -> Self {
        let (num, den) = normalize(num, den);
        FieldElement { field, num, den }
    }

    pub fn zero(field: &Arc<FieldTower>) -> Self {
        FieldElement {
            field: field.clone(),
            num: vec![BigInt::zero(); field.degree],
            den: BigInt::one(),
        }
    }

    pub fn one(field: &Arc<FieldTower>) -> Self {
        Self::from_int(field, 1)
    }

    pub fn from_int(field: &Arc<FieldTower>, c: i64) -> Self {
        Self::from_rational(field, BigRational::from_integer(c.into()))
    }

    pub fn from_rational(field: &Arc<FieldTower>, c: BigRational) -> Self {
        let mut num = vec![BigInt::zero(); field.degree];
        num[0] = c.numer().clone();
        Self::from_raw(field.clone(), num, c.denom().clone())
    }

    pub fn from_coords(field: &Arc<FieldTower>, coords: &[BigRational]) -> Result<Self, FieldError> {
        if coords.len() > field.degree {
            return Err(FieldError::WrongLength {
                expected: field.degree,
                got: coords.len(),
            });
        }
        let mut padded = coords.to_vec();
        padded.resize(field.degree, BigRational::zero());
        let (num, den) = to_numerators(&padded);
        Ok(Self::from_raw(field.clone(), num, den))
    }

    /// Integer coordinates, constant first (`[c0, c1, ...]`).
    pub fn from_ints(field: &Arc<FieldTower>, coords: &[i64]) -> Self {
        let coords: Vec<BigRational> = coords
            .iter()
            .map(|&c| BigRational::from_integer(c.into()))
            .collect();
        Self::from_coords(field, &coords).expect("coordinate vector too long")
    }

    pub fn from_strings(field: &Arc<FieldTower>, coords: &[String]) -> Result<Self, FieldError> {
        let coords = coords
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_coords(field, &coords)
    }

    /// The `i`-th generator (0 is the bottom step).
    pub fn generator(field: &Arc<FieldTower>, i: usize) -> Self {
        let mut exps = vec![0u32; field.step_count()];
        let mut num = vec![BigInt::zero(); field.degree];
        if field.step_degrees[i] == 1 {
            // A linear step pins its generator to -c_0.
            let c0 = &field.steps[i].coeffs[0];
            let lower = FieldElement::from_coords(field, c0).expect("lower coordinates fit");
            return -lower;
        }
        exps[i] = 1;
        num[radix_index(&field.step_degrees, &exps)] = BigInt::one();
        Self::from_raw(field.clone(), num, BigInt::one())
    }

    /// The top generator of the tower.
    pub fn top_generator(field: &Arc<FieldTower>) -> Self {
        Self::generator(field, field.step_count() - 1)
    }

    pub fn field(&self) -> &Arc<FieldTower> {
        &self.field
    }

    pub fn coords(&self) -> Vec<BigRational> {
        from_numerators(&self.num, &self.den)
    }

    pub fn coord(&self, b: usize) -> BigRational {
        BigRational::new(self.num[b].clone(), self.den.clone())
    }

    pub fn coord_strings(&self) -> Vec<String> {
        self.coords().iter().map(format_rational).collect()
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// `Some(q)` when the element is the rational `q`.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(Zero::is_zero) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    pub fn check_same(&self, other: &FieldElement) -> Result<(), FieldError> {
        if same_tower(&self.field, &other.field) {
            Ok(())
        } else {
            Err(FieldError::MixedTowers)
        }
    }

    fn assert_same(&self, other: &FieldElement) {
        if let Err(e) = self.check_same(other) {
            panic!("{e}");
        }
    }

    pub fn scale(&self, c: &BigRational) -> FieldElement {
        let num = self.num.iter().map(|n| n * c.numer()).collect();
        Self::from_raw(self.field.clone(), num, &self.den * c.denom())
    }

    pub fn pow(&self, mut k: u32) -> FieldElement {
        let mut base = self.clone();
        let mut acc = FieldElement::one(&self.field);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Rows `a·b_j` of the multiplication-by-`a` map over Q.
    pub fn multiplication_matrix(&self) -> Vec<Vec<BigRational>> {
        (0..self.field.degree)
            .map(|j| {
                let mut unit = vec![BigInt::zero(); self.field.degree];
                unit[j] = BigInt::one();
                let (num, den) = self.field.mul_raw(&self.num, &self.den, &unit, &BigInt::one());
                from_numerators(&num, &den)
            })
            .collect()
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let rows = self.multiplication_matrix();
        let e = self.field.degree;
        // Σ_j x_j (a b_j) = 1, i.e. the transpose system.
        let transposed: Vec<Vec<BigRational>> = (0..e)
            .map(|k| (0..e).map(|j| rows[j][k].clone()).collect())
            .collect();
        let mut rhs = vec![BigRational::zero(); e];
        rhs[0] = BigRational::one();
        let x = rational::solve_square(&transposed, &rhs).ok_or(FieldError::ZeroDivisor)?;
        FieldElement::from_coords(&self.field, &x)
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check_same(other)?;
        Ok(self * &other.inv()?)
    }

    /// Absolute norm down to Q.
    pub fn norm(&self) -> BigRational {
        rational::determinant(self.multiplication_matrix())
    }

    /// Absolute trace down to Q.
    pub fn trace(&self) -> BigRational {
        self.multiplication_matrix()
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (j, row)| acc + &row[j])
    }

    /// The CM involution; identity on towers without one.
    pub fn sigma(&self) -> FieldElement {
        let Some(sigma) = &self.field.sigma else {
            return self.clone();
        };
        let e = self.field.degree;
        let mut out = vec![BigRational::zero(); e];
        for (b, n) in self.num.iter().enumerate() {
            if n.is_zero() {
                continue;
            }
            let c = BigRational::new(n.clone(), self.den.clone());
            for (k, s) in sigma[b].iter().enumerate() {
                if !s.is_zero() {
                    out[k] += &c * s;
                }
            }
        }
        FieldElement::from_coords(&self.field, &out).expect("same length")
    }

    /// Monic minimal polynomial over Q, constant first.
    pub fn minimal_polynomial(&self) -> Vec<BigRational> {
        let e = self.field.degree;
        let mut powers: Vec<Vec<BigRational>> = vec![FieldElement::one(&self.field).coords()];
        let mut current = FieldElement::one(&self.field);
        loop {
            current = &current * self;
            let k = powers.len();
            // Solve Σ_{j<k} c_j x^j = x^k.
            let rows: Vec<Vec<BigRational>> = (0..e)
                .map(|b| {
                    let mut row: Vec<BigRational> = powers.iter().map(|p| p[b].clone()).collect();
                    row.push(current.coord(b));
                    row
                })
                .collect();
            if let Some(sys) = rational::EchelonSystem::solve(rows, k) {
                let mut poly: Vec<BigRational> = sys.particular().into_iter().map(|c| -c).collect();
                poly.push(BigRational::one());
                return poly;
            }
            powers.push(current.coords());
        }
    }

    /// Coordinates relative to the order basis `γ_b`.
    pub fn order_coords(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .zip(&self.field.order_scale)
            .map(|(n, s)| BigRational::new(n.clone(), &self.den * s))
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.order_coords().iter().all(|q| q.is_integer())
    }

    /// Regular representation on the order basis:
    /// `γ_i · a = Σ_k ρ(a)_{ik} γ_k`.
    pub fn regular_rep(&self) -> Result<Vec<Vec<BigInt>>, FieldError> {
        let coords = self.order_coords();
        if coords.iter().any(|q| !q.is_integer()) {
            return Err(FieldError::NonIntegral {
                denominators: coords.iter().map(|q| q.denom().to_string()).collect(),
            });
        }
        let e = self.field.degree;
        Ok((0..e)
            .map(|i| {
                let gi = self.field.order_basis_element(i);
                (&gi * self)
                    .order_coords()
                    .into_iter()
                    .map(|q| q.to_integer())
                    .collect()
            })
            .collect())
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        same_tower(&self.field, &other.field) && self.den == other.den && self.num == other.num
    }
}

impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (b, n) in self.num.iter().enumerate() {
            if n.is_zero() {
                continue;
            }
            let c = BigRational::new(n.clone(), self.den.clone());
            let name = self.field.basis_name(b);
            let negative = c.is_negative();
            let mag = c.abs();
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            first = false;
            match (name.as_str(), mag.is_one()) {
                ("1", _) => write!(f, "{}", format_rational(&mag))?,
                (_, true) => write!(f, "{name}")?,
                (_, false) => write!(f, "{}*{name}", format_rational(&mag))?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same(rhs);
        let den = self.den.lcm(&rhs.den);
        let (fa, fb) = (&den / &self.den, &den / &rhs.den);
        let num = self
            .num
            .iter()
            .zip(&rhs.num)
            .map(|(a, b)| a * &fa + b * &fb)
            .collect();
        FieldElement::from_raw(self.field.clone(), num, den)
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self + &(-rhs)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            num: self.num.iter().map(|n| -n).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same(rhs);
        let (num, den) = self.field.mul_raw(&self.num, &self.den, &rhs.num, &rhs.den);
        FieldElement {
            field: self.field.clone(),
            num,
            den,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// A field homomorphism given by the images of the source generators.
#[derive(Clone, Debug)]
pub struct FieldEmbedding {
    source: Arc<FieldTower>,
    target: Arc<FieldTower>,
    basis_images: Vec<FieldElement>,
}

impl FieldEmbedding {
    /// Checks every step polynomial vanishes at the proposed images.
    pub fn new(
        source: &Arc<FieldTower>,
        target: &Arc<FieldTower>,
        generator_images: Vec<FieldElement>,
    ) -> Result<Self, FieldError> {
        assert_eq!(generator_images.len(), source.step_count());
        for img in &generator_images {
            if !same_tower(img.field(), target) {
                return Err(FieldError::MixedTowers);
            }
        }
        let mut basis_images = Vec::with_capacity(source.degree);
        for exps in &source.basis {
            let mut acc = FieldElement::one(target);
            for (img, &a) in generator_images.iter().zip(exps) {
                acc = &acc * &img.pow(a);
            }
            basis_images.push(acc);
        }
        let embedding = FieldEmbedding {
            source: source.clone(),
            target: target.clone(),
            basis_images,
        };
        for (s, step) in source.steps.iter().enumerate() {
            let mut value = FieldElement::zero(target);
            for (j, c) in step.coeffs.iter().enumerate().rev() {
                let coeff = embedding.apply_lower(c);
                value = &(&value * &generator_images[s]) + &coeff;
                let _ = j;
            }
            if !value.is_zero() {
                return Err(FieldError::NotAHomomorphism { step: s });
            }
        }
        Ok(embedding)
    }

    fn apply_lower(&self, coords: &[BigRational]) -> FieldElement {
        coords
            .iter()
            .zip(&self.basis_images)
            .filter(|(q, _)| !q.is_zero())
            .fold(FieldElement::zero(&self.target), |acc, (q, img)| {
                &acc + &img.scale(q)
            })
    }

    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        assert!(same_tower(x.field(), &self.source), "element outside source");
        self.apply_lower(&x.coords())
    }

    /// The source element mapping to `y`, if `y` lies in the image.
    pub fn preimage(&self, y: &FieldElement) -> Option<FieldElement> {
        let e = self.source.degree;
        let rows: Vec<Vec<BigRational>> = (0..self.target.degree)
            .map(|b| {
                let mut row: Vec<BigRational> = self.basis_images.iter().map(|img| img.coord(b)).collect();
                row.push(y.coord(b));
                row
            })
            .collect();
        let sys = rational::EchelonSystem::solve(rows, e)?;
        FieldElement::from_coords(&self.source, &sys.particular()).ok()
    }

    pub fn source(&self) -> &Arc<FieldTower> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FieldTower> {
        &self.target
    }
}
