//! Sparse polynomials in `x1`, `x2` and the deformation parameter `t` over a
//! [`FieldTower`].
//!
//! Univariate data (`f`, Dickson polynomials, power sums) reuses the same type
//! with the unused exponents at zero.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{same_tower, FieldElement, FieldEmbedding, FieldError, FieldTower};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub x1: u32,
    pub x2: u32,
    pub t: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { x1: 0, x2: 0, t: 0 };

    pub fn new(x1: u32, x2: u32, t: u32) -> Self {
        Monomial { x1, x2, t }
    }

    fn times(self, other: Monomial) -> Monomial {
        Monomial::new(self.x1 + other.x1, self.x2 + other.x2, self.t + other.t)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = [("x1", self.x1), ("x2", self.x2), ("t", self.t)]
            .iter()
            .filter(|(_, e)| *e > 0)
            .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("the zero polynomial has no shape")]
    ZeroPolynomial,
    #[error("x1-degree {r} exceeds n = {n}")]
    DegreeExceedsN { r: usize, n: usize },
    #[error("deg c_{index} = {degree} > {index} at monomial {monomial}")]
    CoefficientDegree {
        index: usize,
        degree: u32,
        monomial: Monomial,
    },
    #[error("deg_x1 = {deg_x1} differs from deg_x2 = {deg_x2}")]
    DegreeMismatch { deg_x1: u32, deg_x2: u32 },
    #[error("c_0 is not a nonzero constant (offending monomial {monomial})")]
    LeadingCoefficientNotConstant { monomial: Monomial },
    #[error("divisor has a non-constant leading coefficient in x1")]
    NonConstantDivisorLead,
    #[error("division leaves a nonzero remainder {remainder}")]
    NonzeroRemainder {
        quotient: Box<CorrPoly>,
        remainder: Box<CorrPoly>,
    },
    #[error("affine substitution with zero scale")]
    ZeroScale,
    #[error("polynomials over different towers")]
    MixedTowers,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A polynomial in `x1, x2, t` with no zero coefficients stored.
#[derive(Clone)]
pub struct CorrPoly {
    field: Arc<FieldTower>,
    terms: BTreeMap<Monomial, FieldElement>,
    degs: [u32; 3],
}

/// Coefficient-wise or substitution action for [`CorrPoly::map_coeffs`].
#[derive(Clone, Debug)]
pub enum CoeffAction {
    Sigma,
    Negate,
    SpecializeT(FieldElement),
    /// `x1 ← a1·x1 + b1`, `x2 ← a2·x2 + b2`.
    Affine {
        a1: FieldElement,
        b1: FieldElement,
        a2: FieldElement,
        b2: FieldElement,
    },
}

/// Serialized term: exponents plus a coordinate vector of decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub e1: u32,
    pub e2: u32,
    pub et: u32,
    pub coeff: Vec<String>,
}

impl CorrPoly {
    fn from_map(field: Arc<FieldTower>, mut terms: BTreeMap<Monomial, FieldElement>) -> Self {
        terms.retain(|_, c| !c.is_zero());
        let degs = terms.keys().fold([0u32; 3], |d, m| {
            [d[0].max(m.x1), d[1].max(m.x2), d[2].max(m.t)]
        });
        CorrPoly { field, terms, degs }
    }

    pub fn zero(field: &Arc<FieldTower>) -> Self {
        Self::from_map(field.clone(), BTreeMap::new())
    }

    pub fn constant(c: FieldElement) -> Self {
        Self::term(c, Monomial::ONE)
    }

    pub fn from_int(field: &Arc<FieldTower>, c: i64) -> Self {
        Self::constant(FieldElement::from_int(field, c))
    }

    pub fn term(c: FieldElement, m: Monomial) -> Self {
        let field = c.field().clone();
        Self::from_map(field, BTreeMap::from([(m, c)]))
    }

    pub fn monomial(field: &Arc<FieldTower>, x1: u32, x2: u32, t: u32) -> Self {
        Self::term(FieldElement::one(field), Monomial::new(x1, x2, t))
    }

    pub fn x1(field: &Arc<FieldTower>) -> Self {
        Self::monomial(field, 1, 0, 0)
    }

    pub fn x2(field: &Arc<FieldTower>) -> Self {
        Self::monomial(field, 0, 1, 0)
    }

    pub fn t(field: &Arc<FieldTower>) -> Self {
        Self::monomial(field, 0, 0, 1)
    }

    /// Sums `(coefficient, monomial)` pairs; repeated monomials accumulate.
    pub fn from_terms(
        field: &Arc<FieldTower>,
        terms: impl IntoIterator<Item = (Monomial, FieldElement)>,
    ) -> Self {
        let mut map: BTreeMap<Monomial, FieldElement> = BTreeMap::new();
        for (m, c) in terms {
            assert!(same_tower(c.field(), field), "coefficient outside the tower");
            match map.get_mut(&m) {
                Some(acc) => *acc = &*acc + &c,
                None => {
                    map.insert(m, c);
                }
            }
        }
        Self::from_map(field.clone(), map)
    }

    /// Univariate polynomial in `x1` from field coefficients, constant first.
    pub fn univariate_x1(field: &Arc<FieldTower>, coeffs: &[FieldElement]) -> Self {
        Self::from_terms(
            field,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (Monomial::new(i as u32, 0, 0), c.clone())),
        )
    }

    pub fn from_serialized(field: &Arc<FieldTower>, terms: &[PolyTerm]) -> Result<Self, PolyError> {
        let parsed = terms
            .iter()
            .map(|t| {
                Ok((
                    Monomial::new(t.e1, t.e2, t.et),
                    FieldElement::from_strings(field, &t.coeff)?,
                ))
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Ok(Self::from_terms(field, parsed))
    }

    pub fn to_serialized(&self) -> Vec<PolyTerm> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| PolyTerm {
                e1: m.x1,
                e2: m.x2,
                et: m.t,
                coeff: c.coord_strings(),
            })
            .collect()
    }

    pub fn field(&self) -> &Arc<FieldTower> {
        &self.field
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &FieldElement)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> FieldElement {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| FieldElement::zero(&self.field))
    }

    pub fn deg_x1(&self) -> u32 {
        self.degs[0]
    }

    pub fn deg_x2(&self) -> u32 {
        self.degs[1]
    }

    pub fn deg_t(&self) -> u32 {
        self.degs[2]
    }

    /// Largest `x1 + x2` exponent over all terms.
    pub fn total_x_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.x1 + m.x2).max().unwrap_or(0)
    }

    /// `Some(c)` when the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<FieldElement> {
        match self.terms.len() {
            0 => Some(FieldElement::zero(&self.field)),
            1 => self.terms.get(&Monomial::ONE).cloned(),
            _ => None,
        }
    }

    /// Coefficient of `x1^k` as a polynomial in `x2, t`.
    pub fn coeff_x1(&self, k: u32) -> CorrPoly {
        Self::from_map(
            self.field.clone(),
            self.terms
                .iter()
                .filter(|(m, _)| m.x1 == k)
                .map(|(m, c)| (Monomial::new(0, m.x2, m.t), c.clone()))
                .collect(),
        )
    }

    /// Coefficient of `x2^k` as a polynomial in `x1, t`.
    pub fn coeff_x2(&self, k: u32) -> CorrPoly {
        Self::from_map(
            self.field.clone(),
            self.terms
                .iter()
                .filter(|(m, _)| m.x2 == k)
                .map(|(m, c)| (Monomial::new(m.x1, 0, m.t), c.clone()))
                .collect(),
        )
    }

    /// Coefficient of `t^k` as a polynomial in `x1, x2`.
    pub fn coeff_t(&self, k: u32) -> CorrPoly {
        Self::from_map(
            self.field.clone(),
            self.terms
                .iter()
                .filter(|(m, _)| m.t == k)
                .map(|(m, c)| (Monomial::new(m.x1, m.x2, 0), c.clone()))
                .collect(),
        )
    }

    pub fn involves_t(&self) -> bool {
        self.degs[2] > 0
    }

    pub fn scale(&self, c: &FieldElement) -> CorrPoly {
        Self::from_map(
            self.field.clone(),
            self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        )
    }

    pub fn scale_rational(&self, c: &BigRational) -> CorrPoly {
        Self::from_map(
            self.field.clone(),
            self.terms.iter().map(|(m, v)| (*m, v.scale(c))).collect(),
        )
    }

    pub fn pow(&self, mut k: u32) -> CorrPoly {
        let mut base = self.clone();
        let mut acc = CorrPoly::from_int(&self.field, 1);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn map_terms(&self, f: impl Fn(&Monomial, &FieldElement) -> (Monomial, FieldElement)) -> CorrPoly {
        Self::from_terms(&self.field, self.terms.iter().map(|(m, c)| f(m, c)))
    }

    /// Swaps `x1` and `x2`.
    pub fn tau(&self) -> CorrPoly {
        self.map_terms(|m, c| (Monomial::new(m.x2, m.x1, m.t), c.clone()))
    }

    pub fn sigma(&self) -> CorrPoly {
        self.map_terms(|m, c| (*m, c.sigma()))
    }

    /// Substitutes `t = c`.
    pub fn specialize_t(&self, c: &FieldElement) -> CorrPoly {
        let mut powers = vec![FieldElement::one(&self.field)];
        for _ in 0..self.degs[2] {
            let next = powers.last().expect("nonempty") * c;
            powers.push(next);
        }
        self.map_terms(|m, v| (Monomial::new(m.x1, m.x2, 0), v * &powers[m.t as usize]))
    }

    /// Image of every coefficient under a field embedding.
    pub fn embed(&self, emb: &FieldEmbedding) -> CorrPoly {
        Self::from_terms(
            emb.target(),
            self.terms.iter().map(|(m, c)| (*m, emb.apply(c))),
        )
    }

    pub fn map_coeffs(&self, action: &CoeffAction) -> Result<CorrPoly, PolyError> {
        match action {
            CoeffAction::Sigma => Ok(self.sigma()),
            CoeffAction::Negate => Ok(-self),
            CoeffAction::SpecializeT(c) => {
                c.check_same(&FieldElement::zero(&self.field))?;
                Ok(self.specialize_t(c))
            }
            CoeffAction::Affine { a1, b1, a2, b2 } => {
                if a1.is_zero() || a2.is_zero() {
                    return Err(PolyError::ZeroScale);
                }
                for c in [a1, b1, a2, b2] {
                    c.check_same(&FieldElement::zero(&self.field))?;
                }
                Ok(self.affine(a1, b1, a2, b2))
            }
        }
    }

    fn affine(&self, a1: &FieldElement, b1: &FieldElement, a2: &FieldElement, b2: &FieldElement) -> CorrPoly {
        let lin1 = &CorrPoly::x1(&self.field).scale(a1) + &CorrPoly::constant(b1.clone());
        let lin2 = &CorrPoly::x2(&self.field).scale(a2) + &CorrPoly::constant(b2.clone());
        let powers = |lin: &CorrPoly, deg: u32| {
            let mut v = vec![CorrPoly::from_int(&self.field, 1)];
            for _ in 0..deg {
                let next = v.last().expect("nonempty") * lin;
                v.push(next);
            }
            v
        };
        let p1 = powers(&lin1, self.degs[0]);
        let p2 = powers(&lin2, self.degs[1]);
        let mut acc = CorrPoly::zero(&self.field);
        for (m, c) in &self.terms {
            let t = CorrPoly::term(c.clone(), Monomial::new(0, 0, m.t));
            acc = &acc + &(&(&p1[m.x1 as usize] * &p2[m.x2 as usize]) * &t);
        }
        acc
    }

    /// Validates the correspondence shape `A = Σ c_i(x2) x1^{r−i}` with
    /// `deg c_i ≤ i`, `c_0` a nonzero constant and `deg_x2 A = r`.
    pub fn shape_check(&self, n: usize) -> Result<usize, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let r = self.deg_x1();
        if r as usize > n {
            return Err(PolyError::DegreeExceedsN { r: r as usize, n });
        }
        for m in self.terms.keys() {
            if m.x1 + m.x2 > r {
                return Err(PolyError::CoefficientDegree {
                    index: (r - m.x1) as usize,
                    degree: m.x2,
                    monomial: *m,
                });
            }
        }
        if self.deg_x2() != r {
            return Err(PolyError::DegreeMismatch {
                deg_x1: r,
                deg_x2: self.deg_x2(),
            });
        }
        if let Some(m) = self.terms.keys().find(|m| m.x1 == r && *m != &Monomial::new(r, 0, 0)) {
            return Err(PolyError::LeadingCoefficientNotConstant { monomial: *m });
        }
        Ok(r as usize)
    }

    /// Exact division by `divisor`, univariate in `x1` over `K[x2, t]`.
    pub fn exact_divide(&self, divisor: &CorrPoly) -> Result<CorrPoly, PolyError> {
        if !same_tower(&self.field, &divisor.field) {
            return Err(PolyError::MixedTowers);
        }
        let r = divisor.deg_x1();
        let lead = divisor
            .coeff_x1(r)
            .as_constant()
            .filter(|c| !c.is_zero())
            .ok_or(PolyError::NonConstantDivisorLead)?;
        let lead_inv = lead.inv()?;
        let mut rem = self.clone();
        let mut quotient = CorrPoly::zero(&self.field);
        while !rem.is_zero() && rem.deg_x1() >= r {
            let k = rem.deg_x1();
            let step = Self::from_map(
                self.field.clone(),
                rem.terms
                    .iter()
                    .filter(|(m, _)| m.x1 == k)
                    .map(|(m, c)| (Monomial::new(k - r, m.x2, m.t), c * &lead_inv))
                    .collect(),
            );
            rem = &rem - &(&step * divisor);
            quotient = &quotient + &step;
        }
        if rem.is_zero() {
            Ok(quotient)
        } else {
            Err(PolyError::NonzeroRemainder {
                quotient: Box::new(quotient),
                remainder: Box::new(rem),
            })
        }
    }

    fn assert_same(&self, other: &CorrPoly) {
        assert!(same_tower(&self.field, &other.field), "polynomials over different towers");
    }
}

impl PartialEq for CorrPoly {
    fn eq(&self, other: &Self) -> bool {
        same_tower(&self.field, &other.field) && self.terms == other.terms
    }
}

impl Eq for CorrPoly {}

impl fmt::Debug for CorrPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CorrPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let (negative, coeff) = match c.to_rational() {
                Some(q) => {
                    let neg = q < BigRational::from_integer(0.into());
                    let mag = if neg { -q } else { q };
                    (neg, crate::rational::format_rational(&mag))
                }
                None => (false, format!("({c})")),
            };
            let sep = match (i, negative) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            write!(f, "{sep}")?;
            let unit = coeff == "1";
            match (*m == Monomial::ONE, unit) {
                (true, _) => write!(f, "{coeff}")?,
                (false, true) => write!(f, "{m}")?,
                (false, false) => write!(f, "{coeff}*{m}")?,
            }
        }
        Ok(())
    }
}

impl Add for &CorrPoly {
    type Output = CorrPoly;
    fn add(self, rhs: &CorrPoly) -> CorrPoly {
        self.assert_same(rhs);
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            match terms.get_mut(m) {
                Some(acc) => *acc = &*acc + c,
                None => {
                    terms.insert(*m, c.clone());
                }
            }
        }
        CorrPoly::from_map(self.field.clone(), terms)
    }
}

impl Neg for &CorrPoly {
    type Output = CorrPoly;
    fn neg(self) -> CorrPoly {
        CorrPoly::from_map(
            self.field.clone(),
            self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        )
    }
}

impl Neg for CorrPoly {
    type Output = CorrPoly;
    fn neg(self) -> CorrPoly {
        -&self
    }
}

impl Sub for &CorrPoly {
    type Output = CorrPoly;
    fn sub(self, rhs: &CorrPoly) -> CorrPoly {
        self + &(-rhs)
    }
}

impl Mul for &CorrPoly {
    type Output = CorrPoly;
    fn mul(self, rhs: &CorrPoly) -> CorrPoly {
        self.assert_same(rhs);
        let mut terms: BTreeMap<Monomial, FieldElement> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let prod = ca * cb;
                let m = ma.times(*mb);
                match terms.get_mut(&m) {
                    Some(acc) => *acc = &*acc + &prod,
                    None => {
                        terms.insert(m, prod);
                    }
                }
            }
        }
        CorrPoly::from_map(self.field.clone(), terms)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CorrPoly {
            type Output = CorrPoly;
            fn $m(self, rhs: CorrPoly) -> CorrPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CorrPoly> for CorrPoly {
            type Output = CorrPoly;
            fn $m(self, rhs: &CorrPoly) -> CorrPoly {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::StepPoly;

    fn q() -> Arc<FieldTower> {
        FieldTower::rationals()
    }

    fn q7() -> Arc<FieldTower> {
        FieldTower::with_names(vec![StepPoly::rational(&[2, 1, 1])], vec!["a".into()], true).unwrap()
    }

    #[test]
    fn shape_of_linear_correspondence() {
        let k = q();
        let a = &CorrPoly::x1(&k) - &CorrPoly::x2(&k);
        assert_eq!(a.shape_check(7), Ok(1));
        assert_eq!(a.tau(), -&a);
    }

    #[test]
    fn shape_violation_reports_monomial() {
        let k = q();
        let a = &CorrPoly::monomial(&k, 2, 3, 0) - &CorrPoly::from_int(&k, 1);
        match a.shape_check(7) {
            Err(PolyError::CoefficientDegree { degree, monomial, .. }) => {
                assert_eq!(degree, 3);
                assert_eq!(monomial, Monomial::new(2, 3, 0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shape_rejects_t_in_leading_coefficient() {
        let k = q();
        let a = &(&CorrPoly::monomial(&k, 1, 0, 1) + &CorrPoly::x1(&k)) - &CorrPoly::x2(&k);
        assert!(matches!(
            a.shape_check(3),
            Err(PolyError::LeadingCoefficientNotConstant { .. })
        ));
    }

    #[test]
    fn exact_division_and_remainder() {
        let k = q();
        let (x1, x2) = (CorrPoly::x1(&k), CorrPoly::x2(&k));
        let f = &(&x1 - &x2) * &(&x1 + &x2);
        assert_eq!(f.exact_divide(&(&x1 - &x2)).unwrap(), &x1 + &x2);
        let bad = &x1 - &x2.scale(&FieldElement::from_int(&k, 2));
        match f.exact_divide(&bad) {
            Err(PolyError::NonzeroRemainder { remainder, .. }) => {
                assert_eq!(*remainder, CorrPoly::monomial(&k, 0, 2, 0).scale(&FieldElement::from_int(&k, 3)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn affine_identity_and_zero_scale() {
        let k = q7();
        let a = FieldElement::generator(&k, 0);
        let p = &(&CorrPoly::monomial(&k, 2, 1, 0).scale(&a) + &CorrPoly::t(&k)) - &CorrPoly::x2(&k);
        let (one, zero) = (FieldElement::one(&k), FieldElement::zero(&k));
        let id = CoeffAction::Affine { a1: one.clone(), b1: zero.clone(), a2: one.clone(), b2: zero.clone() };
        assert_eq!(p.map_coeffs(&id).unwrap(), p);
        let degenerate = CoeffAction::Affine { a1: zero.clone(), b1: zero.clone(), a2: one, b2: zero };
        assert_eq!(p.map_coeffs(&degenerate).unwrap_err(), PolyError::ZeroScale);
    }

    #[test]
    fn specialization_drops_t() {
        let k = q7();
        let p = &CorrPoly::monomial(&k, 1, 0, 2) + &CorrPoly::x2(&k);
        let s = p.map_coeffs(&CoeffAction::SpecializeT(FieldElement::from_int(&k, 3))).unwrap();
        assert_eq!(s, &CorrPoly::x1(&k).scale(&FieldElement::from_int(&k, 9)) + &CorrPoly::x2(&k));
        assert!(!s.involves_t());
    }

    #[test]
    fn serialization_round_trip() {
        let k = q7();
        let a = FieldElement::generator(&k, 0);
        let p = &CorrPoly::monomial(&k, 3, 0, 0) - &CorrPoly::monomial(&k, 1, 1, 1).scale(&a);
        let back = CorrPoly::from_serialized(&k, &p.to_serialized()).unwrap();
        assert_eq!(back, p);
        assert_eq!(p.to_string(), "x1^3 + (-a)*x1*x2*t");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly(k: Arc<FieldTower>, max_deg: u32) -> impl Strategy<Value = CorrPoly> {
            prop::collection::vec((0..=max_deg, 0..=max_deg, 0..=1u32, -5i64..5, -5i64..5), 1..6).prop_map(
                move |terms| {
                    CorrPoly::from_terms(
                        &k,
                        terms.into_iter().map(|(a, b, t, c0, c1)| {
                            (Monomial::new(a, b, t), FieldElement::from_ints(&k, &[c0, c1]))
                        }),
                    )
                },
            )
        }

        fn arb_shape(k: Arc<FieldTower>) -> impl Strategy<Value = CorrPoly> {
            (1u32..4, arb_poly(k.clone(), 3)).prop_map(move |(r, noise)| {
                // x1^r - x2^r plus lower terms inside the triangle
                let mut p = &CorrPoly::monomial(&k, r, 0, 0) - &CorrPoly::monomial(&k, 0, r, 0);
                for (m, c) in noise.terms() {
                    if m.x1 + m.x2 <= r && m.x1 < r && m.x2 < r {
                        p = &p + &CorrPoly::term(c.clone(), *m);
                    }
                }
                p
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn tau_preserves_shape(a in arb_shape(q7())) {
                let r = a.shape_check(7).unwrap();
                prop_assert_eq!(a.tau().shape_check(7).unwrap(), r);
                prop_assert_eq!(a.tau().tau(), a);
            }

            #[test]
            fn divide_round_trip(a in arb_shape(q7()), b in arb_poly(q7(), 3)) {
                prop_assert_eq!((&a * &b).exact_divide(&a).unwrap(), b);
            }

            #[test]
            fn sigma_twice_is_identity(a in arb_poly(q7(), 3)) {
                prop_assert_eq!(a.sigma().sigma(), a);
            }

            #[test]
            fn affine_inverse(a in arb_poly(q7(), 3), s in 1i64..5, u in -3i64..3) {
                let k = a.field().clone();
                let sc = FieldElement::from_ints(&k, &[s, 1]);
                let sh = FieldElement::from_ints(&k, &[u, -1]);
                let inv = sc.inv().unwrap();
                let fwd = CoeffAction::Affine { a1: sc.clone(), b1: sh.clone(), a2: sc.clone(), b2: sh.clone() };
                let back_shift = -(&sh * &inv);
                let bwd = CoeffAction::Affine { a1: inv.clone(), b1: back_shift.clone(), a2: inv, b2: back_shift };
                prop_assert_eq!(a.map_coeffs(&fwd).unwrap().map_coeffs(&bwd).unwrap(), a);
            }
        }
    }
}
