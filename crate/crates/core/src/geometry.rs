//! Newton-polygon combinatorics for the curves `P_d(y) = f(x)` and the
//! moduli-count checker for the family parameters.

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::field::FieldElement;
use crate::poly::{CorrPoly, Monomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("d and n must be positive (got d = {d}, n = {n})")]
    NonPositive { d: u64, n: u64 },
    #[error("genus of (d = {d}, n = {n}) is zero")]
    GenusZero { d: u64, n: u64 },
    #[error("moduli count needs genus > 1, got {genus}")]
    GenusTooSmall { genus: u64 },
    #[error("slice sizes sum to {sum}, genus is {genus}")]
    Inconsistent { sum: u64, genus: u64 },
}

/// `g_n(d) = ((n−1)(d−1) − (gcd(n, d) − 1)) / 2`.
pub fn genus(d: u64, n: u64) -> u64 {
    if d == 0 || n == 0 {
        return 0;
    }
    ((n - 1) * (d - 1) - (n.gcd(&d) - 1)) / 2
}

/// Integer points `(λ1, λ2)` with positive entries and `dλ1 + nλ2 < dn`.
pub fn interior_points(d: u64, n: u64) -> Vec<(u64, u64)> {
    let mut pts = Vec::new();
    for l2 in 1..d {
        for l1 in 1..n {
            if d * l1 + n * l2 < d * n {
                pts.push((l1, l2));
            }
        }
    }
    pts
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliceProfile {
    pub d: u64,
    pub n: u64,
    #[serde(rename = "B")]
    pub b: u64,
    pub p: Vec<u64>,
    pub genus: u64,
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Slices of the interior points by `λ2 = i`: `B = ⌈(n−1)d/n⌉ − 1` and
/// `p(i) = ⌈(d−i)n/d⌉ − 1`.
pub fn slice_profile(d: u64, n: u64) -> Result<SliceProfile, GeometryError> {
    if d == 0 || n == 0 {
        return Err(GeometryError::NonPositive { d, n });
    }
    let g = genus(d, n);
    if g == 0 {
        return Err(GeometryError::GenusZero { d, n });
    }
    let b = ceil_div((n - 1) * d, n) - 1;
    let p: Vec<u64> = (1..=b).map(|i| ceil_div((d - i) * n, d) - 1).collect();
    let sum: u64 = p.iter().sum();
    if sum != g || p.iter().any(|&s| s == 0 || s >= n) {
        return Err(GeometryError::Inconsistent { sum, genus: g });
    }
    Ok(SliceProfile { d, n, b, p, genus: g })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict", content = "detail")]
pub enum Verdict {
    DModuli,
    DMinus1Moduli,
    HypothesesViolated(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuliReport {
    #[serde(flatten)]
    pub verdict: Verdict,
    /// `f3 / f2`, as a coordinate vector.
    pub kappa: Option<Vec<String>>,
    /// First index `i` with `f_i` involving `t`.
    pub witness: Option<usize>,
}

impl ModuliReport {
    /// Number of moduli for a given `d`, or `None` when hypotheses fail.
    pub fn moduli(&self, d: u64) -> Option<u64> {
        match self.verdict {
            Verdict::DModuli => Some(d),
            Verdict::DMinus1Moduli => Some(d - 1),
            Verdict::HypothesesViolated(_) => None,
        }
    }
}

fn violated(reason: &str) -> ModuliReport {
    ModuliReport {
        verdict: Verdict::HypothesesViolated(reason.to_string()),
        kappa: None,
        witness: None,
    }
}

/// Exact ratio `num / den` when it is a constant of the field.
fn constant_ratio(num: &CorrPoly, den: &CorrPoly) -> Option<FieldElement> {
    let (m, c) = den.terms().next_back()?;
    let kappa = num.coefficient(m).div(c).ok()?;
    (&den.scale(&kappa) == num).then_some(kappa)
}

/// Checks the normalization `f0 = 1, f1 = 0, f2 ≠ 0, f3 = κ f2` of
/// `f = Σ f_i x^{n−i}` (a polynomial in `x1` and `t`) and decides whether
/// the family `P_d(y) = f(x)` has `d` or `d − 1` moduli.
pub fn moduli_count(f: &CorrPoly, n: usize, d: u64) -> Result<ModuliReport, GeometryError> {
    let g = genus(d, n as u64);
    if g <= 1 {
        return Err(GeometryError::GenusTooSmall { genus: g });
    }
    if f.deg_x1() as usize != n || f.deg_x2() != 0 {
        return Ok(violated("f is not univariate of degree n"));
    }
    let coeff = |i: usize| f.coeff_x1((n - i) as u32);
    let f0 = coeff(0);
    if f0 != CorrPoly::term(FieldElement::one(f.field()), Monomial::ONE) {
        return Ok(violated("(i) f0 = 1"));
    }
    if !coeff(1).is_zero() {
        return Ok(violated("(ii) f1 = 0"));
    }
    let f2 = coeff(2);
    if f2.is_zero() {
        return Ok(violated("(iii) f2 != 0"));
    }
    let Some(kappa) = constant_ratio(&coeff(3), &f2) else {
        return Ok(violated("(iv) f3 = kappa f2 with kappa in K"));
    };
    let witness = (2..n).find(|&i| coeff(i).involves_t());
    Ok(ModuliReport {
        verdict: if witness.is_some() {
            Verdict::DModuli
        } else {
            Verdict::DMinus1Moduli
        },
        kappa: Some(kappa.coord_strings()),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldTower;

    #[test]
    fn genus_examples() {
        assert_eq!(genus(2, 7), 3);
        assert_eq!(genus(15, 15), 91);
        assert_eq!(genus(4, 15), 21);
        assert_eq!(interior_points(4, 15).len(), 21);
        assert_eq!(interior_points(2, 3), vec![(1, 1)]);
        assert_eq!(interior_points(2, 7), vec![(1, 1), (2, 1), (3, 1)]);
        assert_eq!(interior_points(6, 9).len(), 19);
    }

    #[test]
    fn slice_examples() {
        let p = slice_profile(2, 7).unwrap();
        assert_eq!((p.b, p.p.clone()), (1, vec![3]));
        let p = slice_profile(3, 7).unwrap();
        assert_eq!((p.b, p.p.clone()), (2, vec![4, 2]));
        assert_eq!(slice_profile(5, 31).unwrap().p.iter().sum::<u64>(), 60);
        assert_eq!(slice_profile(5, 11).unwrap().genus, 20);
        assert_eq!(slice_profile(2, 2), Err(GeometryError::GenusZero { d: 2, n: 2 }));
    }

    #[test]
    fn slices_count_interior_points_by_row() {
        for d in 2..15u64 {
            for n in 2..15u64 {
                let Ok(p) = slice_profile(d, n) else { continue };
                let pts = interior_points(d, n);
                for (i, &size) in p.p.iter().enumerate() {
                    let row = pts.iter().filter(|(_, l2)| *l2 == i as u64 + 1).count();
                    assert_eq!(row as u64, size, "d={d} n={n} i={}", i + 1);
                }
            }
        }
    }

    #[test]
    fn moduli_violations() {
        let k = FieldTower::rationals();
        let x = CorrPoly::x1(&k);
        let f = &(&x.pow(5) + &x.pow(4)) + &x.pow(3);
        let r = moduli_count(&f, 5, 3).unwrap();
        assert_eq!(r.verdict, Verdict::HypothesesViolated("(ii) f1 = 0".into()));
        let f = &x.pow(5) + &x.pow(2);
        assert!(matches!(moduli_count(&f, 5, 3).unwrap().verdict, Verdict::HypothesesViolated(_)));
        assert_eq!(moduli_count(&f, 5, 1), Err(GeometryError::GenusTooSmall { genus: 0 }));
    }

    #[test]
    fn moduli_with_and_without_t() {
        let k = FieldTower::rationals();
        let x = CorrPoly::x1(&k);
        let t = CorrPoly::t(&k);
        let base = &(&x.pow(5) + &x.pow(3).scale(&FieldElement::from_int(&k, 2))) + &x.pow(2);
        let r = moduli_count(&base, 5, 3).unwrap();
        assert_eq!(r.verdict, Verdict::DMinus1Moduli);
        assert_eq!(r.kappa, Some(vec!["1/2".to_string()]));
        let deformed = &base + &(&x * &t);
        let r = moduli_count(&deformed, 5, 3).unwrap();
        assert_eq!((r.verdict, r.witness), (Verdict::DModuli, Some(4)));
    }
}
