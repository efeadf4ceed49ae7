//! Cyclotomic fields as CM towers `Q(ζ_n + ζ_n⁻¹) ⊂ Q(ζ_n)` and the
//! cyclotomic correspondences `ζ^i x1 − x2`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::field::{FieldElement, FieldTower, StepPoly};
use crate::poly::CorrPoly;

/// Integer coefficients of `Φ_n`, constant first, by exact division of
/// `x^n − 1` by `Φ_d` for the proper divisors `d` of `n`.
pub fn cyclotomic_poly(n: u32) -> Vec<BigInt> {
    assert!(n >= 1, "n must be positive");
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in (1..n).filter(|d| n % d == 0) {
        num = divide_monic(&num, &cyclotomic_poly(d));
    }
    num
}

fn divide_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![BigInt::zero(); rem.len() - dd];
    for k in (0..q.len()).rev() {
        let c = rem[k + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[k + j] -= &c * dj;
        }
        q[k] = c;
    }
    assert!(rem.iter().all(Zero::is_zero), "inexact cyclotomic division");
    q
}

/// `ψ_n` with `z^{φ(n)/2} ψ_n(z + 1/z) = Φ_n(z)`, the minimal polynomial of
/// `ζ_n + ζ_n⁻¹` (`n ≥ 3`).
pub fn real_cyclotomic_minpoly(n: u32) -> Vec<BigRational> {
    assert!(n >= 3, "real subfield needs n >= 3");
    let phi = cyclotomic_poly(n);
    let h = (phi.len() - 1) / 2;
    // Laurent coefficients of Φ_n(z)/z^h, indexed by exponent + h.
    let mut laurent: Vec<BigInt> = phi;
    let mut psi = vec![BigInt::zero(); h + 1];
    for k in (0..=h).rev() {
        let c = laurent[k + h].clone();
        psi[k] = c.clone();
        // subtract c (z + 1/z)^k = c Σ_j C(k, j) z^{k − 2j}
        let mut binom = BigInt::one();
        for j in 0..=k {
            let idx = k + h - 2 * j;
            laurent[idx] -= &c * &binom;
            binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
        }
    }
    assert!(laurent.iter().all(Zero::is_zero), "Φ_n is not palindromic");
    psi.into_iter().map(BigRational::from_integer).collect()
}

fn step_from(coeffs: &[BigRational]) -> StepPoly {
    StepPoly::new(coeffs.iter().map(|c| vec![c.clone()]).collect())
}

/// `Q(η_n)` with `η_n = ζ_n + ζ_n⁻¹`; σ is the identity.
pub fn real_cyclotomic_field(n: u32) -> Arc<FieldTower> {
    FieldTower::with_names(
        vec![step_from(&real_cyclotomic_minpoly(n))],
        vec![format!("eta{n}")],
        false,
    )
    .expect("ψ_n is monic")
}

/// `Q(ζ_n)` as `[ψ_n(y), z² − y z + 1]`; σ is complex conjugation.
pub fn cyclotomic_field(n: u32) -> Arc<FieldTower> {
    let psi = real_cyclotomic_minpoly(n);
    let lower = psi.len() - 1;
    let mut minus_y = vec![BigRational::zero(); lower.max(2)];
    minus_y[1] = -BigRational::one();
    let top = StepPoly::new(vec![
        vec![BigRational::one()],
        if lower >= 2 {
            minus_y[..lower].to_vec()
        } else {
            // degree-1 ψ pins y to a rational (n = 3, 4, 6)
            vec![psi[0].clone()]
        },
        vec![BigRational::one()],
    ]);
    FieldTower::with_names(
        vec![step_from(&psi), top],
        vec![format!("eta{n}"), format!("zeta{n}")],
        true,
    )
    .expect("cyclotomic tower is well formed")
}

pub fn zeta(field: &Arc<FieldTower>) -> FieldElement {
    FieldElement::top_generator(field)
}

/// `ζ^i x1 − x2` over `Q(ζ_n)`.
pub fn cyclotomic_corr(n: u32, i: u32) -> CorrPoly {
    cyclotomic_corr_in(&cyclotomic_field(n), n, i)
}

pub fn cyclotomic_corr_in(field: &Arc<FieldTower>, n: u32, i: u32) -> CorrPoly {
    let z = zeta(field).pow(i % n);
    &CorrPoly::x1(field).scale(&z) - &CorrPoly::x2(field)
}

/// Euler totient.
pub fn totient(n: u32) -> u32 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u32
}
