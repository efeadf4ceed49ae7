//! Dickson polynomials and the quadratic factors `A_{n,i}` of
//! `D_n(x1, 1) − D_n(x2, 1)` over the real cyclotomic field.

use std::sync::Arc;

use crate::catalog::cyclotomic::real_cyclotomic_field;
use crate::diffrep::{self, PolyMatrix};
use crate::field::{FieldElement, FieldTower};
use crate::poly::{CorrPoly, PolyError};

/// `D_n(x, a)` in `x1` by `D_k = x·D_{k−1} − a·D_{k−2}`, `D_0 = 2`, `D_1 = x`.
pub fn dickson(n: u32, a: &FieldElement) -> CorrPoly {
    let field = a.field();
    let x = CorrPoly::x1(field);
    let mut prev = CorrPoly::from_int(field, 2);
    if n == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for _ in 1..n {
        let next = &(&x * &cur) - &prev.scale(a);
        prev = cur;
        cur = next;
    }
    cur
}

/// `D_i(η, 1) = ζ^i + ζ^{−i}` for `η = ζ + ζ⁻¹`.
pub fn eta_power(eta: &FieldElement, i: u32) -> FieldElement {
    let field = eta.field();
    let (mut prev, mut cur) = (FieldElement::from_int(field, 2), eta.clone());
    if i == 0 {
        return prev;
    }
    for _ in 1..i {
        let next = &(eta * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `A_{n,i} = x1² + x2² − η_i x1 x2 + (η_i² − 4)` with `η_i = ζ^i + ζ^{−i}`.
pub fn dickson_factor_in(field: &Arc<FieldTower>, i: u32) -> CorrPoly {
    let eta = FieldElement::generator(field, 0);
    let ei = eta_power(&eta, i);
    let c = &ei.pow(2) - &FieldElement::from_int(field, 4);
    &(&(&CorrPoly::monomial(field, 2, 0, 0) + &CorrPoly::monomial(field, 0, 2, 0))
        - &CorrPoly::monomial(field, 1, 1, 0).scale(&ei))
        + &CorrPoly::constant(c)
}

pub fn dickson_factor(n: u32, i: u32) -> CorrPoly {
    dickson_factor_in(&real_cyclotomic_field(n), i)
}

/// `(x1 − x2)·Π_i A_{n,i} = D_n(x1, 1) − D_n(x2, 1)` for odd `n`.
pub fn product_identity_holds(n: u32) -> bool {
    let field = real_cyclotomic_field(n);
    let one = FieldElement::one(&field);
    let dn = dickson(n, &one);
    let lhs = (1..=(n - 1) / 2).fold(&CorrPoly::x1(&field) - &CorrPoly::x2(&field), |acc, i| {
        &acc * &dickson_factor_in(&field, i)
    });
    lhs == &dn - &dn.tau()
}

/// Evaluates a rational polynomial (constant first) at a square matrix.
pub fn eval_at_matrix(poly: &[FieldElement], m: &PolyMatrix) -> PolyMatrix {
    let field = m.field();
    let size = m.size();
    poly.iter().rev().fold(PolyMatrix::scalar(field, size, &FieldElement::zero(field)), |acc, c| {
        acc.mul(m).add(&PolyMatrix::scalar(field, size, c))
    })
}

/// `m_i(D(A_{n,i})_{n−1}) = 0` where `m_i` is the minimal polynomial of
/// `ζ^i + ζ^{−i}` over Q.
pub fn annihilated_by_minimal_polynomial(n: u32, i: u32) -> Result<bool, PolyError> {
    let field = real_cyclotomic_field(n);
    let a = dickson_factor_in(&field, i);
    let block = diffrep::differential_block(&a, n as usize)?;
    let eta = FieldElement::generator(&field, 0);
    let mp: Vec<FieldElement> = eta_power(&eta, i)
        .minimal_polynomial()
        .into_iter()
        .map(|c| FieldElement::from_rational(&field, c))
        .collect();
    Ok(eval_at_matrix(&mp, &block.matrix).is_zero())
}
