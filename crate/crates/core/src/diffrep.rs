//! Representation on differentials of the correspondence cut out by `A`.
//!
//! The power sums `t_j` of the `x1`-roots of `A` are polynomials in `x2` and
//! `t`. The coefficient of `x2^k` in `t_j` is `μ_{j,k}`, and the matrix of
//! these values is the lower-triangular block `D(A)_{n−1}`.

use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::field::{FieldElement, FieldTower};
use crate::geometry::{self, GeometryError, SliceProfile};
use crate::poly::{CorrPoly, PolyError};

/// Power sums `t_1, …, t_{n−1}` of the `x1`-roots of `A`, via the classical
/// recurrence `t_i = −(i c_i + Σ_{j<i} c_j t_{i−j}) / c_0` with `c_i = 0` for
/// `i > r`.
pub fn newton_girard(a: &CorrPoly, n: usize) -> Result<Vec<CorrPoly>, PolyError> {
    let r = a.shape_check(n)?;
    let field = a.field();
    let c: Vec<CorrPoly> = (0..=r).map(|i| a.coeff_x1((r - i) as u32)).collect();
    let c0 = c[0].as_constant().expect("shape check ensures constant c0");
    let neg_inv = -c0.inv()?;
    let mut ts: Vec<CorrPoly> = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let mut acc = if i <= r {
            c[i].scale(&FieldElement::from_int(field, i as i64))
        } else {
            CorrPoly::zero(field)
        };
        for j in 1..i.min(r + 1) {
            acc = &acc + &(&c[j] * &ts[i - j - 1]);
        }
        ts.push(acc.scale(&neg_inv));
    }
    Ok(ts)
}

/// Square matrix of polynomials in `t` (stored as [`CorrPoly`] with zero
/// `x1`, `x2` exponents).
#[derive(Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    field: Arc<FieldTower>,
    rows: Vec<Vec<CorrPoly>>,
}

impl PolyMatrix {
    pub fn new(field: &Arc<FieldTower>, rows: Vec<Vec<CorrPoly>>) -> Self {
        PolyMatrix {
            field: field.clone(),
            rows,
        }
    }

    pub fn identity(field: &Arc<FieldTower>, size: usize) -> Self {
        Self::scalar(field, size, &FieldElement::one(field))
    }

    pub fn scalar(field: &Arc<FieldTower>, size: usize, c: &FieldElement) -> Self {
        let rows = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| {
                        if i == j {
                            CorrPoly::constant(c.clone())
                        } else {
                            CorrPoly::zero(field)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(field, rows)
    }

    pub fn field(&self) -> &Arc<FieldTower> {
        &self.field
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &CorrPoly {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<CorrPoly>] {
        &self.rows
    }

    /// Upper-left `k × k` submatrix.
    pub fn leading(&self, k: usize) -> PolyMatrix {
        Self::new(
            &self.field,
            self.rows[..k].iter().map(|r| r[..k].to_vec()).collect(),
        )
    }

    pub fn map(&self, f: impl Fn(&CorrPoly) -> CorrPoly) -> PolyMatrix {
        Self::new(
            &self.field,
            self.rows.iter().map(|r| r.iter().map(&f).collect()).collect(),
        )
    }

    pub fn sigma(&self) -> PolyMatrix {
        self.map(CorrPoly::sigma)
    }

    pub fn specialize_t(&self, c: &FieldElement) -> Vec<Vec<FieldElement>> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|p| p.specialize_t(c).as_constant().expect("entries are polynomials in t"))
                    .collect()
            })
            .collect()
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        let n = self.size();
        assert_eq!(n, other.size(), "dimension mismatch");
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .filter(|&k| !self.rows[i][k].is_zero() && !other.rows[k][j].is_zero())
                            .fold(CorrPoly::zero(&self.field), |acc, k| {
                                &acc + &(&self.rows[i][k] * &other.rows[k][j])
                            })
                    })
                    .collect()
            })
            .collect();
        Self::new(&self.field, rows)
    }

    pub fn add(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.size(), other.size(), "dimension mismatch");
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Self::new(&self.field, rows)
    }

    pub fn scale(&self, c: &FieldElement) -> PolyMatrix {
        self.map(|p| p.scale(c))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(CorrPoly::is_zero)
    }

    pub fn pow(&self, mut k: u32) -> PolyMatrix {
        let mut base = self.clone();
        let mut acc = Self::identity(&self.field, self.size());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, r)| r[i + 1..].iter().all(CorrPoly::is_zero))
    }

    pub fn diagonal(&self) -> Vec<CorrPoly> {
        (0..self.size()).map(|i| self.rows[i][i].clone()).collect()
    }

    /// `Some(c)` when the matrix is `c·I` identically in `t`.
    pub fn as_scalar(&self) -> Option<FieldElement> {
        let n = self.size();
        let c = if n == 0 {
            return Some(FieldElement::one(&self.field));
        } else {
            self.rows[0][0].as_constant()?
        };
        for (i, r) in self.rows.iter().enumerate() {
            for (j, e) in r.iter().enumerate() {
                let ok = if i == j {
                    e.as_constant().as_ref() == Some(&c)
                } else {
                    e.is_zero()
                };
                if !ok {
                    return None;
                }
            }
        }
        Some(c)
    }

    /// Row-major JSON; each entry maps `t`-exponents to coordinate vectors.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    Value::Array(
                        r.iter()
                            .map(|p| {
                                Value::Array(
                                    p.terms()
                                        .map(|(m, c)| json!({"t": m.t, "coeff": c.coord_strings()}))
                                        .collect(),
                                )
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|p| p.to_string()).collect())
            .collect();
        let n = self.size();
        let widths: Vec<usize> = (0..n)
            .map(|j| cells.iter().map(|r| r[j].chars().count()).max().unwrap_or(1))
            .collect();
        for row in &cells {
            let padded: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}", w = *w))
                .collect();
            writeln!(f, "[ {} ]", padded.join("  "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The block `D(A)_{n−1}`; its leading `k × k` submatrix is `D(A)_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffBlock {
    pub n: usize,
    pub matrix: PolyMatrix,
}

impl DiffBlock {
    pub fn leading(&self, k: usize) -> PolyMatrix {
        self.matrix.leading(k)
    }

    pub fn sigma(&self) -> DiffBlock {
        DiffBlock {
            n: self.n,
            matrix: self.matrix.sigma(),
        }
    }

    pub fn mul(&self, other: &DiffBlock) -> DiffBlock {
        DiffBlock {
            n: self.n,
            matrix: self.matrix.mul(&other.matrix),
        }
    }
}

/// `μ_{i,j}` = coefficient of `x2^j` in `t_i`, for `1 ≤ i, j ≤ n−1`.
pub fn differential_block(a: &CorrPoly, n: usize) -> Result<DiffBlock, PolyError> {
    let ts = newton_girard(a, n)?;
    let field = a.field();
    let rows = ts
        .iter()
        .map(|ti| (1..n).map(|j| ti.coeff_x2(j as u32)).collect())
        .collect();
    let matrix = PolyMatrix::new(field, rows);
    debug_assert!(matrix.is_lower_triangular());
    Ok(DiffBlock { n, matrix })
}

/// Block sizes of the full representation `⊕_i D(A)_{p(i)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPlan {
    pub profile: SliceProfile,
}

impl BlockPlan {
    pub fn sizes(&self) -> &[u64] {
        &self.profile.p
    }

    /// Dense block-diagonal matrix of size `g`.
    pub fn expand(&self, block: &DiffBlock) -> PolyMatrix {
        let field = block.matrix.field();
        let g = self.profile.genus as usize;
        let mut rows = vec![vec![CorrPoly::zero(field); g]; g];
        let mut offset = 0;
        for &size in self.sizes() {
            let size = size as usize;
            for i in 0..size {
                for j in 0..size {
                    rows[offset + i][offset + j] = block.matrix.entry(i, j).clone();
                }
            }
            offset += size;
        }
        PolyMatrix::new(field, rows)
    }
}

pub fn assemble_full(block: &DiffBlock, d: u64) -> Result<BlockPlan, GeometryError> {
    Ok(BlockPlan {
        profile: geometry::slice_profile(d, block.n as u64)?,
    })
}

/// Returns `m` when `D(A)_{n−1} · D(τA)_{n−1} = m·I` with `m` a positive
/// integer, identically in `t`.
pub fn check_split(a: &CorrPoly, n: usize) -> Result<Option<u64>, PolyError> {
    let d = differential_block(a, n)?;
    let dt = differential_block(&a.tau(), n)?;
    Ok(split_factor(&d.matrix.mul(&dt.matrix)))
}

/// Positive integer `m` with `product = m·I`, if any.
pub fn split_factor(product: &PolyMatrix) -> Option<u64> {
    let c = product.as_scalar()?.to_rational()?;
    if c.is_integer() && c > num_rational::BigRational::from_integer(0.into()) {
        c.to_integer().to_u64()
    } else {
        None
    }
}

pub fn is_identity(m: &PolyMatrix) -> bool {
    m.as_scalar().is_some_and(|c| c.is_one())
}
