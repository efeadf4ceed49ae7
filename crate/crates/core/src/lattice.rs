//! Integer Smith reduction, finite abelian groups, and the kernel groups
//! `G(A, k)` obtained from the regular representation of `D(A)_k ⊕ σD(A)_k`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::diffrep::{self, DiffBlock};
use crate::field::{FieldElement, FieldError};
use crate::geometry::{self, GeometryError, SliceProfile};
use crate::poly::{CorrPoly, PolyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("entry ({row}, {col}) of D(A) at t = {t} is not integral (denominators {denominators:?}); try another t")]
    NonIntegral {
        row: usize,
        col: usize,
        t: i64,
        denominators: Vec<String>,
    },
    #[error("G(A, {k}) is infinite (rank-deficient matrix)")]
    InfiniteCokernel { k: usize },
    #[error("invariant factor {0} does not fit in 64 bits")]
    DivisorTooLarge(String),
    #[error("no {e}-th root: Z/{prime}^{exponent} occurs {multiplicity} times")]
    NoRoot {
        e: usize,
        prime: u64,
        exponent: u32,
        multiplicity: usize,
    },
    #[error("kernel routes disagree: cokernel route gives {algorithm}, splitting route gives {lemma}")]
    Mismatch { algorithm: String, lemma: String },
}

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        self.data.chunks(self.cols.max(1)).map(<[BigInt]>::to_vec).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &IntMatrix) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }
}

/// Smith-form diagonal `d_1 | d_2 | …` of length `min(rows, cols)`, zeros last.
pub fn smith_divisors(m: &IntMatrix) -> Vec<BigInt> {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.to_rows();
    if cols == 0 {
        a = vec![Vec::new(); rows];
    }
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = min_entry(&a, t..rows, t..cols) else {
            break;
        };
        a.swap(t, pi);
        swap_cols(&mut a, t, pj, t);
        loop {
            let pivot = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&pivot);
                let (head, tail) = a.split_at_mut(i);
                for (x, p) in tail[0][t..].iter_mut().zip(&head[t][t..]) {
                    if !p.is_zero() {
                        *x -= &q * p;
                    }
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&pivot);
                for row in a[t..].iter_mut() {
                    if !row[t].is_zero() {
                        let delta = &q * &row[t];
                        row[j] -= delta;
                    }
                }
                clean &= a[t][j].is_zero();
            }
            if clean {
                break;
            }
            // Move the smallest remaining entry of row/column t to the pivot.
            let (pi, pj) = min_entry(&a, t..rows, t..t + 1)
                .into_iter()
                .chain(min_entry(&a, t..t + 1, t..cols))
                .min_by(|x, y| a[x.0][x.1].abs().cmp(&a[y.0][y.1].abs()))
                .expect("pivot row or column is nonzero");
            a.swap(t, pi);
            swap_cols(&mut a, t, pj, t);
        }
        diag.push(a[t][t].abs());
    }
    invariant_chain(diag, rows.min(cols))
}

fn min_entry(
    a: &[Vec<BigInt>],
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in rows {
        for j in cols.clone() {
            let v = &a[i][j];
            if v.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| v.abs() < a[bi][bj].abs()) {
                best = Some((i, j));
                if v.abs().is_one() {
                    return best;
                }
            }
        }
    }
    best
}

fn swap_cols(a: &mut [Vec<BigInt>], x: usize, y: usize, from_row: usize) {
    if x != y {
        for row in a[from_row..].iter_mut() {
            row.swap(x, y);
        }
    }
}

/// Turns a diagonal into a divisibility chain by `gcd`/`lcm` exchanges.
fn invariant_chain(mut diag: Vec<BigInt>, len: usize) -> Vec<BigInt> {
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            let g = diag[i].gcd(&diag[j]);
            if g != diag[i] {
                let l = diag[i].lcm(&diag[j]);
                diag[i] = g;
                diag[j] = l;
            }
        }
    }
    diag.resize(len, BigInt::zero());
    diag
}

/// Finite abelian group stored by its primary decomposition:
/// prime → exponents of the cyclic `Z/p^a` factors, largest first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AbelianGroup {
    primary: BTreeMap<u64, Vec<u32>>,
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut a = 0;
            while n % p == 0 {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        Self::default()
    }

    /// `Π Z/d_i`; divisors need not form a chain. Zero means infinite.
    pub fn from_divisors(divisors: &[u64]) -> Option<Self> {
        let mut primary: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for &d in divisors {
            if d == 0 {
                return None;
            }
            for (p, a) in factor(d) {
                primary.entry(p).or_default().push(a);
            }
        }
        for v in primary.values_mut() {
            v.sort_unstable_by(|a, b| b.cmp(a));
        }
        Some(AbelianGroup { primary })
    }

    pub fn cyclic_power(m: u64, count: usize) -> Self {
        Self::from_divisors(&vec![m; count]).expect("m > 0")
    }

    fn from_bigints(divisors: &[BigInt]) -> Result<Option<Self>, KernelError> {
        let small = divisors
            .iter()
            .map(|d| d.to_u64().ok_or_else(|| KernelError::DivisorTooLarge(d.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_divisors(&small))
    }

    pub fn primary(&self) -> &BTreeMap<u64, Vec<u32>> {
        &self.primary
    }

    pub fn is_trivial(&self) -> bool {
        self.primary.is_empty()
    }

    /// Invariant factors `d_1 | d_2 | … | d_r`, all greater than one.
    pub fn invariant_factors(&self) -> Vec<u64> {
        let r = self.primary.values().map(Vec::len).max().unwrap_or(0);
        let mut out = vec![1u64; r];
        for (p, exps) in &self.primary {
            for (i, a) in exps.iter().enumerate() {
                out[r - 1 - i] *= p.pow(*a);
            }
        }
        out
    }

    /// Prime-power cyclic factors, largest first.
    pub fn elementary_divisors(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self
            .primary
            .iter()
            .flat_map(|(p, exps)| exps.iter().map(move |a| p.pow(*a)))
            .collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn order(&self) -> BigInt {
        self.elementary_divisors()
            .iter()
            .fold(BigInt::one(), |acc, &d| acc * d)
    }

    pub fn exponent(&self) -> u64 {
        self.primary
            .iter()
            .map(|(p, e)| p.pow(e.first().copied().unwrap_or(0)))
            .product()
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let mut primary = self.primary.clone();
        for (p, exps) in &other.primary {
            let v = primary.entry(*p).or_default();
            v.extend(exps);
            v.sort_unstable_by(|a, b| b.cmp(a));
        }
        AbelianGroup { primary }
    }

    /// `G^e`.
    pub fn power(&self, e: usize) -> AbelianGroup {
        (0..e).fold(AbelianGroup::trivial(), |acc, _| acc.direct_sum(self))
    }

    /// The unique `H` with `H^e ≅ G`.
    pub fn root(&self, e: usize) -> Result<AbelianGroup, KernelError> {
        assert!(e > 0, "root index must be positive");
        let mut primary = BTreeMap::new();
        for (p, exps) in &self.primary {
            let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
            for a in exps {
                *counts.entry(*a).or_default() += 1;
            }
            let mut root = Vec::new();
            for (a, c) in counts.iter().rev() {
                if c % e != 0 {
                    return Err(KernelError::NoRoot {
                        e,
                        prime: *p,
                        exponent: *a,
                        multiplicity: *c,
                    });
                }
                root.extend(std::iter::repeat_n(*a, c / e));
            }
            primary.insert(*p, root);
        }
        Ok(AbelianGroup { primary })
    }
}

pub fn group_root(g: &AbelianGroup, e: usize) -> Result<AbelianGroup, KernelError> {
    g.root(e)
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let divs = self.elementary_divisors();
        if divs.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < divs.len() {
            let j = divs[i..].iter().take_while(|&&d| d == divs[i]).count();
            parts.push(if j == 1 {
                format!("Z/{}", divs[i])
            } else {
                format!("(Z/{})^{j}", divs[i])
            });
            i += j;
        }
        write!(f, "{}", parts.join(" x "))
    }
}

impl Serialize for AbelianGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AbelianGroup", 3)?;
        st.serialize_field("structure", &self.to_string())?;
        st.serialize_field("invariant_factors", &self.invariant_factors())?;
        st.serialize_field("order", &self.order().to_string())?;
        st.end()
    }
}

/// `D(A)_{n−1}` at `t = t_value` with every entry checked integral.
pub struct SpecializedBlock {
    pub t: i64,
    entries: Vec<Vec<FieldElement>>,
    rho: Vec<Vec<Option<Vec<Vec<BigInt>>>>>,
    rho_sigma: Vec<Vec<Option<Vec<Vec<BigInt>>>>>,
}

impl SpecializedBlock {
    pub fn new(block: &DiffBlock, t: i64) -> Result<Self, KernelError> {
        let field = block.matrix.field();
        let entries = block.matrix.specialize_t(&FieldElement::from_int(field, t));
        let rep = |x: &FieldElement, i: usize, j: usize| -> Result<Option<Vec<Vec<BigInt>>>, KernelError> {
            if x.is_zero() {
                return Ok(None);
            }
            x.regular_rep().map(Some).map_err(|e| match e {
                FieldError::NonIntegral { denominators } => KernelError::NonIntegral {
                    row: i + 1,
                    col: j + 1,
                    t,
                    denominators,
                },
                other => other.into(),
            })
        };
        let mut rho = Vec::new();
        let mut rho_sigma = Vec::new();
        for (i, row) in entries.iter().enumerate() {
            let mut r = Vec::new();
            let mut rs = Vec::new();
            for (j, x) in row.iter().enumerate() {
                r.push(rep(x, i, j)?);
                rs.push(rep(&x.sigma(), i, j)?);
            }
            rho.push(r);
            rho_sigma.push(rs);
        }
        Ok(SpecializedBlock {
            t,
            entries,
            rho,
            rho_sigma,
        })
    }

    pub fn degree(&self) -> usize {
        self.entries
            .first()
            .and_then(|r| r.first())
            .map_or(1, |x| x.field().degree())
    }

    /// `ρ⋆(D_k)`: the `ek × ek` integer matrix of `x ↦ D_k x` on `O^k`, in
    /// row-vector convention (block `(j, i)` holds `ρ(D_ij)`).
    fn rho_star(&self, k: usize, sigma: bool) -> IntMatrix {
        let e = self.degree();
        let src = if sigma { &self.rho_sigma } else { &self.rho };
        let mut m = IntMatrix::zeros(e * k, e * k);
        for i in 0..k {
            for j in 0..k {
                let Some(r) = &src[i][j] else { continue };
                for (a, row) in r.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        if !v.is_zero() {
                            m.set(j * e + a, i * e + b, v.clone());
                        }
                    }
                }
            }
        }
        m
    }

    /// `M = ρ⋆(D_k) ⊕ ρ⋆(σD_k)`.
    pub fn kernel_matrix(&self, k: usize) -> IntMatrix {
        self.rho_star(k, false).direct_sum(&self.rho_star(k, true))
    }

    /// `G(A, k)`, the cokernel of [`Self::kernel_matrix`].
    pub fn group(&self, k: usize) -> Result<AbelianGroup, KernelError> {
        // The cokernel of a direct sum is the sum of cokernels.
        let top = smith_divisors(&self.rho_star(k, false));
        let bottom = smith_divisors(&self.rho_star(k, true));
        let g = |d: Vec<BigInt>| -> Result<AbelianGroup, KernelError> {
            AbelianGroup::from_bigints(&d)?.ok_or(KernelError::InfiniteCokernel { k })
        };
        Ok(g(top)?.direct_sum(&g(bottom)?))
    }

    /// `|N_{K/Q}(det D_k)|²`.
    pub fn norm_squared_det(&self, k: usize) -> BigInt {
        let field = self.entries[0][0].field();
        let det = (0..k).fold(FieldElement::one(field), |acc, i| &acc * &self.entries[i][i]);
        let n = det.norm();
        assert!(n.is_integer(), "norm of an integral element");
        let n = n.to_integer().abs();
        &n * &n
    }
}

/// `G(A, k)` for every `k` in `ks`, computed in parallel.
pub fn gak_for(
    block: &DiffBlock,
    t: i64,
    ks: &[usize],
) -> Result<BTreeMap<usize, AbelianGroup>, KernelError> {
    let spec = SpecializedBlock::new(block, t)?;
    ks.par_iter()
        .map(|&k| spec.group(k).map(|g| (k, g)))
        .collect()
}

/// `G(A, 1), …, G(A, n−1)`.
pub fn gak(a: &CorrPoly, n: usize, t: i64) -> Result<Vec<AbelianGroup>, KernelError> {
    let block = diffrep::differential_block(a, n)?;
    let ks: Vec<usize> = (1..n).collect();
    Ok(gak_for(&block, t, &ks)?.into_values().collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelResult {
    pub group: AbelianGroup,
    /// `(k, G(A, k))` for the distinct slice sizes.
    pub slices: Vec<(usize, AbelianGroup)>,
    /// `(Z/m)^g` when `m` is squarefree.
    pub lemma_group: Option<AbelianGroup>,
}

pub fn is_squarefree(m: u64) -> bool {
    factor(m).iter().all(|&(_, a)| a == 1)
}

/// `(⊕_i G(A, p(i)))^{1/e}` compared against `(Z/m)^g` when `m` is squarefree.
pub fn kernel_from_groups(
    profile: &SliceProfile,
    groups: &BTreeMap<usize, AbelianGroup>,
    e: usize,
    m: Option<u64>,
) -> Result<KernelResult, KernelError> {
    let sum = profile.p.iter().fold(AbelianGroup::trivial(), |acc, &k| {
        acc.direct_sum(&groups[&(k as usize)])
    });
    let group = sum.root(e)?;
    let lemma_group = m
        .filter(|&m| is_squarefree(m))
        .map(|m| AbelianGroup::cyclic_power(m, profile.genus as usize));
    if let Some(lemma) = &lemma_group {
        if *lemma != group {
            return Err(KernelError::Mismatch {
                algorithm: group.to_string(),
                lemma: lemma.to_string(),
            });
        }
    }
    let mut ks: Vec<usize> = profile.p.iter().map(|&k| k as usize).collect();
    ks.sort_unstable();
    ks.dedup();
    Ok(KernelResult {
        group,
        slices: ks.into_iter().map(|k| (k, groups[&k].clone())).collect(),
        lemma_group,
    })
}

/// Kernel of the isogeny on `Jac X` for the curve degree `d`.
pub fn kernel_structure(a: &CorrPoly, d: u64, n: usize, t: i64) -> Result<KernelResult, KernelError> {
    let profile = geometry::slice_profile(d, n as u64)?;
    let block = diffrep::differential_block(a, n)?;
    let m = diffrep::check_split(a, n)?;
    let mut ks: Vec<usize> = profile.p.iter().map(|&k| k as usize).collect();
    ks.sort_unstable();
    ks.dedup();
    let groups = gak_for(&block, t, &ks)?;
    kernel_from_groups(&profile, &groups, a.field().degree(), m)
}
