//! Exact rational helpers: string parsing and formatting, plus small dense
//! linear algebra over Q.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"3"`, `"-7/2"` or a finite decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseRationalError> {
    let s = s.trim();
    let err = || ParseRationalError(s.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            other => BigInt::from_str(other).map_err(|_| err())?,
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part = BigInt::from_str(frac).map_err(|_| err())?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(num, scale));
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| err())
}

/// Canonical decimal-string form: `"p"` or `"p/q"` with `q > 0`.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Determinant of a square rational matrix by Gaussian elimination.
pub fn determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &p;
            for c in col..n {
                let delta = &factor * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    det
}

/// Reduced row echelon form of an augmented system `[A | b]`.
///
/// Returns the pivot column of each nonzero row, or `None` when the system is
/// inconsistent.
pub struct EchelonSystem {
    pub rows: Vec<Vec<BigRational>>,
    pub pivots: Vec<usize>,
    pub unknowns: usize,
}

impl EchelonSystem {
    pub fn solve(mut rows: Vec<Vec<BigRational>>, unknowns: usize) -> Option<EchelonSystem> {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..unknowns {
            let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, p);
            let inv = rows[rank][col].recip();
            for v in rows[rank].iter_mut() {
                *v *= &inv;
            }
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == rank || row[col].is_zero() {
                    continue;
                }
                let factor = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    if !pv.is_zero() {
                        *v -= &factor * pv;
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        // A zero row with a nonzero right-hand side means no solution.
        if rows[rank..].iter().any(|row| !row[unknowns].is_zero()) {
            return None;
        }
        rows.truncate(rank);
        Some(EchelonSystem {
            rows,
            pivots,
            unknowns,
        })
    }

    /// Particular solution with every free variable set to zero.
    pub fn particular(&self) -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); self.unknowns];
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            x[p] = row[self.unknowns].clone();
        }
        x
    }

    /// True when every variable in `vars` takes the same value in all solutions.
    pub fn determines(&self, vars: impl IntoIterator<Item = usize>) -> bool {
        let free: Vec<usize> = (0..self.unknowns)
            .filter(|c| !self.pivots.contains(c))
            .collect();
        vars.into_iter().all(|v| match self.pivots.iter().position(|&p| p == v) {
            None => false,
            Some(r) => free.iter().all(|&f| self.rows[r][f].is_zero()),
        })
    }
}

/// Solves `m x = b` for square invertible `m`; `None` when singular.
pub fn solve_square(m: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = m.len();
    let rows: Vec<Vec<BigRational>> = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let sys = EchelonSystem::solve(rows, n)?;
    if sys.pivots.len() != n {
        return None;
    }
    Some(sys.particular())
}

pub fn is_integral(q: &BigRational) -> bool {
    q.denom().is_one()
}
