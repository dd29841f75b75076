//! Exact rational fitting of `sum_i p_i(n) * i^n` closed forms.

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A closed form `sum_{i=1..l} p_i(n) * i^n` with rational polynomials `p_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeedForm {
    /// `polys[i]` holds the ascending coefficients of `p_{i+1}`.
    pub polys: Vec<Vec<BigRational>>,
    /// First `n` from which the form is claimed (and checked) to be exact.
    pub valid_from: usize,
    /// Points used for solving and for verification.
    pub fitted_on: Vec<usize>,
    pub verified_on: Vec<usize>,
}

impl SpeedForm {
    pub fn bases(&self) -> usize {
        self.polys.len()
    }

    /// Degree of `p_base`, or `None` for the zero polynomial.
    pub fn degree(&self, base: usize) -> Option<usize> {
        let p = &self.polys[base - 1];
        p.iter().rposition(|c| !c.is_zero())
    }

    pub fn poly(&self, base: usize) -> &[BigRational] {
        &self.polys[base - 1]
    }

    pub fn eval(&self, n: usize) -> BigRational {
        let mut total = BigRational::zero();
        for (i, p) in self.polys.iter().enumerate() {
            let base = BigRational::from_integer(BigInt::from(i + 1).pow(n as u32));
            total += eval_poly(p, n) * base;
        }
        total
    }
}

pub fn eval_poly(p: &[BigRational], n: usize) -> BigRational {
    let x = BigRational::from_integer(BigInt::from(n));
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * &x + c)
}

pub fn format_poly(p: &[BigRational]) -> String {
    let mut terms = Vec::new();
    for (d, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let coef = if c.is_integer() { c.numer().to_string() } else { format!("({c})") };
        terms.push(match d {
            0 => coef,
            1 => format!("{coef}*n"),
            _ => format!("{coef}*n^{d}"),
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

impl fmt::Display for SpeedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .polys
            .iter()
            .enumerate()
            .filter(|(_, p)| p.iter().any(|c| !c.is_zero()))
            .map(|(i, p)| format!("[{}]*{}^n", format_poly(p), i + 1))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Fits `sum_i p_i(n) i^n` with `deg p_i <= degrees[i-1]` to `values` on the
/// window, solving on the first points and verifying exactly on the rest.
pub fn fit(
    degrees: &[usize],
    window: RangeInclusive<usize>,
    valid_from: usize,
    value: impl Fn(usize) -> Result<BigUint>,
) -> Result<SpeedForm> {
    let columns: Vec<(usize, usize)> = degrees
        .iter()
        .enumerate()
        .flat_map(|(i, &deg)| (0..=deg).map(move |d| (i + 1, d)))
        .collect();
    let points: Vec<usize> = window.filter(|&n| n >= valid_from).collect();
    let unknowns = columns.len();
    if points.len() <= unknowns {
        return Err(Error::FitFailed(format!(
            "{} usable points for {unknowns} unknowns; need at least one held-out point",
            points.len()
        )));
    }
    let (solve_on, check_on) = points.split_at(unknowns);
    let mut rows = Vec::with_capacity(unknowns);
    for &n in solve_on {
        let mut row: Vec<BigRational> = columns
            .iter()
            .map(|&(base, d)| {
                BigRational::from_integer(BigInt::from(n).pow(d as u32) * BigInt::from(base).pow(n as u32))
            })
            .collect();
        row.push(BigRational::from_integer(BigInt::from(value(n)?)));
        rows.push(row);
    }
    let solution = solve(rows).ok_or_else(|| Error::FitFailed("singular system".into()))?;
    let mut polys: Vec<Vec<BigRational>> =
        degrees.iter().map(|&d| vec![BigRational::zero(); d + 1]).collect();
    for (&(base, d), c) in columns.iter().zip(solution) {
        polys[base - 1][d] = c;
    }
    for p in &mut polys {
        while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
    }
    let form = SpeedForm {
        polys,
        valid_from,
        fitted_on: solve_on.to_vec(),
        verified_on: check_on.to_vec(),
    };
    for &n in check_on {
        let expect = BigRational::from_integer(BigInt::from(value(n)?));
        if form.eval(n) != expect {
            return Err(Error::FitFailed(format!("closed form disagrees with the count at n = {n}")));
        }
    }
    Ok(form)
}

/// Solves a square system given as augmented rows; `None` when singular.
fn solve(mut rows: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let size = rows.len();
    for col in 0..size {
        let pivot = (col..size).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, pivot);
        let inv = BigRational::one() / &rows[col][col];
        for x in rows[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..size {
            if r != col && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..=size {
                    let delta = &factor * &rows[col][c];
                    rows[r][c] -= delta;
                }
            }
        }
    }
    Some(rows.into_iter().map(|r| r[size].clone()).collect())
}

/// Whether a rational is a non-negative integer.
pub fn as_natural(q: &BigRational) -> Option<BigUint> {
    if q.is_integer() && !q.is_negative() {
        q.numer().to_biguint()
    } else {
        None
    }
}
