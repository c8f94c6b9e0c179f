//! Exact rational evaluation of integer-order quantities.
//!
//! Integer-order Taylor monomials at integer gaps, their nabla differences,
//! and everything assembled from them (the boundary matrices) are rational,
//! so they are computed here without rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite double to a rational.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

fn product(range: std::ops::RangeInclusive<i64>) -> BigInt {
    range.fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn factorial(n: i64) -> BigInt {
    product(1..=n)
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    product(n - k + 1..=n) / factorial(k)
}

/// The rising function `t^(r)` for integer `t` and `r`, with the same four
/// cases as the floating-point version.
pub fn rising_int(t: i64, r: i64) -> Result<Rational> {
    let top = t + r;
    match (top <= 0, t <= 0) {
        (false, false) => {
            // (t+r-1)! / (t-1)!
            if r >= 0 {
                Ok(Rational::from_integer(product(t..=top - 1)))
            } else {
                Ok(Rational::new(BigInt::one(), product(top..=t - 1)))
            }
        }
        (false, true) => Ok(Rational::zero()),
        (true, true) => {
            let (m, n) = (-t, -top);
            let ratio = if m >= n {
                Rational::from_integer(product(n + 1..=m))
            } else {
                Rational::new(BigInt::one(), product(m + 1..=n))
            };
            Ok(if r.rem_euclid(2) == 0 { ratio } else { -ratio })
        }
        (true, false) => Err(Error::UndefinedRising {
            t: t as f64,
            r: r as f64,
        }),
    }
}

/// `H_p(t, s)` for integer order `p` as a function of the gap `t - s`.
/// Negative orders vanish wherever the rising function is defined.
pub fn monomial_int(p: i64, gap: i64) -> Result<Rational> {
    let num = rising_int(gap, p)?;
    if p < 0 {
        return Ok(Rational::zero());
    }
    Ok(num / Rational::from_integer(factorial(p)))
}

/// `nabla^j` of `tau -> H_p(tau, s)` evaluated at gap `t - s`, through the
/// binomial expansion. Always defined for `p >= 0`.
pub fn monomial_difference(p: i64, j: i64, gap: i64) -> Result<Rational> {
    (0..=j).try_fold(Rational::zero(), |acc, i| {
        let term = monomial_int(p, gap - i)? * Rational::from_integer(binomial(j, i));
        Ok(if i % 2 == 0 { acc + term } else { acc - term })
    })
}

/// Determinant by fraction-exact Gaussian elimination.
pub fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

/// Inverse by Gauss-Jordan elimination; `SingularSystem` when det = 0.
pub fn inverse(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::SingularSystem)?;
        a.swap(piv, col);
        let p = a[col][col].clone();
        for c in 0..2 * n {
            a[col][c] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Solve `m x = rhs` exactly.
pub fn solve(m: &[Vec<Rational>], rhs: &[Rational]) -> Result<Vec<Rational>> {
    let inv = inverse(m)?;
    Ok(inv
        .iter()
        .map(|row| {
            row.iter()
                .zip(rhs)
                .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
        })
        .collect())
}

pub fn to_f64_matrix(m: &[Vec<Rational>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(to_f64).collect()).collect()
}

pub fn is_nonzero(q: &Rational) -> bool {
    !q.is_zero()
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}
