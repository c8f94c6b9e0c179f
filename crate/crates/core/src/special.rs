//! Gamma-function machinery: the generalized rising function and the nabla
//! Taylor monomials built on it.
//!
//! Integer arguments go through finite products so that integer-order
//! quantities come out exact whenever they fit in a double. Genuinely
//! fractional arguments use `tgamma`, falling back to signed log-Gamma when
//! the arguments are large enough to overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from an integer under which an argument is treated as a pole.
pub const POLE_TOLERANCE: f64 = 1e-9;

/// Beyond this, `tgamma` overflows and we switch to log-Gamma.
const TGAMMA_LIMIT: f64 = 170.0;

/// Longest integer shift evaluated as a finite product.
const MAX_PRODUCT_LEN: i64 = 64;

/// A fractional order `nu > 0` together with `N = ceil(nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Order {
    nu: f64,
    n_ceil: usize,
}

impl Order {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= 0.0 || nu > 1e6 {
            return Err(Error::InvalidOrder(nu));
        }
        Ok(Order {
            nu,
            n_ceil: nu.ceil() as usize,
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `N = ceil(nu)`, so that `N - 1 < nu <= N`.
    pub fn n_ceil(&self) -> usize {
        self.n_ceil
    }

    pub fn n(&self) -> i64 {
        self.n_ceil as i64
    }

    pub fn is_integer(&self) -> bool {
        self.nu == self.n_ceil as f64
    }

    /// `N - nu`, the order of the fractional sum inside the Caputo difference.
    pub fn defect(&self) -> f64 {
        self.n_ceil as f64 - self.nu
    }
}

impl TryFrom<f64> for Order {
    type Error = Error;
    fn try_from(nu: f64) -> Result<Self> {
        Order::new(nu)
    }
}

impl From<Order> for f64 {
    fn from(o: Order) -> f64 {
        o.nu
    }
}

pub(crate) fn nearest_integer(x: f64, tol: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= tol && r.abs() < 9.0e15).then_some(r as i64)
}

fn nonpositive_integer(x: f64) -> Option<i64> {
    nearest_integer(x, POLE_TOLERANCE).filter(|&n| n <= 0)
}

/// `m! / n!` for nonnegative integers, as a finite product.
fn factorial_ratio(m: i64, n: i64) -> f64 {
    if m >= n {
        (n + 1..=m).fold(1.0, |acc, i| acc * i as f64)
    } else {
        1.0 / (m + 1..=n).fold(1.0, |acc, i| acc * i as f64)
    }
}

pub fn factorial(n: u32) -> f64 {
    factorial_ratio(n as i64, 0)
}

/// Gamma function. Integers go through factorials.
pub fn gamma(x: f64) -> f64 {
    match nearest_integer(x, 0.0) {
        Some(n) if (1..=171).contains(&n) => factorial_ratio(n - 1, 0),
        _ => libm::tgamma(x),
    }
}

/// `1/Gamma(x)`, which is entire: zero at the poles of Gamma.
pub fn reciprocal_gamma(x: f64) -> f64 {
    if nonpositive_integer(x).is_some() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// `Gamma(t + r) / Gamma(t)` with neither argument a pole.
fn gamma_ratio(t: f64, r: f64) -> f64 {
    if let Some(k) = nearest_integer(r, 0.0).filter(|k| k.abs() <= MAX_PRODUCT_LEN) {
        return if k >= 0 {
            (0..k).fold(1.0, |acc, i| acc * (t + i as f64))
        } else {
            1.0 / (1..=-k).fold(1.0, |acc, i| acc * (t - i as f64))
        };
    }
    let top = t + r;
    if t.abs() < TGAMMA_LIMIT && top.abs() < TGAMMA_LIMIT {
        return gamma(top) / gamma(t);
    }
    let (ln_top, sign_top) = libm::lgamma_r(top);
    let (ln_t, sign_t) = libm::lgamma_r(t);
    (sign_top * sign_t) as f64 * (ln_top - ln_t).exp()
}

/// The generalized rising function `t^(r)`.
///
/// * `Gamma(t+r)/Gamma(t)` when neither `t+r` nor `t` is a nonpositive integer;
/// * `0` when `t` is a nonpositive integer but `t+r` is not;
/// * `(-1)^r (-t)!/(-t-r)!` when both are nonpositive integers;
/// * undefined when `t+r` is a nonpositive integer and `t` is not.
pub fn rising(t: f64, r: f64) -> Result<f64> {
    if !t.is_finite() || !r.is_finite() {
        return Err(Error::Domain(format!("rising({t}, {r}): non-finite argument")));
    }
    let top = t + r;
    match (nonpositive_integer(top), nonpositive_integer(t)) {
        (None, None) => Ok(gamma_ratio(t, r)),
        (None, Some(_)) => Ok(0.0),
        (Some(top_i), Some(t_i)) => {
            // Both endpoints integral forces r integral up to the two
            // rounding tolerances.
            if nearest_integer(r, 2.0 * POLE_TOLERANCE).is_none() {
                return Err(Error::Domain(format!(
                    "rising({t}, {r}): r must be an integer when t and t+r are nonpositive integers"
                )));
            }
            let r_i = top_i - t_i;
            let sign = if r_i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            Ok(sign * factorial_ratio(-t_i, -top_i))
        }
        (Some(_), None) => Err(Error::UndefinedRising { t, r }),
    }
}

/// The nabla Taylor monomial `H_nu(t, s) = (t - s)^(nu) / Gamma(nu + 1)`.
///
/// Points are integer offsets on a common lattice; only `t - s` matters.
/// At the poles of `Gamma(nu + 1)` the reciprocal Gamma vanishes, so
/// `H_{-k}` is zero wherever the rising function is defined.
pub fn taylor_monomial(nu: f64, t: i64, s: i64) -> Result<f64> {
    monomial_at(nu, t - s)
}

/// `H_nu` as a function of the integer gap `t - s`.
pub fn monomial_at(nu: f64, gap: i64) -> Result<f64> {
    let num = rising(gap as f64, nu)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num * reciprocal_gamma(nu + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rising_four_cases() {
        assert_eq!(rising(3.0, 2.0), Ok(12.0));
        assert_eq!(rising(0.0, 2.5), Ok(0.0));
        assert_eq!(rising(1.0, 0.0), Ok(1.0));
        assert_relative_eq!(rising(-2.0, -1.0).unwrap(), -1.0 / 3.0, max_relative = 1e-15);
        assert!(matches!(rising(0.5, -1.5), Err(Error::UndefinedRising { .. })));
        assert!(matches!(rising(2.0, -3.0), Err(Error::UndefinedRising { .. })));
    }

    #[test]
    fn rising_case_three_examples() {
        // (-3)^(2) = (-1)^2 3!/1! = 6 = (-3)(-2)
        assert_eq!(rising(-3.0, 2.0), Ok(6.0));
        // (-1)^(1) = -1
        assert_eq!(rising(-1.0, 1.0), Ok(-1.0));
        // (0)^(-2) = 0!/2! = 1/2
        assert_eq!(rising(0.0, -2.0), Ok(0.5));
    }

    #[test]
    fn rising_fractional_matches_gamma_ratio() {
        // Gamma(4.5)/Gamma(4) = 3.5 * 2.5 * 1.5 * 0.5 * sqrt(pi) / 6
        let expect = 3.5 * 2.5 * 1.5 * 0.5 * std::f64::consts::PI.sqrt() / 6.0;
        assert_relative_eq!(rising(4.0, 0.5).unwrap(), expect, max_relative = 1e-14);
        // negative non-integer base: Gamma(-0.5)/Gamma(-1.5) = -1.5
        assert_relative_eq!(rising(-1.5, 1.0).unwrap(), -1.5, max_relative = 1e-15);
        assert_relative_eq!(
            rising(-1.5, 0.25).unwrap(),
            rising_via_lgamma(-1.5, 0.25),
            max_relative = 1e-13
        );
    }

    fn rising_via_lgamma(t: f64, r: f64) -> f64 {
        let (a, sa) = libm::lgamma_r(t + r);
        let (b, sb) = libm::lgamma_r(t);
        (sa * sb) as f64 * (a - b).exp()
    }

    #[test]
    fn large_arguments_use_log_gamma() {
        let v = rising(200.5, 0.5).unwrap();
        assert_relative_eq!(v, rising_via_lgamma(200.5, 0.5), max_relative = 1e-12);
        assert_relative_eq!(v, 200.5_f64.sqrt(), max_relative = 1e-3);
    }

    #[test]
    fn taylor_monomial_examples() {
        for t in -5..10 {
            assert_eq!(taylor_monomial(0.0, t, 0), Ok(1.0));
        }
        assert_eq!(taylor_monomial(2.0, 4, -1), Ok(15.0));
        assert_relative_eq!(taylor_monomial(0.5, 4, 0).unwrap(), 2.1875, max_relative = 1e-14);
        assert_eq!(taylor_monomial(3.0, 0, 0), Ok(0.0));
    }

    #[test]
    fn negative_integer_monomials_vanish_or_are_undefined() {
        for k in 1..5_i64 {
            for gap in k + 1..k + 10 {
                assert_eq!(monomial_at(-(k as f64), gap), Ok(0.0));
            }
            for gap in 1..=k {
                assert!(monomial_at(-(k as f64), gap).is_err());
            }
        }
    }

    #[test]
    fn integer_monomials_are_polynomials_off_the_support() {
        // H_2(t,s) = (d)(d+1)/2 for every integer gap d, including negatives.
        for d in -6..8_i64 {
            let expect = (d * (d + 1)) as f64 / 2.0;
            assert_eq!(monomial_at(2.0, d), Ok(expect), "gap {d}");
        }
    }

    #[test]
    fn order_ceiling() {
        let o = Order::new(2.5).unwrap();
        assert_eq!(o.n_ceil(), 3);
        assert!(!o.is_integer());
        let o = Order::new(3.0).unwrap();
        assert_eq!(o.n_ceil(), 3);
        assert!(o.is_integer());
        assert_eq!(o.defect(), 0.0);
        assert!(Order::new(0.0).is_err());
        assert!(Order::new(f64::NAN).is_err());
    }
}
