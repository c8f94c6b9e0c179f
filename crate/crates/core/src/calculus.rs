//! The four fundamental operators: nabla difference, nabla definite
//! integral, nabla fractional sum and nabla Caputo fractional difference.
//!
//! Base points (`a`, `c`, `d`, `t`) are integer offsets on the lattice of the
//! function they act on.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::special::{monomial_at, Order};

/// Backward jump `rho(t) = max(a, t - 1)`.
pub fn rho(t: i64, a: i64) -> i64 {
    a.max(t - 1)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Whether the fractional sum or Caputo difference is returned on its
/// natural domain `a+1..` or extended down to `lo` with the convention that
/// the value is 0 at `a, a-1, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    #[default]
    Natural,
    Extended { lo: i64 },
}

/// `nabla^order f` on the shrunken grid `lo+order..=hi`.
pub fn nabla_diff(f: &GridFunction, order: usize) -> Result<GridFunction> {
    let g = f.grid();
    if g.len() < order + 1 {
        return Err(Error::InsufficientDomain {
            need_lo: g.hi() - order as i64,
            need_hi: g.hi(),
            have_lo: g.lo(),
            have_hi: g.hi(),
        });
    }
    let mut values = f.values().to_vec();
    for _ in 0..order {
        values = values.windows(2).map(|w| w[1] - w[0]).collect();
    }
    GridFunction::new(g.with_range(g.lo() + order as i64, g.hi())?, values)
}

/// `nabla^order f(t)` at one point through the binomial expansion
/// `sum_i (-1)^i C(order, i) f(t - i)`.
pub fn nabla_at(f: &GridFunction, order: usize, t: i64) -> Result<f64> {
    f.grid().require(t - order as i64, t)?;
    Ok((0..=order).fold(0.0, |acc, i| {
        let term = binomial(order, i) * f.at(t - i as i64);
        if i % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    }))
}

/// The nabla definite integral `int_c^d f(t) nabla t`.
pub fn nabla_integral(f: &GridFunction, c: i64, d: i64) -> Result<f64> {
    if c == d {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if d > c { (c + 1, d, 1.0) } else { (d + 1, c, -1.0) };
    f.grid().require(lo, hi)?;
    Ok(sign * (lo..=hi).map(|t| f.at(t)).sum::<f64>())
}

/// Weights of the fractional-sum kernel: `weight(g) = H_{nu-1}(t, rho(s))`
/// for `g = t - rho(s) = t - s + 1 >= 1`.
#[derive(Debug, Clone)]
pub struct FracSumKernel {
    nu: f64,
    weights: Vec<f64>,
}

impl FracSumKernel {
    /// Kernel for fractional-sum order `nu > 0`, covering gaps up to `max_gap`.
    pub fn new(nu: f64, max_gap: usize) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::Domain(format!("fractional sum order {nu} must be positive")));
        }
        let weights = (1..=max_gap as i64)
            .map(|g| monomial_at(nu - 1.0, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(FracSumKernel { nu, weights })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn weight(&self, gap: i64) -> f64 {
        self.weights[(gap - 1) as usize]
    }

    /// `nabla_a^{-nu} f(t)` at one point `t >= a + 1`; `f` must cover `a+1..=t`.
    pub fn apply_at(&self, f: &GridFunction, a: i64, t: i64) -> f64 {
        (a + 1..=t).map(|s| self.weight(t - s + 1) * f.at(s)).sum()
    }
}

fn output_grid(f: &GridFunction, a: i64, eval: Evaluation) -> Result<Grid> {
    let hi = f.grid().hi();
    if hi < a + 1 {
        return Err(Error::InsufficientDomain {
            need_lo: a + 1,
            need_hi: a + 1,
            have_lo: f.grid().lo(),
            have_hi: hi,
        });
    }
    match eval {
        Evaluation::Natural => f.grid().with_range(a + 1, hi),
        Evaluation::Extended { lo } => f.grid().with_range(lo.min(a + 1), hi),
    }
}

/// The nabla fractional sum `nabla_a^{-nu} f` on `a+1..=hi`; order 0 is the
/// identity.
pub fn frac_sum(f: &GridFunction, nu: f64, a: i64) -> Result<GridFunction> {
    frac_sum_with(f, nu, a, Evaluation::Natural)
}

pub fn frac_sum_with(f: &GridFunction, nu: f64, a: i64, eval: Evaluation) -> Result<GridFunction> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!(
            "fractional sum order {nu} must be finite and nonnegative"
        )));
    }
    let out = output_grid(f, a, eval)?;
    f.grid().require(a + 1, out.hi())?;
    if nu == 0.0 {
        return Ok(GridFunction::from_fn(out, |t| if t > a { f.at(t) } else { 0.0 }));
    }
    let kernel = FracSumKernel::new(nu, (out.hi() - a) as usize)?;
    Ok(GridFunction::from_fn(out, |t| {
        if t > a {
            kernel.apply_at(f, a, t)
        } else {
            0.0
        }
    }))
}

/// The nabla Caputo fractional difference `nabla_{a*}^nu f` on `a+1..=hi`;
/// `f` must be defined from `a - N + 1`.
pub fn caputo_diff(f: &GridFunction, order: Order, a: i64) -> Result<GridFunction> {
    caputo_diff_with(f, order, a, Evaluation::Natural)
}

pub fn caputo_diff_with(
    f: &GridFunction,
    order: Order,
    a: i64,
    eval: Evaluation,
) -> Result<GridFunction> {
    let n = order.n_ceil();
    let hi = f.grid().hi();
    f.grid().require(a - n as i64 + 1, hi.max(a + 1))?;
    let diff = nabla_diff(&f.restrict(a - n as i64 + 1, hi)?, n)?;
    frac_sum_with(&diff, order.defect(), a, eval)
}

/// Coefficients `w` with `nabla_{a*}^nu x(t) = sum_tau w[tau - lo] x(tau)`,
/// where `lo = a - N + 1` and `tau` runs over `lo..=t`.
pub fn caputo_stencil(order: Order, a: i64, t: i64) -> Result<Vec<f64>> {
    let n = order.n_ceil();
    let lo = a - n as i64 + 1;
    if t <= a {
        return Err(Error::Domain(format!("Caputo stencil at {t} <= base {a}")));
    }
    let mut w = vec![0.0; (t - lo + 1) as usize];
    let kernel = (!order.is_integer())
        .then(|| FracSumKernel::new(order.defect(), (t - a) as usize))
        .transpose()?;
    for s in a + 1..=t {
        let k = match &kernel {
            Some(k) => k.weight(t - s + 1),
            None if s == t => 1.0,
            None => continue,
        };
        for i in 0..=n {
            let c = binomial(n, i) * if i % 2 == 0 { k } else { -k };
            w[(s - i as i64 - lo) as usize] += c;
        }
    }
    Ok(w)
}
