//! Initial and two-point boundary value problems for the nabla Caputo
//! difference.
//!
//! Every solution of `nabla_{a*}^nu x = h` is a combination of the shifted
//! monomials `H_p(t, a - N + p)`, `p = 0..N`, plus the particular solution
//! `nabla_a^{-nu} h`. Boundary problems reduce to an `N x N` system in the
//! combination coefficients whose matrix has rational entries independent of
//! `nu`, so it is assembled and inverted exactly.
//!
//! All points are offsets relative to the left base point `a` (offset 0).

use serde::{Deserialize, Serialize};

use crate::calculus::{
    binomial, caputo_diff, frac_sum_with, nabla_at, Evaluation, FracSumKernel,
};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::grid::{Grid, GridFunction};
use crate::linalg::{self, Matrix};
use crate::special::{monomial_at, Order};

/// How the `N` initial conditions of an IVP are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialConditions {
    /// `nabla^k x(a) = c_k` for `k = 0..N`.
    Derivatives(Vec<f64>),
    /// `x(a - i) = A_i` for `i = 0..N`.
    PointValues(Vec<f64>),
}

/// `nabla_{a*}^nu x(t) + q(t) x(t-1) = h(t)` on `a+1..=b` with `N` initial
/// conditions. The potential `q` is only allowed with point-value data.
#[derive(Debug, Clone, PartialEq)]
pub struct IvpSpec {
    pub order: Order,
    pub a: i64,
    pub rhs: GridFunction,
    pub initial: InitialConditions,
    pub potential: Option<GridFunction>,
}

impl IvpSpec {
    fn validate(&self) -> Result<i64> {
        let n = self.order.n_ceil();
        let b = self.rhs.grid().hi();
        if b < self.a + 1 {
            return Err(Error::InsufficientDomain {
                need_lo: self.a + 1,
                need_hi: self.a + 1,
                have_lo: self.rhs.grid().lo(),
                have_hi: b,
            });
        }
        self.rhs.grid().require(self.a + 1, b)?;
        let len = match &self.initial {
            InitialConditions::Derivatives(c) => {
                if self.potential.is_some() {
                    return Err(Error::InconsistentSpec(
                        "a potential q requires point-value initial conditions".into(),
                    ));
                }
                c.len()
            }
            InitialConditions::PointValues(v) => v.len(),
        };
        if len != n {
            return Err(Error::InconsistentSpec(format!(
                "expected {n} initial values, got {len}"
            )));
        }
        if let Some(q) = &self.potential {
            self.rhs.grid().same_lattice(q.grid())?;
            q.grid().require(self.a + 1, b)?;
        }
        Ok(b)
    }
}

/// Solve an IVP on `a-N+1..=b`.
///
/// Derivative data uses the variation-of-constants formula
/// `x = sum_k H_k(t, a) c_k + nabla_a^{-nu} h`. Point-value data is marched
/// forward one point at a time: the newest unknown `x(t)` enters with
/// coefficient `H_{N-nu-1}(t, rho(t)) = 1`, so each step is explicit.
pub fn ivp_solve(spec: &IvpSpec) -> Result<GridFunction> {
    let b = spec.validate()?;
    let n = spec.order.n();
    let a = spec.a;
    let out = spec.rhs.grid().with_range(a - n + 1, b)?;
    match &spec.initial {
        InitialConditions::Derivatives(c) => {
            let particular = frac_sum_with(&spec.rhs, spec.order.nu(), a, Evaluation::Extended {
                lo: a - n + 1,
            })?;
            GridFunction::try_from_fn(out, |t| {
                let mut x = particular.at(t);
                for (k, ck) in c.iter().enumerate() {
                    x += monomial_at(k as f64, t - a)? * ck;
                }
                Ok(x)
            })
        }
        InitialConditions::PointValues(init) => {
            march_forward(spec.order, a, b, init, &spec.rhs, spec.potential.as_ref(), out)
        }
    }
}

fn march_forward(
    order: Order,
    a: i64,
    b: i64,
    init: &[f64],
    rhs: &GridFunction,
    q: Option<&GridFunction>,
    out: Grid,
) -> Result<GridFunction> {
    let n = order.n_ceil();
    let lo = out.lo();
    let idx = |t: i64| (t - lo) as usize;
    let mut x = vec![0.0; out.len()];
    for (i, v) in init.iter().enumerate() {
        x[idx(a - i as i64)] = *v;
    }
    let kernel = (!order.is_integer())
        .then(|| FracSumKernel::new(order.defect(), (b - a) as usize))
        .transpose()?;
    let lead = kernel.as_ref().map_or(1.0, |k| k.weight(1));
    if (lead - 1.0).abs() > 1e-12 {
        return Err(Error::Consistency(format!(
            "leading coefficient H_(N-nu-1)(t, rho(t)) = {lead}, expected 1"
        )));
    }
    // nabla^N x(s) for s = a+1..t-1, filled as we go
    let mut nabla_n = Vec::with_capacity((b - a) as usize);
    for t in a + 1..=b {
        let known: f64 = (1..=n)
            .map(|i| {
                let c = binomial(n, i) * x[idx(t - i as i64)];
                if i % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum();
        let history: f64 = match &kernel {
            Some(k) => (a + 1..t)
                .map(|s| k.weight(t - s + 1) * nabla_n[(s - a - 1) as usize])
                .sum(),
            None => 0.0,
        };
        let coupling = q.map_or(0.0, |q| q.at(t) * x[idx(t - 1)]);
        let newest = (rhs.at(t) - coupling - history) / lead;
        x[idx(t)] = newest - known;
        nabla_n.push(newest);
    }
    GridFunction::new(out, x)
}

/// The `N` homogeneous solutions `H_p(t, a - N + p)`, `p = 0..N`, sampled on
/// `grid` (which must start at or after `a - N + 1`).
pub fn general_solution_basis(order: Order, a: i64, grid: &Grid) -> Result<Vec<GridFunction>> {
    let n = order.n();
    grid.require(a - n + 1, grid.hi())?;
    (0..n)
        .map(|p| {
            GridFunction::try_from_fn(*grid, |t| {
                Ok(exact::to_f64(&exact::monomial_int(p, t - (a - n + p))?))
            })
        })
        .collect()
}

/// The structural data of a `(k, N-k)` boundary value problem:
///
/// ```text
/// nabla_{a*}^nu x(t) = h(t),      t in a+1..=b
/// nabla^i x(a - N + k) = A_i,     i in 0..k
/// nabla^{j_m} x(b) = B_{j_m},     m in 1..=N-k
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpShape {
    order: Order,
    base: f64,
    span: i64,
    k: usize,
    j_orders: Vec<usize>,
}

impl BvpShape {
    pub fn new(order: Order, base: f64, span: i64, k: usize, j_orders: Vec<usize>) -> Result<Self> {
        let n = order.n_ceil();
        if order.nu() <= 1.0 {
            return Err(Error::Inadmissible(format!(
                "order {} must exceed 1",
                order.nu()
            )));
        }
        if k < 1 || k > n - 1 {
            return Err(Error::Inadmissible(format!("k = {k} outside 1..={}", n - 1)));
        }
        if j_orders.len() != n - k {
            return Err(Error::Inadmissible(format!(
                "need {} right-boundary orders, got {}",
                n - k,
                j_orders.len()
            )));
        }
        if j_orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Inadmissible(format!(
                "right-boundary orders {j_orders:?} must be strictly increasing"
            )));
        }
        if let Some(&last) = j_orders.last() {
            if last > n - 1 {
                return Err(Error::Inadmissible(format!("order {last} exceeds N - 1 = {}", n - 1)));
            }
        }
        if !base.is_finite() {
            return Err(Error::Inadmissible(format!("base {base} is not finite")));
        }
        let min = Self::min_span(n, k, &j_orders);
        if span < min {
            return Err(Error::Inadmissible(format!(
                "b - a = {span} below the admissible minimum {min}"
            )));
        }
        Ok(BvpShape {
            order,
            base,
            span,
            k,
            j_orders,
        })
    }

    /// `max(1, j_{N-k} - N + k + 1)`.
    pub fn min_span(n: usize, k: usize, j_orders: &[usize]) -> i64 {
        let last = j_orders.last().copied().unwrap_or(0) as i64;
        1.max(last - n as i64 + k as i64 + 1)
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn n(&self) -> i64 {
        self.order.n()
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// `b - a`; also the offset of `b`.
    pub fn span(&self) -> i64 {
        self.span
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn j_orders(&self) -> &[usize] {
        &self.j_orders
    }

    /// Offset of the left boundary point `alpha = a - N + k`.
    pub fn alpha(&self) -> i64 {
        self.k as i64 - self.n()
    }

    /// `a - N + 1..=b`, where solutions live.
    pub fn solution_grid(&self) -> Grid {
        Grid::new(self.base, 1 - self.n(), self.span).expect("valid by construction")
    }

    /// `a + 1..=b`, where right-hand sides live.
    pub fn rhs_grid(&self) -> Grid {
        Grid::new(self.base, 1, self.span).expect("valid by construction")
    }

    /// Base point of the `p`-th homogeneous solution `H_p(t, a - N + p)`.
    pub fn basis_base(&self, p: usize) -> i64 {
        p as i64 - self.n()
    }
}

/// A full boundary value problem: shape plus boundary values and forcing.
#[derive(Debug, Clone, PartialEq)]
pub struct BvpSpec {
    pub shape: BvpShape,
    pub left_values: Vec<f64>,
    pub right_values: Vec<f64>,
    pub rhs: GridFunction,
}

impl BvpSpec {
    pub fn new(
        shape: BvpShape,
        left_values: Vec<f64>,
        right_values: Vec<f64>,
        rhs: GridFunction,
    ) -> Result<Self> {
        if left_values.len() != shape.k {
            return Err(Error::InconsistentSpec(format!(
                "expected {} left values, got {}",
                shape.k,
                left_values.len()
            )));
        }
        if right_values.len() != shape.j_orders.len() {
            return Err(Error::InconsistentSpec(format!(
                "expected {} right values, got {}",
                shape.j_orders.len(),
                right_values.len()
            )));
        }
        if rhs.grid().base() != shape.base {
            return Err(Error::GridMismatch(format!(
                "rhs base {} vs problem base {}",
                rhs.grid().base(),
                shape.base
            )));
        }
        rhs.grid().require(1, shape.span)?;
        let rhs = rhs.restrict(1, shape.span)?;
        Ok(BvpSpec {
            shape,
            left_values,
            right_values,
            rhs,
        })
    }

    /// Zero boundary data with forcing `h`.
    pub fn homogeneous_data(shape: BvpShape, rhs: GridFunction) -> Result<Self> {
        let (k, m) = (shape.k, shape.j_orders.len());
        BvpSpec::new(shape, vec![0.0; k], vec![0.0; m], rhs)
    }
}

/// `D`: entry `(m, p - k)` is `nabla^{j_m} H_p(b, a - N + p)` for `p = k..N`.
pub fn matrix_d(shape: &BvpShape) -> Result<Vec<Vec<Rational>>> {
    let n = shape.n() as usize;
    shape
        .j_orders
        .iter()
        .map(|&j| {
            (shape.k..n)
                .map(|p| {
                    exact::monomial_difference(p as i64, j as i64, shape.span - shape.basis_base(p))
                })
                .collect()
        })
        .collect()
}

/// `M`: the `N x N` boundary matrix on the full basis `p = 0..N`; the first
/// `k` rows are `nabla^i` at `alpha`, the rest `nabla^{j_m}` at `b`.
pub fn matrix_m(shape: &BvpShape) -> Result<Vec<Vec<Rational>>> {
    let n = shape.n() as usize;
    let rows = (0..shape.k)
        .map(|i| (i, shape.alpha()))
        .chain(shape.j_orders.iter().map(|&j| (j, shape.span)));
    rows.map(|(order, at)| {
        (0..n)
            .map(|p| exact::monomial_difference(p as i64, order as i64, at - shape.basis_base(p)))
            .collect()
    })
    .collect()
}

fn gamma_int(n: i64) -> Rational {
    Rational::from_integer(exact::factorial(n - 1))
}

/// `det D` through the Gamma-ratio factorization
/// `prod_m Gamma(b-a+N-j_m)/Gamma(N-j_m) / prod_p Gamma(b-a+N-p) * det E`,
/// with `E` the Vandermonde-type matrix in `-j_m`.
pub fn det_d_factored(shape: &BvpShape) -> Rational {
    let n = shape.n();
    let span = shape.span;
    let mut q = Rational::from_integer(1.into());
    for &j in &shape.j_orders {
        q *= gamma_int(span + n - j as i64) / gamma_int(n - j as i64);
    }
    for p in shape.k as i64..n {
        q /= gamma_int(span + n - p);
    }
    q * vandermonde_closed_form(&shape.j_orders)
}

fn vandermonde_closed_form(j: &[usize]) -> Rational {
    let len = j.len() as i64;
    let mut prod = 1_i64;
    for p in 0..j.len() {
        for r in p + 1..j.len() {
            prod *= j[p] as i64 - j[r] as i64;
        }
    }
    let sign = if (len * (len - 1) / 2) % 2 == 0 { 1 } else { -1 };
    exact::int(sign * prod)
}

/// `det E` for the power matrix with rows `((-j_m)^{n-1}, ..., -j_m, 1)`,
/// computed both directly and by the Vandermonde product formula; the two
/// must agree.
pub fn vandermonde_check(shape: &BvpShape) -> Result<f64> {
    vandermonde_det(&shape.j_orders)
}

pub fn vandermonde_det(j_orders: &[usize]) -> Result<f64> {
    let len = j_orders.len();
    let e: Vec<Vec<Rational>> = j_orders
        .iter()
        .map(|&j| {
            (0..len)
                .map(|c| {
                    let power = (len - 1 - c) as u32;
                    exact::int((-(j as i64)).pow(power))
                })
                .collect()
        })
        .collect();
    let direct = exact::det(&e);
    let closed = vandermonde_closed_form(j_orders);
    if direct != closed {
        return Err(Error::Consistency(format!(
            "Vandermonde determinant {direct} differs from product formula {closed}"
        )));
    }
    Ok(exact::to_f64(&direct))
}

/// Solution of a boundary problem together with its coefficient vector `d`
/// in the basis `H_p(t, a - N + p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BvpSolution {
    pub x: GridFunction,
    pub coefficients: Vec<f64>,
}

/// Reusable solver for one [`BvpShape`]: the inverse of `M` and the basis
/// table are prepared once and shared across right-hand sides.
#[derive(Debug, Clone)]
pub struct DirectSolver {
    shape: BvpShape,
    m_inverse: Matrix,
    /// `basis[p][t - lo]`
    basis: Vec<Vec<f64>>,
}

impl DirectSolver {
    pub fn new(shape: &BvpShape) -> Result<Self> {
        let m = matrix_m(shape)?;
        let m_inverse = exact::to_f64_matrix(&exact::inverse(&m)?);
        let grid = shape.solution_grid();
        let basis = (0..shape.n() as usize)
            .map(|p| {
                grid.offsets()
                    .map(|t| {
                        exact::monomial_int(p as i64, t - shape.basis_base(p))
                            .map(|q| exact::to_f64(&q))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DirectSolver {
            shape: shape.clone(),
            m_inverse,
            basis,
        })
    }

    pub fn shape(&self) -> &BvpShape {
        &self.shape
    }

    /// `x = sum_p d_p H_p(t, a - N + p) + nabla_a^{-nu} h` with `d` fixed by
    /// the `N` boundary conditions.
    pub fn solve(&self, left: &[f64], right: &[f64], rhs: &GridFunction) -> Result<BvpSolution> {
        let shape = &self.shape;
        if left.len() != shape.k || right.len() != shape.j_orders.len() {
            return Err(Error::InconsistentSpec("boundary value count mismatch".into()));
        }
        let grid = shape.solution_grid();
        let particular = frac_sum_with(rhs, shape.order.nu(), 0, Evaluation::Extended {
            lo: grid.lo(),
        })?;
        let mut r = Vec::with_capacity(shape.n() as usize);
        for (i, value) in left.iter().enumerate() {
            r.push(value - nabla_at(&particular, i, shape.alpha())?);
        }
        for (&j, value) in shape.j_orders.iter().zip(right) {
            r.push(value - nabla_at(&particular, j, shape.span)?);
        }
        let d = linalg::mat_vec(&self.m_inverse, &r);
        let lo = grid.lo();
        let x = GridFunction::from_fn(grid, |t| {
            let i = (t - lo) as usize;
            particular.at(t) + d.iter().zip(&self.basis).map(|(c, b)| c * b[i]).sum::<f64>()
        });
        Ok(BvpSolution { x, coefficients: d })
    }
}

/// Solve a `(k, N-k)` boundary problem directly through the boundary matrix.
pub fn bvp_solve_direct(spec: &BvpSpec) -> Result<BvpSolution> {
    DirectSolver::new(&spec.shape)?.solve(&spec.left_values, &spec.right_values, &spec.rhs)
}

/// Largest violations of the equation and of the boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub equation: f64,
    pub boundary: f64,
}

/// Re-evaluate `nabla_{a*}^nu x - h` and every boundary condition for `x`.
pub fn residuals(spec: &BvpSpec, x: &GridFunction) -> Result<Residuals> {
    let shape = &spec.shape;
    let cap = caputo_diff(x, shape.order, 0)?;
    let equation = (1..=shape.span)
        .map(|t| (cap.at(t) - spec.rhs.at(t)).abs())
        .fold(0.0, f64::max);
    let mut boundary = 0.0_f64;
    for (i, v) in spec.left_values.iter().enumerate() {
        boundary = boundary.max((nabla_at(x, i, shape.alpha())? - v).abs());
    }
    for (&j, v) in shape.j_orders.iter().zip(&spec.right_values) {
        boundary = boundary.max((nabla_at(x, j, shape.span)? - v).abs());
    }
    Ok(Residuals { equation, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use approx::assert_relative_eq;

    fn order(nu: f64) -> Order {
        Order::new(nu).unwrap()
    }

    #[test]
    fn basis_for_n_two() {
        let g = Grid::new(0.0, -1, 4).unwrap();
        let basis = general_solution_basis(order(1.5), 0, &g).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(basis[0].values().iter().all(|v| *v == 1.0));
        for (t, v) in basis[1].iter() {
            assert_eq!(v, (t + 1) as f64);
        }
    }

    #[test]
    fn basis_elements_have_leading_zeros_and_are_annihilated() {
        for nu in [2.4, 3.0, 3.6, 4.2] {
            let o = order(nu);
            let n = o.n();
            let g = Grid::new(0.0, 1 - n, 9).unwrap();
            for (p, f) in general_solution_basis(o, 0, &g).unwrap().iter().enumerate() {
                for t in 1 - n..=p as i64 - n {
                    assert_eq!(f.get(t).unwrap(), 0.0, "p = {p}, t = {t}");
                }
                let c = caputo_diff(f, o, 0).unwrap();
                assert!(c.max_abs() < 1e-10, "nu = {nu}, p = {p}");
            }
        }
    }

    #[test]
    fn ivp_derivative_style_polynomial() {
        let g = Grid::new(0.0, 1, 6).unwrap();
        let spec = IvpSpec {
            order: order(1.5),
            a: 0,
            rhs: GridFunction::zeros(g),
            initial: InitialConditions::Derivatives(vec![1.0, 2.0]),
            potential: None,
        };
        let x = ivp_solve(&spec).unwrap();
        assert_eq!(x.grid().lo(), -1);
        for (t, v) in x.iter() {
            assert_relative_eq!(v, 1.0 + 2.0 * t as f64, epsilon = 1e-13);
        }
    }

    #[test]
    fn ivp_impulse_response() {
        let g = Grid::new(0.0, 1, 4).unwrap();
        let h = GridFunction::from_fn(g, |t| if t == 1 { 1.0 } else { 0.0 });
        let spec = IvpSpec {
            order: order(1.5),
            a: 0,
            rhs: h,
            initial: InitialConditions::Derivatives(vec![0.0, 0.0]),
            potential: None,
        };
        let x = ivp_solve(&spec).unwrap();
        assert_relative_eq!(x.get(2).unwrap(), 1.5, max_relative = 1e-14);
    }

    #[test]
    fn ivp_rejects_inconsistent_specs() {
        let g = Grid::new(0.0, 1, 4).unwrap();
        let base = IvpSpec {
            order: order(2.5),
            a: 0,
            rhs: GridFunction::zeros(g),
            initial: InitialConditions::Derivatives(vec![0.0, 0.0, 1.0]),
            potential: Some(GridFunction::zeros(g)),
        };
        assert!(matches!(ivp_solve(&base), Err(Error::InconsistentSpec(_))));
        let short = IvpSpec {
            potential: None,
            initial: InitialConditions::PointValues(vec![1.0]),
            ..base.clone()
        };
        assert!(matches!(ivp_solve(&short), Err(Error::InconsistentSpec(_))));
    }

    #[test]
    fn point_value_march_matches_initial_data_and_equation() {
        let o = order(2.7);
        let g = Grid::new(0.0, 1, 10).unwrap();
        let q = GridFunction::from_fn(g, |t| 0.3 * (t as f64).cos());
        let h = GridFunction::from_fn(g, |t| (t as f64 * 0.7).sin());
        let spec = IvpSpec {
            order: o,
            a: 0,
            rhs: h.clone(),
            initial: InitialConditions::PointValues(vec![0.5, -1.0, 2.0]),
            potential: Some(q.clone()),
        };
        let x = ivp_solve(&spec).unwrap();
        assert_eq!(x.get(0).unwrap(), 0.5);
        assert_eq!(x.get(-1).unwrap(), -1.0);
        assert_eq!(x.get(-2).unwrap(), 2.0);
        let c = caputo_diff(&x, o, 0).unwrap();
        for t in 1..=10 {
            let r = c.at(t) + q.at(t) * x.at(t - 1) - h.at(t);
            assert!(r.abs() < 1e-10, "t = {t}: {r}");
        }
    }

    #[test]
    fn shape_validation() {
        let o = order(3.5);
        assert!(BvpShape::new(o, 0.0, 3, 0, vec![0, 1, 2, 3]).is_err());
        assert!(BvpShape::new(o, 0.0, 3, 4, vec![]).is_err());
        assert!(BvpShape::new(o, 0.0, 3, 2, vec![1, 1]).is_err());
        assert!(BvpShape::new(o, 0.0, 3, 2, vec![1, 4]).is_err());
        assert!(BvpShape::new(o, 0.0, 0, 2, vec![0, 1]).is_err());
        // j_{N-k} - N + k + 1 = 3 - 4 + 3 + 1 = 3
        assert!(BvpShape::new(o, 0.0, 2, 3, vec![3]).is_err());
        assert!(BvpShape::new(o, 0.0, 3, 3, vec![3]).is_ok());
        assert!(BvpShape::new(order(1.0), 0.0, 3, 1, vec![0]).is_err());
    }

    #[test]
    fn matrix_d_example() {
        let shape = BvpShape::new(order(2.5), 0.0, 3, 1, vec![0, 1]).unwrap();
        let d = matrix_d(&shape).unwrap();
        assert_eq!(d, vec![vec![int(5), int(10)], vec![int(1), int(4)]]);
        assert_eq!(exact::det(&d), int(10));
        assert_eq!(det_d_factored(&shape), int(10));
    }

    #[test]
    fn matrix_d_single_column() {
        let shape = BvpShape::new(order(3.2), 0.0, 5, 3, vec![2]).unwrap();
        let d = matrix_d(&shape).unwrap();
        assert_eq!(d.len(), 1);
        // nabla^2 H_3(b, a-1) = H_1(b, a-1) = b - a + 1
        assert_eq!(d[0], vec![int(6)]);
    }

    #[test]
    fn matrix_d_entries_match_gamma_closed_form() {
        let shape = BvpShape::new(order(4.5), 0.0, 6, 2, vec![0, 2, 4]).unwrap();
        let n = 5.0;
        let span = 6.0;
        let d = matrix_d(&shape).unwrap();
        for (m, &j) in shape.j_orders().iter().enumerate() {
            for p in 2..5 {
                let j = j as f64;
                let closed = crate::special::gamma(span + n - j)
                    * crate::special::reciprocal_gamma(span + n - p as f64)
                    * crate::special::reciprocal_gamma(p as f64 - j + 1.0);
                assert_relative_eq!(exact::to_f64(&d[m][p - 2]), closed, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde_det(&[0, 1]), Ok(1.0));
        assert_eq!(vandermonde_det(&[0, 1, 2]), Ok(2.0));
        assert_eq!(vandermonde_det(&[3]), Ok(1.0));
        assert!(vandermonde_det(&[0, 2, 3]).unwrap().abs() >= 1.0);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let shape = BvpShape::new(order(2.5), 0.0, 4, 1, vec![0, 2]).unwrap();
        let spec = BvpSpec::homogeneous_data(shape.clone(), GridFunction::zeros(shape.rhs_grid()))
            .unwrap();
        let sol = bvp_solve_direct(&spec).unwrap();
        assert!(sol.x.max_abs() == 0.0);
    }

    #[test]
    fn second_order_conjugate_problem_against_tridiagonal_solve() {
        // nabla^2 x = 1 on t = 1..=3, x(-1) = 0, x(3) = 0. Unknowns x(-1..=3).
        let shape = BvpShape::new(order(2.0), 0.0, 3, 1, vec![0]).unwrap();
        let spec = BvpSpec::homogeneous_data(
            shape.clone(),
            GridFunction::constant(shape.rhs_grid(), 1.0),
        )
        .unwrap();
        let sol = bvp_solve_direct(&spec).unwrap();
        // Oracle: 5x5 system assembled by hand.
        let m = vec![
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, -2.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, -2.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, -2.0, 1.0],
            vec![0.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let oracle = linalg::solve(&m, &[0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        for (i, t) in (-1..=3).enumerate() {
            assert_relative_eq!(sol.x.get(t).unwrap(), oracle[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn random_data_satisfies_all_conditions() {
        let shape = BvpShape::new(order(3.4), 0.0, 7, 2, vec![1, 3]).unwrap();
        let h = GridFunction::from_fn(shape.rhs_grid(), |t| (t as f64 * 1.3).sin());
        let spec = BvpSpec::new(shape, vec![0.7, -0.2], vec![1.5, 0.3], h).unwrap();
        let sol = bvp_solve_direct(&spec).unwrap();
        let r = residuals(&spec, &sol.x).unwrap();
        assert!(r.equation < 1e-9 && r.boundary < 1e-9, "{r:?}");
    }
}
