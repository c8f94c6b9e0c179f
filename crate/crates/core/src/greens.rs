//! Green's functions for `(k, N-k)` boundary value problems.
//!
//! For each `s` in `a+1..=b` the kernel splits into a homogeneous part
//! `u(., s)`, a combination of `H_k, ..., H_{N-1}`, and the jump term
//! `H_{nu-1}(t, rho(s))`, which is switched on for `t >= rho(s)`. The
//! coefficients of `u` solve the small system with matrix `D`; the bordered
//! determinant form is kept as an independent check.

use serde::{Deserialize, Serialize};

use crate::bvp::{matrix_d, BvpShape, BvpSpec, DirectSolver};
use crate::calculus::{binomial, rho};
use crate::error::{Error, Result};
use crate::exact;
use crate::grid::GridFunction;
use crate::linalg::{self, Matrix};
use crate::parallel::{self, Execution};
use crate::special::{monomial_at, Order};

/// Which operator a kernel inverts: `nabla_{a*}^nu` or `-nabla_{a*}^nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSign {
    Positive,
    Negated,
}

impl OperatorSign {
    pub fn factor(self) -> f64 {
        match self {
            OperatorSign::Positive => 1.0,
            OperatorSign::Negated => -1.0,
        }
    }
}

/// Convention of the `(N-1, 1)` closed form.
pub const CLOSED_FORM_SIGN: OperatorSign = OperatorSign::Negated;

/// A dense Green's kernel on `(a-N+1..=b) x (a+1..=b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensKernel {
    shape: BvpShape,
    sign: OperatorSign,
    beta: f64,
    /// Row-major, rows `t`, columns `s`.
    table: Vec<f64>,
    u_table: Vec<f64>,
}

impl GreensKernel {
    pub fn shape(&self) -> &BvpShape {
        &self.shape
    }

    pub fn sign(&self) -> OperatorSign {
        self.sign
    }

    /// `det D`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t_lo(&self) -> i64 {
        1 - self.shape.n()
    }

    pub fn t_hi(&self) -> i64 {
        self.shape.span()
    }

    fn cols(&self) -> usize {
        self.shape.span() as usize
    }

    fn index(&self, t: i64, s: i64) -> Result<usize> {
        if t < self.t_lo() || t > self.t_hi() {
            return Err(Error::OutOfGrid {
                offset: t,
                lo: self.t_lo(),
                hi: self.t_hi(),
            });
        }
        if s < 1 || s > self.shape.span() {
            return Err(Error::OutOfGrid {
                offset: s,
                lo: 1,
                hi: self.shape.span(),
            });
        }
        Ok((t - self.t_lo()) as usize * self.cols() + (s - 1) as usize)
    }

    pub fn get(&self, t: i64, s: i64) -> Result<f64> {
        Ok(self.table[self.index(t, s)?])
    }

    pub fn u(&self, t: i64, s: i64) -> Result<f64> {
        Ok(self.u_table[self.index(t, s)?])
    }

    /// `u(t, s)` plus the jump term, in this kernel's sign convention.
    pub fn v(&self, t: i64, s: i64) -> Result<f64> {
        let jump = monomial_at(self.shape.order().nu() - 1.0, t - rho(s, 0))?;
        Ok(self.u(t, s)? + self.sign.factor() * jump)
    }

    /// The row for `t`, indexed by `s - 1`.
    pub fn row(&self, t: i64) -> Result<&[f64]> {
        let start = self.index(t, 1)?;
        Ok(&self.table[start..start + self.cols()])
    }

    /// `G(., s)` on `a-N+1..=b`.
    pub fn column(&self, s: i64) -> Result<GridFunction> {
        self.index(self.t_lo(), s)?;
        let grid = self.shape.solution_grid();
        Ok(GridFunction::from_fn(grid, |t| {
            self.table[(t - self.t_lo()) as usize * self.cols() + (s - 1) as usize]
        }))
    }

    /// The same kernel expressed for the other operator sign.
    pub fn to_sign(&self, sign: OperatorSign) -> GreensKernel {
        if sign == self.sign {
            return self.clone();
        }
        GreensKernel {
            shape: self.shape.clone(),
            sign,
            beta: self.beta,
            table: self.table.iter().map(|g| -g).collect(),
            u_table: self.u_table.iter().map(|g| -g).collect(),
        }
    }
}

fn assemble(
    shape: &BvpShape,
    sign: OperatorSign,
    beta: f64,
    columns: Vec<(Vec<f64>, Vec<f64>)>,
) -> GreensKernel {
    let rows = shape.solution_grid().len();
    let cols = columns.len();
    let mut table = vec![0.0; rows * cols];
    let mut u_table = vec![0.0; rows * cols];
    for (c, (g, u)) in columns.into_iter().enumerate() {
        for r in 0..rows {
            table[r * cols + c] = g[r];
            u_table[r * cols + c] = u[r];
        }
    }
    GreensKernel {
        shape: shape.clone(),
        sign,
        beta,
        table,
        u_table,
    }
}

/// `nabla^j` in `t` of `H_{nu-1}(t, rho(s))` at `t = b`.
fn jump_difference(nu: f64, j: usize, b: i64, s: i64) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..=j {
        let term = binomial(j, i) * monomial_at(nu - 1.0, b - i as i64 - rho(s, 0))?;
        acc += if i % 2 == 0 { term } else { -term };
    }
    Ok(acc)
}

/// `H_p(t, a - N + p)` for `p = k..N`, sampled on the solution grid.
fn upper_basis(shape: &BvpShape) -> Result<Vec<Vec<f64>>> {
    (shape.k()..shape.n() as usize)
        .map(|p| {
            shape
                .solution_grid()
                .offsets()
                .map(|t| exact::monomial_int(p as i64, t - shape.basis_base(p)).map(|q| exact::to_f64(&q)))
                .collect()
        })
        .collect()
}

/// Green's kernel of `nabla_{a*}^nu x = h` under the homogeneous boundary
/// conditions of `shape`.
pub fn greens_kernel(shape: &BvpShape) -> Result<GreensKernel> {
    greens_kernel_with(shape, Execution::default())
}

pub fn greens_kernel_with(shape: &BvpShape, exec: Execution) -> Result<GreensKernel> {
    let d = matrix_d(shape)?;
    let beta = exact::det(&d);
    if !exact::is_nonzero(&beta) {
        return Err(Error::SingularSystem);
    }
    let d_inverse: Matrix = exact::to_f64_matrix(&exact::inverse(&d)?);
    let basis = upper_basis(shape)?;
    let nu = shape.order().nu();
    let span = shape.span();
    let grid = shape.solution_grid();
    let columns = parallel::map_range(exec, span as usize, |c| -> Result<(Vec<f64>, Vec<f64>)> {
        let s = c as i64 + 1;
        let r = shape
            .j_orders()
            .iter()
            .map(|&j| jump_difference(nu, j, span, s).map(|v| -v))
            .collect::<Result<Vec<_>>>()?;
        let coef = linalg::mat_vec(&d_inverse, &r);
        let mut g = Vec::with_capacity(grid.len());
        let mut u = Vec::with_capacity(grid.len());
        for (i, t) in grid.offsets().enumerate() {
            let ut: f64 = coef.iter().zip(&basis).map(|(c, b)| c * b[i]).sum();
            let jump = if t >= rho(s, 0) {
                monomial_at(nu - 1.0, t - rho(s, 0))?
            } else {
                0.0
            };
            u.push(ut);
            g.push(ut + jump);
        }
        Ok((g, u))
    });
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(assemble(shape, OperatorSign::Positive, exact::to_f64(&beta), columns))
}

/// `u(t, s)` as the bordered determinant over `det D`: first row
/// `(0, H_k(t, .), ..., H_{N-1}(t, .))`, first column below it
/// `nabla^{j_m} H_{nu-1}(b, rho(s))`, and `D` in the lower-right block.
pub fn u_by_determinant(shape: &BvpShape, t: i64, s: i64) -> Result<f64> {
    let d = matrix_d(shape)?;
    let beta = exact::to_f64(&exact::det(&d));
    let n = shape.n() as usize;
    let nu = shape.order().nu();
    let mut m: Matrix = Vec::with_capacity(d.len() + 1);
    let mut first = vec![0.0];
    for p in shape.k()..n {
        first.push(exact::to_f64(&exact::monomial_int(p as i64, t - shape.basis_base(p))?));
    }
    m.push(first);
    for (row, &j) in d.iter().zip(shape.j_orders()) {
        let mut r = vec![jump_difference(nu, j, shape.span(), s)?];
        r.extend(row.iter().map(exact::to_f64));
        m.push(r);
    }
    Ok(linalg::det(&m) / beta)
}

/// Closed-form kernel of the `(N-1, 1)` problem
/// `-nabla_{a*}^nu x = h`, `nabla^i x(a-1) = 0` (`i < N-1`), `nabla^j x(b) = 0`.
pub fn greens_closed_form(order: Order, j: usize, base: f64, span: i64) -> Result<GreensKernel> {
    let n = order.n_ceil();
    if n < 2 {
        return Err(Error::Inadmissible(format!("order {} must exceed 1", order.nu())));
    }
    let shape = BvpShape::new(order, base, span, n - 1, vec![j])?;
    let nu = order.nu();
    let left = exact::to_f64(&exact::monomial_int(n as i64 - j as i64 - 1, span + 1)?);
    let grid = shape.solution_grid();
    let columns = (1..=span)
        .map(|s| -> Result<(Vec<f64>, Vec<f64>)> {
            let coef = monomial_at(nu - j as f64 - 1.0, span - rho(s, 0))? / left;
            let mut g = Vec::with_capacity(grid.len());
            let mut u = Vec::with_capacity(grid.len());
            for t in grid.offsets() {
                let ut = exact::to_f64(&exact::monomial_int(n as i64 - 1, t + 1)?) * coef;
                let jump = if t >= rho(s, 0) {
                    monomial_at(nu - 1.0, t - rho(s, 0))?
                } else {
                    0.0
                };
                u.push(ut);
                g.push(ut - jump);
            }
            Ok((g, u))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(&shape, CLOSED_FORM_SIGN, left, columns))
}

/// `w(t) = sum_{s=a+1}^b G(t, s) h(s)` on `a-N+1..=b`.
pub fn solve_via_greens(kernel: &GreensKernel, h: &GridFunction) -> Result<GridFunction> {
    let shape = kernel.shape();
    if h.grid().base() != shape.base() {
        return Err(Error::GridMismatch(format!(
            "forcing base {} vs kernel base {}",
            h.grid().base(),
            shape.base()
        )));
    }
    h.grid().require(1, shape.span())?;
    let hv: Vec<f64> = (1..=shape.span()).map(|s| h.at(s)).collect();
    GridFunction::try_from_fn(shape.solution_grid(), |t| {
        Ok(kernel.row(t)?.iter().zip(&hv).map(|(g, h)| g * h).sum())
    })
}

/// Solve with arbitrary boundary data: the homogeneous-equation interpolant
/// of the boundary values plus the kernel integral of `h`.
pub fn solve_nonhomogeneous_full(spec: &BvpSpec) -> Result<GridFunction> {
    let solver = DirectSolver::new(&spec.shape)?;
    let kernel = greens_kernel(&spec.shape)?;
    solve_nonhomogeneous_with(&solver, &kernel, spec)
}

/// As [`solve_nonhomogeneous_full`], reusing a prepared solver and kernel.
pub fn solve_nonhomogeneous_with(
    solver: &DirectSolver,
    kernel: &GreensKernel,
    spec: &BvpSpec,
) -> Result<GridFunction> {
    if solver.shape() != &spec.shape || kernel.shape() != &spec.shape {
        return Err(Error::InconsistentSpec("solver or kernel built for another problem".into()));
    }
    if kernel.sign() != OperatorSign::Positive {
        return Err(Error::InconsistentSpec("kernel inverts the negated operator".into()));
    }
    let zero = GridFunction::zeros(spec.shape.rhs_grid());
    let w = solver.solve(&spec.left_values, &spec.right_values, &zero)?.x;
    let integral = solve_via_greens(kernel, &spec.rhs)?;
    GridFunction::new(
        *w.grid(),
        w.values().iter().zip(integral.values()).map(|(a, b)| a + b).collect(),
    )
}
