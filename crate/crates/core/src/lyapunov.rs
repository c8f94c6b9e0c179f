//! Lyapunov-type inequalities for
//!
//! ```text
//! nabla_{a*}^nu x(t) + q(t) x(t-1) = 0,   t in a+1..=b
//! ```
//!
//! under boundary conditions that pin `nabla^{N-2} x` at `a-1`, one more
//! condition at `b`, and `nabla^i x(c_i) = 0` with `c_i` in `{a-1, b}` for
//! `i < N-2`. If a nontrivial solution exists then `int_a^b |q|` is bounded
//! below by an explicit threshold.
//!
//! Offsets are relative to `a`; `span = b - a`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{binomial, caputo_diff, caputo_stencil, nabla_at, rho};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::linalg::{self, Matrix};
use crate::special::{monomial_at, Order};

/// Relative singular-value cutoff below which a system counts as singular.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// The instance sampler rejects a draw when some `|x(t)|`, `t` in `a..b`,
/// falls below `MIN_SAMPLE_ABS` times that point's own scale
/// `sqrt(P[t][t])`, with `P` the projector onto the admissible `x`.
pub const MIN_SAMPLE_ABS: f64 = 0.05;

const SAMPLE_BUDGET: usize = 2000;

/// `H_2(b, a-1)` for `b - a = span`.
fn h2_full(span: i64) -> f64 {
    ((span + 1) * (span + 2)) as f64 / 2.0
}

/// The threshold family, tied to the right-hand condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// `nabla^{N-2} x(b) = 0`; threshold built on the constant `A`.
    #[serde(rename = "conjugate_A")]
    ConjugateA,
    /// `nabla^{N-1} x(b) = 0`; threshold built on `H_2(b, a-1)`.
    #[serde(rename = "focal_H2")]
    FocalH2,
}

impl Variant {
    /// `r` in `nabla^{N-r} x(b) = 0`.
    pub fn r(self) -> usize {
        match self {
            Variant::ConjugateA => 2,
            Variant::FocalH2 => 1,
        }
    }

    pub fn from_r(r: usize) -> Result<Self> {
        match r {
            2 => Ok(Variant::ConjugateA),
            1 => Ok(Variant::FocalH2),
            _ => Err(Error::Inadmissible(format!("r = {r} must be 1 or 2"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::ConjugateA => "conjugate_A",
            Variant::FocalH2 => "focal_H2",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conjugate_A" | "conjugate" => Ok(Variant::ConjugateA),
            "focal_H2" | "focal" => Ok(Variant::FocalH2),
            _ => Err(Error::Inadmissible(format!(
                "unknown variant {s:?} (expected conjugate_A or focal_H2)"
            ))),
        }
    }
}

/// Where a lower-order condition `nabla^i x(c_i) = 0` sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    /// `a - 1`
    Left,
    /// `b`
    Right,
}

impl Endpoint {
    fn offset(self, span: i64) -> i64 {
        match self {
            Endpoint::Left => -1,
            Endpoint::Right => span,
        }
    }
}

/// Full boundary pattern: the variant plus `c_0, ..., c_{N-3}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryPattern {
    pub variant: Variant,
    pub placements: Vec<Endpoint>,
}

impl BoundaryPattern {
    pub fn new(variant: Variant, placements: Vec<Endpoint>) -> Self {
        BoundaryPattern { variant, placements }
    }

    /// All `c_i` at `a - 1`.
    pub fn all_left(variant: Variant, n: usize) -> Self {
        BoundaryPattern::new(variant, vec![Endpoint::Left; n.saturating_sub(2)])
    }

    /// Every pattern for order `N`: both variants times `2^{N-2}` placements.
    pub fn enumerate(n: usize) -> Vec<Self> {
        let m = n.saturating_sub(2);
        let mut out = Vec::with_capacity(2 << m);
        for variant in [Variant::ConjugateA, Variant::FocalH2] {
            for mask in 0..1usize << m {
                let placements = (0..m)
                    .map(|i| if mask >> i & 1 == 1 { Endpoint::Right } else { Endpoint::Left })
                    .collect();
                out.push(BoundaryPattern::new(variant, placements));
            }
        }
        out
    }

    fn validate(&self, n: usize) -> Result<()> {
        if n < 3 {
            return Err(Error::Inadmissible(format!("N = {n} must be at least 3")));
        }
        if self.placements.len() != n - 2 {
            return Err(Error::Inadmissible(format!(
                "expected {} placements for N = {n}, got {}",
                n - 2,
                self.placements.len()
            )));
        }
        Ok(())
    }

    /// `(order of difference, offset)` for every boundary condition.
    fn conditions(&self, n: usize, span: i64) -> Vec<(usize, i64)> {
        let mut c = vec![(n - 2, -1), (n - self.variant.r(), span)];
        c.extend(self.placements.iter().enumerate().map(|(i, e)| (i, e.offset(span))));
        c
    }

    /// Compact label such as `conjugate_A[a-1,b]`.
    pub fn label(&self) -> String {
        let parts: Vec<&str> = self
            .placements
            .iter()
            .map(|e| match e {
                Endpoint::Left => "a-1",
                Endpoint::Right => "b",
            })
            .collect();
        format!("{}[{}]", self.variant.name(), parts.join(","))
    }
}

impl std::str::FromStr for BoundaryPattern {
    type Err = Error;

    /// Parses the output of [`BoundaryPattern::label`].
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once('[').unwrap_or((s, "]"));
        let inner = rest
            .strip_suffix(']')
            .ok_or_else(|| Error::Inadmissible(format!("malformed pattern {s:?}")))?;
        let placements = inner
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| match p.trim() {
                "a-1" | "left" => Ok(Endpoint::Left),
                "b" | "right" => Ok(Endpoint::Right),
                other => Err(Error::Inadmissible(format!("unknown endpoint {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundaryPattern::new(name.parse()?, placements))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 1.0 && gamma <= 2.0) {
        return Err(Error::Domain(format!("gamma = {gamma} outside (1, 2]")));
    }
    Ok(())
}

/// `A = max{ H_{g-1}(b,a) / H_1(b,a-1) * H_2(b,a-1), H_g(b,a) }`.
pub fn constant_a(gamma: f64, span: i64) -> Result<f64> {
    check_gamma(gamma)?;
    if span < 1 {
        return Err(Error::Domain(format!("b - a = {span} must be positive")));
    }
    let first = monomial_at(gamma - 1.0, span)? / (span + 1) as f64 * h2_full(span);
    Ok(first.max(monomial_at(gamma, span)?))
}

/// Which partial integral of the order-`gamma` kernel in its first argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `int_{a-1}^t`
    Left,
    /// `int_t^b`
    Right,
}

/// The two nonnegative terms `(f, g)` with `int G_gamma(tau, s) = f - g`,
/// for the closed-form `(1, 1)` kernel with right condition `nabla^j x(b)`.
pub fn greens_integral_terms(
    gamma: f64,
    j: usize,
    span: i64,
    t: i64,
    s: i64,
    side: Side,
) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    if j > 1 {
        return Err(Error::Domain(format!("j = {j} must be 0 or 1")));
    }
    if span < 1 || !(-1..=span).contains(&t) || !(1..=span).contains(&s) {
        return Err(Error::Domain(format!(
            "(t, s) = ({t}, {s}) outside the kernel domain for b - a = {span}"
        )));
    }
    let rs = rho(s, 0);
    let denom = if j == 0 { (span + 1) as f64 } else { 1.0 };
    let coef = monomial_at(gamma - j as f64 - 1.0, span - rs)? / denom;
    let h2 = |t: i64| ((t + 1) * (t + 2)) as f64 / 2.0;
    match side {
        Side::Left => {
            let jump = if t > rs { monomial_at(gamma, t - rs)? } else { 0.0 };
            Ok((coef * h2(t), jump))
        }
        Side::Right => {
            let jump = monomial_at(gamma, span - rs)? - monomial_at(gamma, t.max(rs) - rs)?;
            Ok((coef * (h2(span) - h2(t)), jump))
        }
    }
}

/// Closed form of `int_{a-1}^t G_gamma(tau, s) nabla tau` (left) or
/// `int_t^b G_gamma(tau, s) nabla tau` (right).
pub fn greens_integral(gamma: f64, j: usize, span: i64, t: i64, s: i64, side: Side) -> Result<f64> {
    let (f, g) = greens_integral_terms(gamma, j, span, t, s, side)?;
    Ok(f - g)
}

/// Bound on `|int G_gamma|`: `A` for `j = 0`, `H_2(b, a-1)` for `j = 1`.
pub fn greens_integral_bound(gamma: f64, j: usize, span: i64) -> Result<f64> {
    match j {
        0 => constant_a(gamma, span),
        1 => Ok(h2_full(span)),
        _ => Err(Error::Domain(format!("j = {j} must be 0 or 1"))),
    }
}

fn check_order(order: Order, span: i64) -> Result<()> {
    if order.nu() <= 2.0 {
        return Err(Error::Inadmissible(format!("order {} must exceed 2", order.nu())));
    }
    if span < order.n() - 1 {
        return Err(Error::Inadmissible(format!(
            "b - a = {span} below N - 1 = {}",
            order.n() - 1
        )));
    }
    Ok(())
}

/// `1 / (A (b-a+1)^{N-2})` or `1 / (H_2(b, a-1) (b-a+1)^{N-2})`.
pub fn lyapunov_threshold(order: Order, span: i64, variant: Variant) -> Result<f64> {
    check_order(order, span)?;
    let n = order.n();
    let gamma = order.nu() - n as f64 + 2.0;
    let c = match variant {
        Variant::ConjugateA => constant_a(gamma, span)?,
        Variant::FocalH2 => h2_full(span),
    };
    Ok(1.0 / (c * ((span + 1) as f64).powi(n as i32 - 2)))
}

/// `int_a^b |q(s)| nabla s`.
pub fn q_integral(q: &GridFunction, span: i64) -> Result<f64> {
    q.grid().require(1, span)?;
    Ok((1..=span).map(|t| q.at(t).abs()).sum())
}

fn difference_row(order: usize, at: i64, lo: i64, width: usize) -> Vec<f64> {
    let mut row = vec![0.0; width];
    for m in 0..=order {
        let c = binomial(order, m);
        row[(at - m as i64 - lo) as usize] += if m % 2 == 0 { c } else { -c };
    }
    row
}

/// Rows of the boundary conditions over the unknowns `x(a-N+1..=b)`.
fn boundary_rows(order: Order, span: i64, pattern: &BoundaryPattern) -> Result<Matrix> {
    let n = order.n_ceil();
    pattern.validate(n)?;
    let lo = 1 - order.n();
    let width = (span - lo + 1) as usize;
    Ok(pattern
        .conditions(n, span)
        .into_iter()
        .map(|(i, at)| difference_row(i, at, lo, width))
        .collect())
}

fn equation_row(order: Order, span: i64, t: i64, q: f64) -> Result<Vec<f64>> {
    let lo = 1 - order.n();
    let mut row = caputo_stencil(order, 0, t)?;
    row.resize((span - lo + 1) as usize, 0.0);
    row[(t - 1 - lo) as usize] += q;
    Ok(row)
}

/// The square homogeneous system of the equation plus boundary conditions
/// in the unknowns `x(a-N+1..=b)`.
pub fn system_matrix(
    order: Order,
    span: i64,
    q: &GridFunction,
    pattern: &BoundaryPattern,
) -> Result<Matrix> {
    check_order(order, span)?;
    q.grid().require(1, span)?;
    let mut m = (1..=span)
        .map(|t| equation_row(order, span, t, q.at(t)))
        .collect::<Result<Matrix>>()?;
    m.extend(boundary_rows(order, span, pattern)?);
    Ok(m)
}

/// Whether the homogeneous problem has a nontrivial solution, i.e. whether
/// `sigma_min / sigma_max` of its matrix falls below [`RANK_TOLERANCE`].
pub fn check_nontrivial(
    order: Order,
    span: i64,
    q: &GridFunction,
    pattern: &BoundaryPattern,
) -> Result<bool> {
    Ok(linalg::singular_value_ratio(&system_matrix(order, span, q, pattern)?) < RANK_TOLERANCE)
}

/// `q(t) = -nabla_{a*}^nu x(t) / x(t-1)`, rejecting any `x` with
/// `|x(t-1)| < min_abs` somewhere on `a..b`.
pub fn potential_from_solution(order: Order, x: &GridFunction, min_abs: f64) -> Result<GridFunction> {
    let span = x.grid().hi();
    let cap = caputo_diff(x, order, 0)?;
    GridFunction::try_from_fn(x.grid().with_range(1, span)?, |t| {
        let prev = x.at(t - 1);
        if !(prev.abs() >= min_abs) {
            return Err(Error::Inadmissible(format!(
                "planted solution has |x({})| = {} < {min_abs}",
                t - 1,
                prev.abs()
            )));
        }
        Ok(-cap.at(t) / prev)
    })
}

/// A potential `q` together with a nontrivial solution `x` of the
/// homogeneous problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalInstance {
    pub q: GridFunction,
    pub x: GridFunction,
    /// Points of `a..b` where every admissible `x` vanishes; there `q` is
    /// drawn freely instead of being solved for.
    pub forced_zeros: Vec<i64>,
    pub attempts: usize,
}

/// Points of `a..b` where the projector has (numerically) zero diagonal.
fn forced_zeros(projector: &Matrix, lo: i64, span: i64) -> Vec<i64> {
    (0..span)
        .filter(|&t| projector[(t - lo) as usize][(t - lo) as usize] < 1e-12)
        .collect()
}

/// Draw `x` satisfying the boundary pattern and nowhere small on `a..b`,
/// then solve for the `q` that makes it a solution.
///
/// Some placements force `x` to vanish at points of `a..b` (for example
/// `x(b) = nabla x(b) = 0` forces `x(b-1) = 0`). At such a point `t-1` the
/// equation at `t` no longer involves `q(t)`, so it is added as a
/// constraint on `x` and `q(t)` is drawn at random.
pub fn synth_critical_instance(
    order: Order,
    span: i64,
    pattern: &BoundaryPattern,
    seed: u64,
) -> Result<CriticalInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    synth_with_rng(order, span, pattern, &mut rng)
}

pub fn synth_with_rng(
    order: Order,
    span: i64,
    pattern: &BoundaryPattern,
    rng: &mut impl Rng,
) -> Result<CriticalInstance> {
    check_order(order, span)?;
    let lo = 1 - order.n();
    let width = (span - lo + 1) as usize;
    let mut constraints = boundary_rows(order, span, pattern)?;
    let mut forced: Vec<i64> = Vec::new();
    let projector = loop {
        let p = linalg::null_space_projector(&constraints, width, 1e-12);
        let zeros = forced_zeros(&p, lo, span);
        let fresh: Vec<i64> = zeros.into_iter().filter(|z| !forced.contains(z)).collect();
        if fresh.is_empty() {
            break p;
        }
        for z in fresh {
            constraints.push(equation_row(order, span, z + 1, 0.0)?);
            forced.push(z);
        }
        if forced.len() == span as usize {
            return Err(Error::BudgetExhausted {
                attempts: 0,
                reason: "boundary pattern forces x to vanish on all of a..b".into(),
            });
        }
    };
    forced.sort_unstable();
    let grid = Grid::new(0.0, lo, span)?;
    for attempt in 1..=SAMPLE_BUDGET {
        let z: Vec<f64> = (0..width).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mut xv = linalg::mat_vec(&projector, &z);
        let small = (0..span).filter(|t| !forced.contains(t)).any(|t| {
            let i = (t - lo) as usize;
            xv[i].abs() < MIN_SAMPLE_ABS * projector[i][i].sqrt()
        });
        if small {
            continue;
        }
        let scale = xv.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        xv.iter_mut().for_each(|v| *v /= scale);
        for &t in &forced {
            xv[(t - lo) as usize] = 0.0;
        }
        let x = GridFunction::new(grid, xv)?;
        let cap = caputo_diff(&x, order, 0)?;
        let q = GridFunction::from_fn(grid.with_range(1, span)?, |t| {
            if forced.contains(&(t - 1)) {
                rng.random_range(-1.0..=1.0)
            } else {
                -cap.at(t) / x.at(t - 1)
            }
        });
        return Ok(CriticalInstance {
            q,
            x,
            forced_zeros: forced,
            attempts: attempt,
        });
    }
    Err(Error::BudgetExhausted {
        attempts: SAMPLE_BUDGET,
        reason: format!("no sample with |x| >= {MIN_SAMPLE_ABS} sqrt(P_tt) on a..b"),
    })
}

/// Largest equation and boundary violations of `x` for the weighted problem
/// with forcing `f` and boundary values `values` (ordered as
/// `nabla^{N-2} x(a-1)`, the condition at `b`, then `C_0, ..., C_{N-3}`).
pub fn weighted_residuals(
    order: Order,
    span: i64,
    q: &GridFunction,
    pattern: &BoundaryPattern,
    f: &GridFunction,
    values: &[f64],
    x: &GridFunction,
) -> Result<(f64, f64)> {
    let cap = caputo_diff(x, order, 0)?;
    let mut eq = 0.0_f64;
    for t in 1..=span {
        eq = eq.max((cap.at(t) + q.at(t) * x.at(t - 1) - f.at(t)).abs());
    }
    let mut bc = 0.0_f64;
    for ((i, at), v) in pattern.conditions(order.n_ceil(), span).into_iter().zip(values) {
        bc = bc.max((nabla_at(x, i, at)? - v).abs());
    }
    Ok((eq, bc))
}

/// Solve `nabla_{a*}^nu x + q x(t-1) = f` with boundary values `values`
/// (ordered as in [`weighted_residuals`]).
pub fn solve_weighted_bvp(
    order: Order,
    span: i64,
    q: &GridFunction,
    pattern: &BoundaryPattern,
    f: &GridFunction,
    values: &[f64],
) -> Result<GridFunction> {
    let n = order.n_ceil();
    if values.len() != n {
        return Err(Error::InconsistentSpec(format!(
            "expected {n} boundary values, got {}",
            values.len()
        )));
    }
    f.grid().require(1, span)?;
    let m = system_matrix(order, span, q, pattern)?;
    let mut rhs: Vec<f64> = (1..=span).map(|t| f.at(t)).collect();
    rhs.extend_from_slice(values);
    let x = linalg::solve(&m, &rhs)?;
    GridFunction::new(Grid::new(f.grid().base(), 1 - order.n(), span)?, x)
}

/// `int |q| < threshold`, which guarantees unique solvability.
pub fn uniqueness_sufficient(order: Order, span: i64, q: &GridFunction, variant: Variant) -> Result<bool> {
    Ok(q_integral(q, span)? < lyapunov_threshold(order, span, variant)?)
}

/// Whether the only solution of the weighted equation that vanishes on
/// `a..b-1` is zero. The remaining unknowns are the history
/// `x(a-N+1..=a-1)` and `x(b)`; the check is that the equations have full
/// column rank in them. This needs `b - a >= N`: on the shortest grid
/// `b - a = N - 1` there are `N - 1` equations for `N` unknowns.
pub fn vanishing_forces_zero(order: Order, span: i64, q: &GridFunction) -> Result<bool> {
    if order.nu() <= 1.0 || span < order.n() - 1 {
        return Err(Error::Inadmissible(format!(
            "need order > 1 and b - a >= N - 1, got {} and {span}",
            order.nu()
        )));
    }
    q.grid().require(1, span)?;
    let lo = 1 - order.n();
    let free: Vec<i64> = (lo..0).chain(std::iter::once(span)).collect();
    let rows = (1..=span)
        .map(|t| {
            let full = equation_row(order, span, t, q.at(t))?;
            Ok(free.iter().map(|&c| full[(c - lo) as usize]).collect())
        })
        .collect::<Result<Matrix>>()?;
    let sv = linalg::singular_values(&rows);
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    Ok(sv.len() == free.len() && max > 0.0 && min / max > RANK_TOLERANCE)
}

/// Result of checking one instance against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub nu: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub pattern: BoundaryPattern,
    pub pattern_label: String,
    pub q: GridFunction,
    pub q_integral: f64,
    pub gamma: f64,
    #[serde(rename = "A_value")]
    pub a_value: f64,
    pub threshold: f64,
    pub threshold_kind: Variant,
    pub ratio: f64,
    pub nontrivial_exists: bool,
    pub inequality_holds: bool,
    /// Iterated integrations between the kernel bound and `x`; zero when
    /// `N = 3`, where the chain is shorter than the general argument.
    pub extra_integrations: usize,
    pub seed: Option<u64>,
}

impl LyapunovReport {
    /// A nontrivial solution below the threshold.
    pub fn is_refutation(&self) -> bool {
        self.nontrivial_exists && !self.inequality_holds
    }
}

/// Evaluate threshold, integral and nontriviality for one instance.
pub fn lyapunov_report(
    order: Order,
    base: f64,
    span: i64,
    q: &GridFunction,
    pattern: &BoundaryPattern,
    seed: Option<u64>,
) -> Result<LyapunovReport> {
    let n = order.n_ceil();
    let threshold = lyapunov_threshold(order, span, pattern.variant)?;
    let integral = q_integral(q, span)?;
    let gamma = order.nu() - n as f64 + 2.0;
    let scale = threshold.max(integral).max(1.0);
    Ok(LyapunovReport {
        nu: order.nu(),
        n,
        a: base,
        b: base + span as f64,
        pattern: pattern.clone(),
        pattern_label: pattern.label(),
        q: q.restrict(1, span)?,
        q_integral: integral,
        gamma,
        a_value: constant_a(gamma, span)?,
        threshold,
        threshold_kind: pattern.variant,
        ratio: integral / threshold,
        nontrivial_exists: check_nontrivial(order, span, q, pattern)?,
        inequality_holds: integral >= threshold - 1e-12 * scale,
        extra_integrations: n - 3,
        seed,
    })
}
