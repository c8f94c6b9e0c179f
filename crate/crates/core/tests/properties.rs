use proptest::prelude::*;

use nabla_frac::bvp::{
    bvp_solve_direct, general_solution_basis, ivp_solve, residuals, BvpShape, BvpSpec,
    InitialConditions, IvpSpec,
};
use nabla_frac::calculus::{caputo_diff, frac_sum, nabla_at, nabla_diff, nabla_integral};
use nabla_frac::exact::{self, Rational};
use nabla_frac::greens::{greens_closed_form, greens_kernel, solve_via_greens};
use nabla_frac::linalg;
use nabla_frac::lyapunov::{
    check_nontrivial, lyapunov_threshold, solve_weighted_bvp, weighted_residuals,
    BoundaryPattern, Variant,
};
use nabla_frac::special::{gamma, monomial_at};
use nabla_frac::{Grid, GridFunction, Order};

fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}

fn grid_values(lo: i64, hi: i64) -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-1.0..1.0f64, (hi - lo + 1) as usize)
        .prop_map(move |v| GridFunction::new(Grid::new(0.0, lo, hi).unwrap(), v).unwrap())
}

fn order() -> impl Strategy<Value = Order> {
    (1.05..4.95f64).prop_map(|nu| Order::new(nu).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_recurrence(z in 0.1..20.0f64) {
        prop_assert!(rel_close(gamma(z + 1.0), z * gamma(z), 1e-12));
    }

    #[test]
    fn monomial_difference_lowers_order(mu in -0.9..5.0f64, gap in 2i64..25) {
        let d = monomial_at(mu, gap).unwrap() - monomial_at(mu, gap - 1).unwrap();
        prop_assert!(rel_close(d, monomial_at(mu - 1.0, gap).unwrap(), 1e-10));
    }

    #[test]
    fn monomial_positive_and_monotone(
        alpha in 0.0..5.0f64,
        beta in 0.0..5.0f64,
        gap in 1i64..25,
    ) {
        let h = monomial_at(alpha, gap).unwrap();
        prop_assert!(h > 0.0);
        // nondecreasing in t for fixed s, hence nonincreasing in s
        prop_assert!(monomial_at(alpha, gap + 1).unwrap() >= h * (1.0 - 1e-14));
        let (lo, hi) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
        prop_assert!(monomial_at(lo, gap).unwrap() <= monomial_at(hi, gap).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn power_rule(alpha in 0.0..3.0f64, mu in 0.1..3.0f64, span in 1i64..20) {
        let f = GridFunction::try_from_fn(Grid::new(0.0, 1, span).unwrap(), |t| monomial_at(alpha, t)).unwrap();
        let s = frac_sum(&f, mu, 0).unwrap();
        for t in 1..=span {
            prop_assert!(rel_close(s.get(t).unwrap(), monomial_at(alpha + mu, t).unwrap(), 1e-10));
        }
    }

    #[test]
    fn fractional_sums_compose(
        f in grid_values(1, 15),
        mu in 0.1..2.5f64,
        nu in 0.1..2.5f64,
    ) {
        let two_steps = frac_sum(&frac_sum(&f, nu, 0).unwrap(), mu, 0).unwrap();
        let one_step = frac_sum(&f, mu + nu, 0).unwrap();
        for t in 1..=15 {
            prop_assert!(rel_close(two_steps.get(t).unwrap(), one_step.get(t).unwrap(), 1e-10));
        }
    }

    #[test]
    fn sum_of_differences_telescopes(f in grid_values(-3, 12), c in -3i64..5, d in 5i64..12) {
        let df = nabla_diff(&f, 1).unwrap();
        let lhs = nabla_integral(&df, c, d).unwrap();
        prop_assert!(rel_close(lhs, f.get(d).unwrap() - f.get(c).unwrap(), 1e-12));
    }

    #[test]
    fn pointwise_and_vector_differences_agree(f in grid_values(0, 12), k in 0usize..6) {
        let d = nabla_diff(&f, k).unwrap();
        for t in k as i64..=12 {
            prop_assert!(rel_close(d.get(t).unwrap(), nabla_at(&f, k, t).unwrap(), 1e-12));
        }
    }

    #[test]
    fn leibniz_rule_exact(
        f in prop::collection::vec(-50i64..50, 10),
        g in prop::collection::vec(-50i64..50, 10),
    ) {
        let f: Vec<Rational> = f.into_iter().map(exact::int).collect();
        let g: Vec<Rational> = g.into_iter().map(exact::int).collect();
        for t in 1..10 {
            let lhs = &f[t] * &g[t] - &f[t - 1] * &g[t - 1];
            let rhs = &f[t] * (&g[t] - &g[t - 1]) + (&f[t] - &f[t - 1]) * &g[t - 1];
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn caputo_annihilates_low_degree(o in order(), span in 1i64..12) {
        let grid = Grid::new(0.0, 1 - o.n(), span).unwrap();
        for h in general_solution_basis(o, 0, &grid).unwrap() {
            let c = caputo_diff(&h, o, 0).unwrap();
            prop_assert!(c.values().iter().all(|v| v.abs() < 1e-9 * h.max_abs().max(1.0)));
        }
    }

    #[test]
    fn homogeneous_ivp_lies_in_basis_span(
        o in order(),
        init in prop::collection::vec(-1.0..1.0f64, 5),
        span in 1i64..12,
    ) {
        let n = o.n_ceil();
        let spec = IvpSpec {
            order: o,
            a: 0,
            rhs: GridFunction::zeros(Grid::new(0.0, 1, span).unwrap()),
            initial: InitialConditions::PointValues(init[..n].to_vec()),
            potential: None,
        };
        let x = ivp_solve(&spec).unwrap();
        let basis = general_solution_basis(o, 0, x.grid()).unwrap();
        let cols: Vec<Vec<f64>> = (0..x.grid().len())
            .map(|i| basis.iter().map(|b| b.values()[i]).collect())
            .collect();
        let r = linalg::least_squares_residual(&cols, x.values());
        prop_assert!(r < 1e-8 * x.max_abs().max(1.0), "residual {}", r);
    }

    #[test]
    fn direct_bvp_solution_satisfies_problem(
        o in order(),
        k_pick in 0usize..4,
        span in 5i64..12,
        h in grid_values(1, 11),
        data in prop::collection::vec(-1.0..1.0f64, 5),
    ) {
        let n = o.n_ceil();
        prop_assume!(n >= 2);
        let k = 1 + k_pick % (n - 1);
        let shape = BvpShape::new(o, 0.0, span, k, (0..n - k).collect()).unwrap();
        let spec = BvpSpec::new(shape, data[..k].to_vec(), data[k..n].to_vec(), h).unwrap();
        let sol = bvp_solve_direct(&spec).unwrap();
        let res = residuals(&spec, &sol.x).unwrap();
        let scale = sol.x.max_abs().max(1.0);
        prop_assert!(res.equation < 1e-8 * scale && res.boundary < 1e-8 * scale);
    }

    #[test]
    fn greens_solution_has_zero_boundary_data(o in order(), span in 4i64..10, h in grid_values(1, 9)) {
        let n = o.n_ceil();
        prop_assume!(n >= 2);
        let shape = BvpShape::new(o, 0.0, span, n - 1, vec![0]).unwrap();
        let kernel = greens_kernel(&shape).unwrap();
        let x = solve_via_greens(&kernel, &h).unwrap();
        let spec = BvpSpec::homogeneous_data(shape, h).unwrap();
        let res = residuals(&spec, &x).unwrap();
        let scale = x.max_abs().max(1.0);
        prop_assert!(res.equation < 1e-8 * scale && res.boundary < 1e-8 * scale);
    }

    #[test]
    fn closed_form_is_negated_general_kernel(o in order(), j_pick in 0usize..5, span in 4i64..10) {
        let n = o.n_ceil();
        prop_assume!(n >= 2);
        let j = j_pick % n;
        prop_assume!(span >= BvpShape::min_span(n, n - 1, &[j]));
        let general = greens_kernel(&BvpShape::new(o, 0.0, span, n - 1, vec![j]).unwrap()).unwrap();
        let closed = greens_closed_form(o, j, 0.0, span).unwrap();
        for t in general.t_lo()..=general.t_hi() {
            for s in 1..=span {
                let (g, c) = (general.get(t, s).unwrap(), closed.get(t, s).unwrap());
                prop_assert!(rel_close(g, -c, 1e-9), "G({t},{s}): {g} vs {c}");
            }
        }
    }

    #[test]
    fn weighted_problem_uniquely_solvable_when_nonsingular(
        nu in 2.05..4.95f64,
        span in 4i64..10,
        q in grid_values(1, 9),
        f in grid_values(1, 9),
        values in prop::collection::vec(-1.0..1.0f64, 5),
        pick in 0usize..16,
    ) {
        let o = Order::new(nu).unwrap();
        let n = o.n_ceil();
        let patterns = BoundaryPattern::enumerate(n);
        let pattern = &patterns[pick % patterns.len()];
        prop_assume!(!check_nontrivial(o, span, &q, pattern).unwrap());
        let x = solve_weighted_bvp(o, span, &q, pattern, &f, &values[..n]).unwrap();
        let (eq, bc) = weighted_residuals(o, span, &q, pattern, &f, &values[..n], &x).unwrap();
        let scale = x.max_abs().max(1.0);
        prop_assert!(eq < 1e-8 * scale && bc < 1e-8 * scale);
        // zero data gives the zero solution
        let zero = GridFunction::zeros(*f.grid());
        let x0 = solve_weighted_bvp(o, span, &q, pattern, &zero, &vec![0.0; n]).unwrap();
        prop_assert!(x0.max_abs() == 0.0);
    }

    #[test]
    fn thresholds_decrease_with_span(nu in 2.05..4.95f64, span in 4i64..30) {
        let o = Order::new(nu).unwrap();
        for v in [Variant::ConjugateA, Variant::FocalH2] {
            let here = lyapunov_threshold(o, span, v).unwrap();
            let next = lyapunov_threshold(o, span + 1, v).unwrap();
            prop_assert!(here > 0.0 && next < here);
        }
    }

    #[test]
    fn grid_function_json_round_trip(f in grid_values(-4, 9)) {
        let text = serde_json::to_string(&f).unwrap();
        let back: GridFunction = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }
}
