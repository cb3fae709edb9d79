import math

import numpy as np
import pytest

import mmrkit as mk
from mmrkit.errors import InfeasibleState, PreconditionViolated, UnsupportedRule

SQ = math.sqrt(math.pi / 2.0)


class TestCostFunctions:
    def test_vanish_at_pure_actions(self):
        for cost in (mk.LinearCost(2.0), mk.QuadraticCost(2.0), mk.ConstantCost(2.0)):
            assert mk.regret.cost_value(cost, 0.0) == 0.0
            assert mk.regret.cost_value(cost, 1.0) == 0.0
            assert mk.regret.cost_value(cost, 0.3) >= 0.0

    def test_shapes(self):
        assert mk.regret.cost_value(mk.LinearCost(2.0), 0.25) == 0.5
        assert mk.regret.cost_value(mk.QuadraticCost(2.0), 0.25) == 0.375
        assert mk.regret.cost_value(mk.ConstantCost(2.0), 0.25) == 2.0

    def test_negative_scale_rejected(self):
        with pytest.raises(ValueError):
            mk.ConstantCost(-1.0)


class TestExpectedRegret:
    def test_zero_contrast_is_free(self, fig1_study):
        for rule in (mk.Linear(2.0), mk.Threshold(), mk.CoinFlip(), mk.NoData()):
            assert mk.expected_regret(rule, fig1_study, [0.0, 0.0], 0.0) == 0.0

    def test_coin_flip_symmetric_point(self, fig1_study):
        upper = mk.welfare_bounds(fig1_study, [0.0, 0.0]).upper
        val = mk.expected_regret(mk.CoinFlip(), fig1_study, [0.0, 0.0], upper)
        assert abs(val - upper / 2.0) < 1e-12

    def test_threshold_closed_form(self, fig1_study):
        gamma = 3.0
        mu = [gamma, gamma]
        u0 = mk.welfare_bounds(fig1_study, mu).upper  # = gamma + k
        val = mk.expected_regret(mk.Threshold(c=0.0), fig1_study, mu, u0)
        expect = u0 * mk.std_normal_cdf(-gamma / fig1_study.sigma1)
        assert abs(val - expect) < 1e-12

    def test_infeasible_contrast_rejected(self, fig1_study):
        with pytest.raises(InfeasibleState):
            mk.expected_regret(mk.CoinFlip(), fig1_study, [0.0, 0.0], 25.0)

    def test_plugin_monte_carlo(self, fig1_study):
        cfg = mk.QmcConfig(seed=3, points_log2=11, replicates=4)
        val = mk.expected_regret(
            mk.PlugIn(fig1_study), fig1_study, [0.0, 0.0], 18.75, mc=cfg
        )
        # E at the symmetric point is 1/2, so regret is close to k/2
        assert abs(val - 9.375) < 0.05


class TestProfiledRegret:
    def test_linear_rule_center(self, fig1_study, fig1_solution):
        val = mk.profiled_regret(fig1_solution.rules[0], fig1_study, 0.0)
        assert abs(val - 9.375) < 1e-9

    def test_coin_flip_closed_form(self, fig1_study):
        for g in (-10.0, 0.0, 10.0, -25.0, 25.0):
            val = mk.profiled_regret(mk.CoinFlip(), fig1_study, g)
            assert abs(val - (abs(g) + 18.75) / 2.0) < 1e-12

    def test_symmetry(self, fig1_study, fig1_solution):
        rules = list(fig1_solution.rules) + [mk.Threshold(c=0.0), mk.CoinFlip()]
        for rule in rules:
            for g in (0.5, 3.0, 12.0, 21.0):
                a = mk.profiled_regret(rule, fig1_study, g)
                b = mk.profiled_regret(rule, fig1_study, -g)
                assert abs(a - b) < 1e-9

    def test_weighted_threshold_not_scalar_index(self, fig1_study):
        with pytest.raises(UnsupportedRule):
            mk.profiled_regret(mk.Threshold(c=0.0, w=(1.0, 0.7)), fig1_study, 0.0)

    def test_plugin_not_scalar_index(self, fig1_study):
        with pytest.raises(UnsupportedRule):
            mk.profiled_regret(mk.PlugIn(fig1_study), fig1_study, 0.0)


class TestWorstCase:
    def test_linear(self, fig1_study, fig1_solution):
        g, v = mk.worst_case_regret(fig1_solution.rules[0], fig1_study, (-60.0, 60.0))
        assert abs(g) < 0.05
        assert abs(v - 9.375) < 1e-3

    def test_smooth(self, fig1_study, fig1_solution):
        g, v = mk.worst_case_regret(fig1_solution.rules[1], fig1_study, (-60.0, 60.0))
        assert abs(g) < 0.05
        assert abs(v - 9.375) < 1e-3

    def test_threshold(self, fig1_study):
        g, v = mk.worst_case_regret(mk.Threshold(c=0.0), fig1_study, (-60.0, 60.0))
        assert abs(v - 12.50) < 0.05
        assert abs(g - (-4.0)) < 0.3

    def test_sandwich_mixtures_at_value_and_offset_thresholds_above(
        self, fig1_study, fig1_solution
    ):
        k = fig1_study.k
        linear, rt = fig1_solution.rules
        for w in (0.25, 0.5, 0.75):
            mix = mk.Mixture(weights=(w, 1.0 - w), components=(linear, rt))
            _, v = mk.worst_case_regret(mix, fig1_study, (-60.0, 60.0))
            assert abs(v - 0.5 * k) < 1e-3 * k
        for c in (0.5 * fig1_study.sigma1, -0.5 * fig1_study.sigma1):
            _, v = mk.worst_case_regret(mk.Threshold(c=c), fig1_study, (-60.0, 60.0))
            assert v > 0.5 * k + 1e-3


class TestNetOfCost:
    def test_threshold_costless(self, fig1_study):
        for cost in (mk.LinearCost(3.0), mk.QuadraticCost(3.0), mk.ConstantCost(3.0)):
            for g in (-5.0, 0.0, 5.0):
                net = mk.net_of_cost_profiled_regret(mk.Threshold(c=0.0), fig1_study, g, cost)
                assert net == mk.profiled_regret(mk.Threshold(c=0.0), fig1_study, g)

    def test_constant_cost_always_randomizing(self, fig1_study, fig1_solution):
        rt = fig1_solution.rules[1]
        for g in (-7.0, 0.0, 7.0):
            net = mk.net_of_cost_profiled_regret(rt, fig1_study, g, mk.ConstantCost(2.5))
            assert abs(net - (mk.profiled_regret(rt, fig1_study, g) + 2.5)) < 1e-12

    def test_constant_cost_linear_closed_form(self, fig1_study, fig1_solution):
        linear = fig1_solution.rules[0]
        rho, s = linear.rho, fig1_study.sigma1
        net = mk.net_of_cost_profiled_regret(linear, fig1_study, 0.0, mk.ConstantCost(1.0))
        expect = 9.375 + (mk.std_normal_cdf(rho / s) - mk.std_normal_cdf(-rho / s))
        assert abs(net - expect) < 1e-9
        assert abs(net - 10.375) < 1e-3

    def test_constant_cost_linear_quadrature_cross_check(self, fig1_study, fig1_solution):
        linear = fig1_solution.rules[0]
        s = fig1_study.sigma1
        for g in (0.0, 4.0, -11.0):
            closed = mk.expected_cost(linear, g, s, mk.ConstantCost(1.5))
            rho = linear.rho
            lo, hi = g - 9.0 * s, g + 9.0 * s
            tol = mk.Tolerance(1e-12, 1e-11, 200)
            quad = sum(
                mk.integrate(
                    lambda t: (1.5 if 0.0 < mk.evaluate(linear, t) < 1.0 else 0.0)
                    * mk.std_normal_pdf((t - g) / s) / s,
                    a, b, tol,
                )
                for a, b in [(lo, -rho), (-rho, rho), (rho, hi)]
            )
            assert abs(closed - quad) < 1e-9

    def test_cost_monotone_in_scale(self, fig1_study, fig1_solution):
        linear, rt = fig1_solution.rules
        for family in (mk.LinearCost, mk.QuadraticCost, mk.ConstantCost):
            for rule in (linear, rt, mk.CoinFlip(), mk.Threshold(c=0.0)):
                for g in (0.0, 5.0):
                    vals = [
                        mk.net_of_cost_profiled_regret(rule, fig1_study, g, family(c))
                        for c in (0.5, 1.0, 2.0)
                    ]
                    assert vals[0] <= vals[1] + 1e-12 <= vals[2] + 2e-12


class TestAversionThreshold:
    def test_running_example_value(self, fig1_study):
        val = mk.aversion_threshold(fig1_study)
        assert abs(val - 3.125) < 0.05

    def test_requires_large_regime(self, pointlike_study):
        with pytest.raises(PreconditionViolated):
            mk.aversion_threshold(pointlike_study)

    def test_finite_positive_as_noise_vanishes(self):
        for s1 in (0.5, 0.1, 0.02):
            study = mk.StudySet(x=[-7.5, 7.9], x0=0.0, sigma=[s1, 2.4], lipschitz_c=2.5)
            val = mk.aversion_threshold(study)
            assert math.isfinite(val) and val > 0.0

    def test_positive_where_threshold_not_optimal(self):
        for c in (1.5, 2.5, 4.0):
            study = mk.StudySet(x=[-7.5, 7.9], x0=0.0, sigma=[3.9, 2.4], lipschitz_c=c)
            assert mk.aversion_threshold(study) > 0.0


class TestDominance:
    def test_ramp_dominates_smooth(self, fig1_study, fig1_solution):
        grid = np.linspace(-30.0, 30.0, 601)
        rep = mk.dominance_check(*fig1_solution.rules, fig1_study, grid)
        assert rep.verdict is mk.Dominance.A_DOMINATES
        assert rep.strict_gaps == 600
        assert rep.crossings.size == 0

    def test_self_comparison(self, fig1_study, fig1_solution):
        grid = np.linspace(-30.0, 30.0, 121)
        rep = mk.dominance_check(
            fig1_solution.rules[0], fig1_solution.rules[0], fig1_study, grid
        )
        assert rep.verdict is mk.Dominance.A_DOMINATES
        assert rep.crossings.size == 0 and rep.strict_gaps == 0

    def test_coin_flip_is_dominated(self, fig1_study, fig1_solution):
        grid = np.linspace(-30.0, 30.0, 601)
        rep = mk.dominance_check(mk.CoinFlip(), fig1_solution.rules[0], fig1_study, grid)
        assert rep.verdict is mk.Dominance.B_DOMINATES

    def test_incomparable_pair_has_crossings(self, fig1_study):
        grid = np.linspace(-30.0, 30.0, 601)
        rep = mk.dominance_check(
            mk.Threshold(c=0.0), mk.CoinFlip(), fig1_study, grid
        )
        assert rep.verdict is mk.Dominance.INCOMPARABLE
        assert rep.crossings.size >= 2


class TestProp5:
    def test_running_example_case(self, fig1_study):
        rep = mk.prop5_case(fig1_study)
        assert rep.case == "case_i"
        assert rep.gamma_lower is None
        assert abs(rep.lhs - 2.2e-4) < 1e-5
        assert abs(rep.rhs - 0.3989423) < 1e-7

    def test_near_boundary_reports_direct_condition(self):
        s1 = 1.0
        study = mk.StudySet(
            x=[1.0, 5.0], x0=0.0, sigma=[s1, 1.0], lipschitz_c=1.001 * SQ * s1
        )
        rep = mk.prop5_case(study)
        rho = mk.solve_rho_star(study.k, s1)
        lhs = mk.std_normal_pdf(rho / s1) * (study.k / (SQ * s1)) ** 3
        assert rep.case == ("case_i" if lhs <= mk.std_normal_pdf(0.0) else "case_ii")

    def test_tail_ratio_decays(self, fig1_study, fig1_solution):
        linear, rt = fig1_solution.rules
        ratio = lambda g: mk.profiled_regret(linear, fig1_study, g) / mk.profiled_regret(
            rt, fig1_study, g
        )
        assert ratio(30.0) < ratio(15.0)

    def test_crossing_solver_on_artificial_ramp(self):
        # an over-wide ramp adopts more slowly near the center, so its
        # adoption curve starts below the smooth one and crosses it once
        k, sigma, rho = 2.0, 1.0, 3.0
        slope_gap = (mk.std_normal_cdf(rho / sigma) - mk.std_normal_cdf(-rho / sigma)) / (
            2.0 * rho
        ) - 0.5 / k
        assert slope_gap < 0.0  # crossing exists for this ramp
        g_low = mk.prop5_gamma_lower(k, sigma, rho)
        assert g_low > 0.0
        ramp = mk.Linear(rho)
        h = lambda g: mk.adoption_probability(ramp, g, sigma) - mk.std_normal_cdf(g / (k / SQ))
        assert abs(h(g_low)) < 1e-9
        assert h(0.5 * g_low) < 0.0 < h(1.5 * g_low)

    def test_requires_large_regime(self, pointlike_study):
        with pytest.raises(PreconditionViolated):
            mk.prop5_case(pointlike_study)


class TestRegretCurve:
    def test_four_rule_maxima(self, fig1_study, fig1_solution):
        grid = np.linspace(-30.0, 30.0, 601)
        rules = list(fig1_solution.rules) + [mk.Threshold(c=0.0), mk.CoinFlip()]
        curves = mk.regret_curve(rules, fig1_study, grid)
        maxima = [float(np.max(c.regret)) for c in curves]
        assert abs(maxima[0] - 9.375) < 1e-3
        assert abs(maxima[1] - 9.375) < 1e-3
        assert abs(maxima[2] - 12.50) < 0.05
        assert abs(maxima[3] - 24.375) < 1e-9
        assert [c.rule_label for c in curves] == [
            "d_linear", "d_rt", "d_threshold0", "d_coinflip",
        ]

    def test_empty_rule_list(self, fig1_study):
        assert mk.regret_curve([], fig1_study, np.linspace(-1, 1, 5)) == []

    def test_mixture_between_components(self, fig1_study, fig1_solution):
        grid = np.linspace(-30.0, 30.0, 301)
        linear, rt = fig1_solution.rules
        mix = mk.Mixture(weights=(0.5, 0.5), components=(linear, rt))
        cl, cr, cm = mk.regret_curve([linear, rt, mix], fig1_study, grid)
        upper = np.maximum(cl.regret, cr.regret)
        assert np.all(cm.regret <= upper + 1e-12)
        blend = 0.5 * cl.regret + 0.5 * cr.regret
        assert np.max(np.abs(cm.regret - blend)) < 1e-9

    def test_workers_do_not_change_results(self, fig1_study, fig1_solution):
        grid = np.linspace(-10.0, 10.0, 51)
        rules = list(fig1_solution.rules)
        a = mk.regret_curve(rules, fig1_study, grid, workers=1)
        b = mk.regret_curve(rules, fig1_study, grid, workers=4)
        for ca, cb in zip(a, b):
            assert np.array_equal(ca.regret, cb.regret)


class TestShapeProperties:
    def test_positive_branch_single_slope_change(self, fig1_study, fig1_solution):
        linear = fig1_solution.rules[0]
        k, s = fig1_study.k, fig1_study.sigma1
        grid = np.linspace(-k, 40.0, 2000)
        g_vals = np.array(
            [(g + k) * (1.0 - mk.adoption_probability(linear, float(g), s)) for g in grid]
        )
        slopes = np.diff(g_vals)
        signs = np.sign(slopes[np.abs(slopes) > 1e-14])
        changes = int(np.sum(np.diff(signs) != 0))
        assert changes == 1
        flip = int(np.flatnonzero(np.diff(np.sign(slopes)) != 0)[0])
        assert abs(float(grid[flip])) <= float(grid[1] - grid[0]) + 1e-12

    def test_first_order_condition_at_center(self, fig1_study, fig1_solution):
        linear = fig1_solution.rules[0]
        k, s = fig1_study.k, fig1_study.sigma1
        h = 1e-5
        g = lambda x: (x + k) * (1.0 - mk.adoption_probability(linear, x, s))
        fd = (g(h) - g(-h)) / (2.0 * h)
        assert abs(fd) < 1e-5 * k

    def test_coin_flip_profile_minimized_at_center(self, fig1_study, fig1_solution):
        grid = np.linspace(-30.0, 30.0, 601)
        prof = np.array([mk.profiled_regret(mk.CoinFlip(), fig1_study, float(g)) for g in grid])
        closed = (np.abs(grid) + fig1_study.k) / 2.0
        assert np.max(np.abs(prof - closed)) < 1e-9
        assert np.argmin(prof) == 300
        assert abs(prof[300] - fig1_solution.mmr_value) < 1e-12

    def test_coin_flip_exceeds_ramp_off_center(self, fig1_study, fig1_solution):
        grid = np.linspace(-30.0, 30.0, 601)
        linear = fig1_solution.rules[0]
        for g in grid:
            if g == 0.0:
                continue
            gap = mk.profiled_regret(mk.CoinFlip(), fig1_study, float(g)) - mk.profiled_regret(
                linear, fig1_study, float(g)
            )
            assert gap > 0.0


class TestPluginCurve:
    def test_center_value_and_determinism(self, fig1_study):
        grid = np.linspace(-12.0, 12.0, 9)
        cfg = mk.QmcConfig(seed=5, points_log2=11, replicates=4)
        curve_a, se_a = mk.plugin_regret_curve(fig1_study, grid, cfg, inner_grid=9)
        curve_b, _ = mk.plugin_regret_curve(fig1_study, grid, cfg, inner_grid=9)
        assert np.array_equal(curve_a.regret, curve_b.regret)
        center = curve_a.regret[4]
        assert center > 9.375 - 0.02  # not below the minimax value (mc slack)
        assert center < 10.0  # but close to it
        assert np.all(se_a >= 0.0)

    def test_seed_changes_stream(self, fig1_study):
        grid = np.array([0.0])
        a, _ = mk.plugin_regret_curve(fig1_study, grid, mk.QmcConfig(seed=1, points_log2=10, replicates=2), inner_grid=5)
        b, _ = mk.plugin_regret_curve(fig1_study, grid, mk.QmcConfig(seed=2, points_log2=10, replicates=2), inner_grid=5)
        assert a.regret[0] != b.regret[0]

    def test_needs_two_signals(self, pointlike_study):
        with pytest.raises(UnsupportedRule):
            mk.plugin_regret_curve(pointlike_study, np.array([0.0]))
