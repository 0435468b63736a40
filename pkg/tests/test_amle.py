"""Discrete infinity-harmonic (AMLE) solver and its audits."""

import numpy as np
import pytest

from mmgraph import (
    AMLEProblem,
    InputError,
    check_amle_local,
    comparison_check,
    infinity_harmonic_extend,
    mcshane_extend,
    solve_amle,
)

from conftest import make_graph, path_graph, random_geometric_graph


def star_graph(arm_lengths, leaf_values):
    """Center 0, leaves 1..k with given edge lengths."""
    k = len(arm_lengths)
    vs = [(0, 1.0)] + [(i + 1, 1.0) for i in range(k)]
    es = [(0, i + 1, float(arm_lengths[i])) for i in range(k)]
    G = make_graph(vs, es)
    boundary = tuple(range(1, k + 1))
    g = {i + 1: float(leaf_values[i]) for i in range(k)}
    return AMLEProblem(G, boundary, g)


def star_center_oracle(arm_lengths, leaf_values):
    """Bisection on the slope-balance condition at the center.

    f(t) = max_i (g_i - t)/L_i - max_i (t - g_i)/L_i is strictly
    decreasing with a unique root, the AMLE center value.
    """
    def f(t):
        up = max((g - t) / L for g, L in zip(leaf_values, arm_lengths))
        dn = max((t - g) / L for g, L in zip(leaf_values, arm_lengths))
        return up - dn

    lo, hi = min(leaf_values), max(leaf_values)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestPathProblems:
    def test_unit_path_linear(self):
        G = path_graph(11, edge_len=0.1)
        sol = solve_amle(AMLEProblem(G, (0, 10), {0: 0.0, 10: 1.0}), tol=1e-12)
        assert sol.converged
        for k in range(11):
            assert sol.u[k] == pytest.approx(k / 10, abs=1e-8)

    def test_uneven_edge_lengths(self):
        # 0 -2.0- 1 -1.0- 2: AMLE interpolates linearly in arc length
        G = make_graph(
            [(0, 1.0), (1, 1.0), (2, 1.0)],
            [(0, 1, 2.0), (1, 2, 1.0)],
        )
        sol = solve_amle(AMLEProblem(G, (0, 2), {0: 0.0, 2: 3.0}), tol=1e-12)
        assert sol.u[1] == pytest.approx(2.0, abs=1e-9)

    def test_boundary_exact(self):
        G = path_graph(5)
        g = {0: 0.123456789, 4: -3.25}
        sol = solve_amle(AMLEProblem(G, (0, 4), g))
        assert sol.u[0] == g[0]
        assert sol.u[4] == g[4]


class TestStarProblems:
    def test_symmetric_star(self):
        problem = star_graph([1.0, 1.0], [0.0, 1.0])
        sol = solve_amle(problem, tol=1e-12)
        assert sol.u[0] == pytest.approx(0.5, abs=1e-9)

    def test_four_star_matches_bisection_oracle(self):
        arms = [1.0, 2.0, 0.5, 1.5]
        vals = [0.0, 1.0, -0.5, 2.0]
        problem = star_graph(arms, vals)
        sol = solve_amle(problem, tol=1e-13)
        want = star_center_oracle(arms, vals)
        assert sol.u[0] == pytest.approx(want, abs=1e-6)

    def test_random_stars_match_oracle(self, rng):
        for _ in range(10):
            k = int(rng.integers(3, 7))
            arms = (rng.random(k) + 0.2).tolist()
            vals = rng.normal(size=k).tolist()
            problem = star_graph(arms, vals)
            sol = solve_amle(problem, tol=1e-13)
            want = star_center_oracle(arms, vals)
            assert sol.u[0] == pytest.approx(want, abs=1e-6)


class TestSolverProperties:
    def _random_problem(self, rng, n=40, frac=0.4):
        G = random_geometric_graph(rng, n)
        k = max(2, int(frac * n))
        boundary = tuple(sorted(int(v) for v in rng.choice(n, size=k, replace=False)))
        g = {v: float(rng.normal()) for v in boundary}
        return AMLEProblem(G, boundary, g)

    def test_converges_and_certifies(self, rng):
        for _ in range(5):
            problem = self._random_problem(rng)
            sol = solve_amle(problem, tol=1e-11)
            assert sol.converged
            assert sol.residual <= 1e-11
            res = check_amle_local(sol.u, problem)
            assert max(res.values(), default=0.0) <= 1e-10

    def test_maximum_principle(self, rng):
        for _ in range(5):
            problem = self._random_problem(rng)
            sol = solve_amle(problem, tol=1e-10)
            lo, hi = min(problem.g.values()), max(problem.g.values())
            vals = [x for x in sol.u.values() if not np.isnan(x)]
            assert min(vals) >= lo - 1e-9
            assert max(vals) <= hi + 1e-9

    def test_init_variants_agree(self, rng):
        problem = self._random_problem(rng, n=30)
        tol = 1e-12
        u_min = solve_amle(problem, tol=tol, init="min")
        u_max = solve_amle(problem, tol=tol, init="max")
        u_mc = solve_amle(problem, tol=tol, init="mcshane")
        for v in u_mc.u:
            assert u_min.u[v] == pytest.approx(u_max.u[v], abs=1e-9)
            assert u_min.u[v] == pytest.approx(u_mc.u[v], abs=1e-9)

    def test_explicit_init(self, rng):
        problem = self._random_problem(rng, n=20)
        fill = {int(v): 0.0 for v in problem.graph.vertex_ids}
        for v in problem.boundary:
            fill[v] = problem.g[v]
        sol = solve_amle(problem, init=fill, tol=1e-11)
        assert sol.converged

    def test_non_convergence_reported(self, rng):
        problem = self._random_problem(rng, n=40, frac=0.1)
        sol = solve_amle(problem, tol=1e-14, max_iter=2, init="min")
        assert not sol.converged
        assert sol.iterations == 2
        assert sol.residual > 1e-14

    def test_comparison_principle(self, rng):
        for _ in range(6):
            problem = self._random_problem(rng, n=30)
            bump = {v: problem.g[v] + float(rng.random()) for v in problem.boundary}
            upper = AMLEProblem(
                problem.graph, problem.boundary, bump, problem.metric_choice
            )
            s1 = solve_amle(problem, tol=1e-12)
            s2 = solve_amle(upper, tol=1e-12)
            assert comparison_check(s1, s2)

    def test_comparison_validation(self, rng):
        p1 = self._random_problem(rng, n=10)
        s1 = solve_amle(p1)
        p_other = self._random_problem(rng, n=10)
        s_other = solve_amle(p_other)
        with pytest.raises(InputError):
            comparison_check(s1, s_other)
        lower = AMLEProblem(
            p1.graph,
            p1.boundary,
            {v: p1.g[v] - 1.0 for v in p1.boundary},
            p1.metric_choice,
        )
        s_lower = solve_amle(lower)
        with pytest.raises(InputError):
            comparison_check(s1, s_lower)


class TestDegenerate:
    def test_unreachable_interior_is_nan(self):
        # both edges measure zero: essential metric isolates vertex 1
        G = make_graph(
            [(0, 1.0), (1, 1.0), (2, 1.0)],
            [(0, 1, 1.0, 0.0), (1, 2, 1.0, 0.0)],
        )
        problem = AMLEProblem(G, (0, 2), {0: 0.0, 2: 1.0}, metric_choice="essential")
        sol = solve_amle(problem)
        assert sol.converged
        assert sol.degenerate_vertices == (1,)
        assert np.isnan(sol.u[1])
        assert sol.u[0] == 0.0

    def test_degenerate_vertices_accept_any_value(self):
        # non-uniqueness regime: every boundary-respecting field is
        # infinity-harmonic where no positive-measure edges exist
        G = make_graph(
            [(0, 1.0), (1, 1.0), (2, 1.0)],
            [(0, 1, 1.0, 0.0), (1, 2, 1.0, 0.0)],
        )
        problem = AMLEProblem(G, (0, 2), {0: 0.0, 2: 1.0}, metric_choice="essential")
        for fill in (-7.0, 0.2, 55.0):
            u = {0: 0.0, 1: fill, 2: 1.0}
            res = check_amle_local(u, problem)
            assert res == {1: 0.0}


class TestCheckLocal:
    def test_zero_on_linear_path(self):
        G = path_graph(5)
        problem = AMLEProblem(G, (0, 4), {0: 0.0, 4: 1.0})
        u = {k: k / 4 for k in range(5)}
        res = check_amle_local(u, problem)
        assert max(res.values()) == pytest.approx(0.0, abs=1e-15)

    def test_flags_imbalance(self):
        G = path_graph(3)
        problem = AMLEProblem(G, (0, 2), {0: 0.0, 2: 1.0})
        res = check_amle_local({0: 0.0, 1: 0.9, 2: 1.0}, problem)
        assert res[1] == pytest.approx(0.8)

    def test_boundary_mismatch_rejected(self):
        G = path_graph(3)
        problem = AMLEProblem(G, (0, 2), {0: 0.0, 2: 1.0})
        with pytest.raises(InputError):
            check_amle_local({0: 0.1, 1: 0.5, 2: 1.0}, problem)

    def test_missing_value_rejected(self):
        G = path_graph(3)
        problem = AMLEProblem(G, (0, 2), {0: 0.0, 2: 1.0})
        with pytest.raises(InputError):
            check_amle_local({0: 0.0, 2: 1.0}, problem)


class TestProblemValidation:
    def test_empty_boundary(self):
        with pytest.raises(InputError):
            AMLEProblem(path_graph(3), (), {})

    def test_boundary_not_in_graph(self):
        with pytest.raises(InputError):
            AMLEProblem(path_graph(3), (0, 9), {0: 0.0, 9: 1.0})

    def test_missing_or_nonfinite_data(self):
        with pytest.raises(InputError):
            AMLEProblem(path_graph(3), (0, 2), {0: 0.0})
        with pytest.raises(InputError):
            AMLEProblem(path_graph(3), (0, 2), {0: 0.0, 2: np.inf})

    def test_bad_metric_choice(self):
        with pytest.raises(InputError):
            AMLEProblem(path_graph(3), (0,), {0: 0.0}, metric_choice="taxicab")

    def test_bad_init_rejected(self):
        problem = AMLEProblem(path_graph(3), (0, 2), {0: 0.0, 2: 1.0})
        with pytest.raises(InputError):
            solve_amle(problem, init="zeros")
        with pytest.raises(InputError):
            solve_amle(problem, init={0: 0.0})


class TestInfinityHarmonicExtend:
    def test_interface_construction(self):
        # Omega = {1}: vertex 0 touches it through a positive edge, vertex
        # 2 only through a zero-measure one, so 2 keeps its data and only
        # 0 and 1 enter the sub-problem
        G = make_graph(
            [(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)],
            [(0, 1, 1.0), (1, 2, 1.0, 0.0), (0, 3, 1.0), (2, 3, 1.0)],
        )
        g = {0: 2.0, 2: -1.0, 3: 0.5}
        sol = infinity_harmonic_extend(G, [1], g)
        assert sol.u[0] == 2.0
        assert sol.u[2] == -1.0
        assert sol.u[3] == 0.5
        assert np.isfinite(sol.u[1])

    def test_path_interior(self):
        G = path_graph(5)
        sol = infinity_harmonic_extend(G, [1, 2, 3], {0: 0.0, 4: 1.0})
        assert sol.converged
        # boundary values propagate linearly across the solved interior
        assert sol.u[2] == pytest.approx(0.5, abs=1e-8)

    def test_no_interface_degenerate(self):
        G = make_graph(
            [(0, 1.0), (1, 1.0), (2, 1.0)],
            [(0, 1, 1.0, 0.0), (1, 2, 1.0, 0.0)],
        )
        sol = infinity_harmonic_extend(G, [1], {0: 3.0, 2: 4.0})
        assert sol.degenerate_vertices == (1,)
        assert np.isnan(sol.u[1])
        assert sol.u[0] == 3.0

    def test_omega_everything_rejected(self):
        G = path_graph(3)
        with pytest.raises(InputError):
            infinity_harmonic_extend(G, [0, 1, 2], {})

    def test_data_must_cover_complement(self):
        G = path_graph(4)
        with pytest.raises(InputError):
            infinity_harmonic_extend(G, [1, 2], {0: 0.0})
