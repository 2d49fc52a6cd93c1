import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrlearn.core import (
    CostModel,
    CountVector,
    Discrepancy,
    Pmf,
    discrepancy,
    empirical_pmf,
    transport_cost,
)
from corrlearn.errors import DimensionMismatchError, InputError, InstanceTooLargeError
from corrlearn.solver import (
    CorrectionProblem,
    Direction,
    compositions,
    min_budget,
    min_error,
    predicted_error,
    round_to_grid,
    solve_bruteforce,
    solve_exact,
)

from oracles import histograms

P0 = Pmf((0.12, 0.63, 0.25))
C17 = CountVector((3, 9, 5))


def problem(p0, counts, b, cost=CostModel.CHANGE_COUNT, disc=Discrepancy.L1,
            direction=Direction.COOPERATIVE):
    if not isinstance(p0, Pmf):
        p0 = Pmf.normalized(p0)
    return CorrectionProblem(p0, CountVector(tuple(counts)), b, cost, disc, direction)


@st.composite
def instances(draw, max_n=7, max_y=4):
    Y = draw(st.integers(2, max_y))
    weights = draw(st.lists(st.integers(0, 20), min_size=Y, max_size=Y).filter(lambda w: sum(w) > 0))
    p0 = Pmf.normalized([w / sum(weights) for w in weights])
    N = draw(st.integers(1, max_n))
    counts = draw(st.sampled_from(list(histograms(N, Y))))
    b = draw(st.integers(0, 2 * N))
    return problem(p0, counts, b, draw(st.sampled_from(list(CostModel))),
                   draw(st.sampled_from(list(Discrepancy))), draw(st.sampled_from(list(Direction))))


class TestProblem:
    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            problem((0.5, 0.5), (1, 1, 1), 0)

    def test_empty_data(self):
        with pytest.raises(InputError):
            problem((0.5, 0.5), (0, 0), 0)

    def test_negative_budget(self):
        with pytest.raises(InputError):
            problem((0.5, 0.5), (1, 1), -1)


class TestSolveExact:
    @pytest.mark.parametrize("disc", list(Discrepancy))
    @pytest.mark.parametrize("cost", list(CostModel))
    def test_zero_budget_is_identity(self, cost, disc):
        sol = solve_exact(problem(P0, C17, 0, cost, disc))
        assert sol.corrected_counts == C17
        assert sol.cost_used == 0
        assert sol.objective == discrepancy(P0, empirical_pmf(C17), disc)

    def test_reference_instance_reaches_min_error(self):
        sol = solve_exact(problem(P0, C17, 2))
        e_min, grid = min_error(17, P0)
        assert sol.corrected_counts == grid == CountVector((2, 11, 4))
        assert sol.objective == pytest.approx(0.034118, abs=1e-6)
        assert sol.cost_used == 2

    def test_unbinding_value_budget(self):
        for counts in [(17, 0, 0), (0, 0, 17), (3, 9, 5)]:
            sol = solve_exact(problem(P0, counts, 17 * 2, CostModel.VALUE_DISTANCE))
            assert sol.objective == pytest.approx(min_error(17, P0)[0], abs=1e-12)

    def test_solution_fields_consistent(self):
        sol = solve_exact(problem(P0, C17, 3, CostModel.VALUE_DISTANCE, Discrepancy.L2))
        assert sol.plan.source == C17 and sol.plan.target == sol.corrected_counts
        assert sol.plan.cost(CostModel.VALUE_DISTANCE) == sol.cost_used <= 3
        assert sol.objective == discrepancy(P0, sol.corrected_pmf, Discrepancy.L2)

    def test_lexicographic_tie_break(self):
        # p0 uniform, counts [0, 2, 0]: [1, 1, 0] and [0, 1, 1] are equally good
        sol = solve_exact(problem((1 / 3, 1 / 3, 1 / 3), (0, 2, 0), 1))
        assert sol.corrected_counts == CountVector((0, 1, 1))

    def test_kl_excludes_unsupported_categories(self):
        sol = solve_exact(problem((0.5, 0.5, 0.0), (0, 0, 4), 4, disc=Discrepancy.KL))
        assert sol.corrected_counts == CountVector((2, 2, 0))
        assert sol.objective == 0.0

    def test_kl_infeasible_stays_infinite(self):
        sol = solve_exact(problem((0.5, 0.5, 0.0), (0, 0, 4), 1, disc=Discrepancy.KL))
        assert sol.objective == math.inf

    def test_adversarial_kl_prefers_unsupported(self):
        sol = solve_exact(problem((0.5, 0.5, 0.0), (2, 2, 0), 1, disc=Discrepancy.KL,
                                  direction=Direction.ADVERSARIAL))
        assert sol.objective == math.inf
        assert sol.corrected_counts[2] == 1

    def test_adversarial_l1_unlimited(self):
        sol = solve_bruteforce(problem((0.3, 0.1, 0.6), (2, 2, 2), 100, direction=Direction.ADVERSARIAL))
        assert sol.corrected_counts == CountVector((0, 6, 0))
        assert solve_exact(problem((0.3, 0.1, 0.6), (2, 2, 2), 100,
                                   direction=Direction.ADVERSARIAL)) == sol

    def test_larger_instance_runs(self):
        sol = solve_exact(problem((0.1, 0.2, 0.3, 0.4), (30, 0, 0, 0), 20, CostModel.VALUE_DISTANCE,
                                  Discrepancy.L2))
        assert sol.cost_used <= 20


@settings(max_examples=300, deadline=None)
@given(instances())
def test_exact_matches_bruteforce(prob):
    a, b = solve_exact(prob), solve_bruteforce(prob)
    assert a.corrected_counts == b.corrected_counts
    assert a.objective == b.objective
    assert a.cost_used <= prob.budget
    assert a.cost_used == transport_cost(prob.counts, a.corrected_counts, prob.cost_model)


@settings(max_examples=60, deadline=None)
@given(instances(max_n=6, max_y=3))
def test_budget_monotonicity(prob):
    values = []
    for b in range(0, 2 * prob.N + 1):
        p = CorrectionProblem(prob.p0, prob.counts, b, prob.cost_model, prob.discrepancy, prob.direction)
        values.append(solve_exact(p).objective)
    pairs = list(zip(values, values[1:]))
    if prob.direction is Direction.COOPERATIVE:
        assert all(b <= a + 1e-12 for a, b in pairs)
    else:
        assert all(b >= a - 1e-12 for a, b in pairs)


@settings(max_examples=100, deadline=None)
@given(instances(max_n=6, max_y=3))
def test_change_count_never_more_restrictive(prob):
    if prob.direction is Direction.ADVERSARIAL:
        return
    kw = dict(p0=prob.p0, counts=prob.counts, budget=prob.budget, discrepancy=prob.discrepancy)
    count = solve_exact(CorrectionProblem(cost_model=CostModel.CHANGE_COUNT, **kw)).objective
    value = solve_exact(CorrectionProblem(cost_model=CostModel.VALUE_DISTANCE, **kw)).objective
    assert count <= value + 1e-12


class TestBruteforce:
    def test_limit(self):
        with pytest.raises(InstanceTooLargeError):
            solve_bruteforce(problem([1 / 8] * 8, (200,) + (0,) * 7, 1))

    def test_zero_budget(self):
        assert solve_bruteforce(problem(P0, C17, 0)).corrected_counts == C17

    def test_compositions_lexicographic(self):
        comps = list(compositions(3, 3))
        assert comps == sorted(comps)
        assert len(comps) == math.comb(5, 2)


class TestMinError:
    def test_on_grid(self):
        e, counts = min_error(4, Pmf((0.25, 0.5, 0.25)))
        assert e == 0.0 and counts == CountVector((1, 2, 1))

    def test_reference_instance(self):
        e, counts = min_error(17, P0)
        assert counts == CountVector((2, 11, 4))
        hand = abs(0.12 - 2 / 17) + abs(0.63 - 11 / 17) + abs(0.25 - 4 / 17)
        assert e == pytest.approx(hand, abs=1e-15)
        assert e == pytest.approx(0.034118, abs=1e-6)

    def test_single_observation(self):
        e, counts = min_error(1, Pmf((0.4, 0.6)))
        assert counts == CountVector((0, 1))
        assert e == pytest.approx(0.8)

    def test_repair_when_rounding_overshoots(self):
        # 3 * [0.5, 0.5] rounds to [2, 2]; repair removes from the lower index
        assert round_to_grid(3, Pmf((0.5, 0.5))) == CountVector((1, 2))

    def test_repair_when_rounding_undershoots(self):
        # 3 * [0.4, 0.4, 0.2] = [1.2, 1.2, 0.6] rounds to [1, 1, 1]; fine
        assert round_to_grid(3, Pmf((0.4, 0.4, 0.2))) == CountVector((1, 1, 1))
        # 4 * [0.375]*2 + [0.25] = [1.5, 1.5, 1] -> [2, 2, 1] overshoots
        assert round_to_grid(4, Pmf((0.375, 0.375, 0.25))) == CountVector((1, 2, 1))
        # 2 * [0.2]*5 = [0.4]*5 rounds to zeros; add to the lowest indices
        assert round_to_grid(2, Pmf((0.2,) * 5)) == CountVector((1, 1, 0, 0, 0))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 9), st.lists(st.integers(0, 30), min_size=2, max_size=4).filter(lambda w: sum(w) > 0))
    def test_is_grid_minimum(self, N, weights):
        p0 = Pmf.normalized([w / sum(weights) for w in weights])
        e, counts = min_error(N, p0)
        assert counts.total == N
        best = min(discrepancy(p0, empirical_pmf(CountVector(h)), Discrepancy.L1)
                   for h in histograms(N, len(p0)))
        assert e == pytest.approx(best, abs=1e-12)


class TestMinBudgetAndPredictedError:
    def test_already_optimal(self):
        _, grid = min_error(17, P0)
        assert min_budget(17, P0, empirical_pmf(grid)) == 0

    def test_reference_counts(self):
        p_hat = empirical_pmf(C17)
        l1 = discrepancy(P0, p_hat, Discrepancy.L1)
        expected = math.ceil(8.5 * (l1 - min_error(17, P0)[0]))
        assert expected == 2
        assert min_budget(17, P0, p_hat) == expected

    def test_off_grid_rejected(self):
        with pytest.raises(InputError):
            min_budget(17, P0, Pmf((0.2, 0.5, 0.3)))
        with pytest.raises(InputError):
            predicted_error(17, P0, 1, Pmf((0.2, 0.5, 0.3)))

    def test_predicted_error_arms(self):
        p_hat = empirical_pmf(C17)
        l1 = discrepancy(P0, p_hat, Discrepancy.L1)
        assert predicted_error(17, P0, 0, p_hat) == l1
        assert predicted_error(17, P0, 5, p_hat) == min_error(17, P0)[0]
        assert predicted_error(17, P0, 1, p_hat) == pytest.approx(l1 - 2 / 17)

    def test_predicted_error_with_reference_l1(self):
        # arithmetic of the formula alone, with an error of 0.26 at b = 1
        assert max(0.26 - 2 / 17, min_error(17, P0)[0]) == pytest.approx(0.142353, abs=1e-6)

    def test_formula_is_not_tight_at_reference_b1(self):
        # one change cannot remove a full 2/N of L1 error here: no category
        # exceeds its target by a whole 1/17
        sol = solve_bruteforce(problem(P0, C17, 1))
        assert sol.objective == pytest.approx(0.088235, abs=1e-6)
        assert predicted_error(17, P0, 1, empirical_pmf(C17)) == pytest.approx(0.083529, abs=1e-6)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(1, 8), st.lists(st.integers(0, 30), min_size=2, max_size=3).filter(lambda w: sum(w) > 0),
           st.data())
    def test_formulas_bound_the_solver(self, N, weights, data):
        p0 = Pmf.normalized([w / sum(weights) for w in weights])
        counts = data.draw(st.sampled_from(list(histograms(N, len(p0)))))
        p_hat = empirical_pmf(CountVector(counts))
        e_min, _ = min_error(N, p0)
        b_min = min_budget(N, p0, p_hat)
        objectives = [solve_exact(problem(p0, counts, b)).objective for b in range(N + 1)]
        for b, obj in enumerate(objectives):
            assert obj >= predicted_error(N, p0, b, p_hat) - 1e-12
            assert obj >= e_min - 1e-12
        assert objectives[0] == pytest.approx(predicted_error(N, p0, 0, p_hat), abs=1e-12)
        assert objectives[-1] == pytest.approx(e_min, abs=1e-12)
        plateau = next(b for b, obj in enumerate(objectives) if obj <= e_min + 1e-12)
        assert plateau >= b_min
