"""Unit tests for expected dimension, regularity verdicts and the staged bound."""

import json
import random

import pytest

from amsreg import (
    GraphRecipe,
    InputError,
    best_beta,
    beta_bound,
    conjecture_family,
    exact_regularity,
    expected_dimension,
    nonspeciality_check,
    regularity_bracket,
)
from amsreg import regularity as regularity_module
from amsreg.ams import enumerate_representatives


class TestExpectedDimension:
    def test_examples(self):
        assert expected_dimension(4, (2, 2, 2, 2, 2)) == -1
        assert expected_dimension(5, (2, 2, 2, 2, 2)) == 5
        assert expected_dimension(3, ()) == 9

    def test_rejects_degree_zero(self):
        with pytest.raises(InputError):
            expected_dimension(0, (1,))


class TestExactRegularity:
    def test_known_values(self):
        v = exact_regularity((3, 2, 1), GraphRecipe.parse("(2)+"))
        assert (v.kind, v.tau) == ("exact", 4)
        v = exact_regularity((5, 2, 1, 1, 1), GraphRecipe.parse("(3)+"))
        assert (v.kind, v.tau) == ("exact", 6)

    def test_inapplicable_without_positive_rho1(self):
        v = exact_regularity((2, 1, 1), GraphRecipe.parse("(2)+"))
        assert v.kind == "inapplicable"
        v = exact_regularity((0, 3), GraphRecipe.parse("(2)+"))
        assert v.kind == "inapplicable"

    def test_json(self):
        v = exact_regularity((3, 2, 1), GraphRecipe.parse("(2)+"))
        assert json.loads(v.to_json())["tau"] == 4


class TestRegularityBracket:
    def test_exact_when_bounds_meet(self):
        v = regularity_bracket((9000,) + (1000,) * 19, GraphRecipe.parse("(10)+"))
        assert (v.kind, v.tau, v.lower, v.upper) == ("exact", 10000, 10000, 10000)

    def test_bracket_when_bounds_differ(self):
        v = regularity_bracket((1000, 1000), GraphRecipe.parse("(2)+"))
        assert v.kind == "bracket"
        assert v.lower < v.upper

    def test_inapplicable_when_not_almost_consistent(self):
        v = regularity_bracket((0, 3), GraphRecipe.parse("(2)+"))
        assert v.kind == "inapplicable"


class TestNonSpeciality:
    def test_equivalence_branch(self):
        v = nonspeciality_check(4, (3, 2, 1, 0), GraphRecipe.parse("(2)+"))
        assert (v.kind, v.nonspecial, v.threshold) == ("equivalence", True, 4)

    def test_below_certificate_threshold(self):
        v = nonspeciality_check(3, (3, 3), GraphRecipe.parse("(2)+"))
        assert v.kind == "inapplicable"

    def test_certified_branch(self):
        v = nonspeciality_check(6, (3, 3), GraphRecipe.parse("(2)+"))
        assert v.kind in ("nonspecial_certified", "equivalence")
        assert v.nonspecial is True


class TestBetaBound:
    def test_two_simple_points(self):
        report = beta_bound((1, 1), GraphRecipe.parse("(2)+"))
        assert report.beta == 1

    def test_report_invariant_and_determinism(self):
        m = (6, 4, 4, 3, 1)
        recipe = GraphRecipe.parse("(3)+")
        r1 = beta_bound(m, recipe)
        r2 = beta_bound(m, recipe)
        assert r1 == r2  # wall_time excluded from comparison
        assert r1.beta == r1.m_prime[0] + r1.m_prime[1] - r1.j_found + 1
        assert r1.stage_count == len(r1.stages) + 1
        assert sorted(r1.m_input, reverse=True) == [m[i] for i in r1.permutation]
        json.loads(r1.to_json())

    def test_trace_matches_traceless_run(self):
        m = (5, 5, 3, 2, 2, 1)
        recipe = GraphRecipe.parse("(2,2)+")
        plain = beta_bound(m, recipe)
        traced = beta_bound(m, recipe, keep_trace=True)
        assert traced.beta == plain.beta
        assert traced.m_prime == plain.m_prime
        assert [s.step1_iterations for s in traced.stages] == [
            s.step1_iterations for s in plain.stages
        ]
        assert [s.accepted for s in traced.stages] == [
            s.accepted for s in plain.stages
        ]

    def test_compiled_engine_matches_pure_python(self, monkeypatch):
        rng = random.Random(41)
        for _ in range(25):
            n = rng.randint(2, 7)
            recipe = rng.choice(enumerate_representatives(n))
            m = [rng.randint(0, 25) for _ in range(rng.randint(2, n + 1))]
            if max(m) == 0:
                m[0] = 1
            fast = beta_bound(m, recipe)
            monkeypatch.setattr(regularity_module, "HAVE_NUMBA", False)
            slow = beta_bound(m, recipe)
            monkeypatch.undo()
            assert fast == slow

    def test_monotone_across_published_graph_choices(self):
        for count, mult in ((10, 5), (20, 7), (50, 3)):
            m = (mult,) * count
            n = count - 1
            half = beta_bound(m, GraphRecipe((n // 2 + 1,), "plus")).beta
            full = beta_bound(m, GraphRecipe((n + 1,), "plus")).beta
            assert half <= full

    def test_bracket_tau_beta_ordering(self):
        m = (3, 2, 1)
        recipe = GraphRecipe.parse("(2)+")
        bracket = regularity_bracket(m, recipe)
        tau = exact_regularity(m, recipe).tau
        beta = beta_bound(m, recipe).beta
        assert bracket.lower <= tau <= beta

    def test_input_validation(self):
        with pytest.raises(InputError):
            beta_bound((1,), GraphRecipe.parse("(2)+"))
        with pytest.raises(InputError):
            beta_bound((1,) * 20, GraphRecipe.parse("(2)+"))


class TestBestBeta:
    def test_two_points(self):
        report, recipe = best_beta((1, 1))
        assert report.beta == 1
        assert recipe.factors == (2,)

    def test_parallel_matches_serial(self):
        m = (4, 3, 2, 2, 1)
        serial = best_beta(m)
        parallel = best_beta(m, jobs=2)
        assert serial[0] == parallel[0]
        assert serial[1] == parallel[1]

    def test_is_minimum_over_representatives(self):
        m = (4, 3, 2, 2)
        report, _ = best_beta(m)
        betas = [
            beta_bound(m, rec).beta for rec in enumerate_representatives(len(m) - 1)
        ]
        assert report.beta == min(betas)


class TestConjectureFamily:
    def test_pure_chain(self):
        system = conjecture_family(GraphRecipe.parse("(2)+"), 3)
        rendered = {
            (q.index, q.subtracted, q.min_value) for q in system
        }
        assert rendered == {
            (0, (1,), 0),
            (1, (2,), 1),
            (2, (3,), 0),
            (3, (), 0),
        }

    def test_satellite_inequality(self):
        system = conjecture_family(GraphRecipe((2, 2, 2), "plus"), 6)
        by_index = {q.index: q for q in system}
        assert by_index[2].subtracted == (3, 4)

    def test_first_block_inequality(self):
        system = conjecture_family(GraphRecipe((3,), "plus"), 4)
        by_index = {q.index: q for q in system}
        assert by_index[0].subtracted == (1, 2)

    def test_needs_enough_vertices(self):
        with pytest.raises(InputError):
            conjecture_family(GraphRecipe.parse("(2)+"), 10)
