"""Unit tests for the Picard lattice and the h0/h1 engine."""

import random

import pytest

from amsreg import (
    DivisorClass,
    GraphRecipe,
    InputError,
    ProximityGraph,
    SurfaceModel,
    build_graph,
    canonical_class,
    cone_coordinates,
    euler_characteristic,
    h0,
    h1,
    is_nef,
    nef_reduce,
)
from amsreg.surface import _h1_positive, is_effective


def model(recipe: str) -> SurfaceModel:
    return SurfaceModel(build_graph(GraphRecipe.parse(recipe)))


def line(n: int, d: int = 1) -> DivisorClass:
    return DivisorClass(d, (0,) * n)


class TestLattice:
    def test_basis_intersection_table(self):
        n = 4
        l = line(n)
        es = [
            DivisorClass(0, tuple(1 if j == i else 0 for j in range(n)))
            for i in range(n)
        ]
        assert l.intersect(l) == 1
        for i, ei in enumerate(es):
            assert l.intersect(ei) == 0
            for j, ej in enumerate(es):
                assert ei.intersect(ej) == (-1 if i == j else 0)

    def test_rank_mismatch(self):
        with pytest.raises(InputError):
            line(3).intersect(line(4))
        with pytest.raises(InputError):
            line(3) + line(4)

    def test_euler_characteristic(self):
        assert euler_characteristic(line(6, 4)) == 15
        assert euler_characteristic(DivisorClass(0, (0,) * 5)) == 1
        k = canonical_class(20)
        assert k.intersect(k) == -11

    def test_system_convention_and_json(self):
        d = DivisorClass.from_system(4, (2, 1), 5)
        assert d.a == 4
        assert d.c == (-2, -1, 0, 0, 0)
        assert d.multiplicities == (2, 1, 0, 0, 0)
        assert DivisorClass.from_json(d.to_json()) == d
        with pytest.raises(InputError):
            DivisorClass.from_json("{}")


class TestSurfaceModel:
    def test_requires_chain_with_two_points(self):
        with pytest.raises(InputError):
            SurfaceModel(ProximityGraph.chain(1))
        with pytest.raises(InputError):
            SurfaceModel(ProximityGraph(3, frozenset({(1, 0)})))

    def test_minus_one_curve_identities(self):
        for recipe in ("(2)+", "(3)+", "(2,2)+", "(3,4)+"):
            s = model(recipe)
            h_t = s.h_tilde
            assert h_t.intersect(h_t) == -1
            assert h_t.intersect(s.canonical) == -1
            for i, e_t in enumerate(s.e_tilde):
                assert e_t.intersect(e_t) == -1 - len(s.graph.children[i])
            assert s.e_tilde[-1].intersect(s.e_tilde[-1]) == -1


class TestConeCoordinates:
    def test_h_tilde_is_a_generator(self):
        s = model("(2)+")
        assert cone_coordinates(s.h_tilde, s) == (1, (0,) * s.n_points)

    def test_round_trip(self):
        rng = random.Random(3)
        for recipe in ("(2)+", "(3)+", "(2,2)+"):
            s = model(recipe)
            n = s.n_points
            for _ in range(50):
                alpha = rng.randint(-5, 5)
                beta = [rng.randint(-5, 5) for _ in range(n)]
                full = DivisorClass(
                    alpha * s.h_tilde.a + sum(b * e.a for b, e in zip(beta, s.e_tilde)),
                    tuple(
                        alpha * hc + sum(b * e.c[i] for b, e in zip(beta, s.e_tilde))
                        for i, hc in enumerate(s.h_tilde.c)
                    ),
                )
                assert cone_coordinates(full, s) == (alpha, tuple(beta))

    def test_double_point_on_a_line_is_not_effective(self):
        s = model("(2)+")
        d = DivisorClass(1, (-2,) + (0,) * (s.n_points - 1))
        alpha, beta = cone_coordinates(d, s)
        assert alpha < 0 or any(b < 0 for b in beta)
        assert not is_effective(d, s)


class TestNefReduce:
    def test_nef_input_unchanged(self):
        s = model("(2)+")
        l = line(s.n_points, 3)
        assert is_nef(l, s)
        terminal, status, steps = nef_reduce(l, s)
        assert (terminal, status, steps) == (l, "nef", ())

    def test_negative_line_is_empty(self):
        s = model("(2)+")
        _, status, _ = nef_reduce(line(s.n_points, -1), s)
        assert status == "empty"

    def test_degree_nine_ten_fold_point_is_empty(self):
        s = model("(10)+")
        d = DivisorClass.from_system(9, (10,), s.n_points)
        _, status, _ = nef_reduce(d, s)
        assert status == "empty"
        assert h0(d, s) == 0

    def test_h_tilde_is_not_nef(self):
        s = model("(2)+")
        assert not is_nef(s.h_tilde, s)
        assert is_nef(line(s.n_points), s)


class TestCohomology:
    def test_full_plane_systems(self):
        s = model("(3)+")
        for d in range(6):
            l = line(s.n_points, d)
            assert h0(l, s) == (d + 1) * (d + 2) // 2
            assert h1(l, s) == 0

    def test_degree_ten_with_ten_fold_point(self):
        s = model("(10)+")
        d = DivisorClass.from_system(10, (10,), s.n_points)
        assert h0(d, s) == 11

    def test_nef_classes_are_non_special(self):
        rng = random.Random(17)
        for recipe in ("(2)+", "(3)+", "(2,2)+"):
            s = model(recipe)
            for _ in range(100):
                d = DivisorClass(
                    rng.randint(-4, 10),
                    tuple(rng.randint(-4, 4) for _ in range(s.n_points)),
                )
                if is_nef(d, s):
                    assert h1(d, s) == 0

    def test_h1_positive_shortcut_agrees(self):
        rng = random.Random(29)
        for recipe in ("(2)+", "(3)+", "(2,2)+", "(4)+"):
            s = model(recipe)
            for _ in range(150):
                d = DivisorClass(
                    rng.randint(-6, 10),
                    tuple(rng.randint(-4, 4) for _ in range(s.n_points)),
                )
                assert _h1_positive(d, s) == (h1(d, s) > 0)

    def test_unloading_preserves_h0_in_every_degree(self):
        # unload returns the consistent system with the same ideal sheaf,
        # so the dimension of the linear system is unchanged in all degrees
        from amsreg import unload

        rng = random.Random(43)
        for recipe in ("(3)+", "(2,2)+", "(5,2)+"):
            s = model(recipe)
            g = s.graph
            for _ in range(25):
                m = tuple(rng.randint(0, 9) for _ in range(g.n_points))
                fixed, _ = unload(g, m)
                for d in range(0, 3 * max(m) + 2, 3):
                    before = h0(DivisorClass.from_system(d, m), s)
                    after = h0(DivisorClass.from_system(d, fixed), s)
                    assert before == after, (recipe, m, fixed, d)

    def test_consistent_system_at_high_degree_is_nef(self):
        # degree >= m_0 + m_1 with consistent multiplicities gives a nef class
        s = model("(3)+")
        m = (5, 3, 2, 1, 1, 0)
        d = DivisorClass.from_system(8, m, s.n_points)
        assert is_nef(d, s)
        assert h1(d, s) == 0
