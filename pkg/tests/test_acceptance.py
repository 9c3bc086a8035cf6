"""Acceptance gate: one test and one printed PASS/FAIL line per criterion.

Every check is exact (integer equality); the stated runtime budgets are
asserted alongside the values.
"""

import random
import time

from amsreg import (
    DivisorClass,
    GraphRecipe,
    PointSample,
    SurfaceModel,
    ams_degree,
    beta_bound,
    build_graph,
    canonical_class,
    delta_for_recipe,
    delta_to_proximity,
    dim_linear_system,
    enumerate_representatives,
    excesses,
    h1,
    inverse_proximity_matrix,
    is_nef,
    is_p_sufficient_chain,
    nef_reduce,
    regularity_bracket,
    tau_oracle,
    unload,
    unload_step,
)
from amsreg.surface import cone_coordinates, is_effective


def _report(number: int, ok: bool, elapsed: float, budget: float, detail: str):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"\nCRITERION {number}: {status} ({elapsed:.1f}s / budget {budget:.0f}s) {detail}")
    assert ok, detail
    assert elapsed < budget, f"criterion {number} exceeded {budget}s ({elapsed:.1f}s)"


def _factor_tuples(max_product: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def extend(prefix: tuple[int, ...], prod: int) -> None:
        if prefix:
            out.append(prefix)
        n = 2
        while prod * n <= max_product:
            extend(prefix + (n,), prod * n)
            n += 1

    extend((), 1)
    return sorted(out)


def test_criterion_1_golden_beta_values():
    cases = [
        ((4000,) + (1000,) * 19, (10,), 6009),
        ((500,) * 1000, (500,), 16014),
        ((800,) * 1000, (500,), 25617),
        ((1200,) * 1000, (500,), 38417),
        ((500,) * 1000, (1000,), 16021),
        ((800,) * 1000, (1000,), 25629),
        ((1200,) * 1000, (1000,), 38436),
    ]
    t0 = time.perf_counter()
    results = [
        (beta_bound(m, GraphRecipe(factors, "plus")).beta, want)
        for m, factors, want in cases
    ]
    elapsed = time.perf_counter() - t0
    bad = [(got, want) for got, want in results if got != want]
    _report(1, not bad, elapsed, 120.0, f"betas {[g for g, _ in results]}"
            + (f"; mismatches {bad}" if bad else ""))


def test_criterion_2_exact_regularity_family():
    recipe = GraphRecipe.parse("(10)+")
    t0 = time.perf_counter()
    outcomes = []
    for m0 in (9000, 10000, 12000):
        v = regularity_bracket((m0,) + (1000,) * 19, recipe)
        outcomes.append((m0, v.kind, v.tau, v.lower, v.upper))
    elapsed = time.perf_counter() - t0
    bad = [o for o in outcomes if not (o[1] == "exact" and o[2] == o[0] + 1000)]
    _report(2, not bad, elapsed, 5.0,
            f"want kind=exact tau=m+1000; got {outcomes}")


def test_criterion_3_delta_graph_cross_validation():
    t0 = time.perf_counter()
    recipes = _factor_tuples(64)
    bad = []
    for factors in recipes:
        seq = delta_for_recipe(GraphRecipe(factors))
        if delta_to_proximity(seq) != build_graph(GraphRecipe(factors, "minus")):
            bad.append(factors)
    elapsed = time.perf_counter() - t0
    _report(3, not bad, elapsed, 10.0,
            f"{len(recipes)} recipes with product <= 64"
            + (f"; mismatches {bad}" if bad else ""))


def test_criterion_4_p_sufficiency_and_genus():
    rng = random.Random(2024)
    t0 = time.perf_counter()
    bad = []
    for _ in range(50):
        factors = tuple(rng.randint(2, 9) for _ in range(rng.randint(1, 4)))
        graph = build_graph(GraphRecipe(factors, "plus"))
        ok, _ = is_p_sufficient_chain(graph)
        u = inverse_proximity_matrix(graph)[-1]
        c_tilde = DivisorClass(ams_degree(GraphRecipe(factors)), tuple(-x for x in u))
        k = canonical_class(graph.n_points)
        k_dot = k.intersect(c_tilde)
        genus = 1 + (c_tilde.intersect(c_tilde) + k_dot) // 2
        if not (ok and k_dot < 0 and genus == 0):
            bad.append((factors, ok, k_dot, genus))
    elapsed = time.perf_counter() - t0
    _report(4, not bad, elapsed, 10.0,
            "50 random recipes, P-sufficient with K.C < 0 and genus 0"
            + (f"; failures {bad}" if bad else ""))


def _sweep_systems() -> list[tuple[int, ...]]:
    out = []

    def extend(prefix: tuple[int, ...], cap: int):
        if len(prefix) >= 2:
            out.append(prefix)
        if len(prefix) == 6:
            return
        for v in range(1, cap + 1):
            extend(prefix + (v,), v)

    extend((), 4)
    return [m for m in out if sum(x * (x + 1) for x in m) // 2 <= 60]


def test_criterion_5_oracle_soundness_sweep():
    t0 = time.perf_counter()
    bad = []
    named = {(2, 2, 2, 2, 2): 5, (3, 2, 1): 4, (5, 2, 1, 1, 1): 6}
    samples: dict[int, PointSample] = {}
    h1_cache: dict[tuple, int] = {}
    taus = {}
    for m, want in named.items():
        taus[m] = tau_oracle(m)
        if taus[m] != want:
            bad.append(("named", m, taus[m], want))
    checked = 0
    for m in _sweep_systems():
        tau = taus.get(m)
        if tau is None:
            tau = tau_oracle(m)
        sample = samples.setdefault(len(m), PointSample.generate(len(m)))
        for recipe in enumerate_representatives(len(m) - 1):
            beta = beta_bound(m, recipe).beta
            checked += 1
            if tau > beta:
                bad.append(("tau>beta", m, recipe.factors, tau, beta))
                continue
            key = (m, beta)
            if key not in h1_cache:
                h1_cache[key] = dim_linear_system(beta, m, sample)[1]
            if h1_cache[key] != 0:
                bad.append(("h1@beta", m, recipe.factors, beta, h1_cache[key]))
    elapsed = time.perf_counter() - t0
    _report(5, not bad, elapsed, 300.0,
            f"{checked} (m, recipe) pairs, named taus confirmed"
            + (f"; failures {bad[:5]}" if bad else ""))


def test_criterion_6_theorem_suite():
    rng = random.Random(777)
    t0 = time.perf_counter()
    bad = []
    recipes = _factor_tuples(32)
    for factors in recipes:
        model = SurfaceModel(build_graph(GraphRecipe(factors, "plus")))
        n = model.n_points
        classes = [
            DivisorClass(rng.randint(-8, 14), tuple(rng.randint(-5, 5) for _ in range(n)))
            for _ in range(400)
        ]
        # directed classes D_{d,m} near the nef threshold of consistent systems
        for _ in range(100):
            raw = [rng.randint(0, 6) for _ in range(n)]
            m_g, _ = unload(model.graph, raw, keep_trace=False)
            d = m_g[0] + m_g[1] + rng.randint(-3, 1)
            classes.append(DivisorClass(max(d, 0), tuple(-x for x in m_g)))
        for d in classes:
            empty_status = nef_reduce(d, model, keep_trace=False)[1] == "empty"
            alpha, beta = cone_coordinates(d, model)
            if empty_status != (alpha < 0 or any(b < 0 for b in beta)):
                bad.append(("c", factors, d))
                continue
            if is_nef(d, model):
                if h1(d, model) != 0:
                    bad.append(("a", factors, d))
                continue
            if is_effective(d, model):
                prods = [d.intersect(e) for e in model.e_tilde]
                if all(p >= 0 for p in prods) and prods[1] >= 1:
                    if (h1(d, model) == 0) != (d.intersect(model.h_tilde) >= -1):
                        bad.append(("b", factors, d))
    elapsed = time.perf_counter() - t0
    _report(6, not bad, elapsed, 60.0,
            f"{len(recipes)} surfaces x 500 classes"
            + (f"; failures {bad[:3]}" if bad else ""))


def test_criterion_7_unloading_confluence_and_tameness():
    rng = random.Random(4242)
    t0 = time.perf_counter()
    bad = []
    from amsreg.proximity import replay_trace

    for run in range(200):
        factors = tuple(rng.randint(2, 5) for _ in range(rng.randint(1, 3)))
        decoration = rng.choice(["plain", "minus", "plus"])
        graph = build_graph(GraphRecipe(factors, decoration))
        m = tuple(rng.randint(0, 8) for _ in range(graph.n_points))
        fixed, trace = unload(graph, m)
        if replay_trace(graph, m, trace) != fixed:
            bad.append(("replay", factors, m))
            continue
        cur = m
        while True:  # random admissible step order
            negs = [j for j, r in enumerate(excesses(graph, cur)) if r < 0]
            if not negs:
                break
            cur = unload_step(graph, cur, rng.choice(negs))
        if cur != fixed:
            bad.append(("confluence", factors, m, cur, fixed))
    elapsed = time.perf_counter() - t0
    _report(7, not bad, elapsed, 10.0,
            "200 randomized-order runs agree with the greedy fixed point"
            + (f"; failures {bad[:3]}" if bad else ""))
