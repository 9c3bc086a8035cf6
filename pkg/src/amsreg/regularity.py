"""Regularity of multiplicity systems for generic plane points.

Provides the expected dimension, non-speciality certificates, exact
regularity values, the staged-specialization upper bound beta(m), and a
lower/upper regularity bracket.  The geometry lives in :mod:`surface`; this
module drives it with the combinatorics of :mod:`proximity` and :mod:`ams`.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import isqrt
from typing import Sequence

from . import surface
from ._kernels import HAVE_NUMBA
from .ams import GraphRecipe, build_graph, enumerate_representatives
from .errors import AssumptionViolationError, InputError, InternalError
from .proximity import (
    ProximityGraph,
    UnloadStep,
    _step_inplace,
    _unload_inplace,
    epsilon,
    excesses,
    is_almost_consistent,
    is_consistent,
    pad,
    unload,
)


def expected_dimension(d: int, m: Sequence[int]) -> int:
    """max(d(d+3)/2 - sum m_i(m_i+1)/2, -1)."""
    if d < 1:
        raise InputError("expected_dimension needs d >= 1")
    virtual = d * (d + 3) // 2 - sum(x * (x + 1) for x in m) // 2
    return max(virtual, -1)


def _plus_graph(recipe: GraphRecipe) -> ProximityGraph:
    return build_graph(recipe.with_decoration("plus"))


@dataclass(frozen=True)
class RegularityVerdict:
    """Outcome of a regularity computation.

    kind 'exact' carries tau; 'bracket' carries [lower, upper];
    'inapplicable' carries the reason the hypotheses failed.
    """

    kind: str
    tau: int | None = None
    lower: int | None = None
    upper: int | None = None
    justification: str = ""

    def to_json(self) -> str:
        obj: dict = {"kind": self.kind}
        if self.tau is not None:
            obj["tau"] = self.tau
        if self.lower is not None:
            obj["lower"] = self.lower
        if self.upper is not None:
            obj["upper"] = self.upper
        obj["justification"] = self.justification
        return json.dumps(obj)


def exact_regularity(m: Sequence[int], recipe: GraphRecipe) -> RegularityVerdict:
    """Exact tau for consistent systems with rho_1 >= 1.

    tau = m_0 + m_1 - 1 when (m_0+m_1-1)(m_0+m_1+2) - sum m_i(m_i+1) >= -2,
    else m_0 + m_1.
    """
    graph = _plus_graph(recipe)
    mm = pad(m, graph.n_points)
    rho = excesses(graph, mm)
    if any(r < 0 for r in rho):
        return RegularityVerdict(
            "inapplicable", justification="the weighted graph is not consistent"
        )
    if rho[1] < 1:
        return RegularityVerdict(
            "inapplicable", justification="the excess at vertex 1 is not positive"
        )
    d = mm[0] + mm[1]
    square_sum = sum(x * (x + 1) for x in mm)
    tau = d - 1 if (d - 1) * (d + 2) - square_sum >= -2 else d
    return RegularityVerdict(
        "exact",
        tau=tau,
        justification="consistent with rho_1 >= 1; exact regularity criterion",
    )


def _min_nonnegative_virtual(m: Sequence[int]) -> int:
    """Least d >= 0 with d(d+3)/2 - sum m_i(m_i+1)/2 >= -1."""
    target = sum(x * (x + 1) for x in m) - 2
    if target <= 0:
        return 0
    d = max(0, (isqrt(9 + 4 * target) - 3) // 2)
    while d * (d + 3) < target:
        d += 1
    return d


def regularity_bracket(m: Sequence[int], recipe: GraphRecipe) -> RegularityVerdict:
    """Regularity bracket for almost consistent systems.

    lower: least degree at which the virtual dimension reaches -1 (any
    smaller degree has positive superabundance); upper: the non-speciality
    threshold m_0^G + m_1^G - epsilon of the unloaded system.
    """
    graph = _plus_graph(recipe)
    tame = is_almost_consistent(graph, m)
    if tame.verdict is not True:
        why = "undecided within search budget" if tame.undecided else "fails"
        return RegularityVerdict(
            "inapplicable", justification=f"almost consistency {why}"
        )
    m_g, _ = unload(graph, m, keep_trace=False)
    upper = m_g[0] + m_g[1] - epsilon(graph, m_g)
    lower = _min_nonnegative_virtual(m)
    if lower == upper:
        return RegularityVerdict(
            "exact",
            tau=upper,
            lower=lower,
            upper=upper,
            justification="virtual-dimension lower bound meets the "
            "non-speciality threshold",
        )
    return RegularityVerdict(
        "bracket",
        lower=lower,
        upper=upper,
        justification="bounds do not coincide",
    )


@dataclass(frozen=True)
class NonSpecialityVerdict:
    kind: str  # nonspecial_certified | equivalence | inapplicable
    nonspecial: bool | None = None
    threshold: int | None = None
    justification: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "nonspecial": self.nonspecial,
                "threshold": self.threshold,
                "justification": self.justification,
            }
        )


def nonspeciality_check(
    d: int, m: Sequence[int], recipe: GraphRecipe
) -> NonSpecialityVerdict:
    """Certify non-speciality of the degree-d system through the recipe.

    Sufficient certificate: almost consistent and
    d >= m_0^G + m_1^G - epsilon.  When the system is moreover consistent
    with rho_1 >= 1 and non-empty, non-speciality is equivalent to
    d >= m_0 + m_1 - 1 and the verdict decides both directions.
    """
    if d < 1:
        raise InputError("nonspeciality_check needs d >= 1")
    graph = _plus_graph(recipe)
    mm = pad(m, graph.n_points)
    tame = is_almost_consistent(graph, mm)
    if tame.verdict is not True:
        why = "undecided within search budget" if tame.undecided else "fails"
        return NonSpecialityVerdict(
            "inapplicable", justification=f"almost consistency {why}"
        )
    m_g, _ = unload(graph, mm, keep_trace=False)
    upper = m_g[0] + m_g[1] - epsilon(graph, m_g)
    rho = excesses(graph, mm)
    if (
        all(r >= 0 for r in rho)
        and rho[1] >= 1
        and expected_dimension(d, mm) >= 0
    ):
        threshold = mm[0] + mm[1] - 1
        return NonSpecialityVerdict(
            "equivalence",
            nonspecial=d >= threshold,
            threshold=threshold,
            justification="consistent, rho_1 >= 1 and non-empty: "
            "non-special iff d >= m_0 + m_1 - 1",
        )
    if d >= upper:
        return NonSpecialityVerdict(
            "nonspecial_certified",
            nonspecial=True,
            threshold=upper,
            justification="almost consistent and d reaches the unloaded "
            "threshold m_0 + m_1 - epsilon",
        )
    return NonSpecialityVerdict(
        "inapplicable",
        threshold=upper,
        justification="degree below the certificate threshold",
    )


@dataclass(frozen=True)
class StageTrace:
    """Bookkeeping for one specialization stage (one activated satellite)."""

    graph_index: int
    step1_iterations: int
    accepted: str  # consistent | a-exception
    unloading: tuple[UnloadStep, ...] = ()

    def to_obj(self) -> dict:
        obj = {
            "graph_index": self.graph_index,
            "step1_iterations": self.step1_iterations,
            "accepted": self.accepted,
        }
        if self.unloading:
            obj["unloading"] = [
                [st.vertex, st.excess, st.delta, st.count] for st in self.unloading
            ]
        return obj


@dataclass(frozen=True)
class BoundReport:
    m_input: tuple[int, ...]
    recipe: GraphRecipe
    permutation: tuple[int, ...]
    m_prime: tuple[int, ...]
    beta: int
    j_found: int
    stage_count: int
    stages: tuple[StageTrace, ...]
    wall_time: float = field(compare=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "m": list(self.m_input),
                "recipe": str(self.recipe),
                "permutation": list(self.permutation),
                "m_prime": list(self.m_prime),
                "beta": self.beta,
                "j_found": self.j_found,
                "stage_count": self.stage_count,
                "stages": [st.to_obj() for st in self.stages],
                "wall_time": self.wall_time,
            }
        )


def _run_stages_compiled(
    ms: Sequence[int],
    graph: ProximityGraph,
    sats: Sequence[tuple[int, int]],
    a: int,
) -> tuple[tuple[int, ...], list[StageTrace]]:
    """The stage loop of :func:`beta_bound` on int64 arrays, with the
    unloading cascades in the compiled kernel.

    Exact replay of the pure-Python loop: same unit steps, same batches,
    same iteration counts and acceptance labels.  Only used when no trace
    is requested.
    """
    import numpy as np

    from ._kernels import step_and_unload
    from .proximity import _MAX_UNLOAD_BATCHES

    count = graph.n_points
    n = count - 1

    # CSR encoding of the graph with the satellite edges pre-allocated but
    # inactive; ch*/pa* lengths grow as stages activate them.  The full
    # children lists are sorted, so the chain child i+1 comes first and the
    # satellites follow in activation order.
    chf: list[int] = []
    chs = np.empty(count, np.int64)
    chl = np.zeros(count, np.int64)
    for i in range(count):
        chs[i] = len(chf)
        chf.extend(graph.children[i])
        if i < n:
            chl[i] = 1
    chf_arr = np.array(chf if chf else [0], np.int64)
    paf = np.zeros(2 * count, np.int64)
    pas = np.arange(0, 2 * count, 2, dtype=np.int64)
    pal = np.zeros(count, np.int64)
    for i in range(1, count):
        paf[2 * i] = i - 1
        pal[i] = 1

    ms_arr = np.array(ms, np.int64)
    rho = np.empty(count, np.int64)
    for i in range(count):
        rho[i] = ms_arr[i] - (ms_arr[i + 1] if i < n else 0)

    stages: list[StageTrace] = []
    for (s_label, q) in sats:
        iters = 0
        while True:
            negatives = []
            extended_q = int(rho[q]) - int(ms_arr[s_label])
            if extended_q < 0:
                negatives.append((q, extended_q))
            if a != q and rho[a] < 0:
                negatives.append((a, int(rho[a])))
            if not negatives:
                accepted = "consistent"
                break
            if len(negatives) > 1:
                raise AssumptionViolationError(
                    f"stage {s_label}: expected a unique negative excess, "
                    f"found {negatives}"
                )
            j, exc = negatives[0]
            if j == a and exc == -1:
                accepted = "a-exception"
                break
            batches = step_and_unload(
                j, True, ms_arr, rho, chf_arr, chs, chl, paf, pas, pal,
                _MAX_UNLOAD_BATCHES,
            )
            if batches < 0:
                raise InternalError("unloading did not terminate (internal bug)")
            iters += 1
        bad = [
            int(i)
            for i in np.flatnonzero(rho < 0)
            if not (i == a and rho[i] == -1)
        ]
        if bad:
            raise AssumptionViolationError(
                f"stage {s_label}: stray negative excesses at {bad}"
            )
        rho[q] -= ms_arr[s_label]
        chl[q] += 1
        paf[2 * s_label + 1] = q
        pal[s_label] = 2
        stages.append(StageTrace(s_label, iters, accepted))

    batches = step_and_unload(
        0, False, ms_arr, rho, chf_arr, chs, chl, paf, pas, pal,
        _MAX_UNLOAD_BATCHES,
    )
    if batches < 0:
        raise InternalError("unloading did not terminate (internal bug)")
    return tuple(int(x) for x in ms_arr), stages


def beta_bound(
    m: Sequence[int], recipe: GraphRecipe, keep_trace: bool = False
) -> BoundReport:
    """The staged-specialization upper bound beta(m) for the recipe graph.

    The multiplicities are sorted non-increasingly (recording the
    permutation), padded with zeros to the plus graph, specialized one
    satellite edge at a time through the two-step procedure, fully unloaded
    on the final graph, and the first degree with positive h^1 on the
    associated surface fixes beta = m_0' + m_1' - j + 1.
    """
    t0 = time.perf_counter()
    m = tuple(int(x) for x in m)
    if len(m) < 2:
        raise InputError("beta_bound needs at least two multiplicities")
    graph = _plus_graph(recipe)
    count = graph.n_points
    if len(m) > count:
        raise InputError(
            f"{len(m)} multiplicities exceed the {count} vertices of {recipe}"
        )
    permutation = tuple(sorted(range(len(m)), key=lambda i: (-m[i], i)))
    ms = list(pad([m[i] for i in permutation], count))
    n = count - 1

    sats = graph.satellite_pairs()
    if sats and sats[-1][0] >= n:
        raise AssumptionViolationError(
            "a satellite at the last vertex prevents the stage sequence from "
            "terminating at the full graph"
        )

    # the parameter a, from the full graph and the sorted padded input
    a = 0
    for i in range(n - 1, -1, -1):
        if sum(1 for j in graph.children[i] if ms[j] > 0) > 1:
            a = i
            break

    if not keep_trace and HAVE_NUMBA and (not ms or max(ms) < 2**31):
        m_prime, stages = _run_stages_compiled(ms, graph, sats, a)
        return _finish_bound(m, recipe, permutation, m_prime, stages, sats, graph, t0)

    # active graph: start from the plain chain, activate satellites in turn
    children = [[i + 1] if i < n else [] for i in range(count)]
    parents = [[i - 1] if i > 0 else [] for i in range(count)]
    rho = [ms[i] - sum(ms[k] for k in children[i]) for i in range(count)]

    stages = []
    for (s_label, q) in sats:
        # Invariant: rho >= 0 on the active graph except for a tolerated
        # stale -1 at vertex a, so the excesses of the extended graph can
        # only be negative at a or at q (whose excess drops by ms[s_label]).
        iters = 0
        steps: list[UnloadStep] | None = [] if keep_trace else None
        while True:
            negatives = []
            extended_q = rho[q] - ms[s_label]
            if extended_q < 0:
                negatives.append((q, extended_q))
            if a != q and rho[a] < 0:
                negatives.append((a, rho[a]))
            if not negatives:
                accepted = "consistent"
                break
            if len(negatives) > 1:
                raise AssumptionViolationError(
                    f"stage {s_label}: expected a unique negative excess, "
                    f"found {negatives}"
                )
            j, exc = negatives[0]
            if j == a and exc == -1:
                accepted = "a-exception"
                break
            if steps is not None:
                steps.append(UnloadStep(j, exc))
            _step_inplace(ms, rho, j, children, parents)
            touched = [j, *parents[j]]
            for c in children[j]:
                touched.append(c)
                touched.extend(parents[c])
            _unload_inplace(ms, rho, children, parents, steps, seeds=touched)
            iters += 1
        bad = [
            i
            for i, r in enumerate(rho)
            if r < 0 and not (i == a and r == -1)
        ]
        if bad:
            raise AssumptionViolationError(
                f"stage {s_label}: stray negative excesses at {bad}"
            )
        rho[q] -= ms[s_label]
        children[q].append(s_label)
        parents[s_label].append(q)
        stages.append(
            StageTrace(s_label, iters, accepted, tuple(steps) if steps else ())
        )

    # m' := the consistent system on the full graph
    _unload_inplace(ms, rho, children, parents, None)
    return _finish_bound(m, recipe, permutation, tuple(ms), stages, sats, graph, t0)


def _finish_bound(
    m: tuple[int, ...],
    recipe: GraphRecipe,
    permutation: tuple[int, ...],
    m_prime: tuple[int, ...],
    stages: list[StageTrace],
    sats: Sequence[tuple[int, int]],
    graph: ProximityGraph,
    t0: float,
) -> BoundReport:
    """Degree search and report assembly shared by both stage engines."""
    model = surface.SurfaceModel(graph)
    d0 = m_prime[0] + m_prime[1]
    j = 0
    while True:
        j += 1
        degree = d0 - j
        if degree < 0:
            raise AssumptionViolationError(
                "the degree search ran below 0 without finding positive h1"
            )
        cls = surface.DivisorClass.from_system(degree, m_prime)
        if surface._h1_positive(cls, model):
            break

    return BoundReport(
        m_input=m,
        recipe=recipe.with_decoration("plus"),
        permutation=permutation,
        m_prime=m_prime,
        beta=d0 - j + 1,
        j_found=j,
        stage_count=len(sats) + 1,
        stages=tuple(stages),
        wall_time=time.perf_counter() - t0,
    )


def _beta_task(args: tuple[tuple[int, ...], GraphRecipe]) -> BoundReport:
    m, recipe = args
    return beta_bound(m, recipe)


def best_beta(
    m: Sequence[int], jobs: int | None = None
) -> tuple[BoundReport, GraphRecipe]:
    """Minimum beta over all representative recipes for |m| points.

    Evaluations are independent; ``jobs`` > 1 runs them in a process pool
    (the result does not depend on the level of parallelism).
    """
    m = tuple(int(x) for x in m)
    if len(m) < 2:
        raise InputError("best_beta needs at least two multiplicities")
    recipes = enumerate_representatives(len(m) - 1)
    tasks = [(m, rec) for rec in recipes]
    if jobs is not None and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_beta_task, tasks))
    else:
        reports = [_beta_task(t) for t in tasks]
    best = min(
        range(len(reports)), key=lambda i: (reports[i].beta, recipes[i].factors)
    )
    return reports[best], recipes[best]


@dataclass(frozen=True)
class Inequality:
    """m_index - sum of m_j over ``subtracted`` >= min_value."""

    index: int
    subtracted: tuple[int, ...]
    min_value: int

    def to_obj(self) -> dict:
        return {
            "index": self.index,
            "subtracted": list(self.subtracted),
            "min_value": self.min_value,
        }


def conjecture_family(recipe: GraphRecipe, n: int) -> tuple[Inequality, ...]:
    """The linear inequalities in m_0..m_n cutting out the family on which
    speciality is fully characterized: excess >= 0 at every vertex and
    excess >= 1 at vertex 1."""
    graph = _plus_graph(recipe)
    if graph.n_points < n + 1:
        raise InputError(
            f"recipe {recipe} has {graph.n_points} vertices, fewer than {n + 1}"
        )
    out = []
    for i in range(n + 1):
        subtracted = tuple(j for j in graph.children[i] if j <= n)
        out.append(Inequality(i, subtracted, 1 if i == 1 else 0))
    return tuple(out)
