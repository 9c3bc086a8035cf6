"""Configurations of infinitely near points as proximity graphs.

A configuration of n+1 points is encoded by its proximity relation: the set
of ordered pairs ``(i, j)`` with ``i > j`` meaning "point i is proximate to
point j".  Everything downstream (proximity matrices, excesses, unloading)
is a function of this combinatorial datum only.

All values are immutable after construction and all operations are pure, so
everything here is safe to evaluate concurrently.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import InputError, InternalError

# Defensive cap on unloading batches; a loop this long means a bug, not a
# legitimately slow input.
_MAX_UNLOAD_BATCHES = 2_000_000


@dataclass(frozen=True)
class ProximityGraph:
    """Proximity relation on vertices labelled ``0 .. n_points-1``.

    ``prox`` holds ordered pairs ``(i, j)``, ``i > j``: vertex i is
    proximate to vertex j.  A vertex is proximate to at most two others
    (free: at most one, satellite: exactly two).
    """

    n_points: int
    prox: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n_points < 1:
            raise InputError("a proximity graph needs at least one vertex")
        seen: dict[int, int] = {}
        for (i, j) in self.prox:
            if not (0 <= j < i < self.n_points):
                raise InputError(f"bad proximity pair {(i, j)}")
            seen[i] = seen.get(i, 0) + 1
            if seen[i] > 2:
                raise InputError(f"vertex {i} proximate to more than 2 vertices")

    @cached_property
    def parents(self) -> tuple[tuple[int, ...], ...]:
        """parents[i] = sorted vertices that i is proximate to."""
        out: list[list[int]] = [[] for _ in range(self.n_points)]
        for (i, j) in self.prox:
            out[i].append(j)
        return tuple(tuple(sorted(p)) for p in out)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        """children[j] = sorted vertices proximate to j."""
        out: list[list[int]] = [[] for _ in range(self.n_points)]
        for (i, j) in self.prox:
            out[j].append(i)
        return tuple(tuple(sorted(c)) for c in out)

    def is_chain(self) -> bool:
        """True when every consecutive pair (i, i-1) is a proximity."""
        return all((i, i - 1) in self.prox for i in range(1, self.n_points))

    def satellite_pairs(self) -> tuple[tuple[int, int], ...]:
        """Non-consecutive proximities (the curved-dotted edges of a chain
        graph), sorted by the proximate vertex."""
        return tuple(sorted((i, j) for (i, j) in self.prox if i - j > 1))

    def truncate(self, k: int) -> "ProximityGraph":
        """Restriction to the first ``k`` vertices."""
        if not 1 <= k <= self.n_points:
            raise InputError(f"cannot truncate {self.n_points} vertices to {k}")
        return ProximityGraph(k, frozenset(p for p in self.prox if p[0] < k))

    def to_json(self) -> str:
        return json.dumps({"n": self.n_points, "prox": sorted(map(list, self.prox))})

    @classmethod
    def from_json(cls, text: str) -> "ProximityGraph":
        try:
            obj = json.loads(text)
            return cls(int(obj["n"]), frozenset((int(i), int(j)) for i, j in obj["prox"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid graph JSON: {exc}") from exc

    @classmethod
    def chain(cls, n_points: int) -> "ProximityGraph":
        """Chain of free points."""
        return cls(n_points, frozenset((i, i - 1) for i in range(1, n_points)))


@dataclass(frozen=True)
class UnloadStep:
    """One unloading event: ``count`` consecutive single steps at ``vertex``.

    The s-th single step of the batch (s = 0 .. count-1) happens at excess
    ``excess + s * delta`` where ``delta`` is the excess increment per step
    (1 + number of proximate vertices).
    """

    vertex: int
    excess: int
    delta: int = 1
    count: int = 1

    def single_excesses(self) -> tuple[int, ...]:
        return tuple(self.excess + s * self.delta for s in range(self.count))


@dataclass(frozen=True)
class UnloadingTrace:
    steps: tuple[UnloadStep, ...] = ()

    @property
    def all_tame(self) -> bool:
        return all(e == -1 for st in self.steps for e in st.single_excesses())

    @property
    def total_steps(self) -> int:
        return sum(st.count for st in self.steps)


def pad(m: Sequence[int], n_points: int) -> tuple[int, ...]:
    """Pad a multiplicity system with trailing zeros to ``n_points`` entries."""
    m = tuple(int(x) for x in m)
    if len(m) > n_points:
        raise InputError(f"system of length {len(m)} exceeds {n_points} vertices")
    if any(x < 0 for x in m):
        raise InputError("multiplicities must be non-negative")
    return m + (0,) * (n_points - len(m))


def _pad_signed(m: Sequence[int], n_points: int) -> tuple[int, ...]:
    """Like :func:`pad` but admits negative entries.

    Intermediate states of an unloading sequence may carry temporarily
    negative virtual multiplicities; only the consistent fixed point is
    guaranteed non-negative.
    """
    m = tuple(int(x) for x in m)
    if len(m) > n_points:
        raise InputError(f"system of length {len(m)} exceeds {n_points} vertices")
    return m + (0,) * (n_points - len(m))


def proximity_matrix(graph: ProximityGraph) -> list[list[int]]:
    """Lower unitriangular matrix with -1 at each proximity pair."""
    n = graph.n_points
    mat = [[0] * n for _ in range(n)]
    for i in range(n):
        mat[i][i] = 1
    for (i, j) in graph.prox:
        mat[i][j] = -1
    return mat


def inverse_proximity_matrix(graph: ProximityGraph) -> list[list[int]]:
    """Exact integer inverse of the proximity matrix (all entries >= 0).

    Column j solves P x = e_j by forward substitution:
    x_i = delta_ij + sum of x_k over the vertices k that i is proximate to.
    """
    n = graph.n_points
    parents = graph.parents
    inv = [[0] * n for _ in range(n)]
    for j in range(n):
        for i in range(j, n):
            v = 1 if i == j else 0
            for k in parents[i]:
                v += inv[k][j]
            inv[i][j] = v
    return inv


def excesses(graph: ProximityGraph, m: Sequence[int]) -> tuple[int, ...]:
    """rho_j = m_j - sum of m_k over vertices k proximate to j."""
    mm = _pad_signed(m, graph.n_points)
    ch = graph.children
    return tuple(mm[j] - sum(mm[k] for k in ch[j]) for j in range(graph.n_points))


def is_consistent(graph: ProximityGraph, m: Sequence[int]) -> bool:
    return all(r >= 0 for r in excesses(graph, m))


def epsilon(graph: ProximityGraph, m: Sequence[int]) -> int:
    """1 if rho_1 >= 1, else 0.  Requires a consistent system and n >= 1."""
    if graph.n_points < 2:
        raise InputError("epsilon needs at least two points")
    rho = excesses(graph, m)
    if any(r < 0 for r in rho):
        raise InputError("epsilon is only defined for consistent systems")
    return 1 if rho[1] >= 1 else 0


def unload_step(graph: ProximityGraph, m: Sequence[int], j: int) -> tuple[int, ...]:
    """Single unloading step at vertex j (requires rho_j < 0).

    Increments m_j and decrements every multiplicity proximate to j.
    Entries may become temporarily negative (a vertex carrying multiplicity
    0 whose excess debt is settled through it); the consistent fixed point
    reached by iterating steps is always non-negative, and keeping the
    intermediate bookkeeping exact is what makes the procedure confluent.
    """
    mm = list(_pad_signed(m, graph.n_points))
    rho = excesses(graph, mm)
    if rho[j] >= 0:
        raise InputError(f"unloading step at vertex {j} needs negative excess, got {rho[j]}")
    mm[j] += 1
    for k in graph.children[j]:
        mm[k] -= 1
    return tuple(mm)


def apply_step(graph: ProximityGraph, m: Sequence[int], j: int) -> tuple[int, ...]:
    """The unloading replacement at vertex j without the negative-excess
    precondition (the staged bound algorithm applies it unconditionally)."""
    mm = list(_pad_signed(m, graph.n_points))
    mm[j] += 1
    for k in graph.children[j]:
        mm[k] -= 1
    return tuple(mm)


def _step_inplace(ms, rho, j, children, parents) -> None:
    """One unloading replacement at j, updating excesses in place."""
    ms[j] += 1
    rho[j] += 1 + len(children[j])
    for p in parents[j]:
        rho[p] -= 1
    for c in children[j]:
        ms[c] -= 1
        rho[c] -= 1
        for p in parents[c]:
            if p != j:
                rho[p] += 1


def _unload_inplace(
    ms: list[int],
    rho: list[int],
    children: Sequence[Sequence[int]],
    parents: Sequence[Sequence[int]],
    steps: list[UnloadStep] | None,
    seeds: Iterable[int] | None = None,
) -> None:
    """Drive ``ms`` to its consistent fixed point, maintaining ``rho``.

    Greedy smallest-index choice; steps at one vertex are batched (the
    excess at j rises by exactly 1 + #children per single step, so a batch
    of t steps is an exact replay of t single steps).  ``seeds`` optionally
    restricts the initial candidate set (callers that track which excesses
    may have turned negative avoid the full scan).
    """
    if seeds is None:
        heap = [j for j, r in enumerate(rho) if r < 0]
    else:
        heap = [j for j in set(seeds) if rho[j] < 0]
    heapq.heapify(heap)
    batches = 0
    while heap:
        j = heapq.heappop(heap)
        if rho[j] >= 0:
            continue
        batches += 1
        if batches > _MAX_UNLOAD_BATCHES:
            raise InternalError("unloading did not terminate (internal bug)")
        cs = children[j]
        delta = 1 + len(cs)
        t = (-rho[j] + delta - 1) // delta
        if steps is not None:
            steps.append(UnloadStep(j, rho[j], delta, t))
        ms[j] += t
        rho[j] += t * delta
        for p in parents[j]:
            rho[p] -= t
            if rho[p] < 0:
                heapq.heappush(heap, p)
        for c in cs:
            ms[c] -= t
            rho[c] -= t
            if rho[c] < 0:
                heapq.heappush(heap, c)
            for p in parents[c]:
                if p != j:
                    rho[p] += t


def unload(
    graph: ProximityGraph, m: Sequence[int], keep_trace: bool = True
) -> tuple[tuple[int, ...], UnloadingTrace]:
    """Unload to the unique consistent system with the same ideal sheaf.

    Returns the fixed point and the trace of steps taken (empty when the
    input is already consistent).  The result is independent of the step
    order; the implementation always picks the smallest negative-excess
    vertex so traces are reproducible.
    """
    ms = list(pad(m, graph.n_points))
    ch = graph.children
    rho = [ms[j] - sum(ms[k] for k in ch[j]) for j in range(graph.n_points)]
    steps: list[UnloadStep] | None = [] if keep_trace else None
    _unload_inplace(ms, rho, ch, graph.parents, steps)
    return tuple(ms), UnloadingTrace(tuple(steps) if steps else ())


@dataclass(frozen=True)
class TamenessResult:
    """Outcome of the almost-consistency decision.

    ``verdict`` is True/False when decided, None when the search budget ran
    out (explicitly distinct from False).  For a True verdict ``trace``
    certifies one all-tame unloading sequence.
    """

    verdict: bool | None
    trace: UnloadingTrace = field(default_factory=UnloadingTrace)

    @property
    def undecided(self) -> bool:
        return self.verdict is None


def is_almost_consistent(
    graph: ProximityGraph, m: Sequence[int], budget: int = 100_000
) -> TamenessResult:
    """Decide whether a sequence of tame steps (excess exactly -1) reaches
    the consistent fixed point.

    Strategy: greedy smallest-index steps first; if the greedy path meets an
    excess <= -2 while tame moves exist elsewhere, fall back to an
    exhaustive memoized search over orderings of the currently-(-1)
    vertices.  ``budget`` caps visited states; exhaustion yields verdict
    None.
    """
    mm = pad(m, graph.n_points)
    rho = excesses(graph, mm)
    if all(r >= 0 for r in rho):
        return TamenessResult(True)

    ch, par = graph.children, graph.parents

    # Greedy pass: smallest negative index must itself be tame.
    cur = list(mm)
    cur_rho = list(rho)
    steps: list[UnloadStep] = []
    greedy_ok = True
    while True:
        j = next((i for i, r in enumerate(cur_rho) if r < 0), None)
        if j is None:
            return TamenessResult(True, UnloadingTrace(tuple(steps)))
        if cur_rho[j] != -1:
            greedy_ok = False
            break
        steps.append(UnloadStep(j, -1))
        _step_inplace(cur, cur_rho, j, ch, par)
    if greedy_ok:  # pragma: no cover - loop exits via return or break
        raise InternalError("unreachable")

    # Exhaustive search over tame orderings from the original system.
    seen: set[tuple[int, ...]] = set()

    def dfs(state: tuple[int, ...], srho: tuple[int, ...], path: list[UnloadStep]):
        if state in seen:
            return None
        if len(seen) >= budget:
            raise _Budget()
        seen.add(state)
        negs = [i for i, r in enumerate(srho) if r < 0]
        if not negs:
            return list(path)
        for j in negs:
            if srho[j] != -1:
                continue
            nxt = list(state)
            nrho = list(srho)
            _step_inplace(nxt, nrho, j, ch, par)
            path.append(UnloadStep(j, -1))
            found = dfs(tuple(nxt), tuple(nrho), path)
            if found is not None:
                return found
            path.pop()
        return None

    try:
        found = dfs(mm, rho, [])
    except _Budget:
        return TamenessResult(None)
    if found is None:
        return TamenessResult(False)
    return TamenessResult(True, UnloadingTrace(tuple(found)))


class _Budget(Exception):
    pass


def replay_trace(
    graph: ProximityGraph, m: Sequence[int], trace: UnloadingTrace
) -> tuple[int, ...]:
    """Re-apply a trace step by step, re-validating every recorded excess.

    Raises InternalError on any mismatch; used by the audit tests.
    """
    cur = pad(m, graph.n_points)
    for st in trace.steps:
        for s in range(st.count):
            rho = excesses(graph, cur)
            expect = st.excess + s * st.delta
            if rho[st.vertex] != expect:
                raise InternalError(
                    f"trace mismatch at vertex {st.vertex}: "
                    f"recorded excess {expect}, actual {rho[st.vertex]}"
                )
            cur = apply_step(graph, cur, st.vertex)
    return cur
