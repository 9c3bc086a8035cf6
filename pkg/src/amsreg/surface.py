"""Picard lattice of the surface obtained by blowing up a pencil at
infinity, and the dimension engine for its complete linear systems.

Classes live in the basis (L, E_0, ..., E_n) with the intersection pairing
D . D' = a a' - sum c_i c'_i.  The cone basis (H~, E~_0, ..., E~_n) of the
effective semigroup gives an exact effectivity test, and the reduction loop
computes h^0 (and from it h^1) for every class.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .errors import InputError, InternalError
from .proximity import ProximityGraph, pad

# Defensive cap; exceeding it means a bug, not a slow input.
_MAX_REDUCE_BATCHES = 5_000_000


@dataclass(frozen=True)
class DivisorClass:
    """Integer class a*L + sum c_i E_i.

    The system D_{d,m} of degree-d curves with multiplicities m is stored
    with a = d and c_i = -m_i.
    """

    a: int
    c: tuple[int, ...]

    @classmethod
    def from_system(cls, d: int, m: Sequence[int], n_points: int | None = None):
        mm = tuple(int(x) for x in m)
        if n_points is not None:
            mm = pad(mm, n_points)
        return cls(int(d), tuple(-x for x in mm))

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(-x for x in self.c)

    def intersect(self, other: "DivisorClass") -> int:
        if len(self.c) != len(other.c):
            raise InputError("divisor classes live on different lattices")
        return self.a * other.a - sum(x * y for x, y in zip(self.c, other.c))

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        if len(self.c) != len(other.c):
            raise InputError("divisor classes live on different lattices")
        return DivisorClass(self.a + other.a, tuple(x + y for x, y in zip(self.c, other.c)))

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        if len(self.c) != len(other.c):
            raise InputError("divisor classes live on different lattices")
        return DivisorClass(self.a - other.a, tuple(x - y for x, y in zip(self.c, other.c)))

    def to_json(self) -> str:
        return json.dumps({"d": self.a, "m": list(self.multiplicities)})

    @classmethod
    def from_json(cls, text: str) -> "DivisorClass":
        try:
            obj = json.loads(text)
            return cls.from_system(int(obj["d"]), [int(x) for x in obj["m"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid divisor JSON: {exc}") from exc


def canonical_class(n_points: int) -> DivisorClass:
    """K = -3L + E_0 + ... + E_n."""
    return DivisorClass(-3, (1,) * n_points)


def euler_characteristic(d: DivisorClass) -> int:
    """chi(D) = 1 + (D^2 - K.D)/2, an exact integer."""
    k = canonical_class(len(d.c))
    num = d.intersect(d) - k.intersect(d)
    if num % 2:
        raise InternalError("D^2 - K.D is odd")  # impossible on this lattice
    return 1 + num // 2


@dataclass(frozen=True)
class SurfaceModel:
    """The blown-up surface attached to a chain configuration of the plus
    recipe form, carrying the cone basis H~, E~_0, ..., E~_n."""

    graph: ProximityGraph

    def __post_init__(self):
        if self.graph.n_points < 2:
            raise InputError("the surface needs at least two blown-up points")
        if not self.graph.is_chain():
            raise InputError("the surface model requires a chain configuration")

    @property
    def n_points(self) -> int:
        return self.graph.n_points

    @cached_property
    def canonical(self) -> DivisorClass:
        return canonical_class(self.n_points)

    @cached_property
    def h_tilde(self) -> DivisorClass:
        """Strict transform of the line at infinity: L - E_0 - E_1."""
        c = [0] * self.n_points
        c[0] = c[1] = -1
        return DivisorClass(1, tuple(c))

    @cached_property
    def e_tilde(self) -> tuple[DivisorClass, ...]:
        """E~_i = E_i - sum of E_k over the vertices k proximate to i."""
        out = []
        for i in range(self.n_points):
            c = [0] * self.n_points
            c[i] = 1
            for k in self.graph.children[i]:
                c[k] = -1
            out.append(DivisorClass(0, tuple(c)))
        return tuple(out)


def _check_rank(d: DivisorClass, s: SurfaceModel) -> None:
    if len(d.c) != s.n_points:
        raise InputError(
            f"class on {len(d.c)} exceptional divisors vs surface with {s.n_points}"
        )


def cone_coordinates(d: DivisorClass, s: SurfaceModel) -> tuple[int, tuple[int, ...]]:
    """The unique integers (alpha; beta_0..beta_n) with
    D = alpha H~ + sum beta_i E~_i.

    All coordinates non-negative is exactly effectivity of the class.
    """
    _check_rank(d, s)
    parents = s.graph.parents
    alpha = d.a
    beta = [0] * s.n_points
    for i in range(s.n_points):
        v = d.c[i] + (alpha if i < 2 else 0)
        for p in parents[i]:
            v += beta[p]
        beta[i] = v
    return alpha, tuple(beta)


def is_effective(d: DivisorClass, s: SurfaceModel) -> bool:
    alpha, beta = cone_coordinates(d, s)
    return alpha >= 0 and all(b >= 0 for b in beta)


def is_nef(d: DivisorClass, s: SurfaceModel) -> bool:
    """True iff D meets H~ and every E~_i non-negatively."""
    _check_rank(d, s)
    return d.intersect(s.h_tilde) >= 0 and all(
        d.intersect(e) >= 0 for e in s.e_tilde
    )


@dataclass(frozen=True)
class ReduceStep:
    """``count`` consecutive subtractions of one cone generator
    (generator 'H' or the index i of E~_i)."""

    generator: object
    count: int


def nef_reduce(
    d: DivisorClass, s: SurfaceModel, keep_trace: bool = True
) -> tuple[DivisorClass, str, tuple[ReduceStep, ...]]:
    """Subtract cone generators F with D.F < 0 until the class is nef or
    obviously not effective.

    Scan order is H~ first, then E~_0, E~_1, ... (smallest index first);
    h^0 is preserved at every step, so the terminal class does not depend
    on the order.  The emptiness test is D'.L < 0 or D'.(L - E_1) < 0,
    checked where it is decisive: D'.L < 0 before every step (L is
    effective, so no subtraction can rescue it), D'.(L - E_1) < 0 at the
    point where it blocks further E~_1 subtractions (checked eagerly it
    would misread effective classes with positive E-coefficients).  The
    cone-coordinate effectivity test runs in parallel and any disagreement
    raises a hard error.  ``keep_trace=False`` skips recording the step
    list (long reductions produce millions of unit batches).
    """
    _check_rank(d, s)
    alpha0, beta0 = cone_coordinates(d, s)
    expect_empty = alpha0 < 0 or any(b < 0 for b in beta0)

    graph = s.graph
    n = s.n_points
    children = [tuple(ks) for ks in graph.children]
    parents = [tuple(ps) for ps in graph.parents]
    a = d.a
    c = list(d.c)
    v_h = a + c[0] + c[1]
    v = [-c[i] + sum(c[k] for k in children[i]) for i in range(n)]

    heap = [i for i in range(n) if v[i] < 0]
    heapq.heapify(heap)
    push, pop = heapq.heappush, heapq.heappop
    steps: list[ReduceStep] = []
    status = None
    batches = 0

    while True:
        batches += 1
        if batches > _MAX_REDUCE_BATCHES:
            raise InternalError("nef reduction did not terminate (internal bug)")
        if a < 0:
            status = "empty"
            break
        if v_h < 0:
            t = min(-v_h, a + 1)
            a -= t
            v_h += t  # net: -t from a, +t from each of c_0, c_1
            c[0] += t
            c[1] += t
            nv = v[0] - t
            v[0] = nv
            if nv < 0:
                push(heap, 0)
            nv = v[1] - t
            v[1] = nv
            if nv < 0:
                push(heap, 1)
            for p in parents[0]:
                v[p] += t
            for p in parents[1]:
                v[p] += t
            if keep_trace:
                steps.append(ReduceStep("H", t))
            continue
        i = None
        while heap:
            i = pop(heap)
            if v[i] < 0:
                break
            i = None
        if i is None:
            status = "nef"
            break
        kids = children[i]
        gain = 1 + len(kids)
        t = (-v[i] + gain - 1) // gain
        if i == 1:
            cap = a + c[1] + 1
            if cap <= 0:
                # D.(L - E_1) < 0.  For classes with positive exceptional
                # coefficients this signal alone is inconclusive (E~_0 is
                # effective yet meets L - E_1 at -1), so accept it only
                # when the exact cone test agrees; otherwise keep
                # subtracting E~_1.
                if expect_empty:
                    status = "empty"
                    break
            else:
                t = min(t, cap)
        # subtract t copies of E~_i: c_i -= t, c_k += t for children k
        c[i] -= t
        nv = v[i] + t * gain
        v[i] = nv
        if nv < 0:
            push(heap, i)
        if i < 2:
            v_h -= t
        for p in parents[i]:
            nv = v[p] - t
            v[p] = nv
            if nv < 0:
                push(heap, p)
        for k in kids:
            c[k] += t
            nv = v[k] - t
            v[k] = nv
            if nv < 0:
                push(heap, k)
            if k < 2:
                v_h += t
            for q in parents[k]:
                if q != i:
                    nv = v[q] + t
                    v[q] = nv
                    if nv < 0:
                        push(heap, q)
        if keep_trace:
            steps.append(ReduceStep(i, t))

    terminal = DivisorClass(a, tuple(c))
    if (status == "empty") != expect_empty:
        raise InternalError(
            "emptiness tests disagree: the L/(L - E_1) stopping rule says "
            f"{status} but the cone coordinates say "
            f"{'empty' if expect_empty else 'effective'} for {d}"
        )
    return terminal, status, tuple(steps)


def h0(d: DivisorClass, s: SurfaceModel) -> int:
    """h^0 of the line bundle: 0 for empty classes, chi of the terminal nef
    class otherwise."""
    terminal, status, _ = nef_reduce(d, s, keep_trace=False)
    if status == "empty":
        return 0
    value = euler_characteristic(terminal)
    if value < 0:
        raise InternalError(f"negative chi {value} on a nef terminal class")
    return value


def h1(d: DivisorClass, s: SurfaceModel) -> int:
    """h^1 via Riemann-Roch: h^0 - chi + h^2, with h^2 = h^0(K - D)."""
    k = s.canonical
    k_minus_d = k - d
    h2 = h0(k_minus_d, s) if is_effective(k_minus_d, s) else 0
    value = h0(d, s) - euler_characteristic(d) + h2
    if value < 0:
        raise InternalError(f"negative h1 = {value} for {d}")
    return value


def _h1_positive(d: DivisorClass, s: SurfaceModel) -> bool:
    """Sign of h^1, decided without the reduction loop whenever possible.

    An empty class has h^0 = 0, so h^1 = h^2 - chi exactly.  An effective
    class that meets every E~_i non-negatively and E~_1 positively is
    non-special exactly when it meets H~ at -1 or better; this settles the
    sign in linear time.  Any remaining case falls back to the full h^1.
    """
    k_minus_d = s.canonical - d
    h2 = h0(k_minus_d, s) if is_effective(k_minus_d, s) else 0
    if not is_effective(d, s):
        return h2 - euler_characteristic(d) > 0
    c = d.c
    children = s.graph.children
    v = [-c[i] + sum(c[k] for k in children[i]) for i in range(s.n_points)]
    if v[1] >= 1 and all(x >= 0 for x in v):
        return d.a + c[0] + c[1] <= -2
    return h1(d, s) > 0
