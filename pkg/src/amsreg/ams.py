"""Arithmetic encodings of curves with one place at infinity.

Two equivalent routes produce the same resolution combinatorics:

* a delta-sequence (the generator sequence of the semigroup at infinity)
  expanded through Newton pairs and continued fractions, and
* a recipe (n_1, ..., n_r) assembled from the elementary graphs G(n) by the
  concatenation operation.

Their agreement on every recipe is the keystone cross-check of the module.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, prod

from .errors import InputError, InternalError
from .proximity import ProximityGraph, inverse_proximity_matrix
from .surface import DivisorClass, canonical_class


@dataclass(frozen=True)
class DeltaSequence:
    """A validated delta-sequence (delta_0, ..., delta_s).

    Derived data: ``d[i]`` = gcd(delta_0..delta_{i-1}) for i = 1..s+1 and
    the quotients ``nq[i]`` = d_i / d_{i+1} (indices shifted: d[0] is d_1).
    """

    delta: tuple[int, ...]

    @cached_property
    def d(self) -> tuple[int, ...]:
        out = []
        g = 0
        for x in self.delta:
            g = gcd(g, x)
            out.append(g)
        return tuple(out)

    @cached_property
    def nq(self) -> tuple[int, ...]:
        return tuple(self.d[i] // self.d[i + 1] for i in range(len(self.delta) - 1))

    @property
    def s(self) -> int:
        return len(self.delta) - 1


def _semigroup_contains(generators: tuple[int, ...], value: int) -> bool:
    # bounded coin-problem DP; table size is value+1
    reachable = bytearray(value + 1)
    reachable[0] = 1
    for g in generators:
        if g == 0 or g > value:
            continue
        for v in range(g, value + 1):
            if reachable[v - g]:
                reachable[v] = 1
    return bool(reachable[value])


def delta_violations(delta: tuple[int, ...]) -> list[str]:
    """Which of the conditions (I), (II), (III) fail for the sequence."""
    seq = DeltaSequence(tuple(int(x) for x in delta))
    if not seq.delta or any(x <= 0 for x in seq.delta):
        raise InputError("delta-sequence entries must be positive integers")
    s = seq.s
    out = []
    if seq.d[s] != 1 or any(n <= 1 for n in seq.nq):
        out.append("I")
    for i in range(1, s + 1):
        if not _semigroup_contains(seq.delta[:i], seq.nq[i - 1] * seq.delta[i]):
            out.append("II")
            break
    cond3 = (s == 0 or seq.delta[0] > seq.delta[1]) and all(
        seq.delta[i] < seq.delta[i - 1] * seq.nq[i - 2] for i in range(2, s + 1)
    )
    if not cond3:
        out.append("III")
    return out


def validate_delta_sequence(delta) -> DeltaSequence:
    violations = delta_violations(tuple(delta))
    if violations:
        err = InputError(
            "not a delta-sequence, violated condition(s): " + ", ".join(violations)
        )
        err.violations = violations
        raise err
    return DeltaSequence(tuple(int(x) for x in delta))


@dataclass(frozen=True)
class NewtonData:
    """Newton polygon segments (m_i, e_i), i = 0..g-1, of the branch."""

    pairs: tuple[tuple[int, int], ...]

    @property
    def g(self) -> int:
        return len(self.pairs)


def newton_polygons(seq: DeltaSequence) -> NewtonData:
    """Newton pairs from the delta-sequence, split on (delta_0 - delta_1) | delta_0."""
    dl, d, nq, s = seq.delta, seq.d, seq.nq, seq.s
    if s == 0:
        return NewtonData(())
    e0 = dl[0] - dl[1]
    if e0 <= 0:
        raise InputError("delta_0 > delta_1 is required")
    if dl[0] % e0 != 0:
        # s = g; d[i] is the gcd of the first i+1 entries
        pairs = [(dl[0], e0)]
        for i in range(1, s):
            pairs.append((nq[i - 1] * dl[i] - dl[i + 1], d[i]))
        return NewtonData(tuple(pairs))
    # s = g + 1; a smooth branch when s == 1
    if s == 1:
        return NewtonData(())
    pairs = [(dl[0] + nq[0] * dl[1] - dl[2], d[1])]
    for i in range(1, s - 1):
        pairs.append((nq[i] * dl[i + 1] - dl[i + 2], d[i + 1]))
    return NewtonData(tuple(pairs))


@dataclass(frozen=True)
class ResolutionCombinatorics:
    """Continued-fraction data h, k, s governing the proximity relations."""

    h: tuple[int, ...]
    k: tuple[int, ...]
    s: tuple[int, ...]

    @property
    def g(self) -> int:
        return len(self.k)

    def f(self, n: int) -> int:
        """k_t - 1 when n = s_t for some t, else h_n."""
        if not 1 <= n <= self.s[-1]:
            raise InputError(f"f({n}) is out of range")
        for t, st in enumerate(self.s):
            if n == st:
                return self.k[t] - 1
        return self.h[n]

    @property
    def resolution_points(self) -> int:
        """Vertex count of the minimal embedded resolution."""
        sg = self.s[-1]
        return sum(self.h[:sg]) + self.f(sg) + 1


def _cf_expand(value: Fraction) -> list[int]:
    """Euclidean continued-fraction quotients, final quotient >= 2 when the
    expansion has more than one term (the unique such expansion)."""
    p, q = value.numerator, value.denominator
    out = []
    while q:
        a, rem = divmod(p, q)
        out.append(a)
        p, q = q, rem
    if len(out) > 1 and out[-1] == 1:
        out.pop()
        out[-1] += 1
    return out


def resolution_combinatorics(newton: NewtonData) -> ResolutionCombinatorics:
    """h, k, s from the continued fractions of m_{j-1}/e_{j-1} + k_{j-1}."""
    h: list[int] = []
    k: list[int] = []
    s: list[int] = []
    prev_k = 0
    prev_s = 0
    for j, (m, e) in enumerate(newton.pairs, start=1):
        quotients = _cf_expand(Fraction(m, e) + prev_k)
        if len(quotients) < 2:
            raise InternalError(
                "continued fraction for Newton pair "
                f"{(m, e)} collapsed to a single quotient; the h/k split is "
                "undefined for this input"
            )
        *hs, kj = quotients
        if any(x < 1 for x in hs) or kj < 2:
            raise InternalError(
                f"continued-fraction expansion {quotients} breaks the "
                "positivity convention"
            )
        h.extend(hs)
        prev_s += len(hs)
        prev_k = kj
        k.append(kj)
        s.append(prev_s)
    return ResolutionCombinatorics(tuple(h), tuple(k), tuple(s))


def delta_to_proximity(seq: DeltaSequence, n_points: int | None = None) -> ProximityGraph:
    """Proximity graph of the points infinitely near the place at infinity.

    With no explicit ``n_points`` the minimal embedded resolution is
    returned; extra requested vertices are free chain points.
    """
    newton = newton_polygons(seq)
    if newton.g == 0:
        # smooth branch: no satellites; two points resolve the tangency
        # with the line at infinity
        return ProximityGraph.chain(n_points if n_points is not None else 2)
    comb = resolution_combinatorics(newton)
    minimal = comb.resolution_points
    if n_points is None:
        n_points = minimal
    elif n_points < minimal:
        raise InputError(
            f"{n_points} vertices requested but the minimal resolution has {minimal}"
        )
    prox = {(i, i - 1) for i in range(1, n_points)}
    offset = 0
    for n in range(1, comb.s[-1] + 1):
        offset = sum(comb.h[:n])
        for l in range(offset + 1, offset + comb.f(n) + 1):
            prox.add((l, offset - 1))
    return ProximityGraph(n_points, frozenset(prox))


_RECIPE_RE = re.compile(r"^\((\d+(?:,\d+)*)\)([+-]?)$")


@dataclass(frozen=True)
class GraphRecipe:
    """A sequence (n_1, ..., n_r), n_i >= 2, with a decoration."""

    factors: tuple[int, ...]
    decoration: str = "plain"

    def __post_init__(self):
        if not self.factors or any(n < 2 for n in self.factors):
            raise InputError("recipe factors must all be >= 2")
        if self.decoration not in ("plain", "minus", "plus"):
            raise InputError(f"unknown decoration {self.decoration!r}")

    @property
    def vertex_count(self) -> int:
        plain = 2 * sum(self.factors) - len(self.factors)
        if self.decoration == "minus":
            return plain - (self.factors[-1] - 1)
        if self.decoration == "plus":
            return plain + 1
        return plain

    def with_decoration(self, decoration: str) -> "GraphRecipe":
        return GraphRecipe(self.factors, decoration)

    def __str__(self) -> str:
        mark = {"plain": "", "minus": "-", "plus": "+"}[self.decoration]
        return "(" + ",".join(map(str, self.factors)) + ")" + mark

    @classmethod
    def parse(cls, text: str) -> "GraphRecipe":
        m = _RECIPE_RE.match(text.strip())
        if not m:
            raise InputError(f"cannot parse recipe {text!r}; expected e.g. '(2,2)-'")
        factors = tuple(int(x) for x in m.group(1).split(","))
        decoration = {"": "plain", "-": "minus", "+": "plus"}[m.group(2)]
        return cls(factors, decoration)


def _elementary_graph(n: int) -> ProximityGraph:
    """G(n): 2n-1 chain vertices, vertices 1..n-1 proximate to 0."""
    count = 2 * n - 1
    prox = {(i, i - 1) for i in range(1, count)}
    prox.update((i, 0) for i in range(2, n))
    return ProximityGraph(count, frozenset(prox))


def _concatenate(left: ProximityGraph, right: ProximityGraph) -> ProximityGraph:
    """The associative operation on unibranched graphs: relabel the right
    block after the left one and join with a continuous and a curved edge."""
    off = left.n_points
    prox = set(left.prox)
    prox.update((i + off, j + off) for (i, j) in right.prox)
    prox.add((off, off - 1))
    prox.add((off + 1, off - 1))
    return ProximityGraph(off + right.n_points, frozenset(prox))


def build_graph(recipe: GraphRecipe) -> ProximityGraph:
    graph = _elementary_graph(recipe.factors[0])
    for n in recipe.factors[1:]:
        graph = _concatenate(graph, _elementary_graph(n))
    if recipe.decoration == "minus":
        return graph.truncate(graph.n_points - (recipe.factors[-1] - 1))
    if recipe.decoration == "plus":
        count = graph.n_points
        return ProximityGraph(count + 1, graph.prox | {(count, count - 1)})
    return graph


def delta_for_recipe(recipe: GraphRecipe) -> DeltaSequence:
    """delta_k = n_{k+1} n_{k+2} ... n_r (and delta_r = 1)."""
    f = recipe.factors
    return DeltaSequence(tuple(prod(f[k:]) for k in range(len(f))) + (1,))


def ams_degree(recipe: GraphRecipe) -> int:
    """Degree of the corresponding curve: the product of the factors."""
    return prod(recipe.factors)


def is_p_sufficient_chain(graph: ProximityGraph) -> tuple[bool, int]:
    """Chain criterion for P-sufficiency.

    Evaluates -9 D_n^2 - (K . D_n)^2 where D_n = sum_j b_nj E_j is built
    from the last row of the inverse proximity matrix; the configuration is
    P-sufficient iff the value is positive.  Returns (verdict, value).
    """
    if not graph.is_chain():
        raise InputError("the single-condition criterion only applies to chains")
    u = inverse_proximity_matrix(graph)[-1]
    d_n = DivisorClass(0, tuple(u))
    k = canonical_class(graph.n_points)
    value = -9 * d_n.intersect(d_n) - k.intersect(d_n) ** 2
    return value > 0, value


def enumerate_representatives(n: int) -> list[GraphRecipe]:
    """All plus-decorated recipes representing the n-equivalence classes.

    Either r = 1 with (n+1)/2 <= n_1 <= n+1, or r > 1 with
    t = n - 2*(n_1+...+n_{r-1}) + r > 0 and t/2 <= n_r <= t.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    out = []
    for n1 in range(max(2, -(-(n + 1) // 2)), n + 2):
        out.append(GraphRecipe((n1,), "plus"))

    def extend(prefix: tuple[int, ...]) -> None:
        r = len(prefix) + 1
        t = n - 2 * sum(prefix) + r
        if t <= 0:
            return
        for nr in range(max(2, -(-t // 2)), t + 1):
            out.append(GraphRecipe(prefix + (nr,), "plus"))
        for nxt in itertools.count(2):
            # the tail needs t' = t - 2*nxt + 1 > 0 to ever close
            if t - 2 * nxt + 1 <= 0:
                break
            extend(prefix + (nxt,))

    for first in itertools.count(2):
        if n - 2 * first + 2 <= 0:
            break
        extend((first,))
    out.sort(key=lambda rec: rec.factors)
    return out
