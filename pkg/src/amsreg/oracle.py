"""Ground truth at desk scale: dimensions of linear systems of plane curves
with assigned fat points at random (hence generic) positions.

The conditions matrix pairs the vanishing of all partial derivatives up to
order m_i - 1 at point i against the degree-d monomial basis.  Ranks are
computed modulo two large primes, with an exact integer fallback when they
disagree.  Full rank at a random sample certifies generic independence
(rank can only drop under specialization); a rank deficiency is only
probabilistic evidence and is cross-checked at independent seeds.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from typing import Sequence

from .errors import InputError, InternalError, OracleDegeneracyError

_PRIMES = (2**31 - 1, 2**61 - 1)
_COORD_RANGE = 10**6
_RESAMPLE_ATTEMPTS = 200
DEFAULT_SEED = 1


def default_seed() -> int:
    """Seed from the AMSREG_SEED environment variable, or 1."""
    raw = os.environ.get("AMSREG_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"AMSREG_SEED must be a decimal integer, got {raw!r}") from exc


@dataclass(frozen=True)
class PointSample:
    """Random plane points with exact integer coordinates: pairwise
    distinct and no three collinear."""

    points: tuple[tuple[int, int], ...]
    seed: int

    @classmethod
    def generate(cls, count: int, seed: int | None = None) -> "PointSample":
        if seed is None:
            seed = default_seed()
        rng = random.Random(seed)
        pts: list[tuple[int, int]] = []
        while len(pts) < count:
            for _ in range(_RESAMPLE_ATTEMPTS):
                p = (rng.randrange(-_COORD_RANGE, _COORD_RANGE),
                     rng.randrange(-_COORD_RANGE, _COORD_RANGE))
                if p in pts:
                    continue
                if any(
                    (b[0] - a[0]) * (p[1] - a[1]) == (b[1] - a[1]) * (p[0] - a[0])
                    for i, a in enumerate(pts)
                    for b in pts[i + 1:]
                ):
                    continue
                pts.append(p)
                break
            else:
                raise OracleDegeneracyError(
                    f"could not draw {count} points in general position", seed=seed
                )
        return cls(tuple(pts), seed)


def _falling(k: int, r: int) -> int:
    out = 1
    for i in range(r):
        out *= k - i
    return out


def _condition_rows(d: int, m: Sequence[int], sample: PointSample) -> list[list[int]]:
    monomials = [(x, y) for x in range(d + 1) for y in range(d + 1 - x)]
    rows = []
    for (px, py), mult in zip(sample.points, m):
        for dx in range(mult):
            for dy in range(mult - dx):
                row = []
                for (ex, ey) in monomials:
                    if ex < dx or ey < dy:
                        row.append(0)
                    else:
                        row.append(
                            _falling(ex, dx)
                            * _falling(ey, dy)
                            * px ** (ex - dx)
                            * py ** (ey - dy)
                        )
                rows.append(row)
    return rows


def _rank_mod(rows: list[list[int]], p: int) -> int:
    mat = [[x % p for x in row] for row in rows]
    cols = len(mat[0]) if mat else 0
    rank = 0
    for col in range(cols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col]), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        inv = pow(mat[rank][col], p - 2, p)
        mat[rank] = [x * inv % p for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col]:
                f = mat[r][col]
                mat[r] = [(x - f * y) % p for x, y in zip(mat[r], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank


def _rank_exact(rows: list[list[int]]) -> int:
    # Bareiss fraction-free elimination over the integers
    mat = [list(row) for row in rows]
    cols = len(mat[0]) if mat else 0
    rank = 0
    prev = 1
    for col in range(cols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col]), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        piv = mat[rank][col]
        for r in range(rank + 1, len(mat)):
            factor = mat[r][col]
            mat[r] = [
                (piv * x - factor * y) // prev
                for x, y in zip(mat[r], mat[rank])
            ]
        prev = piv
        rank += 1
        if rank == len(mat):
            break
    return rank


def dim_linear_system(
    d: int, m: Sequence[int], sample: PointSample
) -> tuple[int, int]:
    """(projective dimension >= -1, superabundance h1 >= 0) of the system of
    degree-d curves with multiplicity m_i at the i-th sample point."""
    if d < 0:
        raise InputError("the degree must be non-negative")
    m = tuple(int(x) for x in m)
    if len(m) > len(sample.points):
        raise InputError(f"{len(m)} multiplicities but only {len(sample.points)} points")
    if any(x < 0 for x in m):
        raise InputError("multiplicities must be non-negative")
    rows = _condition_rows(d, m, sample)
    if not rows:
        rank = 0
    else:
        ranks = {_rank_mod(rows, p) for p in _PRIMES}
        rank = ranks.pop() if len(ranks) == 1 else _rank_exact(rows)
    dim = (d + 1) * (d + 2) // 2 - 1 - rank
    h1 = sum(x * (x + 1) for x in m) // 2 - rank
    if h1 < 0:
        raise InternalError("rank exceeds the number of conditions")
    return dim, h1


def tau_oracle(m: Sequence[int], seed: int | None = None) -> int:
    """Minimal degree at which the fat-point conditions are independent.

    h1 = 0 at a random sample is a certificate for generic points; a
    deficiency is accepted only when confirmed at 3 independent seeds.
    """
    m = tuple(int(x) for x in m)
    if not m or all(x == 0 for x in m):
        raise InputError("tau_oracle needs a non-zero multiplicity system")
    if seed is None:
        seed = default_seed()
    sample = PointSample.generate(len(m), seed)
    cap = sum(m) + 1
    d = 1
    while d <= cap:
        _, h1 = dim_linear_system(d, m, sample)
        if h1 == 0:
            return d
        confirmations = [
            dim_linear_system(d, m, PointSample.generate(len(m), seed + k))[1]
            for k in (1, 2)
        ]
        if any(h == 0 for h in confirmations):
            return d
        d += 1
    raise InternalError(f"no regular degree found up to {cap} for {m}")
