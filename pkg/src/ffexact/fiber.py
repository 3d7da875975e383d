"""Brute-force ground truth: fiber enumeration, connectivity, exact p-values."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import MarkovBasis
from .design import CountTable, SufficientStat, cell_coords, parity, sufficient_stat
from .errors import (
    EnumerationInfeasibleError,
    InvalidParameterError,
    TruncatedFiberError,
)

DEFAULT_CAP = 2_000_000
TIE_TOL = 1e-9


def enumeration_cap(default: int = DEFAULT_CAP) -> int:
    """Configured fiber element cap; FFEXACT_MAX_FIBER overrides."""
    env = os.environ.get("FFEXACT_MAX_FIBER")
    return int(env) if env else default


@dataclass(frozen=True)
class Fiber:
    stat: SufficientStat
    elements: tuple[tuple[int, ...], ...]  # dense count vectors, lex sorted
    truncated: bool = False

    @property
    def size(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class ConnectivityReport:
    class_count: int
    classes: tuple[tuple[int, ...], ...]  # element indices per class
    witness: tuple[int, int] | None  # indices in different classes, if any


class UnionFind:
    """Union-find with path compression over 0..n-1."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.count = n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            self.count -= 1


def enumerate_fiber(stat: SufficientStat, p: int, cap: int | None = None) -> Fiber:
    """Depth-first enumeration of all nonnegative tables with the given
    margins, cells in lexicographic order.

    At each cell the count is bounded by the remaining slack of every
    margin the cell contributes to. Complete and duplicate-free unless
    the cap is hit, in which case the truncated flag is set.
    """
    if cap is None:
        cap = enumeration_cap()
    if not stat.is_consistent():
        raise InvalidParameterError("inconsistent sufficient statistic")
    k = 2 ** (p - 1)
    rem_axis = [list(pair) for pair in stat.one_dim]  # rem_axis[m][level]
    rem_diag = list(stat.diag)
    coords = [cell_coords(c, p) for c in range(k)]
    pars = [parity(c) for c in range(k)]
    table = [0] * k
    out: list[tuple[int, ...]] = []
    truncated = False

    def dfs(cell: int) -> None:
        nonlocal truncated
        if truncated:
            return
        if cell == k:
            if rem_diag[0] == 0 and rem_diag[1] == 0:
                if len(out) >= cap:
                    truncated = True
                    return
                out.append(tuple(table))
            return
        cc = coords[cell]
        par = pars[cell]
        bound = min(rem_axis[m][cc[m]] for m in range(p - 1))
        bound = min(bound, rem_diag[par])
        for v in range(bound + 1):
            table[cell] = v
            for m in range(p - 1):
                rem_axis[m][cc[m]] -= v
            rem_diag[par] -= v
            dfs(cell + 1)
            for m in range(p - 1):
                rem_axis[m][cc[m]] += v
            rem_diag[par] += v
            table[cell] = 0
            if truncated:
                return

    dfs(0)
    return Fiber(stat=stat, elements=tuple(sorted(out)), truncated=truncated)


def check_connectivity(fiber: Fiber, basis: MarkovBasis) -> ConnectivityReport:
    """Partition the fiber into equivalence classes under the basis moves."""
    if fiber.truncated:
        raise TruncatedFiberError("connectivity on a partial fiber is meaningless")
    index = {elem: i for i, elem in enumerate(fiber.elements)}
    uf = UnionFind(len(fiber.elements))
    dense_moves = [tuple(int(v) for v in mv.dense()) for mv in basis.moves]
    for elem, i in index.items():
        for z in dense_moves:
            neighbor = tuple(a + b for a, b in zip(elem, z))
            if all(v >= 0 for v in neighbor):
                j = index.get(neighbor)
                if j is not None:
                    uf.union(i, j)
    classes: dict[int, list[int]] = {}
    for i in range(len(fiber.elements)):
        classes.setdefault(uf.find(i), []).append(i)
    parts = tuple(tuple(c) for c in sorted(classes.values()))
    witness = None
    if len(parts) > 1:
        witness = (parts[0][0], parts[1][0])
    return ConnectivityReport(class_count=len(parts), classes=parts, witness=witness)


def _logsumexp(xs: np.ndarray) -> float:
    m = float(np.max(xs))
    return m + math.log(float(np.sum(np.exp(xs - m))))


def exact_p_value(
    y0: CountTable,
    statfn: Callable[[np.ndarray], float],
    cap: int | None = None,
) -> tuple[float, int]:
    """Exact conditional p-value by full fiber enumeration.

    p = sum over the fiber of w(y) * 1(T(y) >= T(y0)) / sum of w(y) with
    w(y) = prod 1/y_i!, evaluated in log space so the normalizing
    constant never appears alone. Returns (p, fiber size).
    """
    fiber = enumerate_fiber(sufficient_stat(y0), y0.p, cap=cap)
    if fiber.truncated:
        raise EnumerationInfeasibleError(
            "fiber exceeds the enumeration cap; fall back to MCMC"
        )
    t0 = statfn(np.asarray(y0.y, dtype=np.int64))
    logw = np.empty(fiber.size)
    hit = np.empty(fiber.size, dtype=bool)
    for i, elem in enumerate(fiber.elements):
        arr = np.asarray(elem, dtype=np.int64)
        logw[i] = -sum(math.lgamma(v + 1) for v in elem)
        hit[i] = statfn(arr) >= t0 - TIE_TOL
    p = math.exp(_logsumexp(logw[hit]) - _logsumexp(logw))
    return min(p, 1.0), fiber.size
