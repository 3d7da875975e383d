"""Regular two-level fractional factorial designs and their linear algebra.

The 2^(p-1)-run design of resolution p: a full factorial in factors
1..p-1 (Yates order) with factor p defined as the product of the others.
Runs are identified with binary cells (i_1 ... i_{p-1}) via the level map
+1 <-> 0, -1 <-> 1, so run index and cell index coincide: cell coordinate
i_m is bit (p-1-m) of the index, i_1 most significant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, SizeLimitError

MAX_P = 20


def _check_p(p: int, max_p: int = MAX_P) -> None:
    if not isinstance(p, (int, np.integer)) or p < 3:
        raise InvalidParameterError(f"p must be an integer >= 3, got {p!r}")
    if p > max_p:
        raise SizeLimitError(f"p={p} exceeds the configured maximum {max_p}")


def cell_coords(cell: int, p: int) -> tuple[int, ...]:
    """Binary coordinates (i_1, ..., i_{p-1}) of a cell index."""
    return tuple((cell >> (p - 1 - m)) & 1 for m in range(1, p))


def cell_index(coords: tuple[int, ...]) -> int:
    """Inverse of cell_coords."""
    c = 0
    for b in coords:
        c = (c << 1) | b
    return c


def cell_label(cell: int, p: int) -> str:
    """Cell as a binary string 'i_1...i_{p-1}'."""
    return format(cell, f"0{p - 1}b")


def parity(cell: int) -> int:
    """Coordinate-sum parity: 0 for cells in I_0, 1 for cells in I_1."""
    return bin(cell).count("1") & 1


@dataclass(frozen=True)
class Design:
    """The 2^(p-1)-run, p-factor design of resolution p."""

    p: int
    d: np.ndarray  # k x p matrix of +-1, run order

    @property
    def k(self) -> int:
        return 2 ** (self.p - 1)

    def cell_of_run(self, run: int) -> tuple[int, ...]:
        return cell_coords(run, self.p)

    def run_of_cell(self, coords: tuple[int, ...]) -> int:
        return cell_index(coords)


@dataclass(frozen=True)
class ModelMatrix:
    """Main-effect model matrix: all-ones column followed by the design."""

    p: int
    m: np.ndarray  # k x (p+1)


@dataclass(frozen=True)
class CountTable:
    """Nonnegative integer observations over the 2^(p-1) runs."""

    p: int
    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.int64)
        if y.ndim != 1 or y.shape[0] != 2 ** (self.p - 1):
            raise InvalidParameterError(
                f"counts must have length {2 ** (self.p - 1)} for p={self.p}"
            )
        if np.any(y < 0):
            raise InvalidParameterError("counts must be nonnegative")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def total(self) -> int:
        return int(self.y.sum())


@dataclass(frozen=True)
class SufficientStat:
    """One-dimensional margins plus diagonal (parity) sums.

    Equivalent to M'y up to the fixed reparameterization
    x_m(0) - x_m(1) = m-th contrast, x_D(0) - x_D(1) = p-th contrast.
    """

    p: int
    one_dim: tuple[tuple[int, int], ...]  # (x_m(0), x_m(1)) for m = 1..p-1
    diag: tuple[int, int]  # (x_D(0), x_D(1))

    @property
    def total(self) -> int:
        return self.diag[0] + self.diag[1]

    def key(self) -> tuple[int, ...]:
        """Canonical hashable key: (x_1(1), ..., x_{p-1}(1), x_D(1), n)."""
        return tuple(x1 for _, x1 in self.one_dim) + (self.diag[1], self.total)

    def is_consistent(self) -> bool:
        n = self.total
        return all(x0 + x1 == n for x0, x1 in self.one_dim)


@dataclass(frozen=True)
class Move:
    """Integer vector z with M'z = 0, stored by its positive/negative cells.

    pos and neg are sorted tuples of cell indices with multiplicity;
    canonical form has them disjoint and min(pos) < min(neg).
    """

    p: int
    pos: tuple[int, ...]
    neg: tuple[int, ...]

    def dense(self) -> np.ndarray:
        z = np.zeros(2 ** (self.p - 1), dtype=np.int64)
        for c in self.pos:
            z[c] += 1
        for c in self.neg:
            z[c] -= 1
        return z

    @property
    def degree(self) -> int:
        return len(self.pos)


def build_design(p: int, max_p: int = MAX_P) -> Design:
    """Construct the 2^(p-1) resolution-p design in Yates run order.

    Factor j alternates in blocks of 2^(p-1-j) starting at +1; factor p
    is the row-wise product of factors 1..p-1 (the defining relation).
    """
    _check_p(p, max_p)
    k = 2 ** (p - 1)
    runs = np.arange(k)
    d = np.empty((k, p), dtype=np.int64)
    for j in range(1, p):
        bits = (runs >> (p - 1 - j)) & 1
        d[:, j - 1] = 1 - 2 * bits
    d[:, p - 1] = d[:, : p - 1].prod(axis=1)
    d.setflags(write=False)
    return Design(p=p, d=d)


def build_model_matrix(design: Design) -> ModelMatrix:
    """Prepend the all-ones column to the design matrix."""
    k = design.k
    m = np.empty((k, design.p + 1), dtype=np.int64)
    m[:, 0] = 1
    m[:, 1:] = design.d
    m.setflags(write=False)
    return ModelMatrix(p=design.p, m=m)


def sufficient_stat_vector(y: np.ndarray, p: int) -> SufficientStat:
    """Margins of an arbitrary integer vector over the 2^(p-1) cells."""
    y = np.asarray(y, dtype=np.int64)
    k = 2 ** (p - 1)
    if y.shape != (k,):
        raise InvalidParameterError(f"vector must have length {k} for p={p}")
    cells = np.arange(k)
    one_dim = []
    for m in range(1, p):
        bits = (cells >> (p - 1 - m)) & 1
        x1 = int(y[bits == 1].sum())
        x0 = int(y[bits == 0].sum())
        one_dim.append((x0, x1))
    par = np.array([parity(c) for c in cells])
    diag = (int(y[par == 0].sum()), int(y[par == 1].sum()))
    return SufficientStat(p=p, one_dim=tuple(one_dim), diag=diag)


def sufficient_stat(table: CountTable) -> SufficientStat:
    """Sufficient statistic M'y of a count table."""
    return sufficient_stat_vector(table.y, table.p)


def is_move(z: np.ndarray, p: int) -> bool:
    """True iff M'z = 0, i.e. every margin of z vanishes."""
    z = np.asarray(z, dtype=np.int64)
    k = 2 ** (p - 1)
    if z.shape != (k,):
        raise InvalidParameterError(f"move vector must have length {k} for p={p}")
    s = sufficient_stat_vector(z, p)
    return all(x0 == 0 and x1 == 0 for x0, x1 in s.one_dim) and s.diag == (0, 0)


def move_from_dense(z: np.ndarray, p: int) -> Move:
    """Sparse canonical Move from a dense integer vector (must be a move)."""
    if not is_move(z, p):
        raise InvalidParameterError("vector is not a move (M'z != 0)")
    pos, neg = [], []
    for c, v in enumerate(np.asarray(z, dtype=np.int64)):
        if v > 0:
            pos.extend([c] * int(v))
        elif v < 0:
            neg.extend([c] * int(-v))
    if pos and neg and min(neg) < min(pos):
        pos, neg = neg, pos
    return Move(p=p, pos=tuple(sorted(pos)), neg=tuple(sorted(neg)))
