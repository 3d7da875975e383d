"""Markov bases of square-free degree-2 moves, built from essential fibers.

A degree-2 fiber is the set of two-unit tables sharing a sufficient
statistic; essential fibers are those with more than one element. Every
element of an essential fiber is a pair of distinct cells, and distinct
elements are disjoint, so the full square-free degree-2 move set is the
union over essential fibers of all element-pair differences, and a star
spanning tree per fiber gives a minimal Markov basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import MAX_P, Move, SufficientStat, _check_p, parity
from .errors import InvalidParameterError

CellPair = tuple[int, int]  # unordered, stored sorted


@dataclass(frozen=True)
class DegreeTwoFiber:
    """All two-unit tables realizing one sufficient statistic."""

    stat: SufficientStat
    elements: tuple[CellPair, ...]  # sorted lexicographically

    @property
    def size(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class MarkovBasis:
    p: int
    moves: tuple[Move, ...]
    kind: str  # "full_square_free" or "minimal"
    grouping: dict[tuple[int, ...], tuple[Move, ...]] | None = None

    def __len__(self) -> int:
        return len(self.moves)


def _pair_stat_key(a: int, b: int, p: int) -> tuple[int, ...]:
    """Sufficient-statistic key of the table with one unit at a and at b."""
    key = []
    for m in range(1, p):
        shift = p - 1 - m
        key.append(((a >> shift) & 1) + ((b >> shift) & 1))
    key.append(parity(a) + parity(b))
    key.append(2)
    return tuple(key)


def _stat_from_key(key: tuple[int, ...], p: int) -> SufficientStat:
    n = key[-1]
    one_dim = tuple((n - x1, x1) for x1 in key[: p - 1])
    return SufficientStat(p=p, one_dim=one_dim, diag=(n - key[p - 1], key[p - 1]))


def essential_fibers(p: int, max_p: int = MAX_P) -> list[DegreeTwoFiber]:
    """Degree-2 fibers with more than one element, by pair bucketing.

    Iterates all unordered cell pairs (repeats included; they only ever
    land in singleton buckets) and keeps buckets of size >= 2. Output is
    sorted by statistic key, elements sorted lexicographically.
    """
    _check_p(p, max_p)
    k = 2 ** (p - 1)
    buckets: dict[tuple[int, ...], list[CellPair]] = {}
    for a in range(k):
        for b in range(a, k):
            buckets.setdefault(_pair_stat_key(a, b, p), []).append((a, b))
    fibers = []
    for key in sorted(buckets):
        elems = buckets[key]
        if len(elems) >= 2:
            fibers.append(
                DegreeTwoFiber(
                    stat=_stat_from_key(key, p), elements=tuple(sorted(elems))
                )
            )
    return fibers


def _pair_move(pos: CellPair, neg: CellPair, p: int) -> Move:
    return Move(p=p, pos=tuple(sorted(pos)), neg=tuple(sorted(neg)))


def minimal_markov_basis(p: int, max_p: int = MAX_P) -> MarkovBasis:
    """Star spanning tree per essential fiber, rooted at the lex-smallest
    element: moves root - other for every other element."""
    fibers = essential_fibers(p, max_p)
    moves: list[Move] = []
    grouping: dict[tuple[int, ...], tuple[Move, ...]] = {}
    for fiber in fibers:
        root = fiber.elements[0]
        fiber_moves = tuple(
            _pair_move(root, other, p) for other in fiber.elements[1:]
        )
        moves.extend(fiber_moves)
        grouping[fiber.stat.key()] = fiber_moves
    return MarkovBasis(p=p, moves=tuple(moves), kind="minimal", grouping=grouping)


def full_square_free_basis(p: int, max_p: int = MAX_P) -> MarkovBasis:
    """Every square-free degree-2 move, once up to sign.

    Distinct elements of an essential fiber are disjoint cell pairs, so
    these are exactly the unordered element pairs within each fiber.
    """
    fibers = essential_fibers(p, max_p)
    moves: list[Move] = []
    for fiber in fibers:
        elems = fiber.elements
        for i in range(len(elems)):
            for j in range(i + 1, len(elems)):
                moves.append(_pair_move(elems[i], elems[j], p))
    return MarkovBasis(p=p, moves=tuple(moves), kind="full_square_free")


def minimal_basis_size(p: int) -> int:
    """Closed-form size of the minimal basis.

    For p = 2s there are 4^(t-1) * C(p, 2(t-1)) essential fibers of size
    4^(s-t); for p = 2s+1 there are 2^(2t-1) * C(p, 2t-1) of them; each
    fiber of size f contributes f - 1 moves. Empty sum for p = 3.
    """
    if not isinstance(p, (int, np.integer)) or p < 3:
        raise InvalidParameterError(f"p must be an integer >= 3, got {p!r}")
    s = p // 2
    total = 0
    for t in range(1, s):
        if p % 2 == 0:
            count = 4 ** (t - 1) * math.comb(p, 2 * (t - 1))
        else:
            count = 2 ** (2 * t - 1) * math.comb(p, 2 * t - 1)
        total += count * (4 ** (s - t) - 1)
    return total


def essential_fiber_census(p: int) -> dict[int, int]:
    """Predicted {fiber size: fiber count} from the closed-form counts."""
    s = p // 2
    census = {}
    for t in range(1, s):
        if p % 2 == 0:
            count = 4 ** (t - 1) * math.comb(p, 2 * (t - 1))
        else:
            count = 2 ** (2 * t - 1) * math.comb(p, 2 * t - 1)
        census[4 ** (s - t)] = count
    return census


# Forbidden positive-support patterns over the 8 cells of p=4, as XOR
# masks on a base cell (bits are i_1 i_2 i_3, i_1 most significant):
#   {c, c^100, c^110, c^101}, {c, c^010, c^110, c^011}, {c, c^001, c^101, c^011}
_SIGN_PATTERNS = ((0, 4, 6, 5), (0, 2, 6, 3), (0, 1, 5, 3))


def violates_sign_lemma(z) -> bool:
    """True iff the positive support of z or of -z (p=4 only) contains one
    of the three quadruple patterns that no move for M' can carry."""
    if isinstance(z, Move):
        z = z.dense()
    z = np.asarray(z, dtype=np.int64)
    if z.shape != (8,):
        raise InvalidParameterError("sign-lemma predicate is defined for p=4 (8 cells)")
    for sign in (1, -1):
        v = sign * z
        for base in range(8):
            for masks in _SIGN_PATTERNS:
                if all(v[base ^ m] > 0 for m in masks):
                    return True
    return False
