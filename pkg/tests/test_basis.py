from collections import Counter
from itertools import combinations

import numpy as np
import pytest

from ffexact import (
    InvalidParameterError,
    check_connectivity,
    enumerate_fiber,
    essential_fiber_census,
    essential_fibers,
    full_square_free_basis,
    is_move,
    minimal_basis_size,
    minimal_markov_basis,
    violates_sign_lemma,
)
from ffexact.basis import MarkovBasis


def brute_force_square_free_moves(p):
    """Oracle: all square-free degree-2 moves, as canonical (pos, neg)
    pairs, by scanning every 2+2 split of every 4-subset of cells."""
    k = 2 ** (p - 1)
    found = set()
    for quad in combinations(range(k), 4):
        for pos in combinations(quad, 2):
            neg = tuple(c for c in quad if c not in pos)
            if pos[0] > neg[0]:
                continue  # the sign-flipped twin, skip
            z = np.zeros(k, dtype=int)
            z[list(pos)] = 1
            z[list(neg)] = -1
            if is_move(z, p):
                found.add((pos, neg))
    return found


KNOWN_SIZES = {4: 3, 5: 30, 6: 195, 7: 1050, 8: 5103}


@pytest.mark.parametrize("p,expected", sorted(KNOWN_SIZES.items()))
def test_minimal_basis_counts(p, expected):
    assert minimal_basis_size(p) == expected
    assert len(minimal_markov_basis(p).moves) == expected


def test_p3_empty_basis():
    # brute force finds no square-free degree-2 moves for p=3, matching
    # the empty closed-form sum; every p=3 fiber is a singleton (M' has
    # full column rank there), so an empty basis is a Markov basis
    assert brute_force_square_free_moves(3) == set()
    assert minimal_basis_size(3) == 0
    assert minimal_markov_basis(3).moves == ()
    assert essential_fibers(3) == []


def test_p4_essential_fiber():
    fibers = essential_fibers(4)
    assert len(fibers) == 1
    f = fibers[0]
    assert f.stat.one_dim == ((1, 1), (1, 1), (1, 1))
    assert f.stat.diag == (1, 1)
    assert f.elements == ((0b000, 0b111), (0b001, 0b110), (0b010, 0b101), (0b011, 0b100))


def test_p5_essential_fibers():
    fibers = essential_fibers(5)
    assert len(fibers) == 10
    assert all(f.size == 4 for f in fibers)


@pytest.mark.parametrize("p", range(4, 10))
def test_census_matches_closed_form(p):
    observed = Counter(f.size for f in essential_fibers(p))
    assert dict(observed) == essential_fiber_census(p)


def test_p4_minimal_moves_are_the_three_star_moves():
    moves = minimal_markov_basis(4).moves
    assert [(m.pos, m.neg) for m in moves] == [
        ((0b000, 0b111), (0b001, 0b110)),
        ((0b000, 0b111), (0b010, 0b101)),
        ((0b000, 0b111), (0b011, 0b100)),
    ]


@pytest.mark.parametrize("p", [4, 5])
def test_full_basis_matches_brute_force(p):
    got = {(m.pos, m.neg) for m in full_square_free_basis(p).moves}
    assert got == brute_force_square_free_moves(p)


def test_full_basis_counts():
    assert len(full_square_free_basis(4).moves) == 6
    assert len(full_square_free_basis(5).moves) == 60


@pytest.mark.parametrize("p", range(3, 8))
def test_minimal_subset_of_full(p):
    full = {(m.pos, m.neg) for m in full_square_free_basis(p).moves}
    minimal = {(m.pos, m.neg) for m in minimal_markov_basis(p).moves}
    assert minimal <= full


@pytest.mark.parametrize("p", range(3, 8))
def test_all_generated_moves_are_moves(p):
    for basis in (minimal_markov_basis(p), full_square_free_basis(p)):
        for mv in basis.moves:
            assert is_move(mv.dense(), p)
            assert len(mv.pos) == len(mv.neg) == 2
            assert not set(mv.pos) & set(mv.neg)


@pytest.mark.parametrize("p", [4, 5])
def test_minimality_witness(p):
    # dropping any single move disconnects the fiber it came from
    basis = minimal_markov_basis(p)
    for fiber in essential_fibers(p):
        enum = enumerate_fiber(fiber.stat, p)
        assert enum.size == fiber.size
        for dropped in basis.grouping[fiber.stat.key()]:
            reduced = MarkovBasis(
                p=p,
                moves=tuple(m for m in basis.moves if m is not dropped),
                kind="minimal",
            )
            assert check_connectivity(enum, reduced).class_count >= 2


def test_sign_lemma_examples():
    z = np.zeros(8, dtype=int)
    for c in (0b000, 0b100, 0b110, 0b101):
        z[c] = 1
    assert violates_sign_lemma(z)
    assert violates_sign_lemma(-z)  # checked through the -z branch
    for mv in minimal_markov_basis(4).moves:
        assert not violates_sign_lemma(mv)


def test_sign_lemma_full_basis_and_negations():
    for mv in full_square_free_basis(4).moves:
        z = mv.dense()
        assert not violates_sign_lemma(z)
        assert not violates_sign_lemma(-z)


def test_sign_lemma_dimension_check():
    with pytest.raises(InvalidParameterError):
        violates_sign_lemma(np.zeros(16, dtype=int))


def test_minimal_basis_size_validation():
    with pytest.raises(InvalidParameterError):
        minimal_basis_size(2)
