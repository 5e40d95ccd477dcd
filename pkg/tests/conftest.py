"""Shared oracles built from first principles, independent of the package internals."""

import itertools
from fractions import Fraction

import pytest

# (a1, a2, b1, b2) in lexicographic order with +1 before -1
SIGN_TUPLES = list(itertools.product((1, -1), repeat=4))
PAIRS = [(1, 1), (1, 2), (2, 1), (2, 2)]


def alice(lam, i):
    return lam[i - 1]


def bob(lam, j):
    return lam[1 + j]


def oracle_correlation(p, i, j):
    """sum over strategies of a_i b_j p(lambda)"""
    return sum(alice(lam, i) * bob(lam, j) * q for lam, q in zip(SIGN_TUPLES, p))


def oracle_joint(p, i, j):
    out = {}
    for al in (1, -1):
        for be in (1, -1):
            out[(al, be)] = sum(q for lam, q in zip(SIGN_TUPLES, p) if alice(lam, i) == al and bob(lam, j) == be)
    return out


@pytest.fixture
def sixteenth():
    return Fraction(1, 16)
