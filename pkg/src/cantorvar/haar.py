"""Haar atoms h_I^s and the identities they satisfy.

Atoms are never materialized as grids; they are evaluated lazily on cell
numbers (resolution K) or on digit vectors.  Values come back as exact
:class:`~cantorvar.exact.Cyclo` numbers, and the underlying rotation numbers
are available through :func:`haar_rotation` for cheap exact comparisons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .abelian import CharacterTable, Group, characters
from .dadic import (DadicInterval, DigitVector, cell_ominus, cell_oplus, interval_ominus,
                    interval_oplus, iota, same_block)
from .exact import Cyclo

__all__ = [
    "HaarAtom",
    "HaarTerm",
    "haar_rotation",
    "haar_value",
    "phi_value",
    "phi_difference_decomposition",
    "evaluate_terms",
    "telescoping_check",
    "reconstruction_check",
    "dual_telescoping_check",
    "character_product_check",
    "character_property_failures",
]


@dataclass(frozen=True)
class HaarAtom:
    interval: DadicInterval
    s: int


@dataclass(frozen=True)
class HaarTerm:
    """``coeff * h^s_[0, d^-r)``."""

    r: int
    s: int
    coeff: Fraction

    @property
    def atom(self) -> HaarAtom:
        return HaarAtom(DadicInterval(self.r, 0), self.s)


def _locate(d: int, I: DadicInterval, t, K: int | None):
    """(inside?, digit at position -k-1) for a cell number or a DigitVector."""
    k = I.k
    if isinstance(t, DigitVector):
        inside = (iota(t) * Fraction(d) ** k).__floor__() == I.l
        return inside, t.digit(-k - 1)
    if K is None:
        raise ValueError("cell evaluation needs the resolution K")
    if K < k + 1:
        raise ValueError(f"resolution {K} cannot resolve the children of a scale-{k} interval")
    t = int(t)
    inside = t // d ** (K - k) == I.l
    return inside, (t // d ** (K - k - 1)) % d


def haar_rotation(atom: HaarAtom, t, table: CharacterTable, K: int | None = None):
    """Rotation number of h_I^s(t), or None when t lies outside I."""
    inside, digit = _locate(table.d, atom.interval, t, K)
    if not inside:
        return None
    return table.rotation(atom.s, digit)


def haar_value(atom: HaarAtom, t, table: CharacterTable, K: int | None = None) -> Cyclo:
    q = haar_rotation(atom, t, table, K)
    if q is None:
        return Cyclo.rational(0)
    return Cyclo.root(q)


def phi_value(d: int, k: int, t: int, K: int) -> Fraction:
    """phi_k = d^k 1_[0, d^-k) at the resolution-K cell t."""
    return Fraction(d) ** k if same_block(d, t, 0, k, K) else Fraction(0)


def phi_difference_decomposition(d: int, k_lo: int, k_hi: int) -> list[HaarTerm]:
    """Terms whose sum is phi_{k_hi} - phi_{k_lo}."""
    if k_lo >= k_hi:
        raise ValueError("need k_lo < k_hi")
    return [HaarTerm(r, s, Fraction(d) ** r)
            for r in range(k_lo, k_hi) for s in range(1, d)]


def evaluate_terms(terms, table: CharacterTable, t: int, K: int) -> Cyclo:
    total = Cyclo.rational(0)
    for term in terms:
        total = total + term.coeff * haar_value(term.atom, t, table, K)
    return total


def _table(group: Group, table):
    return characters(group) if table is None else table


def telescoping_check(group: Group, k_lo: int, k_hi: int, terms=None, table=None) -> bool:
    """phi_{k_hi} - phi_{k_lo} equals the Haar sum on every cell, exactly.

    Cells have resolution k_hi and cover [0, d^(max(0, -k_lo) + 1)), so points
    outside both supports are included.
    """
    d = group.d
    table = _table(group, table)
    terms = phi_difference_decomposition(d, k_lo, k_hi) if terms is None else terms
    K = max(k_hi, 0)
    span = max(0, -k_lo) + 1
    for t in range(d ** (span + K)):
        lhs = phi_value(d, k_hi, t, K) - phi_value(d, k_lo, t, K)
        if evaluate_terms(terms, table, t, K) != lhs:
            return False
    return True


def reconstruction_check(group: Group, k: int, table=None) -> bool:
    """1_[0,d^-k) + sum_{s>=1} h^s_[0,d^-k) == d 1_[0,d^-k-1) on resolution k+1 cells."""
    d = group.d
    table = _table(group, table)
    K = max(k + 1, 0)
    I = DadicInterval(k, 0)
    for t in range(d ** (max(0, -k) + 1 + K)):
        lhs = sum((haar_value(HaarAtom(I, s), t, table, K) for s in range(d)), Cyclo.rational(0))
        rhs = d if same_block(d, t, 0, k + 1, K) else 0
        if lhs != rhs:
            return False
    return True


def dual_telescoping_check(group: Group, k_lo: int, k_hi: int, N: int, table=None) -> bool:
    """sum_{r,s,J} d^r h_J^s(y1) conj h_J^s(y2) == (phi_{k_hi} - phi_{k_lo})(y1 ⊖ y2).

    Checked for all cell pairs of [0, d^N) at resolution max(k_hi, 0).
    """
    d = group.d
    table = _table(group, table)
    K = max(k_hi, 0)
    n = d ** (N + K)
    for y1 in range(n):
        for y2 in range(n):
            lhs = Cyclo.rational(0)
            for r in range(k_lo, k_hi):
                for l in range(max(1, d ** (N + r))):
                    J = DadicInterval(r, l)
                    for s in range(1, d):
                        a = haar_rotation(HaarAtom(J, s), y1, table, K)
                        b = haar_rotation(HaarAtom(J, s), y2, table, K)
                        if a is not None and b is not None:
                            lhs = lhs + Fraction(d) ** r * Cyclo.root(a - b)
            diff = int(cell_oplus(group, y1, cell_ominus(group, y2)))
            rhs = phi_value(d, k_hi, diff, K) - phi_value(d, k_lo, diff, K)
            if lhs != rhs:
                return False
    return True


def character_product_check(group: Group, I: DadicInterval, J: DadicInterval, s: int,
                            x: int, y: int, K: int, table=None) -> bool:
    """Both character identities for cells x in I, y in J at resolution K.

    h^s_{I⊕J}(x ⊕ y) = h^s_I(x) h^s_J(y)  and  h^s_{⊖I}(⊖x) = conj h^s_I(x).
    """
    d = group.d
    table = _table(group, table)
    if I.k != J.k:
        raise ValueError("intervals must have equal length")
    if not (I.contains_cell(d, x, K) and J.contains_cell(d, y, K)):
        raise ValueError("need x in I and y in J")
    hx = haar_rotation(HaarAtom(I, s), x, table, K)
    hy = haar_rotation(HaarAtom(J, s), y, table, K)
    xy = int(cell_oplus(group, x, y))
    hxy = haar_rotation(HaarAtom(interval_oplus(group, I, J), s), xy, table, K)
    if hxy is None or (hxy - hx - hy) % 1:
        return False
    mx = int(cell_ominus(group, x))
    hm = haar_rotation(HaarAtom(interval_ominus(group, I), s), mx, table, K)
    return hm is not None and (hm + hx) % 1 == 0


def character_property_failures(group: Group, K: int, N: int, table=None) -> int:
    """Exhaustive count of failing (k, x, y, s) over cells of [0, d^N) at resolution K.

    Same test as :func:`character_product_check` on every tuple, run on
    integer rotation numerators (common denominator of the table) so the
    whole grid is compared at once.
    """
    d = group.d
    table = _table(group, table)
    n = d ** (N + K)
    den = math.lcm(*(q.denominator for row in table.rotations for q in row))
    R = np.array([[int(q * den) % den for q in row] for row in table.rotations], dtype=np.int64)
    cells = np.arange(n, dtype=np.int64)
    xy = cell_oplus(group, cells[:, None], cells[None, :])
    mx = cell_ominus(group, cells)
    failures = 0
    for k in range(-N - 1, K):
        w = d ** (K - k)
        lx = cells // w
        digit = (cells // d ** (K - k - 1)) % d
        l_sum = cell_oplus(group, lx[:, None], lx[None, :])
        l_neg = cell_ominus(group, lx)
        in_sum = xy // w == l_sum
        in_neg = mx // w == l_neg
        for s in range(d):
            h = R[s, digit]
            prod_ok = in_sum & ((R[s, digit[xy]] - h[:, None] - h[None, :]) % den == 0)
            conj_ok = in_neg & ((R[s, digit[mx]] + h) % den == 0)
            failures += int((~(prod_ok & conj_ok[:, None])).sum())
    return failures
