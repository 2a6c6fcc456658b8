"""Cantor group structure on the nonnegative d-adic rationals.

A point of R_+ is handled through its terminating base-d expansion; the group
operations act digit by digit through the group law of the underlying finite
abelian group.  Functions constant on cells of side d^-K are indexed by
integer cell numbers, and the vectorized helpers at the bottom of the module
operate on arrays of such cell numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .abelian import Group

__all__ = [
    "DigitVector",
    "DadicInterval",
    "oplus",
    "ominus",
    "iota",
    "kappa",
    "iota_prime",
    "kappa_prime",
    "interval_oplus",
    "interval_ominus",
    "ancestor",
    "children",
    "same_block",
    "cell_oplus",
    "cell_ominus",
    "oplus_table",
    "digit_at",
]


@dataclass(frozen=True)
class DigitVector:
    """Finitely supported digit sequence; ``digits[i]`` sits at position ``lo + i``.

    Canonical form has no leading or trailing zero digits (zero is the empty
    tuple with ``lo = 0``).
    """

    group: Group
    lo: int
    digits: tuple[int, ...]

    def __post_init__(self):
        digs = tuple(int(a) for a in self.digits)
        d = self.group.d
        if any(not 0 <= a < d for a in digs):
            raise ValueError(f"digits must lie in 0..{d - 1}")
        lo = self.lo
        while digs and digs[0] == 0:
            digs = digs[1:]
            lo += 1
        while digs and digs[-1] == 0:
            digs = digs[:-1]
        if not digs:
            lo = 0
        object.__setattr__(self, "digits", digs)
        object.__setattr__(self, "lo", lo)

    @classmethod
    def from_positions(cls, group: Group, positions: dict[int, int]) -> "DigitVector":
        if not positions:
            return cls(group, 0, ())
        lo, hi = min(positions), max(positions)
        return cls(group, lo, tuple(positions.get(k, 0) for k in range(lo, hi + 1)))

    @property
    def hi(self) -> int:
        return self.lo + len(self.digits) - 1

    def digit(self, k: int) -> int:
        i = k - self.lo
        if 0 <= i < len(self.digits):
            return self.digits[i]
        return 0

    def __str__(self):
        d = self.group.d
        sym = "0123456789abcdefghijklmnopqrstuvwxyz"
        if d > len(sym):
            raise ValueError("rendering supports d <= 36")
        if not self.digits:
            return "0"
        top = max(self.hi, 0)
        bottom = min(self.lo, 0)
        whole = "".join(sym[self.digit(k)] for k in range(top, -1, -1))
        frac = "".join(sym[self.digit(k)] for k in range(-1, bottom - 1, -1))
        return f"{whole}.{frac}_{d}" if frac else f"{whole}_{d}"


def _same_group(x: DigitVector, y: DigitVector):
    if x.group != y.group:
        raise ValueError(f"mixed groups {x.group} and {y.group}")


def oplus(x: DigitVector, y: DigitVector) -> DigitVector:
    _same_group(x, y)
    if not x.digits:
        return y
    if not y.digits:
        return x
    lo, hi = min(x.lo, y.lo), max(x.hi, y.hi)
    g = x.group
    return DigitVector(g, lo, tuple(g.add(x.digit(k), y.digit(k)) for k in range(lo, hi + 1)))


def ominus(x: DigitVector) -> DigitVector:
    g = x.group
    return DigitVector(g, x.lo, tuple(g.neg(a) for a in x.digits))


def iota(x: DigitVector) -> Fraction:
    d = x.group.d
    return sum((Fraction(d) ** k * a for k, a in zip(range(x.lo, x.hi + 1), x.digits)),
               Fraction(0))


def kappa(group: Group, value, window: tuple[int, int] | None = None) -> DigitVector:
    """Terminating expansion of a nonnegative d-adic rational.

    With ``window = (k_lo, k_hi)`` the expansion must fit in positions
    ``k_lo..k_hi``; without it, the shortest terminating expansion is used.
    """
    v = Fraction(value)
    d = group.d
    if v < 0:
        raise ValueError("kappa is defined on nonnegative numbers")
    den = v.denominator
    while (c := math.gcd(den, d)) > 1:
        den //= c
    if den != 1:
        raise ValueError(f"{v} has no terminating base-{d} expansion")
    e, m = 0, v
    while m.denominator != 1:
        m *= d
        e += 1
    n = m.numerator
    digits = []
    while n:
        digits.append(n % d)
        n //= d
    out = DigitVector(group, -e, tuple(digits))
    if window is not None:
        k_lo, k_hi = window
        if out.digits and (out.lo < k_lo or out.hi > k_hi):
            raise ValueError(f"{v} does not fit in digit window [{k_lo}, {k_hi}]")
    return out


def iota_prime(group: Group, seq) -> int:
    d = group.d
    total = 0
    for k, a in enumerate(seq):
        if not 0 <= a < d:
            raise ValueError(f"label {a} out of range")
        total += a * d**k
    return total


def kappa_prime(group: Group, t: int, length: int | None = None) -> tuple[int, ...]:
    """Digits of t, least significant first; padded with zeros to ``length``."""
    if t < 0:
        raise ValueError("kappa_prime is defined on nonnegative integers")
    d = group.d
    out = []
    while t:
        out.append(t % d)
        t //= d
    if length is not None:
        if len(out) > length:
            raise ValueError("integer too large for requested length")
        out += [0] * (length - len(out))
    return tuple(out)


@dataclass(frozen=True, order=True)
class DadicInterval:
    """The interval [d^-k l, d^-k (l+1))."""

    k: int
    l: int

    def __post_init__(self):
        if self.l < 0:
            raise ValueError("interval index must be nonnegative")

    def length(self, d: int) -> Fraction:
        return Fraction(d) ** (-self.k)

    def endpoints(self, d: int) -> tuple[Fraction, Fraction]:
        w = self.length(d)
        return self.l * w, (self.l + 1) * w

    def contains_cell(self, d: int, cell: int, K: int) -> bool:
        """Whether the resolution-K cell number lies inside (requires K >= k)."""
        if K < self.k:
            raise ValueError("cell resolution coarser than the interval")
        return cell // d ** (K - self.k) == self.l


def _index_oplus(g: Group, a: int, b: int) -> int:
    d = g.d
    out, place = 0, 1
    while a or b:
        out += g.add(a % d, b % d) * place
        a //= d
        b //= d
        place *= d
    return out


def _index_ominus(g: Group, a: int) -> int:
    d = g.d
    out, place = 0, 1
    while a:
        out += g.neg(a % d) * place
        a //= d
        place *= d
    return out


def interval_oplus(g: Group, I: DadicInterval, J: DadicInterval) -> DadicInterval:
    if I.k != J.k:
        raise ValueError("interval_oplus needs intervals of equal length")
    return DadicInterval(I.k, _index_oplus(g, I.l, J.l))


def interval_ominus(g: Group, I: DadicInterval) -> DadicInterval:
    return DadicInterval(I.k, _index_ominus(g, I.l))


def ancestor(d: int, I: DadicInterval, N: int) -> DadicInterval:
    if N < 0:
        raise ValueError("ancestor generation must be nonnegative")
    return DadicInterval(I.k - N, I.l // d**N)


def children(d: int, I: DadicInterval) -> list[DadicInterval]:
    return [DadicInterval(I.k + 1, I.l * d + i) for i in range(d)]


def same_block(d: int, y1: int, y2: int, k: int, K: int) -> bool:
    """Whether resolution-K cells y1, y2 share their scale-k interval."""
    if K < k:
        raise ValueError(f"resolution {K} is coarser than scale {k}")
    w = d ** (K - k)
    return y1 // w == y2 // w


# -- vectorized cell arithmetic --------------------------------------------

def _ndigits(d: int, n: int) -> int:
    m = 0
    while d**m < n:
        m += 1
    return m


def cell_oplus(g: Group, a, b):
    """Digit-wise group sum of (arrays of) nonnegative integers."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    d = g.d
    top = int(max(a.max(initial=0), b.max(initial=0))) + 1
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    place = 1
    for _ in range(_ndigits(d, top)):
        out += g.add_table[(a // place) % d, (b // place) % d] * place
        place *= d
    return out


def cell_ominus(g: Group, a):
    a = np.asarray(a, dtype=np.int64)
    d = g.d
    out = np.zeros_like(a)
    place = 1
    for _ in range(_ndigits(d, int(a.max(initial=0)) + 1)):
        out += g.neg_table[(a // place) % d] * place
        place *= d
    return out


@lru_cache(maxsize=64)
def _oplus_table_cached(g: Group, n: int, neg_key: bytes) -> np.ndarray:
    idx = np.arange(n)
    tab = cell_oplus(g, idx[:, None], idx[None, :])
    tab.setflags(write=False)
    return tab


def oplus_table(g: Group, n: int) -> np.ndarray:
    """n x n table of a ⊕ b for cell numbers below n (n a power of d)."""
    return _oplus_table_cached(g, n, g.neg_table.tobytes())


def digit_at(d: int, cells, position: int):
    """Digit at integer position ``position`` of cell numbers (position >= 0)."""
    if position < 0:
        raise ValueError("digit position must be nonnegative")
    return (np.asarray(cells) // d**position) % d
