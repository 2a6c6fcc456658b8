"""Finite abelian groups Z/d1 x ... x Z/dm with labels 0..d-1 and their characters."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .exact import Cyclo

__all__ = ["Group", "CharacterTable", "make_group", "add", "neg", "characters"]


@dataclass(frozen=True)
class Group:
    """Product of cyclic groups with mixed-radix labels.

    ``label(a1, ..., am) = a1 + d1*(a2 + d2*(...))``, so label 0 is the neutral
    element and labels enumerate the group bijectively.
    """

    orders: tuple[int, ...]

    def __post_init__(self):
        orders = tuple(int(o) for o in self.orders)
        if not orders:
            raise ValueError("group needs at least one cyclic factor")
        if any(o < 2 for o in orders):
            raise ValueError(f"cyclic orders must be >= 2, got {list(orders)}")
        object.__setattr__(self, "orders", orders)

    @property
    def d(self) -> int:
        return math.prod(self.orders)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.orders)

    def element(self, label: int) -> tuple[int, ...]:
        self._check(label)
        out = []
        for o in self.orders:
            out.append(label % o)
            label //= o
        return tuple(out)

    def label(self, element) -> int:
        if len(element) != len(self.orders):
            raise ValueError("element has wrong number of components")
        lab = 0
        for a, o in zip(reversed(element), reversed(self.orders)):
            lab = lab * o + (a % o)
        return lab

    def _check(self, label):
        if not 0 <= label < self.d:
            raise ValueError(f"label {label} out of range for group of order {self.d}")

    @cached_property
    def add_table(self) -> np.ndarray:
        d = self.d
        tab = np.empty((d, d), dtype=np.int64)
        elems = [self.element(a) for a in range(d)]
        for a, ea in enumerate(elems):
            for b, eb in enumerate(elems):
                tab[a, b] = self.label(tuple(x + y for x, y in zip(ea, eb)))
        return tab

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.array([self.label(tuple(-x for x in self.element(a)))
                         for a in range(self.d)], dtype=np.int64)

    def add(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        return int(self.add_table[a, b])

    def neg(self, a: int) -> int:
        self._check(a)
        return int(self.neg_table[a])

    def with_faulty_neg(self) -> "Group":
        """Copy whose inverse map is the identity (negative-control fixture)."""
        bad = Group(self.orders)
        bad.__dict__["neg_table"] = np.arange(self.d, dtype=np.int64)
        return bad

    def __repr__(self):
        return f"Group({list(self.orders)})"


def make_group(orders) -> Group:
    if isinstance(orders, int):
        orders = [orders]
    return Group(tuple(orders))


def add(g: Group, a: int, b: int) -> int:
    return g.add(a, b)


def neg(g: Group, a: int) -> int:
    return g.neg(a)


@dataclass(frozen=True)
class CharacterTable:
    """All d characters of a group as rational rotation numbers.

    ``rotations[s][a] = q`` means ``xi_s(a) = exp(2*pi*i*q)``; row 0 is the
    trivial character.
    """

    group: Group
    rotations: tuple[tuple[Fraction, ...], ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def d(self) -> int:
        return self.group.d

    def rotation(self, s: int, a: int) -> Fraction:
        return self.rotations[s][a]

    def exact(self, s: int, a: int) -> Cyclo:
        key = (s, a)
        if key not in self._cache:
            self._cache[key] = Cyclo.root(self.rotations[s][a])
        return self._cache[key]

    def value(self, s: int, a: int) -> complex:
        return complex(np.exp(2j * np.pi * float(self.rotations[s][a])))

    def as_complex(self) -> np.ndarray:
        q = np.array([[float(x) for x in row] for row in self.rotations])
        return np.exp(2j * np.pi * q)

    def is_multiplicative(self) -> bool:
        g = self.group
        for s in range(self.d):
            for a in range(self.d):
                for b in range(self.d):
                    lhs = self.rotations[s][g.add(a, b)]
                    if (lhs - self.rotations[s][a] - self.rotations[s][b]) % 1:
                        return False
        return True

    def orthogonality_defects(self) -> list[tuple[int, int]]:
        """Pairs (s, s') where sum_a xi_s(a) conj(xi_s'(a)) != d*[s == s'], exactly."""
        bad = []
        for s in range(self.d):
            for t in range(self.d):
                total = Cyclo.rational(0)
                for a in range(self.d):
                    total = total + Cyclo.root(self.rotations[s][a] - self.rotations[t][a])
                if total != (self.d if s == t else 0):
                    bad.append((s, t))
        return bad

    def permuted(self, order) -> "CharacterTable":
        """Re-enumerate the nontrivial characters; ``order`` permutes 1..d-1."""
        order = list(order)
        if sorted(order) != list(range(1, self.d)):
            raise ValueError("order must permute 1..d-1")
        rows = (self.rotations[0],) + tuple(self.rotations[s] for s in order)
        return CharacterTable(self.group, rows)

    def corrupted(self, s: int, a: int, delta) -> "CharacterTable":
        """Copy with one entry's rotation shifted by ``delta`` (negative-control fixture)."""
        rows = [list(r) for r in self.rotations]
        rows[s][a] = (rows[s][a] + Fraction(delta)) % 1
        return CharacterTable(self.group, tuple(tuple(r) for r in rows))


def characters(g: Group) -> CharacterTable:
    """Character s = (s1..sm) sends a = (a1..am) to rotation sum_i s_i a_i / d_i mod 1."""
    rows = []
    for s in range(g.d):
        es = g.element(s)
        row = []
        for a in range(g.d):
            ea = g.element(a)
            row.append(sum((Fraction(x * y, o) for x, y, o in zip(es, ea, g.orders)),
                           Fraction(0)) % 1)
        rows.append(tuple(row))
    return CharacterTable(g, tuple(rows))


def elements(g: Group):
    """All labels, as a convenience for exhaustive loops."""
    return range(g.d)


def label_tuples(g: Group, n: int):
    """All sequences (a_0, ..., a_{n-1}) of labels, i.e. the box Phi_n."""
    return itertools.product(range(g.d), repeat=n)
