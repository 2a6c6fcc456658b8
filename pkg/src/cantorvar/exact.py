"""Exact scalar arithmetic.

Two pieces live here:

* :class:`Cyclo`, an element of a cyclotomic field ``Q(zeta_M)``.  Character
  values, Haar atom values and Gaussian-rational grid entries are all of this
  form, so identity checks can be carried out with zero tolerance.
* An integer "raw form" for grids (:func:`clear_denominators`,
  :class:`GaussArray`).  Heavy evaluators scale rational grids to integers,
  do all cell sums in integer numpy arithmetic and apply the rational scale
  factor once at the end.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

__all__ = [
    "Cyclo",
    "GaussArray",
    "as_exact",
    "clear_denominators",
    "finish",
    "narrow",
    "simplify",
]

INT64_SAFE = 2**62


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients (low degree first) of the n-th cyclotomic polynomial."""
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for m in range(1, n):
        if n % m == 0:
            num = _exact_div(num, cyclotomic_poly(m))
    return tuple(num)


def _exact_div(num: list[int], den: tuple[int, ...]) -> list[int]:
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        q[i] = c
        for j, a in enumerate(den):
            num[i + j] -= c * a
    assert not any(num), "non-exact polynomial division"
    return q


def _reduce(level: int, poly: list) -> tuple[Fraction, ...]:
    """Reduce a polynomial in zeta (any degree) modulo the cyclotomic polynomial."""
    phi = cyclotomic_poly(level)
    deg = len(phi) - 1
    work = [Fraction(0)] * level
    for e, c in enumerate(poly):
        if c:
            work[e % level] += c
    for top in range(level - 1, deg - 1, -1):
        c = work[top]
        if c:
            for j in range(deg):
                if phi[j]:
                    work[top - deg + j] -= c * phi[j]
            work[top] = Fraction(0)
    return tuple(work[:deg])


class Cyclo:
    """Exact element of ``Q(zeta_level)`` with ``zeta_level = exp(2*pi*i/level)``.

    Stored in the power basis ``1, zeta, ..., zeta^(phi(level)-1)``, which makes
    the representation canonical for a fixed level.  Binary operations lift
    both operands to the lcm of their levels.
    """

    __slots__ = ("level", "coeffs")

    def __init__(self, level: int, poly=()):
        if level < 1:
            raise ValueError("level must be positive")
        self.level = level
        self.coeffs = _reduce(level, [Fraction(c) for c in poly])

    # -- constructors -----------------------------------------------------
    @classmethod
    def rational(cls, q) -> "Cyclo":
        return cls(1, [Fraction(q)])

    @classmethod
    def root(cls, rotation) -> "Cyclo":
        """``exp(2*pi*i*rotation)`` for a rational rotation number."""
        q = Fraction(rotation) % 1
        poly = [0] * q.denominator
        poly[q.numerator] = 1
        return cls(q.denominator, poly)

    @classmethod
    def gaussian(cls, re, im=0) -> "Cyclo":
        return cls(4, [Fraction(re), Fraction(im)])

    # -- structure ---------------------------------------------------------
    def lift(self, level: int) -> "Cyclo":
        if level == self.level:
            return self
        if level % self.level:
            raise ValueError(f"cannot lift level {self.level} to {level}")
        step = level // self.level
        poly = [Fraction(0)] * (step * max(len(self.coeffs), 1))
        for e, c in enumerate(self.coeffs):
            poly[e * step] = c
        return Cyclo(level, poly)

    def _pair(self, other):
        other = as_cyclo(other)
        if other is None:
            return None
        level = math.lcm(self.level, other.level)
        return self.lift(level), other.lift(level)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def real_imag(self) -> tuple[Fraction, Fraction]:
        """Exact real and imaginary parts; raises unless both are rational."""
        re = (self + self.conjugate()) * Fraction(1, 2)
        im = (self - self.conjugate()) * Cyclo.gaussian(0, Fraction(-1, 2))
        return re.to_fraction(), im.to_fraction()

    def conjugate(self) -> "Cyclo":
        poly = [Fraction(0)] * self.level
        for e, c in enumerate(self.coeffs):
            poly[(-e) % self.level] += c
        return Cyclo(self.level, poly)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        n = max(len(a.coeffs), len(b.coeffs))
        ca = a.coeffs + (Fraction(0),) * (n - len(a.coeffs))
        cb = b.coeffs + (Fraction(0),) * (n - len(b.coeffs))
        return Cyclo(a.level, [x + y for x, y in zip(ca, cb)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.level, [-c for c in self.coeffs])

    def __sub__(self, other):
        other = as_cyclo(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_cyclo(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        poly = [Fraction(0)] * max(len(a.coeffs) + len(b.coeffs) - 1, 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        poly[i + j] += x * y
        return Cyclo(a.level, poly)

    __rmul__ = __mul__

    def galois(self, j: int) -> "Cyclo":
        """Image under the automorphism z -> z^j (j coprime to the level)."""
        poly = [Fraction(0)] * self.level
        for e, c in enumerate(self.coeffs):
            poly[(e * j) % self.level] += c
        return Cyclo(self.level, poly)

    def inverse(self) -> "Cyclo":
        """1/x as the product of the other Galois conjugates over the field norm."""
        if not self:
            raise ZeroDivisionError("division by zero in a cyclotomic field")
        if self.is_rational():
            return Cyclo.rational(1 / self.to_fraction())
        rest = Cyclo.rational(1)
        for j in range(2, self.level):
            if math.gcd(j, self.level) == 1:
                rest = rest * self.galois(j)
        norm = (self * rest).to_fraction()
        return rest * (1 / norm)

    def __truediv__(self, other):
        if isinstance(other, Cyclo):
            return self * other.inverse()
        if not isinstance(other, Rational):
            return NotImplemented
        return self * Fraction(other.denominator, other.numerator)

    def __rtruediv__(self, other):
        if not isinstance(other, Rational):
            return NotImplemented
        return self.inverse() * other

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Cyclo.rational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a.coeffs == b.coeffs

    def __hash__(self):
        if self.is_rational():
            return hash(self.to_fraction())
        raise TypeError("non-rational Cyclo values are unhashable")

    def __bool__(self):
        return any(self.coeffs)

    def __complex__(self):
        return complex(sum(complex(c) * np.exp(2j * np.pi * e / self.level)
                           for e, c in enumerate(self.coeffs)))

    def __float__(self):
        return float(self.to_fraction())

    def __repr__(self):
        if self.is_rational():
            return f"Cyclo({self.to_fraction()})"
        terms = " + ".join(f"{c}*z^{e}" for e, c in enumerate(self.coeffs) if c)
        return f"Cyclo[{self.level}]({terms})"


def as_cyclo(x):
    if isinstance(x, Cyclo):
        return x
    if isinstance(x, (int, Fraction, Rational, np.integer)):
        return Cyclo.rational(Fraction(int(x)) if isinstance(x, np.integer) else x)
    return None


def simplify(x):
    """Return a Fraction for rational exact values, the Cyclo otherwise."""
    if isinstance(x, Cyclo) and x.is_rational():
        return x.to_fraction()
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return x


def as_exact(v):
    """Parse a user scalar into Fraction (real) or Gaussian Cyclo (complex)."""
    if isinstance(v, Cyclo):
        re, im = v.real_imag()
        return re if im == 0 else Cyclo.gaussian(re, im)
    if isinstance(v, (tuple, list)):
        if len(v) == 2:
            re, im = Fraction(v[0]), Fraction(v[1])
        elif len(v) == 4:
            re, im = Fraction(v[0], v[1]), Fraction(v[2], v[3])
        else:
            raise ValueError(f"cannot parse exact scalar {v!r}")
        return re if im == 0 else Cyclo.gaussian(re, im)
    if isinstance(v, float):
        if not v.is_integer():
            raise ValueError(f"refusing inexact float {v!r} in exact mode")
        return Fraction(int(v))
    if isinstance(v, (complex, np.complexfloating)):
        raise ValueError(f"refusing inexact complex {v!r} in exact mode")
    if isinstance(v, np.integer):
        return Fraction(int(v))
    return Fraction(v)


def _parts(v) -> tuple[Fraction, Fraction]:
    if isinstance(v, Cyclo):
        return v.real_imag()
    return Fraction(v), Fraction(0)


class GaussArray:
    """A pair of integer arrays standing for ``re + i*im``.

    Duck-types the handful of ndarray operations the evaluators use, so the
    same code runs on float arrays, integer arrays and Gaussian-integer arrays.
    """

    __slots__ = ("re", "im")
    __array_ufunc__ = None  # keep numpy from broadcasting into us

    def __init__(self, re, im):
        self.re = np.asarray(re)
        self.im = np.asarray(im)

    @property
    def shape(self):
        return self.re.shape

    @property
    def dtype(self):
        return self.re.dtype

    @property
    def T(self):
        return GaussArray(self.re.T, self.im.T)

    def __getitem__(self, key):
        return GaussArray(self.re[key], self.im[key])

    def reshape(self, *shape):
        return GaussArray(self.re.reshape(*shape), self.im.reshape(*shape))

    def astype(self, dtype):
        return GaussArray(self.re.astype(dtype), self.im.astype(dtype))

    def sum(self, axis=None):
        return GaussArray(self.re.sum(axis=axis), self.im.sum(axis=axis))

    def conj(self):
        return GaussArray(self.re, -self.im)

    conjugate = conj

    @staticmethod
    def _split(x):
        if isinstance(x, GaussArray):
            return x.re, x.im
        return x, 0

    def __add__(self, other):
        re, im = self._split(other)
        return GaussArray(self.re + re, self.im + im)

    __radd__ = __add__

    def __sub__(self, other):
        re, im = self._split(other)
        return GaussArray(self.re - re, self.im - im)

    def __rsub__(self, other):
        re, im = self._split(other)
        return GaussArray(re - self.re, im - self.im)

    def __neg__(self):
        return GaussArray(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, GaussArray):
            return GaussArray(self.re * other.re - self.im * other.im,
                              self.re * other.im + self.im * other.re)
        return GaussArray(self.re * other, self.im * other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = GaussArray(np.ones_like(self.re), np.zeros_like(self.im))
        for _ in range(k):
            out = out * self
        return out

    def abs2(self):
        return self.re * self.re + self.im * self.im


def clear_denominators(values: np.ndarray):
    """Scale an exact object grid to integers.

    Returns ``(raw, D)`` with ``values == raw / D`` entrywise; ``raw`` is an
    object-dtype int array, or a :class:`GaussArray` when any entry has a
    nonzero imaginary part.
    """
    flat = [_parts(v) for v in values.ravel()]
    den = 1
    for re, im in flat:
        den = math.lcm(den, re.denominator, im.denominator)
    re = np.empty(len(flat), dtype=object)
    im = np.empty(len(flat), dtype=object)
    for i, (a, b) in enumerate(flat):
        re[i] = a.numerator * (den // a.denominator)
        im[i] = b.numerator * (den // b.denominator)
    re = re.reshape(values.shape)
    im = im.reshape(values.shape)
    if any(im.ravel()):
        return GaussArray(re, im), den
    return re, den


def max_abs(raw) -> int:
    if isinstance(raw, GaussArray):
        return max_abs(raw.re) + max_abs(raw.im)
    if raw.size == 0:
        return 0
    return int(max(abs(int(v)) for v in raw.ravel()))


def narrow(raw, bound: int):
    """Switch a raw integer array to int64 when ``bound`` rules out overflow."""
    dtype = np.int64 if bound < INT64_SAFE else object
    return raw.astype(dtype)


def finish(raw_total, scale):
    """Turn a raw reduction result and its scale into the public scalar.

    Exact scale (Fraction) gives a Fraction or Cyclo; float scale gives a
    Python float/complex.
    """
    if isinstance(scale, Fraction):
        if isinstance(raw_total, GaussArray):
            re, im = int(raw_total.re), int(raw_total.im)
            return simplify(Cyclo.gaussian(re, im) * scale)
        if isinstance(raw_total, Cyclo):
            return simplify(raw_total * scale)
        return Fraction(int(raw_total)) * scale
    value = complex(raw_total) * scale
    if isinstance(raw_total, (complex, np.complexfloating)):
        return value
    return value.real
