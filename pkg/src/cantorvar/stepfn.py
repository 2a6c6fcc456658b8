"""Complex step functions on R_+^2 constant on d-adic cells.

A :class:`StepFn2` with resolution K and support exponent N holds an
``n x n`` grid, ``n = d^(N+K)``; entry ``[a, b]`` is the value on
``[a d^-K, (a+1) d^-K) x [b d^-K, (b+1) d^-K)``.  In exact mode the grid is an
object array of Fractions (or Gaussian :class:`~cantorvar.exact.Cyclo`
values); in float mode it is a float64 or complex128 array.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .abelian import Group, make_group
from .dadic import cell_ominus, cell_oplus
from .exact import Cyclo, GaussArray, as_exact, clear_denominators

__all__ = [
    "StepFn2",
    "make_step",
    "refine",
    "lp_norm_p",
    "tilde_transform_F",
    "tilde_transform_G",
    "constant",
    "random_step",
    "raw",
]

MODES = ("exact", "float")


@dataclass(frozen=True, eq=False)
class StepFn2:
    group: Group
    K: int
    N: int
    values: np.ndarray
    mode: str

    @property
    def d(self) -> int:
        return self.group.d

    @property
    def n(self) -> int:
        return self.d ** (self.N + self.K)

    @property
    def cell_area(self):
        area = Fraction(1, self.d ** (2 * self.K))
        return area if self.mode == "exact" else float(area)

    @property
    def is_real(self) -> bool:
        if self.mode == "float":
            return not np.iscomplexobj(self.values)
        return not any(isinstance(v, Cyclo) for v in self.values.ravel())

    @property
    def nonnegative(self) -> bool:
        if not self.is_real:
            return False
        if self.mode == "float":
            return bool((self.values >= 0).all())
        return all(v >= 0 for v in self.values.ravel())

    def __call__(self, x, y):
        """Pointwise value at real (Fraction or float) coordinates."""
        a = int(np.floor(x * self.d**self.K))
        b = int(np.floor(y * self.d**self.K))
        if 0 <= a < self.n and 0 <= b < self.n:
            return self.values[a, b]
        return Fraction(0) if self.mode == "exact" else 0.0

    def same_shape(self, other: "StepFn2") -> bool:
        return (self.group == other.group and self.K == other.K
                and self.N == other.N and self.mode == other.mode)

    def with_values(self, values) -> "StepFn2":
        return StepFn2(self.group, self.K, self.N, values, self.mode)

    def to_float(self) -> "StepFn2":
        if self.mode == "float":
            return self
        if self.is_real:
            vals = np.array([[float(v) for v in row] for row in self.values], dtype=float)
        else:
            vals = np.array([[complex(v) for v in row] for row in self.values], dtype=complex)
        return StepFn2(self.group, self.K, self.N, vals, "float")

    def equals(self, other: "StepFn2") -> bool:
        """Pointwise equality as functions (different resolutions allowed)."""
        if self.group != other.group:
            return False
        K = max(self.K, other.K)
        a, b = refine(self, K), refine(other, K)
        N = max(a.N, b.N)
        a, b = _pad_support(a, N), _pad_support(b, N)
        if self.mode == "exact" and other.mode == "exact":
            return all(x == y for x, y in zip(a.values.ravel(), b.values.ravel()))
        return bool(np.array_equal(np.asarray(a.values, dtype=complex),
                                   np.asarray(b.values, dtype=complex)))

    # -- serialization --------------------------------------------------------
    def to_json(self) -> dict:
        out = {"d": self.d, "group": list(self.group.orders), "K": self.K, "N": self.N,
               "mode": self.mode}
        if self.mode == "exact":
            rows = []
            for v in self.values.ravel():
                re, im = v.real_imag() if isinstance(v, Cyclo) else (Fraction(v), Fraction(0))
                rows.append([re.numerator, re.denominator, im.numerator, im.denominator])
            out["values"] = rows
        elif self.is_real:
            out["values"] = [float(v) for v in self.values.ravel()]
        else:
            out["values"] = [[float(v.real), float(v.imag)] for v in self.values.ravel()]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "StepFn2":
        g = make_group(obj.get("group", [obj["d"]]))
        if g.d != obj["d"]:
            raise ValueError(f"group {g} does not have order d={obj['d']}")
        K, N, mode = int(obj["K"]), int(obj["N"]), obj.get("mode", "exact")
        n = g.d ** (N + K)
        flat = obj["values"]
        if len(flat) != n * n:
            raise ValueError(f"expected {n * n} values, got {len(flat)}")
        if mode == "float":
            if flat and isinstance(flat[0], list):
                vals = np.array([complex(a, b) for a, b in flat]).reshape(n, n)
            else:
                vals = np.array(flat, dtype=float).reshape(n, n)
            return make_step(g, K, N, vals, "float")
        return make_step(g, K, N, np.array([as_exact(v) for v in flat], dtype=object)
                         .reshape(n, n), "exact")


def _pad_support(F: StepFn2, N: int) -> StepFn2:
    if N == F.N:
        return F
    n = F.d ** (N + F.K)
    zero = Fraction(0) if F.mode == "exact" else 0
    vals = np.full((n, n), zero, dtype=F.values.dtype)
    vals[:F.n, :F.n] = F.values
    return StepFn2(F.group, F.K, N, vals, F.mode)


def make_step(group: Group, K: int, N: int, values, mode: str | None = None) -> StepFn2:
    """Build a StepFn2 from an ``n x n`` grid, ``n = d^(N+K)``.

    Without ``mode``, float arrays give float mode and everything else
    (ints, Fractions, Gaussian Cyclos) gives exact mode.
    """
    if K < 0 or N < 0:
        raise ValueError("resolution K and support exponent N must be nonnegative")
    arr = np.asarray(values)
    n = group.d ** (N + K)
    if arr.shape != (n, n):
        raise ValueError(f"grid must be {n} x {n} for d={group.d}, K={K}, N={N}; got {arr.shape}")
    if mode is None:
        mode = "float" if arr.dtype.kind in "fc" else "exact"
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "exact":
        if arr.dtype.kind in "fc":
            raise ValueError("float grids cannot be used in exact mode")
        vals = np.empty((n, n), dtype=object)
        for idx, v in np.ndenumerate(arr):
            vals[idx] = as_exact(v)
    else:
        if arr.dtype == object:
            conv = [complex(v) for v in arr.ravel()]
            if any(c.imag for c in conv):
                vals = np.array(conv, dtype=complex).reshape(n, n)
            else:
                vals = np.array([c.real for c in conv], dtype=float).reshape(n, n)
        else:
            vals = arr.astype(complex if arr.dtype.kind == "c" else float)
    vals.setflags(write=False)
    return StepFn2(group, K, N, vals, mode)


def constant(group: Group, value=1, K: int = 0, N: int = 0, mode: str = "exact") -> StepFn2:
    """``value`` times the indicator of the support square [0, d^N)^2."""
    n = group.d ** (N + K)
    if mode == "exact":
        vals = np.full((n, n), as_exact(value), dtype=object)
    else:
        vals = np.full((n, n), value, dtype=complex if isinstance(value, complex) else float)
    return make_step(group, K, N, vals, mode)


def refine(F: StepFn2, K2: int) -> StepFn2:
    """Same function on the finer grid of resolution K2 >= K."""
    if K2 < F.K:
        raise ValueError("refine cannot coarsen a grid")
    if K2 == F.K:
        return F
    r = F.d ** (K2 - F.K)
    vals = np.repeat(np.repeat(F.values, r, axis=0), r, axis=1)
    vals.setflags(write=False)
    return StepFn2(F.group, K2, F.N, vals, F.mode)


def raw(F: StepFn2):
    """Integer (exact) or float values plus the scalar they must be multiplied by."""
    if F.mode == "exact":
        ints, den = clear_denominators(F.values)
        return ints, Fraction(1, den)
    return F.values, 1.0


def lp_norm_p(F: StepFn2, p) -> Fraction | float:
    """``||F||_p^p``.

    Exact mode needs an integer p, and an even one when F is complex-valued.
    """
    if F.mode == "exact":
        if not isinstance(p, (int, np.integer)) or p < 1:
            raise ValueError("exact norms need a positive integer p")
        ints, scale = raw(F)
        if isinstance(ints, GaussArray):
            if p % 2:
                raise ValueError("exact norms of complex data need an even p")
            mags = ints.abs2() ** (p // 2)
        else:
            mags = abs(ints) ** p
        return Fraction(int(mags.sum())) * scale**p * F.cell_area
    if p <= 0:
        raise ValueError("p must be positive")
    return float((np.abs(F.values) ** p).sum() * F.cell_area)


def _shear(F: StepFn2, first_is_target: bool) -> StepFn2:
    g, n = F.group, F.n
    z = np.arange(n)[:, None]
    w = np.arange(n)[None, :]
    src = cell_oplus(g, z, cell_ominus(g, w))  # z ⊖ w
    if first_is_target:
        vals = F.values[src, np.broadcast_to(w, src.shape)]
    else:
        vals = F.values[np.broadcast_to(w, src.shape), src]
    vals = np.array(vals)
    vals.setflags(write=False)
    return StepFn2(g, F.K, F.N, vals, F.mode)


def tilde_transform_F(F: StepFn2) -> StepFn2:
    """``Ft(z, y) = F(z ⊖ y, y)``."""
    return _shear(F, True)


def tilde_transform_G(G: StepFn2) -> StepFn2:
    """``Gt(z, x) = G(x, z ⊖ x)``; the first coordinate of the result is z."""
    return _shear(G, False)


def random_step(rng: np.random.Generator, group: Group, K: int, N: int, mode: str = "exact",
                nonnegative: bool = True, complex_values: bool = False,
                max_num: int = 4, max_den: int = 3) -> StepFn2:
    """Random grid; exact entries are small rationals num/den."""
    n = group.d ** (N + K)
    if mode == "float":
        lo = 0.0 if nonnegative else -1.0
        vals = rng.uniform(lo, 1.0, size=(n, n))
        if complex_values:
            vals = vals + 1j * rng.uniform(-1.0, 1.0, size=(n, n))
        return make_step(group, K, N, vals, "float")

    def draw():
        lo = 0 if nonnegative else -max_num
        return Fraction(int(rng.integers(lo, max_num + 1)), int(rng.integers(1, max_den + 1)))

    vals = np.empty((n, n), dtype=object)
    for idx in np.ndindex(n, n):
        vals[idx] = Cyclo.gaussian(draw(), draw()) if complex_values else draw()
    return make_step(group, K, N, vals, "exact")

