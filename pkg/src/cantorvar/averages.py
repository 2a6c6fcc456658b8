"""Bilinear averages, their discrete and ergodic counterparts, variation and jump counts."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .abelian import Group
from .dadic import iota, kappa, oplus, oplus_table
from .errors import check_axis
from .exact import Cyclo, GaussArray, max_abs, narrow
from .stepfn import StepFn2, raw

__all__ = [
    "ScaleLadder",
    "VariationReport",
    "bilinear_average",
    "bilinear_average_direct",
    "discrete_average",
    "ergodic_average",
    "lp_pow",
    "variation_sum",
    "jump_matrix",
    "greedy_jumps",
    "max_jumps_exhaustive",
    "count_jumps",
]


@dataclass(frozen=True)
class ScaleLadder:
    """Strictly increasing scales k_0 < ... < k_m with m >= 1."""

    ks: tuple[int, ...]

    def __post_init__(self):
        ks = tuple(int(k) for k in self.ks)
        if len(ks) < 2:
            raise ValueError("a ladder needs at least two scales")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError(f"scales must be strictly increasing: {list(ks)}")
        object.__setattr__(self, "ks", ks)

    @property
    def m(self) -> int:
        return len(self.ks) - 1

    @classmethod
    def from_ns(cls, ns) -> "ScaleLadder":
        """Ladder k_j = -n_{m-j} matching averaging depths n_0 < ... < n_m."""
        return cls(tuple(-n for n in reversed(tuple(ns))))

    def __iter__(self):
        return iter(self.ks)


@dataclass
class VariationReport:
    jump_norms: list[float]
    variation_sum: object
    bound: object = None
    ratio: float | None = None
    jump_pows: list = field(default_factory=list)
    links: dict = field(default_factory=dict)

    def fill_bound(self, bound):
        self.bound = bound
        self.ratio = float(self.variation_sum) / float(bound) if bound else (
            0.0 if not self.variation_sum else math.inf)
        return self

    def to_json(self) -> dict:
        out = {
            "jump_norms": [float(x) for x in self.jump_norms],
            "variation_sum": float(self.variation_sum),
            "bound": None if self.bound is None else float(self.bound),
            "ratio": self.ratio,
        }
        if self.links:
            out["links"] = {k: v.to_json() for k, v in self.links.items()}
        return out


# -- bilinear averages on R_+^2 ------------------------------------------------

def _check_pair(F: StepFn2, G: StepFn2):
    if not F.same_shape(G):
        raise ValueError("F and G must share group, resolution, support and mode")


def bilinear_average(F: StepFn2, G: StepFn2, k: int, max_axis: int | None = None) -> StepFn2:
    """A_k(F,G)(x,y) = d^k * integral over [0, d^-k) of F(x⊕t, y) G(x, y⊕t) dt.

    Translates t with digits above the support only push x⊕t out of it, so the
    sum runs over min(d^(K-k), d^(N+K)) resolution-K cells of t.  The result
    lives on the same grid: F(., y) needs y in the support and G(x, .) needs x
    in it.
    """
    _check_pair(F, G)
    if k > F.K:
        raise ValueError(f"scale {k} is finer than the resolution K={F.K}")
    check_axis(F.n, max_axis)
    d, n, K = F.d, F.n, F.K
    T = min(d ** (K - k), n)
    tab = oplus_table(F.group, n)[:, :T]  # tab[a, tau] = a ⊕ tau
    RF, sF = raw(F)
    RG, sG = raw(G)
    if F.mode == "exact":
        bound = max_abs(RF) * max_abs(RG) * T * 2
        RF, RG = narrow(RF, bound), narrow(RG, bound)
    cols = np.arange(n)
    left = RF[tab[:, :, None], cols[None, None, :]]     # F[a⊕tau, b]
    right = RG[cols[:, None, None], tab.T[None, :, :]]  # G[a, b⊕tau]
    S = (left * right).sum(axis=1)
    scale = Fraction(d) ** (k - K) if F.mode == "exact" else float(d) ** (k - K)
    return F.with_values(_scaled(S, sF * sG * scale, F.mode))


def _scaled(S, scale, mode):
    if mode == "float":
        out = np.asarray(S * scale)
    else:
        out = np.empty(S.shape, dtype=object)
        if isinstance(S, GaussArray):
            for idx in np.ndindex(*S.shape):
                re, im = Fraction(int(S.re[idx])) * scale, Fraction(int(S.im[idx])) * scale
                out[idx] = re if im == 0 else Cyclo.gaussian(re, im)
        else:
            for idx in np.ndindex(*S.shape):
                out[idx] = Fraction(int(S[idx])) * scale
    out.setflags(write=False)
    return out


def bilinear_average_direct(F: StepFn2, G: StepFn2, k: int) -> StepFn2:
    """Pointwise evaluation of A_k straight from its definition (oracle).

    Each cell is sampled at an interior d-adic point; the t-integral is a sum
    over the resolution-K cells of [0, d^-k), with x⊕t and y⊕t formed on
    digit vectors.
    """
    _check_pair(F, G)
    if F.mode != "exact":
        raise ValueError("the direct oracle works in exact mode")
    g, d, K = F.group, F.d, F.K
    if k > K:
        raise ValueError(f"scale {k} is finer than the resolution K={K}")
    step = Fraction(1, d**K)
    out = np.empty((F.n, F.n), dtype=object)
    for a in range(F.n):
        x = Fraction(a * d + 1, d ** (K + 1))
        kx = kappa(g, x)
        for b in range(F.n):
            y = Fraction(b * d + 1, d ** (K + 1))
            ky = kappa(g, y)
            total = Fraction(0)
            for tau in range(d ** (K - k)):
                kt = kappa(g, tau * step)
                fx = F(iota(oplus(kx, kt)), y)
                gy = G(x, iota(oplus(ky, kt)))
                total += fx * gy * step
            out[a, b] = total * Fraction(d) ** k
    return F.with_values(out)


# -- the discrete model on A^N x A^N ------------------------------------------

def _shift(arr: np.ndarray, group: Group, axis_offset: int, c) -> np.ndarray:
    """arr with the digit axes starting at ``axis_offset`` translated by c."""
    for i, ci in enumerate(c):
        if ci:
            arr = np.take(arr, group.add_table[:, ci], axis=axis_offset + i)
    return arr


def discrete_average(Fp: np.ndarray, Gp: np.ndarray, n: int, group: Group) -> np.ndarray:
    """A'_n(F',G')(a,b) = |Phi_n|^-1 sum_{c in Phi_n} F'(a+c, b) G'(a, b+c).

    ``Fp`` and ``Gp`` are arrays of shape (d,)*2N; the first N axes are the
    digits a_0..a_{N-1}, the last N the digits of b.
    """
    if Fp.shape != Gp.shape or Fp.ndim % 2:
        raise ValueError("F' and G' must be arrays of equal shape (d,)*2N")
    N = Fp.ndim // 2
    d = group.d
    if any(s != d for s in Fp.shape):
        raise ValueError(f"every axis must have length d={d}")
    if not 0 <= n <= N:
        raise ValueError(f"n={n} must lie in 0..{N}")
    total = None
    for c in itertools.product(range(d), repeat=n):
        term = _shift(Fp, group, 0, c) * _shift(Gp, group, N, c)
        total = term if total is None else total + term
    exact = Fp.dtype == object
    # N = 0 grids are 0-d; keep the array type so callers can index with ()
    return np.asarray(total * (Fraction(1, d**n) if exact else 1.0 / d**n), dtype=Fp.dtype)


def ergodic_average(sys, f, g, n: int) -> np.ndarray:
    """M_n(f,g) = |Phi_n|^-1 sum_{a in Phi_n} (f o S^a)(g o T^a) on a FiniteSystem."""
    if not 0 <= n <= sys.depth:
        raise ValueError(f"n={n} exceeds the system depth {sys.depth}")
    f = np.asarray(f)
    g = np.asarray(g)
    total = None
    for a in itertools.product(range(sys.group.d), repeat=n):
        term = f[sys.S(a)] * g[sys.T(a)]
        total = term if total is None else total + term
    exact = f.dtype == object or g.dtype == object
    return total * (Fraction(1, sys.group.d**n) if exact else 1.0 / sys.group.d**n)


# -- norms, variation and jumps ------------------------------------------------

def _abs_pow(v, p):
    if isinstance(v, Cyclo):
        if p % 2:
            raise ValueError("exact norms of complex values need an even p")
        re, im = v.real_imag()
        return (re * re + im * im) ** (p // 2)
    return abs(v) ** p


def lp_pow(values, p, weight):
    """sum weight * |values|^p (exact for object arrays, float otherwise)."""
    values = np.asarray(values)
    weight = np.broadcast_to(np.asarray(weight, dtype=object if values.dtype == object
                                        else float), values.shape)
    if values.dtype == object:
        return sum((w * _abs_pow(v, p) for v, w in zip(values.ravel(), weight.ravel())),
                   Fraction(0))
    return float((np.abs(values) ** p * weight).sum())


def _unpack(seq, weight):
    if seq and isinstance(seq[0], StepFn2):
        first = seq[0]
        if any(not first.same_shape(s) for s in seq):
            raise ValueError("all grids must share group, resolution, support and mode")
        return [s.values for s in seq], first.cell_area
    if weight is None:
        raise ValueError("plain arrays need an explicit measure")
    shapes = {np.shape(s) for s in seq}
    if len(shapes) > 1:
        raise ValueError("all functions must live on the same space")
    return [np.asarray(s) for s in seq], weight


def _root(x, p) -> float:
    return float(x) ** (1.0 / p)


def variation_sum(seq, p, weight=None) -> VariationReport:
    """Per-step L^p jumps of a sequence and the sum of their p-th powers."""
    vals, w = _unpack(list(seq), weight)
    pows = [lp_pow(b - a, p, w) for a, b in zip(vals, vals[1:])]
    total = sum(pows, Fraction(0)) if pows and isinstance(pows[0], Fraction) else float(sum(pows))
    return VariationReport(jump_norms=[_root(x, p) for x in pows], variation_sum=total,
                           jump_pows=pows)


def _eps_pow(eps, p, exact):
    if exact and isinstance(p, int):
        e = Fraction(repr(eps)) if isinstance(eps, float) else Fraction(eps)
        return e**p
    return float(eps) ** p


def jump_matrix(seq, eps, p, weight=None) -> np.ndarray:
    """ok[i, j] is True when ||seq[i] - seq[j]||_p >= eps (i < j)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    vals, w = _unpack(list(seq), weight)
    exact = bool(vals) and vals[0].dtype == object
    thr = _eps_pow(eps, p, exact)
    L = len(vals)
    ok = np.zeros((L, L), dtype=bool)
    for i in range(L):
        for j in range(i + 1, L):
            ok[i, j] = lp_pow(vals[j] - vals[i], p, w) >= thr
    return ok


def greedy_jumps(ok: np.ndarray) -> int:
    """Earliest-closing scan: close a jump at the first n' reachable from the open window."""
    L = ok.shape[0]
    count, start = 0, 0
    for j in range(1, L):
        if ok[start:j, j].any():
            count += 1
            start = j
    return count


def max_jumps_exhaustive(ok: np.ndarray) -> int:
    """Largest m with n_1 < n'_1 <= n_2 < ... < n'_m and every pair a jump (brute force)."""
    L = ok.shape[0]

    def best(start):
        top = 0
        for i in range(start, L):
            for j in range(i + 1, L):
                if ok[i, j]:
                    top = max(top, 1 + best(j))
        return top

    return best(0)


def count_jumps(seq, eps, p, weight=None) -> int:
    return greedy_jumps(jump_matrix(seq, eps, p, weight))
