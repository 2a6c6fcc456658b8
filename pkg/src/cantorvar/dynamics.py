"""Finite systems with two commuting actions of the Folner box Phi_N.

Actions are stored as generator permutations: one per (digit position i,
group generator e), i.e. N*m of them for a group with m cyclic factors.
``S(a)`` composes them on demand for a digit tuple a = (a_0, ..., a_{n-1}).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .abelian import Group, make_group
from .averages import (VariationReport, bilinear_average, count_jumps, discrete_average,
                       ergodic_average, lp_pow, variation_sum)
from .dadic import iota_prime, kappa_prime
from .errors import check_axis
from .forms import assembled_constant
from .stepfn import make_step

__all__ = [
    "FiniteSystem",
    "explicit_system",
    "make_translation_system",
    "regular_system",
    "product_system",
    "product_point",
    "system_from_json",
    "translation_average_oracle",
    "theorem_check",
    "jump_check",
    "transference_check",
]

EXHAUSTIVE_LIMIT = 10**5


def _compose(P: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """The permutation x -> P(perm(x))."""
    return P[perm]


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    group: Group
    depth: int
    weights: np.ndarray
    S_gens: tuple
    T_gens: tuple
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def exact(self) -> bool:
        return self.weights.dtype == object

    def _act(self, gens, a) -> np.ndarray:
        a = tuple(int(x) for x in a)
        if len(a) > self.depth:
            raise ValueError(f"element of length {len(a)} exceeds the depth {self.depth}")
        m = len(self.group.orders)
        perm = np.arange(self.size)
        for i, label in enumerate(a):
            for e, c in enumerate(self.group.element(label)):
                for _ in range(c):
                    perm = _compose(gens[i * m + e], perm)
        return perm

    def S(self, a) -> np.ndarray:
        """Index array of S^a: ``S(a)[x] = S^a x``."""
        key = ("S", tuple(a))
        if key not in self._cache:
            self._cache[key] = self._act(self.S_gens, a)
        return self._cache[key]

    def T(self, a) -> np.ndarray:
        key = ("T", tuple(a))
        if key not in self._cache:
            self._cache[key] = self._act(self.T_gens, a)
        return self._cache[key]

    def axiom_failures(self, exhaustive: bool | None = None) -> list[str]:
        """Names of violated axioms (empty when the system is valid).

        Generators are always checked for order, mutual commutation and
        measure preservation, which together give a pair of commuting
        measure-preserving actions.  The composition laws are additionally
        re-checked over all of Phi_N x Phi_N when that is small enough.
        """
        out = []
        m = len(self.group.orders)
        ident = np.arange(self.size)
        gens = list(self.S_gens) + list(self.T_gens)
        for idx, P in enumerate(gens):
            order = self.group.orders[idx % m]
            Q = ident
            for _ in range(order):
                Q = _compose(P, Q)
            if not np.array_equal(Q, ident):
                out.append(f"generator {idx} does not have order dividing {order}")
            if not all(self.weights[P[x]] == self.weights[x] for x in range(self.size)):
                out.append(f"generator {idx} does not preserve the measure")
        for i, j in itertools.combinations(range(len(gens)), 2):
            if not np.array_equal(gens[i][gens[j]], gens[j][gens[i]]):
                out.append(f"generators {i} and {j} do not commute")
        if exhaustive is None:
            exhaustive = self.size * self.group.d ** (2 * self.depth) <= EXHAUSTIVE_LIMIT
        if exhaustive and not out:
            out += self._exhaustive_failures()
        return out

    def _exhaustive_failures(self) -> list[str]:
        g, N = self.group, self.depth
        box = list(itertools.product(range(g.d), repeat=N))
        zero = (0,) * N
        out = []
        if not (np.array_equal(self.S(zero), np.arange(self.size))
                and np.array_equal(self.T(zero), np.arange(self.size))):
            out.append("identity element acts nontrivially")
        for a in box:
            for b in box:
                ab = tuple(g.add(x, y) for x, y in zip(a, b))
                if not np.array_equal(self.S(a)[self.S(b)], self.S(ab)):
                    return out + [f"S^a S^b != S^(a+b) at a={a}, b={b}"]
                if not np.array_equal(self.T(a)[self.T(b)], self.T(ab)):
                    return out + [f"T^a T^b != T^(a+b) at a={a}, b={b}"]
                if not np.array_equal(self.S(a)[self.T(b)], self.T(b)[self.S(a)]):
                    return out + [f"S^a T^b != T^b S^a at a={a}, b={b}"]
        return out

    def norm_pow(self, f, p):
        return lp_pow(f, p, self.weights)


def explicit_system(group: Group, depth: int, weights, S_gens, T_gens,
                    check: bool = True) -> FiniteSystem:
    """A system from generator permutation tables; rejected unless the axioms hold."""
    w = np.asarray(weights)
    if w.dtype.kind not in "f":
        w = np.array([Fraction(x) for x in w], dtype=object)
    total = w.sum()
    if total != 1 and not (w.dtype.kind == "f" and abs(total - 1) < 1e-12):
        raise ValueError(f"weights must sum to 1, got {total}")
    if (w < 0).any() if w.dtype.kind == "f" else any(x < 0 for x in w):
        raise ValueError("weights must be nonnegative")
    need = depth * len(group.orders)
    S_gens = tuple(np.asarray(P, dtype=np.int64) for P in S_gens)
    T_gens = tuple(np.asarray(P, dtype=np.int64) for P in T_gens)
    for gens in (S_gens, T_gens):
        if len(gens) != need:
            raise ValueError(f"need {need} generator permutations, got {len(gens)}")
        for P in gens:
            if sorted(P.tolist()) != list(range(len(w))):
                raise ValueError("generator tables must be permutations of the points")
    sys = FiniteSystem(group, depth, w, S_gens, T_gens)
    if check:
        bad = sys.axiom_failures()
        if bad:
            raise ValueError("invalid system: " + "; ".join(bad))
    return sys


def _b_add(B: Group, x, y):
    return tuple((a + b) % o for a, b, o in zip(x, y, B.orders))


def make_translation_system(g: Group, N: int, B, sigma, tau) -> FiniteSystem:
    """Translations x -> x + sigma(a), x -> x + tau(a) on the abelian group B.

    ``sigma`` and ``tau`` list the images in B (as component tuples) of the
    N*m generators of Phi_N, ordered by digit position then group factor.
    """
    B = B if isinstance(B, Group) else make_group(B)
    m = len(g.orders)
    perms = []
    for images in (sigma, tau):
        images = [tuple(int(c) for c in v) for v in images]
        if len(images) != N * m:
            raise ValueError(f"need {N * m} generator images, got {len(images)}")
        gens = []
        for idx, v in enumerate(images):
            if len(v) != len(B.orders):
                raise ValueError(f"image {v} is not an element of B={list(B.orders)}")
            order = g.orders[idx % m]
            if any((order * c) % o for c, o in zip(v, B.orders)):
                raise ValueError(f"image {v} of a generator of order {order} is not killed by it")
            gens.append(np.array([B.label(_b_add(B, B.element(x), v)) for x in range(B.d)]))
        perms.append(gens)
    weights = np.array([Fraction(1, B.d)] * B.d, dtype=object)
    return explicit_system(g, N, weights, perms[0], perms[1])


def _unit(n: int, i: int):
    return tuple(int(j == i) for j in range(n))


def regular_system(g: Group, N: int) -> FiniteSystem:
    """X = A^N with S = T = the regular action."""
    m = len(g.orders)
    B = list(g.orders) * N
    images = [_unit(N * m, i) for i in range(N * m)]
    return make_translation_system(g, N, B, images, images)


def product_system(g: Group, N: int) -> FiniteSystem:
    """X = A^N x A^N, S translating the first factor and T the second."""
    m = len(g.orders)
    B = list(g.orders) * (2 * N)
    sigma = [_unit(2 * N * m, i) for i in range(N * m)]
    tau = [_unit(2 * N * m, N * m + i) for i in range(N * m)]
    return make_translation_system(g, N, B, sigma, tau)


def product_point(g: Group, N: int, a, b) -> int:
    """Point of ``product_system(g, N)`` with digit tuples a (first factor) and b."""
    comps = [c for label in tuple(a) + tuple(b) for c in g.element(label)]
    return make_group(list(g.orders) * (2 * N)).label(tuple(comps))


def system_from_json(obj: dict) -> FiniteSystem:
    g = make_group(obj["group"])
    N = int(obj["depth"])
    space = obj["space"]
    kind = space.get("type")
    if kind == "translation":
        return make_translation_system(g, N, space["B"], space["sigma"], space["tau"])
    if kind == "regular":
        return regular_system(g, N)
    if kind == "product":
        return product_system(g, N)
    if kind == "explicit":
        n = len(space["S"][0]) if space["S"] else len(space["weights"])
        weights = space.get("weights") or [Fraction(1, n)] * n
        weights = [Fraction(*w) if isinstance(w, list) else w for w in weights]
        return explicit_system(g, N, weights, space["S"], space["T"])
    raise ValueError(f"unknown space type {kind!r}")


def translation_average_oracle(g: Group, B, sigma, tau, f, h, n: int):
    """M_n(f, h) on a translation system summed directly in B (oracle)."""
    B = B if isinstance(B, Group) else make_group(B)
    m = len(g.orders)
    sigma = [tuple(v) for v in sigma]
    tau = [tuple(v) for v in tau]
    zero = (0,) * len(B.orders)
    exact = np.asarray(f).dtype == object or np.asarray(h).dtype == object
    out = []
    for x in range(B.d):
        xe = B.element(x)
        total = 0
        for a in itertools.product(range(g.d), repeat=n):
            sa, ta = zero, zero
            for i, label in enumerate(a):
                for e, c in enumerate(g.element(label)):
                    for _ in range(c):
                        sa = _b_add(B, sa, sigma[i * m + e])
                        ta = _b_add(B, ta, tau[i * m + e])
            total = total + f[B.label(_b_add(B, xe, sa))] * h[B.label(_b_add(B, xe, ta))]
        out.append(total * (Fraction(1, g.d**n) if exact else 1.0 / g.d**n))
    return np.array(out, dtype=object if exact else None)


def theorem_check(sys: FiniteSystem, f, h, p, ns, cp: float | None = None) -> VariationReport:
    """Variation of M_{n_j}(f, h) against c_p^-1 (1+p) ||f||_2p^p ||h||_2p^p."""
    if p < 2:
        raise ValueError("p must be at least 2")
    ns = [int(n) for n in ns]
    if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 0:
        raise ValueError("ns must be a strictly increasing list of nonnegative integers")
    if ns[-1] > sys.depth:
        raise ValueError(f"n={ns[-1]} exceeds the system depth {sys.depth}")
    Ms = [ergodic_average(sys, f, h, n) for n in ns]
    report = variation_sum(Ms, p, weight=sys.weights)
    nf = float(sys.norm_pow(f, 2 * p)) ** 0.5
    nh = float(sys.norm_pow(h, 2 * p)) ** 0.5
    report.fill_bound(assembled_constant(p, cp) * nf * nh)
    return report


def jump_check(sys: FiniteSystem, f, h, p, eps_list, cp: float | None = None):
    """(eps, count, C_p eps^-p) for the full sequence M_0..M_N with normalized f, h."""
    f = np.asarray(f, dtype=float if np.asarray(f).dtype != complex else complex)
    h = np.asarray(h, dtype=float if np.asarray(h).dtype != complex else complex)
    w = np.array([float(x) for x in sys.weights])
    nf = float(lp_pow(f, 2 * p, w)) ** (1 / (2 * p))
    nh = float(lp_pow(h, 2 * p, w)) ** (1 / (2 * p))
    f = f / nf if nf else f
    h = h / nh if nh else h
    Ms = [ergodic_average(sys, f, h, n) for n in range(sys.depth + 1)]
    Cp = assembled_constant(p, cp)
    return [(eps, count_jumps(Ms, eps, p, weight=w), Cp * eps ** (-p)) for eps in eps_list]


def transference_check(Fp, Gp, n: int, group: Group, max_axis: int | None = None) -> bool:
    """A_{-n}(F, G) on unit cells equals A'_n(F', G') under the digit embedding.

    F(x, y) = F'(kappa'(alpha), kappa'(beta)) on [alpha, alpha+1) x [beta, beta+1).
    """
    Fp = np.asarray(Fp, dtype=object)
    Gp = np.asarray(Gp, dtype=object)
    if Fp.shape != Gp.shape or Fp.ndim % 2:
        raise ValueError("F' and G' must be arrays of equal shape (d,)*2N")
    N = Fp.ndim // 2
    d = group.d
    check_axis(d**N, max_axis)
    if not 0 <= n <= N:
        raise ValueError(f"n={n} must lie in 0..{N}")
    size = d**N
    digits = [kappa_prime(group, t, N) for t in range(size)]
    grid_F = np.empty((size, size), dtype=object)
    grid_G = np.empty((size, size), dtype=object)
    for al in range(size):
        for be in range(size):
            grid_F[al, be] = Fp[digits[al] + digits[be]]
            grid_G[al, be] = Gp[digits[al] + digits[be]]
    F = make_step(group, 0, N, grid_F, "exact")
    G = make_step(group, 0, N, grid_G, "exact")
    A = bilinear_average(F, G, -n, max_axis=max_axis).values
    Ap = discrete_average(Fp, Gp, n, group)
    for a in itertools.product(range(d), repeat=N):
        for b in itertools.product(range(d), repeat=N):
            if A[iota_prime(group, a), iota_prime(group, b)] != Ap[a + b]:
                return False
    return True
