"""The multilinear forms controlling the variation of bilinear averages.

Fast evaluators go through the averages A_k (for Lambda) and through the
local inner products b_L(y1, y2) = int_L Ft(z, y1) Ft(z, y2) dz (for Theta,
Theta' and Xi_k).  Brute-force oracles sum the Haar-expanded expressions cell
by cell; they are exact in exact mode and refuse instances with more than
``max_terms`` summands.

Conventions: ``Ft`` is a tilde-side StepFn2 whose first coordinate is the
integrated variable z.  ``tilde_transform_G`` produces the same layout for G,
so every Theta-type evaluator applies to both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .abelian import CharacterTable, characters
from .averages import ScaleLadder, VariationReport, bilinear_average, lp_pow, variation_sum
from .dadic import cell_oplus
from .errors import MAX_ORACLE_TERMS, CapExceeded
from .exact import Cyclo, GaussArray, max_abs, narrow, simplify
from .stepfn import StepFn2, lp_norm_p, raw, tilde_transform_F, tilde_transform_G

__all__ = [
    "theta_function",
    "CpCertificate",
    "certify_c_p",
    "c_p",
    "assembled_constant",
    "scalar_lemma_margin",
    "scalar_lemma_check",
    "FormContext",
    "lambda_fast",
    "lambda_tilde_oracle",
    "lambda_abs_intermediate",
    "xi",
    "theta_fast",
    "theta_prime",
    "theta_haar_oracle",
    "jensen_worst_ratio",
    "Link",
    "proposition_bound_check",
]

RTOL = 1e-9


# -- the scalar lemma ------------------------------------------------------------

def _excess(t, p):
    """|1+t|^p - 1 - p t, accurate for small |t|."""
    t = np.asarray(t, dtype=float)
    near = t > -1
    out = np.empty_like(t)
    out[near] = np.expm1(p * np.log1p(t[near])) - p * t[near]
    out[~near] = np.abs(1 + t[~near]) ** p - 1 - p * t[~near]
    return out


def theta_function(t, p):
    """(|1+t|^p - 1 - p t) / |t|^p for t != 0."""
    t = np.asarray(t, dtype=float)
    return _excess(t, p) / np.abs(t) ** p


@dataclass(frozen=True)
class CpCertificate:
    p: float
    value: float
    grid_bound: float
    grid_argmin: float
    tail_bound: float
    zero_bound: float
    T: float
    delta: float


def certify_c_p(p, T: float = 1e3, delta: float = 1e-3, points: int = 200_001) -> CpCertificate:
    """Rigorous lower bound for inf theta (up to float rounding, covered by a margin).

    On [delta, T] and [-T, -delta] the log-spaced nodes cut the line into
    cells [u, v].  The excess is convex with its minimum 0 at t = 0, so on a
    cell it is at least its value at the end nearer 0, while |t|^p is at most
    v^p.  Outside, theta >= 1 - T^-p - p T^(1-p) for t >= T,
    theta >= (1 - 1/T)^p - T^-p for t <= -T, and for |t| < delta the Taylor
    remainder gives theta >= p(p-1)/2 (1-delta)^(p-2) delta^(2-p).
    """
    if p < 2:
        raise ValueError("the lemma needs p >= 2")
    if not (0 < delta <= 0.5 and T > 2):
        raise ValueError("need 0 < delta <= 1/2 and T > 2")
    nodes = np.geomspace(delta, T, points)
    u, v = nodes[:-1], nodes[1:]
    pos = _excess(u, p) / v**p
    neg = _excess(-u, p) / v**p
    i_pos, i_neg = int(pos.argmin()), int(neg.argmin())
    if pos[i_pos] <= neg[i_neg]:
        grid, arg = float(pos[i_pos]), float(u[i_pos])
    else:
        grid, arg = float(neg[i_neg]), float(-u[i_neg])
    tail = min(1 - T**-p - p * T ** (1 - p), (1 - 1 / T) ** p - T**-p)
    zero = p * (p - 1) / 2 * (1 - delta) ** (p - 2) * delta ** (2 - p)
    value = min(grid, tail, zero) * (1 - 1e-12)
    return CpCertificate(p, value, grid, arg, tail, zero, T, delta)


def c_p(p, **search) -> float:
    """Certified positive lower bound for the scalar lemma constant; exactly 1 at p = 2."""
    if p == 2:
        return 1.0
    return certify_c_p(p, **search).value


def assembled_constant(p, cp: float | None = None) -> float:
    """C_p = (1 + p) / c_p, the constant the proof chain delivers for integer p."""
    cp = c_p(p) if cp is None else cp
    return (1 + p) / cp


def scalar_lemma_margin(a, b, p, cp):
    """LHS - RHS of |a|^p - |b|^p - p(a-b) b|b|^(p-2) >= c_p |a-b|^p, and a scale.

    The middle term is 0 when b = 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    absb = np.abs(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = np.where(b == 0, 0.0, p * (a - b) * b * absb ** (p - 2))
    lhs = np.abs(a) ** p - absb**p - mid
    rhs = cp * np.abs(a - b) ** p
    scale = np.abs(a) ** p + absb**p + np.abs(mid)
    return lhs - rhs, scale


def scalar_lemma_check(a, b, p, cp, rtol: float = RTOL) -> bool:
    margin, scale = scalar_lemma_margin(a, b, p, cp)
    return bool(np.all(margin >= -rtol * scale))


# -- context -------------------------------------------------------------------------

@dataclass
class FormContext:
    """F, G, an integer p >= 2 and a ladder of scales, with cached averages."""

    F: StepFn2
    G: StepFn2
    p: int
    ladder: ScaleLadder
    table: CharacterTable | None = None
    max_terms: int = MAX_ORACLE_TERMS
    _averages: list | None = field(default=None, repr=False)

    def __post_init__(self):
        if not isinstance(self.ladder, ScaleLadder):
            self.ladder = ScaleLadder(tuple(self.ladder))
        if not isinstance(self.p, (int, np.integer)) or self.p < 2:
            raise ValueError("forms are defined for integer p >= 2")
        self.p = int(self.p)
        if not self.F.same_shape(self.G):
            raise ValueError("F and G must share group, resolution, support and mode")
        if self.ladder.ks[-1] > self.F.K:
            raise ValueError(f"ladder reaches scale {self.ladder.ks[-1]} beyond resolution K={self.F.K}")
        if self.table is None:
            self.table = characters(self.F.group)

    @property
    def mode(self) -> str:
        return self.F.mode

    @property
    def ks(self) -> tuple[int, ...]:
        return self.ladder.ks

    def averages(self) -> list[StepFn2]:
        if self._averages is None:
            self._averages = [bilinear_average(self.F, self.G, k) for k in self.ks]
        return self._averages

    def to_float(self) -> "FormContext":
        if self.mode == "float":
            return self
        ctx = FormContext(self.F.to_float(), self.G.to_float(), self.p, self.ladder, self.table,
                          self.max_terms)
        if self._averages is not None:
            ctx._averages = [A.to_float() for A in self._averages]
        return ctx


def _total(arr):
    out = arr.sum()
    return simplify(out) if isinstance(out, (Cyclo, int, Fraction)) else out


# -- Lambda --------------------------------------------------------------------------

def lambda_fast(ctx: FormContext):
    """sum_j int (A_{k_{j+1}} - A_{k_j}) A_{k_j}^(p-1) dx dy."""
    A = [a.values for a in ctx.averages()]
    p = ctx.p
    total = 0
    for lo, hi in zip(A, A[1:]):
        total = total + _total((hi - lo) * lo ** (p - 1))
    out = total * ctx.F.cell_area
    return simplify(out) if ctx.mode == "exact" else out


def _power_product(R, p: int):
    """P[y, z_1, ..., z_p] = prod_i R[z_i, y] for a raw tilde grid R[z, y]."""
    n = R.shape[0]
    RT = R.T
    out = None
    for i in range(p):
        shape = [n] + [1] * p
        shape[1 + i] = n
        term = RT.reshape(*shape)
        out = term if out is None else out * term
    return out


def _chi_sum(table: CharacterTable, exact: bool, signs: tuple[int, ...]):
    """Sum over s >= 1 of prod_k xi_s(a_k)^{sign_k}, for every digit tuple (a_k)."""
    d = table.d
    out = {}
    for digs in np.ndindex(*(d,) * len(signs)):
        rots = [sum((sg * table.rotation(s, a) for sg, a in zip(signs, digs)), Fraction(0))
                for s in range(1, d)]
        if exact:
            out[digs] = sum((Cyclo.root(q) for q in rots), Cyclo.rational(0))
        else:
            out[digs] = complex(sum(np.exp(2j * np.pi * float(q)) for q in rots))
    return out


def _raw_scalar(x, exact: bool):
    if isinstance(x, GaussArray):
        return Cyclo.gaussian(int(x.re), int(x.im)) if exact else complex(x.re) + 1j * complex(x.im)
    if exact:
        return Cyclo.rational(int(x))
    return complex(x)


def _oracle_terms(ctx_n: int, p: int, max_terms: int):
    terms = ctx_n ** (p + 2)
    if terms > max_terms:
        raise CapExceeded(f"oracle needs {terms} summands, above the cap of {max_terms}")


def lambda_tilde_oracle(ctx: FormContext):
    """Lambda-tilde(Ft, Gt) summed over cells of (x, y, z_1..z_p), Haar expansion kept.

    For each j and r in [k_j, k_{j+1}) and each (x, y): I, J are the scale-r
    intervals of x, y, K = I ⊕ J, L = d^(r-k_j) K; the summand is
    Ft(z_i, y) Gt(z_i, x) products times conj(h_I^s(x) h_J^s(y)) h_K^s(z_1)
    1_L(z_2)...1_L(z_p).  Character factors are grouped by the digit triple
    they depend on and summed over s at the end.
    """
    F, p = ctx.F, ctx.p
    g, d, K, n = F.group, F.d, F.K, F.n
    _oracle_terms(n, p, ctx.max_terms)
    exact = ctx.mode == "exact"
    RF, sF = raw(tilde_transform_F(F))
    RG, sG = raw(tilde_transform_G(ctx.G))
    if exact:
        bound = (max_abs(RF) * max_abs(RG)) ** p * n ** (p + 2) * 4
        RF, RG = narrow(RF, bound), narrow(RG, bound)
    Fprod = _power_product(RF, p)  # [y, z...]
    Gprod = _power_product(RG, p)  # [x, z...]
    chi = _chi_sum(ctx.table, exact, (-1, -1, 1))
    cells = np.arange(n)
    ks = ctx.ks
    total = Cyclo.rational(0) if exact else 0j
    for j in range(len(ks) - 1):
        kj = ks[j]
        wL = d ** (K - kj)
        zL = cells // wL
        for r in range(kj, ks[j + 1]):
            wK = d ** (K - r)
            zK = cells // wK
            dig = (cells // d ** (K - r - 1)) % d
            sel = [np.nonzero(dig == a)[0] for a in range(d)]
            W = {}
            for x in cells:
                Kidx = cell_oplus(g, x // wK, cells // wK)  # I(x) ⊕ J(y), indexed by y
                Lidx = Kidx // d ** (r - kj)  # ancestor of K at scale k_j
                mask = (zK[None, :] == Kidx[:, None]).reshape((n, n) + (1,) * (p - 1))
                for i in range(1, p):
                    shape = [n] + [1] * p
                    shape[1 + i] = n
                    pick = (zL[None, :] == Lidx[:, None]).reshape(shape[:1] + [1] * i + [n]
                                                                  + [1] * (p - 1 - i))
                    mask = mask * pick
                summand = Fprod * Gprod[x][None] * mask.astype(np.int64)
                R = summand.sum(axis=tuple(range(2, p + 1))) if p > 1 else summand
                a = int(dig[x])
                for b in range(d):
                    Rb = R[sel[b]]
                    for c in range(d):
                        key = (a, b, c)
                        W[key] = W.get(key, 0) + Rb[:, sel[c]].sum()
            block = sum((_raw_scalar(w, exact) * chi[key] for key, w in W.items()),
                        Cyclo.rational(0) if exact else 0j)
            weight = Fraction(d) ** (r + (p - 1) * kj - K * (p + 2))
            total = total + block * (weight if exact else float(weight))
    return finish_scalar(total, (sF * sG) ** p, exact)


def finish_scalar(total, scale, exact):
    if exact:
        return simplify(total * scale)
    total = complex(total) * scale
    return total


# -- b_L route -------------------------------------------------------------------------

def _check_tilde(Ft: StepFn2, ks):
    if not Ft.is_real:
        raise ValueError("Theta-type forms are defined here for real-valued functions")
    if max(ks) > Ft.K:
        raise ValueError(f"scale {max(ks)} is finer than the resolution K={Ft.K}")


def _b_powers(Ft: StepFn2, p: int, k: int):
    """V_k(y1, y2) = d^((p-1)k) sum_{|L| = d^-k} b_L(y1, y2)^p as an n x n grid."""
    d, K, n = Ft.d, Ft.K, Ft.n
    R, s = raw(Ft)
    exact = Ft.mode == "exact"
    wL = min(d ** (K - k), n)
    R3 = R.reshape(n // wL, wL, n)
    B = np.matmul(R3.transpose(0, 2, 1), R3)  # raw b_L (y1, y2), up to d^-K s^2
    S = (B**p).sum(axis=0)
    if exact:
        scale = (s * s * Fraction(1, d**K)) ** p * Fraction(d) ** ((p - 1) * k)
        out = np.empty((n, n), dtype=object)
        for idx in np.ndindex(n, n):
            out[idx] = Fraction(int(S[idx])) * scale
        return out
    return S * ((s * s / d**K) ** p * float(d) ** ((p - 1) * k))


def _phi_grid(Ft: StepFn2, k: int):
    """phi_k(y1 ⊖ y2) on cell pairs: d^k where y1, y2 share a scale-k interval."""
    d, K, n = Ft.d, Ft.K, Ft.n
    w = d ** (K - k)
    cells = np.arange(n)
    same = (cells[:, None] // w) == (cells[None, :] // w)
    if Ft.mode == "exact":
        out = np.where(same, Fraction(d) ** k, Fraction(0)).astype(object)
        return out
    return same * float(d) ** k


def _integrate(Ft: StepFn2, grid):
    area = Ft.cell_area
    out = grid.sum() * area
    return simplify(out) if Ft.mode == "exact" else float(out)


def xi(Ft: StepFn2, p: int, k: int):
    """Xi_k = int int V_k(y1, y2) phi_k(y1 ⊖ y2) dy1 dy2."""
    _check_tilde(Ft, [k])
    return _integrate(Ft, _b_powers(Ft, p, k) * _phi_grid(Ft, k))


def theta_fast(Ft: StepFn2, p: int, ladder) -> object:
    """Theta = sum_j int int V_{k_j} (phi_{k_{j+1}} - phi_{k_j})(y1 ⊖ y2)."""
    ks = ScaleLadder(tuple(ladder)).ks
    _check_tilde(Ft, ks)
    V = {k: _b_powers(Ft, p, k) for k in ks[:-1]}
    Phi = {k: _phi_grid(Ft, k) for k in ks}
    total = sum((V[lo] * (Phi[hi] - Phi[lo]) for lo, hi in zip(ks, ks[1:])),
                np.zeros((Ft.n, Ft.n), dtype=object if Ft.mode == "exact" else float))
    return _integrate(Ft, total)


def theta_prime(Ft: StepFn2, p: int, ladder) -> object:
    """Theta' = sum_j int int phi_{k_{j+1}}(y1 ⊖ y2) (V_{k_{j+1}} - V_{k_j})."""
    ks = ScaleLadder(tuple(ladder)).ks
    _check_tilde(Ft, ks)
    V = {k: _b_powers(Ft, p, k) for k in ks}
    Phi = {k: _phi_grid(Ft, k) for k in ks[1:]}
    total = sum((Phi[hi] * (V[hi] - V[lo]) for lo, hi in zip(ks, ks[1:])),
                np.zeros((Ft.n, Ft.n), dtype=object if Ft.mode == "exact" else float))
    return _integrate(Ft, total)


def jensen_worst_ratio(Ft: StepFn2, p: int, ladder) -> float:
    """max over j, L, (y1, y2) of (sum_i b_{L_i})^p / (N^(p-1) sum_i b_{L_i}^p).

    L_i are the N = d^(k_{j+1}-k_j) scale-k_{j+1} descendants of a scale-k_j
    interval L; Jensen's inequality says the ratio never exceeds 1.
    """
    ks = ScaleLadder(tuple(ladder)).ks
    _check_tilde(Ft, ks)
    F = Ft.to_float()
    d, K, n = F.d, F.K, F.n
    R = F.values
    worst = 0.0
    for lo, hi in zip(ks, ks[1:]):
        w = min(d ** (K - hi), n)
        R3 = R.reshape(n // w, w, n)
        b = np.matmul(R3.transpose(0, 2, 1), R3) / d**K  # b_{L'} for scale-hi intervals
        per = min(d ** (hi - lo), b.shape[0])
        b = b.reshape(-1, per, n, n)  # group children under their scale-lo parent
        count = d ** (hi - lo)
        num = b.sum(axis=1) ** p
        den = count ** (p - 1) * (b**p).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(den > 0, num / den, 0.0)
        worst = max(worst, float(ratio.max()))
    return worst


def theta_haar_oracle(Ft: StepFn2, p: int, ladder, table: CharacterTable | None = None,
                      max_terms: int = MAX_ORACLE_TERMS):
    """Theta through Haar coefficients, before the dual telescoping collapse.

    sum_j sum_{r in [k_j, k_{j+1})} sum_{s >= 1} sum_{J, L} d^(r + (p-1)k_j)
    int |int prod_i Ft(z_i, y) conj h_J^s(y) dy|^2 1_L(z_1)...1_L(z_p) dz,
    with |J| = d^-r and |L| = d^-k_j.  The inner integral is grouped by the
    digit of y that the Haar atom reads.
    """
    ks = ScaleLadder(tuple(ladder)).ks
    _check_tilde(Ft, ks)
    table = characters(Ft.group) if table is None else table
    d, K, n = Ft.d, Ft.K, Ft.n
    _oracle_terms(n, p, max_terms)
    exact = Ft.mode == "exact"
    RF, sF = raw(Ft)
    if exact:
        RF = narrow(RF, max_abs(RF) ** (2 * p) * n ** (p + 2) * 4)
    Fprod = _power_product(RF, p)  # [y, z...]
    chi = _chi_sum(table, exact, (-1, 1))  # conj xi_s(a) xi_s(b)
    cells = np.arange(n)
    total = Cyclo.rational(0) if exact else 0j
    for lo, hi in zip(ks, ks[1:]):
        zL = cells // d ** (K - lo)
        same_L = np.ones((n,) * p, dtype=np.int64)
        for i in range(1, p):
            a_shape = [n] + [1] * (p - 1)
            b_shape = [1] * p
            b_shape[i] = n
            same_L = same_L * (zL.reshape(a_shape) == zL.reshape(b_shape))
        for r in range(lo, hi):
            Jidx = cells // d ** (K - r)
            dig = (cells // d ** (K - r - 1)) % d
            U = {}
            for J in np.unique(Jidx):
                inJ = Jidx == J
                Wa = [Fprod[np.nonzero(inJ & (dig == a))[0]].sum(axis=0) for a in range(d)]
                for a in range(d):
                    for b in range(d):
                        U[(a, b)] = U.get((a, b), 0) + (Wa[a] * Wa[b] * same_L).sum()
            block = sum((_raw_scalar(u, exact) * chi[key] for key, u in U.items()),
                        Cyclo.rational(0) if exact else 0j)
            weight = Fraction(d) ** (r + (p - 1) * lo - K * (p + 2))
            total = total + block * (weight if exact else float(weight))
    out = finish_scalar(total, sF ** (2 * p), exact)
    return out if exact else out.real


def lambda_abs_intermediate(ctx: FormContext, max_work: int = 2 * 10**7):
    """The Cauchy-Schwarz input: sum of |Haar coefficient of Ft| x |of Gt| (float).

    sum_{j, r, s, I, J} d^(r + (p-1)k_j) int |P_F(J, s, z)| |P_G(I, s, z)|
    1_K(z_1) 1_L(z_2)...1_L(z_p) dz, K = I ⊕ J, L = d^(r-k_j) K, where
    P_F(J, s, z) = int prod_i Ft(z_i, y) conj h_J^s(y) dy.  Returns None when
    the instance needs more than ``max_work`` elementary products.
    """
    ctx = ctx.to_float()
    F, p = ctx.F, ctx.p
    g, d, K, n = F.group, F.d, F.K, F.n
    ks = ctx.ks
    blocks = [(lo, r) for lo, hi in zip(ks, ks[1:]) for r in range(lo, hi)]
    work = sum(max(1, n // d ** (K - r)) ** 2 for _, r in blocks) * (d - 1) * n**p
    if work > max_work:
        return None
    Ft = tilde_transform_F(F).values
    Gt = tilde_transform_G(ctx.G).values
    Fprod = _power_product(Ft, p)
    Gprod = _power_product(Gt, p)
    xi_tab = ctx.table.as_complex()
    cells = np.arange(n)
    total = 0.0
    for lo, r in blocks:
        wJ = d ** (K - r)
        Jidx = cells // wJ
        dig = (cells // d ** (K - r - 1)) % d
        nJ = max(1, n // wJ)
        zK = cells // wJ
        zL = cells // d ** (K - lo)
        PF = np.zeros((d, nJ) + (n,) * p, dtype=complex)
        PG = np.zeros_like(PF)
        for s in range(1, d):
            wts = np.conj(xi_tab[s, dig]) / d**K
            for J in range(nJ):
                sel = Jidx == J
                PF[s, J] = np.tensordot(wts[sel], Fprod[sel], axes=1)
                PG[s, J] = np.tensordot(wts[sel], Gprod[sel], axes=1)
        aF, aG = np.abs(PF), np.abs(PG)
        for I in range(nJ):
            for J in range(nJ):
                Kx = int(cell_oplus(g, I, J))
                Lx = Kx // d ** (r - lo)
                mask = (zK == Kx).reshape((n,) + (1,) * (p - 1)).astype(float)
                for i in range(1, p):
                    shape = [1] * p
                    shape[i] = n
                    mask = mask * (zL == Lx).reshape(shape)
                inner = (aF[1:, J] * aG[1:, I] * mask).sum()
                total += float(inner) * float(d) ** (r + (p - 1) * lo) * float(d) ** (-K * p)
    return total


# -- proposition assembly ----------------------------------------------------------

@dataclass
class Link:
    """One inequality or identity of the proof chain, checked numerically."""

    name: str
    lhs: float
    rhs: float
    scale: float
    passed: bool
    skipped: bool = False

    @property
    def ratio(self) -> float | None:
        if self.skipped:
            return None
        if self.rhs > 0:
            return self.lhs / self.rhs
        # one-sided links (x <= 0) report the residual relative to their scale
        if self.scale > 0:
            return max(self.lhs, 0.0) / self.scale
        return 0.0 if self.lhs <= 0 else math.inf

    @classmethod
    def le(cls, name, lhs, rhs, scale=None, rtol=RTOL):
        lhs, rhs = float(lhs), float(rhs)
        scale = max(abs(lhs), abs(rhs)) if scale is None else float(scale)
        return cls(name, lhs, rhs, scale, lhs <= rhs + rtol * scale)

    @classmethod
    def skip(cls, name):
        return cls(name, math.nan, math.nan, math.nan, True, True)

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "passed": self.passed,
                "skipped": self.skipped, "ratio": self.ratio}


def proposition_bound_check(ctx: FormContext, cp: float | None = None,
                            rtol: float = RTOL) -> VariationReport:
    """Variation of A_{k_j}(F, G) against C_p ||F||_2p^p ||G||_2p^p, with every link.

    Runs in float arithmetic; needs nonnegative F and G.
    """
    ctx = ctx.to_float()
    F, G, p, ks = ctx.F, ctx.G, ctx.p, ctx.ks
    if not (F.nonnegative and G.nonnegative):
        raise ValueError("the proposition chain is stated for nonnegative F and G")
    cp = c_p(p) if cp is None else cp
    A = [a.values for a in ctx.averages()]
    area = F.cell_area
    report = variation_sum(ctx.averages(), p)
    normF = lp_norm_p(F, 2 * p) ** 0.5  # ||F||_2p^p
    normG = lp_norm_p(G, 2 * p) ** 0.5
    bound = assembled_constant(p, cp) * normF * normG
    report.fill_bound(bound)
    links = {}

    # pointwise application of the scalar lemma, then integrated
    jumps = sum(np.abs(hi - lo) ** p for lo, hi in zip(A, A[1:]))
    cross = sum((hi - lo) * lo ** (p - 1) for lo, hi in zip(A, A[1:]))
    rhs_cells = (A[-1] ** p - A[0] ** p - p * cross) / cp
    cell_scale = (sum(a ** p for a in A) + p * np.abs(cross)) / cp
    ok = jumps <= rhs_cells + rtol * cell_scale
    worst = int(np.argmax(jumps - rhs_cells))
    links["pointwise_lemma"] = Link("pointwise_lemma", float(jumps.ravel()[worst]),
                                    float(rhs_cells.ravel()[worst]),
                                    float(cell_scale.ravel()[worst]), bool(ok.all()))
    lam = lambda_fast(ctx)
    normAm = lp_pow(A[-1], p, area)
    normA0 = lp_pow(A[0], p, area)
    links["integrated_lemma"] = Link.le(
        "integrated_lemma", report.variation_sum, (normAm - normA0 - p * lam) / cp,
        scale=(normAm + normA0 + p * abs(lam)) / cp, rtol=rtol)
    links["average_norm"] = Link.le("average_norm", normAm, normF * normG, rtol=rtol)

    Ft, Gt = tilde_transform_F(F), tilde_transform_G(G)
    thF, thG = theta_fast(Ft, p, ks), theta_fast(Gt, p, ks)
    thpF = theta_prime(Ft, p, ks)
    normFt = lp_norm_p(Ft, 2 * p)
    normGt = lp_norm_p(Gt, 2 * p)
    cs_rhs = math.sqrt(max(thF, 0.0) * max(thG, 0.0))
    links["cauchy_schwarz"] = Link.le("cauchy_schwarz", abs(lam), cs_rhs,
                                      scale=normF * normG, rtol=rtol)
    inter = lambda_abs_intermediate(ctx)
    if inter is None:
        links["lambda_abs_intermediate"] = Link.skip("lambda_abs_intermediate")
    else:
        ok = abs(lam) <= inter + rtol * normF * normG and inter <= cs_rhs + rtol * normF * normG
        links["lambda_abs_intermediate"] = Link("lambda_abs_intermediate", float(inter), cs_rhs,
                                                normF * normG, bool(ok))
    links["theta_bound"] = Link.le("theta_bound", max(thF / normFt if normFt else 0.0,
                                                      thG / normGt if normGt else 0.0), 1.0,
                                   rtol=rtol)
    xis = [xi(Ft, p, k) for k in ks]
    sbp_scale = abs(thF) + abs(thpF) + abs(xis[0]) + abs(xis[-1])
    links["summation_by_parts"] = Link.le("summation_by_parts",
                                          abs(thF + thpF - (xis[-1] - xis[0])), 0.0,
                                          scale=sbp_scale, rtol=rtol)
    links["theta_prime_nonneg"] = Link.le("theta_prime_nonneg", -thpF, 0.0, scale=sbp_scale,
                                          rtol=rtol)
    lo_ok = all(x >= -rtol * normFt for x in xis)
    hi_link = Link.le("xi_bounds", max(xis), normFt, rtol=rtol)
    hi_link.passed = hi_link.passed and lo_ok
    links["xi_bounds"] = hi_link
    links["jensen"] = Link.le("jensen", jensen_worst_ratio(Ft, p, ks), 1.0, rtol=rtol)
    links["proposition"] = Link.le("proposition", report.variation_sum, bound, rtol=rtol)
    report.links = links
    return report
