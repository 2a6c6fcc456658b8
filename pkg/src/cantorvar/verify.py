"""Named verification checks, randomized sweeps and fault injection.

Every check is a function ``(cfg, rng) -> [(check_id, ok, ratio), ...]``
run once per trial.  Trial i draws its generator from the seed
``trial_seed(master, i)``, so serial and parallel runs see the same data.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .abelian import characters, make_group
from .averages import (ScaleLadder, bilinear_average, bilinear_average_direct, greedy_jumps,
                       jump_matrix, max_jumps_exhaustive)
from .dynamics import (jump_check, make_translation_system, theorem_check,
                       transference_check)
from .errors import MAX_AXIS, MAX_ORACLE_TERMS, CapExceeded
from .forms import (FormContext, c_p, lambda_fast, lambda_tilde_oracle,
                    proposition_bound_check, scalar_lemma_margin, theta_fast,
                    theta_haar_oracle, theta_prime, xi)
from .haar import (HaarTerm, character_property_failures, dual_telescoping_check,
                   phi_difference_decomposition, reconstruction_check, telescoping_check)
from .stepfn import random_step, tilde_transform_F

__all__ = [
    "DEFAULTS",
    "EXACT_CHECKS",
    "FLOAT_CHECKS",
    "FAULTS",
    "CheckRecord",
    "ConfigError",
    "normalize_config",
    "trial_seed",
    "run_checks",
]

SCHEMA = 1
FAULTS = ("telescoping", "character", "ominus")

DEFAULTS = {
    "schema": SCHEMA,
    "group": [2],
    "mode": "both",
    "p": [2],
    "trials": 50,
    "seed": 1,
    "ladder": None,
    "ladder_min": -2,
    "ladder_width": 3,
    "instances": {"K": 1, "N": 1, "complex": False, "max_num": 4, "max_den": 3},
    "system": {"depth": 2},
    "eps": [0.1, 0.2, 0.5],
    "lemma_samples": 10_000,
    "caps": {"max_axis": MAX_AXIS, "max_terms": MAX_ORACLE_TERMS},
    "faults": [],
    "checks": None,
}


class ConfigError(ValueError):
    """Malformed or out-of-range experiment configuration."""


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            out[k] = _merge(base[k], v)
        else:
            out[k] = v
    return out


def normalize_config(raw: dict | None) -> dict:
    """Defaults filled in and every field validated; raises ConfigError."""
    raw = dict(raw or {})
    if raw.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"unsupported config schema {raw.get('schema')!r}")
    unknown = set(raw) - set(DEFAULTS) - {"F", "G", "f", "g", "ns"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = _merge(DEFAULTS, raw)
    try:
        g = make_group(cfg["group"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad group: {exc}") from exc
    if cfg["mode"] not in ("exact", "float", "both"):
        raise ConfigError("mode must be exact, float or both")
    ps = cfg["p"] if isinstance(cfg["p"], list) else [cfg["p"]]
    if not ps or any(not isinstance(p, int) or p < 2 for p in ps):
        raise ConfigError("p must be a list of integers >= 2")
    cfg["p"] = ps
    if not isinstance(cfg["trials"], int) or cfg["trials"] < 1:
        raise ConfigError("trials must be a positive integer")
    if not isinstance(cfg["seed"], int) or not 0 <= cfg["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    caps = cfg["caps"]
    if caps["max_axis"] > MAX_AXIS or caps["max_terms"] > MAX_ORACLE_TERMS:
        raise ConfigError(f"caps may not exceed max_axis={MAX_AXIS}, "
                          f"max_terms={MAX_ORACLE_TERMS}")
    for fault in cfg["faults"]:
        if fault not in FAULTS:
            raise ConfigError(f"unknown fault {fault!r}; choose from {FAULTS}")
    inst = cfg["instances"]
    for key in ("K", "N"):
        v = inst[key]
        lo, hi = (v, v) if isinstance(v, int) else tuple(v)
        if lo < 0 or hi < lo:
            raise ConfigError(f"instances.{key} must be a nonnegative integer or range")
        inst[key] = [lo, hi]
    if cfg["ladder"] is not None:
        try:
            ScaleLadder(tuple(cfg["ladder"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if cfg["ladder"][-1] > inst["K"][0]:
            raise ConfigError("ladder scales must not exceed the resolution K")
    if cfg["checks"] is not None:
        bad = set(cfg["checks"]) - set(EXACT_CHECKS) - set(FLOAT_CHECKS)
        if bad:
            raise ConfigError(f"unknown checks: {sorted(bad)}")
    cfg["group"] = list(g.orders)
    return cfg


def trial_seed(master: int, index: int) -> int:
    """Per-trial seed: first 64-bit word of SeedSequence(master, spawn_key=(index,))."""
    ss = np.random.SeedSequence(master, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


# -- instance generation ---------------------------------------------------------

def _group(cfg):
    g = make_group(cfg["group"])
    return g.with_faulty_neg() if "ominus" in cfg["faults"] else g


def _table(cfg, g):
    table = characters(g)
    if "character" in cfg["faults"]:
        table = table.corrupted(1, 1, Fraction(1, 4 * g.d))
    return table


def _draw_KN(cfg, rng, g):
    inst = cfg["instances"]
    cap = cfg["caps"]["max_axis"]
    for _ in range(100):
        K = int(rng.integers(inst["K"][0], inst["K"][1] + 1))
        N = int(rng.integers(inst["N"][0], inst["N"][1] + 1))
        if g.d ** (N + K) <= cap:
            return K, N
    raise CapExceeded(f"no instance size within the axis cap {cap}")


def _draw_ladder(cfg, rng, K):
    if cfg["ladder"] is not None:
        return ScaleLadder(tuple(cfg["ladder"]))
    pool = list(range(min(cfg["ladder_min"], K - 1), K + 1))
    width = int(rng.integers(1, min(cfg["ladder_width"], len(pool) - 1) + 1))
    return ScaleLadder(tuple(sorted(int(k) for k in rng.choice(pool, width + 1, replace=False))))


def _draw_pair(cfg, rng, g, K, N, mode, nonnegative=True, complex_values=False):
    inst = cfg["instances"]
    kw = dict(mode=mode, nonnegative=nonnegative, complex_values=complex_values,
              max_num=inst["max_num"], max_den=inst["max_den"])
    return random_step(rng, g, K, N, **kw), random_step(rng, g, K, N, **kw)


def _draw_context(cfg, rng, mode, nonnegative=True, complex_values=False):
    g = _group(cfg)
    K, N = _draw_KN(cfg, rng, g)
    ladder = _draw_ladder(cfg, rng, K)
    p = int(rng.choice(cfg["p"]))
    F, G = _draw_pair(cfg, rng, g, K, N, mode, nonnegative, complex_values)
    return FormContext(F, G, p, ladder, _table(cfg, g), cfg["caps"]["max_terms"])


# -- exact checks ------------------------------------------------------------------

def check_character_table(cfg, rng):
    table = _table(cfg, _group(cfg))
    ok = table.is_multiplicative() and not table.orthogonality_defects()
    return [("character_table", ok, None)]


def check_telescoping(cfg, rng):
    g = _group(cfg)
    k_lo = int(rng.integers(-2, 2))
    k_hi = k_lo + int(rng.integers(1, 3))
    terms = phi_difference_decomposition(g.d, k_lo, k_hi)
    if "telescoping" in cfg["faults"]:
        t = terms[0]
        terms = [HaarTerm(t.r, t.s, t.coeff + 1)] + terms[1:]
    ok = telescoping_check(g, k_lo, k_hi, terms, _table(cfg, g))
    ok = ok and reconstruction_check(g, k_lo, _table(cfg, g))
    return [("telescoping", ok, None)]


def check_dual_telescoping(cfg, rng):
    g = _group(cfg)
    k_lo = int(rng.integers(-2, 1))
    k_hi = k_lo + int(rng.integers(1, 3))
    N = max(0, -k_lo)
    ok = dual_telescoping_check(g, k_lo, k_hi, N, _table(cfg, g))
    return [("dual_telescoping", ok, None)]


def check_character_property(cfg, rng):
    g = _group(cfg)
    # exhaustive at resolution N+K <= 3 under a random enumeration of the dual
    K = int(rng.integers(0, 4))
    N = int(rng.integers(0, 4 - K))
    table = _table(cfg, g)
    if g.d > 2:
        table = table.permuted([int(s) for s in rng.permutation(np.arange(1, g.d))])
    fails = character_property_failures(g, K, N, table)
    return [("character_property", fails == 0, None)]


def check_bilinear_oracle(cfg, rng):
    g = _group(cfg)
    for _ in range(100):
        K, N = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        if g.d ** (N + K) <= 8:
            break
    k = int(rng.integers(-N - 1, K + 1))
    F, G = _draw_pair(cfg, rng, g, K, N, "exact", nonnegative=False,
                      complex_values=bool(cfg["instances"]["complex"]))
    ok = bilinear_average(F, G, k).equals(bilinear_average_direct(F, G, k))
    return [("bilinear_oracle", ok, None)]


def check_lambda_substitution(cfg, rng):
    ctx = _draw_context(cfg, rng, "exact", nonnegative=False,
                        complex_values=bool(cfg["instances"]["complex"]))
    return [("lambda_substitution", lambda_fast(ctx) == lambda_tilde_oracle(ctx), None)]


def check_theta_family(cfg, rng):
    ctx = _draw_context(cfg, rng, "exact")
    Ft = tilde_transform_F(ctx.F)
    ks = ctx.ks
    th = theta_fast(Ft, ctx.p, ks)
    ok_oracle = th == theta_haar_oracle(Ft, ctx.p, ks, ctx.table, ctx.max_terms)
    sbp = th + theta_prime(Ft, ctx.p, ks) == xi(Ft, ctx.p, ks[-1]) - xi(Ft, ctx.p, ks[0])
    return [("theta_dual_telescoping", ok_oracle, None), ("summation_by_parts", sbp, None)]


def check_transference(cfg, rng):
    g = _group(cfg)
    N = int(rng.integers(1, 3)) if g.d <= 3 else 1
    n = int(rng.integers(0, N + 1))
    shape = (g.d,) * (2 * N)

    def grid():
        vals = [Fraction(int(a), int(b)) for a, b in
                zip(rng.integers(-4, 5, g.d ** (2 * N)), rng.integers(1, 4, g.d ** (2 * N)))]
        return np.array(vals, dtype=object).reshape(shape)

    ok = transference_check(grid(), grid(), n, g, cfg["caps"]["max_axis"])
    return [("transference", ok, None)]


def check_jump_oracle(cfg, rng):
    L = int(rng.integers(1, 9))
    seq = [np.array([float(v)]) for v in rng.integers(0, 3, L)]
    eps = float(rng.choice([0.5, 1.0, 1.5, 2.0]))
    ok_mat = jump_matrix(seq, eps, 2, weight=1.0)
    ok = greedy_jumps(ok_mat) == max_jumps_exhaustive(ok_mat)
    return [("jump_oracle", ok, None)]


# -- float checks --------------------------------------------------------------

def check_scalar_lemma(cfg, rng):
    out = []
    n = int(cfg["lemma_samples"])
    for p in cfg["p"]:
        cp = c_p(p)
        a = rng.standard_normal(n) * np.exp(rng.uniform(-3, 3, n))
        b = rng.standard_normal(n) * np.exp(rng.uniform(-3, 3, n))
        b[: n // 20] = 0.0
        margin, scale = scalar_lemma_margin(a, b, p, cp)
        ok = bool(np.all(margin >= -1e-9 * scale))
        worst = float(np.max(-margin / np.where(scale > 0, scale, 1.0)))
        out.append(("scalar_lemma", ok, max(worst, 0.0)))
    return out


def check_proposition(cfg, rng):
    ctx = _draw_context(cfg, rng, "float")
    report = proposition_bound_check(ctx)
    out = []
    for name, link in report.links.items():
        if not link.skipped:
            out.append((f"proposition.{name}", link.passed, link.ratio))
    return out


def random_translation_system(rng, g, N):
    B = list(g.orders) * N
    m = len(g.orders)

    def images():
        return [tuple(int(rng.integers(0, o)) for o in B) for _ in range(N * m)]

    return make_translation_system(g, N, B, images(), images())


def check_theorem(cfg, rng):
    g = make_group(cfg["group"])
    N = int(cfg["system"]["depth"])
    sys = random_translation_system(rng, g, N)
    p = int(rng.choice(cfg["p"]))
    f, h = rng.random(sys.size), rng.random(sys.size)
    ns = sorted(int(x) for x in rng.choice(N + 1, size=int(rng.integers(2, N + 2)),
                                           replace=False))
    report = theorem_check(sys, f, h, p, ns)
    out = [("theorem", report.ratio <= 1 + 1e-9, report.ratio)]
    for eps, count, bound in jump_check(sys, f, h, p, cfg["eps"]):
        out.append(("jump_bound", count <= bound, count / bound))
    return out


EXACT_CHECKS = {
    "character_table": check_character_table,
    "telescoping": check_telescoping,
    "dual_telescoping": check_dual_telescoping,
    "character_property": check_character_property,
    "bilinear_oracle": check_bilinear_oracle,
    "lambda_substitution": check_lambda_substitution,
    "theta_family": check_theta_family,
    "transference": check_transference,
    "jump_oracle": check_jump_oracle,
}

FLOAT_CHECKS = {
    "scalar_lemma": check_scalar_lemma,
    "proposition": check_proposition,
    "theorem": check_theorem,
}


# -- runner ----------------------------------------------------------------------

@dataclass
class CheckRecord:
    check_id: str
    mode: str
    seed: int
    instances: int = 0
    failures: int = 0
    worst_ratio: float | None = None
    failing_seed: int | None = None
    skipped: bool = False

    def add(self, ok: bool, ratio, tseed: int):
        self.instances += 1
        if not ok:
            self.failures += 1
            if self.failing_seed is None:
                self.failing_seed = tseed
        if ratio is not None and math.isfinite(ratio):
            self.worst_ratio = ratio if self.worst_ratio is None else max(self.worst_ratio, ratio)

    def to_json(self) -> dict:
        return {"check_id": self.check_id, "mode": self.mode, "instances": self.instances,
                "failures": self.failures, "worst_ratio": self.worst_ratio,
                "seed": self.seed, "failing_seed": self.failing_seed,
                "skipped": self.skipped}


def _run_trial(job):
    name, cfg, index = job
    fn = EXACT_CHECKS.get(name) or FLOAT_CHECKS[name]
    tseed = trial_seed(cfg["seed"], index)
    rng = np.random.default_rng(tseed)
    return name, tseed, [(cid, bool(ok), None if r is None else float(r))
                         for cid, ok, r in fn(cfg, rng)]


def _trials_for(name, cfg):
    # the scalar lemma draws all its samples in one trial
    return 1 if name == "scalar_lemma" else cfg["trials"]


def run_checks(cfg: dict, jobs: int = 1) -> list[CheckRecord]:
    """Run the configured checks; records come back in a fixed order."""
    selected = cfg["checks"]
    names = [n for n in list(EXACT_CHECKS) + list(FLOAT_CHECKS)
             if selected is None or n in selected]
    records: dict[str, CheckRecord] = {}
    work = []
    for name in names:
        mode = "exact" if name in EXACT_CHECKS else "float"
        if cfg["mode"] not in ("both", mode):
            records[name] = CheckRecord(name, mode, cfg["seed"], skipped=True)
            continue
        # offset trial indices per check so checks draw independent streams
        base = (list(EXACT_CHECKS) + list(FLOAT_CHECKS)).index(name) * 1_000_000
        work += [(name, cfg, base + i) for i in range(_trials_for(name, cfg))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial, work, chunksize=4))
    else:
        results = [_run_trial(job) for job in work]
    for name, tseed, rows in results:
        mode = "exact" if name in EXACT_CHECKS else "float"
        for cid, ok, ratio in rows:
            if cid not in records:
                records[cid] = CheckRecord(cid, mode, cfg["seed"])
            records[cid].add(ok, ratio, tseed)
    return list(records.values())
