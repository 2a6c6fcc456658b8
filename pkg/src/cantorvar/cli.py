"""Command-line entry point: ``cantorvar {verify,variation,jumps,cp}``.

Exit codes: 0 pass, 1 check failure, 2 config error, 3 cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from .abelian import make_group
from .averages import ScaleLadder, bilinear_average, variation_sum
from .dynamics import jump_check, system_from_json, theorem_check
from .errors import CapExceeded
from .forms import assembled_constant, c_p
from .stepfn import StepFn2, lp_norm_p, random_step
from .verify import ConfigError, normalize_config, random_translation_system, run_checks, trial_seed

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3

VARIATION_COLUMNS = ["trial", "source", "p", "ladder", "variation_sum", "variation_exact",
                     "bound", "ratio", "jump_norms"]
JUMP_COLUMNS = ["trial", "p", "eps", "count", "bound"]
CP_COLUMNS = ["p", "c_p", "C_p"]


def _num(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([row.get(c, "") for c in columns])
    return buf.getvalue()


def _map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def load_config(path: str | None, seed: int | None, mode: str | None) -> dict:
    raw = {}
    if path:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    if seed is not None:
        raw["seed"] = seed
    if mode is not None:
        raw["mode"] = mode
    return normalize_config(raw)


# -- verify ------------------------------------------------------------------------

def cmd_verify(cfg: dict, jobs: int = 1) -> tuple[int, str]:
    records = run_checks(cfg, jobs)
    failed = [r.check_id for r in records if r.failures]
    report = {
        "schema": 1,
        "seed": cfg["seed"],
        "mode": cfg["mode"],
        "faults": cfg["faults"],
        "passed": not failed,
        "failed_checks": failed,
        "checks": [r.to_json() for r in records],
    }
    return (EXIT_FAIL if failed else EXIT_OK), json.dumps(report, indent=2, sort_keys=True) + "\n"


# -- variation ---------------------------------------------------------------------

def _grid_row(F: StepFn2, G: StepFn2, p: int, ladder: ScaleLadder, trial, source):
    A = [bilinear_average(F, G, k) for k in ladder.ks]
    rep = variation_sum(A, p)
    Ff, Gf = F.to_float(), G.to_float()
    nF = lp_norm_p(Ff, 2 * p) ** 0.5
    nG = lp_norm_p(Gf, 2 * p) ** 0.5
    rep.fill_bound(assembled_constant(p) * nF * nG)
    exact = str(rep.variation_sum) if isinstance(rep.variation_sum, Fraction) else ""
    return {"trial": trial, "source": source, "p": p,
            "ladder": " ".join(str(k) for k in ladder.ks),
            "variation_sum": _num(rep.variation_sum), "variation_exact": exact,
            "bound": _num(rep.bound), "ratio": _num(rep.ratio),
            "jump_norms": " ".join(_num(x) for x in rep.jump_norms)}


def _system(cfg):
    system_cfg = dict(cfg["system"])
    system_cfg.setdefault("group", cfg["group"])
    return system_from_json(system_cfg)


def _default_ns(cfg, depth):
    return cfg.get("ns") or list(range(depth + 1))


def _variation_trial(job):
    cfg, i = job
    rng = np.random.default_rng(trial_seed(cfg["seed"], i))
    g = make_group(cfg["group"])
    p = int(rng.choice(cfg["p"]))
    if "space" in cfg["system"]:
        sys_ = _system(cfg)
        f, h = rng.random(sys_.size), rng.random(sys_.size)
        ns = _default_ns(cfg, sys_.depth)
        rep = theorem_check(sys_, f, h, p, ns)
        return {"trial": i, "source": "system", "p": p, "ladder": " ".join(map(str, ns)),
                "variation_sum": _num(rep.variation_sum), "variation_exact": "",
                "bound": _num(rep.bound), "ratio": _num(rep.ratio),
                "jump_norms": " ".join(_num(x) for x in rep.jump_norms)}
    inst = cfg["instances"]
    K = int(rng.integers(inst["K"][0], inst["K"][1] + 1))
    N = int(rng.integers(inst["N"][0], inst["N"][1] + 1))
    if g.d ** (N + K) > cfg["caps"]["max_axis"]:
        raise CapExceeded(f"grid axis {g.d ** (N + K)} exceeds the cap")
    mode = "exact" if cfg["mode"] == "exact" else "float"
    F = random_step(rng, g, K, N, mode, max_num=inst["max_num"], max_den=inst["max_den"])
    G = random_step(rng, g, K, N, mode, max_num=inst["max_num"], max_den=inst["max_den"])
    if cfg["ladder"] is not None:
        ladder = ScaleLadder(tuple(cfg["ladder"]))
    else:
        lo = min(cfg["ladder_min"], K - 1)
        pool = list(range(lo, K + 1))
        width = int(rng.integers(1, min(cfg["ladder_width"], len(pool) - 1) + 1))
        ladder = ScaleLadder(tuple(sorted(int(k) for k in rng.choice(pool, width + 1,
                                                                    replace=False))))
    return _grid_row(F, G, p, ladder, i, "random")


def cmd_variation(cfg: dict, jobs: int = 1) -> tuple[int, str]:
    if "F" in cfg or "G" in cfg:
        if not ("F" in cfg and "G" in cfg and cfg["ladder"] is not None):
            raise ConfigError("explicit grids need F, G and a ladder")
        try:
            F, G = StepFn2.from_json(cfg["F"]), StepFn2.from_json(cfg["G"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad grid: {exc}") from exc
        if F.n > cfg["caps"]["max_axis"]:
            raise CapExceeded(f"grid axis {F.n} exceeds the cap")
        ladder = ScaleLadder(tuple(cfg["ladder"]))
        if ladder.ks[-1] > F.K:
            raise ConfigError("ladder scales must not exceed the grid resolution")
        rows = [_grid_row(F, G, p, ladder, 0, "config") for p in cfg["p"]]
    else:
        rows = _map(_variation_trial, [(cfg, i) for i in range(cfg["trials"])], jobs)
    return EXIT_OK, _csv(VARIATION_COLUMNS, rows)


# -- jumps -------------------------------------------------------------------------

def _jump_trial(job):
    cfg, i, explicit = job
    rng = np.random.default_rng(trial_seed(cfg["seed"], i))
    g = make_group(cfg["group"])
    if "space" in cfg["system"]:
        sys_ = _system(cfg)
    else:
        sys_ = random_translation_system(rng, g, int(cfg["system"]["depth"]))
    if explicit:
        f = np.asarray(cfg["f"], dtype=float)
        h = np.asarray(cfg["g"], dtype=float)
        if f.shape != (sys_.size,) or h.shape != (sys_.size,):
            raise ConfigError(f"f and g must have {sys_.size} entries")
    else:
        f, h = rng.random(sys_.size), rng.random(sys_.size)
    rows = []
    for p in cfg["p"]:
        for eps, count, bound in jump_check(sys_, f, h, p, cfg["eps"]):
            rows.append({"trial": i, "p": p, "eps": _num(eps), "count": count,
                         "bound": _num(bound), "_ok": count <= bound})
    return rows


def cmd_jumps(cfg: dict, jobs: int = 1) -> tuple[int, str]:
    explicit = "f" in cfg or "g" in cfg
    if explicit and not ("f" in cfg and "g" in cfg):
        raise ConfigError("explicit functions need both f and g")
    trials = 1 if explicit else cfg["trials"]
    chunks = _map(_jump_trial, [(cfg, i, explicit) for i in range(trials)], jobs)
    rows = [r for chunk in chunks for r in chunk]
    code = EXIT_OK if all(r["_ok"] for r in rows) else EXIT_FAIL
    return code, _csv(JUMP_COLUMNS, rows)


# -- cp ------------------------------------------------------------------------------

def cmd_cp(ps) -> tuple[int, str]:
    rows = []
    for p in ps:
        if p < 2:
            raise ConfigError("c_p is defined for p >= 2")
        cp = c_p(p)
        p_out = int(p) if float(p).is_integer() else p
        rows.append({"p": p_out, "c_p": _num(cp), "C_p": _num(assembled_constant(p, cp))})
    return EXIT_OK, _csv(CP_COLUMNS, rows)


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cantorvar",
                                     description="Norm-variation verification on the Cantor group.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("verify", "run the exact identity suite and the float inequality sweep"),
                       ("variation", "CSV of variation sums against the assembled bound"),
                       ("jumps", "CSV of eps-jump counts against C_p eps^-p")]:
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", help="JSON config (schema 1)")
        cmd.add_argument("--seed", type=int, help="master seed (overrides the config)")
        cmd.add_argument("--mode", choices=["exact", "float", "both"],
                         help="arithmetic backend (overrides the config)")
        cmd.add_argument("--out", help="output path (default stdout)")
        cmd.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    cp = sub.add_parser("cp", help="CSV of c_p and C_p = (1+p)/c_p")
    cp.add_argument("--p", type=float, nargs="+", help="exponents (default from config)")
    cp.add_argument("--config", help="JSON config (schema 1)")
    cp.add_argument("--out", help="output path (default stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "cp":
            if args.p:
                ps = args.p
            else:
                ps = load_config(args.config, None, None)["p"]
            code, text = cmd_cp(ps)
        else:
            if args.jobs < 1:
                raise ConfigError("--jobs must be at least 1")
            cfg = load_config(args.config, args.seed, args.mode)
            fn = {"verify": cmd_verify, "variation": cmd_variation, "jumps": cmd_jumps}
            code, text = fn[args.command](cfg, args.jobs)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
