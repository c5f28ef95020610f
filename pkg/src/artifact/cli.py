"""Command line runner: one subcommand per scenario, JSON + CSV reports.

    artifact cohomology --lmax 3 --kmax 2 --out runs/coh
    artifact star --seeds 0-9 --Lambda 3
    artifact invariant gv --preset all
    artifact cech --atlas identified --kmax 2 --dmax 3
    artifact invariance --order 3 --seeds 0-9
    artifact axiom-audit --l 2 --k 1

A JSON file given with --config overrides the flags.  Every report echoes the
full configuration and the package version.  Timings live under the
"timings" key and in timings.csv only, so two runs can be compared byte for
byte after dropping them.  Exit code: 0 when every internal cross-check
passes, 2 on a cross-check failure (reports are still written), 1 on a
configuration error.
"""
import argparse
import csv
from dataclasses import dataclass, field, asdict, fields
import json
import os
from pathlib import Path
import sys
import time

from . import __version__, linalg
from .algebra import ModelParams
from .cochains import CellSpec, parse_axioms, AXIOMS, DEFAULT_AXIOMS

SCHEMA = "artifact-report/1"
SCENARIOS = ("cohomology", "star", "invariant-gv", "cech", "invariance", "axiom-audit")
BUILTIN_ATLASES = ("single", "disjoint", "identified")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


@dataclass
class RunConfig:
    scenario: str = "cohomology"
    model: dict = field(default_factory=lambda: ModelParams().as_dict())
    E: int = 6
    axioms: str = "KG,SHUFFLE,POLE,COMPOSE"
    sector: object = 0
    lmax: int = 3
    kmax: int = 2
    Lambda: int = 3
    seeds: list = field(default_factory=lambda: list(range(10)))
    psi_seeds: list = field(default_factory=lambda: list(range(5)))
    preset: str = "all"
    atlas: str = "identified"
    dmax: int = 3
    order: int = 3
    l: int = 1
    k: int = 1
    out: str = "artifact-out"

    def params(self):
        return ModelParams(**self.model)

    def base_spec(self):
        return CellSpec(self.params(), 0, 0, parse_axioms(self.axioms), self.E, self.sector)

    def echo(self):
        d = asdict(self)
        d.pop("out")
        return d


def _parse_seeds(text):
    """'0-9' or '1,3,5' -> list of ints."""
    try:
        if isinstance(text, list):
            return [int(x) for x in text]
        out = []
        for part in str(text).split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part[1:]:
                a, b = part.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
        return out
    except (TypeError, ValueError):
        raise ConfigError(f"seeds: cannot parse {text!r}") from None


def validate(cfg):
    """Raise ConfigError naming the first invalid field."""
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"scenario: unknown {cfg.scenario!r}; expected one of {', '.join(SCENARIOS)}")
    if not isinstance(cfg.model, dict):
        raise ConfigError("model: expected an object with N, M, B0, Lmax")
    for key in cfg.model:
        if key not in ("N", "M", "B0", "Lmax"):
            raise ConfigError(f"model.{key}: unknown field")
    for key, v in cfg.model.items():
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"model.{key}: expected an integer, got {v!r}")
    try:
        cfg.params()
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None
    for name in ("E", "lmax", "kmax", "Lambda", "dmax", "order", "l", "k"):
        v = getattr(cfg, name)
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ConfigError(f"{name}: expected a non-negative integer, got {v!r}")
    if cfg.order < 1:
        raise ConfigError("order: must be at least 1")
    try:
        parse_axioms(cfg.axioms)
    except ValueError as exc:
        raise ConfigError(f"axioms: {exc}") from None
    if cfg.sector is not None and not isinstance(cfg.sector, int):
        raise ConfigError(f"sector: expected an integer or null, got {cfg.sector!r}")
    for name in ("seeds", "psi_seeds"):
        v = getattr(cfg, name)
        if not isinstance(v, list) or not all(isinstance(x, int) for x in v):
            raise ConfigError(f"{name}: expected a list of integers")
    from .invariants import PRESETS
    if cfg.preset != "all" and cfg.preset not in PRESETS:
        raise ConfigError(f"preset: unknown {cfg.preset!r}; expected all or one of {', '.join(PRESETS)}")
    if cfg.scenario == "cech" and cfg.atlas not in BUILTIN_ATLASES and not Path(cfg.atlas).is_file():
        raise ConfigError(f"atlas: no built-in atlas or file named {cfg.atlas!r}")
    return cfg


def load_config(path, base=None):
    """Overlay a JSON config file on `base` (flags); unknown keys are errors."""
    cfg = base or RunConfig()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    names = {f.name for f in fields(RunConfig)}
    for key, v in data.items():
        if key not in names:
            raise ConfigError(f"{key}: unknown field")
        if key == "model":
            if not isinstance(v, dict):
                raise ConfigError("model: expected an object")
            merged = dict(cfg.model)
            merged.update(v)
            v = merged
        if key in ("seeds", "psi_seeds") and isinstance(v, str):
            v = _parse_seeds(v)
        setattr(cfg, key, v)
    return cfg


# reports ---------------------------------------------------------------------------------------------
def _jsonable(x):
    from fractions import Fraction
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(v) for v in x)
    return x


def emit_report(results, outdir):
    """Write report.json, one CSV per table and timings.csv; returns the paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    report = {k: v for k, v in results.items() if k != "tables"}
    p = out / "report.json"
    with open(p, "w") as fh:
        json.dump(_jsonable(report), fh, indent=1, sort_keys=True)
        fh.write("\n")
    paths.append(p)
    for name, (headers, rows) in sorted(results.get("tables", {}).items()):
        p = out / f"{name}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(headers)
            for r in rows:
                w.writerow([_jsonable(r.get(h, "")) for h in headers])
        paths.append(p)
    p = out / "timings.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "seconds"])
        for step, sec in sorted(results.get("timings", {}).items()):
            w.writerow([step, f"{sec:.4f}"])
    paths.append(p)
    return paths


def strip_timings(report):
    """Copy of a report without timing data (for determinism comparisons)."""
    return {k: v for k, v in report.items() if k != "timings"}


class _Clock:
    def __init__(self):
        self.t = {}

    def __call__(self, name):
        clock = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                clock.t[name] = max(0.0, time.perf_counter() - self.t0)
        return _Ctx()


# scenarios ---------------------------------------------------------------------------------------------
def _cohomology(cfg, clock):
    from .engine import cohomology
    with clock("cohomology"):
        rep = cohomology(cfg.base_spec(), cfg.lmax, cfg.kmax)
    headers = ["l", "k", "cell_dim", "stable_dim", "rank_out", "dim_ker", "dim_im", "betti"]
    rows = rep.rows()
    checks = [dict(r) for r in rep.rank_log]
    data = {"betti": rows, "dd_zero": {f"{l},{k}": ok for (l, k), ok in sorted(rep.dd_checks.items())},
            "rank_checks": len(checks)}
    ok = all(rep.dd_checks.values())
    tables = {"betti": (headers, rows),
              "rank_checks": (["label", "rows", "cols", "exact", "modular", "dense"], checks)}
    return data, tables, ok


def _star(cfg, clock):
    from .cochains import random_cochain
    from .engine import stable_cell
    from .star import star, bound_check, leibniz_check, DualPairs, random_mix
    base = CellSpec(cfg.params(), 0, 0, parse_axioms(cfg.axioms), cfg.E, None)
    with clock("cells"):
        c1 = stable_cell(base.at(1, 1))
        c2 = stable_cell(base.at(1, 2))
    rows = []
    ok = True
    for s in cfg.seeds:
        with clock(f"seed {s}"):
            F = random_cochain(c1, s)
            G = random_cochain(c2, 100 + s)
            res = star([F, G], Lambda=cfg.Lambda)
            b_ok, brep = bound_check(res, [F, G], [1, 1])
            mixed = star([F, G], Lambda=cfg.Lambda, pairs=DualPairs(F.alg, random_mix(F.alg, s)))
            same = all(mixed.coefficients[m].coeffs == res.coefficients[m].coeffs for m in res.coefficients)
            l_ok, l_res = leibniz_check(F, G, cfg.Lambda)
        ok = ok and b_ok and same and l_ok
        rows.append({"seed": s, "nonzero_orders": " ".join(str(m) for m, c in sorted(res.coefficients.items())
                                                           if not c.is_zero()),
                     "terms": sum(len(c.coeffs) for c in res.coefficients.values()),
                     "cauchy_ok": b_ok, "violations": len(brep["violations"]),
                     "basis_independent": same, "leibniz_ok": l_ok})
    headers = ["seed", "nonzero_orders", "terms", "cauchy_ok", "violations", "basis_independent", "leibniz_ok"]
    data = {"cells": {"F": [1, 1, c1.dim], "G": [1, 2, c2.dim]}, "seeds": rows}
    return data, {"star": (headers, rows)}, ok


def _invariant_gv(cfg, clock):
    from .invariants import PRESETS, gv_scenario
    names = list(PRESETS) if cfg.preset == "all" else [cfg.preset]
    rows, shift_rows, data = [], [], {}
    ok = True
    for name in names:
        with clock(f"preset {name}"):
            out = gv_scenario(name, cfg.seeds, cfg.psi_seeds, cfg.params(), cfg.Lambda)
        data[name] = out
        rows.append({"preset": name, "cell_dim": out["cell_dim"], "nonvanishing": out["nonvanishing"],
                     "witness_seed": out["witness_seed"],
                     "nonzero_seeds": " ".join(str(s["seed"]) for s in out["seeds"] if s["nonzero"])})
        for sh in out["shifts"]:
            shift_rows.append(dict(preset=name, **sh))
            ok = ok and sh["certificate_verified"]
    tables = {"gv": (["preset", "cell_dim", "nonvanishing", "witness_seed", "nonzero_seeds"], rows),
              "gv_shifts": (["preset", "psi_seed", "equal", "certificate_verified", "certificate_terms",
                             "incoming_dim"], shift_rows)}
    return data, tables, ok


def builtin_atlas(name):
    from importlib import resources
    from .cech import FoliationAtlas
    path = resources.files("artifact") / "data" / "atlases" / f"{name}.json"
    return FoliationAtlas.from_json(path.read_text(), name=name)


def _cech(cfg, clock):
    from .cech import FoliationAtlas, cdr_cohomology, square_checks
    atlas = builtin_atlas(cfg.atlas) if cfg.atlas in BUILTIN_ATLASES else FoliationAtlas.load(cfg.atlas)
    atlas.name = Path(cfg.atlas).stem
    log = []
    with clock("cech"):
        table = cdr_cohomology(atlas, cfg.kmax, cfg.dmax, log)
        bad = square_checks(atlas, cfg.kmax, cfg.dmax)
    rows = [dict(n=n, **v) for n, v in sorted(table.items())]
    data = {"atlas": atlas.to_json(), "betti": rows, "square_failures": [list(map(str, b)) for b in bad]}
    return data, {"cech_betti": (["n", "dim", "rank_out", "rank_in", "betti"], rows)}, not bad


def _invariance(cfg, clock):
    from .cochains import build_cell, random_cochain
    from .coords import invariance_check, random_unipotent, rho_exp_coeffs, reconstruct
    spec = CellSpec(cfg.params(), cfg.l, 0, frozenset({"KG", "SHUFFLE", "POLE"}), cfg.E, cfg.sector)
    with clock("cell"):
        cell = build_cell(spec)
    rows = []
    ok = True
    for s in cfg.seeds:
        with clock(f"seed {s}"):
            rho = random_unipotent(s, cfg.order)
            F = random_cochain(cell, s)
            inv_ok, res = invariance_check(F, rho, cfg.order, cfg.E)
            beta = rho_exp_coeffs(rho)
            rt = reconstruct(beta, cfg.order) == rho
        ok = ok and inv_ok and rt
        rows.append({"seed": s, "rho": str(rho), "beta": " ".join(str(b) for b in beta),
                     "invariant": inv_ok, "residual_entries": len(res), "round_trip": rt})
    headers = ["seed", "rho", "beta", "invariant", "residual_entries", "round_trip"]
    return {"cell": [cfg.l, 0, cell.dim], "seeds": rows}, {"invariance": (headers, rows)}, ok


def _axiom_audit(cfg, clock):
    from .cochains import build_cell, check_KG, check_pole, check_compose, check_shuffle, check_TG
    rows = []
    ok = True
    base = parse_axioms(cfg.axioms)
    subsets = [base] + [base - {a} for a in sorted(base)]
    for ax in subsets:
        spec = CellSpec(cfg.params(), cfg.l, cfg.k, frozenset(ax), cfg.E, cfg.sector)
        with clock("cell " + (",".join(sorted(ax)) or "none")):
            cell = build_cell(spec)
            fails = {a: 0 for a in AXIOMS}
            for F in cell.cochains():
                if "KG" in ax and not check_KG(F)[0]:
                    fails["KG"] += 1
                if "POLE" in ax and not check_pole(F)[0]:
                    fails["POLE"] += 1
                if "COMPOSE" in ax and not check_compose(F, cfg.k)[0]:
                    fails["COMPOSE"] += 1
                if "SHUFFLE" in ax and not all(check_shuffle(F, p)[0] for p in range(1, cfg.l)):
                    fails["SHUFFLE"] += 1
                if "TG" in ax and not check_TG(F)[0]:
                    fails["TG"] += 1
        ok = ok and not any(fails.values())
        rows.append({"axioms": ",".join(sorted(ax)) or "none", "frame_dim": cell.info.get("frame"),
                     "dim": cell.dim, **{f"fail_{a}": fails[a] for a in AXIOMS}})
    headers = ["axioms", "frame_dim", "dim"] + [f"fail_{a}" for a in AXIOMS]
    return {"cell": [cfg.l, cfg.k], "audit": rows}, {"axiom_audit": (headers, rows)}, ok


RUNNERS = {"cohomology": _cohomology, "star": _star, "invariant-gv": _invariant_gv, "cech": _cech,
           "invariance": _invariance, "axiom-audit": _axiom_audit}


def run_scenario(cfg, write=True):
    """Run the configured scenario; returns (results, exit_code)."""
    validate(cfg)
    clock = _Clock()
    results = {"schema": SCHEMA, "version": __version__, "scenario": cfg.scenario, "config": cfg.echo(),
               "threads": int(os.environ.get("ARTIFACT_THREADS", "1"))}
    code = 0
    try:
        data, tables, ok = RUNNERS[cfg.scenario](cfg, clock)
        results.update(result=data, checks_passed=ok, tables=tables)
        code = 0 if ok else 2
    except linalg.CrossCheckError as exc:
        results.update(result=None, checks_passed=False, error=str(exc), tables={})
        code = 2
    results["timings"] = dict(clock.t)
    if write:
        emit_report(results, cfg.out)
    return results, code


# argument parsing -----------------------------------------------------------------------------------------
def _common(p):
    p.add_argument("--config", help="JSON config file; its fields override the flags")
    p.add_argument("--out", default="artifact-out", help="output directory")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--M", type=int, default=6)
    p.add_argument("--B0", type=int, default=2)
    p.add_argument("--Lmax", type=int, default=3)
    p.add_argument("--E", type=int, default=6, help="window on exponents and pole orders")
    p.add_argument("--axioms", default=",".join(sorted(DEFAULT_AXIOMS)))
    p.add_argument("--sector", default="0", help="integer weight sector or 'all'")
    p.add_argument("--seeds", default="0-9")
    p.add_argument("--Lambda", type=int, default=3)


def build_parser():
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"artifact {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("cohomology", help="Betti table on the stable subcomplex")
    _common(p)
    p.add_argument("--lmax", type=int, default=3)
    p.add_argument("--kmax", type=int, default=2)
    p = sub.add_parser("star", help="seeded star products with bound, basis and Leibniz checks")
    _common(p)
    p = sub.add_parser("invariant", help="invariant classes")
    p.add_argument("kind", choices=["gv"])
    _common(p)
    p.add_argument("--preset", default="all")
    p.add_argument("--psi-seeds", default="0-4")
    p = sub.add_parser("cech", help="Cech-de Rham cohomology of an atlas")
    _common(p)
    p.add_argument("--atlas", default="identified", help="JSON file or one of " + ", ".join(BUILTIN_ATLASES))
    p.add_argument("--kmax", type=int, default=2)
    p.add_argument("--dmax", type=int, default=3)
    p = sub.add_parser("invariance", help="coordinate-change invariance of K_G cochains")
    _common(p)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--l", type=int, default=1)
    p = sub.add_parser("axiom-audit", help="cell dimensions and predicate checks per axiom subset")
    _common(p)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    return ap


def config_from_args(args):
    sector = None if str(args.sector).lower() in ("all", "none") else int(args.sector)
    cfg = RunConfig(
        scenario="invariant-gv" if args.command == "invariant" else args.command,
        model={"N": args.N, "M": args.M, "B0": args.B0, "Lmax": args.Lmax},
        E=args.E, axioms=args.axioms, sector=sector, Lambda=args.Lambda,
        seeds=_parse_seeds(args.seeds), out=args.out)
    for name in ("lmax", "kmax", "preset", "atlas", "dmax", "order", "l", "k"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "psi_seeds"):
        cfg.psi_seeds = _parse_seeds(args.psi_seeds)
    if args.config:
        cfg = load_config(args.config, cfg)
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        results, code = run_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    status = "ok" if code == 0 else "CROSS-CHECK FAILURE"
    print(f"{cfg.scenario}: {status}; report in {cfg.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
