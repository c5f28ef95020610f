"""The ten acceptance criteria; each test records one PASS/FAIL line."""
import json
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE
from artifact import linalg
from artifact.algebra import ModelParams
from artifact.cech import (CechForm, cdr_cohomology, cup_product, leibniz_residual, random_form,
                           square_checks)
from artifact.cli import BUILTIN_ATLASES, RunConfig, builtin_atlas, run_scenario, strip_timings
from artifact.cochains import CellSpec, Cochain, build_cell, check_compose, random_cochain
from artifact.coords import FormalAuto, invariance_check, random_unipotent, reconstruct, rho_exp_coeffs
from artifact.engine import cohomology, stable_cell
from artifact.invariants import PRESETS, gv_scenario
from artifact.star import DualPairs, bound_check, leibniz_check, random_mix, star

P = ModelParams()   # N=3, M=6, B0=2, Lmax=3
BASE = CellSpec(P, 0, 0, E=6)
SEEDS = range(10)


def record(n, ok, detail):
    ACCEPTANCE.append((n, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def default_run():
    t0 = time.perf_counter()
    rep = cohomology(BASE, 3, 2)
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="module")
def star_cells():
    base = CellSpec(P, 0, 0, E=6, sector=None)
    return stable_cell(base.at(1, 1)), stable_cell(base.at(1, 2))


def test_criterion_01_dd_zero(default_run):
    rep, secs = default_run
    ok = len(rep.dd_checks) == 12 and all(rep.dd_checks.values()) and secs < 120
    record(1, ok, f"D^2 = 0 on {sum(rep.dd_checks.values())}/12 stable cells (l<=3, k<=2) in {secs:.1f}s")


def test_criterion_02_nesting():
    failures = []
    for l in range(4):
        for k in range(1, 3):
            hi, lo = build_cell(BASE.at(l, k)), build_cell(BASE.at(l, k - 1))
            if hi.dim > lo.dim:
                failures.append(f"dim C^{l}_{k} = {hi.dim} > {lo.dim}")
            for i, v in enumerate(hi.basis):
                if not check_compose(Cochain(P, l, k, v), k - 1)[0]:
                    failures.append(f"basis {i} of C^{l}_{k} fails COMPOSE({k - 1})")
                    break
    record(2, not failures, "nested cells for l<=3, k=1,2" if not failures else "; ".join(failures))


def test_criterion_03_leibniz(star_cells):
    c1, c2 = star_cells
    t0 = time.perf_counter()
    bad = []
    for s in SEEDS:
        ok, res = leibniz_check(random_cochain(c1, s), random_cochain(c2, 100 + s), Lambda=3)
        if not ok:
            bad.append((s, res))
    secs = time.perf_counter() - t0
    record(3, not bad and secs < 300, f"Leibniz at Lambda=3 on 10 stable pairs, {len(bad)} failures, {secs:.1f}s")


def test_criterion_04_cauchy(star_cells):
    c1, c2 = star_cells
    violations = 0
    for s in SEEDS:
        F, G = random_cochain(c1, s), random_cochain(c2, 100 + s)
        ok, rep = bound_check(star([F, G], Lambda=3), [F, G], [1, 1])
        violations += len(rep["violations"])
    record(4, violations == 0, f"Cauchy bounds on 10 star products, {violations} violations")


def test_criterion_05_basis_independence(star_cells):
    c1, c2 = star_cells
    differ = []
    for s in SEEDS:
        F, G = random_cochain(c1, s), random_cochain(c2, 100 + s)
        plain = star([F, G], Lambda=3)
        mixed = star([F, G], Lambda=3, pairs=DualPairs(F.alg, random_mix(F.alg, s)))
        if any(plain.coefficients[m].coeffs != mixed.coefficients[m].coeffs for m in plain.coefficients):
            differ.append(s)
    record(5, not differ, f"star unchanged bit-for-bit under 10 re-mixed dual bases (differ: {differ})")


def test_criterion_06_invariance():
    cell = build_cell(CellSpec(P, 1, 0, frozenset({"KG", "SHUFFLE", "POLE"}), E=6, sector=None))
    bad = []
    for s in SEEDS:
        rho = random_unipotent(s, 3)
        if not invariance_check(random_cochain(cell, s), rho, 3, 6)[0]:
            bad.append(f"seed {s} not invariant")
        if reconstruct(rho_exp_coeffs(rho), 3) != rho:
            bad.append(f"seed {s} round trip")
    a, b = Fraction(3, 2), Fraction(-5, 7)
    if rho_exp_coeffs(FormalAuto((1, a, b)))[1] != b - a * a:
        bad.append("beta_2 != b - a^2")
    record(6, not bad, "order-3 invariance for 10 unipotent rho, exact beta round trip, beta_2 = b - a^2"
           if not bad else "; ".join(bad))


def test_criterion_07_gv_presets():
    notes, ok = [], True
    for name in PRESETS:
        out = gv_scenario(name, SEEDS, range(5))
        shifts = out["shifts"]
        good = (out["nonvanishing"] and len(shifts) == 5
                and all(sh["equal"] and sh["certificate_verified"] for sh in shifts))
        ok = ok and good
        notes.append(f"{name}: witness seed {out['witness_seed']}, {sum(sh['equal'] for sh in shifts)}/5 shifts")
    record(7, ok, "; ".join(notes))


def test_criterion_08_cech():
    expected = {"single": 1, "disjoint": 2, "identified": 1}
    notes, ok = [], True
    for name in BUILTIN_ATLASES:
        A = builtin_atlas(name)
        squares = square_checks(A, 2, 3)
        h0 = cdr_cohomology(A, 2, 3)[0]["betti"]
        leib = all(all(r.is_zero() for r in leibniz_residual(random_form(A, k, l, s, 2),
                                                                random_form(A, k2, l2, s + 7, 2)))
                   for s in range(3) for k in range(2) for k2 in range(2) for l in (0, 1) for l2 in (0, 1))
        sec = A.section_ids()
        a = CechForm(A, 1, 0, {(f"id_{sec[0]}",): (1,)})
        sign = cup_product(a, a).get((f"id_{sec[0]}", f"id_{sec[0]}")) == (Fraction(-1),)
        good = not squares and h0 == expected[name] and leib and sign
        ok = ok and good
        notes.append(f"{name} H0={h0}")
    record(8, ok, "squares vanish, cup sign and Leibniz hold; " + ", ".join(notes))


def test_criterion_09_rank_cross_checks(default_run):
    rep, _ = default_run
    log = rep.rank_log
    mod_ok = all(e["modular"] is None or e["modular"] == e["exact"] for e in log)
    modular_runs = sum(e["modular"] is not None for e in log)
    small = [(l, k) for (l, k), e in rep.entries.items() if k >= 1 and 0 < e["stable_dim"] <= 200]
    # k = 0 cells end their column (D = 0), so the oracle runs on k >= 1
    whole = {e["label"]: e for e in log if e["label"].endswith("whole")}
    dense_ok = True
    for l, k in small:
        e = whole.get(f"D({l},{k}) whole")
        dense_ok = dense_ok and e is not None and e["dense"] == e["exact"]
    blocks_ok = all(e["dense"] is None or e["dense"] == e["exact"] for e in log)
    # independent dense check on the Cech total complexes too
    cech_log = []
    for name in BUILTIN_ATLASES:
        cdr_cohomology(builtin_atlas(name), 2, 3, log=cech_log)
    cech_ok = all(e["dense"] == e["exact"] == e["modular"] for e in cech_log)
    ok = mod_ok and dense_ok and blocks_ok and cech_ok and modular_runs > 0
    record(9, ok, f"{len(small)} cells with dim<=200 match the dense oracle; modular = exact on "
                  f"{modular_runs + len(cech_log)} rank runs")


def test_criterion_10_determinism(tmp_path):
    def run(tag):
        files = {}
        for scen, extra in [("star", {"seeds": [0, 1]}), ("cech", {}),
                            ("invariant-gv", {"preset": "l0k3", "seeds": [0, 1], "psi_seeds": [0]}),
                            ("cohomology", {"lmax": 2, "kmax": 1})]:
            out = tmp_path / tag / scen
            cfg = RunConfig(scenario=scen, out=str(out), **extra)
            _, code = run_scenario(cfg)
            assert code == 0
            for p in sorted(out.iterdir()):
                if p.name == "timings.csv":
                    continue
                if p.name == "report.json":
                    files[(scen, p.name)] = json.dumps(strip_timings(json.loads(p.read_text())), sort_keys=True)
                else:
                    files[(scen, p.name)] = p.read_bytes()
        return files

    a, b = run("a"), run("b")
    differ = sorted(k for k in set(a) | set(b) if a.get(k) != b.get(k))
    record(10, not differ, f"{len(a)} report files identical across two runs (timings excluded)"
           if not differ else f"differ: {differ}")
