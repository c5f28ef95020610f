from fractions import Fraction
from itertools import product
import random

import pytest

from artifact import linalg
from artifact.algebra import Algebra, ModelParams
from artifact.cochains import (CellSpec, Cochain, build_cell, cell_violations, get_algebra,
                               random_cochain, var_names)
from artifact.engine import (coboundary, cohomology, cohomology_rank, d_rank, dd_zero_check, push_D,
                             stabilize, stable_cell, stable_subcomplex)
from artifact.laurent import LaurentElem

P = ModelParams()
A = get_algebra(P)
I = A.index


def test_coboundary_of_L1_at_L2():
    F = Cochain(P, 0, 1, {((), I[(1,)], ((), ())): Fraction(1)})
    DF = coboundary(F, normalized=True)
    vals = DF.values()
    # [L2, L1] = -L3, carried by z^{-2}
    assert vals[((I[(2,)],), I[(3,)])] == LaurentElem.monomial(("z1",), (-2,), -1)


def test_coboundary_of_zero():
    assert coboundary(Cochain(P, 1, 1, {}), normalized=True).is_zero()


def _oracle_g_value(F, G, cache, tp, hp, point):
    """G-coordinate value of DF at (tp, hp) from F's values (forward products only)."""
    l = F.l
    unit = A.unit

    def g(t, h, pts):
        key = (t, h, pts)
        if key not in cache:
            v = G.get((t, h))
            cache[key] = v.evaluate(pts) if v is not None else Fraction(0)
        return cache[key]

    total = Fraction(0)
    # g_1 * F(g_2..)
    for h in range(A.dim):
        c = A.mul_basis(tp[0], h).get(hp, 0)
        if c:
            total += c * g(tp[1:], h, point[1:])
    # fused middle terms, z_i dropped
    for i in range(1, l + 1):
        for m, c in A.mul_basis(tp[i - 1], tp[i]).items():
            if F.cell is not None and F.cell.spec.normalized and m == unit:
                continue
            t = tp[:i - 1] + (m,) + tp[i + 1:]
            pts = point[:i - 1] + point[i:]
            total += (-1) ** i * c * g(t, hp, pts)
    # F(g_1..g_l) * g_{l+1}
    for h in range(A.dim):
        c = A.mul_basis(h, tp[-1]).get(hp, 0)
        if c:
            total += (-1) ** (l + 1) * c * g(tp[:-1], h, point[:-1])
    return total


@pytest.mark.parametrize("l,k,sector,seed", [(1, 1, None, 0), (1, 2, None, 1), (2, 1, 0, 2)])
def test_coboundary_matches_value_oracle(l, k, sector, seed):
    cell = build_cell(CellSpec(P, l, k, sector=sector))
    F = random_cochain(cell, seed)
    DF = coboundary(F).g_values()
    G, cache = F.g_values(), {}
    rng = random.Random(seed)
    point = tuple(Fraction(rng.randint(1, 50), rng.randint(1, 7)) + j for j in range(l + 1))
    args = [i for i in range(A.dim) if i != A.unit]
    checked = 0
    for tp in product(args, repeat=l + 1):
        outs = range(A.dim) if sector is None else \
            [h for h in range(A.dim) if A.weights[h] == sector + sum(A.weights[i] for i in tp)]
        for hp in outs:
            want = _oracle_g_value(F, G, cache, tp, hp, point)
            v = DF.get((tp, hp))
            got = v.evaluate(point) if v is not None else Fraction(0)
            assert got == want, (tp, hp)
            checked += bool(want)
    assert checked > 0


def test_dd_zero_on_l0_column_and_zero_cell():
    for k in range(3):
        assert dd_zero_check(build_cell(CellSpec(P, 0, k, sector=None)))[0]
    empty = build_cell(CellSpec(P, 1, 0, sector=99))
    assert empty.dim == 0 and dd_zero_check(empty)[0]


def test_dd_detects_corrupted_product():
    bad = Algebra(P)
    i, j = bad.index[(1,)], bad.index[(2,)]
    bad._table[(i, j)] = {bad.index[(1, 2)]: Fraction(1), bad.index[(3,)]: Fraction(5)}
    ok, wit = dd_zero_check(build_cell(CellSpec(P, 0, 1, sector=None)), alg=bad)
    assert not ok and wit["value"] != 0


def test_unconstrained_cells_are_already_stable():
    Ps = ModelParams(N=1, M=2, B0=2, Lmax=2)
    spec = CellSpec(Ps, 1, 1, frozenset(), E=2, sector=None)
    cell = build_cell(spec)
    assert stabilize(cell).dim == cell.dim


def test_stabilization_removes_pole_violators_and_is_idempotent():
    spec = CellSpec(ModelParams(B0=0), 2, 1)
    cell = build_cell(spec)
    V = stable_cell(spec)
    assert V.dim < cell.dim
    target = spec.at(3, 0)
    witness = [v for v in cell.basis if cell_violations(target, push_D(v, 2, spec.alg))]
    assert witness
    again = stabilize(V)
    assert again.dim == V.dim and again.basis == V.basis


def test_betti_of_k0_cell_is_its_dimension():
    cells = stable_subcomplex(CellSpec(P, 0, 0, sector=None), 0, 1)
    entry = cohomology_rank(0, 0, cells)
    assert entry["betti"] == cells[(0, 0)].dim == A.dim


def test_l0_betti_is_center_dimension():
    # brute force: a commutes with every non-unit basis monomial
    rows = []
    for g in range(A.dim):
        if g == A.unit:
            continue
        for h in range(A.dim):
            row = {}
            for a in range(A.dim):
                c = A.mul_basis(g, a).get(h, 0) - A.mul_basis(a, g).get(h, 0)
                if c:
                    row[a] = c
            if row:
                rows.append(row)
    center = A.dim - linalg.rank_dense(rows)
    cells = stable_subcomplex(CellSpec(P, 0, 0, sector=None), 1, 2)
    assert cohomology_rank(0, 1, cells)["betti"] == center


def test_default_table_regression_and_cross_checks():
    rep = cohomology(CellSpec(P, 0, 0), 2, 2)
    got = {(r["l"], r["k"]): (r["stable_dim"], r["betti"]) for r in rep.rows()}
    assert got[(0, 0)] == (1, 1) and got[(0, 1)] == (1, 1)
    assert got[(1, 1)] == (10, 3) and got[(1, 2)] == (10, 3)
    assert got[(2, 1)] == (39, 4)
    assert all(rep.dd_checks.values())
    for rec in rep.rank_log:
        assert rec["exact"] == rec["modular"] or rec["modular"] is None
        assert rec["dense"] is None or rec["dense"] == rec["exact"]


def test_rank_mutation_is_noticed():
    cell = stable_cell(CellSpec(P, 1, 1))
    rows = [push_D(v, 1, A) for v in cell.basis]
    r = d_rank(cell)
    assert r == linalg.checked_rank(rows)
    # dropping a row that carries a pivot changes the rank
    changed = [linalg.checked_rank(rows[:i] + rows[i + 1:]) for i in range(len(rows))]
    assert min(changed) == r - 1
