from fractions import Fraction

import pytest

from artifact.algebra import ModelParams
from artifact.cochains import CellSpec, Cochain, get_algebra, random_cochain
from artifact.engine import coboundary, stable_cell
from artifact.invariants import (NoSolution, class_equal, frobenius_solve, gv_scenario, invariant_class,
                                 ogromno_chain, preset_spec, verify_certificate)
from artifact.star import cup

P = ModelParams()
A = get_algebra(P)
I = A.index
BASE = CellSpec(P, 0, 0, sector=None)


def elem0(k, terms):
    cell = stable_cell(BASE.at(0, k))
    return Cochain(P, 0, k, {((), I[m], ((), ())): Fraction(c) for m, c in terms.items()}, cell)


def test_frobenius_zero_case():
    F0 = elem0(1, {(): 1})
    assert coboundary(F0).is_zero()
    assert frobenius_solve(F0).is_zero()


def test_frobenius_solves_with_invertible_factor():
    F0 = elem0(1, {(): 1, (1,): 1})
    F2 = frobenius_solve(F0)
    assert (F2.l, F2.k) == (1, 0)
    lhs = cup([F0, F2])[0]
    assert lhs == coboundary(F0).coeffs


def test_frobenius_unsolvable_and_infeasible():
    with pytest.raises(NoSolution):
        frobenius_solve(elem0(1, {(1,): 1}))
    with pytest.raises(ValueError, match="infeasible"):
        frobenius_solve(elem0(1, {(): 1}), t=0)


def test_invariant_class_trivial_cases():
    zero = Cochain(P, 1, 2, {}, stable_cell(BASE.at(1, 2)))
    assert not invariant_class(zero, 3).nonzero
    closed = elem0(3, {(): 2})
    assert not invariant_class(closed, 3).nonzero


def test_invariant_class_generic_is_nonzero_and_self_equal():
    cell = stable_cell(preset_spec("l0k3"))
    cls = invariant_class(random_cochain(cell, 0), 3)
    assert cls.nonzero and cls.cell == (1, 5)
    eq, cert = class_equal(cls, cls)
    assert eq and cert == {}


def test_shifted_representative_has_verified_certificate():
    spec = preset_spec("t1")
    cell = stable_cell(spec)
    Phi = random_cochain(cell, 0)
    Psi = random_cochain(stable_cell(spec.at(0, 2)), 5)
    shifted = Cochain(P, 1, 1, (Phi + coboundary(Psi)).coeffs, cell)
    c1, c2 = invariant_class(shifted, 3), invariant_class(Phi, 3)
    eq, cert = class_equal(c1, c2)
    assert eq and cert and verify_certificate(c1, c2, cert)


def test_class_equal_rejects_cell_mismatch():
    a = invariant_class(random_cochain(stable_cell(preset_spec("l0k3")), 0), 2)
    b = invariant_class(random_cochain(stable_cell(preset_spec("t1")), 0), 2)
    with pytest.raises(ValueError):
        class_equal(a, b)


def test_ogromno_terminates_for_closed_start():
    steps = ogromno_chain(elem0(2, {(): 1}), elem0(1, {(1,): 1}))
    assert steps[0]["status"] == "terminated"


def test_ogromno_index_infeasible():
    # Phi0 = L1 in A; Phi with top-weight outputs is orthogonal to D Phi0
    Phi0 = elem0(1, {(1,): 1})
    Phi = Cochain(P, 1, 1, {((I[(1,)],), I[(3, 3)], ((0,), ())): Fraction(1)})
    steps = ogromno_chain(Phi0, Phi)
    assert steps == [{"step": 0, "status": "index infeasible", "indices": [-1, 1]}]


def test_ogromno_constructed_pair_solves_a_step():
    # Phi0 = Phi = L2L2: D Phi0 has weight 5, so Phi0 * D Phi0 vanishes; Phi_1 = 1 works
    Phi0 = elem0(2, {(2, 2): 1})
    steps = ogromno_chain(Phi0, Phi0, max_steps=3)
    assert steps[0]["status"] == "solved"
    sol = steps[0]["solution"]
    assert cup([coboundary(Phi0), sol])[0] == coboundary(Phi0).coeffs
    assert len([s for s in steps if s["status"] == "solved"]) >= 1


def test_gv_scenario_small_preset():
    out = gv_scenario("l0k3", seeds=range(3), psi_seeds=range(2))
    assert out["nonvanishing"] and out["witness_seed"] == 0
    assert all(s["equal"] and s["certificate_verified"] for s in out["shifts"])


def test_unknown_preset():
    with pytest.raises(ValueError, match="unknown preset"):
        preset_spec("nope")
