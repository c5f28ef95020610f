from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.cech import (AtlasError, CechForm, FoliationAtlas, cdr_cohomology, cup_product, dictionary_map,
                           horizontal_delta, leibniz_residual, p_compose, p_deriv, p_mul, random_form, refine,
                           square_checks, vertical_d)
from artifact.cli import BUILTIN_ATLASES, builtin_atlas
from artifact.cochains import CellSpec, Cochain, build_cell, get_algebra, random_cochain
from artifact.algebra import ModelParams

F = Fraction
ATLASES = {name: builtin_atlas(name) for name in BUILTIN_ATLASES}
EXPECTED_H0 = {"single": 1, "disjoint": 2, "identified": 1}


def test_polynomial_helpers():
    assert p_mul((1, 1), (1, 1)) == (1, 2, 1)
    assert p_deriv((5, 0, 3)) == (0, 6)
    assert p_compose((0, 0, 1), (2, 2)) == (4, 8, 4)


def test_vertical_d_examples():
    A = ATLASES["single"]
    w = CechForm(A, 0, 0, {("U0",): (1, 2, 3)})
    assert vertical_d(w).values == {("U0",): (2, 6)}
    w1 = CechForm(A, 1, 0, {("id_U0",): (0, 0, 1)})
    assert vertical_d(w1).values == {("id_U0",): (0, -2)}
    assert vertical_d(vertical_d(w1)).is_zero()


def test_delta_two_sections():
    # (delta f)(h) = h^* f_dst - f_src
    A = ATLASES["identified"]
    f = CechForm(A, 0, 0, {("U0",): (1, 1), ("U1",): (0, 0, 1)})
    df = horizontal_delta(f)
    assert df.get(("h",)) == (F(3), F(7), F(4))
    assert df.get(("id_U0",)) == () and df.get(("id_U1",)) == ()
    # 1-forms pull back with h'
    g = CechForm(A, 0, 1, {("U1",): (1,)})
    assert horizontal_delta(g).get(("h",)) == (F(2),)


def test_cup_unit_and_sign():
    A = ATLASES["identified"]
    one = CechForm(A, 0, 0, {(s,): (1,) for s in A.section_ids()})
    w = random_form(A, 1, 0, seed=3)
    assert cup_product(one, w) == w and cup_product(w, one) == w
    a = CechForm(A, 1, 0, {("h",): (1,)})
    b = CechForm(A, 1, 0, {("id_U1",): (1,)})
    assert cup_product(a, b).values == {("h", "id_U1"): (F(-1),)}


@pytest.mark.parametrize("name", sorted(ATLASES))
def test_squares_vanish(name):
    assert square_checks(ATLASES[name], kmax=2, dmax=3) == []


@settings(max_examples=20)
@given(st.sampled_from(sorted(ATLASES)), st.integers(0, 2), st.integers(0, 1), st.integers(0, 1),
       st.integers(0, 1), st.integers(0, 10 ** 6))
def test_leibniz(name, k, l, k2, l2, seed):
    A = ATLASES[name]
    w = random_form(A, k, l, seed, dmax=2)
    eta = random_form(A, k2, l2, seed + 1, dmax=2)
    rh, rv = leibniz_residual(w, eta)
    assert rh.is_zero() and rv.is_zero()


@pytest.mark.parametrize("name", sorted(ATLASES))
def test_cohomology_and_refinement(name):
    A = ATLASES[name]
    H = cdr_cohomology(A, kmax=2, dmax=3)
    assert H[0]["betti"] == EXPECTED_H0[name]
    R = refine(A, A.section_ids()[0])
    assert {n: H[n]["betti"] for n in H} == {n: v["betti"] for n, v in cdr_cohomology(R, 2, 3).items()}


def test_missing_composite_and_bad_atlases():
    shift = FoliationAtlas.from_json({"sections": [{"id": "U0", "interval": [0, 1]}],
                                      "holonomies": [{"id": "s", "from": "U0", "to": "U0", "poly": [1, 1]}]})
    with pytest.raises(AtlasError, match="missing composite"):
        horizontal_delta(random_form(shift, 1, 0, 0))
    with pytest.raises(AtlasError, match="h'"):
        FoliationAtlas.from_json({"sections": [{"id": "U0", "interval": [0, 1]}],
                                  "holonomies": [{"from": "U0", "to": "U0", "poly": [1, -1]}]})
    with pytest.raises(AtlasError, match="unknown section"):
        FoliationAtlas.from_json({"sections": [{"id": "U0", "interval": [0, 1]}],
                                  "holonomies": [{"from": "U0", "to": "U9", "poly": [0, 1]}]})
    curved = FoliationAtlas.from_json({"sections": [{"id": "U0", "interval": [0, 1]}, {"id": "U1", "interval": [0, 2]}],
                                       "holonomies": [{"from": "U0", "to": "U1", "poly": [0, 1, 1]}]})
    with pytest.raises(AtlasError, match="affine"):
        cdr_cohomology(curved)


def test_json_round_trip():
    A = ATLASES["identified"]
    B = FoliationAtlas.from_json(A.to_json())
    assert B.sections == A.sections and set(B.edges) == set(A.edges)


P = ModelParams()
ALG = get_algebra(P)


def test_dictionary_map_degree_zero_and_zero():
    A = ATLASES["identified"]
    c = Cochain(P, 0, 0, {((), ALG.unit, ((), ())): F(5)})
    form = dictionary_map(c, A, {}, {"U0": 1, "U1": 3})
    assert form.values == {("U0",): (F(5),), ("U1",): (F(5),)}
    zero = Cochain(P, 1, 0, {})
    assert dictionary_map(zero, A, {"h": 1}, {"U0": 1, "U1": 3}).is_zero()


def test_dictionary_map_is_linear():
    A = ATLASES["identified"]
    cell = build_cell(CellSpec(P, 1, 0, frozenset({"KG", "POLE"}), sector=None))
    labels = {"h": 0, "id_U0": 1, "id_U1": 2}
    pts = {"U0": F(1, 2), "U1": 3}
    out = ALG.index[(1,)]
    a, b = random_cochain(cell, 0), random_cochain(cell, 1)
    lhs = dictionary_map(a + b.scale(3), A, labels, pts, out)
    rhs = dictionary_map(a, A, labels, pts, out) + dictionary_map(b, A, labels, pts, out).scale(3)
    assert lhs == rhs
    assert lhs.skipped == []
