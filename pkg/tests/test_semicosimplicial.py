import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dgla_deform.artin import NilpotentElement, make_artin
from dgla_deform.complexes import cohomology_dims
from dgla_deform.dgla import DGLAMorphism, abelian_dgla, gl, matrix_dgla
from dgla_deform.errors import InvalidSc, NegativeDegreesPresent
from dgla_deform.semicosimplicial import (ScDGLA, constant_scdgla, h1_total, h1sc_first_order, sc_from_pair,
                                          total_complex, validate_scdgla, z1sc_check, z1sc_equiv)

seeds = st.integers(0, 10 ** 6)


def random_abelian(rng, tag):
    comp = {q: [(tag, q, i) for i in range(rng.randint(0, 2))] for q in (0, 1, 2)}
    return abelian_dgla(comp, name=tag)


def random_linear(rng, src, tgt):
    imgs = {}
    for q in src.space.degrees():
        for a in src.space.labels(q):
            if q in tgt.space.degrees():
                imgs[a] = {b: rng.randint(-1, 1) for b in tgt.space.labels(q)}
    return DGLAMorphism(src, tgt, imgs)


@given(seeds)
def test_first_order_sc_matches_total_h1_for_pairs(seed):
    rng = random.Random(seed)
    L, N, M = (random_abelian(rng, t) for t in "LNM")
    s = sc_from_pair(random_linear(rng, L, M), random_linear(rng, N, M))
    assert validate_scdgla(s).valid
    assert h1sc_first_order(s) == h1_total(s)


def test_constant_sc_reproduces_cohomology():
    g = matrix_dgla([0, 1, 1], {(1, 0): 1})
    s = constant_scdgla(g, 2)
    assert validate_scdgla(s).valid
    tot = cohomology_dims(total_complex(s))
    base = cohomology_dims(g.complex())
    assert {n: v for n, v in tot.items() if v} == {n: v for n, v in base.items() if v}


def test_nonabelian_pair():
    g = gl(2)
    conj = DGLAMorphism(g, g, {("E", 0, 0): {("E", 1, 1): 1}, ("E", 1, 1): {("E", 0, 0): 1},
                              ("E", 0, 1): {("E", 1, 0): 1}, ("E", 1, 0): {("E", 0, 1): 1}})
    s = sc_from_pair(DGLAMorphism.identity(g), conj)
    assert validate_scdgla(s).valid
    assert h1sc_first_order(s) == h1_total(s) == 0


def test_negative_degrees_rejected():
    s = constant_scdgla(matrix_dgla([0, 1]), 2)
    with pytest.raises(NegativeDegreesPresent):
        h1sc_first_order(s)


def test_cosimplicial_identity_violation():
    g = gl(1)
    ident = DGLAMorphism.identity(g)
    zero = DGLAMorphism.zero(g, g)
    s = ScDGLA([g, g, g], [[ident, ident], [ident, zero, ident]])
    kinds = {v[0] for v in validate_scdgla(s).violations}
    assert "identity" in kinds
    with pytest.raises(InvalidSc):
        ScDGLA([g, g], [[ident]])


def test_z1sc_membership():
    L = abelian_dgla({0: ["a"], 1: ["x"]})
    M = abelian_dgla({0: ["m"], 1: ["y"]})
    h = DGLAMorphism(L, M, {"a": {"m": 1}, "x": {"y": 1}})
    g = DGLAMorphism(L, M, {"a": {"m": 2}, "x": {"y": 1}})
    s = sc_from_pair(h, g)
    A = make_artin("dual_numbers")
    LN = s.levels[0]
    l = NilpotentElement(LN, A, {(("L", "x"), "eps"): 1, (("N", "x"), "eps"): 1})
    zero_m = NilpotentElement.zero(s.levels[1], A, 0)
    assert z1sc_check(s, A, l, zero_m).ok
    bad = NilpotentElement(LN, A, {(("L", "x"), "eps"): 1})
    assert z1sc_check(s, A, bad, zero_m).violated == ["gauge"]
    # gauging by a = (a_L, 0) shifts m by −h(a_L)
    a = NilpotentElement(LN, A, {(("L", "a"), "eps"): 1})
    m1 = NilpotentElement(s.levels[1], A, {("m", "eps"): -1})
    assert z1sc_equiv(s, A, (l, zero_m), (l, m1), a)
    assert not z1sc_equiv(s, A, (l, zero_m), (l, m1.scale(-1)), a)
