import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dgla_deform.complexes import (ChainMap, CochainComplex, GradedMap, check_complex, cohomology, cohomology_dims,
                                   cone, euler_characteristic, long_exact_sequence, quotient_complex, subcomplex,
                                   verify_exact)
from dgla_deform.errors import NotAComplex, ShapeMismatch
from dgla_deform.linalg import SparseMatrix
from dgla_deform.randomized import _inverse, random_invertible

# A complex is built from elementary pieces: ("pt", n) is K in degree n with zero d,
# ("arrow", n) is K → K in degrees n, n+1 with d = 1.  Its cohomology is the number of
# points in each degree, which is the oracle; a random basis change hides the structure.
pieces = st.lists(st.tuples(st.sampled_from(["pt", "arrow"]), st.integers(0, 3)), min_size=1, max_size=6)


def build(spec, seed):
    rng = random.Random(seed)
    comp, d = {}, {}
    for k, (kind, n) in enumerate(spec):
        comp.setdefault(n, []).append((k, 0))
        if kind == "arrow":
            comp.setdefault(n + 1, []).append((k, 1))
    degs = range(min(comp), max(comp) + 1)
    comp = {n: comp.get(n, []) for n in degs}
    pos = {n: {lab: i for i, lab in enumerate(comp[n])} for n in degs}
    blocks = {}
    for n in degs:
        rows = {}
        for lab in comp[n]:
            k, part = lab
            if part == 0 and spec[k][0] == "arrow":
                rows.setdefault(pos[n + 1][(k, 1)], {})[pos[n][lab]] = Fraction(1)
        blocks[n] = SparseMatrix(len(comp.get(n + 1, [])), len(comp[n]), rows)
    # conjugate by random basis changes
    change = {n: random_invertible(rng, len(comp[n])) if comp[n] else None for n in degs}
    for n in degs:
        if comp[n] and comp.get(n + 1):
            blocks[n] = change[n + 1] @ blocks[n] @ _inverse(change[n])
    return CochainComplex.from_blocks(comp, blocks)


def oracle(spec):
    out = {}
    for kind, n in spec:
        if kind == "pt":
            out[n] = out.get(n, 0) + 1
    return out


@given(pieces, st.integers(0, 10 ** 6))
def test_cohomology_matches_piece_count(spec, seed):
    c = build(spec, seed)
    assert check_complex(c)
    dims = cohomology_dims(c)
    exp = oracle(spec)
    assert {n: v for n, v in dims.items() if v} == exp
    assert euler_characteristic(c) == sum((-1) ** n * v for n, v in exp.items())


@given(pieces, st.integers(0, 10 ** 6))
def test_representatives_classify(spec, seed):
    c = build(spec, seed)
    for n, h in cohomology(c).items():
        for k, r in enumerate(h.representatives):
            assert h.classify(r) == {k: 1}
        if c.dim(n - 1):
            b = c.d(n - 1).matvec({0: Fraction(3)})
            assert h.is_zero_class(b)


@given(pieces, st.integers(0, 10 ** 6))
def test_cone_of_identity_is_acyclic(spec, seed):
    c = build(spec, seed)
    ident = ChainMap(c, c, GradedMap.identity(c.space))
    assert ident.is_chain_map()
    k = cone(ident)
    assert check_complex(k)
    assert not any(cohomology_dims(k).values())


def test_les_of_sub_and_quotient():
    spec = [("arrow", 0), ("pt", 1), ("arrow", 1), ("pt", 0)]
    c = _unconjugated(spec)
    keep = lambda n, lab: lab[0] in (0, 1, 2)
    sub, inc = subcomplex(c, keep)
    q, proj = quotient_complex(c, keep)
    les = long_exact_sequence(inc, proj, [0, 1, 2])
    assert les.exact
    assert [t[2] for t in les.terms[:3]] == [0, 1, 1]


def _unconjugated(spec):
    comp, rows = {}, {}
    for k, (kind, n) in enumerate(spec):
        comp.setdefault(n, []).append((k, 0))
        if kind == "arrow":
            comp.setdefault(n + 1, []).append((k, 1))
    degs = range(0, max(comp) + 1)
    comp = {n: comp.get(n, []) for n in degs}
    blocks = {}
    for n in degs:
        tgt = comp.get(n + 1, [])
        trip = [(tgt.index((k, 1)), i, 1) for i, (k, p) in enumerate(comp[n]) if p == 0 and spec[k][0] == "arrow"]
        blocks[n] = SparseMatrix.from_triplets(len(tgt), len(comp[n]), trip)
    return CochainComplex.from_blocks(comp, blocks)


def test_subcomplex_must_be_closed():
    c = _unconjugated([("arrow", 0)])
    with pytest.raises(NotAComplex):
        subcomplex(c, lambda n, lab: lab == (0, 0))


def test_verify_exact_short_sequence():
    i = SparseMatrix.from_dense([[1], [0]])
    p = SparseMatrix.from_dense([[0, 1]])
    nodes = verify_exact([1, 2, 1], [i, p])
    assert all(n.exact for n in nodes)
    bad = verify_exact([1, 2, 1], [i, SparseMatrix.from_dense([[1, 1]])])
    assert not all(n.exact for n in bad)
    with pytest.raises(ShapeMismatch):
        verify_exact([1, 2], [p])


def test_non_complex_rejected():
    c = CochainComplex.from_blocks({0: 1, 1: 1, 2: 1}, {0: SparseMatrix.from_dense([[1]]),
                                                        1: SparseMatrix.from_dense([[1]]),
                                                        2: SparseMatrix.zeros(0, 1)})
    assert not check_complex(c)
    with pytest.raises(NotAComplex):
        cohomology(c)
