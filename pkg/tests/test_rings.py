from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dgla_deform.errors import BadParams, ShapeMismatch
from dgla_deform.rings import FiniteRing, LaurentRing, RingMatrix, conjugation_matrix, kron, vec_index

R = LaurentRing([0])
elems = st.dictionaries(st.tuples(st.integers(-2, 2)), st.integers(-2, 2).map(Fraction), max_size=2)


def mats(r, c):
    return st.lists(st.lists(elems, min_size=c, max_size=c), min_size=r, max_size=r).map(lambda e: RingMatrix(R, e))


@given(mats(2, 2), mats(2, 1), mats(1, 2), mats(2, 1))
def test_kron_mixed_product(a, b, c, d):
    assert kron(a, c) @ kron(b, d) == kron(a @ b, c @ d)


@given(mats(2, 2), mats(2, 2), mats(2, 2))
def test_conjugation_matrix_is_vec_of_product(g, phi, f):
    # vec(g φ f) = (fᵀ ⊗ g) vec(φ), column-major
    vec = [phi[i, j] for j in range(2) for i in range(2)]
    got = conjugation_matrix(g, f).apply(vec)
    prod = g @ phi @ f
    assert got == [prod[i, j] for j in range(2) for i in range(2)]
    assert vec_index(1, 0, 2) == 1 and vec_index(0, 1, 2) == 2


def test_unipotent_inverse():
    m = RingMatrix(R, [[{(0,): 1}, {(-1,): 3}], [{}, {(2,): 1}]])
    inv = m.inverse()
    assert (m @ inv).is_identity() and (inv @ m).is_identity()


def test_region_units():
    Rp = LaurentRing([1])
    assert Rp.contains({(2,): 1}) and not Rp.contains({(-1,): 1})
    assert not Rp.is_unit({(1,): 1})
    assert R.is_unit({(3,): 2})
    with pytest.raises(BadParams):
        R.inverse({(0,): 1, (1,): 1})


def test_finite_ring():
    # K[x]/(x²)
    A = FiniteRing(["1", "x"], {("1", "1"): {"1": 1}, ("1", "x"): {"x": 1}}, {"1": 1})
    u = {"1": 2, "x": 3}
    inv = A.inverse(u)
    assert A.mul(u, inv) == {"1": 1}
    assert not A.is_unit({"x": 1})
    assert FiniteRing.field().mul({"1": 2}, {"1": 3}) == {"1": 6}


def test_shapes():
    with pytest.raises(ShapeMismatch):
        RingMatrix(R, [[{}], [{}, {}]])
    with pytest.raises(ShapeMismatch):
        RingMatrix.identity(R, 2) @ RingMatrix.identity(R, 3)
