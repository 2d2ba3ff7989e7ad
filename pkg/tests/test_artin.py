import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st

from dgla_deform.artin import (ArtinAlgebra, NilpotentElement, bch, first_order_classes, gauge, gauge_equivalent,
                               is_mc, make_artin, mc_residual, primary_obstruction)
from dgla_deform.dgla import gl, matrix_dgla
from dgla_deform.errors import BadParams, CarrierMismatch, DegreeError, NotFirstOrderMC, UnsupportedOrder
from dgla_deform.randomized import random_artin, random_element, random_graded_degrees, random_delta, random_mc

seeds = st.integers(0, 10 ** 6)


# ---- oracle: matrices with entries in A = K ⊕ m_A, entries as {None: scalar, mon: coeff}

class MatA:
    def __init__(self, A, r):
        self.A, self.r = A, r

    def mul_el(self, x, y):
        out = {}
        for a, ca in x.items():
            for b, cb in y.items():
                if a is None or b is None:
                    prod = {b if a is None else a: Fraction(1)}
                else:
                    prod = self.A.mul({a: 1}, {b: 1})
                for k, v in prod.items():
                    out[k] = out.get(k, 0) + ca * cb * v
        return {k: v for k, v in out.items() if v}

    def matmul(self, X, Y):
        r = self.r
        out = {}
        for (i, k), x in X.items():
            for j in range(r):
                y = Y.get((k, j))
                if y:
                    acc = out.get((i, j), {})
                    for m, c in self.mul_el(x, y).items():
                        acc[m] = acc.get(m, 0) + c
                    out[(i, j)] = acc
        return self.clean(out)

    def add(self, X, Y, s=1):
        out = {k: dict(v) for k, v in X.items()}
        for k, y in Y.items():
            acc = out.setdefault(k, {})
            for m, c in y.items():
                acc[m] = acc.get(m, 0) + s * c
        return self.clean(out)

    @staticmethod
    def clean(X):
        out = {}
        for k, v in X.items():
            v = {m: c for m, c in v.items() if c}
            if v:
                out[k] = v
        return out

    def ident(self):
        return {(i, i): {None: Fraction(1)} for i in range(self.r)}

    def exp(self, X):
        out, term, n = self.ident(), self.ident(), 0
        while True:
            n += 1
            term = self.matmul(term, X)
            term = {k: {m: c / n for m, c in v.items()} for k, v in term.items()}
            if not term:
                return out
            out = self.add(out, term)

    def log(self, G):
        N = self.add(G, self.ident(), -1)
        out, power, n = {}, self.ident(), 0
        while True:
            n += 1
            power = self.matmul(power, N)
            if not power:
                return out
            out = self.add(out, power, Fraction((-1) ** (n - 1), n))


def to_mat(x: NilpotentElement):
    out = {}
    for ((_, i, j), mon), c in x.coeffs.items():
        out.setdefault((i, j), {})[mon] = c
    return out


def from_mat(L, A, X, degree):
    return NilpotentElement(L, A, {(("E", i, j), m): c for (i, j), v in X.items() for m, c in v.items()}, degree)


@given(seeds)
def test_bch_matches_matrix_log_exp(seed):
    rng = random.Random(seed)
    r = rng.randint(1, 3)
    L = gl(r)
    A = random_artin(rng, 5)
    a, b = random_element(rng, L, A, 0), random_element(rng, L, A, 0)
    M = MatA(A, r)
    want = M.log(M.matmul(M.exp(to_mat(a)), M.exp(to_mat(b))))
    assert to_mat(bch(a, b)) == want


@given(seeds)
def test_mc_and_gauge_match_matrix_oracle(seed):
    rng = random.Random(seed)
    degs = random_graded_degrees(rng, 3)
    delta = random_delta(rng, degs)
    L = matrix_dgla(degs, delta)
    A = random_artin(rng, 4)
    M = MatA(A, len(degs))
    D = {k: {None: v} for k, v in delta.items()}
    x = random_mc(rng, L, A)
    assert is_mc(x)
    DX = M.add(D, to_mat(x))
    assert not M.matmul(DX, DX)
    a = random_element(rng, L, A, 0)
    y = gauge(a, x)
    ea, ema = M.exp(to_mat(a)), M.exp(to_mat(a.scale(-1)))
    want = M.add(M.matmul(M.matmul(ea, DX), ema), D, -1)
    assert to_mat(y) == want
    assert is_mc(y)


@given(seeds)
def test_bch_associative_and_gauge_composition(seed):
    rng = random.Random(seed)
    L = matrix_dgla([0, 0, 1], {(2, 0): 1})
    A = random_artin(rng, 4)
    a, b, c = (random_element(rng, L, A, 0) for _ in range(3))
    assert bch(bch(a, b), c) == bch(a, bch(b, c))
    x = random_mc(rng, L, A)
    assert gauge(a, gauge(b, x)) == gauge(bch(a, b), x)


def test_bch_low_order_terms():
    L = gl(2)
    A = make_artin("truncated_poly", 3)
    a = NilpotentElement(L, A, {(("E", 0, 1), "t"): 1})
    b = NilpotentElement(L, A, {(("E", 1, 0), "t"): 1})
    # X + Y + ½[X, Y] at order t²
    z = bch(a, b)
    assert z.coeffs == {(("E", 0, 1), "t"): 1, (("E", 1, 0), "t"): 1,
                        (("E", 0, 0), "t^2"): Fraction(1, 2), (("E", 1, 1), "t^2"): Fraction(-1, 2)}


def test_artin_validation():
    with pytest.raises(BadParams):
        ArtinAlgebra("bad", ["x"], {("x", "x"): {"x": 1}})  # not nilpotent
    with pytest.raises(BadParams):
        make_artin("truncated_poly", 1)
    A = make_artin("truncated_two_vars", 3)
    assert A.nilpotency_order == 3 and len(A.m_basis) == 5


def test_element_errors():
    L, A = gl(1), make_artin("dual_numbers")
    with pytest.raises(DegreeError):
        NilpotentElement.zero(L, A, None)
    a = NilpotentElement(L, A, {(("E", 0, 0), "eps"): 1})
    other = NilpotentElement(gl(1), A, {(("E", 0, 0), "eps"): 1})
    with pytest.raises(CarrierMismatch):
        a + other
    with pytest.raises(DegreeError):
        gauge(a, a)


def test_first_order_and_obstruction():
    # End of K ⊕ K[-1] with zero d: H¹ is spanned by E(1,0)
    L = matrix_dgla([0, 1])
    dim, reps = first_order_classes(L)
    assert dim == 1
    res = primary_obstruction(reps[0])
    assert res.vanishes and is_mc(res.lift)
    with pytest.raises(NotFirstOrderMC):
        primary_obstruction(NilpotentElement.zero(L, make_artin("truncated_poly", 3), 1))


def test_obstruction_nonvanishing():
    # degrees (0, 1, 2): x = E10 + E21 has [x, x] = 2 E20, not exact since d = 0
    L = matrix_dgla([0, 1, 2])
    A = make_artin("dual_numbers")
    x = NilpotentElement(L, A, {(("E", 1, 0), "eps"): 1, (("E", 2, 1), "eps"): 1})
    res = primary_obstruction(x)
    assert not res.vanishes and res.lift is None


@given(seeds)
def test_gauge_equivalent_finds_witness(seed):
    rng = random.Random(seed)
    L = matrix_dgla([0, 0, 1], {(2, 0): 1})
    A = make_artin(rng.choice(["truncated_poly", "truncated_two_vars"]), 3)
    x = random_mc(rng, L, A)
    a = random_element(rng, L, A, 0)
    w = gauge_equivalent(x, gauge(a, x))
    assert w is not None and gauge(w, x) == gauge(a, x)
    with pytest.raises(UnsupportedOrder):
        gauge_equivalent(*(NilpotentElement.zero(L, make_artin("truncated_poly", 4), 1),) * 2)


def test_mc_residual_degree():
    with pytest.raises(DegreeError):
        mc_residual(NilpotentElement.zero(gl(1), make_artin("dual_numbers"), 0))
