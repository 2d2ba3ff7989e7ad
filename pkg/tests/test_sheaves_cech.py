from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dgla_deform.cech import CechScDGLA, cech_cohomology
from dgla_deform.complexes import cohomology_dims
from dgla_deform.errors import BadWindow, CocycleError, CoverMismatch, WindowOverflow
from dgla_deform.rings import RingMatrix
from dgla_deform.semicosimplicial import h1_total, h1sc_first_order, validate_scdgla
from dgla_deform.sheaves import (CoherentSystem, SheafMorphism, SheafPresentation, abelian_sheaf_dgla,
                                 direct_sum_sheaf, end_dgla, end_sheaf, global_section, hom_complex_QQ,
                                 make_circle_cover, make_line_bundle, make_p1_cover, make_simplex_cover,
                                 section_glues, trivial_sheaf)


def holes(d, span=40):
    """Classical Čech count on P¹ by listing monomials.

    Sections of O(d): z^k regular on V0 (k ≥ 0) whose image z^{k-d} is regular on V1.
    H¹ = K[z^±]/(K[z] + z^d K[z^-1]): monomials in neither summand.
    """
    h0 = sum(1 for k in range(-span, span) if k >= 0 and k - d <= 0)
    h1 = sum(1 for k in range(-span, span) if k < 0 and k > d)
    return h0, h1


@pytest.mark.parametrize("d", range(-4, 5))
def test_line_bundles_match_hole_count(d, p1):
    h = cech_cohomology(make_line_bundle(d, make_p1_cover(6)))
    assert (h.h(0), h.h(1), h.h(2)) == (*holes(d), 0)
    assert h.stable
    assert h.h(0) - h.h(1) == d + 1


@settings(max_examples=15)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_direct_sums_add(a, b):
    cover = make_p1_cover(5)
    E = direct_sum_sheaf(make_line_bundle(a, cover), make_line_bundle(b, cover))
    h = cech_cohomology(E).dims
    ha, hb = holes(a), holes(b)
    assert (h[0], h[1]) == (ha[0] + hb[0], ha[1] + hb[1])


def test_end_of_O_plus_Om2(p1):
    E = direct_sum_sheaf(make_line_bundle(0, p1), make_line_bundle(-2, p1))
    End = end_sheaf(E)
    z = lambda k: {(k,): Fraction(1)}
    T = End.transition(0, 1)
    assert [T[i, i] for i in range(4)] == [z(0), z(2), z(-2), z(0)]
    assert cech_cohomology(End).dims == {0: 5, 1: 1, 2: 0}
    c = CechScDGLA(end_dgla(E))
    assert validate_scdgla(c.sc).valid
    assert h1sc_first_order(c.sc) == h1_total(c.sc) == 1


def test_nonsplit_transition_euler(p1):
    R = p1.ring((0, 1))
    # upper-triangular transition with unit determinant z^-2: degree 2, rank 2
    E = SheafPresentation(p1, 2, {(0, 1): RingMatrix(R, [[{(-1,): 1}, {(0,): 1}], [{}, {(-1,): 1}]])})
    h = cech_cohomology(E).dims
    assert h[0] - h[1] == 4
    assert h == {0: 4, 1: 0, 2: 0}


def test_finite_covers():
    assert cech_cohomology(trivial_sheaf(make_circle_cover())).dims == {0: 1, 1: 1, 2: 0}
    assert cech_cohomology(trivial_sheaf(make_simplex_cover(), 2)).dims == {0: 2, 1: 0, 2: 0}


def test_sections(p1):
    O2 = make_line_bundle(2, p1)
    s = global_section(O2, [{(1,): 1}])
    assert s[1] == [{(-1,): 1}]
    assert section_glues(O2, s)
    with pytest.raises(CocycleError):
        global_section(O2, [{(3,): 1}])
    with pytest.raises(CocycleError):
        CoherentSystem(O2, [{0: [{(0,): 1}], 1: [{(0,): 1}]}])


def test_morphisms(p1):
    O0, O1 = make_line_bundle(0, p1), make_line_bundle(1, p1)
    a = SheafMorphism.from_chart(O0, O1, 0, [[{(1,): 1}]])
    assert a.local[1].entries == (({(0,): 1},),)
    with pytest.raises(CocycleError):
        SheafMorphism.from_chart(O1, O0, 0, [[{(0,): 1}]])


def test_input_validation(p1):
    with pytest.raises(BadWindow):
        make_p1_cover(0)
    with pytest.raises(WindowOverflow):
        make_line_bundle(9, p1)
    with pytest.raises(CoverMismatch):
        direct_sum_sheaf(make_line_bundle(0, p1), make_line_bundle(0, make_p1_cover(5)))
    with pytest.raises(CocycleError):
        SheafPresentation(p1, 1, {(0, 1): [[{(0,): 1, (1,): 1}]]})


def test_sheaf_dglas_check(p1):
    E = direct_sum_sheaf(make_line_bundle(1, p1), make_line_bundle(0, p1))
    assert end_dgla(E).check() == []
    sys_ = CoherentSystem(E, [global_section(E, [{(0,): 1}, {(0,): 1}])])
    assert hom_complex_QQ(sys_).check() == []
    c = CechScDGLA(abelian_sheaf_dgla(make_line_bundle(-3, p1)))
    assert cohomology_dims(c.total) == {0: 0, 1: 2}
