from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dgla_deform.errors import HypothesisViolated, KTooLarge
from dgla_deform.pipelines import (Report, defk_tangent, deform_morphism_report, m_delta_check, pair_EU_report,
                                   section_extension, smoothness_flags, system_as_morphism)
from dgla_deform.sheaves import (CoherentSystem, SheafMorphism, global_section, make_circle_cover, make_line_bundle,
                                 make_p1_cover, trivial_sheaf)

from cases import MDELTA_CASES, ONE, PAIR_CASES, end_cocycle, system, z


@pytest.mark.parametrize("name", list(PAIR_CASES))
def test_pair_sequence_exact(name):
    degs, vecs, tangent = PAIR_CASES[name]
    rep = pair_EU_report(system(degs, vecs))
    assert rep.passed
    assert all(n["exact"] for n in rep.exactness)
    assert rep.dims["tangent"] == rep.dims["h1sc_first_order"] == tangent
    assert rep.witnesses["alpha_rank"] == rep.witnesses["connecting_rank"]


@pytest.mark.parametrize("name", list(MDELTA_CASES))
def test_m_delta(name):
    degs, vecs = MDELTA_CASES[name]
    rep = m_delta_check(system(degs, vecs))
    assert rep.passed
    want = rep.dims["expected (0, dim Hom(U,H0/U), dim Hom(U,H1))"]
    assert rep.dims["H(Tot m)"] == want and want[0] == 0


def test_smoothness_flags():
    rep = smoothness_flags(system([3], [[ONE], [z(1)], [z(2)], [z(3)]]))
    assert set(rep.flags.values()) >= {"set"}
    assert rep.flags["r_U smooth"] == "set"
    rep = smoothness_flags(system([0, -2], [[ONE, {}]]))
    assert rep.flags["r_U smooth"] == "criterion inapplicable"
    assert rep.flags["Def(E,U) and Def^k smooth"] == "set"


def test_morphism_identity_and_zero():
    cover = make_p1_cover(3)
    O = make_line_bundle(0, cover)
    ident = deform_morphism_report(SheafMorphism.identity(O))
    assert ident.passed and ident.dims["H(Tot)"] == [1, 0, 0]
    zero = deform_morphism_report(SheafMorphism.zero(O, make_line_bundle(0, cover)))
    assert zero.passed and zero.dims["tangent"] == 1


@pytest.mark.parametrize("name", list(PAIR_CASES))
def test_routes_agree(name):
    degs, vecs, _ = PAIR_CASES[name]
    S = system(degs, vecs)
    a = pair_EU_report(S)
    b = deform_morphism_report(system_as_morphism(S))
    assert a.dims["H(Tot)"] == b.dims["H(Tot)"]


def _extends_oracle(a21):
    # for E = O ⊕ O(−2) and s = (1, 0): σ_1 = z²(σ_0 + a21) has a regular solution iff a21 has no z^{-1} term
    return (-1,) not in a21


coef = st.integers(-2, 2)
laurent = st.dictionaries(st.tuples(st.integers(-3, 3)), coef.filter(bool).map(Fraction), max_size=3)


@settings(max_examples=20)
@given(laurent, laurent, laurent)
def test_section_extension_against_oracle(a11, a21, a12):
    S = system([0, -2], [[ONE, {}]])
    E = S.sheaf
    a = end_cocycle(E, {(0, 0): a11, (1, 0): a21, (0, 1): a12})
    out = section_extension(E, a, S.sections[0])
    assert out["extends"] == _extends_oracle(a21)
    if out["extends"]:
        assert out["verified"]
    else:
        assert out["certificate_nonzero_verified"]


def test_defk():
    E = system([0, -2], [[ONE, {}]]).sheaf
    rep = defk_tangent(E, 1, probes=[[1], [0], [-3]])
    assert rep.dims["tangent"] == 0 and rep.passed
    assert [t["member"] for t in rep.witnesses["membership"]] == [False, True, False]
    O1 = make_line_bundle(1, make_p1_cover(4))
    rep = defk_tangent(O1, 1)
    assert rep.dims["h1(End E)"] == 0 and rep.flags["mode"].startswith("tangent cone")
    with pytest.raises(KTooLarge):
        defk_tangent(O1, 3)


def test_circle_cover_rejected():
    E = trivial_sheaf(make_circle_cover())
    S = CoherentSystem(E, [global_section(E, [{"1": 1}])])
    with pytest.raises(HypothesisViolated):
        pair_EU_report(S)


def test_report_serialises_fractions():
    r = Report("x", True, dims={"a": Fraction(1, 2), "b": [Fraction(3)]})
    assert r.to_dict()["dims"] == {"a": "1/2", "b": [3]}
