"""Semicosimplicial dgLas, their total complexes, and the Z¹_sc / H¹_sc conditions.

``cofaces[i-1][k]`` is ∂_{k,i}: g_{i-1} → g_i for k = 0..i.  The total complex
has degree-p component ⊕_n g_n^{p-n} with labels ``(n, label)`` and
differential D = Σ_n (−1)^n d_n + Σ_i Σ_k (−1)^k ∂_{k,i}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .artin import ArtinAlgebra, NilpotentElement, bch, gauge, make_artin, mc_residual
from .complexes import CochainComplex, GradedMap, GradedVectorSpace, check_complex, cohomology_at
from .dgla import DGLA, DGLAMorphism, abelian_dgla, direct_sum, validate_morphism
from .errors import InvalidSc, NegativeDegreesPresent, ShapeMismatch
from .linalg import SparseMatrix, rank


@dataclass
class ScDGLA:
    levels: list
    cofaces: list  # cofaces[i-1][k] = ∂_{k,i}
    name: str = ""

    def __post_init__(self):
        if len(self.cofaces) != len(self.levels) - 1:
            raise InvalidSc("need one list of cofaces per positive level")
        for i, faces in enumerate(self.cofaces, start=1):
            if len(faces) != i + 1:
                raise InvalidSc(f"level {i} needs {i + 1} cofaces, got {len(faces)}")
            for f in faces:
                if f.source is not self.levels[i - 1] or f.target is not self.levels[i]:
                    raise InvalidSc(f"coface into level {i} has the wrong source or target")

    def face(self, k: int, i: int) -> DGLAMorphism:
        return self.cofaces[i - 1][k]

    @property
    def top(self) -> int:
        return len(self.levels) - 1


@dataclass
class ScReport:
    violations: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.violations


def validate_scdgla(s: ScDGLA, check_morphisms: bool = True, bracket_labels: dict | None = None) -> ScReport:
    """Cosimplicial identities on every basis label, and coface morphism checks.

    ``bracket_labels`` optionally restricts, per level, which labels enter
    the bracket-preservation check (the d-commutation check is exhaustive).
    """
    rep = ScReport()
    for i in range(1, s.top):
        src = s.levels[i - 1]
        for k in range(i + 1):
            for l in range(k + 1):
                f1, f2 = s.face(k + 1, i + 1), s.face(l, i)
                g1, g2 = s.face(l, i + 1), s.face(k, i)
                for a in src.labels():
                    if f1(f2.image(a)) != g1(g2.image(a)):
                        rep.violations.append(("identity", (k, l, i), a))
                        break
    if check_morphisms:
        for i, faces in enumerate(s.cofaces, start=1):
            labs = None if bracket_labels is None else bracket_labels.get(i - 1)
            for k, f in enumerate(faces):
                r = validate_morphism(f, labs)
                for v in r.violations:
                    rep.violations.append(("morphism", (k, i), v))
    return rep


def constant_scdgla(g: DGLA, top: int) -> ScDGLA:
    levels = [g] * (top + 1)
    ident = DGLAMorphism.identity(g)
    return ScDGLA(levels, [[ident] * (i + 1) for i in range(1, top + 1)], name=f"const({g.name})")


def sc_from_pair(h: DGLAMorphism, g: DGLAMorphism) -> ScDGLA:
    """L × N ⇉ M → 0 with ∂_0 = h∘pr_L and ∂_1 = g∘pr_N."""
    if h.target is not g.target:
        raise ShapeMismatch("h and g must share the target")
    L, N, M = h.source, g.source, h.target
    LN = direct_sum(L, N, ("L", "N"))
    d0 = DGLAMorphism(LN, M, lambda a: h.image(a[1]) if a[0] == "L" else {})
    d1 = DGLAMorphism(LN, M, lambda a: g.image(a[1]) if a[0] == "N" else {})
    zero = abelian_dgla({}, name="0")
    z = [DGLAMorphism.zero(M, zero) for _ in range(3)]
    return ScDGLA([LN, M, zero], [[d0, d1], z], name="pair")


def total_complex(s: ScDGLA, check: bool = True) -> CochainComplex:
    comp: dict[int, list] = {}
    for n, g in enumerate(s.levels):
        for q in g.space.degrees():
            comp.setdefault(n + q, []).extend((n, lab) for lab in g.space.labels(q))
    space = GradedVectorSpace(comp)

    def image(p, lab):
        n, a = lab
        g = s.levels[n]
        sg = -1 if n % 2 else 1
        out = {(n, k): sg * v for k, v in g.d_basis(a).items()}
        if n < s.top:
            for k, f in enumerate(s.cofaces[n]):
                sk = -1 if k % 2 else 1
                for t, v in f.image(a).items():
                    key = (n + 1, t)
                    out[key] = out.get(key, 0) + sk * v
        return {k: v for k, v in out.items() if v}

    c = CochainComplex(space, GradedMap.from_label_fn(space, space, 1, image))
    if check and not check_complex(c):
        raise InvalidSc("total differential does not square to zero")
    return c


# ------------------------------------------------------------- Z¹_sc checks


def push(f: DGLAMorphism, x: NilpotentElement) -> NilpotentElement:
    """Apply a dgLa morphism to an element of L ⊗ m_A."""
    out: dict = {}
    for mon, v in x.parts().items():
        for k, c in f(v).items():
            out[(k, mon)] = c
    return NilpotentElement(f.target, x.algebra, out, x.degree)


def _require_nonnegative(s: ScDGLA):
    for n, g in enumerate(s.levels):
        degs = g.space.degrees()
        if degs and min(degs) < 0:
            raise NegativeDegreesPresent(
                f"level {n} has degree {min(degs)}; the general condition needs a degree −1 witness, not supported")


@dataclass
class Z1Result:
    ok: bool
    violated: list  # subset of ["mc", "gauge", "cocycle"]

    def __bool__(self):
        return self.ok


def z1_residuals(s: ScDGLA, l: NilpotentElement, m: NilpotentElement) -> dict:
    """The three defining expressions; all vanish exactly on Z¹_sc."""
    if l.carrier is not s.levels[0] or l.degree != 1:
        raise ShapeMismatch("l must be a degree-1 element of level 0")
    if m.carrier is not s.levels[1] or m.degree != 0:
        raise ShapeMismatch("m must be a degree-0 element of level 1")
    out = {"mc": mc_residual(l)}
    out["gauge"] = push(s.face(1, 1), l) - gauge(m, push(s.face(0, 1), l))
    if s.top >= 2:
        out["cocycle"] = bch(bch(push(s.face(0, 2), m), -push(s.face(1, 2), m)), push(s.face(2, 2), m))
    return out


def z1sc_check(s: ScDGLA, A: ArtinAlgebra, l: NilpotentElement, m: NilpotentElement) -> Z1Result:
    _require_nonnegative(s)
    if l.algebra is not A or m.algebra is not A:
        raise ShapeMismatch("elements are not over the given Artin algebra")
    res = z1_residuals(s, l, m)
    bad = [k for k, v in res.items() if not v.is_zero()]
    return Z1Result(not bad, bad)


def z1sc_equiv(s: ScDGLA, A: ArtinAlgebra, e0: tuple, e1: tuple, a: NilpotentElement) -> bool:
    """e^a * l0 = l1 and (−m0) • (−∂_{1,1}a) • m1 • ∂_{0,1}a = 0."""
    _require_nonnegative(s)
    l0, m0 = e0
    l1, m1 = e1
    if a.carrier is not s.levels[0] or a.degree != 0 or a.algebra is not A:
        raise ShapeMismatch("a must be a degree-0 element of level 0 over A")
    if gauge(a, l0) != l1:
        return False
    chain = bch(bch(bch(-m0, -push(s.face(1, 1), a)), m1), push(s.face(0, 1), a))
    return chain.is_zero()


def h1sc_first_order(s: ScDGLA) -> int:
    """dim Z¹_sc(K[ε]) modulo the equivalence, computed from the nonlinear conditions.

    Over the dual numbers every bracket dies, so each condition is linear and
    can be evaluated on basis vectors.
    """
    _require_nonnegative(s)
    if s.top < 1:
        raise ShapeMismatch("need at least two levels")
    A = make_artin("dual_numbers")
    g0, g1 = s.levels[0], s.levels[1]
    unknowns = [("l", lab) for lab in g0.space.labels(1)] + [("m", lab) for lab in g1.space.labels(0)]
    zl = NilpotentElement.zero(g0, A, 1)
    zm = NilpotentElement.zero(g1, A, 0)
    rows: dict = {}
    cols = []
    for kind, lab in unknowns:
        e = NilpotentElement(g0 if kind == "l" else g1, A, {(lab, "eps"): 1})
        res = z1_residuals(s, e if kind == "l" else zl, e if kind == "m" else zm)
        col = {}
        for name, v in res.items():
            for key, c in v.coeffs.items():
                col[rows.setdefault((name, key), len(rows))] = c
        cols.append(col)
    Z = SparseMatrix.from_columns(len(rows), cols)
    dim_z = len(unknowns) - rank(Z)
    # equivalence at first order: a ↦ (e^a * 0, ∂_{1,1}a • −∂_{0,1}a)
    uidx = {u: i for i, u in enumerate(unknowns)}
    bcols = []
    for lab in g0.space.labels(0):
        a = NilpotentElement(g0, A, {(lab, "eps"): 1})
        col = {}
        for (k, _), c in gauge(a, zl).coeffs.items():
            col[uidx[("l", k)]] = c
        for (k, _), c in bch(push(s.face(1, 1), a), -push(s.face(0, 1), a)).coeffs.items():
            col[uidx[("m", k)]] = col.get(uidx[("m", k)], 0) + c
        bcols.append({i: c for i, c in col.items() if c})
    B = SparseMatrix.from_columns(len(unknowns), bcols)
    # B lands in Z: sanity check
    if not (Z @ B).is_zero():
        raise InvalidSc("equivalences do not preserve Z¹_sc; cofaces are not morphisms")
    return dim_z - rank(B)


def h1_total(s: ScDGLA) -> int:
    return cohomology_at(total_complex(s), 1, reps=False).dim


# ------------------------------------------------------ two-level groupoid


def total_groupoid_object_check(h: DGLAMorphism, g: DGLAMorphism, x: NilpotentElement, y: NilpotentElement,
                                w: NilpotentElement) -> bool:
    """(x, y, e^w) is an object: x, y are MC and e^w * h(x) = g(y)."""
    if h.target is not g.target:
        raise ShapeMismatch("h and g must share the target")
    if x.carrier is not h.source or y.carrier is not g.source or w.carrier is not h.target:
        raise ShapeMismatch("x, y, w do not live in L, N, M")
    if x.degree != 1 or y.degree != 1 or w.degree != 0:
        raise ShapeMismatch("x, y need degree 1 and w degree 0")
    if not mc_residual(x).is_zero() or not mc_residual(y).is_zero():
        return False
    return gauge(w, push(h, x)) == push(g, y)


def total_groupoid_morphism_check(h: DGLAMorphism, g: DGLAMorphism, w: NilpotentElement, t: NilpotentElement,
                                  a_l: NilpotentElement, a_n: NilpotentElement) -> bool:
    """e^w e^{h(a)} = e^t e^{g(a)} in exp(M⁰ ⊗ m_A)."""
    if h.target is not g.target:
        raise ShapeMismatch("h and g must share the target")
    return bch(w, push(h, a_l)) == bch(t, push(g, a_n))

