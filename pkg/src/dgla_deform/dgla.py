"""Differential graded Lie algebras, morphisms, K[t,dt]-valued forms and cones.

Elements are sparse dicts ``label -> Fraction``.  Labels are unique across
all degrees, so an element's support determines its degrees.

Brackets come either from a table over stored ordered pairs ``(a, b)`` with
``a`` not after ``b`` in basis order (the other half is reconstructed by
graded skew-symmetry), or from a callable evaluated lazily and cached.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping

from .complexes import (ChainMap, CochainComplex, GradedMap, GradedVectorSpace, cone, long_exact_sequence,
                        quotient_complex, subcomplex)
from .errors import BaseMismatch, DegreeError, ShapeMismatch, UnknownLabel, WindowOverflow
from .linalg import block_matrix, frac, vadd, vscale

Element = dict


def sign(k: int) -> int:
    return -1 if k % 2 else 1


class DGLA:
    def __init__(self, space: GradedVectorSpace, differential: Mapping[Hashable, Mapping] | None = None,
                 bracket: Mapping[tuple, Mapping] | None = None,
                 bracket_fn: Callable[[Hashable, Hashable], Mapping] | None = None,
                 name: str = ""):
        if bracket is not None and bracket_fn is not None:
            raise ValueError("give either a bracket table or a bracket function")
        self.space = space
        self.name = name
        self._deg: dict = {}
        self._order: dict = {}
        for n in space.degrees():
            for lab in space.labels(n):
                if lab in self._deg:
                    raise ShapeMismatch(f"label {lab!r} appears in two degrees")
                self._deg[lab] = n
                self._order[lab] = len(self._order)
        self._d = {}
        for lab, img in (differential or {}).items():
            if lab not in self._deg:
                raise UnknownLabel(f"differential of unknown label {lab!r}")
            img = {k: frac(v) for k, v in img.items() if v}
            if img:
                self._d[lab] = img
        self._table = None
        self._fn = bracket_fn
        if bracket_fn is None:
            table = {}
            for (a, b), img in (bracket or {}).items():
                for lab in (a, b):
                    if lab not in self._deg:
                        raise UnknownLabel(f"bracket refers to unknown label {lab!r}")
                if self._order[a] > self._order[b]:
                    raise ShapeMismatch(f"bracket table key {(a, b)!r} is not an ordered pair")
                img = {k: frac(v) for k, v in img.items() if v}
                if img:
                    table[(a, b)] = img
            self._table = table
        self._cache: dict = {}

    # basis data
    def labels(self) -> list:
        return list(self._deg)

    def degree(self, label) -> int:
        try:
            return self._deg[label]
        except KeyError:
            raise UnknownLabel(f"unknown label {label!r}") from None

    def has(self, label) -> bool:
        return label in self._deg

    def dim(self, n=None) -> int:
        return len(self._deg) if n is None else self.space.dim(n)

    def d_basis(self, a) -> dict:
        self.degree(a)
        return self._d.get(a, {})

    def bracket_basis(self, a, b) -> dict:
        key = (a, b)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self._fn is not None:
            self.degree(a)
            self.degree(b)
            out = {k: frac(v) for k, v in (self._fn(a, b) or {}).items() if v}
        elif self._order[a] <= self._order[b]:
            out = self._table.get((a, b), {})
        else:
            s = -sign(self._deg[a] * self._deg[b])
            out = vscale(self._table.get((b, a), {}), s)
        self._cache[key] = out
        return out

    def table(self) -> dict:
        if self._table is None:
            raise ValueError("bracket is given by a function")
        return dict(self._table)

    def differential_table(self) -> dict:
        return {k: dict(v) for k, v in self._d.items()}

    # element operations
    def d(self, x: Mapping) -> Element:
        out: dict = {}
        for a, c in x.items():
            img = self.d_basis(a)
            if img:
                out = vadd(out, img, c)
        return out

    def bracket(self, x: Mapping, y: Mapping) -> Element:
        out: dict = {}
        for a, ca in x.items():
            for b, cb in y.items():
                img = self.bracket_basis(a, b)
                if img:
                    out = vadd(out, img, ca * cb)
        return out

    def element_degree(self, x: Mapping) -> int | None:
        degs = {self.degree(a) for a in x}
        if len(degs) > 1:
            raise DegreeError(f"element is not homogeneous: degrees {sorted(degs)}")
        return degs.pop() if degs else None

    def complex(self) -> CochainComplex:
        return CochainComplex(self.space, GradedMap.from_label_fn(self.space, self.space, 1,
                                                                  lambda n, lab: self._d.get(lab, {})))

    def __repr__(self):
        dims = {n: self.space.dim(n) for n in self.space.degrees()}
        return f"DGLA({self.name or 'unnamed'}, {dims})"


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    kind: str  # degree | d_squared | skew | jacobi | leibniz
    labels: tuple
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    skipped: int = 0

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def __bool__(self):
        return self.valid


def _check_labels(g: DGLA, img: Mapping, where):
    for lab in img:
        if not g.has(lab):
            raise UnknownLabel(f"{where} produces unknown label {lab!r}")


def _safe(fn, *args):
    try:
        return fn(*args)
    except WindowOverflow:
        return None


def validate_dgla(g: DGLA, labels: Iterable | None = None, triples: Iterable[tuple] | None = None,
                  stop_after: int | None = None) -> ValidationReport:
    """Machine-check the dgLa axioms on basis tuples.

    ``labels`` restricts pairs; ``triples`` restricts the Jacobi check (default:
    all ordered triples of ``labels``).  Tuples whose evaluation leaves a
    finite window are counted in ``skipped``.
    """
    labs = list(labels) if labels is not None else g.labels()
    rep = ValidationReport()

    def add(v):
        rep.violations.append(v)
        return stop_after is not None and len(rep.violations) >= stop_after

    for a in labs:
        da = g.d_basis(a)
        _check_labels(g, da, f"d({a!r})")
        for lab in da:
            if g.degree(lab) != g.degree(a) + 1:
                if add(Violation("degree", (a,), f"d({a!r}) hits {lab!r}")):
                    return rep
        dda = g.d(da)
        if dda:
            if add(Violation("d_squared", (a,), f"d(d({a!r})) = {dda}")):
                return rep

    for a in labs:
        for b in labs:
            ab = _safe(g.bracket_basis, a, b)
            ba = _safe(g.bracket_basis, b, a)
            if ab is None or ba is None:
                rep.skipped += 1
                continue
            _check_labels(g, ab, f"[{a!r},{b!r}]")
            want = g.degree(a) + g.degree(b)
            bad = [lab for lab in ab if g.degree(lab) != want]
            if bad:
                if add(Violation("degree", (a, b), f"[{a!r},{b!r}] hits {bad[0]!r}")):
                    return rep
            if vadd(ab, ba, sign(g.degree(a) * g.degree(b))):
                if add(Violation("skew", (a, b))):
                    return rep
            lhs = _safe(lambda: g.d(ab))
            r1 = _safe(lambda: g.bracket(g.d_basis(a), {b: 1}))
            r2 = _safe(lambda: g.bracket({a: 1}, g.d_basis(b)))
            if lhs is None or r1 is None or r2 is None:
                rep.skipped += 1
                continue
            if vadd(lhs, vadd(r1, r2, sign(g.degree(a))), -1):
                if add(Violation("leibniz", (a, b))):
                    return rep

    if triples is None:
        triples = itertools.product(labs, repeat=3)
    for a, b, c in triples:
        # [a,[b,c]] = [[a,b],c] + (-1)^{|a||b|} [b,[a,c]]
        try:
            lhs = g.bracket({a: 1}, g.bracket_basis(b, c))
            r1 = g.bracket(g.bracket_basis(a, b), {c: 1})
            r2 = g.bracket({b: 1}, g.bracket_basis(a, c))
        except WindowOverflow:
            rep.skipped += 1
            continue
        if vadd(lhs, vadd(r1, r2, sign(g.degree(a) * g.degree(b))), -1):
            if add(Violation("jacobi", (a, b, c))):
                return rep
    return rep


# ---------------------------------------------------------------- morphisms


class DGLAMorphism:
    def __init__(self, source: DGLA, target: DGLA, images: Mapping[Hashable, Mapping] | Callable):
        self.source = source
        self.target = target
        if callable(images):
            self._fn = images
            self._img = None
        else:
            self._fn = None
            self._img = {}
            for a, v in images.items():
                source.degree(a)
                v = {k: frac(c) for k, c in v.items() if c}
                if v:
                    self._img[a] = v
        self._cache = {}

    def image(self, a) -> dict:
        if self._img is not None:
            self.source.degree(a)
            return self._img.get(a, {})
        hit = self._cache.get(a)
        if hit is None:
            hit = {k: frac(c) for k, c in (self._fn(a) or {}).items() if c}
            self._cache[a] = hit
        return hit

    def __call__(self, x: Mapping) -> Element:
        out: dict = {}
        for a, c in x.items():
            img = self.image(a)
            if img:
                out = vadd(out, img, c)
        return out

    def graded_map(self) -> GradedMap:
        return GradedMap.from_label_fn(self.source.space, self.target.space, 0, lambda n, a: self.image(a))

    def chain_map(self, source_complex=None, target_complex=None) -> ChainMap:
        return ChainMap(source_complex or self.source.complex(), target_complex or self.target.complex(),
                        self.graded_map())

    def compose(self, inner: "DGLAMorphism") -> "DGLAMorphism":
        if inner.target is not self.source:
            raise BaseMismatch("composition of morphisms with mismatched algebras")
        return DGLAMorphism(inner.source, self.target, lambda a: self(inner.image(a)))

    @classmethod
    def identity(cls, g: DGLA):
        return cls(g, g, {a: {a: 1} for a in g.labels()})

    @classmethod
    def zero(cls, source: DGLA, target: DGLA):
        return cls(source, target, {})


def validate_morphism(f: DGLAMorphism, labels: Iterable | None = None) -> ValidationReport:
    S, T = f.source, f.target
    labs = list(labels) if labels is not None else S.labels()
    rep = ValidationReport()
    for a in labs:
        img = f.image(a)
        _check_labels(T, img, f"f({a!r})")
        for lab in img:
            if T.degree(lab) != S.degree(a):
                rep.violations.append(Violation("degree", (a,), f"f({a!r}) hits {lab!r}"))
        try:
            if vadd(T.d(img), f(S.d_basis(a)), -1):
                rep.violations.append(Violation("d_commute", (a,)))
        except WindowOverflow:
            rep.skipped += 1
    for a in labs:
        for b in labs:
            try:
                lhs = f(S.bracket_basis(a, b))
                rhs = T.bracket(f.image(a), f.image(b))
            except WindowOverflow:
                rep.skipped += 1
                continue
            if vadd(lhs, rhs, -1):
                rep.violations.append(Violation("bracket", (a, b)))
    return rep


# ---------------------------------------------------------------- builders


def abelian_dgla(components: Mapping[int, Iterable], differential: Mapping | None = None, name="abelian") -> DGLA:
    return DGLA(GradedVectorSpace(components), differential or {}, {}, name=name)


def _matrix_unit(i, j):
    return ("E", i, j)


def matrix_dgla(degrees: list[int], delta: Mapping[tuple[int, int], object] | None = None, name="End") -> DGLA:
    """End(V) for a graded V with basis v_0..v_{r-1} of the given degrees.

    E(i,j) sends v_j to v_i and has degree deg(i) - deg(j).  The bracket is the
    graded commutator and d = [δ, -] for a degree-one δ with δ² = 0, given as
    ``{(i, j): coeff}``.
    """
    r = len(degrees)
    comp: dict[int, list] = {}
    for i in range(r):
        for j in range(r):
            comp.setdefault(degrees[i] - degrees[j], []).append(_matrix_unit(i, j))
    space = GradedVectorSpace(comp)
    deg = {_matrix_unit(i, j): degrees[i] - degrees[j] for i in range(r) for j in range(r)}
    delta = {k: frac(v) for k, v in (delta or {}).items() if v}
    for (i, j) in delta:
        if degrees[i] - degrees[j] != 1:
            raise DegreeError(f"δ entry ({i},{j}) does not have degree 1")

    def comm(a, b):
        _, i, j = a
        _, k, l = b
        out = {}
        if j == k:
            out[_matrix_unit(i, l)] = Fraction(1)
        if l == i:
            key = _matrix_unit(k, j)
            out[key] = out.get(key, 0) - sign(deg[a] * deg[b])
        return {k2: v for k2, v in out.items() if v}

    labels = [lab for n in space.degrees() for lab in space.labels(n)]
    order = {lab: p for p, lab in enumerate(labels)}
    table = {}
    for a in labels:
        for b in labels:
            if order[a] <= order[b]:
                img = comm(a, b)
                if img:
                    table[(a, b)] = img
    dmat = {}
    for a in labels:
        img: dict = {}
        for (i, j), c in delta.items():
            img = vadd(img, comm(_matrix_unit(i, j), a), c)
        if img:
            dmat[a] = img
    return DGLA(space, dmat, table, name=name)


def gl(n: int) -> DGLA:
    return matrix_dgla([0] * n, name=f"gl{n}")


def direct_sum(g: DGLA, h: DGLA, tags=(0, 1)) -> DGLA:
    t0, t1 = tags
    space = g.space.direct_sum(h.space, tags)
    d = {}
    for a, img in g.differential_table().items():
        d[(t0, a)] = {(t0, k): v for k, v in img.items()}
    for a, img in h.differential_table().items():
        d[(t1, a)] = {(t1, k): v for k, v in img.items()}

    def br(x, y):
        if x[0] != y[0]:
            return {}
        alg = g if x[0] == t0 else h
        return {(x[0], k): v for k, v in alg.bracket_basis(x[1], y[1]).items()}

    return DGLA(space, d, bracket_fn=br, name=f"{g.name}+{h.name}")


def inclusion(g: DGLA, total: DGLA, tag) -> DGLAMorphism:
    return DGLAMorphism(g, total, {a: {(tag, a): 1} for a in g.labels()})


# ----------------------------------------------------------- K[t,dt] forms


def _norm(parts: Mapping[int, Mapping]) -> dict:
    return {k: dict(v) for k, v in parts.items() if v}


class PolyFormElement:
    """Σ t^k ⊗ a_k + Σ t^k dt ⊗ b_k with coefficients in a dgLa (forms on the left)."""

    __slots__ = ("base", "t_part", "dt_part")

    def __init__(self, base: DGLA, t_part: Mapping[int, Mapping] | None = None,
                 dt_part: Mapping[int, Mapping] | None = None):
        self.base = base
        self.t_part = _norm({k: {a: frac(c) for a, c in v.items() if c} for k, v in (t_part or {}).items()})
        self.dt_part = _norm({k: {a: frac(c) for a, c in v.items() if c} for k, v in (dt_part or {}).items()})
        for part in (self.t_part, self.dt_part):
            for k, v in part.items():
                if k < 0:
                    raise DegreeError("negative power of t")
                for a in v:
                    base.degree(a)

    @classmethod
    def constant(cls, base, a):
        return cls(base, {0: a})

    def __eq__(self, other):
        return (isinstance(other, PolyFormElement) and self.base is other.base
                and self.t_part == other.t_part and self.dt_part == other.dt_part)

    __hash__ = None

    def __add__(self, other):
        _same_base(self, other)
        return PolyFormElement(self.base, _add_parts(self.t_part, other.t_part),
                               _add_parts(self.dt_part, other.dt_part))

    def scale(self, s):
        return PolyFormElement(self.base, {k: vscale(v, s) for k, v in self.t_part.items()},
                               {k: vscale(v, s) for k, v in self.dt_part.items()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def is_zero(self):
        return not self.t_part and not self.dt_part

    def __repr__(self):
        return f"PolyFormElement(t={self.t_part}, dt={self.dt_part})"


def _add_parts(p, q, s=1):
    out = {k: dict(v) for k, v in p.items()}
    for k, v in q.items():
        out[k] = vadd(out.get(k, {}), v, s)
    return _norm(out)


def _same_base(x, y):
    if x.base is not y.base:
        raise BaseMismatch("forms over different dgLas")


def poly_eval(x: PolyFormElement, t0) -> Element:
    t0 = frac(t0)
    out: dict = {}
    for k, a in x.t_part.items():
        out = vadd(out, a, t0 ** k)
    return out


def poly_d(x: PolyFormElement) -> PolyFormElement:
    g = x.base
    t: dict = {}
    dt: dict = {}
    for k, a in x.t_part.items():
        t[k] = vadd(t.get(k, {}), g.d(a))
        if k:
            dt[k - 1] = vadd(dt.get(k - 1, {}), a, k)
    for k, b in x.dt_part.items():
        dt[k] = vadd(dt.get(k, {}), g.d(b), -1)
    return PolyFormElement(g, t, dt)


def _split_by_degree(g: DGLA, a: Mapping) -> dict[int, dict]:
    out: dict = {}
    for lab, c in a.items():
        out.setdefault(g.degree(lab), {})[lab] = c
    return out


def poly_bracket(x: PolyFormElement, y: PolyFormElement) -> PolyFormElement:
    """[f⊗a, g⊗b] = (−1)^{|a||g|} fg ⊗ [a, b], with dt·dt = 0."""
    _same_base(x, y)
    g = x.base
    t: dict = {}
    dt: dict = {}
    for k, a in x.t_part.items():
        for l, b in y.t_part.items():
            t[k + l] = vadd(t.get(k + l, {}), g.bracket(a, b))
        for l, b in y.dt_part.items():
            # |g| = 1: sign (−1)^{|a|}
            for n, ah in _split_by_degree(g, a).items():
                dt[k + l] = vadd(dt.get(k + l, {}), g.bracket(ah, b), sign(n))
    for k, a in x.dt_part.items():
        for l, b in y.t_part.items():
            dt[k + l] = vadd(dt.get(k + l, {}), g.bracket(a, b))
    return PolyFormElement(g, t, dt)


def poly_map(f: DGLAMorphism, x: PolyFormElement) -> PolyFormElement:
    if x.base is not f.source:
        raise BaseMismatch("form is not over the morphism's source")
    return PolyFormElement(f.target, {k: f(v) for k, v in x.t_part.items()},
                           {k: f(v) for k, v in x.dt_part.items()})


# ------------------------------------------------------ homotopy fibre product


@dataclass
class HtpyFiberElement:
    l: dict
    n: dict
    m: PolyFormElement


def htpy_fiber_check(h: DGLAMorphism, g: DGLAMorphism, e: HtpyFiberElement) -> bool:
    if h.target is not g.target or e.m.base is not h.target:
        raise BaseMismatch("h, g and m must share the target dgLa")
    return poly_eval(e.m, 0) == h(e.l) and poly_eval(e.m, 1) == g(e.n)


def htpy_fiber_d(h, g, e: HtpyFiberElement) -> HtpyFiberElement:
    return HtpyFiberElement(h.source.d(e.l), g.source.d(e.n), poly_d(e.m))


def htpy_fiber_bracket(h, g, x: HtpyFiberElement, y: HtpyFiberElement) -> HtpyFiberElement:
    return HtpyFiberElement(h.source.bracket(x.l, y.l), g.source.bracket(x.n, y.n), poly_bracket(x.m, y.m))


def _sum_complex(L: CochainComplex, N: CochainComplex) -> CochainComplex:
    space = L.space.direct_sum(N.space, ("L", "N"))
    blocks = {}
    for n in space.degrees():
        blocks[n] = block_matrix([[L.d(n), None], [None, N.d(n)]], [L.dim(n + 1), N.dim(n + 1)], [L.dim(n), N.dim(n)])
    return CochainComplex(space, GradedMap(space, space, 1, blocks))


def cone_of_pair(hc: ChainMap, gc: ChainMap) -> tuple[CochainComplex, ChainMap]:
    """Complex-level cone of (l, n) ↦ h l − g n, with the combined map."""
    if hc.target is not gc.target and hc.target != gc.target:
        raise BaseMismatch("h and g must share the target complex")
    LN = _sum_complex(hc.source, gc.source)
    blocks = {}
    M = hc.target
    for n in LN.degrees():
        blocks[n] = block_matrix([[hc.block(n), gc.block(n).scale(-1)]], [M.dim(n)],
                                 [hc.source.dim(n), gc.source.dim(n)])
    f = ChainMap(LN, M, GradedMap(LN.space, M.space, 0, blocks))
    return cone(f), f


def mapping_cone(h: DGLAMorphism, g: DGLAMorphism) -> CochainComplex:
    """Degree n: L^n ⊕ N^n ⊕ M^{n−1}, D(l, n, m) = (dl, dn, h l − g n − dm)."""
    if h.target is not g.target:
        raise BaseMismatch("h and g must share the target dgLa")
    M = h.target.complex()
    c, _ = cone_of_pair(h.chain_map(None, M), g.chain_map(None, M))
    return c


def cone_les(h: DGLAMorphism, g: DGLAMorphism, degrees=(0, 1, 2)):
    """LES H(M)[−1] → H(cone) → H(L⊕N) → H(M) → … around the given degrees."""
    if h.target is not g.target:
        raise BaseMismatch("h and g must share the target dgLa")
    M = h.target.complex()
    c, _ = cone_of_pair(h.chain_map(None, M), g.chain_map(None, M))
    sub, inc = subcomplex(c, lambda n, lab: lab[0] == "B")
    q, proj = quotient_complex(c, lambda n, lab: lab[0] == "B")
    return long_exact_sequence(inc, proj, degrees)
