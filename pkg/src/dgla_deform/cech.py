"""Windowed Čech semicosimplicial dgLas of sheaves of dgLas, cohomology and cup products.

Basis labels at level n are ``(σ, f, m)``: a simplex of dimension n, a fibre
label and a monomial of the ring of V_σ, in the frame of chart σ[0].  Windows
are chosen per ``(σ, f)``: level 0 uses the cover window widened by a margin,
every other window is the box hull of everything the differential and the
cofaces can hit, which makes the truncation a subcomplex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping

from .complexes import (ChainMap, CochainComplex, CohomologyGroup, GradedMap, GradedVectorSpace, cohomology,
                        vector_from_labels, vector_to_labels)
from .dgla import DGLA, DGLAMorphism
from .errors import CoverMismatch, WindowOverflow, WindowUnstable
from .linalg import vadd
from .rings import LaurentRing, RingMatrix, radd
from .semicosimplicial import ScDGLA, total_complex
from .sheaves import CoverModel, SheafDGLA, SheafPresentation, abelian_sheaf_dgla, box_monomials

TOP_LEVEL = 2


def _face(s, k):
    return s[:k] + s[k + 1:]


class CechScDGLA:
    """The sc dgLa ∏ L(V_i) ⇉ ∏ L(V_ij) ⇛ ∏ L(V_ijk), windowed."""

    def __init__(self, sd: SheafDGLA, margin: int = 0):
        self.sd = sd
        self.cover: CoverModel = sd.cover
        self.margin = margin
        self.laurent = self.cover.is_laurent()
        self._cofaces_of = {}
        for n in range(1, TOP_LEVEL + 1):
            for s in self.cover.simplices(n):
                for k in range(n + 1):
                    self._cofaces_of.setdefault((k, _face(s, k)), []).append(s)
        self.windows: dict = {}
        self._compute_windows()
        self.levels = [self._level(n) for n in range(TOP_LEVEL + 1)]
        cofaces = []
        for n in range(1, TOP_LEVEL + 1):
            cofaces.append([DGLAMorphism(self.levels[n - 1], self.levels[n], self._coface_fn(k, n))
                            for k in range(n + 1)])
        self.sc = ScDGLA(self.levels, cofaces, name=f"Cech({sd.name})")

    # raw images, before windowing
    def d_image(self, s, f, m) -> dict:
        D = self.sd.d_matrix(s[0])
        if D is None:
            return {}
        R = self.cover.ring(s)
        col = self.sd.index(f)
        out = {}
        for r, (g, _) in enumerate(self.sd.fiber):
            e = D.entries[r][col]
            if e:
                for mm, c in R.mul(e, {m: 1}).items():
                    out[(g, mm)] = c
        return out

    def restrict_image(self, k, s, f, m) -> dict:
        """∂_k of the basis section (face_k(s), f, m), seen on s."""
        if k != 0:
            return {(f, m): 1}
        R = self.cover.ring(s)
        T = self.sd.transition(s[1], s[0])
        col = self.sd.index(f)
        out = {}
        for r, (g, _) in enumerate(self.sd.fiber):
            e = T.entries[r][col]
            if e:
                for mm, c in R.mul(e, {m: 1}).items():
                    out[(g, mm)] = c
        return out

    def _compute_windows(self):
        cover, sd = self.cover, self.sd
        degs = sorted({d for _, d in sd.fiber})
        for n in range(TOP_LEVEL + 1):
            for s in cover.simplices(n):
                if not self.laurent:
                    for f in sd.labels:
                        self.windows[(s, f)] = list(cover.basis(s))
                    continue
                R = cover.ring(s)
                boxes: dict = {}
                if n == 0:
                    lo, hi = cover.windows[s]
                    lo = tuple(a - self.margin for a in lo)
                    hi = tuple(b + self.margin for b in hi)
                    for f in sd.labels:
                        boxes[f] = (lo, hi)
                for q in degs:
                    hits = []
                    for k in range(n + 1):
                        t = _face(s, k)
                        for f in sd.labels:
                            if sd.degree(f) == q:
                                for m in self.windows.get((t, f), ()):
                                    hits.extend(self.restrict_image(k, s, f, m))
                    for f in sd.labels:
                        if sd.degree(f) == q - 1:
                            for m in self._box_list(R, boxes.get(f)):
                                hits.extend(self.d_image(s, f, m))
                    for g, mm in hits:
                        boxes[g] = _grow(boxes.get(g), mm)
                for f in sd.labels:
                    self.windows[(s, f)] = self._box_list(R, boxes.get(f))

    @staticmethod
    def _box_list(R, box):
        if box is None:
            return []
        return box_monomials(R, *box)

    def _level(self, n) -> DGLA:
        sd = self.sd
        comps: dict = {}
        member = set()
        for s in self.cover.simplices(n):
            for f, q in sd.fiber:
                for m in self.windows[(s, f)]:
                    comps.setdefault(q, []).append((s, f, m))
                    member.add((s, f, m))
        space = GradedVectorSpace(comps)
        diff = {}
        for labs in comps.values():
            for lab in labs:
                img = {}
                for (g, mm), c in self.d_image(*lab).items():
                    key = (lab[0], g, mm)
                    if key not in member:
                        raise WindowOverflow(f"differential of {lab} leaves the window")
                    img[key] = c
                if img:
                    diff[lab] = img
        cover = self.cover

        def br(a, b):
            s, f1, m1 = a
            t, f2, m2 = b
            if s != t:
                return {}
            coeffs = sd.bracket_coeffs(s[0], f1, f2)
            if not coeffs:
                return {}
            R = cover.ring(s)
            p = R.mul({m1: 1}, {m2: 1})
            out = {}
            for f, c in coeffs.items():
                for mm, v in R.mul(p, c).items():
                    key = (s, f, mm)
                    if key not in member:
                        raise WindowOverflow(f"bracket of {a} and {b} leaves the window")
                    out[key] = out.get(key, 0) + v
            return out

        g = DGLA(space, diff, bracket_fn=br, name=f"C{n}({sd.name})")
        g.member = member
        return g

    def _coface_fn(self, k, n):
        member = self.levels[n].member

        def img(lab):
            t, f, m = lab
            out = {}
            for s in self._cofaces_of.get((k, t), ()):
                for (g, mm), c in self.restrict_image(k, s, f, m).items():
                    key = (s, g, mm)
                    if key not in member:
                        raise WindowOverflow(f"restriction of {lab} to {s} leaves the window")
                    out[key] = out.get(key, 0) + c
            return out

        return img

    @cached_property
    def total(self) -> CochainComplex:
        return total_complex(self.sc)

    def cohomology(self, degrees=None, reps=True) -> dict[int, CohomologyGroup]:
        degs = degrees if degrees is not None else self.total.degrees()
        return cohomology(self.total, degs, reps)

    def dims(self, degrees=None) -> dict[int, int]:
        return {n: h.dim for n, h in self.cohomology(degrees, reps=False).items()}


def _grow(box, m):
    if box is None:
        return (tuple(m), tuple(m))
    lo, hi = box
    return (tuple(min(a, e) for a, e in zip(lo, m)), tuple(max(b, e) for b, e in zip(hi, m)))


def build_cech_scdgla(sd: SheafDGLA, margin: int = 0) -> CechScDGLA:
    return CechScDGLA(sd, margin)


def _as_sheaf_dgla(x) -> SheafDGLA:
    if isinstance(x, SheafPresentation):
        return abelian_sheaf_dgla(x)
    return x


@dataclass
class CechCohomology:
    dims: dict
    stable: bool
    window: int | None
    cech: CechScDGLA = field(repr=False)

    def h(self, n) -> int:
        return self.dims.get(n, 0)


def cech_cohomology(sheaf, margin: int = 0, degrees=(0, 1, 2), strict: bool = True) -> CechCohomology:
    """Dims of windowed Čech cohomology, with the window-stability check.

    Stability compares the level-0 window widened by ``margin`` and by
    ``margin + 1``; unstable results raise WindowUnstable unless
    ``strict`` is false.
    """
    sd = _as_sheaf_dgla(sheaf)
    c0 = CechScDGLA(sd, margin)
    d0 = _full_dims(c0, degrees)
    if c0.laurent:
        d1 = _full_dims(CechScDGLA(sd, margin + 1), degrees)
        stable = d0 == d1
    else:
        stable = True
    if strict and not stable:
        raise WindowUnstable(f"cohomology of {sd.name} changes with the window: {d0} vs {d1}")
    w = sd.cover.window_size
    return CechCohomology(d0, stable, None if w is None else w + margin, c0)


def _full_dims(c: CechScDGLA, degrees) -> dict:
    present = set(c.total.degrees())
    return {n: (c.dims([n])[n] if n in present else 0) for n in degrees}


# ---------------------------------------------------------------- maps


def cech_chain_map(src: CechScDGLA, tgt: CechScDGLA, fiber_map: Callable[[int], RingMatrix]) -> ChainMap:
    """Chain map of total complexes induced by a fibrewise map given per chart."""
    if src.cover is not tgt.cover:
        raise CoverMismatch("Čech complexes over different covers")
    cover = src.cover
    tmember = set()
    for g in tgt.levels:
        tmember |= g.member
    cache = {}

    def mat(i):
        if i not in cache:
            cache[i] = fiber_map(i)
        return cache[i]

    def image(p, lab):
        n, (s, f, m) = lab
        M = mat(s[0])
        R = cover.ring(s)
        col = src.sd.index(f)
        out = {}
        for r, (g, _) in enumerate(tgt.sd.fiber):
            e = M.entries[r][col]
            if e:
                for mm, c in R.mul(e, {m: 1}).items():
                    key = (s, g, mm)
                    if key not in tmember:
                        raise WindowOverflow(f"image of {lab} leaves the target window; widen the target margin")
                    out[(n, key)] = out.get((n, key), 0) + c
        return out

    S, T = src.total, tgt.total
    return ChainMap(S, T, GradedMap.from_label_fn(S.space, T.space, 0, image))


# ---------------------------------------------------------------- cup product


def section_cochain(c: CechScDGLA, s: Mapping[int, list]) -> dict:
    """A global section of a rank-r sheaf as a degree-0 label vector of the total complex."""
    out = {}
    for i, vec in s.items():
        for a, x in enumerate(vec):
            f = c.sd.labels[a]
            for m, v in x.items():
                key = ((i,), f, m)
                if key not in c.levels[0].member:
                    raise WindowOverflow(f"section coefficient {key} is outside the window")
                out[(0, key)] = v
    return out


def cup_cochain(a: Mapping, s: Mapping[int, list], target: CechScDGLA) -> dict:
    """(a∪s)_σ = a_σ · s_{σ0} for a degree-1 End-valued cochain ``a``.

    ``a`` maps total-complex labels ``(1, (σ, ("E", i, j), m))`` to
    coefficients; the result lives in the Čech complex ``target`` of E.
    """
    cover = target.cover
    member = target.levels[1].member
    out: dict = {}
    for (n, (sig, f, m)), c in a.items():
        if n != 1 or len(sig) != 2:
            raise CoverMismatch("cup expects a Čech 1-cochain")
        _, i, j = f
        R = cover.ring(sig)
        for mm, v in R.mul({m: c}, s[sig[0]][j]).items():
            key = (sig, target.sd.labels[i], mm)
            if key not in member:
                raise WindowOverflow(f"cup product term {key} leaves the window")
            out[(1, key)] = out.get((1, key), 0) + v
    return {k: v for k, v in out.items() if v}


def classify(c: CechScDGLA, h: CohomologyGroup, labelled: Mapping) -> dict:
    """Coordinates of a labelled cocycle in the chosen basis of ``h``."""
    v = vector_from_labels(c.total.space, h.degree, labelled)
    return h.classify(v)


def to_labels(c: CechScDGLA, n: int, v) -> dict:
    return vector_to_labels(c.total.space, n, v)
