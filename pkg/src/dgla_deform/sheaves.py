"""Cover models, locally free sheaves by transition matrices, and sheaves of dgLas.

Convention: local frames satisfy ``s_j = T_ij s_i`` on V_ij, so the cocycle
reads ``T_ik = T_jk T_ij``.  O(d) on P¹ has ``T_01 = z^{-d}``.  A section
over a simplex σ is always written in the frame of its first chart σ[0].
Matrix-valued fibres (End, Hom) are vectorised column-major.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Callable, Mapping, Sequence

from .errors import BadParams, BadWindow, CocycleError, CoverMismatch, ShapeMismatch, WindowOverflow
from .linalg import SparseMatrix, frac, kernel_basis, rank, vadd
from .rings import (FiniteRing, LaurentRing, Ring, RingMatrix, block_diag, kron, radd, rscale, vec_index)

Simplex = tuple


# ---------------------------------------------------------------- covers


class CoverModel:
    """Nerve of a cover (simplices up to dimension 2) with a ring per simplex.

    For Laurent rings ``windows[σ]`` is a box ``(lo, hi)`` of exponent tuples;
    finite rings carry no window.
    """

    def __init__(self, nerve: Sequence[Sequence[int]], rings: Mapping[Simplex, Ring],
                 windows: Mapping[Simplex, tuple] | None = None, name: str = ""):
        self.nerve = sorted({tuple(sorted(s)) for s in nerve}, key=lambda s: (len(s), s))
        self.name = name
        if any(len(s) == 0 or len(s) > 3 for s in self.nerve):
            raise BadParams("nerve simplices must have 1 to 3 vertices")
        if any(len(set(s)) != len(s) for s in self.nerve):
            raise BadParams("repeated vertex in a simplex")
        nset = set(self.nerve)
        for s in self.nerve:
            for k in range(len(s)):
                f = s[:k] + s[k + 1:]
                if f and f not in nset:
                    raise BadParams(f"nerve is not closed under faces: {f} missing")
        self.rings = {tuple(k): v for k, v in rings.items()}
        missing = [s for s in self.nerve if s not in self.rings]
        if missing:
            raise BadParams(f"no ring for simplices {missing}")
        self.windows = {tuple(k): v for k, v in (windows or {}).items()}
        for s in self.nerve:
            if isinstance(self.rings[s], LaurentRing) and s not in self.windows:
                raise BadWindow(f"Laurent simplex {s} needs a window")
        self._check_restrictions()

    def _check_restrictions(self):
        # restriction is the identity on monomials, so generators of a face ring must stay in the coface ring
        for s in self.nerve:
            R = self.rings[s]
            for k in range(len(s)):
                f = s[:k] + s[k + 1:]
                if not f:
                    continue
                Rf = self.rings[f]
                if type(Rf) is not type(R):
                    raise CoverMismatch(f"ring kinds differ between {f} and {s}")
                if isinstance(R, LaurentRing):
                    if R.nvars != Rf.nvars:
                        raise CoverMismatch(f"variable count differs between {f} and {s}")
                    for v in range(R.nvars):
                        for e in (1, -1):
                            g = tuple(e if i == v else 0 for i in range(R.nvars))
                            if Rf.contains_mono(g) and not R.contains_mono(g):
                                raise CoverMismatch(f"restriction {f} -> {s} is not an algebra map")
                elif R != Rf:
                    raise CoverMismatch(f"finite rings on {f} and {s} differ")

    def simplices(self, n: int) -> list[Simplex]:
        return [s for s in self.nerve if len(s) == n + 1]

    @property
    def charts(self) -> list[int]:
        return [s[0] for s in self.simplices(0)]

    @property
    def top(self) -> int:
        return max(len(s) for s in self.nerve) - 1

    def ring(self, s) -> Ring:
        try:
            return self.rings[tuple(s)]
        except KeyError:
            raise CoverMismatch(f"{s} is not in the nerve") from None

    def edge(self, i, j) -> Simplex:
        s = tuple(sorted((i, j)))
        if s not in self.rings:
            raise CoverMismatch(f"charts {i} and {j} do not meet")
        return s

    def is_laurent(self) -> bool:
        return isinstance(self.rings[self.nerve[0]], LaurentRing)

    def in_window(self, s, mono) -> bool:
        R = self.ring(s)
        if not R.contains_mono(mono):
            return False
        if not isinstance(R, LaurentRing):
            return True
        lo, hi = self.windows[tuple(s)]
        return all(a <= e <= b for a, e, b in zip(lo, mono, hi))

    def basis(self, s) -> list:
        """Monomials of the windowed ring of ``s``."""
        R = self.ring(s)
        if isinstance(R, FiniteRing):
            return list(R.basis)
        lo, hi = self.windows[tuple(s)]
        return box_monomials(R, lo, hi)

    def window_mul(self, s, x, y):
        p = self.ring(s).mul(x, y)
        bad = [m for m in p if not self.in_window(s, m)]
        if bad:
            raise WindowOverflow(f"product leaves the window of {s}: {bad[0]}")
        return p

    def check_window(self, s, x):
        for m in x:
            if not self.in_window(s, m):
                raise WindowOverflow(f"{m} is outside the window of {s}")
        return x

    @property
    def window_size(self) -> int | None:
        if not self.is_laurent():
            return None
        return max(max(abs(e) for e in lo + hi) for lo, hi in self.windows.values())

    def __repr__(self):
        return f"CoverModel({self.name or self.nerve})"


def box_monomials(R: LaurentRing, lo, hi) -> list:
    ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
    return [m for m in product(*ranges) if R.contains_mono(m)]


def make_p1_cover(D: int) -> CoverModel:
    """Two affine charts of P¹ in the coordinate z, windowed to degree D."""
    if not isinstance(D, int) or isinstance(D, bool) or D < 1:
        raise BadWindow(f"window must be an integer ≥ 1, got {D!r}")
    rings = {(0,): LaurentRing([1]), (1,): LaurentRing([-1]), (0, 1): LaurentRing([0])}
    windows = {(0,): ((0,), (D,)), (1,): ((-D,), (0,)), (0, 1): ((-D,), (D,))}
    return CoverModel([(0,), (1,), (0, 1)], rings, windows, name=f"P1[D={D}]")


def make_finite_cover(nerve, ring: FiniteRing | None = None, name="finite") -> CoverModel:
    ring = ring or FiniteRing.field()
    nerve = [tuple(s) for s in nerve]
    return CoverModel(nerve, {tuple(sorted(s)): ring for s in nerve}, name=name)


def make_circle_cover() -> CoverModel:
    """Three arcs with pairwise overlaps and no triple overlap; h¹(O) = 1."""
    return make_finite_cover([(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)], name="circle")


def make_simplex_cover() -> CoverModel:
    """Three charts with a triple overlap; the nerve is contractible."""
    return make_finite_cover([(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)], name="triangle")


# ---------------------------------------------------------------- sheaves


def _as_matrix(cover: CoverModel, s, m) -> RingMatrix:
    R = cover.ring(s)
    if isinstance(m, RingMatrix):
        return m.with_ring(R)
    return RingMatrix(R, m)


class SheafPresentation:
    """Locally free sheaf of rank ``rank``; ``transitions[(i, j)]`` maps frame i to frame j."""

    def __init__(self, cover: CoverModel, rank: int, transitions: Mapping[tuple, object], name: str = ""):
        if rank < 1:
            raise BadParams("rank must be positive")
        self.cover = cover
        self.rank = rank
        self.name = name
        self._T: dict = {}
        for (i, j), m in transitions.items():
            e = cover.edge(i, j)
            M = _as_matrix(cover, e, m)
            if M.shape != (rank, rank):
                raise ShapeMismatch(f"transition {(i, j)} has shape {M.shape}, expected {(rank, rank)}")
            if not M.in_ring(cover.ring(e)):
                raise CocycleError(f"transition {(i, j)} is not regular on V{e}")
            for entry in (x for r in M.entries for x in r):
                cover.check_window(e, entry)
            self._T[(i, j)] = M
        for e in cover.simplices(1):
            i, j = e
            if (i, j) not in self._T and (j, i) not in self._T:
                raise CocycleError(f"missing transition on edge {e}")
            if (i, j) not in self._T:
                self._T[(i, j)] = self._invert(self._T[(j, i)], (j, i))
            if (j, i) not in self._T:
                self._T[(j, i)] = self._invert(self._T[(i, j)], (i, j))
            prod_ = self._T[(j, i)] @ self._T[(i, j)]
            if not prod_.is_identity():
                raise CocycleError(f"T_{j}{i} T_{i}{j} is not the identity")
        self.check_cocycle()

    def _invert(self, M, key):
        try:
            return M.inverse()
        except BadParams:
            raise CocycleError(f"transition {key} is not invertible over its ring") from None

    def transition(self, i: int, j: int) -> RingMatrix:
        if i == j:
            return RingMatrix.identity(self.cover.ring((i,)), self.rank)
        return self._T[(i, j)]

    def check_cocycle(self):
        for s in self.cover.simplices(2):
            R = self.cover.ring(s)
            for i, j, k in ((s[0], s[1], s[2]),):
                lhs = self.transition(i, k).with_ring(R)
                rhs = self.transition(j, k).with_ring(R) @ self.transition(i, j).with_ring(R)
                if lhs != rhs:
                    raise CocycleError(f"cocycle fails on {s}")
        return True

    def transitions(self) -> dict:
        return dict(self._T)

    def __repr__(self):
        return f"Sheaf({self.name or 'E'}, rank {self.rank})"


def _require_p1(cover: CoverModel):
    if not cover.is_laurent() or len(cover.charts) != 2 or cover.ring((0, 1)).nvars != 1:
        raise CoverMismatch("line bundles O(d) need the two-chart P¹ model")


def make_line_bundle(d: int, cover: CoverModel) -> SheafPresentation:
    _require_p1(cover)
    if abs(d) > cover.window_size:
        raise WindowOverflow(f"|d| = {abs(d)} exceeds the window {cover.window_size}")
    R = cover.ring((0, 1))
    return SheafPresentation(cover, 1, {(0, 1): [[R.mono(-d)]]}, name=f"O({d})")


def trivial_sheaf(cover: CoverModel, rank: int = 1) -> SheafPresentation:
    return SheafPresentation(cover, rank, {e: RingMatrix.identity(cover.ring(e), rank) for e in cover.simplices(1)},
                             name="O" if rank == 1 else f"O^{rank}")


def direct_sum_sheaf(*parts: SheafPresentation) -> SheafPresentation:
    cover = parts[0].cover
    if any(p.cover is not cover for p in parts):
        raise CoverMismatch("direct sum of sheaves on different covers")
    trans = {}
    for e in cover.simplices(1):
        R = cover.ring(e)
        trans[e] = block_diag(R, [p.transition(*e).with_ring(R) for p in parts])
    return SheafPresentation(cover, sum(p.rank for p in parts), trans, name="⊕".join(p.name for p in parts))


def hom_transition(F: SheafPresentation, G: SheafPresentation, i: int, j: int) -> RingMatrix:
    """vec(T^G_ij φ T^F_ji) = (T^F_ji^T ⊗ T^G_ij) vec(φ)."""
    R = F.cover.ring(F.cover.edge(i, j)) if i != j else F.cover.ring((i,))
    return kron(F.transition(j, i).with_ring(R).transpose(), G.transition(i, j).with_ring(R))


def hom_sheaf(F: SheafPresentation, G: SheafPresentation) -> SheafPresentation:
    if F.cover is not G.cover:
        raise CoverMismatch("Hom of sheaves on different covers")
    trans = {e: hom_transition(F, G, *e) for e in F.cover.simplices(1)}
    return SheafPresentation(F.cover, F.rank * G.rank, trans, name=f"Hom({F.name},{G.name})")


def end_sheaf(E: SheafPresentation) -> SheafPresentation:
    h = hom_sheaf(E, E)
    h.name = f"End({E.name})"
    return h


class SheafMorphism:
    """``local[i]`` is the matrix of α on V_i in the chart frames; α_j T^F_ij = T^G_ij α_i."""

    def __init__(self, source: SheafPresentation, target: SheafPresentation, local: Mapping[int, object],
                 name: str = "α"):
        if source.cover is not target.cover:
            raise CoverMismatch("morphism between sheaves on different covers")
        self.source, self.target, self.name = source, target, name
        cover = source.cover
        self.local = {}
        for i in cover.charts:
            if i not in local:
                raise BadParams(f"no local matrix on chart {i}")
            M = _as_matrix(cover, (i,), local[i])
            if M.shape != (target.rank, source.rank):
                raise ShapeMismatch(f"local matrix on chart {i} has shape {M.shape}")
            if not M.in_ring(cover.ring((i,))):
                raise CocycleError(f"α_{i} is not regular on V{i}")
            self.local[i] = M
        for i, j in cover.simplices(1):
            R = cover.ring((i, j))
            lhs = self.local[j].with_ring(R) @ source.transition(i, j).with_ring(R)
            rhs = target.transition(i, j).with_ring(R) @ self.local[i].with_ring(R)
            if lhs != rhs:
                raise CocycleError(f"α is not compatible with the transitions on V{(i, j)}")

    @classmethod
    def from_chart(cls, source, target, chart: int, matrix, name="α"):
        """Extend a local matrix from one chart by the transitions (α_j = T^G_ij α_i T^F_ji)."""
        cover = source.cover
        a0 = _as_matrix(cover, (chart,), matrix)
        local = {chart: a0}
        for j in cover.charts:
            if j == chart:
                continue
            e = cover.edge(chart, j)
            R = cover.ring(e)
            aj = target.transition(chart, j).with_ring(R) @ a0.with_ring(R) @ source.transition(j, chart).with_ring(R)
            if not aj.in_ring(cover.ring((j,))):
                raise CocycleError(f"α does not extend regularly to chart {j}")
            local[j] = aj
        return cls(source, target, local, name)

    @classmethod
    def identity(cls, E):
        return cls(E, E, {i: RingMatrix.identity(E.cover.ring((i,)), E.rank) for i in E.cover.charts}, "id")

    @classmethod
    def zero(cls, F, G):
        return cls(F, G, {i: RingMatrix.zeros(F.cover.ring((i,)), G.rank, F.rank) for i in F.cover.charts}, "0")


# ---------------------------------------------------------------- sections


def global_section(E: SheafPresentation, vector: Sequence[Mapping], chart: int = 0) -> dict:
    """Extend a local vector on one chart to all charts; raise if it does not glue."""
    cover = E.cover
    R0 = cover.ring((chart,))
    v0 = [{k: frac(c) for k, c in x.items() if c} for x in vector]
    if len(v0) != E.rank:
        raise ShapeMismatch(f"section has {len(v0)} components, rank is {E.rank}")
    if not all(R0.contains(x) for x in v0):
        raise CocycleError(f"section is not regular on chart {chart}")
    out = {chart: v0}
    for j in cover.charts:
        if j == chart:
            continue
        e = cover.edge(chart, j)
        vj = E.transition(chart, j).with_ring(cover.ring(e)).apply(v0)
        if not all(cover.ring((j,)).contains(x) for x in vj):
            raise CocycleError(f"section does not extend regularly to chart {j}")
        out[j] = vj
    return out


def section_glues(E: SheafPresentation, s: Mapping[int, Sequence[Mapping]]) -> bool:
    cover = E.cover
    for i in cover.charts:
        if i not in s or len(s[i]) != E.rank or not all(cover.ring((i,)).contains(x) for x in s[i]):
            return False
    for i, j in cover.simplices(1):
        R = cover.ring((i, j))
        if E.transition(i, j).with_ring(R).apply(s[i]) != [dict(x) for x in s[j]]:
            return False
    return True


def _section_coords(s: Mapping[int, Sequence[Mapping]]) -> dict:
    return {(i, c, m): v for i, vec in s.items() for c, x in enumerate(vec) for m, v in x.items()}


@dataclass
class CoherentSystem:
    """A sheaf E with k linearly independent global sections spanning U."""

    sheaf: SheafPresentation
    sections: list = field(default_factory=list)

    def __post_init__(self):
        self.sections = [{i: [{m: frac(c) for m, c in x.items() if c} for x in vec] for i, vec in s.items()}
                         for s in self.sections]
        for n, s in enumerate(self.sections):
            if not section_glues(self.sheaf, s):
                raise CocycleError(f"section {n} does not glue")
        keys: dict = {}
        cols = []
        for s in self.sections:
            cols.append({keys.setdefault(k, len(keys)): v for k, v in _section_coords(s).items()})
        if rank(SparseMatrix.from_columns(len(keys), cols)) != len(cols):
            raise BadParams("sections of U are linearly dependent")

    @property
    def k(self) -> int:
        return len(self.sections)

    def s_matrix(self, chart: int) -> RingMatrix:
        """r × k matrix of s: U⊗O → E on a chart."""
        R = self.sheaf.cover.ring((chart,))
        r = self.sheaf.rank
        return RingMatrix(R, [[self.sections[u][chart][a] for u in range(self.k)] for a in range(r)])


# ---------------------------------------------------------------- sheaves of dgLas


class SheafDGLA:
    """A locally free sheaf of dgLas, described on the chart frames.

    ``fiber`` lists ``(label, degree)``; ``transition(i, j)`` acts on fibre
    coordinates; ``local_d(i)`` is the differential on chart i (None for zero);
    ``bracket(i, f1, f2)`` returns ``{f: ring element}`` with coefficients
    regular on V_i.
    """

    def __init__(self, cover: CoverModel, fiber: Sequence[tuple], transition: Callable[[int, int], RingMatrix],
                 local_d: Callable[[int], RingMatrix | None] | None = None,
                 bracket: Callable[[int, object, object], Mapping] | None = None, name: str = ""):
        self.cover = cover
        self.fiber = [tuple(x) for x in fiber]
        self.name = name
        self._pos = {f: n for n, (f, _) in enumerate(self.fiber)}
        if len(self._pos) != len(self.fiber):
            raise ShapeMismatch("repeated fibre label")
        self._deg = dict(self.fiber)
        self._transition = transition
        self._local_d = local_d
        self._bracket = bracket
        self._tcache: dict = {}
        self._dcache: dict = {}
        self._bcache: dict = {}

    @property
    def labels(self) -> list:
        return [f for f, _ in self.fiber]

    def degree(self, f) -> int:
        return self._deg[f]

    def index(self, f) -> int:
        return self._pos[f]

    def transition(self, i, j) -> RingMatrix:
        if (i, j) not in self._tcache:
            if i == j:
                self._tcache[(i, j)] = RingMatrix.identity(self.cover.ring((i,)), len(self.fiber))
            else:
                self._tcache[(i, j)] = self._transition(i, j).with_ring(self.cover.ring(self.cover.edge(i, j)))
        return self._tcache[(i, j)]

    def d_matrix(self, chart) -> RingMatrix | None:
        if chart not in self._dcache:
            self._dcache[chart] = self._local_d(chart) if self._local_d else None
        return self._dcache[chart]

    def bracket_coeffs(self, chart, f1, f2) -> dict:
        key = (chart, f1, f2)
        if key not in self._bcache:
            out = self._bracket(chart, f1, f2) if self._bracket else {}
            self._bcache[key] = {f: c for f, c in out.items() if c}
        return self._bcache[key]

    def local_bracket(self, chart, x: Sequence[Mapping], y: Sequence[Mapping], ring: Ring | None = None) -> list:
        R = ring or self.cover.ring((chart,))
        out = [{} for _ in self.fiber]
        for a, xa in enumerate(x):
            if not xa:
                continue
            for b, yb in enumerate(y):
                if not yb:
                    continue
                c = self.bracket_coeffs(chart, self.fiber[a][0], self.fiber[b][0])
                if not c:
                    continue
                p = R.mul(xa, yb)
                for f, cf in c.items():
                    out[self._pos[f]] = radd(out[self._pos[f]], R.mul(p, cf))
        return out

    def check(self) -> list[str]:
        """Compatibility of d and the bracket with the transitions, and d² = 0, on fibre basis vectors."""
        problems = []
        n = len(self.fiber)
        for i in self.cover.charts:
            D = self.d_matrix(i)
            if D is not None and not (D @ D).is_zero():
                problems.append(f"d² ≠ 0 on chart {i}")
        for i, j in self.cover.simplices(1):
            R = self.cover.ring((i, j))
            T = self.transition(i, j)
            Di, Dj = self.d_matrix(i), self.d_matrix(j)
            if Di is not None or Dj is not None:
                Di = Di.with_ring(R) if Di is not None else RingMatrix.zeros(R, n, n)
                Dj = Dj.with_ring(R) if Dj is not None else RingMatrix.zeros(R, n, n)
                if Dj @ T != T @ Di:
                    problems.append(f"d does not commute with the transition on {(i, j)}")
            cols = [[T.entries[r][c] for r in range(n)] for c in range(n)]
            for a in range(n):
                for b in range(n):
                    ea = [R.one() if r == a else {} for r in range(n)]
                    eb = [R.one() if r == b else {} for r in range(n)]
                    lhs = T.apply(self.local_bracket(i, ea, eb, R))
                    rhs = self.local_bracket(j, cols[a], cols[b], R)
                    if lhs != rhs:
                        problems.append(f"bracket of {self.fiber[a][0]}, {self.fiber[b][0]} not compatible on {(i, j)}")
        return problems

    def __repr__(self):
        return f"SheafDGLA({self.name}, fibre {len(self.fiber)})"


def _matrix_units(tag, nrows, ncols) -> list:
    """Column-major labels ``(tag, i, j)``."""
    return [(tag, i, j) for j in range(ncols) for i in range(nrows)]


def _commutator_coeffs(one, f1, f2, tag="E") -> dict:
    _, a, b = f1
    _, c, d = f2
    out: dict = {}
    if b == c:
        out[(tag, a, d)] = dict(one)
    if d == a:
        out[(tag, c, b)] = radd(out.get((tag, c, b), {}), one, -1)
    return out


def abelian_sheaf_dgla(E: SheafPresentation, degree: int = 0, tag="e") -> SheafDGLA:
    fiber = [((tag, k), degree) for k in range(E.rank)]
    return SheafDGLA(E.cover, fiber, E.transition, name=f"{E.name}[{-degree}]" if degree else E.name)


def end_dgla(E: SheafPresentation) -> SheafDGLA:
    r = E.rank
    fiber = [(f, 0) for f in _matrix_units("E", r, r)]
    cover = E.cover

    def br(i, f1, f2):
        return _commutator_coeffs(cover.ring((i,)).one(), f1, f2)

    return SheafDGLA(cover, fiber, lambda i, j: hom_transition(E, E, i, j), bracket=br, name=f"End({E.name})")


def hom_abelian(F: SheafPresentation, G: SheafPresentation) -> SheafDGLA:
    fiber = [(f, 0) for f in _matrix_units("H", G.rank, F.rank)]
    return SheafDGLA(F.cover, fiber, lambda i, j: hom_transition(F, G, i, j), name=f"Hom({F.name},{G.name})")


def sum_dgla(A: SheafDGLA, B: SheafDGLA, tags=("F", "G")) -> SheafDGLA:
    if A.cover is not B.cover:
        raise CoverMismatch("direct sum of sheaves of dgLas on different covers")
    ta, tb = tags
    fiber = [((ta, f), d) for f, d in A.fiber] + [((tb, f), d) for f, d in B.fiber]
    cover = A.cover

    def trans(i, j):
        R = cover.ring(cover.edge(i, j))
        return block_diag(R, [A.transition(i, j), B.transition(i, j)])

    def dd(i):
        Da, Db = A.d_matrix(i), B.d_matrix(i)
        if Da is None and Db is None:
            return None
        R = cover.ring((i,))
        Da = Da or RingMatrix.zeros(R, len(A.fiber), len(A.fiber))
        Db = Db or RingMatrix.zeros(R, len(B.fiber), len(B.fiber))
        return block_diag(R, [Da, Db])

    def br(i, f1, f2):
        if f1[0] != f2[0]:
            return {}
        src = A if f1[0] == ta else B
        return {(f1[0], f): c for f, c in src.bracket_coeffs(i, f1[1], f2[1]).items()}

    return SheafDGLA(cover, fiber, trans, dd, br, name=f"{A.name}⊕{B.name}")


def hom_complex_QQ(system: CoherentSystem) -> SheafDGLA:
    """End(U⊗O) ⊕ End(E) in degree 0, Hom(U⊗O, E) in degree 1, differential from s."""
    E = system.sheaf
    r, k = E.rank, system.k
    cover = E.cover
    lu, le, lh = _matrix_units("U", k, k), _matrix_units("E", r, r), _matrix_units("H", r, k)
    fiber = [(f, 0) for f in lu + le] + [(f, 1) for f in lh]
    pos = {f: n for n, (f, _) in enumerate(fiber)}

    def trans(i, j):
        R = cover.ring(cover.edge(i, j))
        return block_diag(R, [RingMatrix.identity(R, k * k), hom_transition(E, E, i, j),
                              kron(RingMatrix.identity(R, k), E.transition(i, j).with_ring(R))])

    def dd(i):
        R = cover.ring((i,))
        s = system.s_matrix(i)
        rows = [[{} for _ in fiber] for _ in fiber]
        for (_, a, b) in lh:
            h = pos[("H", a, b)]
            for c in range(k):  # (s φU)_ab = Σ_c s_ac φU_cb
                rows[h][pos[("U", c, b)]] = radd(rows[h][pos[("U", c, b)]], s[a, c])
            for c in range(r):  # (φE s)_ab = Σ_c φE_ac s_cb
                rows[h][pos[("E", a, c)]] = radd(rows[h][pos[("E", a, c)]], s[c, b], -1)
        return RingMatrix(R, rows)

    def br(i, f1, f2):
        one = cover.ring((i,)).one()
        t1, t2 = f1[0], f2[0]
        if t1 == t2 and t1 in "UE":
            return _commutator_coeffs(one, f1, f2, t1)
        if t1 == "H" and t2 == "H":
            return {}
        if t1 == "H":
            return {f: rscale(c, -1) for f, c in br(i, f2, f1).items()}
        if t2 != "H":
            return {}
        _, x, y = f1
        _, a, b = f2
        if t1 == "E":  # E_xy · H_ab = δ_ya H_xb
            return {("H", x, b): dict(one)} if y == a else {}
        # −H_ab · U_xy = −δ_bx H_ay
        return {("H", a, y): rscale(one, -1)} if b == x else {}

    return SheafDGLA(cover, fiber, trans, dd, br, name=f"Q({E.name},U)")


# ---------------------------------------------------------------- graph subalgebra


class GraphModel:
    """Block data for α: F → G and the sheaves End(F⊕G), L(α), End F ⊕ End G, Hom(F, G).

    End(F⊕G) is indexed with F first; blocks are A (F→F), B (G→F), C (F→G), D (G→G).
    L(α) is parametrised by (a, b, d) with c = αa + αbα − dα, and π(A, B, C, D) =
    C + Dα − αA − αBα vanishes exactly on its image.
    """

    def __init__(self, alpha: SheafMorphism):
        self.alpha = alpha
        self.F, self.G = alpha.source, alpha.target
        self.cover = self.F.cover
        self.rf, self.rg = self.F.rank, self.G.rank
        self.FG = direct_sum_sheaf(self.F, self.G)

    # block embedding helpers on End(F⊕G) column-major labels
    def _big(self, block, i, j):
        rf = self.rf
        return {"A": ("E", i, j), "B": ("E", i, rf + j), "C": ("E", rf + i, j), "D": ("E", rf + i, rf + j)}[block]

    @cached_property
    def end_total(self) -> SheafDGLA:
        return end_dgla(self.FG)

    @cached_property
    def end_pair(self) -> SheafDGLA:
        return sum_dgla(end_dgla(self.F), end_dgla(self.G))

    @cached_property
    def hom(self) -> SheafDGLA:
        return hom_abelian(self.F, self.G)

    @cached_property
    def L(self) -> SheafDGLA:
        F, G = self.F, self.G
        rf, rg = self.rf, self.rg
        fiber = [(f, 0) for f in _matrix_units("a", rf, rf) + _matrix_units("b", rf, rg) + _matrix_units("d", rg, rg)]
        cover = self.cover

        def trans(i, j):
            R = cover.ring(cover.edge(i, j))
            return block_diag(R, [hom_transition(F, F, i, j), hom_transition(G, F, i, j), hom_transition(G, G, i, j)])

        pos = {f: k for k, (f, _) in enumerate(fiber)}

        def br(i, f1, f2):
            h = self.h_matrix(i)
            R = cover.ring((i,))
            n = rf + rg
            X = self._as_block_matrix(R, [h.entries[r][pos[f1]] for r in range(n * n)], n)
            Y = self._as_block_matrix(R, [h.entries[r][pos[f2]] for r in range(n * n)], n)
            Z = X @ Y - Y @ X
            out = {}
            for (t, a, b), _ in fiber:
                big = self._big({"a": "A", "b": "B", "d": "D"}[t], a, b)
                out[(t, a, b)] = Z.entries[big[1]][big[2]]
            return out

        return SheafDGLA(cover, fiber, trans, bracket=br, name=f"L({self.alpha.name})")

    @staticmethod
    def _as_block_matrix(R, vec, n) -> RingMatrix:
        return RingMatrix(R, [[vec[vec_index(i, j, n)] for j in range(n)] for i in range(n)])

    def h_matrix(self, chart) -> RingMatrix:
        """Fibre matrix of h: L(α) → End(F⊕G) on a chart."""
        R = self.cover.ring((chart,))
        al = self.alpha.local[chart]
        rf, rg = self.rf, self.rg
        n = rf + rg
        big = _matrix_units("E", n, n)
        bpos = {f: k for k, f in enumerate(big)}
        small = _matrix_units("a", rf, rf) + _matrix_units("b", rf, rg) + _matrix_units("d", rg, rg)
        cols = []
        for t, a, b in small:
            col = [{} for _ in big]
            blk = {"a": "A", "b": "B", "d": "D"}[t]
            col[bpos[self._big(blk, a, b)]] = R.one()
            # c-block: αa + αbα − dα
            unit = RingMatrix(R, [[R.one() if (x, y) == (a, b) else {} for y in range({"a": rf, "b": rg, "d": rg}[t])]
                                  for x in range({"a": rf, "b": rf, "d": rg}[t])])
            if t == "a":
                c = al @ unit
            elif t == "b":
                c = al @ unit @ al
            else:
                c = -(unit @ al)
            for x in range(rg):
                for y in range(rf):
                    col[bpos[self._big("C", x, y)]] = c.entries[x][y]
            cols.append(col)
        return RingMatrix(R, [[cols[c][r] for c in range(len(small))] for r in range(len(big))])

    def g_matrix(self, chart) -> RingMatrix:
        """Fibre matrix of g: End F ⊕ End G → End(F⊕G) (block inclusion)."""
        R = self.cover.ring((chart,))
        tot = self.end_total
        pair = self.end_pair
        rows = [[{} for _ in pair.fiber] for _ in tot.fiber]
        for c, ((tag, (_, i, j)), _) in enumerate(pair.fiber):
            blk = "A" if tag == "F" else "D"
            rows[tot.index(self._big(blk, i, j))][c] = R.one()
        return RingMatrix(R, rows)

    def pi_matrix(self, chart) -> RingMatrix:
        """Fibre matrix of π: End(F⊕G) → Hom(F, G), (A, B, C, D) ↦ C + Dα − αA − αBα."""
        R = self.cover.ring((chart,))
        al = self.alpha.local[chart]
        rf, rg = self.rf, self.rg
        tot = self.end_total
        hom = self.hom
        rows = [[{} for _ in tot.fiber] for _ in hom.fiber]
        for c, ((_, i, j), _) in enumerate(tot.fiber):
            blk = ("A" if j < rf else "B") if i < rf else ("C" if j < rf else "D")
            a, b = (i if i < rf else i - rf), (j if j < rf else j - rf)
            shape = {"A": (rf, rf), "B": (rf, rg), "C": (rg, rf), "D": (rg, rg)}[blk]
            unit = RingMatrix(R, [[R.one() if (x, y) == (a, b) else {} for y in range(shape[1])] for x in range(shape[0])])
            img = {"A": lambda: -(al @ unit), "B": lambda: -(al @ unit @ al), "C": lambda: unit,
                   "D": lambda: unit @ al}[blk]()
            for x in range(rg):
                for y in range(rf):
                    rows[hom.index(("H", x, y))][c] = img.entries[x][y]
        return RingMatrix(R, rows)


def graph_subalgebra_L(alpha: SheafMorphism) -> dict:
    """Per simplex, the kernel of (A, B, C, D) ↦ C + Dα − αA − αBα on windowed block endomorphisms.

    Also checks closure of the kernel under the commutator (products leaving
    the window are counted as skipped) and that it matches the (a, b, d)
    parametrisation on the window.
    """
    gm = GraphModel(alpha)
    cover = gm.cover
    tot = gm.end_total
    out = {}
    for s in cover.nerve:
        R = cover.ring(s)
        P = gm.pi_matrix(s[0]).with_ring(R)
        monos = cover.basis(s)
        src = [(f, m) for f in tot.labels for m in monos]
        tgt: dict = {}
        cols = []
        for f, m in src:
            col = {}
            for r in range(len(gm.hom.fiber)):
                e = P.entries[r][tot.index(f)]
                for mm, c in R.mul(e, {m: 1}).items():
                    col[tgt.setdefault((r, mm), len(tgt))] = c
            cols.append(col)
        K = kernel_basis(SparseMatrix.from_columns(len(tgt), cols))
        closed, skipped = True, 0
        n = gm.rf + gm.rg
        mats = []
        for v in K:
            vec = [{} for _ in tot.fiber]
            for idx, c in v.items():
                f, m = src[idx]
                vec[tot.index(f)] = radd(vec[tot.index(f)], {m: c})
            mats.append(GraphModel._as_block_matrix(R, vec, n))
        for x in range(len(mats)):
            for y in range(x + 1, len(mats)):
                Z = mats[x] @ mats[y] - mats[y] @ mats[x]
                if any(not cover.in_window(s, mm) for e in (q for r in Z.entries for q in r) for mm in e):
                    skipped += 1
                    continue
                zvec = [Z.entries[i][j] for (_, i, j) in tot.labels]
                if any(e for e in P.apply(zvec)):
                    closed = False
        out[s] = {"dim": len(K), "basis": K, "closed": closed, "skipped": skipped, "domain": src}
    return out
