"""Graded vector spaces, graded maps, cochain complexes and their cohomology."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping

from .errors import NotAComplex, ShapeMismatch, UnknownLabel
from .linalg import Reducer, SparseMatrix, kernel_basis, rank, solve, vadd


class GradedVectorSpace:
    """Finitely supported degree -> ordered basis labels."""

    __slots__ = ("_comp", "_index")

    def __init__(self, components: Mapping[int, Iterable[Hashable]]):
        comp = {}
        index = {}
        for n, labels in components.items():
            labels = tuple(labels)
            if not labels:
                continue
            pos = {}
            for i, lab in enumerate(labels):
                if lab in pos:
                    raise ShapeMismatch(f"duplicate label {lab!r} in degree {n}")
                pos[lab] = i
            comp[int(n)] = labels
            index[int(n)] = pos
        self._comp = dict(sorted(comp.items()))
        self._index = index

    def degrees(self) -> list[int]:
        return list(self._comp)

    def dim(self, n: int) -> int:
        return len(self._comp.get(n, ()))

    def labels(self, n: int) -> tuple:
        return self._comp.get(n, ())

    def index(self, n: int, label) -> int:
        try:
            return self._index[n][label]
        except KeyError:
            raise UnknownLabel(f"{label!r} not in degree {n}") from None

    def has(self, n: int, label) -> bool:
        return label in self._index.get(n, {})

    def total_dim(self) -> int:
        return sum(len(v) for v in self._comp.values())

    def components(self) -> dict[int, tuple]:
        return dict(self._comp)

    def __eq__(self, other):
        return isinstance(other, GradedVectorSpace) and self._comp == other._comp

    def __hash__(self):
        return hash(tuple(self._comp.items()))

    def __repr__(self):
        dims = {n: len(v) for n, v in self._comp.items()}
        return f"GradedVectorSpace({dims})"

    def direct_sum(self, other: "GradedVectorSpace", tags=(0, 1)) -> "GradedVectorSpace":
        degs = sorted(set(self._comp) | set(other._comp))
        return GradedVectorSpace({
            n: [(tags[0], a) for a in self.labels(n)] + [(tags[1], b) for b in other.labels(n)]
            for n in degs
        })

    def shift(self, k: int) -> "GradedVectorSpace":
        """V[k]: degree n holds V^{n+k}."""
        return GradedVectorSpace({n - k: labs for n, labs in self._comp.items()})


class GradedMap:
    """Degree-homogeneous linear map given by one sparse block per source degree."""

    __slots__ = ("source", "target", "shift", "_blocks")

    def __init__(self, source: GradedVectorSpace, target: GradedVectorSpace, shift: int,
                 blocks: Mapping[int, SparseMatrix]):
        self.source = source
        self.target = target
        self.shift = shift
        bl = {}
        for n, m in blocks.items():
            want = (target.dim(n + shift), source.dim(n))
            if m.shape != want:
                raise ShapeMismatch(f"block at degree {n} has shape {m.shape}, expected {want}")
            if not m.is_zero():
                bl[n] = m
        self._blocks = bl

    @classmethod
    def zero(cls, source, target, shift=0):
        return cls(source, target, shift, {})

    @classmethod
    def identity(cls, space):
        return cls(space, space, 0, {n: SparseMatrix.identity(space.dim(n)) for n in space.degrees()})

    @classmethod
    def from_label_fn(cls, source, target, shift, fn: Callable[[int, Hashable], Mapping]):
        """Build from ``fn(degree, label) -> {target_label: coeff}``."""
        blocks = {}
        for n in source.degrees():
            cols = []
            for lab in source.labels(n):
                img = fn(n, lab) or {}
                cols.append({target.index(n + shift, t): c for t, c in img.items() if c})
            blocks[n] = SparseMatrix.from_columns(target.dim(n + shift), cols)
        return cls(source, target, shift, blocks)

    def block(self, n: int) -> SparseMatrix:
        m = self._blocks.get(n)
        if m is None:
            return SparseMatrix.zeros(self.target.dim(n + self.shift), self.source.dim(n))
        return m

    def blocks(self) -> dict[int, SparseMatrix]:
        return dict(self._blocks)

    def apply(self, n: int, v: Mapping[int, Fraction]) -> dict:
        m = self._blocks.get(n)
        return m.matvec(v) if m is not None else {}

    def apply_labels(self, n: int, v: Mapping) -> dict:
        idx = {self.source.index(n, lab): c for lab, c in v.items()}
        out = self.apply(n, idx)
        tl = self.target.labels(n + self.shift)
        return {tl[i]: c for i, c in out.items()}

    def compose(self, inner: "GradedMap") -> "GradedMap":
        """self ∘ inner."""
        if inner.target != self.source:
            raise ShapeMismatch("composition of maps with mismatched spaces")
        blocks = {}
        for n in inner.source.degrees():
            blocks[n] = self.block(n + inner.shift) @ inner.block(n)
        return GradedMap(inner.source, self.target, self.shift + inner.shift, blocks)

    def __add__(self, other: "GradedMap") -> "GradedMap":
        if (self.source, self.target, self.shift) != (other.source, other.target, other.shift):
            raise ShapeMismatch("adding maps of different type")
        degs = set(self._blocks) | set(other._blocks)
        return GradedMap(self.source, self.target, self.shift,
                         {n: self.block(n) + other.block(n) for n in degs})

    def scale(self, s) -> "GradedMap":
        return GradedMap(self.source, self.target, self.shift, {n: m.scale(s) for n, m in self._blocks.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not self._blocks

    def __eq__(self, other):
        return (isinstance(other, GradedMap) and self.source == other.source and self.target == other.target
                and self.shift == other.shift and self._blocks == other._blocks)

    __hash__ = None


@dataclass(frozen=True)
class CochainComplex:
    space: GradedVectorSpace
    differential: GradedMap

    def __post_init__(self):
        d = self.differential
        if d.shift != 1 or d.source != self.space or d.target != self.space:
            raise ShapeMismatch("differential must be a degree +1 self-map of the space")

    @classmethod
    def from_blocks(cls, dims_or_labels: Mapping[int, Iterable], blocks: Mapping[int, SparseMatrix]):
        comp = {}
        for n, v in dims_or_labels.items():
            comp[n] = range(v) if isinstance(v, int) else v
        space = GradedVectorSpace(comp)
        return cls(space, GradedMap(space, space, 1, blocks))

    def d(self, n: int) -> SparseMatrix:
        return self.differential.block(n)

    def dim(self, n: int) -> int:
        return self.space.dim(n)

    def degrees(self) -> list[int]:
        return self.space.degrees()


def check_complex(c: CochainComplex) -> bool:
    for n in c.degrees():
        a = c.d(n)
        b = c.d(n + 1)
        if b.ncols != a.nrows:
            raise ShapeMismatch(f"blocks at degrees {n},{n + 1} do not compose")
        if not (b @ a).is_zero():
            return False
    return True


def euler_characteristic(c: CochainComplex) -> int:
    return sum((-1) ** (n % 2) * c.dim(n) for n in c.degrees())


@dataclass
class CohomologyGroup:
    """H^n with chosen representatives and a classifier for cocycles."""

    degree: int
    dim: int
    representatives: list[dict]
    _reducer: Reducer = field(repr=False, default=None)
    _d_out: SparseMatrix = field(repr=False, default=None)

    def classify(self, v: Mapping[int, Fraction]) -> dict[int, Fraction]:
        """Coordinates of the class of the cocycle ``v`` in the representative basis."""
        if self._d_out is not None and self._d_out.matvec(v):
            raise NotAComplex(f"vector is not a cocycle in degree {self.degree}")
        rem, tag = self._reducer.reduce(v)
        if rem:
            raise NotAComplex("cocycle escapes kernel basis")  # cannot happen for cocycles
        return tag

    def is_zero_class(self, v) -> bool:
        return not self.classify(v)


def cohomology_at(c: CochainComplex, n: int, reps: bool = True) -> CohomologyGroup:
    d_in = c.d(n - 1)
    d_out = c.d(n)
    if not reps:
        dim = c.dim(n) - rank(d_out) - rank(d_in)
        return CohomologyGroup(n, dim, [])
    if not (d_out @ d_in).is_zero():
        raise NotAComplex(f"d∘d ≠ 0 at degree {n - 1}")
    red = Reducer()
    for col in d_in.columns():
        if col:
            red.add(col)
    reps_out = []
    for z in kernel_basis(d_out):
        if red.add(z, {len(reps_out): Fraction(1)}):
            reps_out.append(z)
    return CohomologyGroup(n, len(reps_out), reps_out, red, d_out)


def cohomology(c: CochainComplex, degrees: Iterable[int] | None = None, reps: bool = True) -> dict[int, CohomologyGroup]:
    if not check_complex(c):
        raise NotAComplex("differential does not square to zero")
    if degrees is None:
        degrees = c.degrees()
    return {n: cohomology_at(c, n, reps) for n in degrees}


def cohomology_dims(c: CochainComplex, degrees: Iterable[int] | None = None) -> dict[int, int]:
    return {n: h.dim for n, h in cohomology(c, degrees, reps=False).items()}


# ------------------------------------------------------------------ chain maps


@dataclass(frozen=True)
class ChainMap:
    source: CochainComplex
    target: CochainComplex
    map: GradedMap

    def __post_init__(self):
        if self.map.shift != 0 or self.map.source != self.source.space or self.map.target != self.target.space:
            raise ShapeMismatch("chain map must be degree 0 between the given complexes")

    def block(self, n):
        return self.map.block(n)

    def is_chain_map(self) -> bool:
        degs = set(self.source.degrees()) | {n - 1 for n in self.target.degrees()}
        for n in degs:
            lhs = self.target.d(n) @ self.block(n)
            rhs = self.block(n + 1) @ self.source.d(n)
            if lhs != rhs:
                return False
        return True


def induced_map(f: ChainMap, hs: CohomologyGroup, ht: CohomologyGroup) -> SparseMatrix:
    """Matrix of H^n(f) in the representative bases."""
    cols = [ht.classify(f.block(hs.degree).matvec(r)) for r in hs.representatives]
    return SparseMatrix.from_columns(ht.dim, cols)


def cone(f: ChainMap) -> CochainComplex:
    """Cone(f)^n = A^n ⊕ B^{n-1}, D(a, b) = (da, f a − db)."""
    A, B = f.source, f.target
    degs = sorted(set(A.degrees()) | {n + 1 for n in B.degrees()})
    comp = {n: [("A", a) for a in A.space.labels(n)] + [("B", b) for b in B.space.labels(n - 1)] for n in degs}
    space = GradedVectorSpace(comp)
    blocks = {}
    for n in degs:
        a0, b0 = A.dim(n), B.dim(n - 1)
        a1 = A.dim(n + 1)
        rows: dict[int, dict] = {}
        for r, row in A.d(n).rows().items():
            rows.setdefault(r, {}).update(row)
        for r, row in f.block(n).rows().items():
            rows.setdefault(a1 + r, {}).update(row)
        for r, row in B.d(n - 1).rows().items():
            dst = rows.setdefault(a1 + r, {})
            for cidx, v in row.items():
                dst[a0 + cidx] = dst.get(a0 + cidx, 0) - v
        blocks[n] = SparseMatrix(space.dim(n + 1), a0 + b0, rows)
    return CochainComplex(space, GradedMap(space, space, 1, blocks))


# ---------------------------------------------------------------- exactness


@dataclass
class ExactnessNode:
    index: int
    dim: int
    rank_in: int
    kernel_out: int
    composite_zero: bool

    @property
    def exact(self) -> bool:
        return self.composite_zero and self.rank_in == self.kernel_out

    def as_dict(self):
        return {"index": self.index, "dim": self.dim, "rank_in": self.rank_in, "kernel_out": self.kernel_out,
                "composite_zero": self.composite_zero, "exact": self.exact}


def verify_exact(dims: list[int], maps: list[SparseMatrix]) -> list[ExactnessNode]:
    """Check exactness of V_0 → V_1 → … → V_k at every node.

    ``maps[i]`` goes V_i → V_{i+1}.  The sequence is read as starting with
    0 → V_0 and ending with V_k → 0, so the end nodes test injectivity and
    surjectivity.
    """
    if len(maps) != len(dims) - 1:
        raise ShapeMismatch("need one map between consecutive terms")
    for i, m in enumerate(maps):
        if m.shape != (dims[i + 1], dims[i]):
            raise ShapeMismatch(f"map {i} has shape {m.shape}, expected {(dims[i + 1], dims[i])}")
    ranks = [rank(m) for m in maps]
    out = []
    for i, n in enumerate(dims):
        r_in = ranks[i - 1] if i > 0 else 0
        r_out = ranks[i] if i < len(maps) else 0
        comp = True
        if 0 < i < len(maps):
            comp = (maps[i] @ maps[i - 1]).is_zero()
        out.append(ExactnessNode(i, n, r_in, n - r_out, comp))
    return out


# ------------------------------------------------------- sub and quotient


def subcomplex(c: CochainComplex, keep: Callable[[int, Hashable], bool]) -> tuple[CochainComplex, ChainMap]:
    """Span of the kept basis labels, which must be preserved by d; returns it with its inclusion."""
    comp = {n: [lab for lab in c.space.labels(n) if keep(n, lab)] for n in c.degrees()}
    space = GradedVectorSpace(comp)
    blocks = {}
    for n in space.degrees():
        cols = [c.space.index(n, lab) for lab in space.labels(n)]
        full = c.d(n).submatrix(list(range(c.dim(n + 1))), cols)
        kept_rows = [c.space.index(n + 1, lab) for lab in space.labels(n + 1)]
        sub = full.submatrix(kept_rows, list(range(len(cols))))
        if sub.nnz() != full.nnz():
            raise NotAComplex(f"label subset is not closed under d in degree {n}")
        blocks[n] = sub
    s = CochainComplex(space, GradedMap(space, space, 1, blocks))
    inc = GradedMap.from_label_fn(space, c.space, 0, lambda n, lab: {lab: 1})
    return s, ChainMap(s, c, inc)


def quotient_complex(c: CochainComplex, drop: Callable[[int, Hashable], bool]) -> tuple[CochainComplex, ChainMap]:
    """Quotient by the subcomplex spanned by dropped labels, with the projection."""
    comp = {n: [lab for lab in c.space.labels(n) if not drop(n, lab)] for n in c.degrees()}
    space = GradedVectorSpace(comp)
    blocks = {}
    for n in space.degrees():
        cols = [c.space.index(n, lab) for lab in space.labels(n)]
        rows = [c.space.index(n + 1, lab) for lab in space.labels(n + 1)]
        blocks[n] = c.d(n).submatrix(rows, cols)
    q = CochainComplex(space, GradedMap(space, space, 1, blocks))
    proj = GradedMap.from_label_fn(c.space, space, 0,
                                   lambda n, lab: {} if drop(n, lab) else {lab: 1})
    return q, ChainMap(c, q, proj)


@dataclass
class LongExactSequence:
    """H(A) → H(B) → H(C) → H(A)[1] for a short exact sequence of complexes."""

    degrees: list[int]
    terms: list[tuple[str, int, int]]  # (name, degree, dim)
    maps: list[SparseMatrix]
    nodes: list[ExactnessNode]

    @property
    def exact(self) -> bool:
        return all(n.exact for n in self.nodes)


def connecting_map(i: ChainMap, p: ChainMap, hc: CohomologyGroup, ha_next: CohomologyGroup) -> SparseMatrix:
    """δ: H^n(C) → H^{n+1}(A): lift along p, apply d, pull back along i."""
    n = hc.degree
    B = p.source
    cols = []
    for z in hc.representatives:
        b = solve(p.block(n), z)
        if b is None:
            raise NotAComplex("projection is not surjective")
        db = B.d(n).matvec(b)
        a = solve(i.block(n + 1), db)
        if a is None:
            raise NotAComplex("sequence is not exact in the middle")
        cols.append(ha_next.classify(a))
    return SparseMatrix.from_columns(ha_next.dim, cols)


def long_exact_sequence(i: ChainMap, p: ChainMap, degrees: Iterable[int]) -> LongExactSequence:
    A, B, C = i.source, i.target, p.target
    degrees = sorted(degrees)
    all_degs = set(degrees) | {degrees[-1] + 1}
    HA = cohomology(A, all_degs)
    HB = cohomology(B, degrees)
    HC = cohomology(C, degrees)
    terms, maps = [], []
    for k, n in enumerate(degrees):
        terms += [("A", n, HA[n].dim), ("B", n, HB[n].dim), ("C", n, HC[n].dim)]
        maps.append(induced_map(i, HA[n], HB[n]))
        maps.append(induced_map(p, HB[n], HC[n]))
        if k < len(degrees) - 1:
            maps.append(connecting_map(i, p, HC[n], HA[n + 1]))
    nodes = verify_exact([t[2] for t in terms], maps)
    # the ends of a truncated LES are not forced to be injective/surjective
    return LongExactSequence(degrees, terms, maps, nodes[1:-1])


def vector_from_labels(space: GradedVectorSpace, n: int, v: Mapping) -> dict:
    return {space.index(n, lab): c for lab, c in v.items() if c}


def vector_to_labels(space: GradedVectorSpace, n: int, v: Mapping[int, Fraction]) -> dict:
    labs = space.labels(n)
    return {labs[i]: c for i, c in v.items() if c}


def add_label_vectors(a: Mapping, b: Mapping, scale=1) -> dict:
    return vadd(a, b, scale)
