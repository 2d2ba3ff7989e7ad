"""Coordinate rings of cover simplices and matrices over them.

Ring elements are sparse dicts ``monomial -> Fraction``.  For Laurent rings
a monomial is an exponent tuple; for finite algebras it is a basis label.
Arithmetic is exact and unbounded here; degree windows are imposed by the
Čech layer.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import BadParams, ShapeMismatch
from .linalg import SparseMatrix, frac, solve, vadd, vscale

RingElement = dict


class Ring:
    """Interface shared by the ring models."""

    name = "ring"

    def one(self) -> RingElement:
        raise NotImplementedError

    def mul_mono(self, a, b) -> RingElement:
        raise NotImplementedError

    def contains_mono(self, m) -> bool:
        return True

    def inverse(self, x: RingElement) -> RingElement:
        raise NotImplementedError

    def mul(self, x: Mapping, y: Mapping) -> RingElement:
        out: dict = {}
        for a, ca in x.items():
            for b, cb in y.items():
                for m, c in self.mul_mono(a, b).items():
                    s = out.get(m, 0) + ca * cb * c
                    if s:
                        out[m] = s
                    else:
                        out.pop(m)
        return out

    def contains(self, x: Mapping) -> bool:
        return all(self.contains_mono(m) for m in x)

    def is_unit(self, x: Mapping) -> bool:
        try:
            self.inverse(x)
        except BadParams:
            return False
        return True


class LaurentRing(Ring):
    """K[z_1^{±1}, …] restricted to a sign region per variable.

    ``region[i]`` is ``+1`` (non-negative exponents only), ``-1`` (non-positive)
    or ``0`` (unrestricted).
    """

    def __init__(self, region: Sequence[int], names: Sequence[str] | None = None):
        self.region = tuple(region)
        self.nvars = len(self.region)
        self.names = tuple(names) if names else tuple(f"z{i}" if self.nvars > 1 else "z" for i in range(self.nvars))
        if any(r not in (-1, 0, 1) for r in self.region):
            raise BadParams("region entries must be -1, 0 or 1")
        self.name = "K[" + ",".join(
            n if r > 0 else (f"{n}^-1" if r < 0 else f"{n},{n}^-1") for n, r in zip(self.names, self.region)) + "]"

    def one(self):
        return {(0,) * self.nvars: Fraction(1)}

    def mono(self, *exps):
        return {tuple(exps): Fraction(1)}

    def mul_mono(self, a, b):
        return {tuple(x + y for x, y in zip(a, b)): Fraction(1)}

    def contains_mono(self, m):
        return all(r == 0 or e * r >= 0 for e, r in zip(m, self.region))

    def inverse(self, x):
        if len(x) != 1:
            raise BadParams("only monomials are units in a Laurent ring")
        (m, c), = x.items()
        inv = tuple(-e for e in m)
        if not self.contains_mono(inv):
            raise BadParams(f"{m} is not a unit in {self.name}")
        return {inv: 1 / c}

    def __eq__(self, other):
        return isinstance(other, LaurentRing) and self.region == other.region and self.names == other.names

    def __hash__(self):
        return hash(("laurent", self.region, self.names))

    def __repr__(self):
        return f"LaurentRing({self.name})"


class FiniteRing(Ring):
    """Finite-dimensional commutative K-algebra given by a basis and multiplication table."""

    def __init__(self, basis: Iterable[Hashable], mult: Mapping[tuple, Mapping], unit: Mapping, name="A"):
        self.basis = tuple(basis)
        self._pos = {b: i for i, b in enumerate(self.basis)}
        self._mult = {}
        for (a, b), img in mult.items():
            for lab in (a, b, *img):
                if lab not in self._pos:
                    raise BadParams(f"unknown basis element {lab!r}")
            self._mult[(a, b)] = {k: frac(v) for k, v in img.items() if v}
            self._mult.setdefault((b, a), self._mult[(a, b)])
        self._unit = {k: frac(v) for k, v in unit.items() if v}
        self.name = name
        for a in self.basis:
            if self.mul(self._unit, {a: 1}) != {a: Fraction(1)}:
                raise BadParams("unit does not act as identity")

    @classmethod
    def field(cls):
        return cls(["1"], {("1", "1"): {"1": 1}}, {"1": 1}, name="K")

    def one(self):
        return dict(self._unit)

    def mul_mono(self, a, b):
        return self._mult.get((a, b), {})

    def inverse(self, x):
        n = len(self.basis)
        cols = []
        for b in self.basis:
            p = self.mul(x, {b: 1})
            cols.append({self._pos[k]: v for k, v in p.items()})
        m = SparseMatrix.from_columns(n, cols)
        sol = solve(m, {self._pos[k]: v for k, v in self._unit.items()})
        if sol is None:
            raise BadParams("element is not a unit")
        return {self.basis[i]: v for i, v in sol.items()}

    def __eq__(self, other):
        return isinstance(other, FiniteRing) and self.basis == other.basis and self._mult == other._mult

    def __hash__(self):
        return hash(("finite", self.basis))

    def __repr__(self):
        return f"FiniteRing({self.name})"


def radd(x: Mapping, y: Mapping, s=1) -> RingElement:
    return vadd(x, y, s)


def rscale(x: Mapping, s) -> RingElement:
    return vscale(x, s)


class RingMatrix:
    """Dense-shaped matrix with sparse ring-element entries."""

    __slots__ = ("ring", "nrows", "ncols", "entries")

    def __init__(self, ring: Ring, entries: Sequence[Sequence[Mapping]]):
        self.ring = ring
        self.entries = tuple(tuple({k: frac(v) for k, v in e.items() if v} for e in row) for row in entries)
        self.nrows = len(self.entries)
        self.ncols = len(self.entries[0]) if self.entries else 0
        if any(len(r) != self.ncols for r in self.entries):
            raise ShapeMismatch("ragged ring matrix")

    @classmethod
    def identity(cls, ring, n):
        return cls(ring, [[ring.one() if i == j else {} for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, ring, r, c):
        return cls(ring, [[{} for _ in range(c)] for _ in range(r)])

    @classmethod
    def diag(cls, ring, elems):
        n = len(elems)
        return cls(ring, [[elems[i] if i == j else {} for j in range(n)] for i in range(n)])

    @classmethod
    def scalar(cls, ring, rows):
        """From a nested list of rationals."""
        one = ring.one()
        return cls(ring, [[rscale(one, frac(v)) for v in row] for row in rows])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def with_ring(self, ring):
        return RingMatrix(ring, self.entries)

    def __matmul__(self, other: "RingMatrix") -> "RingMatrix":
        if self.ncols != other.nrows:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        R = self.ring
        out = []
        for i in range(self.nrows):
            row = []
            for j in range(other.ncols):
                acc: dict = {}
                for k in range(self.ncols):
                    a = self.entries[i][k]
                    if a:
                        b = other.entries[k][j]
                        if b:
                            acc = radd(acc, R.mul(a, b))
                row.append(acc)
            out.append(row)
        return RingMatrix(R, out)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ShapeMismatch("adding ring matrices of different shapes")
        return RingMatrix(self.ring, [[radd(a, b) for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def scale(self, s):
        return RingMatrix(self.ring, [[rscale(a, frac(s)) for a in r] for r in self.entries])

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, RingMatrix) and self.entries == other.entries

    __hash__ = None

    def transpose(self):
        return RingMatrix(self.ring, [[self.entries[i][j] for i in range(self.nrows)] for j in range(self.ncols)])

    def is_zero(self):
        return all(not e for r in self.entries for e in r)

    def is_identity(self):
        return self == RingMatrix.identity(self.ring, self.nrows) and self.nrows == self.ncols

    def monomials(self) -> set:
        return {m for r in self.entries for e in r for m in e}

    def in_ring(self, ring: Ring) -> bool:
        return all(ring.contains(e) for r in self.entries for e in r)

    def apply(self, v: Sequence[Mapping]) -> list:
        return [(self @ RingMatrix(self.ring, [[x] for x in v])).entries[i][0] for i in range(self.nrows)]

    def det(self) -> RingElement:
        n = self.nrows
        if n != self.ncols:
            raise ShapeMismatch("determinant of a non-square matrix")
        if n == 0:
            return self.ring.one()
        if n > 7:
            raise BadParams("determinant only for matrices up to size 7")
        R = self.ring
        out: dict = {}
        for perm in permutations(range(n)):
            term = R.one()
            for i, j in enumerate(perm):
                e = self.entries[i][j]
                if not e:
                    term = {}
                    break
                term = R.mul(term, e)
            if term:
                out = radd(out, term, _perm_sign(perm))
        return out

    def minor(self, i, j):
        return RingMatrix(self.ring, [[e for c, e in enumerate(r) if c != j] for k, r in enumerate(self.entries) if k != i])

    def inverse(self) -> "RingMatrix":
        """Adjugate over a unit determinant."""
        n = self.nrows
        R = self.ring
        dinv = R.inverse(self.det())
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                c = self.minor(j, i).det() if n > 1 else R.one()
                row.append(rscale(R.mul(c, dinv), -1 if (i + j) % 2 else 1))
            out.append(row)
        return RingMatrix(R, out)


def _perm_sign(p) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def kron(a: RingMatrix, b: RingMatrix) -> RingMatrix:
    R = a.ring
    rows = []
    for i in range(a.nrows):
        for k in range(b.nrows):
            row = []
            for j in range(a.ncols):
                for l in range(b.ncols):
                    x, y = a.entries[i][j], b.entries[k][l]
                    row.append(R.mul(x, y) if x and y else {})
            rows.append(row)
    return RingMatrix(R, rows)


def block_diag(ring, blocks: list[RingMatrix]) -> RingMatrix:
    n = sum(b.nrows for b in blocks)
    m = sum(b.ncols for b in blocks)
    rows = [[{} for _ in range(m)] for _ in range(n)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.nrows):
            for j in range(b.ncols):
                rows[r0 + i][c0 + j] = b.entries[i][j]
        r0 += b.nrows
        c0 += b.ncols
    return RingMatrix(ring, rows)


def vec_index(i: int, j: int, nrows: int) -> int:
    """Column-major position of entry (i, j) in a matrix with ``nrows`` rows."""
    return j * nrows + i


def conjugation_matrix(tg: RingMatrix, tf_inv: RingMatrix) -> RingMatrix:
    """Matrix of φ ↦ tg φ tf_inv on column-major vec(φ): (tf_inv)^T ⊗ tg."""
    return kron(tf_inv.transpose(), tg)
