"""Exact sparse linear algebra over the rationals.

Matrices are stored as sparse rows of :class:`fractions.Fraction`.  Rank is
computed by fraction-free elimination on integer rows (each row is kept
primitive, i.e. divided by the gcd of its entries, which bounds coefficient
growth the same way Bareiss' exact division does); pivots are chosen with
the smallest bit length.  Kernels and solutions go through a reduced echelon
form so that returned bases are deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping

from .errors import ShapeMismatch

Vector = dict  # int index -> Fraction, no explicit zeros


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def clean(v: Mapping[int, Fraction]) -> Vector:
    return {k: frac(c) for k, c in v.items() if c != 0}


def vadd(a: Mapping, b: Mapping, scale=1) -> dict:
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, 0) + scale * c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def vscale(a: Mapping, s) -> dict:
    if s == 0:
        return {}
    return {k: s * c for k, c in a.items()}


class SparseMatrix:
    """Immutable sparse matrix; canonical form is sorted (row, col, value) triplets."""

    __slots__ = ("nrows", "ncols", "_rows")

    def __init__(self, nrows: int, ncols: int, rows: Mapping[int, Mapping[int, Fraction]] | None = None):
        if nrows < 0 or ncols < 0:
            raise ShapeMismatch("negative shape")
        self.nrows = nrows
        self.ncols = ncols
        store = {}
        for r, row in (rows or {}).items():
            if not 0 <= r < nrows:
                raise ShapeMismatch(f"row {r} outside {nrows}")
            row = {c: frac(v) for c, v in row.items() if v != 0}
            for c in row:
                if not 0 <= c < ncols:
                    raise ShapeMismatch(f"column {c} outside {ncols}")
            if row:
                store[r] = row
        self._rows = store

    @classmethod
    def from_triplets(cls, nrows, ncols, triplets: Iterable[tuple[int, int, object]]):
        rows: dict[int, dict[int, Fraction]] = {}
        for r, c, v in triplets:
            v = frac(v)
            row = rows.setdefault(r, {})
            row[c] = row.get(c, 0) + v
        return cls(nrows, ncols, rows)

    @classmethod
    def from_dense(cls, data):
        data = [list(r) for r in data]
        nrows = len(data)
        ncols = len(data[0]) if data else 0
        if any(len(r) != ncols for r in data):
            raise ShapeMismatch("ragged dense matrix")
        return cls(nrows, ncols, {i: {j: v for j, v in enumerate(r)} for i, r in enumerate(data)})

    @classmethod
    def from_columns(cls, nrows, columns: list[Mapping[int, Fraction]]):
        rows: dict[int, dict[int, Fraction]] = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    rows.setdefault(i, {})[j] = v
        return cls(nrows, len(columns), rows)

    @classmethod
    def zeros(cls, nrows, ncols):
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n):
        return cls(n, n, {i: {i: Fraction(1)} for i in range(n)})

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def row(self, r) -> dict:
        return dict(self._rows.get(r, {}))

    def rows(self):
        return {r: dict(row) for r, row in self._rows.items()}

    def triplets(self):
        return [(r, c, v) for r in sorted(self._rows) for c, v in sorted(self._rows[r].items())]

    def nnz(self):
        return sum(len(r) for r in self._rows.values())

    def get(self, r, c):
        return self._rows.get(r, {}).get(c, Fraction(0))

    def column(self, c) -> dict:
        return {r: row[c] for r, row in self._rows.items() if c in row}

    def columns(self) -> list[dict]:
        cols = [dict() for _ in range(self.ncols)]
        for r, row in self._rows.items():
            for c, v in row.items():
                cols[c][r] = v
        return cols

    def to_dense(self):
        return [[self.get(r, c) for c in range(self.ncols)] for r in range(self.nrows)]

    def is_zero(self):
        return not self._rows

    def transpose(self):
        return SparseMatrix(self.ncols, self.nrows, {c: col for c, col in enumerate(self.columns()) if col})

    def matvec(self, v: Mapping[int, Fraction]) -> Vector:
        out = {}
        for r, row in self._rows.items():
            s = sum((c * v[k] for k, c in row.items() if k in v), Fraction(0))
            if s:
                out[r] = s
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ShapeMismatch(f"cannot compose {self.shape} with {other.shape}")
        out = {}
        orows = other._rows
        for r, row in self._rows.items():
            acc: dict[int, Fraction] = {}
            for k, a in row.items():
                for c, b in orows.get(k, {}).items():
                    acc[c] = acc.get(c, 0) + a * b
            acc = {c: v for c, v in acc.items() if v}
            if acc:
                out[r] = acc
        return SparseMatrix(self.nrows, other.ncols, out)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ShapeMismatch(f"cannot add {self.shape} and {other.shape}")
        out = self.rows()
        for r, row in other._rows.items():
            out[r] = vadd(out.get(r, {}), row)
        return SparseMatrix(self.nrows, self.ncols, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return SparseMatrix(self.nrows, self.ncols, {r: vscale(row, s) for r, row in self._rows.items()})

    def __eq__(self, other):
        return isinstance(other, SparseMatrix) and self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        return hash((self.shape, tuple(self.triplets())))

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"

    def submatrix(self, rows: list[int], cols: list[int]) -> "SparseMatrix":
        rpos = {r: i for i, r in enumerate(rows)}
        cpos = {c: j for j, c in enumerate(cols)}
        out = {}
        for r, row in self._rows.items():
            if r in rpos:
                sub = {cpos[c]: v for c, v in row.items() if c in cpos}
                if sub:
                    out[rpos[r]] = sub
        return SparseMatrix(len(rows), len(cols), out)


def block_matrix(blocks: list[list[SparseMatrix | None]], row_sizes: list[int], col_sizes: list[int]) -> SparseMatrix:
    """Assemble a block matrix; ``None`` stands for a zero block."""
    roff = [0]
    for s in row_sizes:
        roff.append(roff[-1] + s)
    coff = [0]
    for s in col_sizes:
        coff.append(coff[-1] + s)
    out: dict[int, dict[int, Fraction]] = {}
    for bi, brow in enumerate(blocks):
        for bj, blk in enumerate(brow):
            if blk is None:
                continue
            if blk.shape != (row_sizes[bi], col_sizes[bj]):
                raise ShapeMismatch(f"block ({bi},{bj}) has shape {blk.shape}")
            for r, row in blk._rows.items():
                dst = out.setdefault(roff[bi] + r, {})
                for c, v in row.items():
                    dst[coff[bj] + c] = v
    return SparseMatrix(roff[-1], coff[-1], out)


# ---------------------------------------------------------------- elimination


def _primitive(row: Mapping[int, Fraction]) -> dict[int, int]:
    den = 1
    for v in row.values():
        den = lcm(den, v.denominator)
    ints = {c: int(v * den) for c, v in row.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
    if g > 1:
        ints = {c: v // g for c, v in ints.items()}
    return ints


def echelon_pivots(m: SparseMatrix) -> list[tuple[int, dict[int, int]]]:
    """Fraction-free row echelon form.

    Returns ``(pivot_column, integer_row)`` pairs in increasing pivot order.
    """
    work = [_primitive(row) for row in m._rows.values()]
    work = [r for r in work if r]
    pivots = []
    while work:
        col = min(min(r) for r in work)
        cands = [i for i, r in enumerate(work) if col in r]
        best = min(cands, key=lambda i: (abs(work[i][col]).bit_length(), len(work[i]), i))
        prow = work[best]
        a = prow[col]
        rest = []
        for i, r in enumerate(work):
            if i == best:
                continue
            b = r.get(col)
            if b is None:
                rest.append(r)
                continue
            # r <- a*r - b*p, then strip content
            new = {c: a * v for c, v in r.items()}
            for c, v in prow.items():
                s = new.get(c, 0) - b * v
                if s:
                    new[c] = s
                else:
                    new.pop(c, None)
            if new:
                g = 0
                for v in new.values():
                    g = gcd(g, v)
                    if g == 1:
                        break
                if g > 1:
                    new = {c: v // g for c, v in new.items()}
                rest.append(new)
        pivots.append((col, prow))
        work = rest
    return pivots


def rank(m: SparseMatrix) -> int:
    return len(echelon_pivots(m))


def rref(m: SparseMatrix) -> list[tuple[int, dict[int, Fraction]]]:
    """Reduced row echelon form as ``(pivot_column, row)`` pairs, pivots equal to 1."""
    piv = echelon_pivots(m)
    rows = []
    for col, r in piv:
        a = r[col]
        rows.append((col, {c: Fraction(v, a) for c, v in r.items()}))
    # back substitution, bottom-up
    for i in range(len(rows) - 1, -1, -1):
        col_i, row_i = rows[i]
        for j in range(i):
            col_j, row_j = rows[j]
            f = row_j.get(col_i)
            if f:
                rows[j] = (col_j, vadd(row_j, row_i, -f))
    return rows


def kernel_basis(m: SparseMatrix) -> list[Vector]:
    """Basis of the right kernel, one vector per free column (ascending)."""
    red = rref(m)
    pivcols = {col for col, _ in red}
    basis = []
    for f in range(m.ncols):
        if f in pivcols:
            continue
        v = {f: Fraction(1)}
        for col, row in red:
            c = row.get(f)
            if c:
                v[col] = -c
        basis.append(v)
    return basis


def solve(m: SparseMatrix, b: Mapping[int, Fraction]) -> Vector | None:
    """A solution ``x`` of ``m x = b`` (free variables set to zero) or ``None``."""
    aug = {r: dict(row) for r, row in m._rows.items()}
    for r, v in b.items():
        if v:
            aug.setdefault(r, {})[m.ncols] = frac(v)
    red = rref(SparseMatrix(m.nrows, m.ncols + 1, aug))
    x = {}
    for col, row in red:
        if col == m.ncols:
            return None
        val = row.get(m.ncols)
        if val:
            x[col] = val
    return x


class Reducer:
    """Incremental row space with tags.

    Each stored vector carries a tag (a sparse vector in some coordinate
    space); reducing a vector accumulates the tags of the vectors it used.
    This is how cohomology classes are given coordinates.
    """

    def __init__(self):
        self._rows: dict[int, tuple[dict, dict]] = {}  # pivot col -> (row with pivot 1, tag)

    def __len__(self):
        return len(self._rows)

    def reduce(self, v: Mapping[int, Fraction]) -> tuple[dict, dict]:
        # stored rows are fully reduced, so one pass over v's pivots suffices
        v = dict(v)
        tag: dict = {}
        for c in [c for c in v if c in self._rows]:
            row, rtag = self._rows[c]
            f = v[c]
            v = vadd(v, row, -f)
            tag = vadd(tag, rtag, f)
        return v, tag

    def add(self, v: Mapping[int, Fraction], tag: Mapping | None = None) -> bool:
        """Add ``v`` with ``tag``; return False (and store nothing) if dependent."""
        rem, used = self.reduce(v)
        if not rem:
            return False
        piv = min(rem)
        a = rem[piv]
        row = vscale(rem, 1 / a)
        rtag = vscale(vadd(dict(tag or {}), used, -1), 1 / a)
        # keep earlier rows reduced against the new pivot
        for c, (orow, otag) in list(self._rows.items()):
            f = orow.get(piv)
            if f:
                self._rows[c] = (vadd(orow, row, -f), vadd(otag, rtag, -f))
        self._rows[piv] = (row, rtag)
        return True

    def contains(self, v) -> bool:
        rem, _ = self.reduce(v)
        return not rem
