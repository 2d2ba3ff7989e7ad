"""Artinian coefficient rings, L ⊗ m_A, Maurer-Cartan elements and the gauge action."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Hashable, Iterable, Mapping

from .complexes import cohomology_at
from .dgla import DGLA
from .errors import BadParams, CarrierMismatch, DegreeError, NotFirstOrderMC, UnsupportedOrder
from .linalg import Reducer, SparseMatrix, frac, kernel_basis, solve, vadd, vscale


class ArtinAlgebra:
    """Local algebra K ⊕ m_A, described by a multiplication table on a basis of m_A.

    ``weights[b]`` is the largest k with b ∈ m^k.  The basis is *adapted* when
    every m^k is spanned by the basis elements of weight ≥ k; order-by-order
    solvers need this.
    """

    def __init__(self, name: str, m_basis: Iterable[Hashable], mult: Mapping[tuple, Mapping],
                 nilpotency_order: int | None = None):
        self.name = name
        self.m_basis = tuple(m_basis)
        if len(set(self.m_basis)) != len(self.m_basis):
            raise BadParams("repeated basis label")
        self._pos = {b: i for i, b in enumerate(self.m_basis)}
        table = {}
        for (a, b), img in mult.items():
            for lab in (a, b, *img):
                if lab not in self._pos:
                    raise BadParams(f"unknown monomial {lab!r}")
            img = {k: frac(v) for k, v in img.items() if v}
            if img:
                table[(a, b)] = img
                table.setdefault((b, a), img)
        self._mult = table
        for a in self.m_basis:
            for b in self.m_basis:
                if self._mult.get((a, b), {}) != self._mult.get((b, a), {}):
                    raise BadParams(f"multiplication not commutative on {a!r}, {b!r}")
                for c in self.m_basis:
                    if self.mul(self.mul({a: 1}, {b: 1}), {c: 1}) != self.mul({a: 1}, self.mul({b: 1}, {c: 1})):
                        raise BadParams(f"multiplication not associative on {a!r}, {b!r}, {c!r}")
        self._filtration()
        if nilpotency_order is not None and nilpotency_order != self.nilpotency_order:
            raise BadParams(f"declared nilpotency {nilpotency_order}, actual {self.nilpotency_order}")

    def _filtration(self):
        # powers[k] = spanning set of m^k
        n = len(self.m_basis)
        powers = [[{b: Fraction(1)} for b in self.m_basis]]
        while powers[-1]:
            nxt = []
            red = Reducer()
            for u in powers[-1]:
                for b in self.m_basis:
                    p = self.mul(u, {b: 1})
                    if p and red.add({self._pos[k]: v for k, v in p.items()}):
                        nxt.append(p)
            powers.append(nxt)
            if len(powers) > n + 2:
                raise BadParams("maximal ideal is not nilpotent")
        self.nilpotency_order = len(powers)
        weights = {}
        adapted = True
        for b in self.m_basis:
            weights[b] = 1
        for k in range(1, len(powers) - 1):
            red = Reducer()
            for u in powers[k]:
                red.add({self._pos[c]: v for c, v in u.items()})
            for b in self.m_basis:
                if red.contains({self._pos[b]: 1}):
                    weights[b] = k + 1
            span = sum(1 for b in self.m_basis if weights[b] >= k + 1)
            if span != len(red):
                adapted = False
        self.weights = weights
        self.adapted = adapted

    def mul(self, x: Mapping, y: Mapping) -> dict:
        out: dict = {}
        for a, ca in x.items():
            for b, cb in y.items():
                img = self._mult.get((a, b))
                if img:
                    out = vadd(out, img, ca * cb)
        return out

    def mul_basis(self, a, b) -> dict:
        return self._mult.get((a, b), {})

    def table(self) -> dict:
        return dict(self._mult)

    def __repr__(self):
        return f"ArtinAlgebra({self.name}, dim m = {len(self.m_basis)}, N = {self.nilpotency_order})"


def _mono(i: int, j: int) -> str:
    def part(v, e):
        return "" if e == 0 else (v if e == 1 else f"{v}^{e}")
    return part("x", i) + part("y", j)


def make_artin(kind: str, n: int | None = None) -> ArtinAlgebra:
    if kind == "dual_numbers":
        if n not in (None, 2):
            raise BadParams("dual numbers have n = 2")
        return ArtinAlgebra("K[eps]", ["eps"], {}, 2)
    if n is None or not isinstance(n, int) or n < 2:
        raise BadParams(f"{kind} needs an integer n ≥ 2")
    if kind == "truncated_poly":
        lab = ["t"] + [f"t^{i}" for i in range(2, n)]
        mult = {}
        for i in range(1, n):
            for j in range(i, n):
                if i + j < n:
                    mult[(lab[i - 1], lab[j - 1])] = {lab[i + j - 1]: 1}
        return ArtinAlgebra(f"K[t]/(t^{n})", lab, mult, n)
    if kind == "truncated_two_vars":
        monos = [(i, s - i) for s in range(1, n) for i in range(s, -1, -1)]
        mult = {}
        for (a, b) in monos:
            for (c, d) in monos:
                if a + b + c + d < n:
                    mult[(_mono(a, b), _mono(c, d))] = {_mono(a + c, b + d): 1}
        return ArtinAlgebra(f"K[x,y]/(x,y)^{n}", [_mono(*m) for m in monos], mult, n)
    raise BadParams(f"unknown Artin algebra kind {kind!r}")


# ------------------------------------------------------------ L ⊗ m_A


class NilpotentElement:
    """Element of L^degree ⊗ m_A, stored as {(L label, m label): coefficient}."""

    __slots__ = ("carrier", "algebra", "coeffs", "degree")

    def __init__(self, carrier: DGLA, algebra: ArtinAlgebra, coeffs: Mapping[tuple, object], degree: int | None = None):
        self.carrier = carrier
        self.algebra = algebra
        c = {}
        for (lab, mon), v in coeffs.items():
            v = frac(v)
            if v:
                if mon not in algebra._pos:
                    raise BadParams(f"unknown monomial {mon!r}")
                c[(lab, mon)] = v
        degs = {carrier.degree(lab) for lab, _ in c}
        if len(degs) > 1:
            raise DegreeError(f"inhomogeneous element, degrees {sorted(degs)}")
        if degs:
            d0 = degs.pop()
            if degree is not None and degree != d0:
                raise DegreeError(f"element has degree {d0}, declared {degree}")
            degree = d0
        if degree is None:
            raise DegreeError("the zero element needs an explicit degree")
        self.coeffs = c
        self.degree = degree

    @classmethod
    def zero(cls, carrier, algebra, degree):
        return cls(carrier, algebra, {}, degree)

    @classmethod
    def from_parts(cls, carrier, algebra, parts: Mapping[Hashable, Mapping], degree=None):
        """``parts`` maps an m-label to an element of L."""
        return cls(carrier, algebra, {(lab, mon): c for mon, v in parts.items() for lab, c in v.items()}, degree)

    def part(self, mon) -> dict:
        return {lab: c for (lab, m), c in self.coeffs.items() if m == mon}

    def parts(self) -> dict:
        out: dict = {}
        for (lab, m), c in self.coeffs.items():
            out.setdefault(m, {})[lab] = c
        return out

    def _like(self, coeffs, degree=None):
        return NilpotentElement(self.carrier, self.algebra, coeffs, self.degree if degree is None else degree)

    def __add__(self, other):
        _compat(self, other)
        if self.degree != other.degree:
            raise DegreeError("adding elements of different degrees")
        return self._like(vadd(self.coeffs, other.coeffs))

    def __sub__(self, other):
        _compat(self, other)
        if self.degree != other.degree:
            raise DegreeError("subtracting elements of different degrees")
        return self._like(vadd(self.coeffs, other.coeffs, -1))

    def __neg__(self):
        return self._like(vscale(self.coeffs, -1))

    def scale(self, s):
        return self._like(vscale(self.coeffs, frac(s)))

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        return (isinstance(other, NilpotentElement) and self.carrier is other.carrier
                and self.algebra is other.algebra and self.degree == other.degree and self.coeffs == other.coeffs)

    __hash__ = None

    def __repr__(self):
        return f"NilpotentElement(deg {self.degree}, {self.coeffs})"


def _compat(x: NilpotentElement, y: NilpotentElement):
    if x.carrier is not y.carrier or x.algebra is not y.algebra:
        raise CarrierMismatch("elements live in different L ⊗ m_A")


def nd(x: NilpotentElement) -> NilpotentElement:
    out: dict = {}
    for (lab, mon), c in x.coeffs.items():
        for k, v in x.carrier.d_basis(lab).items():
            key = (k, mon)
            s = out.get(key, 0) + c * v
            if s:
                out[key] = s
            else:
                out.pop(key)
    return x._like(out, x.degree + 1)


def nbracket(x: NilpotentElement, y: NilpotentElement) -> NilpotentElement:
    """[a⊗m, b⊗n] = [a, b]⊗mn (m_A sits in degree 0)."""
    _compat(x, y)
    A, L = x.algebra, x.carrier
    out: dict = {}
    for (a, m), ca in x.coeffs.items():
        for (b, n), cb in y.coeffs.items():
            mn = A.mul_basis(m, n)
            if not mn:
                continue
            ab = L.bracket_basis(a, b)
            for k, v in ab.items():
                for mon, w in mn.items():
                    key = (k, mon)
                    s = out.get(key, 0) + ca * cb * v * w
                    if s:
                        out[key] = s
                    else:
                        out.pop(key)
    return x._like(out, x.degree + y.degree)


def mc_residual(x: NilpotentElement) -> NilpotentElement:
    if x.degree != 1:
        raise DegreeError("Maurer-Cartan residual needs a degree-1 element")
    return nd(x) + nbracket(x, x).scale(Fraction(1, 2))


def is_mc(x: NilpotentElement) -> bool:
    return mc_residual(x).is_zero()


# ------------------------------------------------------------------ BCH


@lru_cache(maxsize=None)
def bch_word_coefficients(order: int) -> tuple[tuple[tuple[int, ...], Fraction], ...]:
    """Dynkin coefficients: BCH(X, Y) = Σ c_w [w_1, [w_2, … w_k]] over words in {0: X, 1: Y}.

    Words longer than ``order − 1`` are dropped since they vanish in L ⊗ m_A.
    """
    top = order - 1
    if top < 1:
        return ()
    # e^X e^Y − 1 in the free associative algebra, truncated at length ``top``
    z: dict[tuple, Fraction] = {}
    for p in range(top + 1):
        for q in range(top + 1 - p):
            if p + q:
                z[(0,) * p + (1,) * q] = Fraction(1, factorial(p) * factorial(q))
    log: dict[tuple, Fraction] = {}
    power = dict(z)
    for m in range(1, top + 1):
        coef = Fraction((-1) ** (m - 1), m)
        for w, c in power.items():
            log[w] = log.get(w, 0) + coef * c
        nxt: dict = {}
        for w1, c1 in power.items():
            for w2, c2 in z.items():
                if len(w1) + len(w2) <= top:
                    w = w1 + w2
                    nxt[w] = nxt.get(w, 0) + c1 * c2
        power = nxt
    # Dynkin-Specht-Wever: a homogeneous Lie element P of degree k equals (1/k) Σ c_w [w]
    return tuple(sorted((w, c / len(w)) for w, c in log.items() if c))


def bch(a: NilpotentElement, b: NilpotentElement) -> NilpotentElement:
    _compat(a, b)
    if a.degree != 0 or b.degree != 0:
        raise DegreeError("BCH needs degree-0 elements")
    memo: dict[tuple, NilpotentElement] = {}
    gens = (a, b)

    def nested(w):
        hit = memo.get(w)
        if hit is None:
            if len(w) == 1:
                hit = gens[w[0]]
            else:
                inner = nested(w[1:])
                hit = inner if inner.is_zero() else nbracket(gens[w[0]], inner)
            memo[w] = hit
        return hit

    out = NilpotentElement.zero(a.carrier, a.algebra, 0)
    for w, c in bch_word_coefficients(a.algebra.nilpotency_order):
        term = nested(w)
        if not term.is_zero():
            out = out + term.scale(c)
    return out


def gauge(a: NilpotentElement, x: NilpotentElement) -> NilpotentElement:
    """e^a * x = x + Σ_{n≥0} ad_a^n ([a, x] − da) / (n+1)!."""
    _compat(a, x)
    if a.degree != 0 or x.degree != 1:
        raise DegreeError("gauge action needs a in degree 0 and x in degree 1")
    term = nbracket(a, x) - nd(a)
    out = x
    n = 0
    while not term.is_zero():
        out = out + term
        n += 1
        term = nbracket(a, term).scale(Fraction(1, n + 1))
        if n > a.algebra.nilpotency_order + 1:
            raise UnsupportedOrder("gauge series failed to terminate")
    return out


# --------------------------------------------------- obstructions and classes


@dataclass
class ObstructionResult:
    class_coords: dict  # coordinates in the H² representative basis
    vanishes: bool
    lift: NilpotentElement | None  # over K[t]/(t^3), when the class vanishes
    cocycle: dict  # ½[x1, x1] in L²


def _l_part(x: NilpotentElement) -> dict:
    parts = x.parts()
    if set(parts) - {x.algebra.m_basis[0]} or len(x.algebra.m_basis) != 1:
        raise NotFirstOrderMC("expected an element over the dual numbers")
    return parts.get(x.algebra.m_basis[0], {})


def primary_obstruction(x1: NilpotentElement) -> ObstructionResult:
    L = x1.carrier
    if x1.algebra.nilpotency_order != 2 or x1.degree != 1:
        raise NotFirstOrderMC("expected a degree-1 element over the dual numbers")
    v = _l_part(x1)
    if L.d(v):
        raise NotFirstOrderMC("x1 is not closed")
    w = {k: c / 2 for k, c in L.bracket(v, v).items()}
    C = L.complex()
    h2 = cohomology_at(C, 2)
    wv = {C.space.index(2, k): c for k, c in w.items()}
    coords = h2.classify(wv)
    sol = solve(C.d(1), {i: -c for i, c in wv.items()})
    if (sol is None) != bool(coords):
        raise AssertionError("obstruction class disagrees with solvability")
    lift = None
    if sol is not None:
        A3 = make_artin("truncated_poly", 3)
        labs = C.space.labels(1)
        x2 = {labs[i]: c for i, c in sol.items()}
        lift = NilpotentElement.from_parts(L, A3, {"t": v, "t^2": x2}, 1)
        if not is_mc(lift):
            raise AssertionError("constructed lift is not Maurer-Cartan")
    return ObstructionResult(coords, not coords, lift, w)


def first_order_classes(L: DGLA) -> tuple[int, list[NilpotentElement]]:
    C = L.complex()
    h1 = cohomology_at(C, 1)
    A = make_artin("dual_numbers")
    labs = C.space.labels(1)
    reps = [NilpotentElement.from_parts(L, A, {"eps": {labs[i]: c for i, c in r.items()}}, 1)
            for r in h1.representatives]
    return h1.dim, reps


# ----------------------------------------------------------- gauge equivalence


def _flat_index(L: DGLA, degree: int, monos) -> dict:
    idx = {}
    for lab in L.space.labels(degree):
        for m in monos:
            idx[(lab, m)] = len(idx)
    return idx


def gauge_equivalent(x: NilpotentElement, y: NilpotentElement) -> NilpotentElement | None:
    """A degree-0 ``a`` with e^a * x = y, or None; nilpotency order at most 3."""
    _compat(x, y)
    A, L = x.algebra, x.carrier
    if x.degree != 1 or y.degree != 1:
        raise DegreeError("gauge equivalence is between degree-1 elements")
    N = A.nilpotency_order
    if N > 3:
        raise UnsupportedOrder(f"nilpotency order {N} > 3")
    if not A.adapted:
        raise UnsupportedOrder("basis of m_A is not adapted to the m-adic filtration")
    m1 = [m for m in A.m_basis if A.weights[m] == 1]
    m2 = [m for m in A.m_basis if A.weights[m] == 2]
    d0 = L.complex().d(0)
    l0 = L.space.labels(0)
    l1 = L.space.labels(1)
    i1 = {lab: i for i, lab in enumerate(l1)}

    # order 1: d a_μ = x_μ − y_μ
    p_parts = {}
    diff = x - y
    for mon in m1:
        rhs = {i1[k]: c for k, c in diff.part(mon).items()}
        sol = solve(d0, rhs)
        if sol is None:
            return None
        p_parts[mon] = {l0[i]: c for i, c in sol.items()}
    p = NilpotentElement.from_parts(L, A, p_parts, 0)
    if not m2:
        return p if gauge(p, x) == y else None

    # order 2: d a2 − ½[Σ c_j z_j, x + y] = (x − y)_2 + ½[p, x + y]
    z0 = [{l0[i]: c for i, c in z.items()} for z in kernel_basis(d0)]
    zs = [NilpotentElement.from_parts(L, A, {mon: z}, 0) for mon in m1 for z in z0]
    s = x + y
    rows = _flat_index(L, 1, m2)
    ncols = len(l0) * len(m2) + len(zs)
    cols: list[dict] = []
    for lab in l0:
        for mon in m2:
            e = NilpotentElement(L, A, {(lab, mon): 1}, 0)
            cols.append({rows[k]: c for k, c in nd(e).coeffs.items()})
    for z in zs:
        cols.append({rows[k]: -c / 2 for k, c in nbracket(z, s).coeffs.items()})
    rhs_el = NilpotentElement.from_parts(L, A, {m: diff.part(m) for m in m2}, 1) + nbracket(p, s).scale(Fraction(1, 2))
    rhs = {rows[k]: c for k, c in rhs_el.coeffs.items()}
    sol = solve(SparseMatrix.from_columns(len(rows), cols), rhs)
    if sol is None:
        return None
    a = p
    off = len(l0) * len(m2)
    a2 = {}
    for j, c in sol.items():
        if j < off:
            lab, mon = l0[j // len(m2)], m2[j % len(m2)]
            a2[(lab, mon)] = c
        else:
            a = a + zs[j - off].scale(c)
    a = a + NilpotentElement(L, A, a2, 0)
    if gauge(a, x) != y:
        raise AssertionError("gauge witness failed re-verification")
    return a


def irrelevant_stabilizer(x: NilpotentElement, u: NilpotentElement) -> NilpotentElement:
    """a = du + [x, u]; e^a fixes x."""
    if u.degree != -1:
        raise DegreeError("u must have degree −1")
    if x.degree != 1:
        raise DegreeError("x must have degree 1")
    a = nd(u) + nbracket(x, u)
    if is_mc(x) and gauge(a, x) != x:
        raise AssertionError("irrelevant stabilizer does not fix x")
    return a

