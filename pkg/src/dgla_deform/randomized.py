"""Seeded random instances for property suites: dgLas, perturbations, MC elements."""

from __future__ import annotations

import random
from fractions import Fraction

from .artin import ArtinAlgebra, NilpotentElement, gauge, is_mc, make_artin, mc_residual
from .complexes import GradedVectorSpace
from .dgla import DGLA, matrix_dgla
from .linalg import SparseMatrix, kernel_basis, rank, solve, vadd


def _rand_coeff(rng: random.Random, lo=-2, hi=2, zero=True) -> Fraction:
    while True:
        v = rng.randint(lo, hi)
        if v or zero:
            return Fraction(v)


def random_invertible(rng: random.Random, n: int) -> SparseMatrix:
    """Unipotent-times-permutation integer matrix (always invertible)."""
    perm = list(range(n))
    rng.shuffle(perm)
    rows = {}
    for i in range(n):
        row = {perm[i]: Fraction(1)}
        for j in range(i + 1, n):
            c = _rand_coeff(rng, -1, 1)
            if c:
                row[perm[j]] = c
        rows[i] = row
    m = SparseMatrix(n, n, rows)
    assert rank(m) == n
    return m


def _inverse(m: SparseMatrix) -> SparseMatrix:
    n = m.nrows
    cols = [solve(m, {i: 1}) for i in range(n)]
    return SparseMatrix.from_columns(n, cols)


def transport_dgla(g: DGLA, changes: dict[int, SparseMatrix], name=None) -> DGLA:
    """Rewrite ``g`` in the basis f_k = Σ_j Q_{jk} e_j, Q given per degree."""
    space = g.space
    new_labels = {n: [("f", n, k) for k in range(space.dim(n))] for n in space.degrees()}
    nspace = GradedVectorSpace(new_labels)
    inv = {n: _inverse(changes[n]) for n in space.degrees()}

    def to_old(lab):
        _, n, k = lab
        labs = space.labels(n)
        return {labs[j]: c for j, c in changes[n].column(k).items()}

    def to_new(x):
        by_deg: dict = {}
        for lab, c in x.items():
            n = g.degree(lab)
            by_deg.setdefault(n, {})[space.index(n, lab)] = c
        out = {}
        for n, v in by_deg.items():
            for k, c in inv[n].matvec(v).items():
                out[("f", n, k)] = c
        return out

    labels = [lab for n in nspace.degrees() for lab in nspace.labels(n)]
    order = {lab: i for i, lab in enumerate(labels)}
    table = {}
    for a in labels:
        for b in labels:
            if order[a] <= order[b]:
                img = to_new(g.bracket(to_old(a), to_old(b)))
                if img:
                    table[(a, b)] = img
    d = {a: to_new(g.d(to_old(a))) for a in labels}
    return DGLA(nspace, d, table, name=name or f"{g.name}'")


def random_graded_degrees(rng: random.Random, max_dim=3) -> list[int]:
    r = rng.randint(1, max_dim)
    lo = rng.choice([-1, 0])
    return sorted(rng.randint(lo, lo + 2) for _ in range(r))


def random_delta(rng: random.Random, degrees: list[int]) -> dict:
    """A square-zero degree-one operator: random pairs v_i ↦ v_j conjugated by a graded basis change."""
    r = len(degrees)
    free = list(range(r))
    rng.shuffle(free)
    J = {}
    used = set()
    for i in free:
        if i in used or rng.random() < 0.3:
            continue
        targets = [j for j in range(r) if j not in used and j != i and degrees[j] == degrees[i] + 1]
        if targets:
            j = rng.choice(targets)
            J[(j, i)] = Fraction(1)
            used.update((i, j))
    # conjugate by a degree-preserving change
    P = {}
    for n in set(degrees):
        idx = [i for i in range(r) if degrees[i] == n]
        Q = random_invertible(rng, len(idx))
        for a, ia in enumerate(idx):
            for b, ib in enumerate(idx):
                v = Q.get(a, b)
                if v:
                    P[(ia, ib)] = v
    Pm = SparseMatrix.from_triplets(r, r, [(i, j, v) for (i, j), v in P.items()])
    Jm = SparseMatrix.from_triplets(r, r, [(i, j, v) for (i, j), v in J.items()])
    D = Pm @ Jm @ _inverse(Pm)
    return {(i, j): v for i, j, v in D.triplets()}


def random_matrix_dgla(rng: random.Random, max_dim=3, basis_change=True) -> DGLA:
    degs = random_graded_degrees(rng, max_dim)
    g = matrix_dgla(degs, random_delta(rng, degs), name=f"End{tuple(degs)}")
    if basis_change:
        g = transport_dgla(g, {n: random_invertible(rng, g.space.dim(n)) for n in g.space.degrees()})
    return g


def perturb_constant(rng: random.Random, g: DGLA) -> tuple[DGLA, tuple]:
    """Change exactly one structure constant of a table-presented dgLa by a nonzero amount.

    Returns the perturbed algebra and a description (kind, key, target label).
    """
    labels = g.labels()
    order = {lab: i for i, lab in enumerate(labels)}
    delta = _rand_coeff(rng, -2, 2, zero=False)
    table = g.table()
    dtab = g.differential_table()
    if rng.random() < 0.2:
        a = rng.choice(labels)
        c = rng.choice(labels)
        dtab[a] = vadd(dtab.get(a, {}), {c: delta})
        desc = ("d", (a,), c)
    else:
        a, b = rng.choice(labels), rng.choice(labels)
        if order[a] > order[b]:
            a, b = b, a
        c = rng.choice(labels)
        table[(a, b)] = vadd(table.get((a, b), {}), {c: delta})
        desc = ("bracket", (a, b), c)
    return DGLA(g.space, dtab, table, name=g.name + "~"), desc


def random_artin(rng: random.Random, max_order=4) -> ArtinAlgebra:
    kind = rng.choice(["dual_numbers", "truncated_poly", "truncated_two_vars"])
    if kind == "dual_numbers":
        return make_artin(kind)
    if kind == "truncated_two_vars":
        return make_artin(kind, rng.randint(2, min(3, max_order)))
    return make_artin(kind, rng.randint(2, max_order))


def random_element(rng: random.Random, L: DGLA, A: ArtinAlgebra, degree: int, density=0.5) -> NilpotentElement:
    coeffs = {}
    for lab in L.space.labels(degree):
        for mon in A.m_basis:
            if rng.random() < density:
                coeffs[(lab, mon)] = _rand_coeff(rng)
    return NilpotentElement(L, A, coeffs, degree)


def random_mc(rng: random.Random, L: DGLA, A: ArtinAlgebra, tries=8) -> NilpotentElement:
    """Solve the MC equation weight by weight with random choices, retrying on obstructions."""
    C = L.complex()
    d1 = C.d(1)
    l1 = L.space.labels(1)
    z1 = kernel_basis(d1)
    maxw = max(A.weights.values())
    for _ in range(tries):
        x = NilpotentElement.zero(L, A, 1)
        ok = True
        for w in range(1, maxw + 1):
            r = mc_residual(x)
            parts = {}
            for mon in A.m_basis:
                if A.weights[mon] != w:
                    continue
                rhs = {C.space.index(2, k): -c for k, c in r.part(mon).items()}
                sol = solve(d1, rhs)
                if sol is None:
                    ok = False
                    break
                v = {l1[i]: c for i, c in sol.items()}
                for z in z1:
                    c = _rand_coeff(rng, -1, 1)
                    if c:
                        v = vadd(v, {l1[i]: e for i, e in z.items()}, c)
                parts[mon] = v
            if not ok:
                break
            x = x + NilpotentElement.from_parts(L, A, parts, 1)
        if ok and is_mc(x):
            return x
    return gauge(random_element(rng, L, A, 0), NilpotentElement.zero(L, A, 1))


__all__ = [
    "random_invertible", "transport_dgla", "random_matrix_dgla", "perturb_constant", "random_artin",
    "random_element", "random_mc", "random_delta", "random_graded_degrees",
]
