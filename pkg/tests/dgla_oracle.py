"""Independent brute-force dgLa axiom check on raw structure tables."""

from fractions import Fraction
from itertools import product


def _add(out, img, c):
    for k, v in img.items():
        out[k] = out.get(k, 0) + c * v
    return out


def is_dgla(degrees, dtab, table):
    labs = list(degrees)
    order = {a: i for i, a in enumerate(labs)}

    def br(a, b):
        if order[a] <= order[b]:
            return dict(table.get((a, b), {}))
        s = -(-1) ** (degrees[a] * degrees[b])
        return {k: s * v for k, v in table.get((b, a), {}).items()}

    def brv(x, y):
        out = {}
        for a, ca in x.items():
            for b, cb in y.items():
                _add(out, br(a, b), ca * cb)
        return {k: v for k, v in out.items() if v}

    def d(x):
        out = {}
        for a, c in x.items():
            _add(out, dtab.get(a, {}), c)
        return {k: v for k, v in out.items() if v}

    for a in labs:
        if any(degrees[k] != degrees[a] + 1 for k in dtab.get(a, {})) or d(dtab.get(a, {})):
            return False
    for a, b in product(labs, repeat=2):
        ab = br(a, b)
        if any(degrees[k] != degrees[a] + degrees[b] for k, v in ab.items() if v):
            return False
        if {k: v for k, v in _add(dict(ab), br(b, a), (-1) ** (degrees[a] * degrees[b])).items() if v}:
            return False
        lhs = d({k: v for k, v in ab.items() if v})
        rhs = _add(brv(d({a: 1}), {b: 1}), brv({a: 1}, d({b: 1})), (-1) ** degrees[a])
        if {k: v for k, v in _add(lhs, rhs, -1).items() if v}:
            return False
    for a, b, c in product(labs, repeat=3):
        lhs = brv({a: 1}, br(b, c))
        rhs = _add(brv(br(a, b), {c: 1}), brv({b: 1}, br(a, c)), Fraction((-1) ** (degrees[a] * degrees[b])))
        if {k: v for k, v in _add(lhs, rhs, -1).items() if v}:
            return False
    return True


def check(g):
    degrees = {a: g.degree(a) for a in g.labels()}
    return is_dgla(degrees, g.differential_table(), g.table())
