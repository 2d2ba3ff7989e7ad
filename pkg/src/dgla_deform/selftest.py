"""Quick invariant suites behind ``dgla-deform selftest``."""

from __future__ import annotations

import random

from .artin import bch, gauge, is_mc
from .cech import cech_cohomology
from .dgla import gl, validate_dgla
from .pipelines import pair_EU_report
from .randomized import perturb_constant, random_artin, random_element, random_matrix_dgla, random_mc
from .sheaves import CoherentSystem, direct_sum_sheaf, global_section, make_line_bundle, make_p1_cover


def _dgla_axioms(rng, n=20):
    for _ in range(n):
        g = random_matrix_dgla(rng)
        if not validate_dgla(g).valid:
            return False
        bad, _ = perturb_constant(rng, g)
        if validate_dgla(bad).valid:
            return False
    return validate_dgla(gl(2)).valid


def _mc_gauge(rng, n=20):
    for _ in range(n):
        L = random_matrix_dgla(rng, basis_change=False)
        A = random_artin(rng, 3)
        x = random_mc(rng, L, A)
        a, b = random_element(rng, L, A, 0), random_element(rng, L, A, 0)
        if not is_mc(gauge(a, x)) or gauge(a, gauge(b, x)) != gauge(bch(a, b), x):
            return False
    return True


def _line_bundles():
    cover = make_p1_cover(6)
    for d in range(-4, 5):
        h = cech_cohomology(make_line_bundle(d, cover)).dims
        if (h[0], h[1]) != (max(d + 1, 0), max(-d - 1, 0)):
            return False
    return True


def _pairs():
    cover = make_p1_cover(5)
    O = lambda d: make_line_bundle(d, cover)
    cases = [(O(1), [[{(0,): 1}]], 1), (O(1), [[{(0,): 1}], [{(1,): 1}]], 0),
             (direct_sum_sheaf(O(0), O(-2)), [[{(0,): 1}, {}]], 0)]
    for E, vecs, tangent in cases:
        rep = pair_EU_report(CoherentSystem(E, [global_section(E, v) for v in vecs]))
        if not rep.passed or rep.dims["tangent"] != tangent:
            return False
    return True


SUITES = {
    "dgla axioms": lambda rng: _dgla_axioms(rng),
    "MC and gauge": lambda rng: _mc_gauge(rng),
    "line bundles on P1": lambda rng: _line_bundles(),
    "(E,U) sequences": lambda rng: _pairs(),
}


def run(seed: int = 0, out=print) -> bool:
    ok = True
    for name, fn in SUITES.items():
        res = bool(fn(random.Random(seed)))
        out(f"{'PASS' if res else 'FAIL'} {name}")
        ok = ok and res
    return ok
