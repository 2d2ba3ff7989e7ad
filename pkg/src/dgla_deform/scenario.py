"""JSON scenario files: parsing, validation and execution.

Layout::

    {
      "schema": 1, "name": "...", "window": 5,
      "cover": {"type": "P1" | "circle" | "triangle"},
      "sheaves": {"E": {"line_bundles": [0, -2]} | {"trivial": 2}
                       | {"rank": 1, "transitions": {"0,1": [[{"-1": "1"}]]}}},
      "morphisms": {"a": {"source": "F", "target": "G", "chart": 0, "matrix": [[{"1": "1"}]]}},
      "systems": {"EU": {"sheaf": "E", "sections": [[{"0": "1"}, {}]], "chart": 0}},
      "checks": [{"check": "cohomology", "sheaf": "E", "expect": {"h": [2, 0, 0]}}, ...]
    }

Ring elements are ``{monomial: "rational"}``; Laurent monomials are written
as integer exponents (comma-separated for several variables), finite-algebra
monomials as basis labels.  Sections and morphisms are given on one chart
and extended through the transitions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .cech import cech_cohomology
from .errors import BadWindow, DeformError, ParseError, UnknownCheck
from .pipelines import (SCHEMA, Report, deform_morphism_report, defk_tangent, end_cocycle_from_matrices, end_h1,
                        jsonable, m_delta_check, pair_EU_report, section_extension, smoothness_flags,
                        system_as_morphism)
from .rings import LaurentRing, RingMatrix
from .sheaves import (CoherentSystem, SheafMorphism, SheafPresentation, direct_sum_sheaf, global_section,
                      make_circle_cover, make_line_bundle, make_p1_cover, make_simplex_cover, trivial_sheaf)

TOP_KEYS = {"schema", "name", "window", "cover", "sheaves", "morphisms", "systems", "checks"}
CHECK_KEYS = {
    "cohomology": {"sheaf"},
    "pair_EU": {"system"},
    "m_delta": {"system"},
    "smoothness": {"system"},
    "deform_morphism": {"morphism", "system"},
    "section_extension": {"sheaf", "cocycle", "section"},
    "defk_tangent": {"sheaf", "k", "nu", "probes"},
}


@dataclass
class Scenario:
    name: str
    window: int
    cover: object
    sheaves: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    systems: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)


def _locate(text: str, key: str):
    i = text.find(f'"{key}"')
    if i < 0:
        return None, None
    line = text.count("\n", 0, i) + 1
    col = i - (text.rfind("\n", 0, i) + 1) + 1
    return line, col


class _Ctx:
    def __init__(self, text):
        self.text = text

    def fail(self, msg, key=None):
        line, col = _locate(self.text, key) if key else (None, None)
        raise ParseError(msg, line, col)


def parse_text(text: str, window: int | None = None) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    ctx = _Ctx(text)
    if not isinstance(raw, dict):
        ctx.fail("scenario must be a JSON object")
    for k in raw:
        if k not in TOP_KEYS:
            ctx.fail(f"unknown key {k!r}", k)
    if raw.get("schema", SCHEMA) != SCHEMA:
        ctx.fail(f"unsupported schema {raw.get('schema')!r}", "schema")
    for k in ("cover", "checks"):
        if k not in raw:
            ctx.fail(f"missing key {k!r}")
    D = window if window is not None else raw.get("window", 4)
    if not isinstance(D, int) or isinstance(D, bool):
        ctx.fail("window must be an integer", "window")
    cover = _cover(ctx, raw["cover"], D)
    sc = Scenario(raw.get("name", ""), D, cover)
    for name, spec in raw.get("sheaves", {}).items():
        sc.sheaves[name] = _sheaf(ctx, cover, name, spec)
    _check_window(ctx, sc)
    for name, spec in raw.get("morphisms", {}).items():
        sc.morphisms[name] = _morphism(ctx, sc, name, spec)
    for name, spec in raw.get("systems", {}).items():
        sc.systems[name] = _system(ctx, sc, name, spec)
    if not isinstance(raw["checks"], list):
        ctx.fail("checks must be a list", "checks")
    for spec in raw["checks"]:
        sc.checks.append(_check_spec(ctx, sc, spec))
    return sc


def load_scenario(path, window: int | None = None) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None
    return parse_text(text, window)


def _cover(ctx, spec, D):
    if not isinstance(spec, dict) or set(spec) - {"type"}:
        ctx.fail("cover must be {\"type\": ...}", "cover")
    kind = spec.get("type")
    if kind == "P1":
        try:
            return make_p1_cover(D)
        except BadWindow as e:
            ctx.fail(str(e), "window")
    if kind == "circle":
        return make_circle_cover()
    if kind == "triangle":
        return make_simplex_cover()
    ctx.fail(f"unknown cover type {kind!r}", "type")


def _mono(ctx, cover, key: str):
    if cover.is_laurent():
        if not re.fullmatch(r"\s*-?\d+(\s*,\s*-?\d+)*\s*", key):
            ctx.fail(f"bad exponent {key!r}", key)
        return tuple(int(x) for x in key.split(","))
    return key


def _elem(ctx, cover, spec) -> dict:
    if not isinstance(spec, dict):
        ctx.fail(f"ring element must be an object, got {spec!r}")
    out = {}
    for k, v in spec.items():
        try:
            out[_mono(ctx, cover, k)] = Fraction(str(v))
        except (ValueError, ZeroDivisionError):
            ctx.fail(f"bad rational {v!r}", k)
    return out


def _matrix(ctx, cover, simplex, rows):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        ctx.fail("matrix must be a non-empty list of rows")
    return RingMatrix(cover.ring(simplex), [[_elem(ctx, cover, e) for e in r] for r in rows])


def _edge_key(ctx, key):
    try:
        i, j = (int(x) for x in key.split(","))
    except ValueError:
        ctx.fail(f"bad edge key {key!r}", key)
    return i, j


def _sheaf(ctx, cover, name, spec) -> SheafPresentation:
    if not isinstance(spec, dict) or len(spec) != 1 and set(spec) != {"rank", "transitions"}:
        ctx.fail(f"sheaf {name!r} needs exactly one of line_bundles, trivial, rank+transitions", name)
    try:
        if "line_bundles" in spec:
            parts = [make_line_bundle(int(d), cover) for d in spec["line_bundles"]]
            E = parts[0] if len(parts) == 1 else direct_sum_sheaf(*parts)
        elif "trivial" in spec:
            E = trivial_sheaf(cover, int(spec["trivial"]))
        elif "transitions" in spec:
            trans = {}
            for k, rows in spec["transitions"].items():
                i, j = _edge_key(ctx, k)
                trans[(i, j)] = _matrix(ctx, cover, cover.edge(i, j), rows)
            E = SheafPresentation(cover, int(spec["rank"]), trans)
        else:
            ctx.fail(f"unknown sheaf kind in {name!r}", name)
    except DeformError as e:
        if isinstance(e, ParseError):
            raise
        ctx.fail(f"sheaf {name!r}: {e}", name)
    E.name = name
    return E


def _check_window(ctx, sc: Scenario):
    if not sc.cover.is_laurent():
        return
    top = 0
    for E in sc.sheaves.values():
        for M in E.transitions().values():
            for m in M.monomials():
                top = max(top, max(abs(e) for e in m))
    if sc.window < top + 2:
        ctx.fail(f"window {sc.window} is below transition degree {top} + 2", "window")


def _ref(ctx, table, key, what):
    if key not in table:
        ctx.fail(f"unknown {what} {key!r}", key if isinstance(key, str) else None)
    return table[key]


def _morphism(ctx, sc, name, spec):
    allowed = {"source", "target", "chart", "matrix"}
    if not isinstance(spec, dict) or set(spec) - allowed or not {"source", "target", "matrix"} <= set(spec):
        ctx.fail(f"morphism {name!r} needs source, target, matrix (and optional chart)", name)
    F = _ref(ctx, sc.sheaves, spec["source"], "sheaf")
    G = _ref(ctx, sc.sheaves, spec["target"], "sheaf")
    chart = int(spec.get("chart", 0))
    try:
        return SheafMorphism.from_chart(F, G, chart, _matrix(ctx, sc.cover, (chart,), spec["matrix"]), name=name)
    except DeformError as e:
        if isinstance(e, ParseError):
            raise
        ctx.fail(f"morphism {name!r}: {e}", name)


def _system(ctx, sc, name, spec):
    if not isinstance(spec, dict) or set(spec) - {"sheaf", "sections", "chart"} or "sheaf" not in spec:
        ctx.fail(f"system {name!r} needs sheaf and sections", name)
    E = _ref(ctx, sc.sheaves, spec["sheaf"], "sheaf")
    chart = int(spec.get("chart", 0))
    try:
        secs = [global_section(E, [_elem(ctx, sc.cover, x) for x in vec], chart) for vec in spec.get("sections", [])]
        return CoherentSystem(E, secs)
    except DeformError as e:
        if isinstance(e, ParseError):
            raise
        ctx.fail(f"system {name!r}: {e}", name)


def _check_spec(ctx, sc, spec) -> dict:
    if not isinstance(spec, dict) or "check" not in spec:
        ctx.fail("each check needs a 'check' name", "checks")
    kind = spec["check"]
    if kind not in CHECK_KEYS:
        raise UnknownCheck(f"unknown check {kind!r}")
    extra = set(spec) - CHECK_KEYS[kind] - {"check", "expect"}
    if extra:
        ctx.fail(f"check {kind!r} does not take {sorted(extra)}", sorted(extra)[0])
    out = dict(spec)
    if "sheaf" in spec:
        out["sheaf"] = _ref(ctx, sc.sheaves, spec["sheaf"], "sheaf")
    if "system" in spec:
        out["system"] = _ref(ctx, sc.systems, spec["system"], "system")
    if "morphism" in spec:
        out["morphism"] = _ref(ctx, sc.morphisms, spec["morphism"], "morphism")
    if kind == "deform_morphism" and ("morphism" in spec) == ("system" in spec):
        ctx.fail("deform_morphism takes exactly one of morphism, system", "deform_morphism")
    if kind == "section_extension":
        E = out.get("sheaf")
        if E is None or "cocycle" not in spec or "section" not in spec:
            ctx.fail("section_extension needs sheaf, cocycle and section", "section_extension")
        out["cocycle"] = {_edge_key(ctx, k): _matrix(ctx, sc.cover, sc.cover.edge(*_edge_key(ctx, k)), v)
                          for k, v in spec["cocycle"].items()}
        try:
            out["section"] = global_section(E, [_elem(ctx, sc.cover, x) for x in spec["section"]])
        except DeformError as e:
            ctx.fail(f"section: {e}", "section")
    if kind == "defk_tangent" and ("sheaf" not in spec or "k" not in spec):
        ctx.fail("defk_tangent needs sheaf and k", "defk_tangent")
    return out


# ---------------------------------------------------------------- execution


def _compare(expect: dict, dims: dict) -> list[str]:
    bad = []
    for k, v in expect.items():
        got = jsonable(dims.get(k))
        if got != v:
            bad.append(f"expected {k} = {v}, got {got}")
    return bad


def run_check(spec: dict, sc: Scenario) -> Report:
    kind = spec["check"]
    if kind == "cohomology":
        res = cech_cohomology(spec["sheaf"], strict=False)
        rep = Report("cohomology", res.stable)
        rep.dims = {"h": [res.h(n) for n in (0, 1, 2)], "euler": res.h(0) - res.h(1) + res.h(2)}
        rep.flags = {"window stable": res.stable}
    elif kind == "pair_EU":
        rep = pair_EU_report(spec["system"])
    elif kind == "m_delta":
        rep = m_delta_check(spec["system"])
    elif kind == "smoothness":
        rep = smoothness_flags(spec["system"])
    elif kind == "deform_morphism":
        alpha = spec.get("morphism") or system_as_morphism(spec["system"])
        rep = deform_morphism_report(alpha)
    elif kind == "section_extension":
        E = spec["sheaf"]
        c, _, _ = end_h1(E)
        a = end_cocycle_from_matrices(c, spec["cocycle"])
        out = section_extension(E, a, spec["section"])
        ok = out["verified"] if out["extends"] else out["certificate_nonzero_verified"]
        rep = Report("section_extension", bool(ok))
        rep.dims = {"extends": out["extends"]}
        rep.witnesses = {"lift": out["lift"], "certificate": out["certificate"]}
    elif kind == "defk_tangent":
        rep = defk_tangent(spec["sheaf"], int(spec["k"]), spec.get("nu"), spec.get("probes"))
    else:  # guarded at parse time
        raise UnknownCheck(kind)
    if "expect" in spec:
        bad = _compare(spec["expect"], rep.dims)
        if bad:
            rep.passed = False
            rep.notes.extend(bad)
    return rep


def run_scenario(path, window: int | None = None) -> dict:
    sc = load_scenario(path, window)
    results = [run_check(spec, sc).to_dict() for spec in sc.checks]
    return {"schema": SCHEMA, "scenario": sc.name, "window": sc.window, "results": results,
            "verdict": "pass" if all(r["verdict"] == "pass" for r in results) else "fail"}


def validate_scenario(path, window: int | None = None) -> list[str]:
    """Diagnostics for a scenario file; empty when it parses and all references resolve."""
    try:
        load_scenario(path, window)
    except DeformError as e:
        return [f"{type(e).__name__}: {e}"]
    return []


def render_text(report: dict) -> str:
    lines = [f"scenario {report['scenario']!r} (window {report['window']}): {report['verdict'].upper()}"]
    for r in report["results"]:
        lines.append(f"[{r['verdict'].upper()}] {r['check']}")
        for k, v in r["dims"].items():
            lines.append(f"  {k}: {json.dumps(v, sort_keys=False)}")
        for node in r["exactness"]:
            lines.append(f"  node {node['index']} {node.get('name', '')}: dim={node['dim']} "
                         f"rank_in={node['rank_in']} kernel_out={node['kernel_out']} exact={node['exact']}")
        for k, v in r["flags"].items():
            lines.append(f"  {k}: {json.dumps(v)}")
        for n in r["notes"]:
            lines.append(f"  note: {n}")
    return "\n".join(lines)
