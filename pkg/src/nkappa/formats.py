from __future__ import annotations
import csv
import io
import json
import math
import re
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import config
from .colligation import Colligation
from .errors import NKappaError
from .indefinite import IndefiniteMetric, SignatureMetric
from .ratfun import (
    BlockDiagFunction,
    BuiltinFunction,
    ComplexPolynomial,
    MatrixFunction,
    RationalEntry,
    RationalFunction,
)

REQUIRED_FIELDS = {
    "rational": ["type", "dim", "entries"],
    "builtin": ["type", "name"],
    "blockdiag": ["type", "blocks"],
    "colligation": ["format", "n", "metric", "H", "K"],
    "points": ["format", "points"],
    "manifest": ["format", "seed", "functions"],
}

OPTIONAL_FIELDS = {
    "builtin": ["gamma", "d"],
    "colligation": ["Jdir"],
}

EXTENDED = {"inf": complex(math.inf, 0.0), "-inf": complex(-math.inf, 0.0), "cinf": complex(math.inf, math.inf)}

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL = re.compile(rf"^[+-]?{_NUM}$")
_IMAG = re.compile(rf"^(?P<s>[+-]?)(?P<m>{_NUM})?[ij]$")
_BOTH = re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<s>[+-])(?P<m>{_NUM})?[ij]$")


def require_fields(kind: str, doc: Dict[str, Any]) -> None:
    required = REQUIRED_FIELDS.get(kind)
    if required:
        missing = [f for f in required if f not in doc]
        if missing:
            raise ValueError(f"Missing fields for {kind}: {missing}")


def loads(text: str, source: str = "<input>") -> Any:
    """json.loads with the position of a syntax error in the message."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"{source}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return loads(f.read(), path)


def write_json(path: str, doc: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(doc))


# --- numbers ---

def format_float(x: float) -> str:
    return format(float(x), f".{config.CSV_DIGITS}g")


def _fixed(x: float) -> float:
    return float(format_float(x))


def format_complex_json(z: complex):
    z = complex(z)
    if math.isnan(z.real) or math.isnan(z.imag):
        return None
    if math.isinf(z.real) or math.isinf(z.imag):
        if math.isinf(z.imag):
            return "cinf"
        return "inf" if z.real > 0 else "-inf"
    return [_fixed(z.real), _fixed(z.imag)]


def parse_complex_json(v) -> complex:
    if isinstance(v, str):
        if v in EXTENDED:
            return EXTENDED[v]
        return parse_complex(v)
    if isinstance(v, (int, float)):
        return complex(float(v), 0.0)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(float(v[0]), float(v[1]))
    raise ValueError(f"expected a complex number as [re, im], got {v!r}")


def parse_complex(text: str) -> complex:
    """Parse 'a+bi' style input: '1-2i', '3', '-i', '2.5e-3 + 1e2 i', 'cinf'."""
    s = re.sub(r"\s+", "", str(text))
    if s in EXTENDED:
        return EXTENDED[s]
    if _REAL.match(s):
        return complex(float(s), 0.0)
    m = _IMAG.match(s) or _BOTH.match(s)
    if not m:
        raise ValueError(f"cannot parse complex number {text!r}")
    groups = m.groupdict()
    mag = float(groups["m"]) if groups["m"] else 1.0
    im_part = -mag if groups["s"] == "-" else mag
    re_part = float(groups["re"]) if groups.get("re") else 0.0
    return complex(re_part, im_part)


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 or (z.imag == 0 and math.copysign(1.0, z.imag) < 0) else "+"
    return f"{format_float(z.real)}{sign}{format_float(abs(z.imag))}i"


def format_matrix(M) -> List[List]:
    A = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[format_complex_json(x) for x in row] for row in A]


def parse_matrix(rows, name: str = "matrix") -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError(f"{name}: expected a row-major list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{name}: rows have different lengths")
    return np.array([[parse_complex_json(x) for x in r] for r in rows], dtype=complex)


def format_poly(p: ComplexPolynomial) -> List:
    return [format_complex_json(c) for c in p.coeffs]


def parse_poly(v, name: str) -> ComplexPolynomial:
    if not isinstance(v, list) or not v:
        raise ValueError(f"{name}: expected a nonempty coefficient list (ascending degree)")
    return ComplexPolynomial([parse_complex_json(c) for c in v])


# --- function documents ---

def format_function(V: MatrixFunction) -> Dict[str, Any]:
    if isinstance(V, BuiltinFunction):
        doc = {"format": config.FORMAT_VERSION, "type": "builtin", "name": V.name}
        if V.name == "example2":
            doc.update(gamma=_fixed(V.gamma), d=_fixed(V.d))
        return doc
    if isinstance(V, BlockDiagFunction):
        return {"format": config.FORMAT_VERSION, "type": "blockdiag", "blocks": [format_function(b) for b in V.blocks]}
    R = V.to_rational()
    entries = [[{"num": format_poly(e.num), "den": format_poly(e.den)} for e in row] for row in R.entries]
    return {"format": config.FORMAT_VERSION, "type": "rational", "dim": R.dim, "entries": entries}


def parse_function(doc: Dict[str, Any]) -> MatrixFunction:
    if not isinstance(doc, dict):
        raise ValueError("function document must be a JSON object")
    kind = str(doc.get("type", "")).lower()
    if not kind:
        raise ValueError("Missing type")
    if kind not in ("rational", "builtin", "blockdiag"):
        raise ValueError(f"unknown function type {kind!r}")
    require_fields(kind, doc)
    if kind == "builtin":
        return BuiltinFunction(doc["name"], float(doc.get("gamma", 1.0)), float(doc.get("d", 0.0)))
    if kind == "blockdiag":
        blocks = doc["blocks"]
        if not isinstance(blocks, list):
            raise ValueError("blockdiag: blocks must be a list")
        return BlockDiagFunction([parse_function(b) for b in blocks])
    dim = int(doc["dim"])
    rows = doc["entries"]
    if not isinstance(rows, list) or len(rows) != dim or any(not isinstance(r, list) or len(r) != dim for r in rows):
        raise ValueError(f"rational: entries must be a {dim} x {dim} array")
    entries = []
    for i, row in enumerate(rows):
        out = []
        for j, cell in enumerate(row):
            if not isinstance(cell, dict) or "num" not in cell or "den" not in cell:
                raise ValueError(f"rational: entry ({i},{j}) needs num and den")
            out.append(RationalEntry.make(parse_poly(cell["num"], f"entry ({i},{j}) num"),
                                          parse_poly(cell["den"], f"entry ({i},{j}) den")))
        entries.append(out)
    return RationalFunction(entries)


def read_function(path: str) -> MatrixFunction:
    doc = read_json(path)
    try:
        return parse_function(doc)
    except NKappaError as e:
        raise ValueError(f"{path}: {e}") from None


# --- colligation documents ---

def format_colligation(c: Colligation) -> Dict[str, Any]:
    return {
        "format": config.FORMAT_VERSION,
        "n": c.n,
        "metric": format_matrix(c.metric.gram),
        "H": format_matrix(c.H_full),
        "K": format_matrix(c.K),
        "Jdir": format_matrix(c.Jdir.J),
    }


def parse_colligation(doc: Dict[str, Any]) -> Colligation:
    if not isinstance(doc, dict):
        raise ValueError("colligation document must be a JSON object")
    require_fields("colligation", doc)
    n = int(doc["n"])
    G = parse_matrix(doc["metric"], "metric")
    H = parse_matrix(doc["H"], "H")
    K = parse_matrix(doc["K"], "K")
    if G.shape != (n, n):
        raise ValueError(f"metric: expected {n} x {n}, got {G.shape[0]} x {G.shape[1]}")
    try:
        metric: IndefiniteMetric = SignatureMetric(G)
    except ValueError:
        metric = IndefiniteMetric(G)
    Jdir = parse_matrix(doc["Jdir"], "Jdir") if "Jdir" in doc else None
    return Colligation(metric, H, K, Jdir)


def read_colligation(path: str) -> Colligation:
    doc = read_json(path)
    try:
        return parse_colligation(doc)
    except NKappaError as e:
        raise ValueError(f"{path}: {e}") from None


# --- points, reports ---

def parse_points(doc) -> List[complex]:
    """Points file: {"format": 1, "points": [[re, im], ...]} or a bare list."""
    if isinstance(doc, list):
        pts = doc
    else:
        require_fields("points", doc)
        pts = doc["points"]
    return [parse_complex_json(p) for p in pts]


def format_points(points: Iterable[complex]) -> Dict[str, Any]:
    return {"format": config.FORMAT_VERSION, "points": [format_complex_json(z) for z in points]}


def _plain(v):
    """Report values to JSON-safe types."""
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return _fixed(x)
    if isinstance(v, (complex, np.complexfloating)):
        return format_complex_json(v)
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return str(v)


def format_report(report) -> Dict[str, Any]:
    """Classification report; B basis vectors as [re, im] lists."""
    basis = None if report.B_basis is None else [[format_complex_json(x) for x in v] for v in report.B_basis]
    return _plain({
        "format": config.FORMAT_VERSION,
        "kappa": report.kappa.kappa,
        "kappa_stabilized": report.kappa.stabilized,
        "kappa_history": [list(c) for c in report.kappa.counts],
        "grids_used": report.kappa.grids_used,
        "cond_growth": report.cond_growth,
        "cond_strict": report.cond_strict,
        "B_basis": basis,
        "cond_decay_on_B": report.cond_decay_on_B,
        "subclass": report.subclass,
        "realizable": report.realizable,
        "infinity": None if report.infinity is None else {
            "label": report.infinity.label,
            "limit_V_over_z": format_complex_json(report.infinity.limit_V_over_z),
            "limit_zV": format_complex_json(report.infinity.limit_zV),
        },
        "evidence": _plain(report.evidence),
    })


def format_factorization(f) -> Dict[str, Any]:
    return {
        "format": config.FORMAT_VERSION,
        "p": format_poly(f.p),
        "q": format_poly(f.q),
        "V0": format_function(f.V0),
        "kappa": f.kappa,
        "points": [
            {"location": format_complex_json(pt.location), "kind": pt.kind, "multiplicity": pt.multiplicity}
            for pt in f.points
        ],
    }


def format_plain(doc: Dict[str, Any]) -> Dict[str, Any]:
    out = {"format": config.FORMAT_VERSION}
    out.update(_plain(doc))
    return out


# --- CSV ---

def _csv_cell(v) -> str:
    if v is None:
        return "pole"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (complex, np.complexfloating)) and complex(v).imag != 0:
        return format_complex(v)
    return format_float(complex(v).real if isinstance(v, (complex, np.complexfloating)) else v)


def format_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def write_text(path: Optional[str], text: str) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
