"""JSON encoding of chains and reports.

Chains use ``{"backend", "degree", "ring", "terms": [{"cell", "coef"}]}``
with terms in canonical order.  Every number is written as an exact string
(``"p/q"`` or ``"n"``); step-function coefficients are written as blocks of
explicit points.  Parse failures raise :class:`ParseError` carrying either a
JSON path (``$.terms[2].coef``) or the line and column of a syntax error.
"""
from __future__ import annotations

import json
import re
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from typing import Any, Optional

from .chains import QQ, ZZ, Backend, Chain, ChainError, StepFunction, linf
from .groups import GroupError, Odometer, parse_group, parse_space


class ParseError(ValueError):
    def __init__(self, message: str, path: str = "$", line: Optional[int] = None, column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        where = f"line {line}, column {column}" if line is not None else path
        super().__init__(f"{where}: {message}")


_RATIONAL = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


def format_rational(x) -> str:
    return str(Fraction(x))


def parse_rational(obj, path: str = "$") -> Fraction:
    if isinstance(obj, bool):
        raise ParseError(f"expected a rational, got {obj!r}", path)
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, str) and _RATIONAL.match(obj):
        try:
            return Fraction(obj.replace(" ", ""))
        except ZeroDivisionError:
            raise ParseError(f"zero denominator in {obj!r}", path) from None
    raise ParseError(f"expected an exact rational such as \"3/2\", got {obj!r}", path)


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------

_BACKENDS = {}


def register_backend(backend: Backend) -> None:
    """Make a non-bar backend (e.g. a finite complex) resolvable by id."""
    _BACKENDS[backend.id] = backend


def resolve_backend(backend_id: str, path: str = "$.backend") -> Backend:
    from .barcomplex import bar

    if backend_id in _BACKENDS:
        return _BACKENDS[backend_id]
    parts = str(backend_id).split(":")
    if len(parts) >= 3 and parts[0] == "bar":
        try:
            group = parse_group(parts[1])
        except GroupError as e:
            raise ParseError(str(e), path) from None
        q = parts[2:]
        if q == ["up"] or q == ["full"]:
            return bar(group, q[0])
        if len(q) == 2 and q[0] == "sub" and q[1].isdigit():
            return bar(group, ("sub", int(q[1])))
    raise ParseError(f"unknown backend {backend_id!r}; expected bar:Z^<d>:up|full|sub:<k>", path)


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def coef_to_json(coef, ring) -> Any:
    if ring.space is not None:
        return {"blocks": [{"points": list(pts), "value": v} for pts, v in coef.blocks()],
                "space": ring.space.name}
    return format_rational(coef)


def coef_from_json(obj, ring, path: str):
    if ring.space is None:
        value = parse_rational(obj, path)
        if ring == ZZ and value.denominator != 1:
            raise ParseError(f"{obj!r} is not an integer", path)
        return value
    if not isinstance(obj, dict) or "blocks" not in obj:
        raise ParseError("expected {\"blocks\": [...], \"space\": ...}", path)
    if obj.get("space", ring.space.name) != ring.space.name:
        raise ParseError(f"coefficient space {obj.get('space')!r} differs from {ring.space.name!r}", path)
    blocks = []
    for i, blk in enumerate(obj["blocks"]):
        bpath = f"{path}.blocks[{i}]"
        if not isinstance(blk, dict) or "points" not in blk or "value" not in blk:
            raise ParseError("a block needs \"points\" and \"value\"", bpath)
        v = parse_rational(blk["value"], bpath + ".value")
        if v.denominator != 1:
            raise ParseError("block values must be integers", bpath + ".value")
        pts = blk["points"]
        if not isinstance(pts, list) or not all(isinstance(p, int) and not isinstance(p, bool) for p in pts):
            raise ParseError("points must be a list of integers", bpath + ".points")
        blocks.append((pts, v.numerator))
    try:
        return StepFunction.from_blocks(ring.space, blocks)
    except (ChainError, ValueError) as e:
        raise ParseError(str(e), path) from None


def ring_name(ring) -> str:
    return ring.name


def parse_ring(name, space=None, path: str = "$.ring"):
    if name == "Z":
        return ZZ
    if name == "Q":
        return QQ
    if name == "LinfZ":
        if space is None:
            raise ParseError("ring LinfZ needs a \"space\" such as \"odometer:1:12\"", path)
        try:
            return linf(parse_space(space))
        except GroupError as e:
            raise ParseError(str(e), path) from None
    raise ParseError(f"unknown ring {name!r}; expected Z, Q or LinfZ", path)


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------

def chain_to_json(c: Chain) -> dict:
    be = c.backend
    out = {"backend": be.id, "degree": c.degree, "ring": ring_name(c.ring)}
    if c.ring.space is not None:
        out["space"] = c.ring.space.name
    out["terms"] = [{"cell": be.encode_cell(cell), "coef": coef_to_json(v, c.ring)} for cell, v in c.items()]
    return out


def _first_space(obj) -> Optional[str]:
    for t in obj.get("terms") or []:
        if isinstance(t, dict) and isinstance(t.get("coef"), dict) and "space" in t["coef"]:
            return t["coef"]["space"]
    return None


def chain_from_json(obj, path: str = "$", backend: Optional[Backend] = None) -> Chain:
    if not isinstance(obj, dict):
        raise ParseError("a chain is a JSON object", path)
    for key in ("backend", "degree", "ring", "terms"):
        if key not in obj:
            raise ParseError(f"missing field {key!r}", path)
    be = backend or resolve_backend(obj["backend"], f"{path}.backend")
    degree = obj["degree"]
    if not isinstance(degree, int) or isinstance(degree, bool) or degree < 0:
        raise ParseError("degree must be a non-negative integer", f"{path}.degree")
    ring = parse_ring(obj["ring"], obj.get("space") or _first_space(obj), f"{path}.ring")
    if not isinstance(obj["terms"], list):
        raise ParseError("terms must be a list", f"{path}.terms")
    terms = []
    for i, t in enumerate(obj["terms"]):
        tpath = f"{path}.terms[{i}]"
        if not isinstance(t, dict) or "cell" not in t or "coef" not in t:
            raise ParseError("a term needs \"cell\" and \"coef\"", tpath)
        try:
            cell = be.decode_cell(t["cell"])
        except (ChainError, GroupError) as e:
            raise ParseError(str(e), tpath + ".cell") from None
        if be.cell_degree(cell) != degree:
            raise ParseError(f"cell has degree {be.cell_degree(cell)}, chain has degree {degree}", tpath + ".cell")
        terms.append((cell, coef_from_json(t["coef"], ring, tpath + ".coef")))
    try:
        return Chain(be, degree, ring, terms)
    except ChainError as e:
        raise ParseError(str(e), path) from None


def loads(text: str):
    """``json.loads`` with syntax errors turned into positioned :class:`ParseError`."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno, column=e.colno) from None


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False) + "\n"


def jsonable(x):
    """Convert report values to JSON: rationals become strings, no floats survive."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, float):
        return format_rational(Fraction(x).limit_denominator(10 ** 9))
    if isinstance(x, Chain):
        return chain_to_json(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [jsonable(v) for v in items]
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    if is_dataclass(x):
        return jsonable(asdict(x))
    raise TypeError(f"cannot serialize {type(x).__name__}")
