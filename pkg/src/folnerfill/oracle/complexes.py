"""Finite chain complexes for the LP oracle.

Three sources: bar-ball truncations of the normalized bar complex of
``Z^d`` (optionally enlarged by the supports of given chains), explicit
boundary matrices read from JSON, and generated triangulations (torus,
sphere).  Composition of consecutive boundaries is checked on load.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from ..barcomplex import BarBackend, zd
from ..chains import Backend, Chain, ChainError, QQ

Cell = Hashable


class ComplexError(ValueError):
    pass


class MatrixBackend(Backend):
    """Cells are ``(degree, index)``; boundaries are sparse integer matrices."""

    def __init__(self, name: str, sizes: Sequence[int], columns: Dict[int, List[Dict[int, int]]]):
        self.id = f"matrix:{name}"
        self.sizes = list(sizes)
        self.columns = columns          # degree n -> per column {row index: entry}

    def cell_degree(self, cell) -> int:
        return cell[0]

    def encode_cell(self, cell):
        return [cell[0], cell[1]]

    def decode_cell(self, obj):
        if (not isinstance(obj, (list, tuple)) or len(obj) != 2
                or not all(isinstance(a, int) and not isinstance(a, bool) for a in obj)):
            raise ChainError(f"a matrix cell is [degree, index], got {obj!r}")
        n, i = obj
        if not (0 <= n < len(self.sizes) and 0 <= i < self.sizes[n]):
            raise ChainError(f"cell {obj!r} is outside the complex")
        return (n, i)

    def face_entries(self, cell) -> Iterable[Tuple[Cell, int]]:
        n, i = cell
        for r, v in self.columns[n][i].items():
            yield (n - 1, r), v

    def boundary(self, chain: Chain) -> Chain:
        if chain.degree == 0:
            raise ChainError("boundary of a degree-0 chain is not defined (no augmentation)")
        acc = {}
        for cell, coef in chain._terms.items():
            for face, v in self.face_entries(cell):
                acc[face] = acc.get(face, 0) + v * coef
        return Chain._raw(self, chain.degree - 1, chain.ring, acc)

    def matrix_boundary(self, b: Chain) -> Dict[tuple, Fraction]:
        """Row-by-row evaluation of the boundary, used by the verifier."""
        n = b.degree
        rows: Dict[int, Fraction] = {}
        coefs = {i: Fraction(v) for (_, i), v in b._terms.items()}
        for j, col in enumerate(self.columns.get(n, [])):
            if j in coefs:
                for r, v in col.items():
                    rows[r] = rows.get(r, Fraction(0)) + v * coefs[j]
        return {(n - 1, r): v for r, v in rows.items() if v}


@dataclass
class FiniteComplex:
    """Cells of two or more consecutive degrees with their boundary columns."""

    backend: Backend
    cells: Dict[int, List[Cell]]
    provenance: str
    faces: Dict[Cell, Tuple[Tuple[Cell, int], ...]] = field(default_factory=dict, repr=False)
    check: Optional[List[Cell]] = field(default=None, repr=False)   # cells to check; None means all

    def __post_init__(self):
        self.index = {n: {c: i for i, c in enumerate(cs)} for n, cs in self.cells.items()}
        self.check_dd(self.check)

    @property
    def degrees(self) -> List[int]:
        return sorted(self.cells)

    def has_cell(self, n: int, cell: Cell) -> bool:
        return cell in self.index.get(n, ())

    def column(self, cell: Cell) -> Tuple[Tuple[Cell, int], ...]:
        col = self.faces.get(cell)
        if col is None:
            col = _faces_of(self.backend, cell)
            self.faces[cell] = col
        return col

    def check_dd(self, cells: Optional[Iterable[Cell]] = None) -> None:
        """Every face is present and the boundary of every boundary vanishes."""
        for n in self.degrees:
            if n - 1 not in self.cells:
                continue
            todo = self.cells[n] if cells is None else [c for c in cells if self.has_cell(n, c)]
            for cell in todo:
                if n - 2 not in self.cells:
                    for f, _ in self.column(cell):
                        if not self.has_cell(n - 1, f):
                            raise ComplexError(f"face {f!r} of {cell!r} is missing from the complex")
                    continue
                acc: Dict[Cell, int] = {}
                for f, v in self.column(cell):
                    if not self.has_cell(n - 1, f):
                        raise ComplexError(f"face {f!r} of {cell!r} is missing from the complex")
                    for g, w in self.column(f):
                        acc[g] = acc.get(g, 0) + v * w
                bad = [g for g, v in acc.items() if v]
                if bad:
                    raise ComplexError(f"boundary of boundary is non-zero at {cell!r} ({len(bad)} cells)")

    def supports(self, c: Chain) -> bool:
        return all(self.has_cell(c.degree, cell) for cell in c._terms)

    def to_json(self) -> dict:
        return {"provenance": self.provenance, "backend": self.backend.id,
                "sizes": {str(n): len(cs) for n, cs in sorted(self.cells.items())}}


def _faces_of(backend: Backend, cell: Cell) -> Tuple[Tuple[Cell, int], ...]:
    if isinstance(backend, MatrixBackend):
        return tuple(sorted(backend.face_entries(cell)))
    acc: Dict[Cell, int] = {}
    for sign, face in backend.faces(cell):
        fcell, _ = backend.normalize(face, 1, QQ)
        acc[fcell] = acc.get(fcell, 0) + sign
    return tuple(sorted((f, v) for f, v in acc.items() if v))


# ---------------------------------------------------------------------------
# bar-ball truncations
# ---------------------------------------------------------------------------

def ball_elements(d: int, r: int) -> List[tuple]:
    return sorted(g for g in product(range(-r, r + 1), repeat=d) if sum(map(abs, g)) <= r)


def cell_radius(cell) -> int:
    """Largest word length among the entries of a normalized bar cell."""
    return max(sum(map(abs, g)) for g in cell)


def chain_radius(c: Chain) -> int:
    return max((cell_radius(cell) for cell in c._terms), default=0)


@lru_cache(maxsize=16)
def _ball(d: int, r: int, degree: int) -> FiniteComplex:
    be = zd(d, "full")
    elems = ball_elements(d, r)
    zero = (0,) * d
    top = [(zero,) + letters for letters in product(elems, repeat=degree + 1)]
    low = {(zero,) + letters for letters in product(elems, repeat=degree)}
    faces = {}
    for cell in top:
        col = _faces_of(be, cell)
        faces[cell] = col
        low.update(f for f, _ in col)
    cells = {degree + 1: sorted(top), degree: sorted(low)}
    if degree >= 1:
        # keep one more degree so that d o d = 0 is checked on the rows as well
        lower = set()
        for cell in low:
            col = _faces_of(be, cell)
            faces[cell] = col
            lower.update(f for f, _ in col)
        cells[degree - 1] = sorted(lower)
    return FiniteComplex(be, cells, f"bar-ball({r})", faces)


def bar_ball(d: int, r: int, degree: int, extra: Iterable[Chain] = ()) -> FiniteComplex:
    """Normalized bar cells of degree ``degree + 1`` with entries of word length <= r.

    The degree-``degree`` cells are those of the ball plus all faces, so the
    truncation is closed under the boundary.  Chains in ``extra`` add their
    cells: degree ``degree + 1`` chains (e.g. known fillings) extend the
    columns, degree ``degree`` chains extend the rows.
    """
    if r < 0:
        raise ComplexError("ball radius must be non-negative")
    base = _ball(d, r, degree)
    be = base.backend
    new_top, new_low = set(), set()
    for x in extra:
        if x.backend.id != be.id:
            raise ComplexError(f"extra chain lives on {x.backend.id}, not {be.id}")
        if x.degree == degree + 1:
            new_top.update(c for c in x._terms if not base.has_cell(degree + 1, c))
        elif x.degree == degree:
            new_low.update(c for c in x._terms if not base.has_cell(degree, c))
        else:
            raise ComplexError(f"extra chain has degree {x.degree}; expected {degree} or {degree + 1}")
    if not new_top and not new_low:
        return base
    faces = dict(base.faces)
    for cell in new_top:
        faces[cell] = col = _faces_of(be, cell)
        new_low.update(f for f, _ in col if not base.has_cell(degree, f))
    new_lower = set()
    if degree >= 1:
        for cell in new_low:
            faces[cell] = col = _faces_of(be, cell)
            new_lower.update(f for f, _ in col if not base.has_cell(degree - 1, f))
    cells = {n: list(cs) for n, cs in base.cells.items()}
    for n, add in ((degree + 1, new_top), (degree, new_low), (degree - 1, new_lower)):
        if add:
            cells[n] = sorted(set(cells[n]) | add)
    prov = base.provenance + ("+support" if new_top else "")
    # the ball itself was checked when it was built; only the added cells are checked here
    return FiniteComplex(be, cells, prov, faces, check=sorted(new_top) + sorted(new_low))


# ---------------------------------------------------------------------------
# explicit matrices
# ---------------------------------------------------------------------------

def from_matrix_json(obj, name: Optional[str] = None) -> FiniteComplex:
    """``{"degrees": [n0, n1, ...], "boundaries": [{"rows", "cols", "entries": [[i, j, v], ...]}]}``.

    ``boundaries[k]`` maps degree k+1 to degree k.
    """
    from ..serialize import ParseError

    if not isinstance(obj, dict) or "degrees" not in obj or "boundaries" not in obj:
        raise ParseError("a matrix complex needs \"degrees\" and \"boundaries\"")
    sizes = obj["degrees"]
    if not isinstance(sizes, list) or not all(isinstance(s, int) and s >= 0 for s in sizes):
        raise ParseError("degrees must be a list of cell counts", "$.degrees")
    if len(obj["boundaries"]) != len(sizes) - 1:
        raise ParseError(f"expected {len(sizes) - 1} boundary matrices, got {len(obj['boundaries'])}",
                         "$.boundaries")
    columns: Dict[int, List[Dict[int, int]]] = {}
    for k, m in enumerate(obj["boundaries"]):
        path = f"$.boundaries[{k}]"
        if m.get("rows") != sizes[k] or m.get("cols") != sizes[k + 1]:
            raise ParseError(f"matrix must be {sizes[k]}x{sizes[k + 1]}", path)
        cols = [dict() for _ in range(sizes[k + 1])]
        for e, entry in enumerate(m.get("entries", [])):
            if (not isinstance(entry, list) or len(entry) != 3
                    or not all(isinstance(a, int) and not isinstance(a, bool) for a in entry)):
                raise ParseError("an entry is [row, col, integer value]", f"{path}.entries[{e}]")
            i, j, v = entry
            if not (0 <= i < sizes[k] and 0 <= j < sizes[k + 1]):
                raise ParseError(f"entry ({i}, {j}) is outside the matrix", f"{path}.entries[{e}]")
            if v:
                cols[j][i] = cols[j].get(i, 0) + v
        columns[k + 1] = [{i: v for i, v in c.items() if v} for c in cols]
    if name is None:
        name = hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:12]
    be = MatrixBackend(name, sizes, columns)
    from ..serialize import register_backend

    register_backend(be)
    cells = {n: [(n, i) for i in range(s)] for n, s in enumerate(sizes)}
    return FiniteComplex(be, cells, "explicit matrix input")


def simplicial_matrices(simplices: Dict[int, List[tuple]]) -> dict:
    """Matrix JSON of an oriented simplicial complex given by sorted vertex tuples."""
    dims = sorted(simplices)
    index = {n: {s: i for i, s in enumerate(simplices[n])} for n in dims}
    out = {"degrees": [len(simplices[n]) for n in dims], "boundaries": []}
    for n in dims[1:]:
        entries = []
        for j, s in enumerate(simplices[n]):
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                entries.append([index[n - 1][face], j, -1 if i & 1 else 1])
        out["boundaries"].append({"rows": len(simplices[n - 1]), "cols": len(simplices[n]), "entries": entries})
    return out


def torus_triangulation(n: int = 3) -> FiniteComplex:
    """The ``n x n`` grid triangulation of the 2-torus (n >= 3)."""
    if n < 3:
        raise ComplexError("the grid triangulation of the torus needs n >= 3")
    v = lambda i, j: (i % n) * n + (j % n)
    tris = set()
    for i, j in product(range(n), repeat=2):
        tris.add(tuple(sorted((v(i, j), v(i + 1, j), v(i + 1, j + 1)))))
        tris.add(tuple(sorted((v(i, j), v(i, j + 1), v(i + 1, j + 1)))))
    edges = sorted({e for t in tris for e in combinations(t, 2)})
    verts = [(x,) for x in range(n * n)]
    cx = from_matrix_json(simplicial_matrices({0: verts, 1: edges, 2: sorted(tris)}), name=f"torus:{n}")
    cx.provenance = f"generated triangulation (torus, {n}x{n} grid)"
    return cx


def sphere_triangulation(dim: int = 2) -> FiniteComplex:
    """Boundary of the standard ``(dim+1)``-simplex."""
    if dim < 1:
        raise ComplexError("sphere dimension must be positive")
    verts = range(dim + 2)
    simplices = {k: [tuple(s) for s in combinations(verts, k + 1)] for k in range(dim + 1)}
    cx = from_matrix_json(simplicial_matrices(simplices), name=f"sphere:{dim}")
    cx.provenance = f"generated triangulation (sphere, boundary of the {dim + 1}-simplex)"
    return cx
