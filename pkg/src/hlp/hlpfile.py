"""The HLP-1 JSON document format.

Rationals are written as strings ``"p/q"`` or ``"p"``; integers are also
accepted on input.  Matrices are lists of rows.  Degree- and index-keyed
maps use decimal string keys.  :func:`dumps` produces the canonical form
(sorted keys, two-space indent, trailing newline), so parsing and
re-serializing a canonical document is byte-identical.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import FormatError, HLPError
from .exact import Matrix, Subspace, parse_rational
from .graded import Filtration, GradedOperator, GradedSpace, PoincarePairing
from .lefschetz import WeilOperator
from .perverse import FiberRecord, PerversePackage

FORMAT = "HLP-1"


# ----------------------------------------------------------------- parsing


def _int(value: Any, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError("expected an integer", where)
    if minimum is not None and value < minimum:
        raise FormatError(f"must be at least {minimum}", where)
    return value


def _key(text: str, where: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise FormatError(f"key {text!r} is not an integer", where) from None


def _matrix(value: Any, rows: int, cols: int, where: str) -> Matrix:
    if not isinstance(value, list) or len(value) != rows:
        raise FormatError(f"expected a {rows}x{cols} matrix", where)
    out = []
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise FormatError(f"expected a {rows}x{cols} matrix", f"{where}[{r}]")
        try:
            out.append([parse_rational(x) for x in row])
        except ValueError as exc:
            raise FormatError(str(exc), f"{where}[{r}]") from None
    return Matrix(out, cols=cols)


def _mapping(value: Any, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise FormatError("expected an object", where)
    return {_key(k, where): v for k, v in value.items()}


def _blocks(value: Any, space: GradedSpace, shift: int, where: str) -> dict:
    out = {}
    for l, m in _mapping(value, where).items():
        if not 0 <= l <= 2 * space.n:
            raise FormatError(f"degree {l} out of range", where)
        out[l] = _matrix(m, space.dim(l + shift), space.dim(l), f"{where}.{l}")
    return out


def _fiber(value: Any, space: GradedSpace, where: str) -> FiberRecord:
    if not isinstance(value, dict):
        raise FormatError("expected an object", where)
    label = value.get("label")
    if not isinstance(label, str):
        raise FormatError("label must be a string", f"{where}.label")
    codim = value.get("codim_h")
    codim = None if codim is None else _int(codim, f"{where}.codim_h", 0)
    hdims = {b: _int(d, f"{where}.homology_dims.{b}", 0) for b, d in _mapping(value.get("homology_dims"), f"{where}.homology_dims").items()}
    cdims = {b: _int(d, f"{where}.cohomology_dims.{b}", 0) for b, d in _mapping(value.get("cohomology_dims"), f"{where}.cohomology_dims").items()}
    n = space.n
    cl, res, fil = {}, {}, {}
    cls = _mapping(value.get("class_maps"), f"{where}.class_maps")
    ress = _mapping(value.get("restriction_maps"), f"{where}.restriction_maps")
    fils = _mapping(value.get("homology_filtration"), f"{where}.homology_filtration")
    keys = set(hdims)
    for name, got in (("cohomology_dims", cdims), ("class_maps", cls), ("restriction_maps", ress), ("homology_filtration", fils)):
        if set(got) != keys:
            raise FormatError("indices must match homology_dims", f"{where}.{name}")
    for b in sorted(keys):
        if not 0 <= n + b <= 2 * n:
            raise FormatError(f"index {b} puts the fiber outside degrees 0..{2 * n}", f"{where}.homology_dims")
        d = space.dim(n + b)
        cl[b] = _matrix(cls[b], d, hdims[b], f"{where}.class_maps.{b}")
        res[b] = _matrix(ress[b], cdims[b], d, f"{where}.restriction_maps.{b}")
        fil[b] = _filtration(fils[b], hdims[b], f"{where}.homology_filtration.{b}")
    return FiberRecord(label, cl, res, fil, codim)


def _filtration(value: Any, dim: int, where: str) -> Filtration:
    if not isinstance(value, dict) or set(value) != {"lowest", "levels"}:
        raise FormatError("expected {lowest, levels}", where)
    lo = _int(value["lowest"], f"{where}.lowest")
    levels = value["levels"]
    if not isinstance(levels, list):
        raise FormatError("levels must be a list", f"{where}.levels")
    steps = []
    for k, lev in enumerate(levels):
        if not isinstance(lev, list):
            raise FormatError("a level is a list of basis vectors", f"{where}.levels[{k}]")
        vecs = _matrix(lev, len(lev), dim, f"{where}.levels[{k}]")
        steps.append(Subspace(dim, vecs.T) if vecs.rows else Subspace.zero(dim))
    return Filtration(dim, lo, steps)


REQUIRED = ("format", "name", "n", "dims", "eta_blocks", "L_blocks", "pairing_blocks")
OPTIONAL = ("weil_blocks", "defect_table", "fibers")


def from_dict(doc: Any) -> PerversePackage:
    if not isinstance(doc, dict):
        raise FormatError("document must be a JSON object", "$")
    for k in REQUIRED:
        if k not in doc:
            raise FormatError("missing field", k)
    extra = set(doc) - set(REQUIRED) - set(OPTIONAL)
    if extra:
        raise FormatError(f"unknown fields {sorted(extra)}", "$")
    if doc["format"] != FORMAT:
        raise FormatError(f"unsupported format {doc['format']!r}", "format")
    if not isinstance(doc["name"], str):
        raise FormatError("name must be a string", "name")
    n = _int(doc["n"], "n", 0)
    dims = doc["dims"]
    if not isinstance(dims, list) or len(dims) != 2 * n + 1:
        raise FormatError(f"dims must list {2 * n + 1} dimensions", "dims")
    space = GradedSpace(n, [_int(d, f"dims[{k}]", 0) for k, d in enumerate(dims)])
    try:
        eta = GradedOperator(space, 2, _blocks(doc["eta_blocks"], space, 2, "eta_blocks"))
        L = GradedOperator(space, 2, _blocks(doc["L_blocks"], space, 2, "L_blocks"))
    except FormatError:
        raise
    except HLPError as exc:
        raise FormatError(str(exc), "operators") from None
    pairing = {}
    for l, m in _mapping(doc["pairing_blocks"], "pairing_blocks").items():
        if not 0 <= l <= n:
            raise FormatError(f"pairing blocks are given for degrees 0..{n} only", "pairing_blocks")
        pairing[l] = _matrix(m, space.dim(l), space.dim(2 * n - l), f"pairing_blocks.{l}")
    weil = None
    if doc.get("weil_blocks") is not None:
        wb = {}
        for l, m in _mapping(doc["weil_blocks"], "weil_blocks").items():
            if not 0 <= l <= 2 * n:
                raise FormatError(f"degree {l} out of range", "weil_blocks")
            wb[l] = _matrix(m, space.dim(l), space.dim(l), f"weil_blocks.{l}")
        for l in space.degrees:
            if not space.dim(l):
                wb.setdefault(l, Matrix.zeros(0, 0))
        weil = WeilOperator(space, wb)
    table = None
    if doc.get("defect_table") is not None:
        if not isinstance(doc["defect_table"], list):
            raise FormatError("expected a list", "defect_table")
        table = []
        for k, row in enumerate(doc["defect_table"]):
            where = f"defect_table[{k}]"
            if not isinstance(row, dict) or set(row) != {"i", "dimYi"}:
                raise FormatError("expected {i, dimYi}", where)
            table.append((_int(row["i"], f"{where}.i", 0), _int(row["dimYi"], f"{where}.dimYi", 0)))
    fibers = []
    raw = doc.get("fibers") or []
    if not isinstance(raw, list):
        raise FormatError("expected a list", "fibers")
    for k, f in enumerate(raw):
        fibers.append(_fiber(f, space, f"fibers[{k}]"))
    return PerversePackage(doc["name"], space, eta, L, PoincarePairing(space, pairing), weil, table, fibers)


def loads(text: str) -> PerversePackage:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None
    return from_dict(doc)


def load(path: str) -> PerversePackage:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FormatError(exc.strerror or str(exc), path) from None
    return loads(text)


# ----------------------------------------------------------- serializing


def _m(M: Matrix) -> list:
    return M.to_strings()


def _filtration_dict(F: Filtration) -> dict:
    return {"lowest": F.lo, "levels": [S.basis.T.to_strings() for S in F.steps]}


def to_dict(pkg: PerversePackage) -> dict:
    sp, n = pkg.space, pkg.n

    def op_blocks(op: GradedOperator) -> dict:
        return {
            str(l): _m(op.block(l))
            for l in sp.degrees
            if sp.dim(l) and sp.dim(l + 2) and l + 2 <= 2 * n
        }

    doc = {
        "format": FORMAT,
        "name": pkg.name,
        "n": n,
        "dims": list(sp.dims),
        "eta_blocks": op_blocks(pkg.eta),
        "L_blocks": op_blocks(pkg.L),
        "pairing_blocks": {str(l): _m(pkg.pairing.phi(l)) for l in range(n + 1) if sp.dim(l)},
        "weil_blocks": None
        if pkg.weil is None
        else {str(l): _m(pkg.weil.blocks[l]) for l in sp.degrees if sp.dim(l)},
        "defect_table": None
        if pkg.defect_table is None
        else [{"i": i, "dimYi": d} for i, d in pkg.defect_table],
        "fibers": [_fiber_dict(f) for f in pkg.fibers],
    }
    return doc


def _fiber_dict(f: FiberRecord) -> dict:
    return {
        "label": f.label,
        "codim_h": f.codim_h,
        "homology_dims": {str(b): f.class_maps[b].cols for b in f.indices},
        "cohomology_dims": {str(b): f.restriction_maps[b].rows for b in f.indices},
        "class_maps": {str(b): _m(f.class_maps[b]) for b in f.indices},
        "restriction_maps": {str(b): _m(f.restriction_maps[b]) for b in f.indices},
        "homology_filtration": {str(b): _filtration_dict(f.homology_filtration[b]) for b in f.indices},
    }


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def dumps(pkg: PerversePackage) -> str:
    return canonical_json(to_dict(pkg))


def dump(pkg: PerversePackage, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(pkg))
