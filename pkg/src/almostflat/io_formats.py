"""Instance documents: line-oriented JSON with explicit kinds and versions.

Complex numbers are stored as [re, im] pairs and matrices as row-major
entry lists, so documents stay diffable and language-neutral.  A document
either inlines its complex or references another document by path
(resolved relative to the referring file).
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .complexes import SimplicialPair, StarCover, build_star_cover
from .cocycles import CechCocycle, Morphism, identity_cocycle
from .constructions import DiscreteConnection, FiniteCovering
from .errors import SchemaError
from .quasireps import QuasiRep
from .relative import StablyRelativeCocycle
from .unitary import is_unitary

SCHEMA_VERSION = 1

KINDS = ("complex", "cocycle", "relative_bundle", "quasirep", "covering", "connection", "report")


def encode_matrix(m: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m, dtype=complex).ravel()]


def decode_matrix(entries, rows: int, cols: int) -> np.ndarray:
    if len(entries) != rows * cols:
        raise SchemaError(f"matrix needs {rows * cols} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries])
    return flat.reshape(rows, cols)


def dump_document(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_document(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or "kind" not in doc or "payload" not in doc:
        raise SchemaError(f"{path}: document needs 'kind' and 'payload' fields")
    if doc.get("version") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported version {doc.get('version')}")
    if doc["kind"] not in KINDS:
        raise SchemaError(f"{path}: unknown kind {doc['kind']!r}")
    return doc


def document(kind: str, payload: dict) -> dict:
    return {"kind": kind, "version": SCHEMA_VERSION, "payload": payload}


def sha256_of(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# complexes


def complex_payload(pair: SimplicialPair, basepoint: int | None = None, family: str | None = None) -> dict:
    maximal = sorted(
        s for s in pair.simplices if not any(set(s) < set(t) for t in pair.simplices)
    )
    out = {
        "n_vertices": pair.n_vertices,
        "maximal_simplices": [list(s) for s in maximal],
        "y_vertices": sorted(pair.y_vertices),
    }
    if basepoint is not None:
        out["basepoint"] = basepoint
    if family is not None:
        out["family"] = family
    return out


def parse_complex(payload: dict) -> SimplicialPair:
    try:
        n = int(payload["n_vertices"])
        maximal = [tuple(int(v) for v in s) for s in payload["maximal_simplices"]]
        y = [int(v) for v in payload.get("y_vertices", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"complex payload malformed: {exc}") from None
    return SimplicialPair.from_maximal(n, maximal, y)


def _resolve_complex(payload, base_dir: str) -> tuple[SimplicialPair, dict]:
    """Inline complex payload or a path reference to a complex document."""
    if isinstance(payload, str):
        path = os.path.join(base_dir, payload)
        doc = load_document(path)
        if doc["kind"] != "complex":
            raise SchemaError(f"{path}: expected a complex document")
        return parse_complex(doc["payload"]), doc["payload"]
    return parse_complex(payload), payload


# ---------------------------------------------------------------------------
# cocycles and bundles


def cocycle_payload(v: CechCocycle) -> dict:
    records = []
    for (a, b, s), m in sorted(v.data.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        records.append({"mu": a, "nu": b, "sample_simplex": list(s), "matrix": encode_matrix(m)})
    return {"fiber_dim": v.dim, "records": records}


def parse_cocycle(payload: dict, cover: StarCover, check_unitary: bool = True) -> CechCocycle:
    try:
        dim = int(payload["fiber_dim"])
        records = payload["records"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"cocycle payload malformed: {exc}") from None
    data = {}
    for i, rec in enumerate(records):
        try:
            a, b = int(rec["mu"]), int(rec["nu"])
            s = tuple(int(v) for v in rec["sample_simplex"])
            m = decode_matrix(rec["matrix"], dim, dim)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"cocycle record {i}: {exc}") from None
        if a >= b:
            raise SchemaError(f"cocycle record {i}: need mu < nu, got ({a}, {b})")
        if s not in cover.samples(a, b):
            raise SchemaError(f"cocycle record {i}: {s} is not a sample of U_{a},{b}")
        if check_unitary and not is_unitary(m, tol=1e-8):
            raise SchemaError(f"cocycle record {i}: matrix is not unitary")
        data[(a, b, s)] = m
    v = CechCocycle(cover, dim, data)
    res = v.validate()
    if res > 1e-8:
        raise SchemaError(f"cocycle identity violated by {res:.3e} at a sample")
    return v


def morphism_payload(u: Morphism) -> dict:
    records = [
        {"mu": mu, "matrix": encode_matrix(m)} for mu, m in sorted(u.units.items())
    ]
    return {"dim": u.dim, "records": records}


def parse_morphism(payload: dict) -> Morphism:
    try:
        dim = int(payload["dim"])
        units = {
            int(rec["mu"]): decode_matrix(rec["matrix"], dim, dim)
            for rec in payload["records"]
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"morphism payload malformed: {exc}") from None
    for mu, m in units.items():
        if not is_unitary(m, tol=1e-8):
            raise SchemaError(f"morphism unit at {mu} is not unitary")
    return Morphism(dim, units)


def bundle_payload(f: StablyRelativeCocycle, complex_ref, family: str | None = None) -> dict:
    out = {
        "complex": complex_ref,
        "v1": cocycle_payload(f.v1),
        "v2": cocycle_payload(f.v2),
        "v0": cocycle_payload(f.v0),
        "u": morphism_payload(f.u),
    }
    if family:
        out["family"] = family
    return out


def parse_bundle(payload: dict, base_dir: str = ".") -> tuple[StablyRelativeCocycle, SimplicialPair, dict]:
    pair, cpayload = _resolve_complex(payload["complex"], base_dir)
    cover = build_star_cover(pair)
    v1 = parse_cocycle(payload["v1"], cover)
    v2 = parse_cocycle(payload["v2"], cover)
    v0 = parse_cocycle(payload["v0"], cover) if payload.get("v0") else identity_cocycle(cover, 0)
    u = parse_morphism(payload["u"])
    return StablyRelativeCocycle(v1, v2, v0, u), pair, cpayload


# ---------------------------------------------------------------------------
# quasireps, coverings, connections


def quasirep_payload(pi: QuasiRep) -> dict:
    records = []
    for sym in sorted(pi.gen_values, key=str):
        edge = list(sym) if isinstance(sym, tuple) else [sym]
        records.append({"edge": edge, "matrix": encode_matrix(pi.gen_values[sym])})
    return {"dim": pi.dim, "records": records}


def parse_quasirep(payload: dict) -> QuasiRep:
    try:
        dim = int(payload["dim"])
        values = {}
        for rec in payload["records"]:
            edge = rec["edge"]
            sym = tuple(edge) if len(edge) > 1 else edge[0]
            if isinstance(sym, tuple):
                sym = tuple(int(x) if not isinstance(x, str) else x for x in sym)
            values[sym] = decode_matrix(rec["matrix"], dim, dim)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"quasirep payload malformed: {exc}") from None
    for sym, m in values.items():
        if not is_unitary(m, tol=1e-8):
            raise SchemaError(f"quasirep value at {sym} is not unitary")
    return QuasiRep(dim, values)


def covering_payload(cov: FiniteCovering, base_ref) -> dict:
    return {
        "base": base_ref,
        "sheets": cov.sheets,
        "total": complex_payload(cov.total),
        "projection": list(cov.projection),
    }


def parse_covering(payload: dict, base_dir: str = ".") -> FiniteCovering:
    base, _ = _resolve_complex(payload["base"], base_dir)
    total = parse_complex(payload["total"])
    proj = tuple(int(v) for v in payload["projection"])
    cov = FiniteCovering(total, base, proj, int(payload["sheets"]))
    cov.validate()
    return cov


def connection_payload(conn: DiscreteConnection, complex_ref) -> dict:
    records = [
        {"edge": [a, b], "matrix": encode_matrix(m)}
        for (a, b), m in sorted(conn.edge_units.items())
    ]
    return {"complex": complex_ref, "dim": conn.dim, "records": records}


def parse_connection(payload: dict, base_dir: str = ".") -> tuple[DiscreteConnection, SimplicialPair]:
    pair, _ = _resolve_complex(payload["complex"], base_dir)
    dim = int(payload["dim"])
    units = {}
    for rec in payload["records"]:
        a, b = (int(x) for x in rec["edge"])
        if a >= b:
            raise SchemaError("connection edges must be sorted pairs")
        if (a, b) not in pair.simplices:
            raise SchemaError(f"connection edge ({a}, {b}) is not in the complex")
        units[(a, b)] = decode_matrix(rec["matrix"], dim, dim)
    return DiscreteConnection(dim, units), pair
