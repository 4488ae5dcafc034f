"""JSON and CSV formats: matrices, frames, certificates and pencil traces.

Matrix files look like ``{"n": 2, "entries": [[2, [0, 1]], [[0, -1], 3]]}``;
a bare number is a real entry and ``[re, im]`` a complex one.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .core import HERMITICITY_TOL, HermitianMatrix, OrthonormalFrame, validate_hermitian
from .errors import BadSpec, InputError
from .inequalities import IndexSet


def _scalar(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(M) -> dict:
    a = np.asarray(M.array if isinstance(M, HermitianMatrix) else M, dtype=complex)
    return {"n": a.shape[0], "entries": [[_scalar(z) for z in row] for row in a]}


def matrix_from_json(data, tol: float = HERMITICITY_TOL) -> HermitianMatrix:
    if not isinstance(data, dict) or "entries" not in data:
        raise BadSpec('matrix JSON must be an object with an "entries" field')
    entries = data["entries"]
    if not isinstance(entries, list) or not all(isinstance(r, list) for r in entries):
        raise BadSpec('"entries" must be a list of rows')
    n = data.get("n", len(entries))
    if n != len(entries) or any(len(r) != n for r in entries):
        raise BadSpec(f'"entries" is not {n}x{n}')
    return validate_hermitian(entries, tol)


def load_matrix(path, tol: float = HERMITICITY_TOL) -> HermitianMatrix:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix from {path}: {exc}") from exc
    return matrix_from_json(data, tol)


def save_matrix(M, path) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(M)) + "\n")


def frame_to_json(F: OrthonormalFrame) -> list:
    """List of vectors, each a list of ``[re, im]`` pairs."""
    return [[_pair(z) for z in F.vectors[:, j]] for j in range(F.k)]


def frame_from_json(data) -> OrthonormalFrame:
    try:
        cols = [[complex(re, im) for re, im in vec] for vec in data]
    except (TypeError, ValueError) as exc:
        raise BadSpec(f"bad frame data: {exc}") from exc
    return OrthonormalFrame(np.array(cols, dtype=complex).T)


def certificate_to_json(cert) -> dict:
    return {
        "indices": list(cert.index_set.indices),
        "breakpoints": list(cert.breakpoints),
        "subspaces": [frame_to_json(U) for U in cert.subspaces],
        "residuals": {
            "segment": list(cert.residuals),
            "A_invariance": list(cert.A_invariance),
            "B_invariance": list(cert.B_invariance),
            "top_k_B_match": list(cert.top_k_B_match),
        },
        "r": cert.r,
        "slack": cert.slack,
        "tol": cert.tol,
        "A": matrix_to_json(cert.A),
        "B": matrix_to_json(cert.B),
        "diagnostics": cert.diagnostics,
    }


def certificate_from_json(data: dict):
    from .equality import EqualityCertificate

    try:
        A = matrix_from_json(data["A"])
        B = matrix_from_json(data["B"])
        S = IndexSet(A.n, tuple(data["indices"]))
        frames = tuple(frame_from_json(U) for U in data["subspaces"])
        res = data.get("residuals", {})
        return EqualityCertificate(
            A=A, B=B, index_set=S,
            breakpoints=tuple(float(b) for b in data["breakpoints"]),
            subspaces=frames,
            residuals=tuple(res.get("segment", ())),
            A_invariance=tuple(res.get("A_invariance", ())),
            B_invariance=tuple(res.get("B_invariance", ())),
            top_k_B_match=tuple(res.get("top_k_B_match", ())),
            slack=float(data.get("slack", 0.0)),
            tol=float(data.get("tol", 1e-8)),
            diagnostics=data.get("diagnostics", {}),
        )
    except (KeyError, TypeError) as exc:
        raise BadSpec(f"malformed certificate: {exc!r}") from exc


def trace_to_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"lambda_{i + 1}" for i in range(trace.n)])
    for t, row in zip(trace.grid, trace.curves):
        w.writerow([repr(float(t))] + [repr(float(x)) for x in row])
    return buf.getvalue()


def crossings_to_json(trace) -> list[dict]:
    return [c.to_dict() for c in trace.crossings]
