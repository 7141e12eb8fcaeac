"""Deterministic JSON/CSV serialization for fields, tensors, matrices and runs.

All writers emit byte-stable output: JSON with sorted keys and shortest
round-trip floats, CSV with repr-formatted values and LF newlines.  Fields
store one representative per +/-k pair.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .contact import MetricField, OneForm, TensorPoly
from .spectral import (
    ScalarSpectralField,
    SpectralVectorField,
    lex_negative,
)
from .trig import COS, SIN, TrigPoly

__all__ = [
    "field_to_json",
    "field_from_json",
    "scalar_field_to_json",
    "scalar_field_from_json",
    "trig_to_json",
    "trig_from_json",
    "oneform_to_json",
    "oneform_from_json",
    "tensor_to_json",
    "tensor_from_json",
    "compatibility_to_json",
    "metric_to_json",
    "grid_report_csv",
    "trajectory_csv",
    "section_csv",
    "lyapunov_csv",
    "matrix_csv",
    "splitting_curves_csv",
    "dump_json",
    "sha256_of_file",
    "sha256_of_text",
    "field_hash",
]


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def sha256_of_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_of_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# spectral fields


def field_to_json(v: SpectralVectorField) -> dict:
    """Schema: {truncation_radius, modes: [{k: [int x3], re: [f64 x3], im: [f64 x3]}]},
    one mode entry per +/-k pair (the lexicographically positive representative)."""
    modes = []
    for k in sorted(v.coeffs):
        if k != (0, 0, 0) and lex_negative(k):
            continue
        c = v.coeffs[k]
        modes.append(
            {
                "k": list(k),
                "re": [float(x) for x in c.real],
                "im": [float(x) for x in c.imag],
            }
        )
    return {"truncation_radius": v.truncation_radius, "modes": modes}


def field_from_json(doc: dict) -> SpectralVectorField:
    pairs = {}
    for m in doc["modes"]:
        k = tuple(int(x) for x in m["k"])
        pairs[k] = np.array(m["re"], dtype=float) + 1j * np.array(m["im"], dtype=float)
    return SpectralVectorField.from_pairs(pairs, truncation_radius=doc["truncation_radius"])


def scalar_field_to_json(f: ScalarSpectralField) -> dict:
    modes = []
    for k in sorted(f.coeffs):
        if k != (0, 0, 0) and lex_negative(k):
            continue
        c = f.coeffs[k]
        modes.append({"k": list(k), "re": float(c.real), "im": float(c.imag)})
    return {"truncation_radius": f.truncation_radius, "modes": modes}


def scalar_field_from_json(doc: dict) -> ScalarSpectralField:
    pairs = {tuple(int(x) for x in m["k"]): complex(m["re"], m["im"]) for m in doc["modes"]}
    return ScalarSpectralField.from_pairs(pairs, truncation_radius=doc["truncation_radius"])


def field_hash(v: SpectralVectorField) -> str:
    return sha256_of_text(dump_json(field_to_json(v)))


# ---------------------------------------------------------------------------
# trig polynomials, forms, tensors, metrics


def trig_to_json(p: TrigPoly) -> dict:
    return {
        "terms": [
            {"kind": "cos" if kind == COS else "sin", "k": list(k), "coeff": float(c)}
            for kind, k, c in p.sorted_terms()
        ]
    }


def trig_from_json(doc: dict) -> TrigPoly:
    p = TrigPoly()
    for t in doc["terms"]:
        kind = COS if t["kind"] == "cos" else SIN
        p._accumulate(kind, tuple(int(x) for x in t["k"]), float(t["coeff"]))
    return p


def oneform_to_json(form: OneForm) -> dict:
    return {"components": [trig_to_json(c) for c in form.comps]}


def oneform_from_json(doc: dict) -> OneForm:
    return OneForm(comps=tuple(trig_from_json(c) for c in doc["components"]))


def tensor_to_json(t: TensorPoly) -> dict:
    return {"entries": [[trig_to_json(e) for e in row] for row in t.entries]}


def tensor_from_json(doc: dict) -> TensorPoly:
    return TensorPoly(
        entries=tuple(tuple(trig_from_json(e) for e in row) for row in doc["entries"])
    )


def compatibility_to_json(report) -> dict:
    return {
        "unit_norm_defect": report.unit_norm_defect,
        "star_defect": report.star_defect,
        "volume_defect": report.volume_defect,
        "nodes": report.nodes,
    }


def metric_to_json(g: MetricField) -> dict:
    doc = {
        "g_xi": tensor_to_json(g.g_xi),
        "alpha_outer": tensor_to_json(g.alpha_sq),
        "extra": tensor_to_json(g.extra) if g.extra is not None else None,
        "degree_hint": g.degree_hint,
    }
    if g.xi_scale_eps is not None:
        doc["xi_scale"] = {
            "epsilon": float(g.xi_scale_eps),
            "norm2": trig_to_json(g.xi_scale_norm2),
        }
    else:
        doc["xi_scale"] = None
    return doc


# ---------------------------------------------------------------------------
# CSV emitters


def _csv(rows, header) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(x)) if isinstance(x, (float, np.floating)) else str(x) for x in row))
    return "\n".join(lines) + "\n"


def grid_report_csv(report) -> str:
    """Uniform grid report with header (x1, x2, x3, value)."""
    n = report.grid
    step = 2.0 * np.pi / n
    rows = []
    vals = report.values
    for i in range(n):
        for j in range(n):
            for k in range(n):
                rows.append((i * step, j * step, k * step, float(vals[i, j, k])))
    return _csv(rows, ("x1", "x2", "x3", "value"))


def trajectory_csv(traj) -> str:
    rows = [(t, x[0], x[1], x[2]) for t, x in zip(traj.ts, traj.xs)]
    return _csv(rows, ("t", "x1", "x2", "x3"))


def section_csv(section) -> str:
    rows = [(p[0], p[1]) for p in section.points]
    return _csv(rows, ("s1", "s2"))


def lyapunov_csv(estimate) -> str:
    rows = [(t, v) for t, v in estimate.history]
    return _csv(rows, ("t", "estimate"))


def matrix_csv(M) -> str:
    M = np.asarray(M)
    rows = []
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            if M[i, j] != 0.0:
                rows.append((i, j, float(M[i, j])))
    return _csv(rows, ("row", "col", "value"))


def splitting_curves_csv(curves) -> str:
    k = curves.curves.shape[1]
    header = ("epsilon",) + tuple(f"lambda_{i + 1}" for i in range(k))
    rows = [
        (float(e),) + tuple(float(x) for x in row)
        for e, row in zip(curves.epsilons, curves.curves)
    ]
    return _csv(rows, header)
