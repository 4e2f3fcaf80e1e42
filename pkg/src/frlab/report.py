"""Serialisation of run reports to JSON or CSV."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import is_dataclass

import numpy as np

from .closed_forms import Divergence

SIG_DIGITS = 12


def _number(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    v = float(f"{x:.{SIG_DIGITS}g}")
    return 0.0 if v == 0 else v


def normalize(obj):
    """Plain JSON-compatible structure with floats rounded to 12 significant digits."""
    if isinstance(obj, Divergence):
        return {"divergent": True, "condition": obj.condition, "detail": obj.detail}
    if hasattr(obj, "to_dict"):
        return normalize(obj.to_dict())
    if is_dataclass(obj):
        raise TypeError(f"{type(obj).__name__} has no to_dict()")
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [normalize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _number(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _number(obj.real), "im": _number(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _cell(x) -> str:
    if isinstance(x, dict) and set(x) == {"re", "im"}:
        if isinstance(x["re"], str) or isinstance(x["im"], str):
            return f"{x['re']}{'' if str(x['im']).startswith('-') else '+'}{x['im']}j"
        return str(complex(x["re"], x["im"])).strip("()")
    return str(x)


def _flatten(row: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in row.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = ";".join(_cell(x) for x in v)
        else:
            out[key] = v
    return out


def emit_report(report: dict, fmt: str = "json", rows: list | None = None) -> bytes:
    """Serialise a report.

    ``report`` must carry ``seed``, ``budget`` and ``version``.  JSON output is the
    whole report with sorted keys; CSV output is a header plus one line per
    entry of ``rows`` (default: ``report["rows"]``), each tagged with the seed,
    budget and version.
    """
    data = normalize(report)
    if fmt == "json":
        return (json.dumps(data, sort_keys=True, indent=2) + "\n").encode()
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    rows = normalize(rows) if rows is not None else data.get("rows", [])
    flat = [_flatten(r) for r in rows]
    header = []
    for r in flat:
        header += [k for k in r if k not in header]
    header += ["seed", "budget", "version"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for r in flat:
        writer.writerow({**r, "seed": data.get("seed"), "budget": data.get("budget"),
                         "version": data.get("version")})
    return buf.getvalue().encode()
