"""Machine-readable reports: one JSON object per cell plus a flat CSV summary."""

import csv
import io
import json
import math

import numpy as np

from .ladder import phi1

CSV_FIELDS = ("cell_id", "gamma_lo", "gamma_hi", "omega", "alpha_star", "I", "t_H", "residual", "passed")


def _plain(obj):
    """Recursively convert dataclass dicts, tuples and numpy scalars to JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return obj


def dumps(obj):
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def summary_row(report):
    d = report.to_dict() if hasattr(report, "to_dict") else report
    cell = d["cell"]
    return {
        "cell_id": f"{d['generator']['label']}#{cell['index']}",
        "gamma_lo": cell["gamma_lo"],
        "gamma_hi": cell["gamma_hi"],
        "omega": d["omega"],
        "alpha_star": d["exponent"]["alpha_star"],
        "I": d["I"],
        "t_H": d["t_H"]["value"],
        "residual": d["t_H"]["residual"],
        "passed": d["passed"],
    }


def summary_csv(reports):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        row = summary_row(r)
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def profile_csv(profile, alpha, points=1024):
    """Integrand profile over a hat-cell for external plotting."""
    hat = profile.hat
    t = np.linspace(hat.gamma_lo_hat, hat.gamma_hi_hat, points)
    h, dh, w = profile.sample(t)
    x = phi1(profile.table, t)
    f = h**alpha * dh
    buf = io.StringIO()
    buf.write("t,x,abs_H,abs_H_prime,weight,integrand,weighted_integrand\n")
    for row in zip(t, x, h, dh, w, f, f * w):
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def band_summary(lo, hi, estimates):
    """Median omega and median |omega - 1| over one gamma' band."""
    if not estimates:
        return {"band": [lo, hi], "absent": True, "count": 0}
    om = np.array([e["omega"] for e in estimates])
    return {
        "band": [lo, hi],
        "absent": False,
        "count": int(om.size),
        "median_omega": float(np.median(om)),
        "median_abs_dev": float(np.median(np.abs(om - 1.0))),
        "cells": estimates,
    }
