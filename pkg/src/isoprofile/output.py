"""CSV, JSON and SVG writers for profiles, sweeps and critical-height searches."""
import csv
import io
import json
import math

import numpy as np

PROFILE_COLUMNS = ("t", "xi", "theta_scaled", "alpha", "r", "theta")
TYPEMAP_COLUMNS = ("delta", "verdict", "witness")
SCHEMA_VERSION = 1


def fmt(x):
    """17 significant digits: enough to reproduce any double on re-parsing."""
    if x is None:
        return ""
    return format(float(x), ".17g")


def _write_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def profile_csv(profile):
    return _write_csv(PROFILE_COLUMNS, ([fmt(v) for v in row] for row in profile.rows()))


def typemap_csv(results):
    return _write_csv(
        TYPEMAP_COLUMNS, ([fmt(r.delta), r.verdict.value, fmt(r.witness_time)] for r in results)
    )


def read_profile_csv(text):
    """Header and ``float64`` rows of a profile CSV."""
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in row] for row in rows[1:]])


# JSON -----------------------------------------------------------------------

_PARAMS = {
    "type": "object",
    "required": ["g", "m1", "m2", "n", "theta_star"],
    "properties": {
        "g": {"enum": [1, 2, 3, 4, 6]},
        "m1": {"type": "integer", "minimum": 1},
        "m2": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 2},
        "theta_star": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": math.pi / 2},
    },
}
_TRIPLE = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

PROFILE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "closed profile curve",
    "type": "object",
    "required": ["schema", "kind", "params", "delta_star", "period", "alpha_mismatch",
                 "closure_error", "simple", "columns", "samples"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "kind": {"const": "profile"},
        "params": _PARAMS,
        "delta_star": {"type": "number"},
        "period": {"type": "number", "exclusiveMinimum": 0},
        "alpha_mismatch": {"type": "number", "minimum": 0},
        "closure_error": _TRIPLE,
        "simple": {"type": "boolean"},
        "columns": {"const": list(PROFILE_COLUMNS)},
        "samples": {"type": "array", "items": {"type": "array", "items": {"type": "number"},
                                               "minItems": 6, "maxItems": 6}},
    },
    "additionalProperties": False,
}

CLASSIFY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "trajectory classification",
    "type": "object",
    "required": ["schema", "kind", "params", "delta", "verdict", "witness_time", "terminal_state",
                 "witness_residuals"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "kind": {"const": "classify"},
        "params": _PARAMS,
        "delta": {"type": "number"},
        "verdict": {"enum": ["Type1", "Type2", "Type3", "Undetermined"]},
        "witness_time": {"type": ["number", "null"]},
        "terminal_state": _TRIPLE,
        "witness_residuals": {"type": "object", "required": ["xi", "alpha"]},
        "evidence": {"type": ["object", "null"]},
    },
}

DELTA_STAR_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "critical height search",
    "type": "object",
    "required": ["schema", "kind", "params", "delta_star", "bracket", "iterations", "history"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "kind": {"const": "delta_star"},
        "params": _PARAMS,
        "delta_star": {"type": "number"},
        "bracket": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "iterations": {"type": "integer", "minimum": 0},
        "history": {"type": "array"},
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}


def params_record(params):
    return {"g": params.g, "m1": params.m1, "m2": params.m2, "n": int(params.n),
            "theta_star": params.theta_star}


def profile_record(profile):
    return {
        "schema": SCHEMA_VERSION,
        "kind": "profile",
        "params": params_record(profile.params),
        "delta_star": profile.delta_star,
        "period": profile.period,
        "alpha_mismatch": profile.alpha_mismatch,
        "closure_error": [float(v) for v in profile.closure_error],
        "simple": profile.is_simple,
        "columns": list(PROFILE_COLUMNS),
        "samples": profile.rows().tolist(),
    }


def classify_record(params, result):
    ev = result.evidence
    return {
        "schema": SCHEMA_VERSION,
        "kind": "classify",
        "params": params_record(params),
        "delta": result.delta,
        "verdict": result.verdict.value,
        "witness_time": result.witness_time,
        "terminal_state": list(result.terminal_state),
        "witness_residuals": dict(result.witness_residuals),
        "evidence": None if ev is None else {
            "xi_limit": ev.xi_limit, "xi_variation": ev.xi_variation, "xi_rate": ev.xi_rate,
            "theta_gap": ev.theta_gap, "alpha_gap": ev.alpha_gap, "accepted": ev.accepted,
        },
    }


def delta_star_record(params, result):
    return {
        "schema": SCHEMA_VERSION,
        "kind": "delta_star",
        "params": params_record(params),
        "delta_star": result.delta_star,
        "bracket": list(result.bracket),
        "iterations": result.iterations,
        "history": [list(b) for b in result.history],
        "warnings": list(result.warnings),
    }


def dumps(record):
    # repr-based float output in json round-trips exactly.
    return json.dumps(record, indent=1, allow_nan=False) + "\n"


# SVG ------------------------------------------------------------------------

SVG_SIZE = 800
_MARGIN = 70


def profile_svg(profile):
    """The closed ``(xi, vartheta)`` curve on an 800x800 canvas, ``vartheta*`` dashed."""
    return curve_svg(profile.phase[:, 0], profile.phase[:, 1], profile.params.theta_star,
                     title=f"closed profile, (g, m1, m2) = ({profile.params.g}, "
                           f"{profile.params.m1}, {profile.params.m2})")


def _nice_ticks(lo, hi, count=5):
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / count))
    for mult in (1, 2, 5, 10):
        if span / (mult * step) <= count:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    return [first + k * step for k in range(int((hi - first) / step + 1e-9) + 1)]


def curve_svg(x, y, theta_star=None, title=""):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ys = list(y) + ([theta_star] if theta_star is not None else [])
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(min(ys)), float(max(ys))
    pad_x = 0.08 * (x1 - x0 or 1.0)
    pad_y = 0.08 * (y1 - y0 or 1.0)
    x0, x1, y0, y1 = x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y
    w = SVG_SIZE - 2 * _MARGIN

    def px(v):
        return _MARGIN + (v - x0) / (x1 - x0) * w

    def py(v):
        return SVG_SIZE - _MARGIN - (v - y0) / (y1 - y0) * w

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_SIZE}" '
        f'height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'<rect width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
        f'<text x="{SVG_SIZE / 2:.1f}" y="30" text-anchor="middle" font-family="sans-serif" '
        f'font-size="18">{title}</text>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{w}" height="{w}" fill="none" stroke="black"/>',
    ]
    for tx in _nice_ticks(x0, x1):
        out.append(f'<line x1="{px(tx):.2f}" y1="{SVG_SIZE - _MARGIN}" x2="{px(tx):.2f}" '
                   f'y2="{SVG_SIZE - _MARGIN + 6}" stroke="black"/>')
        out.append(f'<text x="{px(tx):.2f}" y="{SVG_SIZE - _MARGIN + 22}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="12">{tx:.3g}</text>')
    for ty in _nice_ticks(y0, y1):
        out.append(f'<line x1="{_MARGIN - 6}" y1="{py(ty):.2f}" x2="{_MARGIN}" y2="{py(ty):.2f}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{_MARGIN - 10}" y="{py(ty) + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="12">{ty:.3g}</text>')
    out.append(f'<text x="{SVG_SIZE / 2:.1f}" y="{SVG_SIZE - 20}" text-anchor="middle" '
               f'font-family="serif" font-size="16" font-style="italic">ξ</text>')
    out.append(f'<text x="22" y="{SVG_SIZE / 2:.1f}" text-anchor="middle" font-family="serif" '
               f'font-size="16" font-style="italic">ϑ (rad)</text>')
    if theta_star is not None:
        out.append(f'<line x1="{_MARGIN}" y1="{py(theta_star):.2f}" x2="{SVG_SIZE - _MARGIN}" '
                   f'y2="{py(theta_star):.2f}" stroke="gray" stroke-dasharray="8,6"/>')
        out.append(f'<text x="{SVG_SIZE - _MARGIN - 4}" y="{py(theta_star) - 6:.2f}" '
                   f'text-anchor="end" font-family="serif" font-size="14">ϑ*</text>')
    pts = " L ".join(f"{px(a):.3f},{py(b):.3f}" for a, b in zip(x, y))
    out.append(f'<path d="M {pts} Z" fill="none" stroke="navy" stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
