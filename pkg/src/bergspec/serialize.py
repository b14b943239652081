"""Deterministic artifact serialization.

All artifacts must be byte-identical across runs with the same inputs, so
floats are always formatted with a fixed repr ("%.17g", which round-trips
float64 exactly) and dictionaries are emitted in insertion order by a
small local JSON writer instead of relying on library defaults.  Complex
numbers appear as [re, im] pairs.  Nonfinite values are rejected: no
artifact schema here has a meaning for them.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from .errors import BergspecError
from .essential import EssentialSpectrumResult
from .spectra import PseudospectrumGrid, RegionApprox, SpectrumApprox
from .toeplitz import ToeplitzMatrix1D, ToeplitzMatrix2D

__all__ = [
    "fmt_float", "json_text",
    "matrix_to_json", "matrix_to_csv",
    "spectrum_to_json",
    "pseudo_to_json", "pseudo_to_csv",
    "region_to_json", "essential_result_to_json",
    "verify_report_to_json",
]


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise BergspecError(f"cannot serialize nonfinite value {x!r}")
    return "%.17g" % x


class _Raw:
    """Pre-formatted JSON fragment (used to inject fixed float reprs)."""

    __slots__ = ("text",)

    def __init__(self, text: str):
        self.text = text


def _emit(obj) -> str:
    if isinstance(obj, _Raw):
        return obj.text
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{fmt_float(obj.real)}, {fmt_float(obj.imag)}]"
    if isinstance(obj, str):
        out = ['"']
        for ch in obj:
            if ch == '"':
                out.append('\\"')
            elif ch == "\\":
                out.append("\\\\")
            elif ord(ch) < 0x20:
                out.append("\\u%04x" % ord(ch))
            else:
                out.append(ch)
        out.append('"')
        return "".join(out)
    if isinstance(obj, dict):
        inner = ", ".join(f"{_emit(str(k))}: {_emit(v)}" for k, v in obj.items())
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_emit(v) for v in obj) + "]"
    raise BergspecError(f"cannot serialize object of type {type(obj).__name__}")


def json_text(obj) -> str:
    """Serialize to a deterministic JSON document (trailing newline)."""
    return _emit(obj) + "\n"


def _complex_pairs(values: np.ndarray) -> list:
    flat = np.asarray(values, dtype=complex).reshape(-1)
    return [_Raw(f"[{fmt_float(v.real)}, {fmt_float(v.imag)}]") for v in flat]


def matrix_to_json(m: Union[ToeplitzMatrix1D, ToeplitzMatrix2D]) -> str:
    """Matrix artifact: {"n", "kind", "entries": [[re, im], ...]} row-major."""
    kind = "2d" if isinstance(m, ToeplitzMatrix2D) else "1d"
    n = m.n_per_factor if isinstance(m, ToeplitzMatrix2D) else m.n
    return json_text({"n": n, "kind": kind, "entries": _complex_pairs(m.entries)})


def _fmt_complex_scalar(v: complex) -> str:
    return f"{fmt_float(v.real)}{'+' if v.imag >= 0 else '-'}{fmt_float(abs(v.imag))}i"


def matrix_to_csv(m: Union[ToeplitzMatrix1D, ToeplitzMatrix2D]) -> str:
    """One matrix row per line, entries as re+imi."""
    rows = []
    for row in np.asarray(m.entries, dtype=complex):
        rows.append(",".join(_fmt_complex_scalar(v) for v in row))
    return "\n".join(rows) + "\n"


def spectrum_to_json(s: SpectrumApprox) -> str:
    return json_text({
        "points": _complex_pairs(s.points),
        "residuals": [float(r) for r in s.residuals],
        "meta": s.meta,
    })


def pseudo_to_json(p: PseudospectrumGrid) -> str:
    g = p.grid
    return json_text({
        "re_min": g.re_min, "re_max": g.re_max,
        "im_min": g.im_min, "im_max": g.im_max,
        "n_re": g.n_re, "n_im": g.n_im,
        "epsilon": p.epsilon,
        "values": [float(v) for v in p.values.reshape(-1)],
    })


def pseudo_to_csv(p: PseudospectrumGrid) -> str:
    """Header row re_min,re_max,im_min,im_max,n_re,n_im,epsilon, then one
    grid row of sigma_min values per line (row-major over im rows)."""
    g = p.grid
    head = ",".join([
        fmt_float(g.re_min), fmt_float(g.re_max),
        fmt_float(g.im_min), fmt_float(g.im_max),
        str(g.n_re), str(g.n_im), fmt_float(p.epsilon),
    ])
    lines = [head]
    for row in p.values:
        lines.append(",".join(fmt_float(v) for v in row))
    return "\n".join(lines) + "\n"


def _region_obj(r: RegionApprox) -> dict:
    return {"h": r.h, "points": _complex_pairs(r.points)}


def region_to_json(r: RegionApprox) -> str:
    """Region artifact: {"h", "points": [[re, im], ...]}."""
    return json_text(_region_obj(r))


def essential_result_to_json(res: EssentialSpectrumResult) -> str:
    def fam(entries):
        return [{"theta": theta, "region": _region_obj(reg)} for theta, reg in entries]

    return json_text({
        "params": res.params,
        "union": _region_obj(res.union_region),
        "slices_theta1": fam(res.slices_theta1),
        "slices_theta2": fam(res.slices_theta2),
    })


def verify_report_to_json(report: dict) -> str:
    return json_text(report)
