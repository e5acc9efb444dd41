"""Check records and canonical report serialization.

JSON output is canonical: keys sorted, two-space indentation, floats printed
with 17 significant digits (``%.17g``), non-finite floats as the strings
``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .specio import encode_matrix

TOOL_NAME = "qms"


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    tolerance: float
    basis: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "basis": self.basis,
        }


@dataclass
class Report:
    command: str
    input_sha256: str = ""
    checks: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def add(self, name: str, residual: float, tolerance: float, basis: str = "", passed: bool | None = None) -> Check:
        if passed is None:
            passed = bool(residual <= tolerance)
        check = Check(name, bool(passed), float(residual), float(tolerance), basis)
        self.checks.append(check)
        return check

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "tool": TOOL_NAME,
            "version": __version__,
            "command": self.command,
            "input_sha256": self.input_sha256,
            "checks": [c.to_json() for c in self.checks],
            "details": self.details,
            "verdict": self.verdict,
        }


def digest(*blobs: bytes) -> str:
    h = hashlib.sha256()
    for b in blobs:
        h.update(b)
    return h.hexdigest()


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = f"{x:.17g}"
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _plain(value):
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return encode_matrix(value) if value.ndim == 2 else [[float(z.real), float(z.imag)] for z in value]
        return value.tolist()
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def _emit(value, indent: int, out: list):
    value = _plain(value)
    pad = "  " * indent
    if value is None:
        out.append("null")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(_format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(value.items())
        for i, (k, v) in enumerate(items):
            out.append(f"{pad}  {json.dumps(str(k))}: ")
            _emit(v, indent + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        scalar = all(not isinstance(_plain(v), (dict, list, tuple)) for v in value)
        if scalar:
            parts = []
            for v in value:
                buf = []
                _emit(v, 0, buf)
                parts.append("".join(buf))
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(value):
            out.append(pad + "  ")
            _emit(v, indent + 1, out)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_json(value) -> str:
    out = []
    _emit(value, 0, out)
    return "".join(out) + "\n"


def to_markdown(report: Report) -> str:
    lines = [
        f"# {TOOL_NAME} {report.command}",
        "",
        f"- version: {__version__}",
        f"- input sha256: `{report.input_sha256}`",
        f"- verdict: **{'PASS' if report.verdict else 'FAIL'}**",
        "",
        "| check | result | residual | tolerance | basis |",
        "|---|---|---|---|---|",
    ]
    for c in report.checks:
        basis = c.basis.replace("|", "\\|")
        lines.append(
            f"| {c.name} | {'pass' if c.passed else 'FAIL'} | {c.residual:.3e} | {c.tolerance:.3e} | {basis} |"
        )
    return "\n".join(lines) + "\n"


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return canonical_json(report.to_json())
    if fmt == "md":
        return to_markdown(report)
    raise ValueError(f"unknown format {fmt!r}")
