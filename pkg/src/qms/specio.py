"""Reading and writing generator spec files (JSON).

The format is described by ``spec.schema.json`` shipped with the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import examples as ex
from .errors import DimensionError, ParseError, SchemaError
from .superop import LindbladTerms, SuperOperator, from_lindblad_terms

FORMS = ("superop_matrix", "lindblad_terms", "example")
EXAMPLE_NAMES = ("dephasing", "heat_flow", "conjugation", "shift_reset")


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("qms").joinpath("spec.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def decode_matrix(data, field_name: str) -> np.ndarray:
    rows = [len(r) for r in data]
    if len(set(rows)) != 1:
        raise SchemaError(f"{field_name}: ragged matrix rows", field_name)
    arr = np.asarray(data, dtype=float)
    # assign parts directly: re + 1j*im would turn -0.0 into 0.0
    out = np.empty(arr.shape[:-1], dtype=complex)
    out.real, out.imag = arr[..., 0], arr[..., 1]
    return out


def encode_complex(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(z) for z in row] for row in m]


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    dim: int
    form: str
    payload: dict
    metadata: dict = field(default_factory=dict)

    @property
    def example_name(self) -> str | None:
        return self.payload.get("name") if self.form == "example" else None

    @property
    def is_generator(self) -> bool:
        """False for discrete-time map families (shift-with-reset)."""
        return self.example_name != "shift_reset"

    def terms(self) -> LindbladTerms | None:
        if self.form == "lindblad_terms":
            return LindbladTerms(self.payload["G"], tuple(self.payload["kraus"]))
        if self.example_name == "dephasing":
            return ex.dephasing_terms(self.payload["V"])
        if self.example_name == "heat_flow":
            return ex.heat_flow_terms(self.dim)
        if self.example_name == "conjugation":
            return LindbladTerms(self.payload["G"], ())
        return None

    def generator(self) -> SuperOperator:
        if self.form == "superop_matrix":
            return SuperOperator(self.payload["matrix"])
        if self.form == "lindblad_terms":
            return from_lindblad_terms(self.terms())
        name = self.example_name
        if name == "dephasing":
            return ex.dephasing_generator(self.payload["V"])
        if name == "heat_flow":
            return ex.heat_flow_generator(self.dim)
        if name == "conjugation":
            return ex.conjugation_generator(self.payload["G"])
        raise ValueError("shift_reset describes a discrete-time map family, not a generator")

    def shift_reset_model(self) -> ex.ShiftResetModel:
        if self.example_name != "shift_reset":
            raise ValueError("not a shift_reset spec")
        return ex.ShiftResetModel(self.dim, self.payload.get("delta", 0.25))

    def to_json(self) -> dict:
        out = {"dim": self.dim, "form": self.form}
        if self.metadata:
            out["metadata"] = dict(self.metadata)
        for key, value in self.payload.items():
            if key == "kraus":
                out[key] = [encode_matrix(v) for v in value]
            elif key == "V" and isinstance(self.payload.get("V_name"), str):
                out[key] = self.payload["V_name"]
            elif key == "V_name":
                continue
            elif isinstance(value, np.ndarray):
                out[key] = encode_matrix(value)
            else:
                out[key] = value
        return out


def _schema_error(err: jsonschema.ValidationError) -> SchemaError:
    path = "/".join(str(p) for p in err.absolute_path) or "<root>"
    # report the most specific failing branch
    best = jsonschema.exceptions.best_match([err]) or err
    return SchemaError(f"{path}: {best.message}", path)


def _check_square(m: np.ndarray, n: int, name: str):
    if m.shape != (n, n):
        raise SchemaError(f"{name}: expected {n}x{n}, got {m.shape[0]}x{m.shape[1]}", name)


def parse_spec(data) -> GeneratorSpec:
    """Validate decoded JSON against the schema and build a spec."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        raise _schema_error(errors[0])
    d = data["dim"]
    form = data["form"]
    metadata = dict(data.get("metadata", {}))
    payload = {}
    if form == "superop_matrix":
        m = decode_matrix(data["matrix"], "matrix")
        _check_square(m, d * d, "matrix")
        payload["matrix"] = m
    elif form == "lindblad_terms":
        g = decode_matrix(data["G"], "G")
        _check_square(g, d, "G")
        kraus = []
        for i, v in enumerate(data["kraus"]):
            v = decode_matrix(v, f"kraus/{i}")
            _check_square(v, d, f"kraus/{i}")
            kraus.append(v)
        payload["G"] = g
        payload["kraus"] = kraus
    else:
        name = data["name"]
        payload["name"] = name
        if "V" in data:
            if isinstance(data["V"], str):
                try:
                    v = ex.named_operator(data["V"], d)
                except DimensionError as exc:
                    raise SchemaError(str(exc), "V") from exc
                payload["V_name"] = data["V"]
            else:
                v = decode_matrix(data["V"], "V")
                _check_square(v, d, "V")
            payload["V"] = v
        if "G" in data:
            g = decode_matrix(data["G"], "G")
            _check_square(g, d, "G")
            payload["G"] = g
        if "delta" in data:
            payload["delta"] = float(data["delta"])
        if name == "heat_flow" and d < 2:
            raise SchemaError("heat_flow needs dim >= 2", "dim")
    return GeneratorSpec(d, form, payload, metadata)


def loads_spec(text: str) -> GeneratorSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    return parse_spec(data)


def load_spec(path) -> GeneratorSpec:
    return loads_spec(Path(path).read_text(encoding="utf-8"))


def load_operator(path, dim: int) -> np.ndarray:
    """An operator file: a bare matrix or ``{"T": matrix}``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if isinstance(data, dict):
        if set(data) != {"T"}:
            raise SchemaError("operator file must be a matrix or an object with the single key 'T'", "T")
        data = data["T"]
    try:
        jsonschema.validate(data, {"$ref": "#/$defs/matrix", "$defs": schema()["$defs"]})
    except jsonschema.ValidationError as exc:
        raise _schema_error(exc) from exc
    m = decode_matrix(data, "T")
    _check_square(m, dim, "T")
    return m


def example_spec(name: str, dim: int | None = None, delta: float | None = None) -> GeneratorSpec:
    """Spec for a built-in example with conventional parameters."""
    if name == "dephasing":
        if dim not in (None, 2):
            raise SchemaError("dephasing example with V=pauli_z has dim 2", "dim")
        return GeneratorSpec(2, "example", {"name": name, "V": ex.PAULI_Z.copy(), "V_name": "pauli_z"})
    if name == "heat_flow":
        d = 8 if dim is None else dim
        if d < 2:
            raise SchemaError("heat_flow needs dim >= 2", "dim")
        return GeneratorSpec(d, "example", {"name": name})
    if name == "conjugation":
        d = 3 if dim is None else dim
        h = conjugation_hamiltonian(d)
        return GeneratorSpec(d, "example", {"name": name, "G": -1j * h})
    if name == "shift_reset":
        d = 64 if dim is None else dim
        payload = {"name": name, "delta": 0.25 if delta is None else float(delta)}
        return GeneratorSpec(d, "example", payload)
    raise SchemaError(f"unknown example {name!r}", "name")


def conjugation_hamiltonian(d: int) -> np.ndarray:
    """A fixed tridiagonal Hermitian matrix with small integer entries."""
    off = np.ones(d - 1)
    return (np.diag(np.arange(d, dtype=float)) + np.diag(off, 1) + np.diag(off, -1)).astype(complex)


def dumps_spec(spec: GeneratorSpec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True, indent=2) + "\n"
