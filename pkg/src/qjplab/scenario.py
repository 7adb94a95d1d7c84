"""Scenario documents: JSON text -> validated pydantic model, plus materialisation of operators and states."""

from __future__ import annotations

import json
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter
from pydantic import ValidationError as PydanticValidationError

from .errors import ParseError, ValidationError
from .operators import MAX_DIM, PAULI, PureState, random_hermitian, random_state

NAMED_STATES = {
    "0": [1, 0],
    "1": [0, 1],
    "+": [1, 1],
    "-": [1, -1],
    "+i": [1, 1j],
    "-i": [1, -1j],
}

Number = Union[float, tuple[float, float]]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RandomOperator(_Strict):
    random: Literal["hermitian"]
    dim: int = Field(ge=1, le=MAX_DIM)
    scale: float = Field(default=1.0, gt=0)


class RandomState(_Strict):
    random: Literal["state"]
    dim: int = Field(ge=1, le=MAX_DIM)


OperatorSpec = Union[str, list[list[Number]], RandomOperator]
StateSpec = Union[str, list[Number], RandomState]
ComplexSpec = Union[float, tuple[float, float], str]


class SystemSpec(_Strict):
    A: OperatorSpec
    B: Optional[OperatorSpec] = None
    phi: StateSpec
    phi_f: Optional[StateSpec] = None


class MeterSpec(_Strict):
    n_points: int = 1024
    dx: float = Field(default=40.0 / 1024, gt=0)
    h: float = Field(default=1.0, gt=0)
    center: float = 0.0


class RangeSpec(_Strict):
    start: float
    stop: float
    num: int = Field(ge=1, le=10001)

    def values(self) -> list:
        return [float(v) for v in np.linspace(self.start, self.stop, self.num)]


class GSweep(_Strict):
    g: Union[list[float], RangeSpec]

    def g_values(self) -> list:
        return self.g.values() if isinstance(self.g, RangeSpec) else [float(v) for v in self.g]


class AlphaSweep(_Strict):
    alpha: list[ComplexSpec] = Field(min_length=1)

    def alpha_values(self) -> list:
        return [parse_complex(a) for a in self.alpha]


class ConditioningSpec(_Strict):
    b: float = 1.0
    X: Literal["Q", "P"] = "Q"


class OutputSpec(_Strict):
    dir: Optional[str] = None
    plot: bool = False


class _Base(_Strict):
    name: str = "scenario"
    seed: Optional[int] = None
    output: OutputSpec = OutputSpec()


class UMScenario(_Base):
    kind: Literal["um"]
    system: SystemSpec
    meter: MeterSpec = MeterSpec()
    sweep: GSweep
    weak_moments: Optional[int] = Field(default=None, ge=0, le=6)


class CMScenario(_Base):
    kind: Literal["cm"]
    system: SystemSpec
    meter: MeterSpec = MeterSpec()
    sweep: GSweep
    conditioning: ConditioningSpec = ConditioningSpec()


class GaussianScenario(_Base):
    kind: Literal["gaussian"]
    system: SystemSpec
    meter: MeterSpec = MeterSpec()
    sweep: GSweep


class QJPScenario(_Base):
    kind: Literal["qjp"]
    system: SystemSpec
    sweep: AlphaSweep
    families: list[Literal["additive", "convolutive", "kd"]] = ["additive", "convolutive", "kd"]
    n_frequencies: int = Field(default=25, ge=1, le=1000)


class GeometryScenario(_Base):
    kind: Literal["geometry"]
    system: SystemSpec
    sweep: AlphaSweep
    n_tests: int = Field(default=20, ge=1, le=1000)


class AcceptanceScenario(_Base):
    kind: Literal["acceptance"]


Scenario = Annotated[
    Union[UMScenario, CMScenario, GaussianScenario, QJPScenario, GeometryScenario, AcceptanceScenario],
    Field(discriminator="kind"),
]
_ADAPTER = TypeAdapter(Scenario)


def parse_complex(value) -> complex:
    if isinstance(value, str):
        text = value.strip().replace(" ", "").replace("i", "j")
        if text in ("j", "+j", "-j"):
            text = text.replace("j", "1j")
        try:
            return complex(text)
        except ValueError:
            raise ValueError(f"cannot read {value!r} as a complex number") from None
    if isinstance(value, (tuple, list)):
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _entry(value) -> complex:
    return parse_complex(value)


def operator_dim(spec) -> int:
    if isinstance(spec, RandomOperator):
        return spec.dim
    if isinstance(spec, str):
        return 2
    return len(spec)


def state_dim(spec) -> int:
    if isinstance(spec, RandomState):
        return spec.dim
    if isinstance(spec, str):
        return 2
    return len(spec)


def build_operator(spec, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec, RandomOperator):
        return random_hermitian(rng, spec.dim, spec.scale)
    if isinstance(spec, str):
        return PAULI[spec.upper()].copy()
    return np.array([[_entry(v) for v in row] for row in spec], dtype=complex)


def build_state(spec, rng: np.random.Generator) -> PureState:
    if isinstance(spec, RandomState):
        return random_state(rng, spec.dim)
    if isinstance(spec, str):
        return PureState(NAMED_STATES[spec])
    return PureState([_entry(v) for v in spec])


def _spectral_radius_bound(spec) -> float | None:
    if isinstance(spec, RandomOperator):
        return spec.scale
    if isinstance(spec, str):
        return 1.0
    try:
        mat = np.array([[_entry(v) for v in row] for row in spec], dtype=complex)
        return float(np.linalg.norm(mat, 2))
    except (ValueError, np.linalg.LinAlgError):
        return None


def _check_operator(spec, path, issues):
    if isinstance(spec, str):
        if spec.upper() not in PAULI:
            issues.append((path, f"unknown Pauli name {spec!r}; expected one of {sorted(PAULI)}"))
        return
    if isinstance(spec, RandomOperator):
        return
    n = len(spec)
    if n == 0 or any(len(row) != n for row in spec):
        issues.append((path, "operator entries must form a non-empty square matrix"))
        return
    if n > MAX_DIM:
        issues.append((path, f"dimension {n} exceeds {MAX_DIM}"))
        return
    try:
        mat = np.array([[_entry(v) for v in row] for row in spec], dtype=complex)
    except ValueError as exc:
        issues.append((path, str(exc)))
        return
    if not np.all(np.isfinite(mat)):
        issues.append((path, "operator entries must be finite"))
    elif np.max(np.abs(mat - mat.conj().T)) > 1e-12 * max(np.max(np.abs(mat)), 1e-300):
        issues.append((path, "operator is not Hermitian"))


def _check_state(spec, path, issues):
    if isinstance(spec, str):
        if spec not in NAMED_STATES:
            issues.append((path, f"unknown named state {spec!r}; expected one of {sorted(NAMED_STATES)}"))
        return
    if isinstance(spec, RandomState):
        return
    try:
        amps = np.array([_entry(v) for v in spec], dtype=complex)
    except ValueError as exc:
        issues.append((path, str(exc)))
        return
    if len(amps) == 0 or not np.all(np.isfinite(amps)) or np.linalg.norm(amps) == 0:
        issues.append((path, "state must be a finite, non-zero amplitude list"))


def _check_meter(meter: MeterSpec, issues):
    n = meter.n_points
    if n < 16 or n & (n - 1):
        issues.append(("meter.n_points", "must be a power of two and at least 16"))
        return
    length = n * meter.dx
    if meter.h < 4 * meter.dx:
        issues.append(("meter.h", f"width {meter.h} is under-resolved; need h >= 4 dx = {4 * meter.dx:g}"))
    if meter.h > length / 8:
        issues.append(("meter.h", f"width {meter.h} is too wide for box length {length:g}; need h <= L/8"))


def _semantic_checks(sc) -> list:
    issues = []
    if isinstance(sc, AcceptanceScenario):
        return issues
    system = sc.system
    _check_operator(system.A, "system.A", issues)
    if system.B is not None:
        _check_operator(system.B, "system.B", issues)
    _check_state(system.phi, "system.phi", issues)
    if system.phi_f is not None:
        _check_state(system.phi_f, "system.phi_f", issues)

    dim = operator_dim(system.A)
    for path, spec, getter in (
        ("system.B", system.B, operator_dim),
        ("system.phi", system.phi, state_dim),
        ("system.phi_f", system.phi_f, state_dim),
    ):
        if spec is not None and getter(spec) != dim:
            issues.append((path, f"dimension {getter(spec)} does not match system.A dimension {dim}"))

    if isinstance(sc, CMScenario) and system.B is None and system.phi_f is None:
        issues.append(("system.B", "cm scenarios need B or phi_f for the conditioning"))
    if isinstance(sc, GaussianScenario) and system.phi_f is None:
        issues.append(("system.phi_f", "gaussian scenarios need a post-selected state phi_f"))
    if isinstance(sc, (QJPScenario, GeometryScenario)) and system.B is None:
        issues.append(("system.B", f"{sc.kind} scenarios need B"))

    if isinstance(sc, (QJPScenario, GeometryScenario)):
        for k, a in enumerate(sc.sweep.alpha):
            try:
                val = parse_complex(a)
            except ValueError as exc:
                issues.append((f"sweep.alpha.{k}", str(exc)))
                continue
            if not np.isfinite(val):
                issues.append((f"sweep.alpha.{k}", "alpha must be finite"))
            elif isinstance(sc, GeometryScenario) and (val.imag != 0 or not -1 <= val.real <= 1):
                issues.append((f"sweep.alpha.{k}", "geometry needs real alpha in [-1, 1]"))

    if isinstance(sc, (UMScenario, CMScenario, GaussianScenario)):
        _check_meter(sc.meter, issues)
        gs = sc.sweep.g_values()
        if not gs or not all(np.isfinite(gs)):
            issues.append(("sweep.g", "g values must be finite"))
        else:
            radius = _spectral_radius_bound(system.A)
            half = sc.meter.n_points * sc.meter.dx / 2
            if radius is not None:
                reach = abs(sc.meter.center) + max(abs(g) for g in gs) * radius + 4 * sc.meter.h
                if reach > half:
                    issues.append(("sweep.g", f"shifted meter reaches {reach:g} beyond the half box {half:g} (aliasing)"))
    return issues


def _format_loc(loc) -> str:
    parts = [str(p) for p in loc]
    if parts and parts[0] in ("um", "cm", "gaussian", "qjp", "geometry", "acceptance"):
        parts = parts[1:]
    # drop union-branch tags pydantic inserts (e.g. 'list[...]', 'RandomOperator')
    parts = [p for p in parts if not (p.startswith(("list[", "tuple[", "str", "float", "int")) or p[:1].isupper() and p not in ("A", "B", "X", "Y"))]
    return ".".join(parts) or "<root>"


def parse_scenario(text: str):
    """JSON text -> validated scenario model.

    Raises ParseError for malformed JSON and ValidationError (with field paths) otherwise.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(raw, dict):
        raise ValidationError([("<root>", "scenario must be a JSON object")])
    try:
        sc = _ADAPTER.validate_python(raw)
    except PydanticValidationError as exc:
        seen = []
        for err in exc.errors():
            path = "kind" if err["type"].startswith("union_tag") else _format_loc(err["loc"])
            item = (path, err["msg"])
            if item not in seen:
                seen.append(item)
        raise ValidationError(seen) from None
    issues = _semantic_checks(sc)
    if issues:
        raise ValidationError(issues)
    return sc


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
