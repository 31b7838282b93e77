"""Run configuration: a single JSON document, unknown keys rejected."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .dispersion import DispersionKind, DispersionModel
from .errors import DomainError, MultibarrierError
from .exact_solver import BarrierSystem


class ConfigError(MultibarrierError, ValueError):
    pass


@dataclass(frozen=True)
class ScanSpec:
    omega_min: float
    omega_max: float
    steps: int


@dataclass(frozen=True)
class Tolerances:
    unitarity: float = 1e-10
    continuity: float = 1e-9
    opaque_rel: float = 1e-3


@dataclass(frozen=True)
class OutputSpec:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    system: BarrierSystem
    model: DispersionModel
    scan: ScanSpec
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputSpec = field(default_factory=OutputSpec)

    def to_dict(self) -> dict:
        return {
            "system": asdict(self.system),
            "model": {"kind": self.model.kind.value},
            "scan": asdict(self.scan),
            "tolerances": asdict(self.tolerances),
            "output": asdict(self.output),
        }


_SECTIONS = {
    "system": {"n_barriers", "width", "period", "height"},
    "model": {"kind", "barrier_height"},
    "scan": {"omega_min", "omega_max", "steps"},
    "tolerances": {"unitarity", "continuity", "opaque_rel"},
    "output": {"path", "format"},
}
_REQUIRED = {"system": {"n_barriers", "width", "period", "height"}, "scan": {"omega_min", "omega_max", "steps"}}


def _section(doc, name):
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"'{name}' must be an object")
    unknown = set(value) - _SECTIONS[name]
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {', '.join(sorted(unknown))}")
    missing = _REQUIRED.get(name, set()) - set(value)
    if missing:
        raise ConfigError(f"missing key(s) in '{name}': {', '.join(sorted(missing))}")
    return value


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    sys_doc = _section(doc, "system")
    model_doc = _section(doc, "model")
    scan_doc = _section(doc, "scan")
    tol_doc = _section(doc, "tolerances")
    out_doc = _section(doc, "output")
    try:
        system = BarrierSystem(**sys_doc)
        height = model_doc.get("barrier_height", system.height)
        if height != system.height:
            raise ConfigError(
                f"model.barrier_height={height} does not match system.height={system.height}"
            )
        model = DispersionModel(
            barrier_height=system.height,
            kind=DispersionKind(model_doc.get("kind", DispersionKind.NONRELATIVISTIC_PARTICLE)),
        )
    except (DomainError, TypeError) as exc:
        raise ConfigError(f"invalid system: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid model: {exc}") from exc

    steps = scan_doc["steps"]
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        raise ConfigError(f"scan.steps must be an integer >= 2, got {steps!r}")
    lo, hi = float(scan_doc["omega_min"]), float(scan_doc["omega_max"])
    if not (0.0 < lo < hi < system.height):
        raise ConfigError(
            f"scan needs 0 < omega_min < omega_max < V0, got ({lo}, {hi}) with V0={system.height}"
        )
    scan = ScanSpec(omega_min=lo, omega_max=hi, steps=steps)

    tolerances = Tolerances(**{k: float(v) for k, v in tol_doc.items()})
    for name, value in asdict(tolerances).items():
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"tolerances.{name} must be a positive number, got {value!r}")

    fmt = out_doc.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format must be 'csv' or 'json', got {fmt!r}")
    output = OutputSpec(path=out_doc.get("path"), format=fmt)
    return RunConfig(system=system, model=model, scan=scan, tolerances=tolerances, output=output)


def load_config(path=None) -> RunConfig:
    """Parse ``path``, or the packaged default configuration when ``path`` is None."""
    try:
        if path is None:
            text = resources.files("multibarrier").joinpath("data/default_config.json").read_text()
        else:
            text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)
