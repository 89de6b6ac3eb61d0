"""Scenario configuration (JSON, strict)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

__all__ = [
    "SCENARIO_IDS",
    "ConfigError",
    "GridConfig",
    "Tolerances",
    "DynamicsConfig",
    "ProfileConfig",
    "CutoffConfig",
    "MonodromyConfig",
    "OutputConfig",
    "ScenarioConfig",
    "load_config",
    "config_schema",
]

SCENARIO_IDS = ("trivial_torus", "folded_spheres", "cotangent_t3", "folded_t3", "custom")

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Strict):
    per_coord: int = Field(16, ge=2, description="uniform grid points per coordinate")
    theta_count: int = Field(64, ge=4, description="base-circle points in bundle certification grids")
    max_fiber: int = Field(1500, ge=16, description="cap on fiber grid points")
    halton: int = Field(2000, ge=0, description="Halton points added to audit grids")
    seed: int = Field(1, ge=0)
    middle_points: int = Field(10_000, ge=10)
    fold_t: int = Field(201, ge=11)
    fold_y: int = Field(50, ge=1)
    frame_samples: int = Field(10_000, ge=10)
    profile_resolution: int = Field(100_000, ge=101)


class Tolerances(_Strict):
    contact_margin: float = Field(1e-8, gt=0)
    identity: float = Field(1e-9, gt=0)
    seam: float = Field(1e-9, gt=0)
    fold: float = Field(1e-9, gt=0)
    reeb: float = Field(1e-10, gt=0)
    collar: float = Field(1e-9, gt=0)
    collar_flow: float = Field(1e-6, gt=0)
    exactness: float = Field(1e-6, gt=0)
    roundtrip: float = Field(1e-10, gt=0)
    frame: float = Field(1e-10, gt=0)
    flow: float = Field(1e-10, gt=0, description="flow integration tolerance for monodromies")


class DynamicsConfig(_Strict):
    T_max: float = Field(500.0, gt=0)
    closure_tol: float = Field(1e-6, gt=0)
    tol: float = Field(1e-10, gt=0)
    orbits: int = Field(200, ge=1)
    max_component: int = Field(3, ge=1, description="bound on integer directions when snapping")
    seed: int = Field(2, ge=0)


class ProfileConfig(_Strict):
    kind: Literal["default", "custom"] = "default"
    blend: tuple[float, float] = (-1.0, -0.5)
    f: Optional[str] = None
    g: Optional[str] = None

    @model_validator(mode="after")
    def _custom_needs_fg(self):
        if self.kind == "custom":
            if not self.f or not self.g:
                raise ValueError("custom profile needs both f and g")
            from .exterior.parse import ParseError, parse_expr
            for name in ("f", "g"):
                try:
                    parse_expr(getattr(self, name), ["t"])
                except ParseError as e:
                    raise ValueError(f"profile.{name}: {e}") from None
        return self


class CutoffConfig(_Strict):
    inner: float = Field(0.5, gt=0, lt=1)
    outer: float = Field(0.8, gt=0, lt=1)

    @model_validator(mode="after")
    def _order(self):
        if not self.inner < self.outer:
            raise ValueError("cutoff needs inner < outer")
        return self


class MonodromyConfig(_Strict):
    kind: Literal["identity", "hamiltonian"] = "identity"
    amp: float = Field(0.05, gt=0)
    overlap: float = Field(3.0, gt=0, lt=3.141592653589793)


class OutputConfig(_Strict):
    out: Optional[str] = None
    csv: Optional[str] = None


class ScenarioConfig(_Strict):
    scenario: Literal["trivial_torus", "folded_spheres", "cotangent_t3", "folded_t3", "custom"]
    n: Optional[int] = Field(None, ge=1, description="half-dimension of the boundary / fiber")
    K: float = Field(1.0, gt=0)
    eps: float = Field(0.2, gt=0, lt=1)
    boundary: Literal["sphere", "t3s2"] = "sphere"
    profile: ProfileConfig = ProfileConfig()
    cutoff: CutoffConfig = CutoffConfig()
    grid: GridConfig = GridConfig()
    tolerances: Tolerances = Tolerances()
    dynamics: DynamicsConfig = DynamicsConfig()
    monodromy: MonodromyConfig = MonodromyConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _resolve(self):
        t3 = self.scenario in ("cotangent_t3", "folded_t3") or (self.scenario == "custom" and self.boundary == "t3s2")
        if t3 and self.n not in (None, 3):
            raise ValueError(f"{self.scenario} uses the D*T^3 fiber, so n must be 3 (got {self.n})")
        if self.scenario == "custom" and self.profile.kind != "custom":
            raise ValueError("the custom scenario needs profile.kind = 'custom' with f and g")
        if self.n is None:
            object.__setattr__(self, "n", 3 if t3 else 1)
        return self

    def echo(self) -> dict:
        """JSON-ready config, without output paths (they do not affect results)."""
        d = self.model_dump(mode="json")
        d.pop("output", None)
        return d


class ConfigError(ValueError):
    """Malformed or invalid configuration; ``errors`` lists field paths."""

    def __init__(self, msg, errors=()):
        super().__init__(msg)
        self.errors = list(errors)


def _format(e: ValidationError) -> list[str]:
    out = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        out.append(f"{loc}: {err['msg']}")
    return out


def load_config(source=None, **overrides) -> ScenarioConfig:
    """Build a config from a JSON file path, a dict or nothing, then apply overrides."""
    if source is None:
        data = {}
    elif isinstance(source, dict):
        data = dict(source)
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
    for k, v in overrides.items():
        if v is None:
            continue
        if "." in k:
            head, tail = k.split(".", 1)
            sub = dict(data.get(head, {}))
            sub[tail] = v
            data[head] = sub
        else:
            data[k] = v
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        errs = _format(e)
        raise ConfigError("invalid config:\n  " + "\n  ".join(errs), errs) from None


def config_schema() -> dict:
    return ScenarioConfig.model_json_schema()
