"""Scenario files: TOML tables validated into typed blocks.

Every block forbids unknown keys.  Registry references (chart names, EOS
variants, field expressions, density variants) are resolved during
validation so that a bad file fails before any computation starts.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..fluid.eos import eos_from_config
from ..fluid.expressions import field_from_config
from ..integrals.densities import density_from_config
from ..manifold.builtin import make_chart


def _checked(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(str(exc)) from exc


TASKS = ("simulate", "verify-densities", "verify-circulation", "verify-determining", "verify-hamiltonian", "geometry-report")


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ChartBlock(_Block):
    name: str
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _exists(self):
        _checked(make_chart, self.name, **self.params)
        return self

    def build(self):
        return make_chart(self.name, **self.params)


class GridBlock(_Block):
    shape: List[int]
    refine: List[int] = Field(default_factory=list)

    @field_validator("shape")
    @classmethod
    def _positive(cls, v):
        if not v or any(k < 4 for k in v):
            raise ValueError("grid needs at least 4 points per axis")
        return v

    @field_validator("refine")
    @classmethod
    def _multipliers(cls, v):
        if any(k < 1 for k in v):
            raise ValueError("refinement multipliers must be >= 1")
        return v

    def levels(self) -> List[Tuple[int, ...]]:
        mults = [1] + [m for m in self.refine if m != 1]
        return [tuple(int(m * s) for s in self.shape) for m in mults]


class EosTerm(_Block):
    coeff: Any
    gamma: float


class _EosBase(_Block):
    def config(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)

    @model_validator(mode="after")
    def _buildable(self):
        _checked(eos_from_config, self.config())
        return self


class PolytropicEos(_EosBase):
    variant: Literal["Polytropic"]
    sigma: Any = 1.0
    gamma: Optional[float] = None
    sigma0: Any = 0.0
    n: Optional[int] = None


class IsobaricEntropyEos(_EosBase):
    variant: Literal["IsobaricEntropy"]
    kappa: Any


class BarotropicEos(_EosBase):
    variant: Literal["Barotropic"]
    terms: List[EosTerm] = Field(min_length=1)


class GeneralEos(_EosBase):
    variant: Literal["General"]
    terms: List[EosTerm] = Field(min_length=1)


EosBlock = Annotated[Union[PolytropicEos, IsobaricEntropyEos, BarotropicEos, GeneralEos], Field(discriminator="variant")]


class InitialBlock(_Block):
    u: List[Any]
    rho: Any
    S: Any = 0.0
    t: float = 0.0

    @model_validator(mode="after")
    def _fields(self):
        for part in list(self.u) + [self.rho, self.S]:
            _checked(field_from_config, part)
        return self


class SolverBlock(_Block):
    dt: float = Field(gt=0)
    t_end: float = Field(ge=0)
    snapshot_every: int = Field(default=1, ge=1)
    order: Literal[2, 4] = 2
    cfl_target: float = Field(default=0.5, gt=0, le=1)
    refine_dt: bool = False


class DomainBlock(_Block):
    lower: List[float]
    upper: List[float]
    spacing_cells: float = Field(default=1.0, gt=0)
    boundary_spacing_cells: Optional[float] = Field(default=None, gt=0)


class CurveBlock(_Block):
    name: str
    kind: Literal["circle", "segment", "polyline"]
    center: Optional[List[float]] = None
    radius: Optional[float] = None
    start: Optional[List[float]] = None
    end: Optional[List[float]] = None
    points: Optional[List[List[float]]] = None
    closed: bool = False
    spacing_cells: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _geometry(self):
        need = {"circle": ("center", "radius"), "segment": ("start", "end"), "polyline": ("points",)}[self.kind]
        missing = [k for k in need if getattr(self, k) is None]
        if missing:
            raise ValueError(f"{self.kind} curve needs {', '.join(missing)}")
        if self.kind == "circle":
            self.closed = True
        if self.kind == "segment" and self.closed:
            raise ValueError("a segment cannot be closed")
        return self


class MarkerBlock(_Block):
    domain: Optional[DomainBlock] = None
    curves: List[CurveBlock] = Field(default_factory=list)


class ChecksBlock(_Block):
    drift_tol: float = 1e-4
    balance_tol: float = 5e-3
    circulation_tol: float = 5e-3
    min_ratio: float = 3.5
    min_order: float = 1.9
    local_tol: Optional[float] = None
    jet_pass_tol: float = 1e-9
    jet_fail_tol: float = 1e-3
    antisymmetry_tol: float = 1e-10
    identity_tol: float = 1e-10
    inverse_tol: float = 1e-12
    killing_tol: float = 1e-8
    curvature_tol: float = 1e-6


class JetBlock(_Block):
    count: int = Field(default=1000, ge=1)
    geometry_points: int = Field(default=100, ge=1)


class Scenario(_Block):
    name: str
    tasks: List[str] = Field(default_factory=list)
    chart: ChartBlock
    grid: Optional[GridBlock] = None
    eos: Optional[EosBlock] = None
    initial: Optional[InitialBlock] = None
    solver: Optional[SolverBlock] = None
    markers: MarkerBlock = Field(default_factory=MarkerBlock)
    densities: Dict[str, Dict[str, Any]] = Field(default_factory=dict)
    checks: ChecksBlock = Field(default_factory=ChecksBlock)
    jetcheck: JetBlock = Field(default_factory=JetBlock)
    expect: Literal["pass", "fail"] = "pass"
    allow_incompatible: bool = False
    seed: int = Field(default=0, ge=0)

    @field_validator("tasks")
    @classmethod
    def _tasks(cls, v):
        bad = [t for t in v if t not in TASKS]
        if bad:
            raise ValueError(f"unknown task(s) {bad}; choose from {list(TASKS)}")
        return v

    @model_validator(mode="after")
    def _cross(self):
        n = self.chart.build().dim
        if self.eos is not None:
            _checked(eos_from_config, self.eos.config(), n)
        if self.grid is not None and len(self.grid.shape) != n:
            raise ValueError(f"grid.shape needs {n} entries for chart '{self.chart.name}'")
        if self.initial is not None and len(self.initial.u) != n:
            raise ValueError(f"initial.u needs {n} components")
        names = [c.name for c in self.markers.curves]
        if len(set(names)) != len(names) or set(names) & (set(self.densities) | {"domain", "boundary"}):
            raise ValueError("curve names must be unique, distinct from density labels, and not 'domain'/'boundary'")
        for label, cfg in self.densities.items():
            try:
                density_from_config(cfg, n)
            except (ValueError, TypeError, KeyError) as exc:
                raise ValueError(f"densities.{label}: {exc}") from exc
        return self

    def chart_metric(self):
        return self.chart.build()

    def build_eos(self):
        if self.eos is None:
            raise ValueError("scenario has no [eos] block")
        return eos_from_config(self.eos.config(), self.chart_metric().dim)

    def build_densities(self):
        n = self.chart_metric().dim
        return {label: density_from_config(cfg, n) for label, cfg in self.densities.items()}


class ScenarioError(Exception):
    """Schema violation; ``fields`` lists ``(dotted.path, message)`` pairs."""

    def __init__(self, source: str, fields: List[Tuple[str, str]]):
        self.source = source
        self.fields = fields
        lines = [f"{source}: invalid scenario"] + [f"  {p}: {m}" for p, m in fields]
        super().__init__("\n".join(lines))


def _loc(loc) -> str:
    return ".".join(str(p) for p in loc) or "<root>"


def parse_scenario(data: Dict[str, Any], source: str = "<scenario>") -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        raise ScenarioError(source, [(_loc(e["loc"]), e["msg"]) for e in exc.errors()]) from None


def load_scenario(path) -> Scenario:
    """Read a TOML file into a validated ``Scenario``."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(str(path), [("<toml>", str(exc))]) from None
    return parse_scenario(data, str(path))
