"""Verification workflows behind the CLI subcommands.

Each workflow turns a validated ``Scenario`` into a ``TaskResult``: a list of
scalar checks with tolerances plus any time series worth writing to CSV.
Grid runs for the refinement levels are shared between workflows through a
``Workbench`` so that ``run`` with several tasks steps each level only once.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..errors import ClassificationError
from ..fluid.state import Grid, state_from_fields
from ..hamiltonian import (
    antisymmetry_defect,
    density_generator,
    hamiltonian_flow_residual,
    symmetry_determining_residual,
    symmetry_from_density,
    variational_triple,
)
from ..integrals import densities as dn
from ..integrals.evaluate import ensure_compatible, local_conservation_residual
from ..integrals.series import IntegralSeries, evaluate_series
from ..jetcheck.jets import sample_jets
from ..jetcheck.residuals import (
    determining_system_residuals,
    euler_residuals,
    flux_consistency,
    max_split_residual,
    recombine_determining,
)
from ..manifold.builtin import interior_sample, reference_scalar_curvature
from ..manifold.chart import curvature_identity_defects, geometry
from ..manifold.fields import catalogued_isometries, killing_residual
from ..solver.euler import SolverConfig
from ..solver.markers import CURVE, MarkerSet, circle_curve, rectangle_domain, segment_curve
from ..solver.run import simulate
from .schema import CurveBlock, Scenario


@dataclass
class Check:
    """One asserted quantity: ``value <= tol`` or ``value >= tol``."""

    name: str
    value: float
    tol: float
    relation: str = "<="
    detail: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        v = self.value
        if v is None or not math.isfinite(v):
            return False
        return v <= self.tol if self.relation == "<=" else v >= self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "tol": self.tol,
            "relation": self.relation,
            "passed": self.passed,
            "detail": self.detail,
        }


@dataclass
class TaskResult:
    task: str
    checks: List[Check] = field(default_factory=list)
    series: Dict[str, IntegralSeries] = field(default_factory=dict)
    info: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _require(scn: Scenario, *blocks: str):
    missing = [b for b in blocks if getattr(scn, b) is None]
    if missing:
        raise ValueError(f"scenario '{scn.name}' needs block(s) {missing} for this task")


def _is_drift_density(spec) -> bool:
    # densities without a moving flux are conserved outright on transported domains
    return type(spec).flux_pieces is dn.DensitySpec.flux_pieces


def _order(coarse: float, fine: float, mult: float) -> float:
    if not (coarse > 0 and fine > 0):
        return float("nan")
    return math.log(coarse / fine) / math.log(mult)


def _ratio(coarse: float, fine: float) -> float:
    return coarse / fine if fine > 0 else float("inf")


def _curve_markers(c: CurveBlock, h: float) -> MarkerSet:
    step = c.spacing_cells * h
    if c.kind == "circle":
        count = max(8, int(math.ceil(2.0 * math.pi * c.radius / step)))
        return circle_curve(c.center, c.radius, count)
    if c.kind == "segment":
        length = float(np.linalg.norm(np.subtract(c.end, c.start)))
        return segment_curve(c.start, c.end, max(1, int(math.ceil(length / step))))
    verts = np.asarray(c.points, float)
    ends = np.roll(verts, -1, axis=0) if c.closed else verts[1:]
    starts = verts if c.closed else verts[:-1]
    pts = []
    for a, b in zip(starts, ends):
        m = max(1, int(math.ceil(np.linalg.norm(b - a) / step)))
        pts.append(a + np.linspace(0.0, 1.0, m, endpoint=False)[:, None] * (b - a))
    if not c.closed:
        pts.append(verts[-1:])
    return MarkerSet(CURVE, np.concatenate(pts), closed=c.closed)


class Workbench:
    """Scenario objects built once, plus cached grid runs per refinement level."""

    def __init__(self, scn: Scenario, threads: int = 1, allow_incompatible: bool = False):
        self.scn = scn
        self.threads = max(1, int(threads))
        self.allow = allow_incompatible or scn.allow_incompatible
        self.chart = scn.chart_metric()
        self.eos = scn.build_eos() if scn.eos is not None else None
        self.densities = scn.build_densities()
        self._runs: Dict[Tuple[int, ...], Dict[str, IntegralSeries]] = {}

    # -- classification -------------------------------------------------

    def classify(self, specs: Optional[Dict[str, object]] = None) -> List[str]:
        """Refuse incompatible pairings unless overridden; return override notes."""
        notes = []
        for label, spec in (specs if specs is not None else self.densities).items():
            try:
                ensure_compatible(spec, self.chart, self.eos)
            except ClassificationError as exc:
                if not self.allow:
                    raise ClassificationError(f"density '{label}': {exc}") from None
                notes.append(f"{label}: {exc}")
        return notes

    # -- grids and runs -------------------------------------------------

    def levels(self) -> List[Tuple[int, Tuple[int, ...]]]:
        _require(self.scn, "grid")
        mults = [1] + [m for m in self.scn.grid.refine if m != 1]
        return list(zip(mults, self.scn.grid.levels()))

    def initial_state(self, shape):
        _require(self.scn, "initial")
        ini = self.scn.initial
        return state_from_fields(Grid(self.chart, shape), ini.u, ini.rho, ini.S, t=ini.t)

    def solver_config(self, mult: int) -> SolverConfig:
        _require(self.scn, "solver")
        s = self.scn.solver
        dt = s.dt / mult if s.refine_dt else s.dt
        return SolverConfig(dt=dt, t_end=s.t_end, cfl_target=s.cfl_target, order=s.order, snapshot_every=s.snapshot_every)

    def markers(self, grid: Grid) -> Dict[str, MarkerSet]:
        h = float(np.min(grid.spacing))
        out = {}
        dom = self.scn.markers.domain
        if dom is not None:
            bs = dom.boundary_spacing_cells or dom.spacing_cells
            interior, boundary = rectangle_domain(self.chart, dom.lower, dom.upper, dom.spacing_cells * h, bs * h)
            out["domain"] = interior
            if boundary is not None:
                out["boundary"] = boundary
        for c in self.scn.markers.curves:
            out[c.name] = _curve_markers(c, h)
        return out

    def _run_level(self, mult: int, shape) -> Dict[str, IntegralSeries]:
        state = self.initial_state(shape)
        markers = self.markers(state.grid)
        specs = self.densities if "domain" in markers else {}
        curves = {c.name: c.name for c in self.scn.markers.curves}
        snaps = simulate(state, self.eos, self.solver_config(mult), markers=markers)
        return evaluate_series(snaps, self.eos, specs=specs, curves=curves, check=False)

    def runs(self) -> List[Tuple[int, Tuple[int, ...], Dict[str, IntegralSeries]]]:
        _require(self.scn, "grid", "initial", "solver", "eos")
        todo = [(m, s) for m, s in self.levels() if s not in self._runs]
        if todo:
            with ThreadPoolExecutor(max_workers=min(self.threads, len(todo))) as pool:
                done = list(pool.map(lambda ms: self._run_level(*ms), todo))
            for (m, s), res in zip(todo, done):
                self._runs[s] = res
        return [(m, s, self._runs[s]) for m, s in self.levels()]

    def has_run_blocks(self) -> bool:
        s = self.scn
        return all(b is not None for b in (s.grid, s.initial, s.solver, s.eos))

    def jets(self, order: int = 1):
        return sample_jets(self.chart, self.scn.jetcheck.count, self.scn.seed, order=order)


def _series_key(label: str, shape) -> str:
    return f"{label}_N{'x'.join(str(s) for s in shape)}"


def _interior_mask(grid: Grid, fraction: float = 0.125) -> np.ndarray:
    """Drop a band of ``fraction`` of the points next to every non-periodic edge."""
    mask = np.ones(grid.shape, bool)
    for k, periodic in enumerate(grid.chart.periodic):
        if periodic:
            continue
        cells = max(2, int(fraction * grid.shape[k]))
        idx = np.arange(grid.shape[k])
        keep = (idx >= cells) & (idx < grid.shape[k] - cells)
        shape = [1] * grid.dim
        shape[k] = -1
        mask &= keep.reshape(shape)
    return mask


# ---------------------------------------------------------------------------
# workflows


def simulate_task(wb: Workbench) -> TaskResult:
    """Run every refinement level and record all series; checks only finiteness."""
    res = TaskResult("simulate")
    for mult, shape, series in wb.runs():
        for label, s in series.items():
            res.series[_series_key(label, shape)] = s
            finite = bool(np.all(np.isfinite(s.integral)) and np.all(np.isfinite(s.flux)))
            res.checks.append(Check(f"{label}@{shape[0]}:finite", 0.0 if finite else float("nan"), 0.0))
    return res


def verify_densities(wb: Workbench) -> TaskResult:
    scn, chk = wb.scn, wb.scn.checks
    res = TaskResult("verify-densities")
    notes = wb.classify()
    if notes:
        res.info["override"] = notes
    if not wb.densities:
        raise ValueError("verify-densities needs a [densities] table")
    jets = wb.jets()
    for label, spec in wb.densities.items():
        r = euler_residuals(spec, jets, wb.eos).max_abs()
        res.checks.append(Check(f"{label}:jet_euler", r, chk.jet_pass_tol, detail={"jets": scn.jetcheck.count}))
    if chk.local_tol is not None and wb.has_run_blocks():
        local = {label: [] for label in wb.densities}
        for mult, shape in wb.levels():
            state = wb.initial_state(shape)
            mask = _interior_mask(state.grid)
            for label, spec in wb.densities.items():
                loc = local_conservation_residual(spec, state, wb.eos, order=scn.solver.order, check=False)
                v = float(np.max(np.abs(loc[mask])))
                local[label].append((mult, v))
                res.checks.append(Check(f"{label}:local@{shape[0]}", v, chk.local_tol))
        for label, vals in local.items():
            for (m0, v0), (m1, v1) in zip(vals, vals[1:]):
                need = chk.min_ratio ** math.log2(m1 / m0)
                res.checks.append(Check(f"{label}:local_ratio@{m0}->{m1}", _ratio(v0, v1), need, ">="))
    if wb.has_run_blocks() and scn.markers.domain is not None:
        runs = wb.runs()
        for label, spec in wb.densities.items():
            drift = _is_drift_density(spec)
            values = []
            for mult, shape, series in runs:
                s = series[label]
                res.series[_series_key(label, shape)] = s
                if drift:
                    v = s.drift()
                    res.checks.append(Check(f"{label}@{shape[0]}:drift", v, chk.drift_tol))
                else:
                    v = s.relative_residual()
                    res.checks.append(Check(f"{label}@{shape[0]}:balance", v, chk.balance_tol))
                values.append((mult, v))
            if not drift:
                for (m0, v0), (m1, v1) in zip(values, values[1:]):
                    res.checks.append(
                        Check(
                            f"{label}:ratio@{m0}->{m1}",
                            _ratio(v0, v1),
                            chk.min_ratio ** math.log2(m1 / m0),
                            ">=",
                        )
                    )
    return res


def verify_circulation(wb: Workbench) -> TaskResult:
    scn, chk = wb.scn, wb.scn.checks
    res = TaskResult("verify-circulation")
    if not scn.markers.curves:
        raise ValueError("verify-circulation needs at least one [[markers.curves]] entry")
    if wb.eos is not None and not wb.eos.is_barotropic():
        msg = f"circulation is transported only for barotropic pressure laws, got {wb.eos.variant}"
        if not wb.allow:
            raise ClassificationError(msg)
        res.info["override"] = [msg]
    runs = wb.runs()
    for c in scn.markers.curves:
        resid = []
        for mult, shape, series in runs:
            s = series[c.name]
            res.series[_series_key(c.name, shape)] = s
            if c.closed:
                res.checks.append(Check(f"{c.name}@{shape[0]}:drift", s.drift(), chk.circulation_tol))
            else:
                res.checks.append(Check(f"{c.name}@{shape[0]}:balance", s.relative_residual(), chk.circulation_tol))
                resid.append((mult, s.max_residual()))
        for (m0, r0), (m1, r1) in zip(resid, resid[1:]):
            res.checks.append(Check(f"{c.name}:order@{m0}->{m1}", _order(r0, r1, m1 / m0), chk.min_order, ">="))
    return res


def verify_determining(wb: Workbench) -> TaskResult:
    chk = wb.scn.checks
    res = TaskResult("verify-determining")
    notes = wb.classify()
    if notes:
        res.info["override"] = notes
    if not wb.densities:
        raise ValueError("verify-determining needs a [densities] table")
    jets = wb.jets()
    for label, spec in wb.densities.items():
        euler = euler_residuals(spec, jets, wb.eos)
        split = determining_system_residuals(spec, jets, wb.eos)
        rebuilt = recombine_determining(split, jets)
        gap = max(float(np.max(np.abs(a - b))) for a, b in zip(euler, rebuilt))
        scale = max(1.0, euler.max_abs())
        flux = float(np.max(np.abs(flux_consistency(spec, spec.flux(), jets, wb.eos))))
        res.checks += [
            Check(f"{label}:euler", euler.max_abs(), chk.jet_pass_tol),
            Check(f"{label}:split", max_split_residual(split), chk.jet_pass_tol),
            Check(f"{label}:recombination", gap / scale, 1e-12),
            Check(f"{label}:flux", flux, chk.jet_pass_tol),
        ]
    return res


def verify_hamiltonian(wb: Workbench) -> TaskResult:
    scn, chk = wb.scn, wb.scn.checks
    _require(scn, "grid", "initial", "solver", "eos")
    res = TaskResult("verify-hamiltonian")
    order = scn.solver.order
    densities = wb.densities or {"energy": dn.Energy()}
    levels = wb.levels()

    def level(ms):
        mult, shape = ms
        state = wb.initial_state(shape)
        flow = hamiltonian_flow_residual(state, wb.eos, order)
        casimir = {
            name: symmetry_from_density(spec, state, wb.eos, order).max_abs()
            for name, spec in (("Mass", dn.Mass()), ("VolumetricEntropy", dn.VolumetricEntropy()))
        }
        labels = list(densities)
        anti = None
        if len(labels) >= 2:
            a = variational_triple(densities[labels[0]], state, wb.eos)
            b = variational_triple(densities[labels[1]], state, wb.eos)
            p = antisymmetry_defect(a, b, state, order)
            anti = abs(p.lhs + p.rhs) / p.scale
        snaps = list(simulate(state, wb.eos, wb.solver_config(mult)))
        sym = {
            label: symmetry_determining_residual(density_generator(spec, wb.eos, order), snaps, wb.eos, order)
            for label, spec in densities.items()
        }
        return mult, shape, flow, casimir, anti, sym

    with ThreadPoolExecutor(max_workers=min(wb.threads, len(levels))) as pool:
        out = list(pool.map(level, levels))

    res.info["levels"] = [
        {"shape": list(shape), "flow_residual": flow, "symmetry_residual": sym} for _, shape, flow, _, _, sym in out
    ]
    for mult, shape, flow, casimir, anti, sym in out:
        n = shape[0]
        for name, v in casimir.items():
            res.checks.append(Check(f"casimir:{name}@{n}", v, 0.0))
        if anti is not None:
            res.checks.append(Check(f"antisymmetry@{n}", anti, chk.antisymmetry_tol))
    if len(out) < 2:
        raise ValueError("verify-hamiltonian needs grid.refine to measure convergence")
    for a, b in zip(out, out[1:]):
        need = chk.min_ratio ** math.log2(b[0] / a[0])
        res.checks.append(Check(f"flow:ratio@{a[1][0]}->{b[1][0]}", _ratio(a[2], b[2]), need, ">="))
        for label in a[5]:
            if a[5][label] == 0.0 and b[5][label] == 0.0:
                # Casimir densities generate the zero symmetry; nothing to converge
                res.checks.append(Check(f"symmetry:{label}:zero@{a[1][0]}->{b[1][0]}", 0.0, 0.0))
                continue
            res.checks.append(
                Check(f"symmetry:{label}:ratio@{a[1][0]}->{b[1][0]}", _ratio(a[5][label], b[5][label]), need, ">=")
            )
    return res


def geometry_report(wb: Workbench) -> TaskResult:
    chk = wb.scn.checks
    res = TaskResult("geometry-report")
    chart = wb.chart
    rng = np.random.default_rng(wb.scn.seed)
    x = interior_sample(chart, wb.scn.jetcheck.geometry_points, rng, margin=0.05)
    geo = geometry(chart, x, curvature=True)
    for name, v in sorted(curvature_identity_defects(geo).items()):
        tol = chk.inverse_tol if name == "inverse" else chk.identity_tol
        res.checks.append(Check(f"identity:{name}", v, tol))
    for k, zeta in enumerate(catalogued_isometries(chart)):
        v = float(np.max(np.abs(killing_residual(chart, zeta, x))))
        res.checks.append(Check(f"killing:{k}", v, chk.killing_tol, detail={"field": getattr(zeta, "label", str(k))}))
    ref = reference_scalar_curvature(chart, x)
    if ref is not None:
        v = float(np.max(np.abs(geo.scalar_curv - ref)))
        res.checks.append(Check("scalar_curvature", v, chk.curvature_tol))
    res.info["scalar_curvature_range"] = [float(np.min(geo.scalar_curv)), float(np.max(geo.scalar_curv))]
    return res


WORKFLOWS: Dict[str, Callable[[Workbench], TaskResult]] = {
    "simulate": simulate_task,
    "verify-densities": verify_densities,
    "verify-circulation": verify_circulation,
    "verify-determining": verify_determining,
    "verify-hamiltonian": verify_hamiltonian,
    "geometry-report": geometry_report,
}
