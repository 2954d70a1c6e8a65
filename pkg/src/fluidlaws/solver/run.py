"""Run driver: time stepping with markers carried along in lockstep."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional

from ..fluid.eos import Eos
from ..fluid.state import FluidState
from .euler import SolverConfig, check_cfl, grid_ops, step
from .markers import DOMAIN_INTERIOR, MarkerSet, advect_markers, check_clearance


@dataclass(frozen=True)
class Snapshot:
    index: int
    t: float
    state: FluidState
    markers: Dict[str, MarkerSet] = field(default_factory=dict)


def simulate(
    state: FluidState,
    eos: Eos,
    cfg: SolverConfig,
    markers: Optional[Dict[str, MarkerSet]] = None,
    clearance_cells: float = 2.0,
) -> Iterator[Snapshot]:
    """Yield snapshots every ``cfg.snapshot_every`` steps, starting with the initial state.

    Markers are advected with the velocity interpolated linearly in time across
    each step.  On charts with non-periodic axes every marker set must stay at
    least ``clearance_cells`` grid spacings from the edges.
    """
    markers = dict(markers or {})
    state.validate()
    check_cfl(state, eos, cfg)
    grid = state.grid
    guard = not grid.chart.fully_periodic
    ops = grid_ops(grid, cfg.order)

    def clear(ms):
        if guard:
            for m in ms.values():
                check_clearance(m, grid, clearance_cells)

    clear(markers)
    yield Snapshot(0, state.t, state, dict(markers))
    needs_div = any(m.kind == DOMAIN_INTERIOR for m in markers.values())
    div_now = ops.div(state.u) if needs_div else None
    t0 = state.t
    for k in range(1, cfg.n_steps + 1):
        nxt = step(state, eos, cfg, check=(k % 50 == 0))
        nxt = nxt.with_fields(t=t0 + k * cfg.dt)
        if markers:
            div_next = ops.div(nxt.u) if needs_div else None
            markers = {
                name: advect_markers(m, state, cfg.dt, nxt, div_now, div_next, cfg.order)
                for name, m in markers.items()
            }
            div_now = div_next
            clear(markers)
        state = nxt
        if k % cfg.snapshot_every == 0:
            yield Snapshot(k, state.t, state, dict(markers))
