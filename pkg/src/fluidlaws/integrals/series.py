"""Time series of moving integrals and their balance residuals."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional

import numpy as np

from ..errors import SeriesError
from ..fluid.eos import Eos
from .evaluate import boundary_flux, circulation, circulation_endpoint_term, domain_integral, ensure_compatible
from .densities import DensitySpec


@dataclass
class IntegralSeries:
    """Aligned arrays ``times``, ``integral``, ``flux`` and ``residual``.

    ``residual[k] = (integral[k+1] - integral[k-1]) / (t[k+1] - t[k-1]) + flux[k]``;
    the two endpoints have no centred difference and are NaN.
    """

    label: str
    times: np.ndarray
    integral: np.ndarray
    flux: np.ndarray
    residual: np.ndarray = field(init=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, float)
        self.integral = np.asarray(self.integral, float)
        self.flux = np.asarray(self.flux, float)
        if not (len(self.times) == len(self.integral) == len(self.flux)):
            raise SeriesError("series arrays must have equal length")
        if len(self.times) < 3:
            raise SeriesError("need at least 3 snapshots for centred time differences")
        dt = np.diff(self.times)
        if np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-9 * max(abs(dt[0]), 1e-300):
            raise SeriesError("snapshot times must be uniformly spaced and increasing")
        res = np.full(len(self.times), np.nan)
        res[1:-1] = (self.integral[2:] - self.integral[:-2]) / (self.times[2:] - self.times[:-2]) + self.flux[1:-1]
        self.residual = res

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.integral)))

    def max_residual(self) -> float:
        return float(np.nanmax(np.abs(self.residual)))

    def relative_residual(self) -> float:
        """``max |residual| / max |integral|``."""
        s = self.scale
        return self.max_residual() / s if s > 0 else self.max_residual()

    def drift(self) -> float:
        """``max_k |I_k - I_0| / |I_0|`` (absolute drift if the integral starts at 0)."""
        d = float(np.max(np.abs(self.integral - self.integral[0])))
        i0 = abs(float(self.integral[0]))
        return d / i0 if i0 > 0 else d

    def rows(self):
        for t, i, f, r in zip(self.times, self.integral, self.flux, self.residual):
            yield t, i, f, r

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "integral", "flux", "residual"])
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])
        return path


def evaluate_series(
    snapshots: Iterable,
    eos: Eos,
    specs: Optional[Dict[str, object]] = None,
    curves: Optional[Dict[str, str]] = None,
    domain: str = "domain",
    boundary: Optional[str] = "boundary",
    check: bool = True,
) -> Dict[str, IntegralSeries]:
    """Density balances and curve circulations gathered in a single streaming pass.

    Only scalars are kept per snapshot, so ``snapshots`` may be a generator
    straight from the solver.  For curves the ``flux`` column holds
    ``-[1/2|u|^2 - e - P/rho]_start^end`` so that the residual is
    ``d Gamma/dt - [1/2|u|^2 - e - P/rho]_start^end``; for closed curves it is
    just the centred time derivative of the circulation.
    """
    specs = dict(specs or {})
    curves = dict(curves or {})
    clash = set(specs) & set(curves)
    if clash:
        raise SeriesError(f"labels used for both densities and curves: {sorted(clash)}")
    labels = list(specs) + list(curves)
    times, vals, flux = [], {k: [] for k in labels}, {k: [] for k in labels}
    first = True
    for snap in snapshots:
        if first and check:
            for sp in specs.values():
                if isinstance(sp, DensitySpec):
                    ensure_compatible(sp, snap.state.grid.chart, eos)
        times.append(snap.t)
        if specs:
            dom = snap.markers[domain]
            bnd = snap.markers.get(boundary) if boundary else None
            for name, sp in specs.items():
                vals[name].append(domain_integral(dom, sp, snap.state, eos, check=False))
                if bnd is None:
                    flux[name].append(0.0)
                else:
                    flux[name].append(boundary_flux(bnd, sp, snap.state, eos, check=False, check_simple=first))
        for label, key in curves.items():
            c = snap.markers[key]
            vals[label].append(circulation(c, snap.state))
            flux[label].append(-circulation_endpoint_term(c, snap.state, eos))
        first = False
    return {k: IntegralSeries(k, times, vals[k], flux[k]) for k in labels}


def balance_series(
    snapshots: Iterable,
    specs: Dict[str, object],
    eos: Eos,
    domain: str = "domain",
    boundary: Optional[str] = "boundary",
    check: bool = True,
) -> Dict[str, IntegralSeries]:
    """Evaluate several densities along one pass over the snapshots."""
    return evaluate_series(snapshots, eos, specs=specs, domain=domain, boundary=boundary, check=check)


def flux_balance_series(snapshots, spec, eos: Eos, domain: str = "domain", boundary: Optional[str] = "boundary") -> IntegralSeries:
    """Centred-difference balance ``d/dt int_V T dV + int_dV g(Phi, nu) dA``."""
    label = spec.label if hasattr(spec, "label") else "T"
    return balance_series(snapshots, {label: spec}, eos, domain, boundary)[label]


def circulation_series(snapshots: Iterable, curves: Dict[str, str], eos: Eos) -> Dict[str, IntegralSeries]:
    """Circulation along material curves (see :func:`evaluate_series` for the flux column)."""
    return evaluate_series(snapshots, eos, curves=curves)


def circulation_balance(snapshots, curve: str, eos: Eos) -> IntegralSeries:
    return circulation_series(snapshots, {curve: curve}, eos)[curve]
