"""Catalogue of density/EOS/chart pairings and their jet-space verdicts.

Positive pairings must give Euler residuals at round-off level; negative
pairings are classification-forbidden and must show an O(1) residual on some
jet.  Thresholds and the empty-gap rule live here so tests and the CLI share
them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from ..fluid.eos import Eos, barotropic, general_eos, isobaric_entropy, polytropic
from ..fluid.expressions import Exp, Poly, Sin
from ..integrals import densities as dn
from ..manifold.builtin import make_chart
from ..manifold.chart import ChartMetric
from ..manifold import fields as fl
from .jets import sample_jets
from .oneform import oneform_residual
from .residuals import euler_residuals

PASS_TOL = 1e-9
FAIL_TOL = 1e-3


def eos_catalogue(n: int = 2) -> dict:
    """One representative of each EOS class (polytropic at the special exponent for ``n``)."""
    return {
        "General": general_eos([(Exp(1.0, 0.5, 0.0), 1.4), (Poly((0.3, 0.2)), 2.5), (Sin(0.1, 1.0, 0.0, 0.2), 0.0)]),
        "Barotropic": barotropic([(1.0, 1.4), (0.3, 2.0)]),
        "Polytropic": polytropic(Exp(1.0, 0.7, 0.0), n=n, sigma0=0.25),
        "IsobaricEntropy": isobaric_entropy(Poly((1.0, 0.5, 0.2))),
    }


@dataclass
class Pairing:
    label: str
    density: object
    eos: Eos
    chart: ChartMetric
    expect: str  # "conserved" or "forbidden"

    @property
    def eos_name(self) -> str:
        return self.eos.variant


@dataclass
class PairingResult:
    pairing: Pairing
    max_residual: float
    seconds: float

    @property
    def passed(self) -> bool:
        if self.pairing.expect == "conserved":
            return self.max_residual <= PASS_TOL
        return self.max_residual >= FAIL_TOL

    def summary(self) -> dict:
        p = self.pairing
        return {
            "pairing": p.label,
            "eos": p.eos_name,
            "chart": p.chart.name,
            "n": p.chart.dim,
            "expect": p.expect,
            "max_residual": float(self.max_residual),
            "verdict": "PASS" if self.passed else "FAIL",
        }


def _killing(chart: ChartMetric):
    return fl.catalogued_isometries(chart)[0]


def positive_pairings(n: int = 2) -> List[Pairing]:
    """Every density variant with each compatible EOS class on M1, M2 and (where apt) M4."""
    out: List[Pairing] = []
    eoses = eos_catalogue(n)
    f = Exp(1.0, 0.8, 0.1)
    for cname in ("M1", "M2", "M4"):
        chart = make_chart(cname, n=n) if cname != "M2" else make_chart(cname)
        if chart.dim != n:
            continue
        zeta = _killing(chart)
        generic = [dn.Mass(), dn.VolumetricEntropy(f), dn.Energy(), dn.Momentum(zeta)]
        if cname == "M4":
            zeta_rot = fl.rotation(n, 0, 1)
            generic.append(dn.Momentum(zeta_rot))
        for spec in generic:
            for ename, eos in eoses.items():
                out.append(Pairing(f"{spec.label}/{ename}/{cname}", spec, eos, chart, "conserved"))
        iso = eoses["IsobaricEntropy"]
        for spec in (dn.NonIsentropicMomentum(zeta, Poly((0.5, 1.0, 0.3))), dn.NonIsentropicEnergy(Poly((1.0, 0.4)))):
            out.append(Pairing(f"{spec.label}/IsobaricEntropy/{cname}", spec, iso, chart, "conserved"))
        poly = eoses["Polytropic"]
        if cname == "M2":
            # only Killing fields are available here, i.e. homotheties with lam = 0
            sim = dn.SimilarityEnergy(zeta, lam=0.0)
            out.append(Pairing(f"{sim.label}/Polytropic/{cname}", sim, poly, chart, "conserved"))
            continue
        psi = fl.linear_potential(np.linspace(1.0, 0.5, n), offset=0.3)
        theta = fl.quadratic_potential(n, 1.0, center=np.full(n, 0.2))
        for spec, eos_list in (
            (dn.GalileanMomentum(psi), eoses.items()),
            (dn.SimilarityEnergy(fl.dilation(n), lam=2.0), [("Polytropic", poly)]),
            (dn.GalileanEnergy(theta, lam=2.0), [("Polytropic", poly)]),
        ):
            for ename, eos in eos_list:
                out.append(Pairing(f"{spec.label}/{ename}/{cname}", spec, eos, chart, "conserved"))
    return out


def negative_pairings() -> List[Pairing]:
    """Classification-forbidden pairings (n = 2)."""
    m1, m2, m4 = make_chart("M1"), make_chart("M2"), make_chart("M4")
    eoses = eos_catalogue(2)
    gen, poly, iso = eoses["General"], eoses["Polytropic"], eoses["IsobaricEntropy"]
    sim = dn.SimilarityEnergy(fl.dilation(2), lam=2.0)
    gal = dn.GalileanEnergy(fl.quadratic_potential(2, 1.0), lam=2.0)
    f = Poly((0.5, 1.0))
    items = [
        ("SimilarityEnergy/gamma=1.7", sim, polytropic(1.0, 1.7), m4),
        ("SimilarityEnergy/gamma=2.3", sim, polytropic(1.0, 2.3), m4),
        ("GalileanEnergy/gamma=1.7", gal, polytropic(1.0, 1.7), m4),
        ("GalileanEnergy/gamma=2.3", gal, polytropic(1.0, 2.3), m4),
        ("SimilarityEnergy/General", sim, gen, m4),
        ("SimilarityEnergy/Barotropic P=rho", sim, barotropic([(1.0, 1.0)]), m4),
        ("SimilarityEnergy/n=3 exponent in n=2", sim, polytropic(1.0, 5.0 / 3.0), m4),
        ("SimilarityEnergy/entropy-dependent offset", sim, polytropic(1.0, 2.0, sigma0=Poly((0.0, 0.5))), m4),
        ("NonIsentropicEnergy/Polytropic", dn.NonIsentropicEnergy(f), poly, m1),
        ("NonIsentropicEnergy/General", dn.NonIsentropicEnergy(f), gen, m2),
        ("NonIsentropicMomentum/General", dn.NonIsentropicMomentum(fl.translation(2, 0), f), gen, m1),
        ("NonIsentropicMomentum/Polytropic", dn.NonIsentropicMomentum(_killing(m2), f), poly, m2),
        ("Momentum/non-Killing (x^1)^2 e_1", dn.Momentum(fl.squared_coordinate_field(2, 0)), gen, m1),
        ("Momentum/d_r on torus of revolution", dn.Momentum(fl.translation(2, 0)), gen, m2),
        ("GalileanMomentum/psi=|x|^2/2", dn.GalileanMomentum(fl.quadratic_potential(2, 1.0)), gen, m4),
        ("Energy/1.01 e", dn.scale_thermo(dn.Energy().expression(), 1.01), gen, m2),
    ]
    return [Pairing(label, d, e, c, "forbidden") for label, d, e, c in items]


def evaluate_pairing(p: Pairing, count: int = 1000, seed: int = 0) -> PairingResult:
    t0 = time.perf_counter()
    jets = sample_jets(p.chart, count, seed)
    r = euler_residuals(p.density, jets, p.eos).max_abs()
    return PairingResult(p, r, time.perf_counter() - t0)


def run_suite(pairings: List[Pairing], count: int = 1000, seed: int = 0) -> List[PairingResult]:
    return [evaluate_pairing(p, count, seed) for p in pairings]


def gap_violations(results: List[PairingResult]) -> List[PairingResult]:
    """Results whose maximum lands strictly between the pass and fail thresholds."""
    return [r for r in results if PASS_TOL < r.max_residual < FAIL_TOL]


@dataclass
class OneFormResult:
    eos_label: str
    n: int
    chart: str
    max_residual: float
    expect: str

    @property
    def passed(self) -> bool:
        return self.max_residual <= PASS_TOL if self.expect == "conserved" else self.max_residual >= FAIL_TOL


def oneform_suite(count: int = 1000, seed: int = 0) -> List[OneFormResult]:
    """Vorticity transport on order-2 jets: barotropic passes, baroclinic fails (n = 2, 3)."""
    out = []
    for cname, kw in (("M1", {"n": 2}), ("M2", {}), ("M1", {"n": 3}), ("M3", {"n": 3})):
        chart = make_chart(cname, **kw)
        jets = sample_jets(chart, count, seed, order=2)
        eoses = eos_catalogue(chart.dim)
        for label, expect in (("Barotropic", "conserved"), ("General", "forbidden")):
            r = float(np.max(np.abs(oneform_residual(jets, eoses[label]))))
            out.append(OneFormResult(label, chart.dim, chart.name, r, expect))
    return out
