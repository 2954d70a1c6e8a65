"""Equations of state built from power terms ``P = sum_m c_m(S) rho^gamma_m``.

The four variants (general, polytropic, isobaric-entropy, barotropic) share one
implementation; they differ only in which coefficient functions and exponents
are allowed.  The internal energy ``e = int rho^-2 P d rho`` has the closed
antiderivative ``sum_m c_m(S) eps_gamma(rho)`` with

* ``eps_gamma(rho) = rho^(gamma-1) / (gamma-1)`` for gamma != 1,
* ``eps_1(rho) = ln rho``.

A quadrature path anchored at the reference density ``rho0 = 1`` is available
for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import sympy as sp

from ..errors import StateError
from .expressions import Expr, const, expr_from_config, gauss_integral

RHO_REF = 1.0
SPECIAL_EXPONENT_TOL = 1e-12


class PressureData(NamedTuple):
    P: np.ndarray
    P_rho: np.ndarray
    P_S: np.ndarray
    P_rhorho: np.ndarray
    P_rhoS: np.ndarray
    P_SS: np.ndarray


def special_exponent(n: int) -> float:
    """The exponent 1 + 2/n for which the similarity energy exists."""
    return 1.0 + 2.0 / n


def _check_rho(rho):
    rho = np.asarray(rho, float)
    if np.any(~np.isfinite(rho)) or np.any(rho <= 0):
        bad = np.argwhere(~(rho > 0))
        where = tuple(bad[0]) if bad.size else ()
        raise StateError(f"density must be positive and finite (offending index {where})")
    return rho


def _eps(rho, gamma, k=0):
    """k-th rho-derivative of eps_gamma(rho)."""
    if k == 0:
        if gamma == 1.0:
            return np.log(rho)
        return rho ** (gamma - 1.0) / (gamma - 1.0)
    if k == 1:
        return rho ** (gamma - 2.0)
    raise ValueError(k)


@dataclass(frozen=True)
class Eos:
    """Power-sum equation of state.

    Parameters
    ----------
    terms
        Tuple of ``(coefficient Expr, exponent)`` pairs.
    variant
        One of ``"General"``, ``"Polytropic"``, ``"IsobaricEntropy"``, ``"Barotropic"``.
    """

    terms: tuple
    variant: str = "General"

    def __post_init__(self):
        if not self.terms:
            raise ValueError("equation of state needs at least one term")
        object.__setattr__(
            self, "terms", tuple((expr_from_config(c), float(g)) for c, g in self.terms)
        )

    # -- pressure ---------------------------------------------------------
    def pressure_data(self, rho, S) -> PressureData:
        rho = _check_rho(rho)
        S = np.asarray(S, float)
        shape = np.broadcast_shapes(rho.shape, S.shape)
        acc = [np.zeros(shape) for _ in range(6)]
        for c, g in self.terms:
            c0, c1, c2 = c.deriv(S, 0), c.deriv(S, 1), c.deriv(S, 2)
            r0 = rho**g
            r1 = g * rho ** (g - 1.0) if g != 0.0 else 0.0
            r2 = g * (g - 1.0) * rho ** (g - 2.0) if g not in (0.0, 1.0) else 0.0
            acc[0] = acc[0] + c0 * r0
            acc[1] = acc[1] + c0 * r1
            acc[2] = acc[2] + c1 * r0
            acc[3] = acc[3] + c0 * r2
            acc[4] = acc[4] + c1 * r1
            acc[5] = acc[5] + c2 * r0
        return PressureData(*acc)

    def pressure(self, rho, S):
        """``(P, P_rho, P_S)``."""
        d = self.pressure_data(rho, S)
        return d.P, d.P_rho, d.P_S

    def sound_speed_sq(self, rho, S):
        return np.maximum(self.pressure_data(rho, S).P_rho, 0.0)

    # -- internal energy --------------------------------------------------
    def internal_energy(self, rho, S, method: str = "closed"):
        rho = _check_rho(rho)
        S = np.asarray(S, float)
        if method == "closed":
            out = 0.0
            for c, g in self.terms:
                out = out + c(S) * _eps(rho, g)
            return out + np.zeros(np.broadcast_shapes(rho.shape, S.shape))
        if method == "quadrature":
            anchor = self.internal_energy(np.full_like(rho, RHO_REF), S)
            rr, SS = np.broadcast_arrays(rho, S)
            integral = gauss_integral(
                lambda r: self.pressure_data(r, SS[..., None]).P / r**2, np.full_like(rr, RHO_REF), rr
            )
            return anchor + integral
        raise ValueError(f"unknown method '{method}'")

    def energy_entropy_derivative(self, rho, S):
        """``e_S`` from the closed antiderivative."""
        rho = _check_rho(rho)
        S = np.asarray(S, float)
        out = 0.0
        for c, g in self.terms:
            out = out + c.deriv(S, 1) * _eps(rho, g)
        return out + np.zeros(np.broadcast_shapes(rho.shape, S.shape))

    def energy_entropy_second_derivative(self, rho, S):
        rho = _check_rho(rho)
        S = np.asarray(S, float)
        out = 0.0
        for c, g in self.terms:
            out = out + c.deriv(S, 2) * _eps(rho, g)
        return out + np.zeros(np.broadcast_shapes(rho.shape, S.shape))

    # -- classification ---------------------------------------------------
    def _live_terms(self):
        return [(c, g) for c, g in self.terms if not (c.is_constant() and float(c(0.0)) == 0.0)]

    def is_barotropic(self) -> bool:
        """``P_S`` vanishes identically."""
        return all(c.is_constant() for c, _ in self._live_terms())

    def is_isobaric_entropy(self) -> bool:
        """``P_rho`` vanishes identically."""
        return all(g == 0.0 for _, g in self._live_terms())

    def polytropic_form(self) -> Optional[tuple]:
        """``(sigma, gamma, sigma0)`` if P = sigma(S) rho^gamma + sigma0(S), else None."""
        live = self._live_terms()
        powered = [(c, g) for c, g in live if g != 0.0]
        offsets = [c for c, g in live if g == 0.0]
        if len(powered) != 1 or len(offsets) > 1:
            return None
        sigma, gamma = powered[0]
        sigma0 = offsets[0] if offsets else const(0.0)
        return sigma, gamma, sigma0

    def is_polytropic_special(self, n: int) -> bool:
        form = self.polytropic_form()
        return form is not None and abs(form[1] - special_exponent(n)) <= SPECIAL_EXPONENT_TOL

    def admits_similarity_energy(self, n: int) -> bool:
        """Polytropic with exponent 1 + 2/n and a constant offset."""
        return self.is_polytropic_special(n) and self.polytropic_form()[2].is_constant()

    def nontrivial_on(self, rho, S, tol: float = 1e-12) -> bool:
        d = self.pressure_data(rho, S)
        return bool(np.all((np.abs(d.P_rho) > tol) | (np.abs(d.P_S) > tol)))

    # -- symbolic twin ----------------------------------------------------
    def sympy_pressure(self, rho, S):
        return sum(c.sympy(S) * rho ** sp.Float(g) if g != 0.0 else c.sympy(S) for c, g in self.terms)

    def sympy_energy(self, rho, S):
        out = sp.Integer(0)
        for c, g in self.terms:
            if g == 1.0:
                out += c.sympy(S) * sp.log(rho)
            else:
                out += c.sympy(S) * rho ** sp.Float(g - 1.0) / sp.Float(g - 1.0)
        return out

    def to_config(self) -> dict:
        return {
            "variant": self.variant,
            "terms": [{"coeff": c.to_config(), "gamma": g} for c, g in self.terms],
        }

    def describe(self) -> str:
        parts = [f"{c.to_config()}*rho^{g:g}" for c, g in self.terms]
        return f"{self.variant}(P = {' + '.join(parts)})"


def general_eos(terms) -> Eos:
    """``P = sum c_m(S) rho^gamma_m`` with arbitrary coefficient functions."""
    return Eos(tuple(terms), "General")


def polytropic(sigma=1.0, gamma: Optional[float] = None, sigma0=0.0, n: int = 2) -> Eos:
    """``P = sigma(S) rho^gamma + sigma0`` with gamma defaulting to 1 + 2/n."""
    g = special_exponent(n) if gamma is None else float(gamma)
    if g == 0.0:
        raise ValueError("polytropic exponent must be non-zero")
    return Eos(((expr_from_config(sigma), g), (expr_from_config(sigma0), 0.0)), "Polytropic")


def isobaric_entropy(kappa) -> Eos:
    """``P = kappa(S)`` with kappa non-constant."""
    k = expr_from_config(kappa)
    if k.is_constant():
        raise ValueError("isobaric-entropy equation of state needs a non-constant kappa(S)")
    return Eos(((k, 0.0),), "IsobaricEntropy")


def barotropic(terms) -> Eos:
    """``P = sum K_m rho^gamma_m`` with constant coefficients; ``terms`` is ``[(K, gamma), ...]``."""
    out = []
    for K, g in terms:
        e = expr_from_config(K)
        if not e.is_constant():
            raise ValueError("barotropic coefficients must be constants")
        out.append((e, float(g)))
    return Eos(tuple(out), "Barotropic")


_EOS_KEYS = {
    "Polytropic": {"sigma", "gamma", "sigma0", "n"},
    "IsobaricEntropy": {"kappa"},
    "Barotropic": {"terms"},
    "General": {"terms"},
}


def eos_from_config(cfg: dict, n: int = 2) -> Eos:
    """Build an EOS from a scenario table (see the bundled scenarios)."""
    cfg = dict(cfg)
    variant = cfg.get("variant", "General")
    allowed = _EOS_KEYS.get(variant)
    if allowed is None:
        raise ValueError(f"unknown EOS variant '{variant}'; known: {sorted(_EOS_KEYS)}")
    extra = sorted(set(cfg) - allowed - {"variant"})
    if extra:
        raise ValueError(f"{variant} EOS has no parameter(s) {extra}; allowed: {sorted(allowed)}")
    if variant == "Polytropic":
        return polytropic(cfg.get("sigma", 1.0), cfg.get("gamma"), cfg.get("sigma0", 0.0), n=cfg.get("n", n))
    if variant == "IsobaricEntropy":
        return isobaric_entropy(cfg["kappa"])
    if variant == "Barotropic":
        return barotropic([(t["coeff"], t["gamma"]) for t in cfg["terms"]])
    if variant == "General":
        return general_eos([(t["coeff"], t["gamma"]) for t in cfg["terms"]])
    raise ValueError(f"unknown EOS variant '{variant}'")
