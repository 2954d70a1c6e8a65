"""Declarative one-variable functions f(S) and initial-condition fields.

Entropy functions (f, sigma, kappa, ...) come from a closed registry so that
scenario files stay declarative and every function has exact derivatives and a
symbolic twin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import sympy as sp

from ..errors import NumericError


class Expr:
    """A smooth function of one real variable with derivatives of any order."""

    kind: str = "expr"

    def __call__(self, s):
        return self.deriv(s, 0)

    def deriv(self, s, k: int = 1):
        raise NotImplementedError

    def is_constant(self) -> bool:
        raise NotImplementedError

    def sympy(self, s):
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Poly(Expr):
    """``sum_k coeffs[k] s^k``."""

    coeffs: tuple = (0.0,)
    kind = "poly"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs) or (0.0,))

    def deriv(self, s, k: int = 1):
        s = np.asarray(s, float)
        c = np.asarray(self.coeffs)
        if k >= len(c):
            return np.zeros_like(s)
        if k:
            c = np.polynomial.polynomial.polyder(c, k)
        return np.polynomial.polynomial.polyval(s, c) + np.zeros_like(s)

    def is_constant(self) -> bool:
        return all(c == 0.0 for c in self.coeffs[1:])

    def sympy(self, s):
        return sum(sp.Float(c) * s**k for k, c in enumerate(self.coeffs) if c != 0.0) + sp.Integer(0)

    def to_config(self):
        return {"kind": "poly", "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class Exp(Expr):
    """``amp * exp(rate * s) + shift``."""

    amp: float = 1.0
    rate: float = 1.0
    shift: float = 0.0
    kind = "exp"

    def deriv(self, s, k: int = 1):
        s = np.asarray(s, float)
        val = self.amp * self.rate**k * np.exp(self.rate * s)
        return val + (self.shift if k == 0 else 0.0)

    def is_constant(self) -> bool:
        return self.amp == 0.0 or self.rate == 0.0

    def sympy(self, s):
        return sp.Float(self.amp) * sp.exp(sp.Float(self.rate) * s) + sp.Float(self.shift)

    def to_config(self):
        return {"kind": "exp", "amp": self.amp, "rate": self.rate, "shift": self.shift}


@dataclass(frozen=True)
class Sin(Expr):
    """``amp * sin(freq * s + phase) + shift``."""

    amp: float = 1.0
    freq: float = 1.0
    phase: float = 0.0
    shift: float = 0.0
    kind = "sin"

    def deriv(self, s, k: int = 1):
        s = np.asarray(s, float)
        val = self.amp * self.freq**k * np.sin(self.freq * s + self.phase + 0.5 * np.pi * k)
        return val + (self.shift if k == 0 else 0.0)

    def is_constant(self) -> bool:
        return self.amp == 0.0 or self.freq == 0.0

    def sympy(self, s):
        return sp.Float(self.amp) * sp.sin(sp.Float(self.freq) * s + sp.Float(self.phase)) + sp.Float(self.shift)

    def to_config(self):
        return {"kind": "sin", "amp": self.amp, "freq": self.freq, "phase": self.phase, "shift": self.shift}


def const(value: float) -> Poly:
    return Poly((float(value),))


@dataclass(frozen=True)
class Scaled(Expr):
    """``factor * base(s)``."""

    base: Expr
    factor: float = 1.0
    kind = "scaled"

    def deriv(self, s, k: int = 1):
        return self.factor * self.base.deriv(s, k)

    def is_constant(self) -> bool:
        return self.factor == 0.0 or self.base.is_constant()

    def sympy(self, s):
        return sp.Float(self.factor) * self.base.sympy(s)

    def to_config(self):
        return {"kind": "scaled", "factor": self.factor, "base": self.base.to_config()}


EXPRESSION_KINDS = {"poly": Poly, "exp": Exp, "sin": Sin}


def expr_from_config(cfg: Any) -> Expr:
    """Build an ``Expr`` from a number, a coefficient list, or a ``{kind: ...}`` table."""
    if isinstance(cfg, Expr):
        return cfg
    if isinstance(cfg, (int, float)):
        return const(cfg)
    if isinstance(cfg, (list, tuple)):
        return Poly(tuple(cfg))
    if isinstance(cfg, dict):
        cfg = dict(cfg)
        kind = cfg.pop("kind", "poly")
        if kind == "const":
            return const(cfg.get("value", 0.0))
        if kind == "scaled":
            return Scaled(expr_from_config(cfg["base"]), float(cfg.get("factor", 1.0)))
        if kind not in EXPRESSION_KINDS:
            raise ValueError(f"unknown expression kind '{kind}'; known: {sorted(EXPRESSION_KINDS) + ['const', 'scaled']}")
        if kind == "poly":
            return Poly(tuple(cfg.get("coeffs", (0.0,))))
        return EXPRESSION_KINDS[kind](**{k: float(v) for k, v in cfg.items()})
    raise ValueError(f"cannot interpret {cfg!r} as an expression")


_GL_CACHE: dict = {}


def _gauss_legendre(m: int):
    if m not in _GL_CACHE:
        _GL_CACHE[m] = np.polynomial.legendre.leggauss(m)
    return _GL_CACHE[m]


def gauss_integral(fn, a, b, nodes: int = 48, rtol: float = 1e-12, atol: float = 1e-13):
    """Vectorised ``int_a^b fn(s) ds`` with a doubled-rule convergence check.

    ``a`` and ``b`` broadcast against each other; ``fn`` must accept arrays.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    a, b = np.broadcast_arrays(a, b)

    def rule(m):
        z, w = _gauss_legendre(m)
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        pts = mid[..., None] + half[..., None] * z
        return half * np.sum(w * fn(pts), axis=-1)

    coarse = rule(nodes)
    fine = rule(2 * nodes)
    err = np.abs(fine - coarse)
    if not np.all(np.isfinite(fine)) or np.any(err > atol + rtol * np.abs(fine)):
        raise NumericError(
            f"quadrature failed to converge (max discrepancy {float(np.nanmax(err)):.3g} between "
            f"{nodes}- and {2 * nodes}-point rules)"
        )
    return fine


# ---------------------------------------------------------------------------
# initial-condition fields on a chart


class FieldExpr:
    """A scalar function of chart position used for initial conditions."""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantField(FieldExpr):
    value: float = 0.0

    def __call__(self, x):
        return np.full(np.shape(x)[:-1], float(self.value))


@dataclass(frozen=True)
class ModeField(FieldExpr):
    """``amp * sin(k . x + phase)`` or its cosine twin."""

    amp: float
    k: tuple
    phase: float = 0.0
    cos: bool = False

    def __call__(self, x):
        arg = np.asarray(x, float) @ np.asarray(self.k, float) + self.phase
        return self.amp * (np.cos(arg) if self.cos else np.sin(arg))


@dataclass(frozen=True)
class GaussianField(FieldExpr):
    """``amp * exp(-|x - center|^2 / width^2)`` in chart coordinates."""

    amp: float
    center: tuple
    width: float

    def __call__(self, x):
        d = np.asarray(x, float) - np.asarray(self.center, float)
        return self.amp * np.exp(-np.sum(d * d, axis=-1) / self.width**2)


@dataclass(frozen=True)
class SumField(FieldExpr):
    terms: tuple

    def __call__(self, x):
        out = np.zeros(np.shape(x)[:-1])
        for t in self.terms:
            out = out + t(x)
        return out


def field_from_config(cfg: Any) -> FieldExpr:
    """Number -> constant; table -> single term; list -> sum of terms."""
    if isinstance(cfg, FieldExpr):
        return cfg
    if isinstance(cfg, (int, float)):
        return ConstantField(float(cfg))
    if isinstance(cfg, (list, tuple)):
        return SumField(tuple(field_from_config(c) for c in cfg))
    if isinstance(cfg, dict):
        cfg = dict(cfg)
        kind = cfg.pop("kind", "const")
        if kind == "const":
            return ConstantField(float(cfg.get("value", 0.0)))
        if kind in ("sin", "cos", "mode"):
            return ModeField(
                amp=float(cfg["amp"]),
                k=tuple(float(v) for v in cfg["k"]),
                phase=float(cfg.get("phase", 0.0)),
                cos=(kind == "cos") or bool(cfg.get("cos", False)),
            )
        if kind == "gaussian":
            return GaussianField(float(cfg["amp"]), tuple(float(v) for v in cfg["center"]), float(cfg["width"]))
        raise ValueError(f"unknown field kind '{kind}'; known: const, sin, cos, gaussian")
    raise ValueError(f"cannot interpret {cfg!r} as a field")


def vector_field_from_config(cfgs: Sequence[Any]) -> list:
    return [field_from_config(c) for c in cfgs]
