"""Kinematic conserved densities and their moving fluxes.

Every classified density fits the template

    T = rho a(t,x,S) + rho u^j c_j(t,x,S) + 1/2 A(t,S) rho |u|^2 + B(t,rho,S)

and every moving flux fits

    Phi^i = g^{ij} W_j(t,x) m(rho,S) + u^i At(t,rho,S).

Each variant supplies its pieces (with exact partial derivatives and explicit
covariant x-derivatives); ``TemplateDensity`` assembles the full table of
partials consumed by the pointwise checks, the Hamiltonian module and the grid
diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..errors import ClassificationError
from ..fluid.eos import RHO_REF, Eos, special_exponent
from ..fluid.expressions import Expr, expr_from_config, gauss_integral
from ..manifold.chart import ChartMetric, GeometryEval
from ..manifold.fields import (
    ScalarFieldSpec,
    VectorFieldSpec,
    covariant_derivative_vector,
    covariant_hessian_scalar,
    curl_free_residual,
    gradient_field,
    homothety_residual,
    killing_residual,
)

# ---------------------------------------------------------------------------
# evaluation context and template pieces


@dataclass(frozen=True)
class Context:
    """Everything a density needs except the velocity."""

    t: np.ndarray
    x: np.ndarray
    geom: GeometryEval
    chart: ChartMetric
    rho: np.ndarray
    S: np.ndarray
    eos: Eos

    @property
    def n(self) -> int:
        return self.chart.dim


@dataclass
class ScalarPiece:
    """``a(t, x, S)`` with partials; ``grad*`` are explicit covariant x-derivatives."""

    value: object
    t: object = 0.0
    S: object = 0.0
    tS: object = 0.0
    SS: object = 0.0
    grad: Optional[np.ndarray] = None
    grad_t: Optional[np.ndarray] = None
    grad_S: Optional[np.ndarray] = None


@dataclass
class CovectorPiece:
    """``c_j(t, x, S)``; ``grad[..., k, j] = nabla_k c_j`` (explicit)."""

    value: np.ndarray
    t: Optional[np.ndarray] = None
    S: Optional[np.ndarray] = None
    tS: Optional[np.ndarray] = None
    SS: Optional[np.ndarray] = None
    grad: Optional[np.ndarray] = None
    grad_t: Optional[np.ndarray] = None
    grad_S: Optional[np.ndarray] = None


@dataclass
class KineticPiece:
    """Coefficient ``A(t, S)`` of ``1/2 rho |u|^2``."""

    value: object
    t: object = 0.0
    S: object = 0.0
    tS: object = 0.0
    SS: object = 0.0


@dataclass
class ThermoPiece:
    """``B(t, rho, S)`` with partials; ``S_over_rho`` is B_S / rho computed without division."""

    value: object
    t: object = 0.0
    rho: object = 0.0
    S: object = 0.0
    rhorho: object = 0.0
    rhoS: object = 0.0
    SS: object = 0.0
    trho: object = 0.0
    tS: object = 0.0
    S_over_rho: object = 0.0


@dataclass
class Pieces:
    a: Optional[ScalarPiece] = None
    c: Optional[CovectorPiece] = None
    A: Optional[KineticPiece] = None
    B: Optional[ThermoPiece] = None


@dataclass
class FluxPieces:
    """``W_j`` (with ``gradW[..., k, j] = nabla_k W_j``), ``m(rho, S)`` and ``At(rho, S)``."""

    W: Optional[np.ndarray] = None
    gradW: Optional[np.ndarray] = None
    m: object = 0.0
    m_rho: object = 0.0
    m_S: object = 0.0
    At: object = 0.0
    At_rho: object = 0.0
    At_S: object = 0.0


@dataclass
class DensityPartials:
    """Value and partial derivatives of T at a batch of jet/state points.

    Vector-valued entries carry a lower index (``T_u[..., i] = dT/du^i``);
    ``grad_T_u[..., k, i] = nabla_k T_{u^i}`` (explicit x-dependence only).
    """

    T: np.ndarray
    T_t: np.ndarray
    T_rho: np.ndarray
    T_S: np.ndarray
    T_u: np.ndarray
    T_trho: np.ndarray
    T_tS: np.ndarray
    T_tu: np.ndarray
    T_rhorho: np.ndarray
    T_rhoS: np.ndarray
    T_SS: np.ndarray
    T_urho: np.ndarray
    T_uS: np.ndarray
    T_uu: np.ndarray
    grad_T: np.ndarray
    grad_T_rho: np.ndarray
    grad_T_S: np.ndarray
    grad_T_u: np.ndarray
    Tu_over_rho: np.ndarray
    TS_over_rho: np.ndarray


@dataclass
class FluxPartials:
    """``Phi[..., i]`` (upper), explicit divergence and partials w.r.t. u, rho, S."""

    Phi: np.ndarray
    div_explicit: np.ndarray
    Phi_u: np.ndarray  # [..., i, k] = dPhi^i/du^k
    Phi_rho: np.ndarray
    Phi_S: np.ndarray


def _dot(u, c):
    return 0.0 if c is None else np.einsum("...i,...i->...", u, c)


def _full(v, shape):
    return np.broadcast_to(np.asarray(v, float), shape).copy()


def assemble_partials(p: Pieces, geom: GeometryEval, u, rho) -> DensityPartials:
    """Combine template pieces into the full partial-derivative table."""
    u = np.asarray(u, float)
    rho = np.asarray(rho, float)
    batch = rho.shape
    n = u.shape[-1]
    g = geom.g
    ub = np.einsum("...ij,...j->...i", g, u)
    usq = np.einsum("...i,...i->...", u, ub)

    a = p.a or ScalarPiece(0.0)
    A = p.A or KineticPiece(0.0)
    B = p.B or ThermoPiece(0.0)
    c = p.c

    vec0 = np.zeros(batch + (n,))
    mat0 = np.zeros(batch + (n, n))

    cv = c.value if c is not None else None
    T = rho * a.value + rho * _dot(u, cv) + 0.5 * A.value * rho * usq + B.value
    T_t = rho * a.t + rho * _dot(u, c and c.t) + 0.5 * A.t * rho * usq + B.t
    T_rho = a.value + _dot(u, cv) + 0.5 * A.value * usq + B.rho
    T_S = rho * a.S + rho * _dot(u, c and c.S) + 0.5 * A.S * rho * usq + B.S
    TS_over_rho = a.S + _dot(u, c and c.S) + 0.5 * A.S * usq + B.S_over_rho

    Aval = _full(A.value, batch)[..., None]
    AS = _full(A.S, batch)[..., None]
    At = _full(A.t, batch)[..., None]
    cvec = cv if cv is not None else vec0
    cS = c.S if (c is not None and c.S is not None) else vec0
    ct = c.t if (c is not None and c.t is not None) else vec0
    Tu_over_rho = cvec + Aval * ub
    T_u = rho[..., None] * Tu_over_rho
    T_uu = (Aval[..., 0] * rho)[..., None, None] * g
    T_urho = Tu_over_rho
    T_uS = rho[..., None] * (cS + AS * ub)
    T_tu = rho[..., None] * (ct + At * ub)

    T_rhorho = B.rhorho
    T_rhoS = a.S + _dot(u, c and c.S) + 0.5 * A.S * usq + B.rhoS
    T_SS = rho * a.SS + rho * _dot(u, c and c.SS) + 0.5 * A.SS * rho * usq + B.SS
    T_trho = a.t + _dot(u, c and c.t) + 0.5 * A.t * usq + B.trho
    T_tS = rho * a.tS + rho * _dot(u, c and c.tS) + 0.5 * A.tS * rho * usq + B.tS

    # explicit covariant x-derivatives
    grad_a = a.grad if a.grad is not None else vec0
    grad_aS = a.grad_S if a.grad_S is not None else vec0
    u_gradc = np.einsum("...j,...kj->...k", u, c.grad) if (c is not None and c.grad is not None) else vec0
    u_gradcS = np.einsum("...j,...kj->...k", u, c.grad_S) if (c is not None and c.grad_S is not None) else vec0
    grad_T_rho = grad_a + u_gradc
    grad_T = rho[..., None] * grad_T_rho
    grad_T_S = rho[..., None] * (grad_aS + u_gradcS)
    grad_T_u = rho[..., None, None] * c.grad if (c is not None and c.grad is not None) else mat0

    return DensityPartials(
        T=_full(T, batch),
        T_t=_full(T_t, batch),
        T_rho=_full(T_rho, batch),
        T_S=_full(T_S, batch),
        T_u=_full(T_u, batch + (n,)),
        T_trho=_full(T_trho, batch),
        T_tS=_full(T_tS, batch),
        T_tu=_full(T_tu, batch + (n,)),
        T_rhorho=_full(T_rhorho, batch),
        T_rhoS=_full(T_rhoS, batch),
        T_SS=_full(T_SS, batch),
        T_urho=_full(T_urho, batch + (n,)),
        T_uS=_full(T_uS, batch + (n,)),
        T_uu=_full(T_uu, batch + (n, n)),
        grad_T=_full(grad_T, batch + (n,)),
        grad_T_rho=_full(grad_T_rho, batch + (n,)),
        grad_T_S=_full(grad_T_S, batch + (n,)),
        grad_T_u=_full(grad_T_u, batch + (n, n)),
        Tu_over_rho=_full(Tu_over_rho, batch + (n,)),
        TS_over_rho=_full(TS_over_rho, batch),
    )


def assemble_flux(fp: FluxPieces, geom: GeometryEval, u, rho) -> FluxPartials:
    u = np.asarray(u, float)
    rho = np.asarray(rho, float)
    batch = rho.shape
    n = u.shape[-1]
    ginv = geom.g_inv
    if fp.W is not None:
        Wup = np.einsum("...ij,...j->...i", ginv, fp.W)
        m = np.asarray(fp.m, float)
        Phi = Wup * m[..., None] + u * np.asarray(fp.At, float)[..., None]
        divW = np.einsum("...kj,...kj->...", ginv, fp.gradW)
        div = divW * m
        Phi_rho = Wup * np.asarray(fp.m_rho, float)[..., None] + u * np.asarray(fp.At_rho, float)[..., None]
        Phi_S = Wup * np.asarray(fp.m_S, float)[..., None] + u * np.asarray(fp.At_S, float)[..., None]
    else:
        Phi = u * np.asarray(fp.At, float)[..., None]
        div = 0.0
        Phi_rho = u * np.asarray(fp.At_rho, float)[..., None]
        Phi_S = u * np.asarray(fp.At_S, float)[..., None]
    Phi_u = np.asarray(fp.At, float)[..., None, None] * np.eye(n)
    return FluxPartials(
        Phi=_full(Phi, batch + (n,)),
        div_explicit=_full(div, batch),
        Phi_u=_full(Phi_u, batch + (n, n)),
        Phi_rho=_full(Phi_rho, batch + (n,)),
        Phi_S=_full(Phi_S, batch + (n,)),
    )


# ---------------------------------------------------------------------------
# density expressions


class DensityExpression:
    """Anything that can produce a ``DensityPartials`` table."""

    label: str = "T"

    def partials(self, t, x, geom, chart, u, rho, S, eos) -> DensityPartials:
        raise NotImplementedError


class FluxExpression:
    label: str = "Phi"

    def partials(self, t, x, geom, chart, u, rho, S, eos) -> FluxPartials:
        raise NotImplementedError


def _context(t, x, geom, chart, rho, S, eos) -> Context:
    rho = np.asarray(rho, float)
    S = np.asarray(S, float)
    t = np.broadcast_to(np.asarray(t, float), rho.shape)
    return Context(t=t, x=np.asarray(x, float), geom=geom, chart=chart, rho=rho, S=S, eos=eos)


@dataclass
class TemplateDensity(DensityExpression):
    """A density given by a pieces function ``Context -> Pieces``."""

    pieces_fn: Callable[[Context], Pieces]
    label: str = "T"

    def pieces(self, ctx: Context) -> Pieces:
        return self.pieces_fn(ctx)

    def partials(self, t, x, geom, chart, u, rho, S, eos) -> DensityPartials:
        ctx = _context(t, x, geom, chart, rho, S, eos)
        return assemble_partials(self.pieces_fn(ctx), geom, u, ctx.rho)

    def map_pieces(self, fn: Callable[[Pieces], Pieces], label: Optional[str] = None) -> "TemplateDensity":
        base = self.pieces_fn
        return TemplateDensity(lambda ctx: fn(base(ctx)), label or f"{self.label}'")


@dataclass
class TemplateFlux(FluxExpression):
    pieces_fn: Callable[[Context], FluxPieces]
    label: str = "Phi"

    def partials(self, t, x, geom, chart, u, rho, S, eos) -> FluxPartials:
        ctx = _context(t, x, geom, chart, rho, S, eos)
        return assemble_flux(self.pieces_fn(ctx), geom, u, ctx.rho)

    def scaled(self, factor: float) -> "TemplateFlux":
        base = self.pieces_fn

        def fn(ctx):
            fp = base(ctx)
            return replace(
                fp,
                m=factor * np.asarray(fp.m),
                m_rho=factor * np.asarray(fp.m_rho),
                m_S=factor * np.asarray(fp.m_S),
                At=factor * np.asarray(fp.At),
                At_rho=factor * np.asarray(fp.At_rho),
                At_S=factor * np.asarray(fp.At_S),
            )

        return TemplateFlux(fn, f"{factor:g}*{self.label}")


def scale_thermo(expr: TemplateDensity, factor: float) -> TemplateDensity:
    """Multiply the ``B`` piece by ``factor`` (e.g. replace e by 1.01 e in the energy)."""

    def fn(p: Pieces) -> Pieces:
        if p.B is None:
            return p
        B = p.B
        scaled = ThermoPiece(**{k: factor * np.asarray(getattr(B, k)) for k in B.__dataclass_fields__})
        return replace(p, B=scaled)

    return expr.map_pieces(fn, f"{expr.label}[B*{factor:g}]")


# ---------------------------------------------------------------------------
# helper evaluations shared by variants


def _vector_data(ctx: Context, v: VectorFieldSpec):
    """``(v_flat, nabla_k v_j)`` at the context points."""
    val = v.value(ctx.chart, ctx.x)
    der = v.deriv(ctx.chart, ctx.x)
    cov = covariant_derivative_vector(ctx.geom, val, der).grad  # [k, m] = nabla_k v^m
    flat = np.einsum("...jm,...m->...j", ctx.geom.g, val)
    grad_flat = np.einsum("...km,...mj->...kj", cov, ctx.geom.g)
    return flat, grad_flat


def _potential_data(ctx: Context, psi: ScalarFieldSpec):
    """``(psi, d psi, nabla nabla psi)`` at the context points."""
    val = psi.value(ctx.x)
    d = psi.grad(ctx.x)
    hess = covariant_hessian_scalar(ctx.geom, d, psi.hess(ctx.x))
    return val, d, hess


def entropy_flux_function(f: Expr, eos: Eos, S, rho_ref: float = RHO_REF):
    """``h(S) = int_0^S f(s) P_S(rho_ref, s) ds`` and ``h'(S)``, ``h''(S)``.

    For isobaric-entropy laws P_S does not depend on rho, so the reference
    density is immaterial there.
    """
    S = np.asarray(S, float)

    def integrand(s):
        return f(s) * eos.pressure_data(np.full_like(s, rho_ref), s).P_S

    h = gauss_integral(integrand, np.zeros_like(S), S)
    d = eos.pressure_data(np.full_like(S, rho_ref), S)
    h1 = f(S) * d.P_S
    h2 = f.deriv(S, 1) * d.P_S + f(S) * d.P_SS
    return h, h1, h2


def _pressure_thermo(ctx: Context, coeff: float, coeff_t: float) -> ThermoPiece:
    """``B = coeff * n P`` with time derivative ``coeff_t * n P``."""
    d = ctx.eos.pressure_data(ctx.rho, ctx.S)
    n = ctx.n
    k, kt = coeff * n, coeff_t * n
    return ThermoPiece(
        value=k * d.P,
        t=kt * d.P,
        rho=k * d.P_rho,
        S=k * d.P_S,
        rhorho=k * d.P_rhorho,
        rhoS=k * d.P_rhoS,
        SS=k * d.P_SS,
        trho=kt * d.P_rho,
        tS=kt * d.P_S,
        S_over_rho=k * d.P_S / ctx.rho,
    )


def _homothety_flux_weight(ctx: Context):
    """``q = P + rho e - n P / 2`` and its rho, S partials.

    The homothety energies carry ``n P`` where the energy flux carries ``rho e``;
    ``q`` is what is left over in the moving flux.  It equals ``P`` when the
    pressure has no additive offset.
    """
    eos, rho, S, n = ctx.eos, ctx.rho, ctx.S, ctx.n
    d = eos.pressure_data(rho, S)
    e = eos.internal_energy(rho, S)
    eS = eos.energy_entropy_derivative(rho, S)
    q = d.P + rho * e - 0.5 * n * d.P
    q_rho = d.P_rho + e + d.P / rho - 0.5 * n * d.P_rho
    q_S = d.P_S + rho * eS - 0.5 * n * d.P_S
    return q, q_rho, q_S


# ---------------------------------------------------------------------------
# the nine classified variants


@dataclass(frozen=True)
class DensitySpec:
    """Base class of the classified densities."""

    variant = "Density"

    @property
    def label(self) -> str:
        return self.variant

    def pieces(self, ctx: Context) -> Pieces:
        raise NotImplementedError

    def flux_pieces(self, ctx: Context) -> FluxPieces:
        return FluxPieces()

    def expression(self) -> TemplateDensity:
        return TemplateDensity(self.pieces, self.label)

    def flux(self) -> TemplateFlux:
        return TemplateFlux(self.flux_pieces, f"Phi[{self.label}]")

    def violations(self, chart: ChartMetric, eos: Eos, points: np.ndarray, tol: float) -> list:
        """Human-readable list of violated classification conditions."""
        return []

    def to_config(self) -> dict:
        return {"variant": self.variant}


def _killing_violation(name, chart, v, points, tol):
    r = float(np.max(np.abs(killing_residual(chart, v, points))))
    if r > tol:
        return [f"{name} requires a Killing vector field (L_zeta g = 0); max |L_zeta g| = {r:.3g} on chart '{chart.name}'"]
    return []


def _homothety_violation(name, chart, v, lam, points, tol):
    r = float(np.max(np.abs(homothety_residual(chart, v, lam, points))))
    if r > tol:
        return [
            f"{name} requires a homothety with L_xi g = lambda g (lambda = {lam:g}); "
            f"max residual {r:.3g} on chart '{chart.name}'"
        ]
    return []


def _similarity_eos_violation(name, eos: Eos, n: int):
    if eos.admits_similarity_energy(n):
        return []
    form = eos.polytropic_form()
    detail = "not of polytropic form" if form is None else (
        f"exponent {form[1]:g}" if not eos.is_polytropic_special(n) else "entropy-dependent offset"
    )
    return [
        f"{name} requires a polytropic equation of state P = sigma(S) rho^(1+2/n) + const with "
        f"1+2/n = {special_exponent(n):g} for n = {n} ({eos.variant}: {detail})"
    ]


def _isobaric_violation(name, eos: Eos):
    if eos.is_isobaric_entropy():
        return []
    return [f"{name} requires an isobaric-entropy equation of state P = kappa(S) with P_rho = 0 ({eos.variant} given)"]


@dataclass(frozen=True)
class Mass(DensitySpec):
    variant = "Mass"

    def pieces(self, ctx):
        return Pieces(a=ScalarPiece(1.0))


@dataclass(frozen=True)
class VolumetricEntropy(DensitySpec):
    f: Expr = field(default_factory=lambda: expr_from_config([0.0, 1.0]))
    variant = "VolumetricEntropy"

    def pieces(self, ctx):
        f = self.f
        S = ctx.S
        return Pieces(a=ScalarPiece(f(S), S=f.deriv(S, 1), SS=f.deriv(S, 2)))

    def to_config(self):
        return {"variant": self.variant, "f": self.f.to_config()}


@dataclass(frozen=True)
class Energy(DensitySpec):
    variant = "Energy"

    def pieces(self, ctx):
        eos, rho, S = ctx.eos, ctx.rho, ctx.S
        d = eos.pressure_data(rho, S)
        e = eos.internal_energy(rho, S)
        eS = eos.energy_entropy_derivative(rho, S)
        eSS = eos.energy_entropy_second_derivative(rho, S)
        B = ThermoPiece(
            value=rho * e,
            rho=e + d.P / rho,
            S=rho * eS,
            rhorho=d.P_rho / rho,
            rhoS=eS + d.P_S / rho,
            SS=rho * eSS,
            S_over_rho=eS,
        )
        return Pieces(A=KineticPiece(1.0), B=B)

    def flux_pieces(self, ctx):
        d = ctx.eos.pressure_data(ctx.rho, ctx.S)
        return FluxPieces(At=d.P, At_rho=d.P_rho, At_S=d.P_S)


@dataclass(frozen=True)
class Momentum(DensitySpec):
    zeta: VectorFieldSpec = None
    variant = "Momentum"

    def pieces(self, ctx):
        flat, grad = _vector_data(ctx, self.zeta)
        return Pieces(c=CovectorPiece(flat, grad=grad))

    def flux_pieces(self, ctx):
        flat, grad = _vector_data(ctx, self.zeta)
        d = ctx.eos.pressure_data(ctx.rho, ctx.S)
        return FluxPieces(W=flat, gradW=grad, m=d.P, m_rho=d.P_rho, m_S=d.P_S)

    def violations(self, chart, eos, points, tol):
        return _killing_violation(self.variant, chart, self.zeta, points, tol)

    @property
    def label(self):
        return f"{self.variant}({self.zeta.label})"


@dataclass(frozen=True)
class GalileanMomentum(DensitySpec):
    psi: ScalarFieldSpec = None
    variant = "GalileanMomentum"

    def pieces(self, ctx):
        val, d, hess = _potential_data(ctx, self.psi)
        t = ctx.t[..., None]
        c = CovectorPiece(-t * d, t=-d, grad=-t[..., None] * hess, grad_t=-hess)
        return Pieces(a=ScalarPiece(val, grad=d), c=c)

    def flux_pieces(self, ctx):
        _, d, hess = _potential_data(ctx, self.psi)
        p = ctx.eos.pressure_data(ctx.rho, ctx.S)
        t = ctx.t[..., None]
        return FluxPieces(W=-t * d, gradW=-t[..., None] * hess, m=p.P, m_rho=p.P_rho, m_S=p.P_S)

    def violations(self, chart, eos, points, tol):
        grad = gradient_field(self.psi)
        out = _killing_violation(self.variant, chart, grad, points, tol)
        r = float(np.max(np.abs(curl_free_residual(chart, grad, points))))
        if r > tol:
            out.append(f"{self.variant} requires a curl-free Killing field; max curl {r:.3g}")
        return out

    @property
    def label(self):
        return f"{self.variant}({self.psi.label})"


@dataclass(frozen=True)
class SimilarityEnergy(DensitySpec):
    """``rho g(u, xi) - 1/2 lam t (rho |u|^2 + n P)``."""

    xi: VectorFieldSpec = None
    lam: float = 2.0
    variant = "SimilarityEnergy"

    def pieces(self, ctx):
        flat, grad = _vector_data(ctx, self.xi)
        lam = self.lam
        A = KineticPiece(-lam * ctx.t, t=-lam * np.ones_like(ctx.t))
        B = _pressure_thermo(ctx, -0.5 * lam * ctx.t, -0.5 * lam)
        return Pieces(c=CovectorPiece(flat, grad=grad), A=A, B=B)

    def flux_pieces(self, ctx):
        flat, grad = _vector_data(ctx, self.xi)
        d = ctx.eos.pressure_data(ctx.rho, ctx.S)
        q, q_rho, q_S = _homothety_flux_weight(ctx)
        k = -self.lam * ctx.t
        return FluxPieces(W=flat, gradW=grad, m=d.P, m_rho=d.P_rho, m_S=d.P_S, At=k * q, At_rho=k * q_rho, At_S=k * q_S)

    def violations(self, chart, eos, points, tol):
        return _homothety_violation(self.variant, chart, self.xi, self.lam, points, tol) + _similarity_eos_violation(
            self.variant, eos, chart.dim
        )

    @property
    def label(self):
        return f"{self.variant}({self.xi.label}, lam={self.lam:g})"


@dataclass(frozen=True)
class GalileanEnergy(DensitySpec):
    """``rho (theta - t u.grad theta) + 1/4 lam t^2 (rho |u|^2 + n P)``."""

    theta: ScalarFieldSpec = None
    lam: float = 2.0
    variant = "GalileanEnergy"

    def pieces(self, ctx):
        val, d, hess = _potential_data(ctx, self.theta)
        t = ctx.t
        lam = self.lam
        a = ScalarPiece(val, grad=d)
        c = CovectorPiece(-t[..., None] * d, t=-d, grad=-t[..., None, None] * hess, grad_t=-hess)
        A = KineticPiece(0.5 * lam * t * t, t=lam * t)
        B = _pressure_thermo(ctx, 0.25 * lam * t * t, 0.5 * lam * t)
        return Pieces(a=a, c=c, A=A, B=B)

    def flux_pieces(self, ctx):
        _, d, hess = _potential_data(ctx, self.theta)
        p = ctx.eos.pressure_data(ctx.rho, ctx.S)
        q, q_rho, q_S = _homothety_flux_weight(ctx)
        t = ctx.t
        k = 0.5 * self.lam * t * t
        return FluxPieces(
            W=-t[..., None] * d,
            gradW=-t[..., None, None] * hess,
            m=p.P,
            m_rho=p.P_rho,
            m_S=p.P_S,
            At=k * q,
            At_rho=k * q_rho,
            At_S=k * q_S,
        )

    def violations(self, chart, eos, points, tol):
        grad = gradient_field(self.theta)
        return _homothety_violation(self.variant, chart, grad, self.lam, points, tol) + _similarity_eos_violation(
            self.variant, eos, chart.dim
        )

    @property
    def label(self):
        return f"{self.variant}({self.theta.label}, lam={self.lam:g})"


@dataclass(frozen=True)
class NonIsentropicMomentum(DensitySpec):
    zeta: VectorFieldSpec = None
    f: Expr = field(default_factory=lambda: expr_from_config([0.0, 1.0]))
    variant = "NonIsentropicMomentum"

    def pieces(self, ctx):
        flat, grad = _vector_data(ctx, self.zeta)
        S = ctx.S[..., None]
        f0, f1, f2 = self.f(S), self.f.deriv(S, 1), self.f.deriv(S, 2)
        c = CovectorPiece(f0 * flat, S=f1 * flat, SS=f2 * flat, grad=f0[..., None] * grad, grad_S=f1[..., None] * grad)
        return Pieces(c=c)

    def flux_pieces(self, ctx):
        flat, grad = _vector_data(ctx, self.zeta)
        h, h1, _ = entropy_flux_function(self.f, ctx.eos, ctx.S)
        return FluxPieces(W=flat, gradW=grad, m=h, m_S=h1)

    def violations(self, chart, eos, points, tol):
        return _killing_violation(self.variant, chart, self.zeta, points, tol) + _isobaric_violation(self.variant, eos)

    def to_config(self):
        return {"variant": self.variant, "f": self.f.to_config()}

    @property
    def label(self):
        return f"{self.variant}({self.zeta.label})"


@dataclass(frozen=True)
class NonIsentropicEnergy(DensitySpec):
    """``1/2 rho |u|^2 f(S) - h(S)`` with ``h = int f P_S dS``."""

    f: Expr = field(default_factory=lambda: expr_from_config([0.0, 1.0]))
    variant = "NonIsentropicEnergy"

    def pieces(self, ctx):
        S = ctx.S
        h, h1, h2 = entropy_flux_function(self.f, ctx.eos, S)
        A = KineticPiece(self.f(S), S=self.f.deriv(S, 1), SS=self.f.deriv(S, 2))
        B = ThermoPiece(value=-h, S=-h1, SS=-h2, S_over_rho=-h1 / ctx.rho)
        return Pieces(A=A, B=B)

    def flux_pieces(self, ctx):
        h, h1, _ = entropy_flux_function(self.f, ctx.eos, ctx.S)
        return FluxPieces(At=h, At_S=h1)

    def violations(self, chart, eos, points, tol):
        return _isobaric_violation(self.variant, eos)

    def to_config(self):
        return {"variant": self.variant, "f": self.f.to_config()}


VARIANTS = {
    cls.variant: cls
    for cls in (
        Mass,
        VolumetricEntropy,
        Energy,
        Momentum,
        GalileanMomentum,
        SimilarityEnergy,
        GalileanEnergy,
        NonIsentropicMomentum,
        NonIsentropicEnergy,
    )
}

ZERO_FLUX_VARIANTS = ("Mass", "VolumetricEntropy")


def validate_spec(spec: DensitySpec, chart: ChartMetric, eos: Eos, points=None, tol: float = 1e-8, seed: int = 0):
    """Raise ``ClassificationError`` if the density cannot be conserved for this chart and EOS."""
    if points is None:
        from ..manifold.builtin import interior_sample

        points = interior_sample(chart, 16, np.random.default_rng(seed), margin=0.05)
    problems = spec.violations(chart, eos, np.asarray(points, float), tol)
    if problems:
        raise ClassificationError("; ".join(problems))


def density_from_config(cfg: dict, n: int) -> DensitySpec:
    """Build a classified density from a scenario table such as
    ``{variant = "Momentum", zeta = {kind = "translation", axis = 0}}``."""
    from ..manifold.fields import scalar_field_from_config, vector_field_from_config

    cfg = dict(cfg)
    name = cfg.pop("variant", None)
    if name not in VARIANTS:
        raise ValueError(f"unknown density variant {name!r}; known: {sorted(VARIANTS)}")
    kw = {}
    for key, value in cfg.items():
        if key in ("zeta", "xi"):
            kw[key] = vector_field_from_config(value, n)
        elif key in ("psi", "theta"):
            kw[key] = scalar_field_from_config(value, n)
        elif key == "f":
            kw[key] = expr_from_config(value)
        elif key == "lam":
            kw[key] = float(value)
        else:
            raise ValueError(f"density {name} has no parameter {key!r}")
    try:
        return VARIANTS[name](**kw)
    except TypeError as exc:
        raise ValueError(f"bad parameters for density {name}: {exc}") from None
