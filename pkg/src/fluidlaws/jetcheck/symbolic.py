"""Symbolic jet calculus used as an independent oracle.

A :class:`SymbolicJetSpace` carries coordinate jet symbols up to second order
on one chart.  Densities are written as sympy expressions in those symbols.
The covariant Euler operator and the on-solution time derivative are then
formed symbolically and compiled to numpy, so the closed-form residuals in
:mod:`fluidlaws.jetcheck.residuals` can be cross-checked without sharing code.
"""

from __future__ import annotations

from functools import cached_property
from typing import List, Optional, Sequence

import numpy as np
import sympy as sp

from ..fluid.eos import RHO_REF, Eos
from ..integrals import densities as dn
from ..manifold.chart import ChartMetric
from .jets import JetPoint
from .residuals import EulerResiduals


class SymbolicJetSpace:
    """Coordinate jet symbols ``x, t, u^i, rho, S`` with derivatives up to order two.

    ``du[j][i]`` is ``partial_j u^i``; ``hu[j][k][i]`` is ``partial_j partial_k u^i``
    (the same symbol for ``(j, k)`` and ``(k, j)``).
    """

    def __init__(self, chart: ChartMetric):
        if chart.sympy_metric is None:
            raise ValueError(f"chart '{chart.name}' has no symbolic metric")
        n = chart.dim
        self.chart = chart
        self.n = n
        self.t = sp.Symbol("t", real=True)
        self.xs = sp.symbols(f"x0:{n}", real=True)
        self.u = sp.symbols(f"u0:{n}", real=True)
        self.rho = sp.Symbol("rho", positive=True)
        self.S = sp.Symbol("S", real=True)
        self.du = [[sp.Symbol(f"u{i}_{j}", real=True) for i in range(n)] for j in range(n)]
        self.drho = [sp.Symbol(f"rho_{j}", real=True) for j in range(n)]
        self.dS = [sp.Symbol(f"S_{j}", real=True) for j in range(n)]

        def pair(a, b):
            return (a, b) if a <= b else (b, a)

        self.hu = [[[sp.Symbol("u{}_{}{}".format(i, *pair(j, k)), real=True) for i in range(n)] for k in range(n)] for j in range(n)]
        self.hrho = [[sp.Symbol("rho_{}{}".format(*pair(j, k)), real=True) for k in range(n)] for j in range(n)]
        self.hS = [[sp.Symbol("S_{}{}".format(*pair(j, k)), real=True) for k in range(n)] for j in range(n)]
        self.G = sp.Matrix(chart.sympy_metric(list(self.xs)))
        self.Ginv = sp.simplify(self.G.inv())
        self.sqrtg = sp.sqrt(sp.simplify(self.G.det()))

    # -- geometry -------------------------------------------------------------

    @cached_property
    def gamma(self):
        """``gamma[i][j][k] = Gamma^i_jk``."""
        n, G, Gi, xs = self.n, self.G, self.Ginv, self.xs
        return [
            [
                [
                    sp.simplify(
                        sum(
                            Gi[i, m] * (sp.diff(G[m, j], xs[k]) + sp.diff(G[m, k], xs[j]) - sp.diff(G[j, k], xs[m]))
                            for m in range(n)
                        )
                        / 2
                    )
                    for k in range(n)
                ]
                for j in range(n)
            ]
            for i in range(n)
        ]

    def inner(self, a: Sequence, b: Sequence):
        return sum(self.G[i, j] * a[i] * b[j] for i in range(self.n) for j in range(self.n))

    @property
    def speed_sq(self):
        return self.inner(self.u, self.u)

    # -- symbol groups ----------------------------------------------------------

    @property
    def fields(self) -> List[sp.Symbol]:
        return list(self.u) + [self.rho, self.S]

    def first(self, j: int) -> List[sp.Symbol]:
        """Derivatives ``partial_j`` of :attr:`fields` in the same order."""
        return list(self.du[j]) + [self.drho[j], self.dS[j]]

    def second(self, j: int, k: int) -> List[sp.Symbol]:
        return list(self.hu[j][k]) + [self.hrho[j][k], self.hS[j][k]]

    @cached_property
    def _second_set(self):
        return {s for j in range(self.n) for k in range(self.n) for s in self.second(j, k)}

    @cached_property
    def arguments(self) -> List[sp.Symbol]:
        n = self.n
        out = [self.t, *self.xs, *self.fields]
        for j in range(n):
            out += self.first(j)
        seen = set()
        for j in range(n):
            for k in range(j, n):
                for s in self.second(j, k):
                    if s not in seen:
                        seen.add(s)
                        out.append(s)
        return out

    # -- calculus ---------------------------------------------------------------

    def total_derivative(self, expr, j: int):
        """Coordinate total derivative ``D_j`` of a first-order expression."""
        if expr.free_symbols & self._second_set:
            raise ValueError("total derivative is only defined here for first-order expressions")
        out = sp.diff(expr, self.xs[j])
        for v, vj in zip(self.fields, self.first(j)):
            out += vj * sp.diff(expr, v)
        for k in range(self.n):
            for vk, vjk in zip(self.first(k), self.second(j, k)):
                out += vjk * sp.diff(expr, vk)
        return out

    def euler(self, F):
        """Covariant Euler operators ``(E_u (lower), E_rho, E_S)`` of a first-order density."""
        w = self.sqrtg * F
        out = []
        for a, v in enumerate(self.fields):
            e = sp.diff(w, v)
            for j in range(self.n):
                e -= self.total_derivative(sp.diff(w, self.first(j)[a]), j)
            out.append(e / self.sqrtg)
        n = self.n
        return out[:n], out[n], out[n + 1]

    def divergence(self, theta: Sequence):
        """Covariant total divergence ``(1/sqrt g) D_i (sqrt g Theta^i)``."""
        return sum(self.total_derivative(self.sqrtg * theta[i], i) for i in range(self.n)) / self.sqrtg

    def rates(self, eos: Eos):
        """Coordinate expressions of ``(u_t^i, rho_t, S_t)`` on solutions."""
        n, u, rho, S = self.n, self.u, self.rho, self.S
        P = eos.sympy_pressure(rho, S)
        P_rho, P_S = sp.diff(P, rho), sp.diff(P, S)
        G = self.gamma
        cov = [[self.du[j][i] + sum(G[i][j][k] * u[k] for k in range(n)) for i in range(n)] for j in range(n)]
        u_t = [
            -sum(u[j] * cov[j][i] for j in range(n))
            - sum(self.Ginv[i, j] * (P_rho * self.drho[j] + P_S * self.dS[j]) for j in range(n)) / rho
            for i in range(n)
        ]
        div_u = sum(cov[i][i] for i in range(n))
        rho_t = -(sum(u[i] * self.drho[i] for i in range(n)) + rho * div_u)
        S_t = -sum(u[i] * self.dS[i] for i in range(n))
        return u_t, rho_t, S_t

    def material_time_derivative(self, T, eos: Eos):
        """``D_t T`` for a kinematic density ``T(t, x, u, rho, S)``."""
        u_t, rho_t, S_t = self.rates(eos)
        out = sp.diff(T, self.t) + sp.diff(T, self.rho) * rho_t + sp.diff(T, self.S) * S_t
        return out + sum(sp.diff(T, self.u[i]) * u_t[i] for i in range(self.n))

    # -- numerics ---------------------------------------------------------------

    def compile(self, exprs):
        """Vectorised numpy callable of a list of expressions over :attr:`arguments`."""
        exprs = [sp.sympify(e) for e in exprs]
        fn = sp.lambdify(self.arguments, exprs, modules="numpy", cse=True)

        def call(jet: JetPoint) -> np.ndarray:
            args = self.jet_arguments(jet)
            vals = fn(*args)
            B = len(jet)
            return np.stack([np.broadcast_to(np.asarray(v, float), (B,)) for v in vals], axis=-1)

        return call

    def jet_arguments(self, jet: JetPoint) -> List[np.ndarray]:
        """Map a covariant jet batch to the coordinate jet values in :attr:`arguments` order."""
        n = self.n
        geo = jet.geom
        gam = geo.christoffel
        pu = jet.du - np.einsum("bijk,bk->bji", gam, jet.u)  # [b, j, i] = partial_j u^i
        vals = {self.t: jet.t, self.rho: jet.rho, self.S: jet.S}
        for k in range(n):
            vals[self.xs[k]] = jet.x[:, k]
            vals[self.u[k]] = jet.u[:, k]
        for j in range(n):
            vals[self.drho[j]] = jet.drho[:, j]
            vals[self.dS[j]] = jet.dS[:, j]
            for i in range(n):
                vals[self.du[j][i]] = pu[:, j, i]
        if jet.hu is not None:
            dgam = geo.dchristoffel  # [b, m, i, j, k] = partial_m Gamma^i_jk
            pp = (
                jet.hu
                - np.einsum("bijm,bkm->bjki", gam, jet.du)
                + np.einsum("bmjk,bmi->bjki", gam, jet.du)
                - np.einsum("bjikm,bm->bjki", dgam, jet.u)
                - np.einsum("bikm,bjm->bjki", gam, pu)
            )
            pp = 0.5 * (pp + pp.swapaxes(1, 2))
            prho = jet.hrho + np.einsum("bmjk,bm->bjk", gam, jet.drho)
            pS = jet.hS + np.einsum("bmjk,bm->bjk", gam, jet.dS)
            for j in range(n):
                for k in range(j, n):
                    vals[self.hrho[j][k]] = 0.5 * (prho[:, j, k] + prho[:, k, j])
                    vals[self.hS[j][k]] = 0.5 * (pS[:, j, k] + pS[:, k, j])
                    for i in range(n):
                        vals[self.hu[j][k][i]] = pp[:, j, k, i]
        zero = np.zeros(len(jet))
        return [vals.get(s, zero) for s in self.arguments]


class SymbolicDensity:
    """A density written as a sympy expression on a :class:`SymbolicJetSpace`."""

    def __init__(self, space: SymbolicJetSpace, expr, label: str = "T"):
        self.space = space
        self.expr = sp.sympify(expr)
        self.label = label

    @cached_property
    def _value_fn(self):
        return self.space.compile([self.expr])

    @cached_property
    def _euler_fn(self):
        E_u, E_rho, E_S = self.space.euler(self.expr)
        return self.space.compile([*E_u, E_rho, E_S])

    def value(self, jet: JetPoint) -> np.ndarray:
        return self._value_fn(jet)[:, 0]

    def euler(self, jet: JetPoint) -> EulerResiduals:
        out = self._euler_fn(jet)
        n = self.space.n
        return EulerResiduals(out[:, :n], out[:, n], out[:, n + 1])

    def time_derivative(self, eos: Eos) -> "SymbolicDensity":
        return SymbolicDensity(self.space, self.space.material_time_derivative(self.expr, eos), f"D_t[{self.label}]")


def _sym_expr(e, s):
    return e.sympy(s)


def symbolic_entropy_flux(f, eos: Eos, S):
    """``h(S) = int_0^S f(s) P_S(rho_ref, s) ds`` in closed form."""
    s = sp.Symbol("s", real=True)
    P = eos.sympy_pressure(sp.Float(RHO_REF), s)
    integrand = _sym_expr(f, s) * sp.diff(P, s)
    out = sp.integrate(integrand, (s, 0, S))
    if out.has(sp.Integral):
        raise ValueError("entropy flux function has no closed form for this f and EOS")
    return out


def symbolic_density(spec, space: SymbolicJetSpace, eos: Eos) -> SymbolicDensity:
    """Sympy form of a classified density on ``space``."""
    xs, t, rho, S, u = list(space.xs), space.t, space.rho, space.S, space.u
    n = space.n
    usq = space.speed_sq
    if isinstance(spec, dn.Mass):
        T = rho
    elif isinstance(spec, dn.VolumetricEntropy):
        T = rho * _sym_expr(spec.f, S)
    elif isinstance(spec, dn.Energy):
        T = rho * (usq / 2 + eos.sympy_energy(rho, S))
    elif isinstance(spec, dn.Momentum):
        T = rho * space.inner(u, spec.zeta.sympy_components(space.chart, xs))
    elif isinstance(spec, dn.GalileanMomentum):
        psi = spec.psi.sympy_fn(xs)
        T = rho * (psi - t * sum(u[i] * sp.diff(psi, xs[i]) for i in range(n)))
    elif isinstance(spec, dn.SimilarityEnergy):
        xi = spec.xi.sympy_components(space.chart, xs)
        lam = sp.Float(spec.lam)
        T = rho * space.inner(u, xi) - lam * t * (rho * usq + n * eos.sympy_pressure(rho, S)) / 2
    elif isinstance(spec, dn.GalileanEnergy):
        th = spec.theta.sympy_fn(xs)
        lam = sp.Float(spec.lam)
        T = rho * (th - t * sum(u[i] * sp.diff(th, xs[i]) for i in range(n)))
        T += lam * t**2 * (rho * usq + n * eos.sympy_pressure(rho, S)) / 4
    elif isinstance(spec, dn.NonIsentropicMomentum):
        T = rho * _sym_expr(spec.f, S) * space.inner(u, spec.zeta.sympy_components(space.chart, xs))
    elif isinstance(spec, dn.NonIsentropicEnergy):
        T = rho * usq * _sym_expr(spec.f, S) / 2 - symbolic_entropy_flux(spec.f, eos, S)
    else:
        raise TypeError(f"no symbolic form for {type(spec).__name__}")
    return SymbolicDensity(space, T, spec.label)


def symbolic_euler_residuals(spec, space: SymbolicJetSpace, eos: Eos, jet: JetPoint) -> EulerResiduals:
    """Euler operators of ``D_t T`` computed entirely symbolically."""
    return symbolic_density(spec, space, eos).time_derivative(eos).euler(jet)


def random_divergence(space: SymbolicJetSpace, rng: np.random.Generator, eos: Optional[Eos] = None) -> SymbolicDensity:
    """``nabla_i Theta^i`` for a random kinematic vector ``Theta`` built from simple monomials."""
    n = space.n
    xs, u, rho, S, t = space.xs, space.u, space.rho, space.S, space.t
    atoms = [
        rho,
        S,
        rho * S,
        rho**2,
        sp.exp(S / 2),
        rho * space.speed_sq,
        sp.sin(xs[0]),
        sp.cos(xs[-1]),
        t * rho,
    ]
    if eos is not None:
        atoms.append(eos.sympy_pressure(rho, S))
    theta = []
    for i in range(n):
        pick = rng.choice(len(atoms), size=2, replace=False)
        c = rng.normal(size=3)
        theta.append(
            sp.Float(c[0]) * atoms[pick[0]] * u[i]
            + sp.Float(c[1]) * atoms[pick[1]]
            + sp.Float(c[2]) * rho * u[(i + 1) % n]
        )
    return SymbolicDensity(space, space.divergence(theta), "div(Theta)")
