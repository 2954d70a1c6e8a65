import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidlaws.errors import SeriesError, StateError
from fluidlaws.fluid import Grid, Poly, barotropic, general_eos
from fluidlaws.fluid.expressions import ConstantField, Exp
from fluidlaws.fluid.expressions import ModeField as Mode
from fluidlaws.fluid.expressions import SumField
from fluidlaws.fluid.state import FluidState, state_from_fields, uniform_state
from fluidlaws.hamiltonian import (
    SymmetryGenerator,
    VariationalTriple,
    antisymmetry_defect,
    apply_hamiltonian,
    density_generator,
    hamiltonian_flow_residual,
    symmetry_determining_residual,
    symmetry_from_density,
    variational_triple,
)
from fluidlaws.integrals import densities as dn
from fluidlaws.manifold import fields as fl
from fluidlaws.manifold import make_chart
from fluidlaws.solver import SolverConfig, euler_rhs, simulate

BARO = barotropic([(1.0, 1.4)])
GEN = general_eos([(Exp(1.0, 0.5, 0.0), 1.4), (Poly((0.3, 0.2)), 2.5)])


def smooth_state(chart, N, entropy=False):
    u = [
        SumField((Mode(0.2, (0, 1)), Mode(0.1, (1, 1), 0.3))),
        SumField((Mode(0.15, (1, 0), cos=True), Mode(0.05, (1, -1), 0.2))),
    ]
    rho = SumField((ConstantField(1.0), Mode(0.2, (1, 0), 0.5), Mode(0.1, (0, 1), cos=True)))
    S = Mode(0.3, (1, 1)) if entropy else ConstantField(0.0)
    return state_from_fields(Grid(chart, (N, N)), u, rho, S)


def random_state(chart, N, rng):
    g = Grid(chart, (N, N))
    x, y = g.coords[..., 0], g.coords[..., 1]
    c = rng.uniform(-0.3, 0.3, 6)
    u = np.stack([c[0] * np.sin(y + c[1]), c[2] * np.cos(x - c[3])], -1)
    rho = 1.0 + 0.3 * np.cos(x + c[4]) * np.sin(y)
    S = c[5] * np.sin(x + 2 * y)
    return FluidState(g, u, rho, S, float(rng.uniform(0, 2)))


@pytest.fixture(scope="module")
def m1():
    return make_chart("M1")


@pytest.fixture(scope="module")
def m2():
    return make_chart("M2")


# ---- operator on simple triples


def test_zero_triple_maps_to_zero(m2):
    s = smooth_state(m2, 32, entropy=True)
    z = np.zeros(s.rho.shape)
    out = apply_hamiltonian(VariationalTriple(np.zeros_like(s.u), z, z), s)
    assert not (np.any(out.u) or np.any(out.rho) or np.any(out.S))


def test_constant_rho_slot_maps_to_zero(m2):
    s = smooth_state(m2, 32, entropy=True)
    z = np.zeros(s.rho.shape)
    out = apply_hamiltonian(VariationalTriple(np.zeros_like(s.u), z + 2.5, z), s)
    assert np.max(np.abs(out.u)) <= 1e-12
    assert not np.any(out.rho) and not np.any(out.S)


def test_nonpositive_density_refused(m1):
    s = smooth_state(m1, 16)
    z = np.zeros(s.rho.shape)
    with pytest.raises(StateError):
        apply_hamiltonian(VariationalTriple(np.zeros_like(s.u), z, z), s.with_fields(rho=-s.rho))


# ---- variational triples


def test_mass_triple(m2):
    s = smooth_state(m2, 16, entropy=True)
    t = variational_triple(dn.Mass(), s, GEN)
    assert np.all(t.a == 0) and np.all(t.b == 1) and np.all(t.c == 0)


def test_energy_triple(m2):
    s = smooth_state(m2, 16, entropy=True)
    t = variational_triple(dn.Energy(), s, GEN)
    g = s.grid.geometry.g
    ub = np.einsum("...ij,...j->...i", g, s.u)
    usq = np.einsum("...i,...i->...", s.u, ub)
    P = GEN.pressure(s.rho, s.S)[0]
    e = GEN.internal_energy(s.rho, s.S)
    np.testing.assert_allclose(t.a, s.rho[..., None] * ub, rtol=1e-12, atol=1e-14)
    # rho e_rho = P / rho
    np.testing.assert_allclose(t.b, 0.5 * usq + e + P / s.rho, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(t.c, s.rho * GEN.energy_entropy_derivative(s.rho, s.S), rtol=1e-12, atol=1e-14)


def test_volumetric_entropy_triple(m1):
    s = smooth_state(m1, 16, entropy=True)
    f = Poly((0.2, 1.0, -0.5))
    t = variational_triple(dn.VolumetricEntropy(f), s, GEN)
    assert np.all(t.a == 0)
    np.testing.assert_allclose(t.b, 0.2 + s.S - 0.5 * s.S**2, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(t.c, s.rho * (1.0 - s.S), rtol=1e-12, atol=1e-14)


# ---- energy flow


def test_uniform_state_flow_residual_vanishes(m1, m2):
    moving = uniform_state(Grid(m1, (24, 24)), u=[0.3, -0.4], rho=1.3, S=0.2)
    assert hamiltonian_flow_residual(moving, GEN) <= 1e-14
    still = uniform_state(Grid(m2, (24, 24)), rho=1.3, S=0.2)
    assert hamiltonian_flow_residual(still, GEN) <= 1e-14


@pytest.mark.parametrize("chart_name", ["M1", "M2"])
def test_flow_residual_second_order(chart_name):
    ch = make_chart(chart_name)
    r = [hamiltonian_flow_residual(smooth_state(ch, N), BARO) for N in (32, 64, 128)]
    assert r[0] / r[1] >= 3.5 and r[1] / r[2] >= 3.5
    assert np.log2(r[1] / r[2]) >= 1.9


def test_one_mode_state_matches_hand_computed_rates(m1):
    # u = (a sin y, 0), rho = 1 + B cos x, P = rho^gamma
    K, gam, a, B = 1.0, 1.4, 0.3, 0.2
    g = Grid(m1, (256, 256))
    x, y = g.coords[..., 0], g.coords[..., 1]
    rho = 1 + B * np.cos(x)
    s = FluidState(g, np.stack([a * np.sin(y), np.zeros_like(x)], -1), rho, np.zeros_like(x), 0.0)
    out = apply_hamiltonian(variational_triple(dn.Energy(), s, barotropic([(K, gam)])), s, order=4)
    u_t = K * gam * rho ** (gam - 2) * B * np.sin(x)
    rho_t = a * np.sin(y) * B * np.sin(x)
    assert np.max(np.abs(out.u[..., 0] - u_t)) <= 1e-8
    assert np.max(np.abs(out.u[..., 1])) <= 1e-8
    assert np.max(np.abs(out.rho - rho_t)) <= 1e-8
    assert not np.any(out.S)


# ---- symmetry generators


@settings(max_examples=50)
@given(seed=st.integers(0, 2**31 - 1), curved=st.booleans())
def test_casimirs_give_exactly_zero_generators(seed, curved):
    ch = make_chart("M2" if curved else "M1")
    s = random_state(ch, 16, np.random.default_rng(seed))
    assert symmetry_from_density(dn.Mass(), s, GEN).is_zero()
    assert symmetry_from_density(dn.VolumetricEntropy(Poly((0.1, 1.0, 0.4))), s, GEN).is_zero()


@pytest.mark.parametrize("chart_name", ["M1", "M2"])
def test_energy_generator_is_minus_time_derivative(chart_name):
    ch = make_chart(chart_name)
    err = []
    for N in (32, 64, 128):
        s = smooth_state(ch, N, entropy=True)
        gen = symmetry_from_density(dn.Energy(), s, GEN)
        rhs = euler_rhs(s, GEN)
        assert gen.is_finite()
        err.append(max(np.max(np.abs(gen.u + rhs.u)), np.max(np.abs(gen.rho + rhs.rho)), np.max(np.abs(gen.S + rhs.S))))
    assert err[0] / err[1] >= 3.5 and err[1] / err[2] >= 3.5


def _symmetry_series(chart, spec=None, generator=None):
    out = []
    for N, dt in ((32, 0.01), (64, 0.005), (128, 0.0025)):
        snaps = list(simulate(smooth_state(chart, N, entropy=True), GEN, SolverConfig(dt=dt, t_end=0.1)))
        out.append(symmetry_determining_residual(generator or density_generator(spec, GEN), snaps, GEN))
    return out


def test_time_translation_symmetry_converges(m1):
    r = _symmetry_series(m1, dn.Energy())
    assert r[0] / r[1] >= 3.5 and r[1] / r[2] >= 3.5


def test_killing_momentum_symmetry_converges_on_curved_torus(m2):
    zeta = fl.catalogued_isometries(m2)[0]
    r = _symmetry_series(m2, dn.Momentum(zeta))
    assert r[0] / r[1] >= 3.5 and r[1] / r[2] >= 3.5


def test_non_symmetry_does_not_converge(m1):
    def fake(state):
        x = state.grid.coords[..., 0]
        return SymmetryGenerator(np.zeros_like(state.u), np.cos(x), np.zeros_like(x), "fake")

    r = _symmetry_series(m1, generator=fake)
    assert r[0] > 1e-2
    assert r[1] >= 0.9 * r[0] and r[2] >= 0.9 * r[1]


def test_symmetry_residual_needs_three_uniform_snapshots(m1):
    s = smooth_state(m1, 16)
    gen = density_generator(dn.Energy(), BARO)
    with pytest.raises(SeriesError):
        symmetry_determining_residual(gen, [s, s.with_fields(t=0.1)], BARO)
    with pytest.raises(SeriesError):
        symmetry_determining_residual(gen, [s, s.with_fields(t=0.1), s.with_fields(t=0.3)], BARO)


# ---- antisymmetry


@pytest.mark.parametrize("chart_name", ["M1", "M2"])
def test_pairing_is_antisymmetric_for_arbitrary_triples(chart_name):
    ch = make_chart(chart_name)
    s = smooth_state(ch, 48, entropy=True)
    x, y = s.grid.coords[..., 0], s.grid.coords[..., 1]
    A = VariationalTriple(np.stack([np.sin(x), np.cos(2 * y)], -1), np.cos(x + y), np.sin(y))
    B = VariationalTriple(np.stack([np.cos(x - y), 0.5 * np.sin(x)], -1), np.sin(2 * x), np.cos(x))
    p = antisymmetry_defect(A, B, s)
    assert abs(p.lhs) > 1e-3
    assert abs(p.lhs + p.rhs) <= 1e-10 * p.scale


def test_energy_and_momentum_pairing(m1):
    s = smooth_state(m1, 32, entropy=True)
    A = variational_triple(dn.Energy(), s, GEN)
    B = variational_triple(dn.Momentum(fl.translation(2, 0)), s, GEN)
    p = antisymmetry_defect(A, B, s)
    assert abs(p.lhs + p.rhs) <= 1e-10 * p.scale
