import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluidlaws.errors import CFLError, GeometryError, MarkerLostError
from fluidlaws.fluid import FluidState, Grid, barotropic, general_eos, Exp, state_from_fields, uniform_state
from fluidlaws.manifold import make_chart
from fluidlaws.solver import (
    CURVE,
    DOMAIN_INTERIOR,
    MarkerSet,
    SolverConfig,
    advect_markers,
    check_clearance,
    circle_curve,
    euler_rhs,
    grid_ops,
    interpolate,
    is_simple_polyline,
    partial,
    polygon_boundary,
    rectangle_domain,
    segment_curve,
    signed_area,
    simulate,
    stable_dt,
    step,
)

ISO = barotropic([(1.0, 1.0)])
GAS = barotropic([(1.0, 1.4)])


def _smooth(N, chart="M1"):
    grid = Grid(make_chart(chart), (N, N))
    x = grid.coords
    a, b = x[..., 0], x[..., 1]
    u = np.stack([0.5 + 0.3 * np.sin(b), 0.2 * np.cos(a)], -1)
    rho = 1 + 0.2 * np.cos(a) * np.sin(b)
    S = 0.3 * np.sin(a + 2 * b)
    return FluidState(grid, u, rho, S)


@pytest.mark.parametrize("order,expected", [(2, 4.0), (4, 16.0)])
def test_partial_convergence(order, expected):
    errs = []
    for N in (32, 64):
        x = 2 * np.pi * np.arange(N) / N
        errs.append(np.max(np.abs(partial(np.sin(x), 0, 2 * np.pi / N, order) - np.cos(x))))
    assert errs[0] / errs[1] == pytest.approx(expected, rel=0.05)


def test_uniform_state_is_equilibrium():
    st0 = uniform_state(Grid(make_chart("M1"), (16, 16)), u=[0.3, -0.2], rho=1.5, S=0.4)
    r = euler_rhs(st0, GAS)
    assert max(np.max(np.abs(x)) for x in r) == 0.0
    nxt = step(st0, GAS, SolverConfig(dt=1e-2))
    assert np.max(np.abs(nxt.u - st0.u)) <= 1e-14 and np.max(np.abs(nxt.rho - st0.rho)) <= 1e-14


def test_pressure_gradient_acceleration_oracle():
    grid = Grid(make_chart("M1"), (256, 4))
    x1 = grid.coords[..., 0]
    st0 = FluidState(grid, np.zeros(grid.shape + (2,)), 1 + 0.1 * np.sin(x1), np.zeros(grid.shape))
    r = euler_rhs(st0, ISO, order=4)
    exact = -0.1 * np.cos(x1) / (1 + 0.1 * np.sin(x1))
    assert np.max(np.abs(r.u[..., 0] - exact)) <= 1e-7
    assert np.max(np.abs(r.u[..., 1])) <= 1e-15


def test_centrifugal_term_on_torus_of_revolution():
    grid = Grid(make_chart("M2"), (16, 16))
    eps = 0.3
    st0 = uniform_state(grid, u=[0.0, eps], rho=1.0, S=0.0)
    r = euler_rhs(st0, GAS)
    rr = grid.coords[..., 0]
    f, fp = 2 + np.cos(rr), -np.sin(rr)
    assert np.max(np.abs(r.u[..., 0] - f * fp * eps**2)) <= 1e-14


def test_mass_conserved_to_machine_precision_per_step():
    st0 = _smooth(64)
    ops = grid_ops(st0.grid, 2)
    m0 = ops.integrate(st0.rho)
    nxt = step(st0, GAS, SolverConfig(dt=2e-3))
    assert abs(ops.integrate(nxt.rho) - m0) <= 1e-12 * abs(m0)


def test_rk4_self_convergence():
    st0 = _smooth(32)
    ref = st0
    for _ in range(16):
        ref = step(ref, GAS, SolverConfig(dt=0.005), check=False)
    errs = []
    for dt, n in ((0.04, 2), (0.02, 4)):
        s = st0
        for _ in range(n):
            s = step(s, GAS, SolverConfig(dt=dt), check=False)
        errs.append(np.max(np.abs(s.rho - ref.rho)))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.15)


def test_cfl_refusal_suggests_dt():
    st0 = _smooth(32)
    limit = stable_dt(st0, GAS, 0.5)
    with pytest.raises(CFLError) as info:
        step(st0, GAS, SolverConfig(dt=4 * limit))
    assert info.value.suggested_dt == pytest.approx(limit)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=1e-3, order=3)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.3, t_end=1.0).n_steps


def test_interpolation_exact_for_constant_and_nodes():
    grid = Grid(make_chart("M1"), (16, 16))
    assert np.allclose(interpolate(np.full(grid.shape, 2.5), grid, np.random.default_rng(0).uniform(0, 6, (20, 2))), 2.5)
    f = np.sin(grid.coords[..., 0]) * np.cos(grid.coords[..., 1])
    nodes = grid.coords.reshape(-1, 2)[::7]
    assert np.max(np.abs(interpolate(f, grid, nodes) - f.reshape(-1)[::7])) <= 1e-13


def test_linear_interpolation_exact_for_linear_fields():
    grid = Grid(make_chart("M4"), (32, 32))
    f = 0.3 * grid.coords[..., 0] - 1.2 * grid.coords[..., 1]
    x = np.random.default_rng(1).uniform(-2.5, 2.5, (30, 2))
    assert np.max(np.abs(interpolate(f, grid, x, method="linear") - (0.3 * x[:, 0] - 1.2 * x[:, 1]))) <= 1e-12


def test_cubic_interpolation_converges():
    errs = []
    x = np.random.default_rng(2).uniform(0, 2 * np.pi, (200, 2))
    for N in (32, 64):
        grid = Grid(make_chart("M1"), (N, N))
        f = np.sin(grid.coords[..., 0] + 2 * grid.coords[..., 1])
        errs.append(np.max(np.abs(interpolate(f, grid, x) - np.sin(x[:, 0] + 2 * x[:, 1]))))
    assert errs[0] / errs[1] >= 3.5


def test_markers_static_in_zero_flow():
    st0 = uniform_state(Grid(make_chart("M1"), (16, 16)))
    dom, _ = rectangle_domain(st0.grid.chart, [1, 1], [2, 2], 0.2)
    out = advect_markers(dom, st0, 0.1)
    assert np.array_equal(out.positions, dom.positions) and np.array_equal(out.weights, dom.weights)


def test_markers_translate_rigidly():
    st0 = uniform_state(Grid(make_chart("M1"), (16, 16)), u=[0.4, -0.3])
    dom, _ = rectangle_domain(st0.grid.chart, [1, 1], [2, 2], 0.2)
    out = advect_markers(dom, st0, 0.1)
    assert np.allclose(out.positions - dom.positions, [0.04, -0.03], atol=1e-14)
    assert np.allclose(out.weights, dom.weights, rtol=1e-14)


def test_radial_flow_weights_grow_exponentially():
    grid = Grid(make_chart("M4"), (64, 64))
    st0 = FluidState(grid, grid.coords.copy(), np.ones(grid.shape), np.zeros(grid.shape))
    dom, _ = rectangle_domain(grid.chart, [-0.5, -0.5], [0.5, 0.5], 0.1)
    dt = 0.01
    out = advect_markers(dom, st0, dt)
    assert np.allclose(out.weights / dom.weights, np.exp(2 * dt), rtol=1e-9)
    assert np.allclose(out.positions, dom.positions * np.exp(dt), rtol=1e-9)


def test_marker_clearance_on_patch():
    grid = Grid(make_chart("M4"), (32, 32))
    near_edge = MarkerSet(CURVE, np.array([[3.1, 0.0], [0.0, 0.0]]))
    with pytest.raises(MarkerLostError):
        check_clearance(near_edge, grid)


def test_polyline_helpers():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    assert signed_area(square) == pytest.approx(1.0)
    assert signed_area(square[::-1]) == pytest.approx(-1.0)
    bowtie = np.array([[0, 0], [1, 1], [1, 0], [0, 1]], float)
    assert is_simple_polyline(square) and not is_simple_polyline(bowtie)
    with pytest.raises(GeometryError):
        polygon_boundary(bowtie, 0.1)
    assert signed_area(polygon_boundary(square[::-1], 0.1).positions) > 0


def test_rectangle_domain_weights_sum_to_area():
    chart = make_chart("M2")
    dom, bnd = rectangle_domain(chart, [1.0, 1.0], [2.0, 3.0], 0.05)
    assert dom.weights.sum() == pytest.approx(2.0 * (2.0 + np.sin(2) - np.sin(1)), rel=1e-3)
    assert signed_area(bnd.positions) > 0 and bnd.closed
    with pytest.raises(GeometryError):
        rectangle_domain(chart, [1.0, 1.0], [0.5, 2.0], 0.1)


def test_curve_constructors():
    c = circle_curve([0, 0], 1.0, 12)
    assert c.closed and signed_area(c.positions) > 0
    s = segment_curve([0, 0], [1, 2], 4)
    assert not s.closed and len(s) == 5
    with pytest.raises(GeometryError):
        segment_curve([1, 1], [1, 1], 3)
    with pytest.raises(ValueError):
        MarkerSet(DOMAIN_INTERIOR, np.zeros((3, 2)))


def test_simulate_yields_uniform_snapshots():
    st0 = _smooth(16)
    snaps = list(simulate(st0, GAS, SolverConfig(dt=0.01, t_end=0.1, snapshot_every=2)))
    assert [s.index for s in snaps] == [0, 2, 4, 6, 8, 10]
    assert np.allclose(np.diff([s.t for s in snaps]), 0.02)


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_translation_advection_property(vx, vy):
    st0 = uniform_state(Grid(make_chart("M1"), (8, 8)), u=[vx, vy])
    m = MarkerSet(CURVE, np.array([[1.0, 2.0], [3.0, 4.0]]))
    out = advect_markers(m, st0, 0.05)
    assert np.allclose(out.positions - m.positions, 0.05 * np.array([vx, vy]), atol=1e-13)
