import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from fluidlaws.errors import StateError
from fluidlaws.fluid import (
    Exp,
    FluidState,
    Grid,
    Poly,
    Sin,
    barotropic,
    eos_from_config,
    expr_from_config,
    field_from_config,
    general_eos,
    internal_energy,
    isobaric_entropy,
    load_npz,
    polytropic,
    pressure,
    special_exponent,
    state_from_fields,
    uniform_state,
)
from fluidlaws.manifold import make_chart

EOSES = {
    "general": general_eos([(Exp(1.0, 0.5, 0.0), 1.4), (Poly((0.3, 0.2)), 2.5), (Sin(0.1, 1.0, 0.0, 0.2), 0.0)]),
    "polytropic": polytropic(Exp(1.0, 0.7, 0.0), n=2, sigma0=0.25),
    "isobaric": isobaric_entropy(Poly((1.0, 0.5, 0.2))),
    "barotropic": barotropic([(1.0, 1.4), (0.3, 2.0)]),
    "isothermal": barotropic([(1.0, 1.0)]),
}


def test_pressure_examples():
    assert pressure(polytropic(1.0, n=2), 2.0, 0.0) == (4.0, 4.0, 0.0)
    assert pressure(isobaric_entropy(Poly((0.0, 1.0))), 5.0, 3.0) == (3.0, 0.0, 1.0)
    assert pressure(barotropic([(1.0, 1.0)]), 7.0, 0.0) == (7.0, 1.0, 0.0)


def test_internal_energy_examples():
    assert internal_energy(polytropic(1.0, 2.0), 3.0, 0.0) == pytest.approx(3.0)
    assert internal_energy(isobaric_entropy(Poly((0.0, 1.0))), 2.0, 4.0) == pytest.approx(-2.0)
    iso = barotropic([(1.0, 1.0)])
    assert internal_energy(iso, 1.0, 0.0) == 0.0
    assert internal_energy(iso, 2.5, 0.0) == pytest.approx(np.log(2.5))


def test_special_exponent():
    assert special_exponent(2) == 2.0
    assert special_exponent(3) == pytest.approx(5.0 / 3.0)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_nonpositive_density_rejected(bad):
    with pytest.raises(StateError):
        pressure(EOSES["general"], bad, 0.0)


@pytest.mark.parametrize("name", sorted(EOSES))
@given(rho=st.floats(0.3, 3.0), S=st.floats(-1.0, 1.0))
def test_pressure_partials_match_central_differences(name, rho, S):
    eos = EOSES[name]
    d = eos.pressure_data(rho, S)
    h = 1e-5
    P = lambda r, s: eos.pressure_data(r, s).P
    fd_rho = (P(rho + h, S) - P(rho - h, S)) / (2 * h)
    fd_S = (P(rho, S + h) - P(rho, S - h)) / (2 * h)
    scale = 1.0 + abs(float(d.P))
    assert abs(d.P_rho - fd_rho) <= 1e-6 * scale
    assert abs(d.P_S - fd_S) <= 1e-6 * scale
    Pr = lambda r, s: eos.pressure_data(r, s).P_rho
    assert abs(d.P_rhorho - (Pr(rho + h, S) - Pr(rho - h, S)) / (2 * h)) <= 1e-6 * (1 + abs(float(d.P_rho)))
    assert abs(d.P_rhoS - (Pr(rho, S + h) - Pr(rho, S - h)) / (2 * h)) <= 1e-6 * (1 + abs(float(d.P_rho)))


@pytest.mark.parametrize("name", sorted(EOSES))
@given(rho=st.floats(0.3, 3.0), S=st.floats(-1.0, 1.0))
def test_energy_derivative_is_pressure_over_rho_squared(name, rho, S):
    eos = EOSES[name]
    h = 1e-5
    e_rho = (eos.internal_energy(rho + h, S) - eos.internal_energy(rho - h, S)) / (2 * h)
    assert e_rho == pytest.approx(eos.pressure_data(rho, S).P / rho**2, rel=1e-6, abs=1e-8)


@pytest.mark.parametrize("name", sorted(EOSES))
def test_closed_energy_matches_quadrature(name):
    eos = EOSES[name]
    rho = np.linspace(0.4, 2.5, 9)
    S = np.linspace(-0.8, 0.9, 9)
    assert np.allclose(eos.internal_energy(rho, S), eos.internal_energy(rho, S, "quadrature"), rtol=1e-10, atol=1e-12)


def test_symbolic_energy_matches_numeric():
    r, s = sp.symbols("rho S", positive=True)
    for eos in EOSES.values():
        fn = sp.lambdify((r, s), eos.sympy_energy(r, s), "numpy")
        assert fn(1.7, 0.3) == pytest.approx(float(eos.internal_energy(1.7, 0.3)), rel=1e-12)


def test_classification_predicates():
    assert EOSES["barotropic"].is_barotropic() and not EOSES["general"].is_barotropic()
    assert EOSES["isobaric"].is_isobaric_entropy() and not EOSES["polytropic"].is_isobaric_entropy()
    assert EOSES["polytropic"].admits_similarity_energy(2)
    assert not polytropic(1.0, 1.8).admits_similarity_energy(2)
    assert polytropic(1.0, 5.0 / 3.0).admits_similarity_energy(3)


def test_eos_from_config_variants():
    cfg = {"variant": "General", "terms": [{"coeff": {"kind": "exp", "amp": 1.0, "rate": 0.5}, "gamma": 1.4}]}
    assert eos_from_config(cfg).pressure(1.0, 0.0)[0] == pytest.approx(1.0)
    assert eos_from_config({"variant": "Polytropic", "sigma": 2.0}, n=2).pressure(1.5, 0.0)[0] == pytest.approx(4.5)
    assert eos_from_config({"variant": "IsobaricEntropy", "kappa": [0.0, 2.0]}).pressure(9.0, 1.5)[0] == 3.0
    with pytest.raises(ValueError):
        eos_from_config({"variant": "Polytropic", "gama": 1.4})
    with pytest.raises(ValueError):
        eos_from_config({"variant": "Stiffened"})
    with pytest.raises(ValueError):
        eos_from_config({"variant": "Barotropic", "terms": [{"coeff": [0.0, 1.0], "gamma": 1.0}]})


@pytest.mark.parametrize("expr", [Poly((0.3, -1.0, 0.5)), Exp(0.7, -1.3, 0.2), Sin(1.1, 2.0, 0.3, -0.4)])
@given(s=st.floats(-2.0, 2.0))
def test_expression_derivatives(expr, s):
    h = 1e-5
    assert expr.deriv(s, 1) == pytest.approx((expr(s + h) - expr(s - h)) / (2 * h), rel=1e-7, abs=1e-8)
    assert expr.deriv(s, 2) == pytest.approx((expr.deriv(s + h, 1) - expr.deriv(s - h, 1)) / (2 * h), rel=1e-7, abs=1e-8)
    x = sp.Symbol("s")
    assert float(expr.sympy(x).subs(x, s)) == pytest.approx(float(expr(s)), rel=1e-13, abs=1e-14)
    assert expr_from_config(expr.to_config())(s) == pytest.approx(expr(s), rel=1e-15)


def test_field_from_config():
    x = np.array([[0.3, 1.1], [2.0, -0.5]])
    assert np.all(field_from_config(2.5)(x) == 2.5)
    f = field_from_config([1.0, {"kind": "sin", "amp": 0.1, "k": [1.0, 1.0]}])
    assert np.allclose(f(x), 1.0 + 0.1 * np.sin(x.sum(-1)))
    g = field_from_config({"kind": "gaussian", "amp": 2.0, "center": [0.0, 0.0], "width": 1.0})
    assert g(np.zeros((1, 2)))[0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        field_from_config({"kind": "spline"})


def test_state_validation_and_roundtrip(tmp_path):
    grid = Grid(make_chart("M1"), (8, 8))
    st0 = state_from_fields(grid, [0.5, {"kind": "cos", "amp": 0.2, "k": [1.0, 0.0]}], 1.0, 0.1)
    path = st0.save_npz(tmp_path / "state.npz")
    back = load_npz(path, grid.chart)
    assert np.array_equal(back.u, st0.u) and np.array_equal(back.rho, st0.rho)
    with pytest.raises(StateError):
        st0.with_fields(rho=-st0.rho).validate()
    with pytest.raises(StateError):
        st0.with_fields(S=np.full(grid.shape, np.nan)).validate()
    with pytest.raises(StateError):
        Grid(make_chart("M1"), (8,))
    assert uniform_state(grid, rho=3.0).rho.sum() == 3.0 * 64
    assert isinstance(st0, FluidState)
