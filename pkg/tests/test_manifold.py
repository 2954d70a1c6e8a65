import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluidlaws.errors import GeometryError
from fluidlaws.manifold import (
    catalogued_isometries,
    christoffel,
    curl_free_residual,
    covariant_derivative_vector,
    curvature_identity_defects,
    dilation,
    geometry,
    gradient_field,
    homothety_residual,
    interior_sample,
    killing_residual,
    linear_potential,
    make_chart,
    polynomial_field,
    reference_scalar_curvature,
    riemann,
    rotation,
    squared_coordinate_field,
    translation,
)

CHARTS = [("M1", {}), ("M2", {}), ("M3", {"n": 2}), ("M3", {"n": 3}), ("M4", {}), ("M1", {"n": 3})]


def _pts(chart, count=100, seed=0):
    return interior_sample(chart, count, np.random.default_rng(seed), margin=0.05)


def test_flat_christoffel_vanishes():
    chart = make_chart("M1")
    assert np.all(christoffel(chart, _pts(chart, 5)) == 0.0)


def test_sphere_christoffel_oracle():
    chart = make_chart("M3", n=2)
    x = np.array([[np.pi / 3, 0.7]])
    gam = christoffel(chart, x)[0]
    th = np.pi / 3
    assert gam[0, 1, 1] == pytest.approx(-np.sin(th) * np.cos(th), abs=1e-14)
    assert gam[1, 0, 1] == pytest.approx(np.cos(th) / np.sin(th), abs=1e-14)
    assert gam[1, 1, 0] == pytest.approx(gam[1, 0, 1], abs=0)


def test_torus_christoffel_at_outer_equator():
    chart = make_chart("M2")
    gam = christoffel(chart, np.array([[0.0, 1.3]]))[0]
    assert gam[0, 1, 1] == pytest.approx(0.0, abs=1e-15)
    assert gam[1, 0, 1] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("r", [0.3, 1.0, 2.5])
def test_torus_christoffel_closed_form(r):
    chart = make_chart("M2")
    gam = christoffel(chart, np.array([[r, 0.4]]))[0]
    f, fp = 2.0 + np.cos(r), -np.sin(r)
    assert gam[0, 1, 1] == pytest.approx(-f * fp, rel=1e-13)
    assert gam[1, 0, 1] == pytest.approx(fp / f, rel=1e-13)


def test_flat_riemann_zero():
    chart = make_chart("M4")
    R, ric, scal = riemann(chart, _pts(chart, 10))
    assert np.all(R == 0) and np.all(ric == 0) and np.all(scal == 0)


def test_sphere_scalar_curvature_two():
    chart = make_chart("M3", n=2)
    _, _, scal = riemann(chart, _pts(chart))
    assert np.max(np.abs(scal - 2.0)) <= 1e-6


def test_torus_scalar_curvature_vanishes_on_top_circle():
    chart = make_chart("M2")
    _, _, scal = riemann(chart, np.array([[np.pi / 2, 0.0], [np.pi / 2, 2.0]]))
    assert np.max(np.abs(scal)) <= 1e-12


@pytest.mark.parametrize("name,params", CHARTS)
def test_identities_analytic_path(name, params):
    chart = make_chart(name, **params)
    geo = geometry(chart, _pts(chart), curvature=True)
    d = curvature_identity_defects(geo)
    assert d["christoffel_symmetry"] == 0.0
    assert d["inverse"] <= 1e-12
    for key in ("antisymmetry", "bianchi", "last_pair", "pair_symmetry", "ricci_symmetry"):
        assert d[key] <= 1e-10, key
    ref = reference_scalar_curvature(chart, geo.x)
    assert np.max(np.abs(geo.scalar_curv - ref)) <= 1e-6


@pytest.mark.parametrize("name,params", [("M2", {}), ("M3", {"n": 2})])
def test_identities_finite_difference_path(name, params):
    chart = make_chart(name, **params)
    x = _pts(chart, 30)
    geo = geometry(chart, x, curvature=True, analytic=False)
    d = curvature_identity_defects(geo)
    for key in ("antisymmetry", "bianchi"):
        assert d[key] <= 1e-6
    exact = geometry(chart, x, curvature=True)
    assert np.max(np.abs(geo.scalar_curv - exact.scalar_curv)) <= 1e-5


@pytest.mark.parametrize("name,params", CHARTS)
def test_metric_compatibility_by_finite_differences(name, params):
    chart = make_chart(name, **params)
    x = _pts(chart, 20)
    geo = geometry(chart, x, curvature=False)
    h = 1e-5
    n = chart.dim
    for m in range(n):
        e = np.zeros(n)
        e[m] = h
        dg = (geometry(chart, x + e, curvature=False).g - geometry(chart, x - e, curvature=False).g) / (2 * h)
        # nabla_m g_ij = d_m g_ij - Gamma^k_mi g_kj - Gamma^k_mj g_ik
        gam = geo.christoffel[:, :, m, :]
        cov = dg - np.einsum("bki,bkj->bij", gam, geo.g) - np.einsum("bkj,bik->bij", gam, geo.g)
        assert np.max(np.abs(cov)) <= 1e-6


def test_sphere_refuses_pole():
    chart = make_chart("M3", n=2)
    with pytest.raises(GeometryError):
        geometry(chart, np.array([[1e-9, 0.3]]))


def test_covariant_derivative_examples():
    flat = make_chart("M4")
    x = np.array([[0.3, -0.4]])
    geo = geometry(flat, x, curvature=False)
    cd = covariant_derivative_vector(geo, np.array([[1.0, 2.0]]), np.zeros((1, 2, 2)))
    assert np.all(cd.grad == 0) and cd.div[0] == 0
    cd = covariant_derivative_vector(geo, x, np.eye(2)[None])
    assert cd.div[0] == pytest.approx(2.0)
    sph = make_chart("M3", n=2)
    geo = geometry(sph, np.array([[np.pi / 3, 0.5]]), curvature=False)
    cd = covariant_derivative_vector(geo, np.array([[0.0, 1.0]]), np.zeros((1, 2, 2)))
    assert cd.grad[0, 0, 1] == pytest.approx(1.0 / np.tan(np.pi / 3), rel=1e-14)


@pytest.mark.parametrize("name,params", CHARTS)
def test_catalogued_isometries_are_killing(name, params):
    chart = make_chart(name, **params)
    x = _pts(chart)
    for zeta in catalogued_isometries(chart):
        assert np.max(np.abs(killing_residual(chart, zeta, x))) <= 1e-8


def test_non_killing_squared_coordinate():
    chart = make_chart("M4")
    x = np.array([[0.7, -0.2], [1.5, 0.4]])
    res = killing_residual(chart, squared_coordinate_field(2, 0), x)
    assert res[:, 0, 0] == pytest.approx(4 * x[:, 0])
    assert np.all(res[:, 1, 1] == 0)


def test_random_polynomial_field_is_not_killing(rng):
    chart = make_chart("M4")
    coeffs = rng.normal(size=(2, 2, 2))
    res = killing_residual(chart, polynomial_field(coeffs), _pts(chart, 50))
    assert np.max(np.abs(res)) >= 1e-2


def test_homothety_examples():
    flat = make_chart("M4")
    x = _pts(flat, 10)
    assert np.max(np.abs(homothety_residual(flat, dilation(2), 2.0, x))) <= 1e-14
    r1 = homothety_residual(flat, dilation(2), 1.0, x)
    assert np.allclose(r1, np.broadcast_to(np.eye(2), r1.shape))
    tor = make_chart("M2")
    zeta = catalogued_isometries(tor)[0]
    assert np.max(np.abs(homothety_residual(tor, zeta, 0.0, _pts(tor, 10)))) <= 1e-12
    with pytest.raises(GeometryError):
        homothety_residual(flat, dilation(2), float("nan"), x)


def test_curl_free_examples():
    flat = make_chart("M4")
    x = _pts(flat, 10)
    grad = gradient_field(linear_potential([0.3, -1.2]))
    assert np.max(np.abs(curl_free_residual(flat, grad, x))) <= 1e-10
    rot = curl_free_residual(flat, rotation(2), x)
    assert np.allclose(np.abs(rot[:, 0, 1]), 2.0)
    tor = make_chart("M2")
    zeta = catalogued_isometries(tor)[0]
    curl = curl_free_residual(tor, zeta, np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert abs(curl[0, 0, 1]) > 1e-3 and abs(curl[1, 0, 1]) <= 1e-14


def test_translation_is_killing_on_flat_torus():
    chart = make_chart("M1")
    assert np.max(np.abs(killing_residual(chart, translation(2, 0), _pts(chart, 10)))) == 0.0


@given(st.floats(0.05, np.pi - 0.05), st.floats(-3.0, 3.0))
def test_sphere_scalar_curvature_property(theta, phi):
    chart = make_chart("M3", n=2)
    _, _, scal = riemann(chart, np.array([[theta, phi]]))
    assert abs(scal[0] - 2.0) <= 1e-9


@given(st.floats(0.0, 2 * np.pi), st.floats(0.0, 2 * np.pi))
def test_torus_scalar_curvature_property(r, th):
    chart = make_chart("M2")
    _, _, scal = riemann(chart, np.array([[r, th]]))
    assert abs(scal[0] - 2 * np.cos(r) / (2 + np.cos(r))) <= 1e-10


@given(st.integers(0, 10_000))
def test_metric_symmetric_positive_definite(seed):
    for name, params in CHARTS:
        chart = make_chart(name, **params)
        geo = geometry(chart, _pts(chart, 5, seed), curvature=False)
        assert np.array_equal(geo.g, np.swapaxes(geo.g, -1, -2))
        assert np.all(np.linalg.eigvalsh(geo.g) > 0)
        assert np.allclose(geo.sqrt_det_g, np.sqrt(np.linalg.det(geo.g)), rtol=1e-13)
