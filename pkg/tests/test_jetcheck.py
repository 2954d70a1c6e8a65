import numpy as np
import pytest
import sympy as sp

from fluidlaws.fluid import Poly, barotropic, general_eos, polytropic
from fluidlaws.fluid.expressions import Exp
from fluidlaws.integrals import densities as dn
from fluidlaws.jetcheck import (
    FAIL_TOL,
    PASS_TOL,
    SymbolicDensity,
    SymbolicJetSpace,
    baroclinic_oracle,
    determining_system_residuals,
    eos_catalogue,
    euler_residuals,
    flux_consistency,
    gap_violations,
    jet_at,
    material_time_derivative,
    max_oneform_residual,
    max_split_residual,
    negative_pairings,
    oneform_residual,
    oneform_suite,
    positive_pairings,
    random_divergence,
    recombine_determining,
    run_suite,
    sample_jets,
    symbolic_euler_residuals,
)
from fluidlaws.manifold import fields as fl
from fluidlaws.manifold import make_chart

GEN = general_eos([(Exp(1.0, 0.5, 0.0), 1.4), (Poly((0.3, 0.2)), 2.5)])


@pytest.fixture(scope="module")
def m1():
    return make_chart("M1")


@pytest.fixture(scope="module")
def m2():
    return make_chart("M2")


@pytest.fixture(scope="module")
def m4():
    return make_chart("M4")


# ---- sampling


def test_same_seed_gives_identical_jets(m2):
    a, b = sample_jets(m2, 30, 7, order=2), sample_jets(m2, 30, 7, order=2)
    for f in ("x", "u", "rho", "S", "du", "drho", "dS", "hu", "hrho", "hS"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    c = sample_jets(m2, 30, 8)
    assert not np.array_equal(a.u, c.u)


def test_prefix_of_larger_batch_matches_smaller_batch(m1):
    small, big = sample_jets(m1, 10, 3), sample_jets(m1, 40, 3)
    assert np.array_equal(small.du, big.du[:10])


def test_sample_ranges(m2):
    j = sample_jets(m2, 200, 0)
    assert j.rho.min() >= 0.5 and j.rho.max() <= 2.0
    assert j.S.min() >= -1.0 and j.S.max() <= 1.0


@pytest.mark.parametrize("name,kw", [("M2", {}), ("M3", {"n": 2}), ("M3", {"n": 3})])
def test_order2_jets_obey_curvature_constraint(name, kw):
    jets = sample_jets(make_chart(name, **kw), 100, 1, order=2)
    assert jets.curvature_defect() <= 1e-14


def test_sample_rejects_bad_arguments(m1):
    with pytest.raises(ValueError):
        sample_jets(m1, 0, 0)
    with pytest.raises(ValueError):
        sample_jets(m1, 5, 0, order=3)


# ---- material derivative


def test_mass_rate_is_minus_divergence_of_mass_flux(m1):
    # div(rho u) = u.grad rho + rho div u = 0.5*2 + 2*0.5 = 2
    jet = jet_at(m1, [1.0, 1.0], [0.5, 0.0], 2.0, 0.0, du=np.diag([0.5, 0.0]), drho=[2.0, 0.0])
    assert material_time_derivative(dn.Mass(), jet, GEN)[0] == pytest.approx(-2.0)


def test_entropy_rate_is_minus_advection(m1):
    lin = dn.TemplateDensity(lambda ctx: dn.Pieces(B=dn.ThermoPiece(ctx.S, S=1.0, S_over_rho=1.0 / ctx.rho)), "S")
    jet = jet_at(m1, [1.0, 1.0], [1.0, 2.0], 1.0, 0.3, dS=[1.0, 1.0])
    assert material_time_derivative(lin, jet, GEN)[0] == pytest.approx(-3.0)


@pytest.mark.parametrize("chart_name", ["M1", "M2"])
def test_material_derivative_matches_symbolic(chart_name):
    chart = make_chart(chart_name)
    space = SymbolicJetSpace(chart)
    jets = sample_jets(chart, 50, 11)
    spec = dn.Energy()
    T = space.rho * (space.speed_sq / 2 + GEN.sympy_energy(space.rho, space.S))
    oracle = SymbolicDensity(space, space.material_time_derivative(T, GEN)).value(jets)
    np.testing.assert_allclose(material_time_derivative(spec, jets, GEN), oracle, rtol=1e-9, atol=1e-9)


# ---- Euler residuals


def test_mass_residuals_vanish(m2):
    r = euler_residuals(dn.Mass(), sample_jets(m2, 100, 0), GEN)
    assert r.max_abs() == 0.0


@pytest.mark.parametrize("eos_name", ["General", "Barotropic", "Polytropic", "IsobaricEntropy"])
def test_volumetric_entropy_is_eos_independent(m2, eos_name):
    r = euler_residuals(dn.VolumetricEntropy(Poly((0.2, 1.0, -0.5))), sample_jets(m2, 200, 2), eos_catalogue()[eos_name])
    assert r.max_abs() <= PASS_TOL


@pytest.mark.parametrize("chart_name", ["M1", "M2"])
def test_energy_passes_and_perturbed_energy_fails(chart_name):
    chart = make_chart(chart_name)
    jets = sample_jets(chart, 1000, 0)
    assert euler_residuals(dn.Energy(), jets, GEN).max_abs() <= PASS_TOL
    bent = dn.scale_thermo(dn.Energy().expression(), 1.01)
    assert euler_residuals(bent, jets, GEN).max_abs() >= FAIL_TOL


@pytest.mark.parametrize(
    "chart_name,spec,eos",
    [
        ("M4", dn.SimilarityEnergy(fl.dilation(2), lam=2.0), polytropic(1.0, 1.7)),
        ("M1", dn.Momentum(fl.squared_coordinate_field(2, 0)), GEN),
        ("M2", dn.Momentum(fl.translation(2, 0)), GEN),
        ("M1", dn.NonIsentropicEnergy(Poly((0.5, 1.0))), polytropic(Exp(1.0, 0.7, 0.0), 1.4)),
        ("M2", dn.Energy(), GEN),
        ("M4", dn.GalileanEnergy(fl.quadratic_potential(2, 1.0), lam=2.0), polytropic(1.0, 2.3)),
    ],
)
def test_closed_form_euler_matches_symbolic_oracle(chart_name, spec, eos):
    chart = make_chart(chart_name)
    jets = sample_jets(chart, 40, 5)
    space = SymbolicJetSpace(chart)
    num = euler_residuals(spec, jets, eos)
    ref = symbolic_euler_residuals(spec, space, eos, jets)
    scale = max(1.0, ref.max_abs())
    for a, b in zip(num, ref):
        np.testing.assert_allclose(a, b, atol=1e-9 * scale)


def test_random_divergences_are_annihilated(m2):
    space = SymbolicJetSpace(m2)
    rng = np.random.default_rng(2024)
    jets = sample_jets(m2, 30, 9)
    worst = 0.0
    for _ in range(20):
        div = random_divergence(space, rng, GEN)
        worst = max(worst, div.euler(jets).max_abs())
    assert worst <= 1e-10


def test_a_non_divergence_is_not_annihilated(m1):
    space = SymbolicJetSpace(m1)
    T = SymbolicDensity(space, space.rho**2 * space.u[0])
    assert T.euler(sample_jets(m1, 10, 0)).max_abs() > 1e-2


# ---- split determining system


def test_mass_split_system_is_zero(m2):
    rep = determining_system_residuals(dn.Mass(), sample_jets(m2, 50, 0), GEN)
    assert set(rep) == {f"Teqn{k}" for k in range(1, 8)}
    assert max_split_residual(rep) == 0.0


def test_similarity_split_system_at_special_exponent(m4):
    jets = sample_jets(m4, 300, 4)
    sim = dn.SimilarityEnergy(fl.dilation(2), lam=2.0)
    assert max_split_residual(determining_system_residuals(sim, jets, polytropic(1.0, 2.0))) <= PASS_TOL
    assert max_split_residual(determining_system_residuals(sim, jets, polytropic(1.0, 1.7))) >= FAIL_TOL


@pytest.mark.parametrize("pairing", negative_pairings()[:8] + negative_pairings()[-4:], ids=lambda p: p.label)
def test_recombined_split_system_reproduces_euler_residuals(pairing):
    jets = sample_jets(pairing.chart, 100, 6)
    rep = determining_system_residuals(pairing.density, jets, pairing.eos)
    direct = euler_residuals(pairing.density, jets, pairing.eos)
    again = recombine_determining(rep, jets)
    for a, b in zip(direct, again):
        np.testing.assert_allclose(a, b, atol=1e-10 * max(1.0, direct.max_abs()))
    # euler residuals are bounded by a modest multiple of the split residuals
    assert direct.max_abs() <= 100 * max_split_residual(rep)


# ---- flux consistency


def test_mass_with_zero_flux(m2):
    assert np.max(np.abs(flux_consistency(dn.Mass(), None, sample_jets(m2, 50, 0), GEN))) <= 1e-14


@pytest.mark.parametrize("chart_name", ["M1", "M2"])
def test_energy_pressure_flux_consistent_and_doubled_flux_not(chart_name):
    jets = sample_jets(make_chart(chart_name), 500, 3)
    e = dn.Energy()
    assert np.max(np.abs(flux_consistency(e, e.flux(), jets, GEN))) <= PASS_TOL
    assert np.max(np.abs(flux_consistency(e, e.flux().scaled(2.0), jets, GEN))) >= FAIL_TOL


def test_every_positive_pairing_has_a_consistent_flux():
    for p in positive_pairings() + positive_pairings(3):
        jets = sample_jets(p.chart, 50, 2)
        r = np.max(np.abs(flux_consistency(p.density, p.density.flux(), jets, p.eos)))
        assert r <= PASS_TOL, p.label


# ---- vorticity transport


def test_zero_velocity_jet_has_zero_oneform_residual(m2):
    jets = sample_jets(m2, 50, 0, order=2)
    z = np.zeros_like
    still = jets.with_values(u=z(jets.u), du=z(jets.du), hu=z(jets.hu))
    assert max_oneform_residual(still, barotropic([(1.0, 1.4)])) <= 1e-14


@pytest.mark.parametrize("name,kw", [("M1", {"n": 2}), ("M2", {}), ("M3", {"n": 3})])
def test_oneform_residual_equals_baroclinic_term(name, kw):
    jets = sample_jets(make_chart(name, **kw), 200, 2, order=2)
    eos = eos_catalogue(jets.dim)["General"]
    res = oneform_residual(jets, eos)
    oracle = baroclinic_oracle(jets, eos)
    np.testing.assert_allclose(res, oracle, atol=1e-10 * max(1.0, np.max(np.abs(oracle))))


def test_index_and_geometric_routes_agree_on_constrained_jets(m2):
    jets = sample_jets(m2, 200, 3, order=2)
    eos = eos_catalogue()["General"]
    np.testing.assert_allclose(oneform_residual(jets, eos, "index"), oneform_residual(jets, eos, "geometric"), atol=1e-10)


def test_broken_curvature_constraint_is_visible():
    jets = sample_jets(make_chart("M3", n=3), 50, 3, order=2)
    noise = np.random.default_rng(0).standard_normal(jets.hu.shape)
    broken = jets.with_values(hu=jets.hu + noise)
    assert broken.curvature_defect() > 1e-3
    eos = barotropic([(1.0, 1.4)])
    assert max_oneform_residual(jets, eos) <= PASS_TOL
    geo, idx = oneform_residual(broken, eos, "geometric"), oneform_residual(broken, eos, "index")
    assert np.max(np.abs(geo)) > 1e-3
    assert np.max(np.abs(geo - idx)) > 1e-3
    with pytest.raises(ValueError):
        oneform_residual(jets, eos, route="other")


def test_oneform_needs_second_order_jets(m1):
    with pytest.raises(ValueError):
        oneform_residual(sample_jets(m1, 3, 0), GEN)


def test_oneform_suite_verdicts():
    res = oneform_suite(count=200)
    assert {r.n for r in res} == {2, 3}
    assert all(r.passed for r in res)


# ---- catalogue suites (reduced jet counts; full counts run in the acceptance suite)


def test_positive_suite_covers_every_variant_on_flat_and_curved_charts():
    ps = positive_pairings()
    labels = {type(p.density).__name__ for p in ps}
    assert labels == {
        "Mass",
        "VolumetricEntropy",
        "Energy",
        "Momentum",
        "GalileanMomentum",
        "SimilarityEnergy",
        "GalileanEnergy",
        "NonIsentropicMomentum",
        "NonIsentropicEnergy",
    }
    assert {p.chart.name for p in ps} >= {"flat_torus", "torus_of_revolution", "flat_patch"}


def test_positive_and_negative_suites_small_batch():
    pos = run_suite(positive_pairings(), count=100, seed=1)
    neg = run_suite(negative_pairings(), count=100, seed=1)
    assert len(neg) >= 12
    assert all(r.passed for r in pos), [r.pairing.label for r in pos if not r.passed]
    assert all(r.passed for r in neg), [r.pairing.label for r in neg if not r.passed]
    assert gap_violations(pos + neg) == []


def test_broken_density_detected_on_almost_every_batch(m1):
    bent = dn.scale_thermo(dn.Energy().expression(), 1.01)
    hits = sum(euler_residuals(bent, sample_jets(m1, 1000, s), GEN).max_abs() >= FAIL_TOL for s in range(20))
    assert hits == 20


def test_sympy_space_requires_symbolic_metric(m1):
    space = SymbolicJetSpace(m1)
    assert space.G == sp.eye(2)
