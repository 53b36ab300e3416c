import math

import numpy as np
import pytest

from gtd.equilibrium import (
    ClosedFormMetric,
    ConstantMetric,
    FunctionMetric,
    PullbackMetric,
    chart_metric,
    check_first_law,
    closed_form_metric,
    curvature,
    embed,
    embedding_jets,
    pullback_metric,
)
from gtd.errors import DegenerateMetricError, DomainError
from gtd.phasespace import PhaseMetricSpec
from gtd.processes import flat_chart_jacobian
from gtd.systems import (
    catalog_gen_ideal,
    catalog_ideal_gas,
    catalog_power_log,
    catalog_separable,
    catalog_vdw,
    log_part,
)

from conftest import catalog_systems

SPEC = PhaseMetricSpec(k=-1, Lambda=-1.0)

# Scalar curvature of the van der Waals metric (kappa=1, a=0.1, b=0.05,
# Lambda=-1, k=-1) at (U, V) = (1.3, 2.1), from an exact symbolic pullback
# and curvature computation in sympy (tests/oracles/vdw_curvature.py).
VDW_R_ORACLE = 7.7107236784004919055e-4
VDW_G_ORACLE = [[0.57080728458820331612, -0.016112164130797899001], [-0.016112164130797899001, 0.22065405121903243202]]


def test_embed_ideal_gas():
    pt = embed(catalog_ideal_gas(1.0), [1.0, 1.0])
    np.testing.assert_allclose(pt.Z, [0.0, 1.0, 1.0, 1.5, 1.0], atol=1e-15)
    assert pt.potential == 0.0
    np.testing.assert_array_equal(pt.extensive, [1, 1])


def test_embed_vdw_reduction():
    for E in ([1.0, 2.0], [0.6, 4.0]):
        np.testing.assert_allclose(embed(catalog_vdw(1.0, 0, 0), E).Z, embed(catalog_ideal_gas(1.0), E).Z, rtol=1e-15)


def test_embed_domain():
    with pytest.raises(DomainError):
        embed(catalog_ideal_gas(1.0), [1.0, -1.0])


def test_embedding_jets_layout():
    eq = catalog_vdw(1.0, 0.1, 0.05)
    Z, Zd, Zdd = embedding_jets(eq, [1.0, 2.0])
    jet = eq.jet([1.0, 2.0], 3)
    assert Zd.shape == (5, 2) and Zdd.shape == (5, 2, 2)
    np.testing.assert_array_equal(Zd[1:3], np.eye(2))
    np.testing.assert_array_equal(Zd[3:], jet.hess)
    np.testing.assert_array_equal(Zdd[3:], jet.third)


# induced metric


def test_pullback_ideal_gas_example():
    np.testing.assert_allclose(pullback_metric(SPEC, catalog_ideal_gas(1.0), [2.0, 3.0]), np.diag([0.25, 1 / 9]), rtol=1e-14, atol=1e-16)


def test_theta_squared_pulls_back_to_zero():
    eq = catalog_vdw(1.0, 0.1, 0.05)
    Z, Zd, _ = embedding_jets(eq, [1.3, 2.2], order=2)
    theta = np.concatenate([[1.0], -Z[3:], [0.0, 0.0]])
    assert np.max(np.abs(Zd.T @ np.outer(theta, theta) @ Zd)) < 1e-15


@pytest.mark.parametrize("name", list(catalog_systems()))
@pytest.mark.parametrize("k", [-1, 0, 1])
def test_pullback_equals_closed_form(name, k):
    eq, (lo, hi) = catalog_systems()[name]
    spec = PhaseMetricSpec(k=k, Lambda=-0.7)
    rng = np.random.default_rng(11)
    for E in rng.uniform(lo, hi, size=(30, len(lo))):
        gp, gc = pullback_metric(spec, eq, E), closed_form_metric(spec, eq, E)
        assert np.max(np.abs(gp - gc)) / np.max(np.abs(gp)) < 1e-10


@pytest.mark.parametrize("kappa", [1.0, 2.0])
@pytest.mark.parametrize("k", [-2, -1, 0, 1])
@pytest.mark.parametrize("lam", [-1.0, 0.5])
def test_ideal_gas_closed_form_coefficients(kappa, k, lam):
    eq = catalog_ideal_gas(kappa)
    spec = PhaseMetricSpec(k=k, Lambda=lam)
    U, V = 1.7, 2.9
    g = closed_form_metric(spec, eq, [U, V])
    c = kappa ** (2 * k + 2) * lam
    np.testing.assert_allclose(
        g, np.diag([-c * 1.5 ** (2 * k + 2) / U**2, -c / V**2]), rtol=1e-13, atol=1e-300
    )
    np.testing.assert_allclose(pullback_metric(spec, eq, [U, V]), g, rtol=1e-13, atol=1e-300)


def test_ideal_gas_flat_form():
    eq = catalog_ideal_gas(1.0)
    for U, V in ([1.0, 1.0], [0.5, 4.0], [3.0, 0.7]):
        np.testing.assert_allclose(closed_form_metric(SPEC, eq, [U, V]), np.diag([1 / U**2, 1 / V**2]), rtol=1e-14)


def test_vdw_guu_coefficient():
    eq = catalog_vdw(1.0, 0.1, 0.05)
    E = [1.0, 2.0]
    assert closed_form_metric(SPEC, eq, E)[0, 0] == pytest.approx(1 / 1.05, abs=1e-10)
    assert pullback_metric(SPEC, eq, E)[0, 0] == pytest.approx(1 / 1.05, abs=1e-10)


def test_vdw_metric_against_symbolic_oracle():
    g = pullback_metric(SPEC, catalog_vdw(1.0, 0.1, 0.05), [1.3, 2.1])
    np.testing.assert_allclose(g, VDW_G_ORACLE, rtol=1e-13)


def test_degenerate_metric_detected():
    lin = catalog_power_log("power", 1.0, 1.0, 0.0)  # S = U, Hessian 0
    with pytest.raises(DegenerateMetricError):
        pullback_metric(PhaseMetricSpec(k=0, Lambda=1.0), lin, [1.0, 1.0])
    hom1 = catalog_power_log("power", 1.0, 0.5, 0.5)  # degree-1: singular Hessian
    with pytest.raises(DegenerateMetricError):
        closed_form_metric(PhaseMetricSpec(k=0, Lambda=1.0), hom1, [2.0, 3.0])


@pytest.mark.parametrize("name", list(catalog_systems()))
def test_analytic_metric_derivative_matches_fd(name):
    eq, (lo, hi) = catalog_systems()[name]
    rng = np.random.default_rng(21)
    for cls in (ClosedFormMetric, PullbackMetric):
        field = cls(PhaseMetricSpec(k=0, Lambda=-1.3), eq)
        for E in rng.uniform(lo, hi, size=(5, len(lo))):
            dg = field.d_metric(E)
            fd = FunctionMetric(field.metric, eq.n).d_metric(E)
            assert np.max(np.abs(dg - fd)) / np.max(np.abs(dg)) < 1e-7


# curvature


def test_constant_metric_flat():
    rep = curvature(ConstantMetric(np.eye(2)), [0.3, 0.4])
    for t in (rep.christoffel, rep.riemann, rep.ricci):
        assert np.all(t == 0.0)
    assert rep.scalar == 0.0


def test_sphere_and_hyperbolic_plane():
    sphere = FunctionMetric(lambda x: np.diag([1.0, math.sin(x[0]) ** 2]), 2)
    for th in (0.7, 1.3, 2.2):
        assert curvature(sphere, [th, 0.4]).scalar == pytest.approx(2.0, rel=1e-6)
    upper = FunctionMetric(lambda x: np.eye(2) / x[1] ** 2, 2, domain=lambda x: x[1] > 0)
    assert curvature(upper, [0.2, 1.5]).scalar == pytest.approx(-2.0, rel=1e-6)
    with pytest.raises(DomainError):
        curvature(upper, [0.2, -1.0])


def test_ideal_gas_flat_grid():
    eq = catalog_ideal_gas(1.0)
    field = ClosedFormMetric(SPEC, eq)
    for U in np.linspace(0.5, 5, 6):
        for V in np.linspace(0.5, 5, 6):
            assert abs(curvature(field, [U, V]).scalar) < 1e-8


def test_vdw_curvature_against_symbolic_oracle():
    eq = catalog_vdw(1.0, 0.1, 0.05)
    for cls in (ClosedFormMetric, PullbackMetric):
        R = curvature(cls(SPEC, eq), [1.3, 2.1]).scalar
        assert R == pytest.approx(VDW_R_ORACLE, rel=1e-7)


def test_vdw_curvature_nonzero():
    field = ClosedFormMetric(SPEC, catalog_vdw(1.0, 0.1, 0.05))
    for E in ([1.0, 2.0], [2.5, 0.8], [4.0, 4.0]):
        assert abs(curvature(field, E).scalar) > 1e-6


def test_riemann_symmetries_and_bianchi():
    eq = catalog_vdw(1.0, 0.1, 0.05)
    field = ClosedFormMetric(PhaseMetricSpec(k=0, Lambda=-1.0), eq)
    rep = curvature(field, [1.4, 1.9])
    np.testing.assert_array_equal(rep.riemann, -rep.riemann.transpose(0, 1, 3, 2))
    assert rep.bianchi < 1e-8
    assert np.allclose(rep.christoffel, rep.christoffel.transpose(0, 2, 1), atol=1e-14)
    assert np.allclose(rep.ricci, rep.ricci.T, atol=1e-9 * np.max(np.abs(rep.ricci)))


def test_three_dimensional_bianchi():
    eq = catalog_separable([log_part(1.5), log_part(1.0), log_part(0.5)])
    spec = PhaseMetricSpec(k=0, Lambda=-1.0)
    rep = curvature(ClosedFormMetric(spec, eq), [1.2, 0.9, 2.0])
    assert rep.riemann.shape == (3, 3, 3, 3) and rep.bianchi < 1e-8


def test_analytic_and_fd_paths_agree():
    eq = catalog_vdw(1.0, 0.1, 0.05)
    for k in (-1, 0):
        spec = PhaseMetricSpec(k=k, Lambda=-1.0)
        analytic = ClosedFormMetric(spec, eq)
        pure_fd = FunctionMetric(analytic.metric, 2, domain=eq.contains)
        for E in ([0.6, 0.6], [1.0, 2.0], [0.55, 0.3]):
            Ra, Rf = curvature(analytic, E).scalar, curvature(pure_fd, E).scalar
            if abs(Ra) > 1e-3:
                assert np.sign(Ra) == np.sign(Rf)
                assert abs(Ra - Rf) / abs(Ra) < 1e-5


def test_separable_flat():
    eq = catalog_separable([log_part(1.5), log_part(1.0), log_part(0.7)])
    field = ClosedFormMetric(SPEC, eq)
    rng = np.random.default_rng(5)
    for E in rng.uniform(0.5, 5.0, size=(10, 3)):
        assert abs(curvature(field, E).scalar) < 1e-8


def test_gen_ideal_flat():
    field = ClosedFormMetric(SPEC, catalog_gen_ideal(1.0, 2.0))
    assert abs(curvature(field, [1.5, 2.5]).scalar) < 1e-8


def test_flat_chart_push_forward():
    field = ClosedFormMetric(SPEC, catalog_ideal_gas(1.0))
    for E in ([1.0, 1.0], [2.0, 3.0], [0.6, 4.5]):
        np.testing.assert_allclose(chart_metric(field, E, flat_chart_jacobian(E)), np.eye(2), atol=1e-12)


def test_degenerate_curvature_raises():
    with pytest.raises(DegenerateMetricError):
        curvature(ConstantMetric(np.zeros((2, 2))), [1.0, 1.0])


# first law


def test_first_law_residual(systems):
    rng = np.random.default_rng(8)
    for eq, (lo, hi) in systems.values():
        for E in rng.uniform(lo, hi, size=(10, len(lo))):
            assert check_first_law(eq, E, rng.normal(size=len(lo))) < 1e-14


def test_first_law_ideal_gas_entropy_form():
    eq = catalog_ideal_gas(1.0)
    U, V = 2.0, 5.0
    inv_T, P_over_T = embed(eq, [U, V]).intensive
    assert inv_T == pytest.approx(1.5 / U) and P_over_T == pytest.approx(1 / V)
    dE = np.array([1e-3, -2e-3])
    assert abs((eq([U, V] + dE) - eq([U, V])) - (inv_T * dE[0] + P_over_T * dE[1])) < 1e-5
