import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
import pytest

from gtd.deriv import ScalarField
from gtd.equilibrium import ConstantMetric, FunctionMetric, MetricField, PullbackMetric
from gtd.errors import DegenerateMetricError, DomainError, SignChangeError
from gtd.extremal import (
    constraint_T,
    harmonic_report,
    harmonic_residual,
    ng_residual,
    ng_residual_fd,
    trace_relation_residual,
    volume_action,
    volume_action_field,
)
from gtd.phasespace import PhaseMetricSpec
from gtd.systems import catalog_ideal_gas, catalog_power_log, catalog_vdw

from conftest import catalog_systems

SPEC = PhaseMetricSpec(k=-1, Lambda=-1.0)

# Nambu-Goto residual components from a symbolic evaluation of the divergence
# form (tests/oracles/ng_residual.py).
IDEAL_K0_AT_2_3 = [10 / 3, 16 / 9, 6.0, 2 / 3, 2 / 3]  # kappa=1, Lambda=-1, k=0
VDW_AT_13_21 = [
    -0.10074923068724163345,
    -0.052265862117928778913,
    -0.092037742903303206085,
    -0.040601517951433774572,
    -0.019070262841406567837,
]  # kappa=1, a=0.1, b=0.05, Lambda=-1, k=-1


class ScaledMetric(MetricField):
    def __init__(self, base, c):
        super().__init__(base.n, base.contains)
        self.base, self.c = base, c

    def metric(self, E):
        return self.c * self.base.metric(E)

    def d_metric(self, E):
        return self.c * self.base.d_metric(E)


@pytest.mark.parametrize("kappa", [1.0, 2.0])
@pytest.mark.parametrize("lam", [-1.0, 2.5])
def test_ideal_gas_extremal(kappa, lam):
    spec = PhaseMetricSpec(k=-1, Lambda=lam)
    eq = catalog_ideal_gas(kappa)
    for U in np.linspace(0.5, 5, 5):
        for V in np.linspace(0.5, 5, 5):
            rep = ng_residual(spec, eq, [U, V])
            assert rep.max_norm < 1e-7
            assert rep.max_norm == np.max(np.abs(rep.components))


def test_ideal_gas_k0_oracle():
    rep = ng_residual(PhaseMetricSpec(k=0, Lambda=-1.0), catalog_ideal_gas(1.0), [2.0, 3.0])
    np.testing.assert_allclose(rep.components, IDEAL_K0_AT_2_3, rtol=1e-13)
    assert rep.max_norm > 1.0
    np.testing.assert_allclose(rep.divergence + rep.christoffel, rep.components, rtol=0, atol=0)


@pytest.mark.parametrize("k", [0, 1, 2, -2])
def test_ideal_gas_reduced_condition(k):
    # the intensive components carry the reduced condition 2(k+1) Lambda / E^a
    kappa, lam = 1.5, -0.8
    eq = catalog_ideal_gas(kappa)
    EI = np.array([1.5 * kappa, kappa])
    for E in ([0.7, 1.9], [3.0, 4.5]):
        D = ng_residual(PhaseMetricSpec(k=k, Lambda=lam), eq, E).components
        lhs = -(lam**2) * EI ** (2 * k + 1) * D[3:]
        np.testing.assert_allclose(lhs, 2 * (k + 1) * lam / np.asarray(E), rtol=1e-12)


def test_vdw_residual_symbolic_oracle():
    eq = catalog_vdw(1.0, 0.1, 0.05)
    np.testing.assert_allclose(ng_residual(SPEC, eq, [1.3, 2.1]).components, VDW_AT_13_21, rtol=1e-12)


@pytest.mark.parametrize("name", list(catalog_systems()))
@pytest.mark.parametrize("k", [-1, 0])
def test_residual_matches_fd_discretization(name, k):
    eq, (lo, hi) = catalog_systems()[name]
    spec = PhaseMetricSpec(k=k, Lambda=-1.0)
    rng = np.random.default_rng(2)
    for E in rng.uniform(lo, hi, size=(3, len(lo))):
        a = ng_residual(spec, eq, E).components
        f = ng_residual_fd(spec, eq, E)
        scale = max(1.0, np.max(np.abs(a)))
        assert np.max(np.abs(a - f)) / scale < 1e-5


def test_vdw_residual_responds_to_lambda():
    eq = catalog_vdw(1.0, 0.1, 0.05)
    E = [1.3, 2.1]
    lam = ScalarField(lambda z: -1.0 + 0.2 * z[3] - 0.1 * z[4] * z[4], 5)
    base = ng_residual(SPEC, eq, E).components
    varied = ng_residual(PhaseMetricSpec(k=-1, Lambda=lam), eq, E).components
    assert np.max(np.abs(varied - base)) > 1e-3


# harmonic maps


def test_harmonic_with_induced_metric_is_ng(systems):
    rng = np.random.default_rng(4)
    for eq, (lo, hi) in systems.values():
        g = PullbackMetric(SPEC, eq)
        for E in rng.uniform(lo, hi, size=(3, len(lo))):
            ng = ng_residual(SPEC, eq, E).components
            hm = harmonic_residual(SPEC, eq, g, E)
            assert np.max(np.abs(ng - hm)) <= 1e-12 * max(1.0, np.max(np.abs(ng)))


@pytest.mark.parametrize("c", [2.0, 0.3, -1.7])
def test_harmonic_scaling(c):
    eq = catalog_vdw(1.0, 0.1, 0.05)
    E = [1.3, 2.1]
    ng = ng_residual(SPEC, eq, E).components
    hm = harmonic_residual(SPEC, eq, ScaledMetric(PullbackMetric(SPEC, eq), c), E)
    np.testing.assert_allclose(hm, ng / c, rtol=1e-12)


def test_harmonic_flat_chart_metric():
    eq = catalog_ideal_gas(1.0)
    # h is the identity in (ln U, ln V); derivatives here come from differencing
    h = FunctionMetric(lambda E: np.diag(1.0 / np.asarray(E) ** 2), 2, domain=eq.contains)
    for E in ([1.0, 1.0], [2.0, 3.0], [4.5, 0.6]):
        assert np.max(np.abs(harmonic_residual(SPEC, eq, h, E))) < 1e-7


def test_harmonic_degenerate_h():
    eq = catalog_ideal_gas(1.0)
    with pytest.raises(DegenerateMetricError):
        harmonic_report(SPEC, eq, ConstantMetric(np.zeros((2, 2))), [1.0, 1.0])


def test_ng_domain_error():
    with pytest.raises(DomainError):
        ng_residual(SPEC, catalog_vdw(1.0, 0.1, 0.05), [1.0, 0.01])


def test_ng_degenerate():
    with pytest.raises(DegenerateMetricError):
        ng_residual(PhaseMetricSpec(k=0, Lambda=1.0), catalog_power_log("power", 1.0, 1.0, 0.0), [1.0, 1.0])


# constraint and trace relation


def test_constraint_T_examples():
    g = np.array([[2.0, 0.3], [0.3, 1.5]])
    assert np.all(constraint_T(g, g) == 0.0)
    assert np.max(np.abs(constraint_T(2 * g, g))) < 1e-15
    g3 = np.diag([1.0, 2.0, 3.0])
    np.testing.assert_allclose(constraint_T(g3, g3), -0.5 * g3)
    with pytest.raises(DegenerateMetricError):
        constraint_T(np.zeros((2, 2)), g)


def test_trace_relation_examples():
    g = PullbackMetric(SPEC, catalog_vdw(1.0, 0.1, 0.05)).metric([1.3, 2.1])
    assert trace_relation_residual(g, g) < 1e-12
    assert trace_relation_residual(5 * g, g) < 1e-12
    assert trace_relation_residual(np.diag([1.0, 7.0]), g) > 1e-2
    with pytest.raises(ValueError):
        trace_relation_residual(np.eye(3), np.eye(3))
    with pytest.raises(DegenerateMetricError):
        trace_relation_residual(np.zeros((2, 2)), g)


# volume action


def test_volume_action_flat_square():
    assert volume_action_field(ConstantMetric(np.eye(2)), [[0, 1], [0, 1]], [4, 4]) == pytest.approx(2.0, rel=1e-15)


def test_volume_action_ideal_gas():
    eq = catalog_ideal_gas(1.0)
    box = [[1.0, np.e], [1.0, np.e]]
    errs = [abs(volume_action(SPEC, eq, box, [m, m]) - 2.0) for m in (20, 40, 80)]
    assert errs[-1] < 1e-4
    for coarse, fine in zip(errs, errs[1:]):
        assert 3.8 < coarse / fine < 4.2


def test_volume_action_errors():
    flip = FunctionMetric(lambda E: np.diag([1.0, E[0]]), 2)
    with pytest.raises(SignChangeError):
        volume_action_field(flip, [[-1, 1], [0, 1]], [4, 4])
    with pytest.raises(DomainError):
        volume_action(SPEC, catalog_ideal_gas(1.0), [[-1, 1], [1, 2]], [4, 4])
    with pytest.raises(ValueError):
        volume_action(SPEC, catalog_ideal_gas(1.0), [[1, 2], [1, 2]], [4])


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_constraint_T_exact_for_h_equal_g(a, b, c):
    g = np.array([[a, b], [b, c]])
    if a * c - b * b == 0.0:
        return
    assert np.all(constraint_T(g, g) == 0.0)


@pytest.mark.parametrize(
    "coeffs,vanishes",
    [
        ((0.1, 0.0, -0.1 * 8 / 3, 0.0), True),  # dL/dU + 3/(2U^2) dL/dZ3 = 0 at U = 2
        ((0.0, 0.1, 0.0, -0.9), True),  # dL/dV + 1/V^2 dL/dZ4 = 0 at V = 3
        ((0.1, 0.0, 0.1 * 8 / 3, 0.0), False),
    ],
)
def test_ideal_gas_residual_with_varying_lambda(coeffs, vanishes):
    # linear Lambda in (U, V, 1/T, P/T): the residual vanishes exactly when the
    # reduced first-order conditions hold at the evaluation point
    cu, cv, c3, c4 = coeffs
    lam = ScalarField(lambda z: -1.0 + cu * z[1] + cv * z[2] + c3 * z[3] + c4 * z[4], 5)
    rep = ng_residual(PhaseMetricSpec(k=-1, Lambda=lam), catalog_ideal_gas(1.0), [2.0, 3.0])
    assert (rep.max_norm < 1e-12) == vanishes
