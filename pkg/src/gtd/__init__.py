"""Numerical geometrothermodynamics.

Build a fundamental equation (:mod:`gtd.systems`), pick a Legendre invariant
phase-space metric (:class:`gtd.phasespace.PhaseMetricSpec`) and study the
induced geometry of equilibrium states: curvature (:mod:`gtd.equilibrium`),
Nambu-Goto residuals (:mod:`gtd.extremal`) and geodesic processes
(:mod:`gtd.processes`).
"""

from .deriv import FDConfig, Jet3, ScalarField, crosscheck_jet, evaluate_jet
from .equilibrium import (
    ClosedFormMetric,
    ConstantMetric,
    chart_metric,
    CurvatureReport,
    FunctionMetric,
    MetricField,
    PullbackMetric,
    check_first_law,
    closed_form_metric,
    curvature,
    embed,
    pullback_metric,
)
from .errors import *  # noqa: F401,F403
from .extremal import (
    ResidualReport,
    constraint_T,
    harmonic_report,
    harmonic_residual,
    ng_residual,
    trace_relation_residual,
    volume_action,
)
from .phasespace import (
    PhaseMetricSpec,
    PhasePoint,
    check_legendre_invariance,
    christoffel_G,
    contact_coefficient,
    gibbs_form,
    legendre_from_tilde,
    legendre_to_tilde,
    legendre_transform,
    metric_G,
)
from .processes import (
    GeodesicPath,
    cumulative_length,
    flat_chart_ideal_gas,
    flat_chart_jacobian,
    geodesic_rhs,
    integrate_geodesic,
    second_law_filter,
    shoot_between,
    thermodynamic_length,
)
from .systems import (
    FundamentalEquation,
    catalog_gen_ideal,
    catalog_ideal_gas,
    catalog_power_log,
    catalog_separable,
    catalog_vdw,
    build_system,
    check_euler,
    custom_equation,
    check_second_law,
    equations_of_state,
)

__version__ = "0.1.0"
