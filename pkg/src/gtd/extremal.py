"""Harmonic-map and Nambu-Goto residuals of the equilibrium embedding.

For an auxiliary metric h on the equilibrium space the tension of the
embedding Z(E) is

    D_h Z^A = |h|^(-1/2) (|h|^(1/2) h^ab Z^A_,a)_,b + Gamma^A_BC Z^B_,b Z^C_,c h^bc

and the Nambu-Goto equations are D_g Z^A = 0 with g the induced metric.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import deriv
from .deriv import FDConfig, finite_difference
from .equilibrium import MetricField, PullbackMetric, _require_nondegenerate, embedding_jets
from .errors import DegenerateMetricError, DomainError, SignChangeError
from .phasespace import PhaseMetricSpec, christoffel_from_derivs, christoffel_G, metric_G
from .systems import FundamentalEquation


@dataclass(frozen=True)
class ResidualReport:
    point: np.ndarray
    components: np.ndarray
    max_norm: float
    divergence: np.ndarray
    christoffel: np.ndarray


def _tension(Zd, Zdd, gamma, h, dh):
    """Divergence and connection terms of D_h Z^A.

    The divergence is expanded by the product rule:
    h^ab Z_,ab + (d_b h^ab) Z_,a + 1/2 h^ab Z_,a d_b ln|h|.
    """
    hi = np.linalg.inv(h)
    dhi = -np.einsum("ac,bcd,db->ab", hi, dh, hi)  # d_b h^ab summed over b: [a]
    dlog = np.einsum("cd,bcd->b", hi, dh)
    div = (
        np.einsum("ab,Aab->A", hi, Zdd)
        + np.einsum("a,Aa->A", dhi.sum(axis=1), Zd)
        + 0.5 * np.einsum("ab,Aa,b->A", hi, Zd, dlog)
    )
    conn = np.einsum("ABC,Bb,Cc,bc->A", gamma, Zd, Zd, hi)
    return div, conn


def _report(E, div, conn):
    comp = div + conn
    if not np.all(np.isfinite(comp)):
        raise DegenerateMetricError(f"non-finite residual at {E.tolist()}")
    return ResidualReport(E, comp, float(np.max(np.abs(comp))), div, conn)


def harmonic_residual(spec: PhaseMetricSpec, eq: FundamentalEquation, h: MetricField, E) -> np.ndarray:
    """Components D_h Z^A of the harmonic-map equations."""
    return harmonic_report(spec, eq, h, E).components


def harmonic_report(spec: PhaseMetricSpec, eq: FundamentalEquation, h: MetricField, E) -> ResidualReport:
    E = eq.check(E)
    Z, Zd, Zdd = embedding_jets(eq, E, order=3)
    hm = h.metric(E)
    _require_nondegenerate(hm, E)
    div, conn = _tension(Zd, Zdd, christoffel_G(spec, Z), hm, h.d_metric(E))
    return _report(E, div, conn)


def ng_residual(spec: PhaseMetricSpec, eq: FundamentalEquation, E) -> ResidualReport:
    """Nambu-Goto residual D_g Z^A with g the pullback metric."""
    return harmonic_report(spec, eq, PullbackMetric(spec, eq), E)


def ng_residual_fd(
    spec: PhaseMetricSpec, eq: FundamentalEquation, E, config: FDConfig = deriv.DEFAULT_FD
) -> np.ndarray:
    """Independent evaluation of D_g Z^A by differencing the flux as a whole.

    Uses only second-order jets of Phi, a finite-difference divergence of
    sqrt|g| g^ab Z^A_,a and Christoffels of G from a differenced metric.
    Meant as a test oracle for :func:`ng_residual`.
    """
    E = eq.check(E)

    def pieces(x):
        Z, Zd, _ = embedding_jets(eq, x, order=2)
        G = metric_G(spec, Z)
        return Z, Zd, G, Zd.T @ G @ Zd

    def flux(x):
        _, Zd, _, g = pieces(x)
        return np.sqrt(abs(np.linalg.det(g))) * Zd @ np.linalg.inv(g)  # [A, b]

    dflux = finite_difference(flux, E, 1, config)  # [c, A, b]
    Z, Zd, G, g = pieces(E)
    div = np.einsum("bAb->A", dflux) / np.sqrt(abs(np.linalg.det(g)))
    dG = finite_difference(lambda z: metric_G(spec, z), Z, 1, config)
    gamma = christoffel_from_derivs(G, dG)
    conn = np.einsum("ABC,Bb,Cc,bc->A", gamma, Zd, Zd, np.linalg.inv(g))
    return div + conn


def _contract(h, g) -> float:
    """h^cd g_cd.

    In two dimensions the adjugate form is used; with these groupings
    h = g gives exactly 2, so T(h=g) vanishes without roundoff.
    """
    if h.shape == (2, 2):
        det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
        if det == 0.0:
            raise DegenerateMetricError("auxiliary metric h is singular")
        num = (h[1, 1] * g[0, 0] - h[0, 1] * g[1, 0]) + (h[0, 0] * g[1, 1] - h[1, 0] * g[0, 1])
        return float(num / det)
    if np.linalg.det(h) == 0.0:
        raise DegenerateMetricError("auxiliary metric h is singular")
    return float(np.trace(np.linalg.solve(h, g)))


def constraint_T(h, g) -> np.ndarray:
    """T_ab = g_ab - 1/2 h_ab h^cd g_cd."""
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float)
    return g - h * (0.5 * _contract(h, g))


def trace_relation_residual(h, g) -> float:
    """|h^ab g_ab - 2 (|g|/|h|)^(1/2)| for two-dimensional metrics."""
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float)
    if h.shape != (2, 2) or g.shape != (2, 2):
        raise ValueError("the trace relation holds for n = 2 only")
    dh, dg = np.linalg.det(h), np.linalg.det(g)
    if dh == 0.0 or dg == 0.0:
        raise DegenerateMetricError("trace relation needs nondegenerate h and g")
    return float(abs(_contract(h, g) - 2.0 * np.sqrt(abs(dg) / abs(dh))))


def volume_action_field(field: MetricField, region, grid) -> float:
    """Midpoint rule for 2 * integral of sqrt|det g| over a box."""
    region = np.asarray(region, dtype=float).reshape(-1, 2)
    grid = [int(m) for m in grid]
    if len(grid) != region.shape[0] or any(m < 1 for m in grid):
        raise ValueError("grid must give a positive point count per dimension")
    widths = (region[:, 1] - region[:, 0]) / np.array(grid)
    axes = [lo + (np.arange(m) + 0.5) * w for (lo, _), m, w in zip(region, grid, widths)]
    total, sign = 0.0, 0
    for E in itertools.product(*axes):
        E = np.array(E)
        if not field.contains(E):
            raise DomainError(f"quadrature node {E.tolist()} outside the domain")
        det = np.linalg.det(field.metric(E))
        s = int(np.sign(det))
        if s == 0:
            raise DegenerateMetricError(f"det g = 0 at {E.tolist()}")
        if sign and s != sign:
            raise SignChangeError(f"det g changes sign inside the region near {E.tolist()}")
        sign = s
        total += np.sqrt(abs(det))
    return float(2.0 * total * np.prod(widths))


def volume_action(spec: PhaseMetricSpec, eq: FundamentalEquation, region, grid) -> float:
    """Nambu-Goto action 2 * integral sqrt|g| d^nE of the induced metric."""
    return volume_action_field(PullbackMetric(spec, eq), region, grid)
