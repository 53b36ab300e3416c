"""The space of equilibrium states: embedding, induced metric, curvature."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import deriv
from .deriv import FDConfig, finite_difference
from .errors import DegenerateMetricError, DomainError
from .phasespace import PhaseMetricSpec, PhasePoint, _conformal_powers, metric_G_jet
from .systems import FundamentalEquation


def embed(eq: FundamentalEquation, E) -> PhasePoint:
    """phi(E) = (Phi(E), E, dPhi/dE)."""
    E = eq.check(E)
    jet = eq.jet(E, 1)
    return PhasePoint.from_parts(jet.value, E, jet.grad, eq.representation)


def embedding_jets(eq: FundamentalEquation, E, order: int = 3):
    """Z(E), Z^A_{,a} and (order 3) Z^A_{,ab} of the equilibrium embedding."""
    E = eq.check(E)
    n = eq.n
    jet = eq.jet(E, max(order, 2))
    Z = np.concatenate([[jet.value], E, jet.grad])
    Zd = np.vstack([jet.grad[None, :], np.eye(n), jet.hess])
    Zdd = None
    if order >= 3:
        Zdd = np.concatenate([jet.hess[None], np.zeros((n, n, n)), jet.third])
    return Z, Zd, Zdd


def check_first_law(eq: FundamentalEquation, E, dE) -> float:
    """|dPhi(dE) - I_a dE^a| at E."""
    dE = np.asarray(dE, dtype=float)
    dphi = eq.jet(E, 1).grad @ dE
    return float(abs(dphi - embed(eq, E).intensive @ dE))


class MetricField:
    """A metric g_ab on the space of equilibrium states.

    Subclasses provide ``metric``; ``d_metric`` (shape [c, a, b]) and
    ``dd_metric`` (shape [c, d, a, b]) default to finite differences.
    """

    provenance = "user"

    def __init__(self, n: int, domain: Optional[Callable] = None, config: FDConfig = deriv.DEFAULT_FD):
        self.n = n
        self._domain = domain
        self.config = config

    def contains(self, E) -> bool:
        E = np.asarray(E, dtype=float)
        if not np.all(np.isfinite(E)):
            return False
        return True if self._domain is None else bool(self._domain(E))

    def metric(self, E) -> np.ndarray:
        raise NotImplementedError

    def d_metric(self, E) -> np.ndarray:
        return finite_difference(self.metric, np.asarray(E, dtype=float), 1, self.config)

    def dd_metric(self, E) -> np.ndarray:
        return finite_difference(self.metric, np.asarray(E, dtype=float), 2, self.config)

    def metric_and_derivative(self, E):
        """(g, dg) at E; subclasses may share work between the two."""
        return self.metric(E), self.d_metric(E)

    def inverse(self, E) -> np.ndarray:
        g = self.metric(E)
        _require_nondegenerate(g, E)
        return np.linalg.inv(g)

    def christoffel(self, E) -> np.ndarray:
        """Gamma^a_bc, indexed [a, b, c]."""
        g, dg = self.metric_and_derivative(E)
        _require_nondegenerate(g, E)
        lowered = _lowered_christoffel(dg)
        return np.einsum("ad,dbc->abc", np.linalg.inv(g), lowered)


def _require_nondegenerate(g, E):
    det = np.linalg.det(g)
    scale = np.max(np.abs(g)) ** g.shape[0] if g.size else 0.0
    if not np.isfinite(det) or det == 0.0 or abs(det) <= 1e-14 * scale:
        raise DegenerateMetricError(f"degenerate metric at {np.asarray(E).tolist()} (det={det})")


def _lowered_christoffel(dg: np.ndarray) -> np.ndarray:
    """Gamma_dbc = 1/2 (d_b g_dc + d_c g_db - d_d g_bc) from dg[c, a, b]."""
    return 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)


class ConstantMetric(MetricField):
    provenance = "constant"

    def __init__(self, matrix):
        g = np.asarray(matrix, dtype=float)
        super().__init__(g.shape[0])
        self.g = g

    def metric(self, E):
        return self.g.copy()

    def d_metric(self, E):
        return np.zeros((self.n,) * 3)

    def dd_metric(self, E):
        return np.zeros((self.n,) * 4)


class FunctionMetric(MetricField):
    """User metric given as a function E -> g(E); all derivatives by finite differences."""

    def __init__(self, func: Callable, n: int, domain: Optional[Callable] = None, config: FDConfig = deriv.DEFAULT_FD):
        super().__init__(n, domain, config)
        self.func = func

    def metric(self, E):
        return np.asarray(self.func(np.asarray(E, dtype=float)), dtype=float)


class _InducedMetric(MetricField):
    """Shared plumbing for metrics induced by (spec, eq)."""

    def __init__(self, spec: PhaseMetricSpec, eq: FundamentalEquation, config: FDConfig = deriv.DEFAULT_FD):
        super().__init__(eq.n, eq.contains, config)
        self.spec = spec
        self.eq = eq

    def dd_metric(self, E):
        # analytic first derivatives differenced once more
        return finite_difference(self.d_metric, self.eq.check(E), 1, self.config)


class PullbackMetric(_InducedMetric):
    """g = J^T G J with J = dZ/dE along the embedding."""

    provenance = "pullback"

    def metric(self, E):
        Z, Zd, _ = embedding_jets(self.eq, E, order=2)
        G, _ = metric_G_jet(self.spec, Z)
        return Zd.T @ G @ Zd

    def d_metric(self, E):
        return self.metric_and_derivative(E)[1]

    def metric_and_derivative(self, E):
        Z, Zd, Zdd = embedding_jets(self.eq, E, order=3)
        G, dG = metric_G_jet(self.spec, Z)
        # d_c g_ab = Z_ac G Z_b + Z_a G Z_bc + Z_a Z_b (dG/dZ^C) Z^C_c
        t1 = np.einsum("Aac,AB,Bb->cab", Zdd, G, Zd)
        t2 = np.einsum("Aa,AB,Bbc->cab", Zd, G, Zdd)
        t3 = np.einsum("Aa,Bb,CAB,Cc->cab", Zd, Zd, dG, Zd)
        return Zd.T @ G @ Zd, t1 + t2 + t3


class ClosedFormMetric(_InducedMetric):
    """Component formula g_ab = 1/2 Lambda [(E_a I_a)^(2k+1) + (E_b I_b)^(2k+1)] Phi_ab."""

    provenance = "closed-form"

    def _pieces(self, E, order):
        Z, Zd, Zdd = embedding_jets(self.eq, E, order=order)
        n = self.n
        _, w, dw = _conformal_powers(self.spec, Z, n)
        lam = self.spec.conformal_jet(Z, 1)
        return Z, Zd, Zdd, w, dw, lam

    @staticmethod
    def _assemble(lam, w, hess):
        n = len(w)
        g = np.empty((n, n))
        for a in range(n):
            g[a, a] = lam * w[a] * hess[a, a]
            for b in range(a + 1, n):
                g[a, b] = g[b, a] = 0.5 * lam * (w[a] + w[b]) * hess[a, b]
        return g

    def metric(self, E):
        _, Zd, _, w, _, lam = self._pieces(E, 2)
        return self._assemble(lam.value, w, Zd[1 + self.n :])

    def d_metric(self, E):
        return self.metric_and_derivative(E)[1]

    def metric_and_derivative(self, E):
        Z, Zd, Zdd, w, dw, lam = self._pieces(E, 3)
        n = self.n
        E = Z[1 : 1 + n]
        grad, hess, third = Zd[0], Zd[1 + n :], Zdd[1 + n :]
        # d_c w_a = p (E_a I_a)^(p-1) (delta_ac I_a + E_a Phi_ac)
        dprod = np.diag(grad) + E[:, None] * hess
        dw_dE = dw[:, None] * dprod  # [a, c]
        dlam = Zd.T @ lam.grad  # [c]
        wsum = w[:, None] + w[None, :]
        dwsum = dw_dE.T[:, :, None] + dw_dE.T[:, None, :]  # [c, a, b]
        out = 0.5 * lam.value * (dwsum * hess[None] + wsum[None] * third)
        out += 0.5 * dlam[:, None, None] * wsum[None] * hess[None]
        return self._assemble(lam.value, w, hess), out


@dataclass(frozen=True)
class CurvatureReport:
    point: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    bianchi: float


def curvature_from_derivs(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray):
    """Christoffel, Riemann, Ricci and scalar curvature from g and its partials.

    Convention: R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb
    + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb, R_bd = R^a_bad,
    R = g^bd R_bd.
    """
    gi = np.linalg.inv(g)
    low = _lowered_christoffel(dg)
    gam = np.einsum("ad,dbc->abc", gi, low)
    # d_e Gamma_dbc, ddg[e, c, a, b] = d_e d_c g_ab
    dlow = 0.5 * (
        np.einsum("ebdc->edbc", ddg) + np.einsum("ecdb->edbc", ddg) - ddg
    )
    dgi = -np.einsum("af,efh,hd->ead", gi, dg, gi)
    dgam = np.einsum("ead,dbc->eabc", dgi, low) + np.einsum("ad,edbc->eabc", gi, dlow)
    # dgam[e, a, b, c] = d_e Gamma^a_bc
    riem = (
        np.einsum("cadb->abcd", dgam)
        - np.einsum("dacb->abcd", dgam)
        + np.einsum("ace,edb->abcd", gam, gam)
        - np.einsum("ade,ecb->abcd", gam, gam)
    )
    ricci = np.einsum("abad->bd", riem)
    scalar = float(np.einsum("bd,bd->", gi, ricci))
    return gam, riem, ricci, scalar


def _bianchi_residual(riem):
    cyc = riem + np.einsum("acdb->abcd", riem) + np.einsum("adbc->abcd", riem)
    return float(np.max(np.abs(cyc))) if cyc.size else 0.0


def curvature(field: MetricField, E) -> CurvatureReport:
    E = np.asarray(E, dtype=float)
    if not field.contains(E):
        raise DomainError(f"point {E.tolist()} outside the metric's domain")
    g = field.metric(E)
    _require_nondegenerate(g, E)
    gam, riem, ricci, scalar = curvature_from_derivs(g, field.d_metric(E), field.dd_metric(E))
    return CurvatureReport(E, gam, riem, ricci, scalar, _bianchi_residual(riem))


def pullback_metric(spec: PhaseMetricSpec, eq: FundamentalEquation, E) -> np.ndarray:
    g = PullbackMetric(spec, eq).metric(E)
    _require_nondegenerate(g, E)
    return g


def closed_form_metric(spec: PhaseMetricSpec, eq: FundamentalEquation, E) -> np.ndarray:
    g = ClosedFormMetric(spec, eq).metric(E)
    _require_nondegenerate(g, E)
    return g


def chart_metric(field: MetricField, E, chart_jacobian) -> np.ndarray:
    """Components of g in a chart X(E), given dX/dE at E."""
    Jinv = np.linalg.inv(np.asarray(chart_jacobian, dtype=float))
    return Jinv.T @ field.metric(E) @ Jinv
