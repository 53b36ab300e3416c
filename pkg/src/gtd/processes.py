"""Geodesics of the thermodynamic metric as quasi-static processes."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from .equilibrium import MetricField
from .errors import DegenerateMetricError, DomainError, NoConvergenceError
from .systems import FundamentalEquation

ENTROPY_SLACK = 1e-10


@dataclass(frozen=True)
class GeodesicPath:
    """Sampled geodesic.  ``truncated`` marks an early stop at the domain boundary."""

    tau: np.ndarray
    E: np.ndarray
    Edot: np.ndarray
    length: float
    speed_drift: float
    truncated: bool = False
    entropy_trace: Optional[np.ndarray] = None
    admissible: Optional[bool] = None
    violation_tau: Optional[float] = None

    @property
    def endpoint(self) -> np.ndarray:
        return self.E[-1]

    def reversed(self) -> "GeodesicPath":
        """The same curve run backwards, tau' = tau_end - tau."""
        tau = self.tau[-1] - self.tau[::-1]
        trace = None if self.entropy_trace is None else self.entropy_trace[::-1].copy()
        return replace(
            self,
            tau=tau,
            E=self.E[::-1].copy(),
            Edot=-self.Edot[::-1],
            entropy_trace=trace,
            admissible=None,
            violation_tau=None,
        )


def geodesic_rhs(field: MetricField, E, Edot):
    """(dE/dtau, d2E/dtau2) with d2E^a = -Gamma^a_bc Edot^b Edot^c."""
    Edot = np.asarray(Edot, dtype=float)
    gam = field.christoffel(E)
    return Edot.copy(), -np.einsum("abc,b,c->a", gam, Edot, Edot)


def speeds(field: MetricField, E: np.ndarray, Edot: np.ndarray) -> np.ndarray:
    """g_ab Edot^a Edot^b at every sample."""
    return np.array([v @ field.metric(x) @ v for x, v in zip(E, Edot)])


def _drift(sp: np.ndarray) -> float:
    ref = abs(sp[0])
    if ref == 0.0:
        return float(np.max(np.abs(sp)))
    return float(np.max(np.abs(sp - sp[0])) / ref)


def integrate_geodesic(
    field: MetricField,
    E0,
    Edot0,
    tau_max: float,
    step: float,
    eq: Optional[FundamentalEquation] = None,
) -> GeodesicPath:
    """Classical fixed-step RK4 integration of the geodesic equations.

    The step is shrunk slightly so that tau_max is hit exactly.  Leaving the
    metric's domain stops the integration and sets ``truncated``.  With
    ``eq`` given, the entropy trace and second-law verdict are filled in.
    """
    if step <= 0 or tau_max < 0:
        raise ValueError("step must be > 0 and tau_max >= 0")
    E0 = np.asarray(E0, dtype=float)
    v0 = np.asarray(Edot0, dtype=float)
    if not field.contains(E0):
        raise DomainError(f"initial point {E0.tolist()} outside the domain")
    nsteps = max(1, math.ceil(tau_max / step - 1e-9)) if tau_max > 0 else 0
    h = tau_max / nsteps if nsteps else 0.0

    taus, xs, vs = [0.0], [E0], [v0]
    x, v = E0, v0
    truncated = False
    for i in range(nsteps):
        try:
            k1x, k1v = geodesic_rhs(field, x, v)
            k2x, k2v = _rhs_checked(field, x + 0.5 * h * k1x, v + 0.5 * h * k1v)
            k3x, k3v = _rhs_checked(field, x + 0.5 * h * k2x, v + 0.5 * h * k2v)
            k4x, k4v = _rhs_checked(field, x + h * k3x, v + h * k3v)
        except DomainError:
            truncated = True
            break
        xn = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        vn = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not field.contains(xn):
            truncated = True
            break
        x, v = xn, vn
        taus.append((i + 1) * h)
        xs.append(x)
        vs.append(v)

    tau, E, Edot = np.array(taus), np.array(xs), np.array(vs)
    sp = speeds(field, E, Edot)
    path = GeodesicPath(
        tau=tau,
        E=E,
        Edot=Edot,
        length=_length_from_speeds(tau, sp),
        speed_drift=_drift(sp),
        truncated=truncated,
    )
    if eq is not None:
        path = with_entropy(eq, path)
    return path


def _rhs_checked(field, x, v):
    if not field.contains(x):
        raise DomainError(f"stage point {x.tolist()} outside the domain")
    return geodesic_rhs(field, x, v)


def _length_from_speeds(tau, sp):
    if len(tau) < 2:
        return 0.0
    integrand = np.sqrt(np.maximum(np.abs(sp), 0.0))
    return float(simpson(integrand, x=tau))


def thermodynamic_length(field: MetricField, path: GeodesicPath) -> float:
    """L = integral sqrt(g_ab Edot^a Edot^b) dtau by composite Simpson."""
    return _length_from_speeds(path.tau, speeds(field, path.E, path.Edot))


def cumulative_length(field: MetricField, path: GeodesicPath) -> np.ndarray:
    """Running thermodynamic length at each sample (trapezoid on the speed)."""
    s = np.sqrt(np.abs(speeds(field, path.E, path.Edot)))
    out = np.zeros_like(path.tau)
    if len(s) > 1:
        out[1:] = np.cumsum(0.5 * (s[1:] + s[:-1]) * np.diff(path.tau))
    return out


def entropy_trace(eq: FundamentalEquation, path: GeodesicPath) -> np.ndarray:
    return np.array([eq.entropy(x) for x in path.E])


def second_law_filter(eq: FundamentalEquation, path: GeodesicPath, slack: float = ENTROPY_SLACK):
    """(admissible, first violating tau): entropy must never drop below its running max."""
    S = entropy_trace(eq, path)
    running = -np.inf
    for t, s in zip(path.tau, S):
        if s < running - slack:
            return False, float(t)
        running = max(running, s)
    return True, None


def with_entropy(eq: FundamentalEquation, path: GeodesicPath) -> GeodesicPath:
    ok, t = second_law_filter(eq, path)
    return replace(path, entropy_trace=entropy_trace(eq, path), admissible=ok, violation_tau=t)


def shoot_between(
    field: MetricField,
    E_start,
    E_end,
    tol: float = 1e-8,
    steps: int = 200,
    max_iter: int = 50,
    eq: Optional[FundamentalEquation] = None,
) -> GeodesicPath:
    """Geodesic from E_start to E_end on tau in [0, 1] by Newton shooting.

    The unknown is the initial velocity; the Jacobian of the endpoint map is
    differenced.  Trial shots that leave the domain (or meet a degenerate
    metric) are retried with a halved Newton step.  Convergence is measured in the norm of |g| at E_end.
    """
    a = np.asarray(E_start, dtype=float)
    b = np.asarray(E_end, dtype=float)
    for x in (a, b):
        if not field.contains(x):
            raise DomainError(f"endpoint {x.tolist()} outside the domain")
    # |g| = V |w| V^T keeps the endpoint norm definite for indefinite metrics
    w, V = np.linalg.eigh(field.metric(b))
    g_end = (V * np.abs(w)) @ V.T
    step = 1.0 / steps

    def shoot(v):
        try:
            path = integrate_geodesic(field, a, v, 1.0, step)
        except DegenerateMetricError as exc:
            raise DomainError(f"trial shot reached a degenerate metric: {exc}") from None
        if path.truncated:
            raise DomainError("trial shot left the domain")
        return path, path.endpoint - b

    def gnorm(d):
        return math.sqrt(d @ g_end @ d)

    def column(v, res, j, dv):
        # forward difference from the accepted shot, backward near the boundary
        e = np.zeros(len(v))
        e[j] = dv
        try:
            return (shoot(v + e)[1] - res) / dv
        except DomainError:
            pass
        try:
            return (res - shoot(v - e)[1]) / dv
        except DomainError:
            raise NoConvergenceError("every Jacobian probe left the domain") from None

    v = b - a
    for _ in range(60):
        try:
            path, res = shoot(v)
            break
        except DomainError:
            v = 0.5 * v
    else:
        raise NoConvergenceError("no initial shot stays inside the domain")

    for _ in range(max_iter):
        err = gnorm(res)
        if err <= tol:
            return with_entropy(eq, path) if eq is not None else path
        dv = 1e-7 * max(1.0, float(np.max(np.abs(v))))
        J = np.column_stack([column(v, res, j, dv) for j in range(len(v))])
        delta = np.linalg.solve(J, -res)
        lam = 1.0
        while True:
            try:
                cand_path, cand_res = shoot(v + lam * delta)
                if gnorm(cand_res) < err:
                    break
            except DomainError:
                pass
            lam *= 0.5
            if lam < 1e-6:
                raise NoConvergenceError(f"shooting stalled at endpoint error {err:.3g}")
        v = v + lam * delta
        path, res = cand_path, cand_res
    raise NoConvergenceError(
        f"shooting did not converge in {max_iter} iterations (error {gnorm(res):.3g})"
    )


def flat_chart_ideal_gas(E) -> np.ndarray:
    """(xi, eta) = (ln U, ln V); the ideal-gas metric is the identity there."""
    E = np.asarray(E, dtype=float)
    if np.any(E <= 0):
        raise DomainError("flat chart needs U, V > 0")
    return np.log(E)


def flat_chart_jacobian(E) -> np.ndarray:
    """d(xi, eta)/d(U, V)."""
    E = np.asarray(E, dtype=float)
    if np.any(E <= 0):
        raise DomainError("flat chart needs U, V > 0")
    return np.diag(1.0 / E)
