"""The thermodynamic phase space: contact form, Legendre maps and metric G.

Coordinates are laid out as Z = (Phi, E^1..E^n, I^1..I^n), so a phase
point in n degrees of freedom has 2n+1 entries.  Extensive indices in this
module are 0-based positions a = 0..n-1; E^a sits at Z[1+a] and I^a at
Z[1+n+a].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .deriv import Jet3, ScalarField, evaluate_jet
from .errors import DegenerateMetricError, ParamError, SingularProductError


def phase_dim(Z) -> int:
    """Number n of degrees of freedom for a phase vector of length 2n+1."""
    m = len(Z)
    if m < 3 or m % 2 == 0:
        raise ValueError(f"phase vectors have odd length >= 3, got {m}")
    return (m - 1) // 2


@dataclass(frozen=True)
class PhasePoint:
    Z: np.ndarray
    representation: str = "entropy"

    def __post_init__(self):
        Z = np.asarray(self.Z, dtype=float).reshape(-1)
        phase_dim(Z)
        if not np.all(np.isfinite(Z)):
            raise ValueError(f"non-finite phase point {Z}")
        object.__setattr__(self, "Z", Z)

    @classmethod
    def from_parts(cls, potential, extensive, intensive, representation="entropy"):
        return cls(np.concatenate([[potential], extensive, intensive]), representation)

    @property
    def n(self) -> int:
        return phase_dim(self.Z)

    @property
    def potential(self) -> float:
        return float(self.Z[0])

    @property
    def extensive(self) -> np.ndarray:
        return self.Z[1 : 1 + self.n]

    @property
    def intensive(self) -> np.ndarray:
        return self.Z[1 + self.n :]


def _as_array(Z) -> np.ndarray:
    if isinstance(Z, PhasePoint):
        return Z.Z
    return np.asarray(Z, dtype=float).reshape(-1)


@dataclass(frozen=True)
class PhaseMetricSpec:
    """Data (Lambda, k) of the Legendre invariant metric

    G = (dPhi - I_a dE^a)^2 + Lambda * sum_a (E^a I^a)^(2k+1) dE^a dI^a.

    ``Lambda`` is a number or a :class:`ScalarField` of the 2n+1 phase
    coordinates.
    """

    k: int = -1
    Lambda: Union[float, ScalarField] = -1.0
    representation: str = "entropy"

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k:
            raise ParamError(f"k must be an integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if not isinstance(self.Lambda, ScalarField):
            lam = float(self.Lambda)
            if lam == 0.0 or not math.isfinite(lam):
                raise ParamError("constant Lambda must be finite and nonzero")
            object.__setattr__(self, "Lambda", lam)

    @property
    def exponent(self) -> int:
        return 2 * self.k + 1

    @property
    def is_constant(self) -> bool:
        return not isinstance(self.Lambda, ScalarField)

    def conformal_jet(self, Z, order: int = 1) -> Jet3:
        """Lambda and its partials with respect to all phase coordinates."""
        Z = _as_array(Z)
        if self.is_constant:
            return Jet3.constant(self.Lambda, Z.shape[0]).truncate(order)
        return evaluate_jet(self.Lambda, Z, order)

    def to_config(self) -> dict:
        if not self.is_constant:
            raise ParamError("only constant Lambda can be serialized")
        return {"k": self.k, "Lambda": f"const:{self.Lambda!r}", "representation": self.representation}

    @classmethod
    def from_config(cls, cfg) -> "PhaseMetricSpec":
        lam = cfg.get("Lambda", "const:-1")
        if isinstance(lam, str):
            kind, _, val = lam.partition(":")
            if kind != "const":
                raise ParamError(f"unsupported Lambda {lam!r}; use 'const:<value>'")
            try:
                lam = float(val)
            except ValueError:
                raise ParamError(f"bad Lambda value {lam!r}") from None
        elif isinstance(lam, bool) or not isinstance(lam, (int, float)):
            raise ParamError(f"bad Lambda value {lam!r}")
        k = cfg.get("k", -1)
        if isinstance(k, bool) or not isinstance(k, (int, float)) or int(k) != k:
            raise ParamError(f"k must be an integer, got {k!r}")
        return cls(int(k), float(lam), cfg.get("representation", "entropy"))


def gibbs_form(Z, v) -> float:
    """Theta(v) = v_Phi - sum_a I^a v_{E^a}."""
    Z = _as_array(Z)
    v = np.asarray(v, dtype=float)
    n = phase_dim(Z)
    return float(v[0] - Z[1 + n :] @ v[1 : 1 + n])


# -- exterior algebra on coordinate forms ------------------------------------
# A p-form is a dict mapping strictly increasing index tuples to coefficients.


def _sort_sign(idx: tuple):
    """Sorted index tuple and permutation sign, or (None, 0) on repeats."""
    if len(set(idx)) < len(idx):
        return None, 0
    sign = 1
    arr = list(idx)
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return tuple(arr), sign


def wedge(alpha: dict, beta: dict) -> dict:
    out: dict = {}
    for ia, ca in alpha.items():
        for ib, cb in beta.items():
            key, sign = _sort_sign(ia + ib)
            if sign:
                out[key] = out.get(key, 0.0) + sign * ca * cb
    return {k: v for k, v in out.items() if v != 0.0}


def gibbs_1form(Z) -> dict:
    Z = _as_array(Z)
    n = phase_dim(Z)
    form = {(0,): 1.0}
    for a in range(n):
        if Z[1 + n + a] != 0.0:
            form[(1 + a,)] = -float(Z[1 + n + a])
    return form


def gibbs_2form(n: int) -> dict:
    """dTheta = sum_a dE^a ^ dI^a."""
    return {(1 + a, 1 + n + a): 1.0 for a in range(n)}


def contact_coefficient(n: int, Z=None) -> float:
    """Coefficient of Theta ^ (dTheta)^n on dPhi ^ dE^1..dE^n ^ dI^1..dI^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if Z is None:
        Z = np.zeros(2 * n + 1)
    form = gibbs_1form(Z)
    d = gibbs_2form(n)
    for _ in range(n):
        form = wedge(form, d)
    return float(form.get(tuple(range(2 * n + 1)), 0.0))


# -- the metric G ---------------------------------------------------------------


def _conformal_powers(spec: PhaseMetricSpec, Z: np.ndarray, n: int):
    """(E^a I^a)^(2k+1) and its derivative with respect to the product."""
    p = spec.exponent
    prod = Z[1 : 1 + n] * Z[1 + n :]
    if p < 0 and np.any(prod == 0.0):
        raise SingularProductError(f"E^a I^a = 0 with exponent 2k+1 = {p}")
    w = prod**p
    dw = p * prod ** (p - 1)
    return prod, w, dw


def metric_G(spec: PhaseMetricSpec, Z) -> np.ndarray:
    """Matrix of the Legendre invariant metric at the phase point Z."""
    return metric_G_jet(spec, Z)[0]


def metric_G_jet(spec: PhaseMetricSpec, Z):
    """G_AB and its partials dG[C, A, B] = dG_AB / dZ^C at Z."""
    Z = _as_array(Z)
    n = phase_dim(Z)
    m = 2 * n + 1
    I = Z[1 + n :]
    prod, w, dw = _conformal_powers(spec, Z, n)
    lam = spec.conformal_jet(Z, 1)
    conf = 0.5 * lam.value * w
    if np.any(conf == 0.0):
        raise DegenerateMetricError(f"metric G degenerate at {Z.tolist()} (Lambda*(E I)^(2k+1) = 0)")

    G = np.zeros((m, m))
    G[0, 0] = 1.0
    G[0, 1 : 1 + n] = G[1 : 1 + n, 0] = -I
    G[1 : 1 + n, 1 : 1 + n] = np.outer(I, I)
    for a in range(n):
        G[1 + a, 1 + n + a] = G[1 + n + a, 1 + a] = conf[a]

    dG = np.zeros((m, m, m))
    for c in range(n):
        ic = 1 + n + c
        # theta^2 part depends only on the intensive variables
        dG[ic, 0, 1 + c] = dG[ic, 1 + c, 0] = -1.0
        dG[ic, 1 + c, 1:1 + n] += I
        dG[ic, 1:1 + n, 1 + c] += I
    for a in range(n):
        ea, ia = 1 + a, 1 + n + a
        col = 0.5 * lam.grad * w[a]
        col[ea] += 0.5 * lam.value * dw[a] * I[a]
        col[ia] += 0.5 * lam.value * dw[a] * Z[ea]
        dG[:, ea, ia] += col
        dG[:, ia, ea] += col
    return G, dG


def christoffel_from_derivs(G: np.ndarray, dG: np.ndarray) -> np.ndarray:
    """Gamma^A_BC from a metric and its partials dG[C, A, B]."""
    Gi = np.linalg.inv(G)
    # lowered[D, B, C] = 1/2 (d_B G_DC + d_C G_DB - d_D G_BC)
    lowered = 0.5 * (
        np.einsum("bdc->dbc", dG) + np.einsum("cdb->dbc", dG) - dG
    )
    return np.einsum("ad,dbc->abc", Gi, lowered)


def christoffel_G(spec: PhaseMetricSpec, Z) -> np.ndarray:
    """Christoffel symbols Gamma^A_BC of G (array indexed [A, B, C])."""
    G, dG = metric_G_jet(spec, Z)
    return christoffel_from_derivs(G, dG)


# -- Legendre transformations ----------------------------------------------------


def _subset(subset: Iterable[int], n: int) -> list:
    idx = sorted(set(int(i) for i in subset))
    if any(i < 0 or i >= n for i in idx):
        raise ValueError(f"subset {idx} out of range for n={n}")
    return idx


def legendre_from_tilde(Zt, subset: Iterable[int]) -> np.ndarray:
    """Plain coordinates from transformed ones on the index subset i:

    Phi = Phi~ - sum_i E~^i I~^i,  E^i = -I~^i,  I^i = E~^i,  identity elsewhere.
    """
    Zt = _as_array(Zt).copy()
    n = phase_dim(Zt)
    Z = Zt.copy()
    for i in _subset(subset, n):
        e, s = 1 + i, 1 + n + i
        Z[0] -= Zt[e] * Zt[s]
        Z[e] = -Zt[s]
        Z[s] = Zt[e]
    return Z


def legendre_to_tilde(Z, subset: Iterable[int]) -> np.ndarray:
    """Inverse of :func:`legendre_from_tilde`."""
    Z = _as_array(Z)
    n = phase_dim(Z)
    Zt = Z.copy()
    for i in _subset(subset, n):
        e, s = 1 + i, 1 + n + i
        Zt[0] -= Z[e] * Z[s]
        Zt[e] = Z[s]
        Zt[s] = -Z[e]
    return Zt


def legendre_transform(Z, subset: Iterable[int], inverse: bool = False) -> PhasePoint:
    """Legendre transformation on an index subset.

    The forward direction maps transformed coordinates to plain ones
    (:func:`legendre_from_tilde`); ``inverse=True`` goes the other way.
    """
    rep = Z.representation if isinstance(Z, PhasePoint) else "entropy"
    out = legendre_to_tilde(Z, subset) if inverse else legendre_from_tilde(Z, subset)
    return PhasePoint(out, rep)


def legendre_jacobian(Zt, subset: Iterable[int]) -> np.ndarray:
    """J[A, B] = dZ^A / dZ~^B of :func:`legendre_from_tilde` at Zt."""
    Zt = _as_array(Zt)
    n = phase_dim(Zt)
    J = np.eye(2 * n + 1)
    for i in _subset(subset, n):
        e, s = 1 + i, 1 + n + i
        J[0, e] = -Zt[s]
        J[0, s] = -Zt[e]
        J[e, e] = 0.0
        J[e, s] = -1.0
        J[s, s] = 0.0
        J[s, e] = 1.0
    return J


def check_legendre_invariance(
    spec: Optional[PhaseMetricSpec],
    Z,
    subset: Iterable[int],
    metric: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> float:
    """Max-norm gap between the Legendre-transformed metric and its own form in Z~.

    ``metric`` replaces :func:`metric_G` (e.g. a flat Euclidean metric as a
    negative control).
    """
    if metric is None:
        metric = lambda z: metric_G(spec, z)
    Z = _as_array(Z)
    subset = list(subset)
    Zt = legendre_to_tilde(Z, subset)
    J = legendre_jacobian(Zt, subset)
    transformed = J.T @ metric(Z) @ J
    return float(np.max(np.abs(transformed - metric(Zt))))


def euclidean_metric(Z) -> np.ndarray:
    return np.eye(len(_as_array(Z)))


def all_subsets(n: int) -> list:
    return [list(c) for r in range(n + 1) for c in itertools.combinations(range(n), r)]
