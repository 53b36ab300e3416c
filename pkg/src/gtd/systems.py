"""Fundamental equations and checks of the thermodynamic laws.

Every catalog potential is written with jet-aware operations, so its
derivatives to third order are exact.  Domains are explicit: evaluating
outside raises :class:`~gtd.errors.DomainError` instead of returning NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import deriv
from .deriv import FDConfig, Jet3, ScalarField, evaluate_jet
from .errors import MissingDegreeError, ParamError

ENERGY = "energy"
ENTROPY = "entropy"


@dataclass(frozen=True)
class FundamentalEquation:
    """A potential Phi(E^a) together with its naming and domain data."""

    name: str
    representation: str
    coordinates: tuple
    intensive_names: tuple
    potential: ScalarField
    params: Mapping[str, float] = field(default_factory=dict)
    homogeneity_degree: Optional[float] = None
    # energy representation: position of S among the extensive coordinates
    entropy_index: Optional[int] = None
    twin: Optional["FundamentalEquation"] = None

    def __post_init__(self):
        if self.representation not in (ENERGY, ENTROPY):
            raise ParamError(f"unknown representation {self.representation!r}")
        if self.n < 1:
            raise ParamError("a fundamental equation needs n >= 1")
        if len(self.coordinates) != self.n or len(self.intensive_names) != self.n:
            raise ParamError("coordinate and intensive names must have length n")

    @property
    def n(self) -> int:
        return self.potential.n

    def check(self, E) -> np.ndarray:
        return self.potential.check(E)

    def contains(self, E) -> bool:
        return self.potential.contains(E)

    def __call__(self, E) -> float:
        return self.potential(E)

    def jet(self, E, order: int = 2, config: FDConfig = deriv.DEFAULT_FD) -> Jet3:
        return evaluate_jet(self.potential, E, order, config)

    def entropy(self, E) -> float:
        """Entropy at E: the potential itself or the S coordinate."""
        if self.representation == ENTROPY:
            return self(E)
        if self.entropy_index is None:
            raise ParamError(f"{self.name}: energy representation without an entropy coordinate")
        return float(self.check(E)[self.entropy_index])


def _positive(names: Sequence[str], idx: Sequence[int]):
    def guard(x):
        for i in idx:
            if not x[i] > 0.0:
                return f"{names[i]} must be > 0"
        return None

    return guard


def _all_guards(*guards):
    def guard(x):
        for g in guards:
            msg = g(x)
            if msg:
                return msg
        return None

    return guard


def _require_positive(**kw):
    for k, v in kw.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ParamError(f"{k} must be a positive number, got {v!r}")


def _require_finite(**kw):
    for k, v in kw.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise ParamError(f"{k} must be a finite number, got {v!r}")


def _power_energy_twin(name, kappa, c, params, b=0.0, a=0.0):
    """U(S,V) = exp(2S/3kappa) (V-b)^(-2c/3) - a/V."""

    def U(x):
        out = deriv.exp(x[0] * (2.0 / (3.0 * kappa))) * (x[1] - b) ** (-2.0 * c / 3.0)
        if a:
            out = out - a / x[1]
        return out

    def guard(x):
        if not x[1] > b:
            return f"V must be > {b}"
        return None

    return FundamentalEquation(
        name=name,
        representation=ENERGY,
        coordinates=("S", "V"),
        intensive_names=("T", "-P"),
        potential=ScalarField(U, 2, domain=guard, name=f"{name}[energy]"),
        params=dict(params),
        entropy_index=0,
    )


def catalog_ideal_gas(kappa: float = 1.0, representation: str = ENTROPY) -> FundamentalEquation:
    """Monocomponent ideal gas, S(U,V) = (3 kappa/2) ln U + kappa ln V.

    The entropy form carries its energy twin U(S,V) = e^(2S/3kappa) V^(-2/3)
    in ``twin``; ``representation="energy"`` returns the twin directly.
    """
    _require_positive(kappa=kappa)
    params = {"kappa": kappa}
    energy = _power_energy_twin("ideal_gas", kappa, 1.0, params)
    if representation == ENERGY:
        return energy
    if representation != ENTROPY:
        raise ParamError(f"unknown representation {representation!r}")

    def S(x):
        return 1.5 * kappa * deriv.log(x[0]) + kappa * deriv.log(x[1])

    return FundamentalEquation(
        name="ideal_gas",
        representation=ENTROPY,
        coordinates=("U", "V"),
        intensive_names=("1/T", "P/T"),
        potential=ScalarField(S, 2, domain=_positive(("U", "V"), (0, 1)), name="ideal_gas"),
        params=params,
        twin=energy,
    )


def catalog_vdw(
    kappa: float = 1.0, a: float = 0.0, b: float = 0.0, representation: str = ENTROPY
) -> FundamentalEquation:
    """Van der Waals gas, S = (3 kappa/2) ln(U + a/V) + kappa ln(V - b).

    Domain: V > b and U + a/V > 0.
    """
    _require_positive(kappa=kappa)
    _require_finite(a=a, b=b)
    if a < 0 or b < 0:
        raise ParamError("van der Waals constants a and b must be >= 0")
    params = {"kappa": kappa, "a": a, "b": b}
    energy = _power_energy_twin("vdw", kappa, 1.0, params, b=b, a=a)
    if representation == ENERGY:
        return energy
    if representation != ENTROPY:
        raise ParamError(f"unknown representation {representation!r}")

    def S(x):
        return 1.5 * kappa * deriv.log(x[0] + a / x[1]) + kappa * deriv.log(x[1] - b)

    def guard(x):
        if not x[1] > b:
            return f"V must be > b = {b}"
        if not x[0] + a / x[1] > 0.0:
            return "U + a/V must be > 0"
        return None

    return FundamentalEquation(
        name="vdw",
        representation=ENTROPY,
        coordinates=("U", "V"),
        intensive_names=("1/T", "P/T"),
        potential=ScalarField(S, 2, domain=guard, name="vdw"),
        params=params,
        twin=energy,
    )


def catalog_gen_ideal(
    kappa: float = 1.0, c: float = 1.0, representation: str = ENTROPY
) -> FundamentalEquation:
    """Generalized ideal gas S = (3 kappa/2) ln U + kappa c ln V.

    Energy twin: U(S,V) = e^(2S/3kappa) V^(-2c/3).
    """
    _require_positive(kappa=kappa)
    _require_finite(c=c)
    params = {"kappa": kappa, "c": c}
    energy = _power_energy_twin("gen_ideal", kappa, c, params)
    if representation == ENERGY:
        return energy
    if representation != ENTROPY:
        raise ParamError(f"unknown representation {representation!r}")

    def S(x):
        return 1.5 * kappa * deriv.log(x[0]) + kappa * c * deriv.log(x[1])

    return FundamentalEquation(
        name="gen_ideal",
        representation=ENTROPY,
        coordinates=("U", "V"),
        intensive_names=("1/T", "P/T"),
        potential=ScalarField(S, 2, domain=_positive(("U", "V"), (0, 1)), name="gen_ideal"),
        params=params,
        twin=energy,
    )


def catalog_power_log(
    kind: str = "power", S0: float = 1.0, alpha: float = 1.0, beta: float = 1.0, c: float = 1.0
) -> FundamentalEquation:
    """Two-variable families S = S0 U^alpha V^beta or S = S0 ln(U^alpha + c V^beta).

    The power family is homogeneous of degree alpha + beta.
    """
    _require_finite(S0=S0, alpha=alpha, beta=beta, c=c)
    if S0 == 0:
        raise ParamError("S0 must be nonzero")
    params = {"S0": S0, "alpha": alpha, "beta": beta, "c": c}
    base = _positive(("U", "V"), (0, 1))
    if kind == "power":

        def S(x):
            return S0 * (x[0] ** alpha) * (x[1] ** beta)

        guard, degree = base, alpha + beta
    elif kind == "log":

        def S(x):
            return S0 * deriv.log(x[0] ** alpha + c * x[1] ** beta)

        def arg_positive(x):
            if not x[0] ** alpha + c * x[1] ** beta > 0.0:
                return "U^alpha + c V^beta must be > 0"
            return None

        guard, degree = _all_guards(base, arg_positive), None
    else:
        raise ParamError(f"kind must be 'power' or 'log', got {kind!r}")
    return FundamentalEquation(
        name=f"power_log[{kind}]",
        representation=ENTROPY,
        coordinates=("U", "V"),
        intensive_names=("1/T", "P/T"),
        potential=ScalarField(S, 2, domain=guard, name=f"power_log[{kind}]"),
        params=dict(params, kind=kind),
        homogeneity_degree=degree,
    )


def log_part(coef: float) -> ScalarField:
    """1-d part coef * ln x on x > 0."""
    return ScalarField(
        lambda x: coef * deriv.log(x[0]), 1, domain=_positive(("x",), (0,)), name=f"{coef}*log"
    )


def power_part(coef: float, exponent: float) -> ScalarField:
    """1-d part coef * x**exponent on x > 0."""
    return ScalarField(
        lambda x: coef * x[0] ** exponent,
        1,
        domain=_positive(("x",), (0,)),
        name=f"{coef}*x^{exponent}",
    )


def linear_part(coef: float) -> ScalarField:
    return ScalarField(lambda x: coef * x[0], 1, name=f"{coef}*x")


def catalog_separable(
    parts: Sequence[ScalarField], coordinates: Optional[Sequence[str]] = None
) -> FundamentalEquation:
    """Separable entropy S(E^1..E^n) = sum_i S_i(E^i) from 1-d parts."""
    parts = list(parts)
    if not parts:
        raise ParamError("separable equation needs at least one part")
    for p in parts:
        if p.n != 1:
            raise ParamError(f"separable parts must be 1-d fields, {p.name} has n={p.n}")
    n = len(parts)
    names = tuple(coordinates) if coordinates else tuple(f"E{i + 1}" for i in range(n))

    def S(x):
        total = 0.0
        for i, p in enumerate(parts):
            total = total + p.func([x[i]])
        return total

    def guard(x):
        for i, p in enumerate(parts):
            if p.domain is not None:
                msg = p.domain(np.array([x[i]]))
                if msg:
                    return f"{names[i]}: {msg}"
        return None

    return FundamentalEquation(
        name="separable",
        representation=ENTROPY,
        coordinates=names,
        intensive_names=tuple(f"dS/d{c}" for c in names),
        potential=ScalarField(
            S, n, analytic=all(p.analytic for p in parts), domain=guard, name="separable"
        ),
        params={},
    )


def custom_equation(
    func: Callable,
    n: int,
    representation: str = ENTROPY,
    coordinates: Optional[Sequence[str]] = None,
    intensive_names: Optional[Sequence[str]] = None,
    analytic: bool = False,
    domain=None,
    homogeneity_degree: Optional[float] = None,
    entropy_index: Optional[int] = None,
    name: str = "custom",
) -> FundamentalEquation:
    """Wrap a user potential; derivatives come from finite differences unless ``analytic``."""
    coordinates = tuple(coordinates) if coordinates else tuple(f"E{i + 1}" for i in range(n))
    intensive_names = (
        tuple(intensive_names) if intensive_names else tuple(f"I{i + 1}" for i in range(n))
    )
    return FundamentalEquation(
        name=name,
        representation=representation,
        coordinates=coordinates,
        intensive_names=intensive_names,
        potential=ScalarField(func, n, analytic=analytic, domain=domain, name=name),
        homogeneity_degree=homogeneity_degree,
        entropy_index=entropy_index,
    )


@dataclass(frozen=True)
class SecondLawReport:
    ok: bool
    eigenvalues: np.ndarray


def check_second_law(eq: FundamentalEquation, E, rtol: float = 1e-12) -> SecondLawReport:
    """Convexity of U (energy representation) or concavity of S (entropy representation)."""
    hess = eq.jet(E, 2).hess
    eig = np.linalg.eigvalsh(hess)
    slack = rtol * max(1.0, float(np.max(np.abs(eig))))
    if eq.representation == ENERGY:
        ok = bool(np.all(eig >= -slack))
    else:
        ok = bool(np.all(eig <= slack))
    return SecondLawReport(ok, eig)


def check_euler(eq: FundamentalEquation, E, degree: Optional[float] = None) -> float:
    """Residual beta*Phi - E^a dPhi/dE^a of Euler's identity."""
    beta = eq.homogeneity_degree if degree is None else degree
    if beta is None:
        raise MissingDegreeError(f"{eq.name} has no homogeneity degree")
    x = eq.check(E)
    jet = eq.jet(x, 1)
    return float(beta * jet.value - x @ jet.grad)


def equations_of_state(eq: FundamentalEquation, E) -> np.ndarray:
    """Intensive variables I_a = dPhi/dE^a (labels in ``eq.intensive_names``)."""
    return eq.jet(E, 1).grad.copy()


def _separable_from_config(parts_cfg):
    if not isinstance(parts_cfg, (list, tuple)):
        raise ParamError("separable 'parts' must be a list")
    parts = []
    for p in parts_cfg:
        try:
            kind = p.get("kind")
            if kind == "log":
                parts.append(log_part(float(p["coef"])))
            elif kind == "power":
                parts.append(power_part(float(p["coef"]), float(p["exponent"])))
            elif kind == "linear":
                parts.append(linear_part(float(p["coef"])))
            else:
                raise ParamError(f"unknown separable part kind {kind!r}")
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise ParamError(f"bad separable part {p!r}: {exc}") from None
    return catalog_separable(parts)


# name -> (factory, parameter defaults); factories take representation where it applies
CATALOG = {
    "ideal_gas": (catalog_ideal_gas, {"kappa": 1.0}),
    "vdw": (catalog_vdw, {"kappa": 1.0, "a": 0.0, "b": 0.0}),
    "gen_ideal": (catalog_gen_ideal, {"kappa": 1.0, "c": 1.0}),
    "power_log": (catalog_power_log, {"kind": "power", "S0": 1.0, "alpha": 1.0, "beta": 1.0, "c": 1.0}),
    "separable": (None, {"parts": []}),
}

TWIN_SYSTEMS = ("ideal_gas", "vdw", "gen_ideal")


def build_system(name: str, params: Mapping, representation: str = ENTROPY) -> FundamentalEquation:
    """Construct a catalog system from its name and parameter map."""
    if name not in CATALOG:
        raise ParamError(f"unknown system {name!r}; choose from {sorted(CATALOG)}")
    factory, defaults = CATALOG[name]
    unknown = set(params) - set(defaults)
    if unknown:
        raise ParamError(f"unknown parameters for {name}: {sorted(unknown)}")
    kw = dict(defaults, **params)
    if name == "separable":
        if representation != ENTROPY:
            raise ParamError("separable systems are entropy-representation only")
        return _separable_from_config(kw["parts"])
    for k, v in kw.items():
        if k != "kind" and not isinstance(v, (int, float)):
            raise ParamError(f"parameter {k} must be numeric, got {v!r}")
    if name in TWIN_SYSTEMS:
        return factory(representation=representation, **kw)
    if representation != ENTROPY:
        raise ParamError(f"{name} is entropy-representation only")
    return factory(**kw)
