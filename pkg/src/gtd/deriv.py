"""Third-order jets of scalar fields.

A :class:`Jet3` carries the value, gradient, Hessian and third-derivative
tensor of a scalar function at a point.  Jets support the usual arithmetic
(Leibniz rule) and composition with elementary functions (Faa di Bruno to
third order), so a potential written in terms of ``+ - * / **``, ``log``,
``exp`` and ``sqrt`` yields exact derivatives when evaluated on
:meth:`Jet3.variables`.  Fields that cannot be written that way fall back
to central finite differences with one Richardson extrapolation level.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, NonFiniteError

EPS = np.finfo(float).eps


def _sym3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return a_ij b_k + a_ik b_j + a_jk b_i."""
    return (
        np.einsum("ij,k->ijk", a, b)
        + np.einsum("ik,j->ijk", a, b)
        + np.einsum("jk,i->ijk", a, b)
    )


class Jet3:
    """Value and derivatives up to third order of a scalar at a point.

    ``hess`` and ``third`` may be ``None`` on jets truncated by
    :func:`evaluate_jet`; arithmetic requires full jets.
    """

    __slots__ = ("value", "grad", "hess", "third")
    __array_priority__ = 1000

    def __init__(self, value, grad, hess=None, third=None):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = None if hess is None else np.asarray(hess, dtype=float)
        self.third = None if third is None else np.asarray(third, dtype=float)

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    @property
    def order(self) -> int:
        if self.third is not None:
            return 3
        if self.hess is not None:
            return 2
        return 1

    @classmethod
    def constant(cls, c: float, n: int) -> "Jet3":
        return cls(c, np.zeros(n), np.zeros((n, n)), np.zeros((n, n, n)))

    @classmethod
    def variables(cls, x: Sequence[float]) -> list["Jet3"]:
        """Coordinate projections x_i as jets at ``x``."""
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        out = []
        for i in range(n):
            g = np.zeros(n)
            g[i] = 1.0
            out.append(cls(x[i], g, np.zeros((n, n)), np.zeros((n, n, n))))
        return out

    def truncate(self, order: int) -> "Jet3":
        return Jet3(
            self.value,
            self.grad,
            self.hess if order >= 2 else None,
            self.third if order >= 3 else None,
        )

    def is_finite(self) -> bool:
        parts = [np.array(self.value), self.grad, self.hess, self.third]
        return all(np.all(np.isfinite(p)) for p in parts if p is not None)

    # -- arithmetic ---------------------------------------------------------

    def _lift(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            return other
        return Jet3.constant(float(other), self.n)

    def __add__(self, other):
        if not isinstance(other, Jet3):
            return Jet3(self.value + other, self.grad, self.hess, self.third)
        return Jet3(
            self.value + other.value,
            self.grad + other.grad,
            self.hess + other.hess,
            self.third + other.third,
        )

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.value, -self.grad, -self.hess, -self.third)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            c = float(other)
            return Jet3(c * self.value, c * self.grad, c * self.hess, c * self.third)
        f, g = self, other
        value = f.value * g.value
        grad = f.grad * g.value + f.value * g.grad
        hess = (
            f.hess * g.value
            + np.outer(f.grad, g.grad)
            + np.outer(g.grad, f.grad)
            + f.value * g.hess
        )
        third = (
            f.third * g.value
            + _sym3(f.hess, g.grad)
            + _sym3(g.hess, f.grad)
            + f.value * g.third
        )
        return Jet3(value, grad, hess, third)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet3):
            return self * (1.0 / float(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet3):
            return (self.log() * p).exp()
        p = float(p)
        if p == 0.0:
            return Jet3.constant(1.0, self.n)
        if p == 1.0:
            return self
        x = self.value
        return self.compose(
            x**p,
            p * x ** (p - 1),
            p * (p - 1) * x ** (p - 2),
            p * (p - 1) * (p - 2) * x ** (p - 3),
        )

    def __rpow__(self, base):
        return (self * math.log(float(base))).exp()

    # -- elementary functions -----------------------------------------------

    def compose(self, f0: float, f1: float, f2: float, f3: float) -> "Jet3":
        """Jet of f(self) given f and its first three derivatives at self.value."""
        w = self
        grad = f1 * w.grad
        hess = f2 * np.outer(w.grad, w.grad) + f1 * w.hess
        third = (
            f3 * np.einsum("i,j,k->ijk", w.grad, w.grad, w.grad)
            + f2 * _sym3(w.hess, w.grad)
            + f1 * w.third
        )
        return Jet3(f0, grad, hess, third)

    def reciprocal(self) -> "Jet3":
        x = self.value
        return self.compose(1.0 / x, -1.0 / x**2, 2.0 / x**3, -6.0 / x**4)

    def log(self) -> "Jet3":
        x = self.value
        return self.compose(math.log(x), 1.0 / x, -1.0 / x**2, 2.0 / x**3)

    def exp(self) -> "Jet3":
        e = math.exp(self.value)
        return self.compose(e, e, e, e)

    def sqrt(self) -> "Jet3":
        return self**0.5

    def __repr__(self):
        return f"Jet3(value={self.value!r}, grad={self.grad!r})"


def log(x):
    return x.log() if isinstance(x, Jet3) else math.log(x)


def exp(x):
    return x.exp() if isinstance(x, Jet3) else math.exp(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, Jet3) else math.sqrt(x)


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference settings.

    Steps are ``base * max(1, |x_i|)``.  The gradient base is cbrt(eps);
    second and third derivatives use larger bases so that roundoff, which
    grows like eps/h**order, stays below the Richardson-reduced truncation
    error.
    """

    grad_base: float = EPS ** (1.0 / 3.0)
    hess_base: float = EPS ** (1.0 / 5.0)
    third_base: float = EPS ** (1.0 / 6.0)
    richardson: bool = True

    def base(self, order: int) -> float:
        return (self.grad_base, self.hess_base, self.third_base)[order - 1]

    def steps(self, x: np.ndarray, order: int) -> np.ndarray:
        return self.base(order) * np.maximum(1.0, np.abs(x))


DEFAULT_FD = FDConfig()


@dataclass(frozen=True)
class ScalarField:
    """A scalar function on R^n.

    ``func`` receives a sequence of coordinates.  When ``analytic`` is true
    it must also accept :class:`Jet3` coordinates (i.e. be written with jet
    aware operations) and exact derivatives are used.  ``domain`` returns
    ``None`` for admissible points or a message describing the violation.
    """

    func: Callable
    n: int
    analytic: bool = True
    domain: Optional[Callable[[np.ndarray], Optional[str]]] = None
    name: str = "field"

    def check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.n:
            raise ValueError(f"{self.name}: expected {self.n} coordinates, got {x.shape[0]}")
        if not np.all(np.isfinite(x)):
            raise DomainError(f"{self.name}: non-finite point {x}")
        if self.domain is not None:
            msg = self.domain(x)
            if msg:
                raise DomainError(f"{self.name}: {msg} at {x.tolist()}")
        return x

    def contains(self, x) -> bool:
        try:
            self.check(x)
        except DomainError:
            return False
        return True

    def __call__(self, x) -> float:
        x = self.check(x)
        v = float(self.func(list(x)))
        if not math.isfinite(v):
            raise NonFiniteError(f"{self.name}: non-finite value at {x.tolist()}")
        return v


def finite_difference(func: Callable, x, order: int, config: FDConfig = DEFAULT_FD):
    """Central-difference derivative tensor of ``func`` at ``x``.

    ``func`` may be scalar or array valued; derivative axes come first in the
    result, so the shape is ``(n,)*order + value_shape``.  Each entry is the
    product of ``order`` central difference operators (exact symmetry by
    construction), improved by one Richardson step (h, h/2).
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    h = config.steps(x, order)
    f0 = np.asarray(func(x), dtype=float)
    out = np.zeros((n,) * order + f0.shape)
    signs = list(itertools.product((1.0, -1.0), repeat=order))

    def stencil(idx, scale):
        acc = np.zeros(f0.shape)
        hs = [h[i] * scale for i in idx]
        for s in signs:
            y = x.copy()
            for i, si, hi in zip(idx, s, hs):
                y[i] += si * hi
            acc = acc + np.prod(s) * np.asarray(func(y), dtype=float)
        return acc / (2.0**order * np.prod(hs))

    for idx in itertools.combinations_with_replacement(range(n), order):
        d = stencil(idx, 1.0)
        if config.richardson:
            d = (4.0 * stencil(idx, 0.5) - d) / 3.0
        for perm in set(itertools.permutations(idx)):
            out[perm] = d
    return out


def _fd_jet(field: ScalarField, x: np.ndarray, order: int, config: FDConfig) -> Jet3:
    f = lambda y: field.func(list(y))
    value = field(x)
    grad = finite_difference(f, x, 1, config)
    hess = finite_difference(f, x, 2, config) if order >= 2 else None
    third = finite_difference(f, x, 3, config) if order >= 3 else None
    return Jet3(value, grad, hess, third)


def _analytic_jet(field: ScalarField, x: np.ndarray) -> Jet3:
    try:
        jet = field.func(Jet3.variables(x))
    except (ZeroDivisionError, OverflowError) as exc:
        raise NonFiniteError(f"{field.name}: singular derivative at {x.tolist()} ({exc})") from None
    if not isinstance(jet, Jet3):
        jet = Jet3.constant(float(jet), field.n)
    return jet


def evaluate_jet(
    field: ScalarField,
    point,
    order: int = 2,
    config: FDConfig = DEFAULT_FD,
    analytic: Optional[bool] = None,
) -> Jet3:
    """Evaluate ``field`` and its derivatives up to ``order`` at ``point``.

    The analytic path is used when the field supports it (override with
    ``analytic``); otherwise central finite differences.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    x = field.check(point)
    use_analytic = field.analytic if analytic is None else analytic
    if use_analytic:
        jet = _analytic_jet(field, x).truncate(order)
    else:
        jet = _fd_jet(field, x, order, config)
    if not jet.is_finite():
        raise NonFiniteError(f"{field.name}: non-finite derivatives at {x.tolist()}")
    return jet


def crosscheck_jet(field: ScalarField, point, config: FDConfig = DEFAULT_FD) -> float:
    """Largest relative gap between analytic and finite-difference jets.

    Each derivative order is compared in the max norm, relative to the
    larger of that order's analytic max entry and the field value.
    """
    if not field.analytic:
        raise ValueError(f"{field.name} has no analytic derivatives to cross-check")
    a = evaluate_jet(field, point, 3, config)
    f = evaluate_jet(field, point, 3, config, analytic=False)
    worst = 0.0
    for da, df in ((a.grad, f.grad), (a.hess, f.hess), (a.third, f.third)):
        scale = max(np.max(np.abs(da)), abs(a.value), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(da - df))) / scale)
    return worst
