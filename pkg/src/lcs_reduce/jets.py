"""Forward-mode second-order jets.

A ``Jet2`` carries the value, gradient and Hessian of a scalar expression
with respect to a fixed set of ``n`` chart coordinates.  Arithmetic
propagates exact second-order Taylor data, so one evaluation of a scalar
function on seeded coordinate jets yields all first and mixed second
partials at once, with the Hessian symmetric by construction.

Each jet carries an ``order`` in {0, 1, 2}: the highest derivative slot
that holds valid data.  Fresh variables and constants are order 2.
Extracting a partial derivative (``Jet2.partial``) lowers the order by
one; reading an invalidated slot raises ``JetOrderError`` instead of
silently returning garbage.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "Jet2",
    "JetError",
    "JetOrderError",
    "var",
    "variables",
    "const",
    "lift",
    "jet_arith",
    "sin",
    "cos",
    "exp",
    "sqrt",
    "eval_scalar",
    "eval_jet",
    "grad_and_hess",
    "fd_oracle",
]

Scalar = Union[float, int]
ScalarFunc = Callable[..., "Jet2 | float"]

_HESS_SYM_TOL = 1e-12


class JetError(ValueError):
    """Invalid jet arithmetic (dimension mismatch, division by zero value)."""


class JetOrderError(JetError):
    """A derivative slot was read past the jet's valid order."""


class Jet2:
    __slots__ = ("value", "_grad", "_hess", "n", "order")

    def __init__(self, value, grad, hess, order: int = 2):
        self.value = float(value)
        if not math.isfinite(self.value):
            raise JetError(f"non-finite jet value {value!r}")
        self._grad = np.asarray(grad, dtype=float)
        self.n = self._grad.shape[0]
        self._hess = np.asarray(hess, dtype=float)
        if self._hess.shape != (self.n, self.n):
            raise JetError(
                f"hessian shape {self._hess.shape} does not match dimension {self.n}"
            )
        self.order = order

    @property
    def grad(self) -> np.ndarray:
        if self.order < 1:
            raise JetOrderError("gradient requested from an order-0 jet")
        return self._grad

    @property
    def hess(self) -> np.ndarray:
        if self.order < 2:
            raise JetOrderError("hessian requested from a jet of order < 2")
        return self._hess

    # -- construction helpers -------------------------------------------------

    def _like(self, value, grad, hess, order=None) -> "Jet2":
        return Jet2(value, grad, hess, self.order if order is None else order)

    def _zero_arrays(self):
        return np.zeros(self.n), np.zeros((self.n, self.n))

    def _coerce(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            if other.n != self.n:
                raise JetError(f"mixing jets of dimension {self.n} and {other.n}")
            return other
        g, h = self._zero_arrays()
        return Jet2(float(other), g, h, 2)

    # -- ring operations ------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        order = min(self.order, o.order)
        g = self._grad + o._grad if order >= 1 else self._grad * 0.0
        h = self._hess + o._hess if order >= 2 else 0.0 * self._hess
        return Jet2(self.value + o.value, g, h, order)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self._grad, -self._hess, self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        order = min(self.order, o.order)
        v = self.value * o.value
        g = h = None
        if order >= 1:
            g = self.value * o._grad + o.value * self._grad
        else:
            g = self._grad * 0.0
        if order >= 2:
            cross = np.outer(self._grad, o._grad)
            h = self.value * o._hess + o.value * self._hess + cross + cross.T
        else:
            h = 0.0 * self._hess
        return Jet2(v, g, h, order)

    __rmul__ = __mul__

    def inv(self) -> "Jet2":
        if self.value == 0.0:
            raise JetError("1/x jet at x = 0")
        w = 1.0 / self.value
        g = h = None
        if self.order >= 1:
            g = -w * w * self._grad
        else:
            g = self._grad * 0.0
        if self.order >= 2:
            h = -w * w * self._hess + 2.0 * w**3 * np.outer(self._grad, self._grad)
        else:
            h = 0.0 * self._hess
        return Jet2(w, g, h, self.order)

    def __truediv__(self, other):
        return self * self._coerce(other).inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, k):
        k = float(k)
        if self.value == 0.0:
            if k == 0.0:
                return self._coerce(1.0)
            if k == 1.0:
                return self
            if k < 2.0:
                raise JetError(f"x**{k} jet at x = 0")
        return self._unary(
            self.value**k,
            k * self.value ** (k - 1),
            k * (k - 1) * self.value ** (k - 2),
        )

    # -- smooth primitives ----------------------------------------------------

    def _unary(self, f, df, d2f) -> "Jet2":
        g = h = None
        if self.order >= 1:
            g = df * self._grad
        else:
            g = self._grad * 0.0
        if self.order >= 2:
            h = df * self._hess + d2f * np.outer(self._grad, self._grad)
        else:
            h = 0.0 * self._hess
        return Jet2(f, g, h, self.order)

    def sin(self):
        return self._unary(math.sin(self.value), math.cos(self.value), -math.sin(self.value))

    def cos(self):
        return self._unary(math.cos(self.value), -math.sin(self.value), -math.cos(self.value))

    def exp(self):
        e = math.exp(self.value)
        return self._unary(e, e, e)

    def sqrt(self):
        if self.value <= 0.0:
            raise JetError(f"sqrt jet at x = {self.value}")
        r = math.sqrt(self.value)
        return self._unary(r, 0.5 / r, -0.25 / (r * self.value))

    # -- differentiation ------------------------------------------------------

    def partial(self, i: int) -> "Jet2":
        """The jet of the i-th partial derivative, valid to one order less."""
        if self.order < 1:
            raise JetOrderError("cannot differentiate an order-0 jet")
        g = self._hess[:, i] if self.order >= 2 else self._grad * 0.0
        return Jet2(self._grad[i], g, 0.0 * self._hess, self.order - 1)

    def check_symmetry(self, tol: float = _HESS_SYM_TOL) -> "Jet2":
        if self.order >= 2:
            skew = float(np.max(np.abs(self._hess - self._hess.T), initial=0.0))
            if skew > tol:
                raise JetError(f"hessian asymmetry {skew:.3e} exceeds {tol:.1e}")
        return self

    def __repr__(self):
        return f"Jet2({self.value!r}, n={self.n}, order={self.order})"


def var(value: Scalar, i: int, n: int) -> Jet2:
    """Coordinate jet: value with grad = e_i, zero hessian."""
    g = np.zeros(n)
    g[i] = 1.0
    return Jet2(value, g, np.zeros((n, n)), 2)


def variables(point: Sequence[Scalar]) -> list[Jet2]:
    """Seeded coordinate jets for every coordinate of ``point``."""
    p = np.asarray(point, dtype=float)
    return [var(p[i], i, p.shape[0]) for i in range(p.shape[0])]


def const(value: Scalar, n: int) -> Jet2:
    return Jet2(float(value), np.zeros(n), np.zeros((n, n)), 2)


def lift(x, template: Jet2) -> Jet2:
    """Coerce a number to a constant jet matching ``template``'s dimension."""
    if isinstance(x, Jet2):
        return x
    return const(float(x), template.n)


# -- generic transcendental wrappers (work on jets and plain numbers) ---------

def sin(x):
    return x.sin() if isinstance(x, Jet2) else math.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Jet2) else math.cos(x)


def exp(x):
    return x.exp() if isinstance(x, Jet2) else math.exp(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, Jet2) else math.sqrt(x)


_ARITH = {
    "add": lambda a, b: a + b,
    "mul": lambda a, b: a * b,
    "neg": lambda a: -a,
    "inv": lambda a: a.inv(),
    "sin": lambda a: a.sin(),
    "cos": lambda a: a.cos(),
    "exp": lambda a: a.exp(),
    "pow": lambda a, k: a**k,
}


def jet_arith(op: str, *args) -> Jet2:
    """Named dispatch over the jet ring and primitives."""
    try:
        fn = _ARITH[op]
    except KeyError:
        raise JetError(f"unknown jet operation {op!r}") from None
    return fn(*args)


# -- scalar function evaluation ------------------------------------------------

def eval_jet(f: ScalarFunc, point) -> Jet2:
    """Evaluate ``f`` on seeded coordinate jets at ``point``."""
    p = np.asarray(point, dtype=float)
    out = f(variables(p))
    if not isinstance(out, Jet2):
        out = const(float(out), p.shape[0])
    return out


def eval_scalar(f: ScalarFunc, point) -> float:
    """Value-only evaluation (plain floats, no derivative bookkeeping)."""
    out = f([float(x) for x in np.asarray(point, dtype=float)])
    return out.value if isinstance(out, Jet2) else float(out)


def grad_and_hess(f: ScalarFunc, point) -> tuple[float, np.ndarray, np.ndarray]:
    j = eval_jet(f, point)
    return j.value, j.grad.copy(), j.hess.copy()


def fd_oracle(f: ScalarFunc, point, h: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradient and Hessian, error O(h^2).

    Independent of the jet arithmetic: only value evaluations are used.
    """
    if h <= 0.0:
        raise ValueError("finite-difference step must be positive")
    p = np.asarray(point, dtype=float)
    n = p.shape[0]

    def val(q):
        v = eval_scalar(f, q)
        if not math.isfinite(v):
            raise ValueError("finite-difference stencil left the function's domain")
        return v

    f0 = val(p)
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        fp, fm = val(p + ei), val(p - ei)
        grad[i] = (fp - fm) / (2.0 * h)
        hess[i, i] = (fp - 2.0 * f0 + fm) / (h * h)
    for i in range(n):
        for j in range(i + 1, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            fpp = val(p + ei + ej)
            fpm = val(p + ei - ej)
            fmp = val(p - ei + ej)
            fmm = val(p - ei - ej)
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
    return grad, hess
