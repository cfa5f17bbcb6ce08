"""Cotangent charts over base charts.

A base chart with coordinates (q_1..q_n) induces a cotangent chart with
coordinates (q_1..q_n, c_1..c_n), fiber coordinates unbounded.  This
module builds the tautological 1-form eta = sum c_i dq_i, the twisted
structure (omega = d eta - theta~ ^ eta, stored through its closed-form
coefficient expansion), cotangent lifts of base diffeomorphisms by
push-forward (covectors transform by the transposed inverse Jacobian,
which preserves eta exactly), lifts of infinitesimal generators, and the
vertical omega-dual of the pulled-back Lee form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import (
    Chart,
    DegenerateFormError,
    Form,
    FormError,
    LCSStructure,
    SmoothMap,
    VectorField,
    closedness_residual,
    compose_jet,
    compose_through,
    form_from_coeffs,
    twisted_derivative,
)
from .jets import Jet2, const, variables

__all__ = [
    "CotangentChart",
    "LiftedField",
    "cotangent_chart",
    "projection_map",
    "base_pullback",
    "tautological_form",
    "lcs_form",
    "direct_lcs_two_form",
    "lift_fundamental_field",
    "cotangent_lift_map",
    "theta_omega_dual",
]


@dataclass(frozen=True)
class CotangentChart:
    base: Chart
    chart: Chart

    @property
    def n(self) -> int:
        return self.base.dim

    def q_part(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=float)[: self.n]

    def c_part(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=float)[self.n :]


def cotangent_chart(base: Chart) -> CotangentChart:
    n = base.dim
    if base.box is None:
        box = None
    else:
        box = tuple(base.box) + tuple((None, None) for _ in range(n))
    big = Chart(id=f"T*{base.id}", dim=2 * n, box=box)
    return CotangentChart(base=base, chart=big)


def projection_map(c: CotangentChart) -> SmoothMap:
    comps = [(lambda i: (lambda coords: coords[i]))(i) for i in range(c.n)]
    return SmoothMap(c.chart, c.base, comps, name="pi")


def base_pullback(c: CotangentChart, a: Form, name: str = "") -> Form:
    """Pull a base form up along the bundle projection.

    The projection is a coordinate slice, so coefficients are reused with
    an exact chain rule into the doubled chart (no Jacobian minors).
    """
    if a.chart.id != c.base.id:
        raise FormError(f"form lives on {a.chart.id!r}, not on base {c.base.id!r}")
    n = c.n

    def jet_fn(p):
        vs = variables(p)
        jets = a.coeff_jets(np.asarray(p, dtype=float)[:n])
        return {idx: compose_jet(j, vs[:n]) for idx, j in jets.items()}

    return Form(c.chart, a.degree, jet_fn, name or f"pi*({a.name})")


def tautological_form(c: CotangentChart) -> Form:
    n = c.n
    coeffs = {(i,): (lambda coords, i=i: coords[n + i]) for i in range(n)}
    return form_from_coeffs(c.chart, 1, coeffs, name="eta")


def direct_lcs_two_form(c: CotangentChart, theta_base: Form) -> Form:
    """omega as the twisted differential of eta (construction route)."""
    theta_tilde = base_pullback(c, theta_base, name="theta~")
    return twisted_derivative(theta_tilde, tautological_form(c), name="d_theta(eta)")


def lcs_form(c: CotangentChart, theta_base: Form,
             check_points=None, tol: float = 1e-9) -> LCSStructure:
    """The twisted cotangent structure through its coefficient expansion

        omega = sum dc_i ^ dq_i - sum_{i<j} (theta_i c_j - theta_j c_i) dq_i ^ dq_j

    with Lee form the pulled-back theta.  Coefficients here are exact
    second-order jets, so omega supports two further differentiations.
    """
    if theta_base.degree != 1:
        raise FormError("Lee form must be a 1-form")
    if theta_base.chart.id != c.base.id:
        raise FormError("Lee form must live on the base chart")
    n = c.n
    if check_points is not None:
        res = closedness_residual(theta_base, check_points)
        if res > tol:
            raise DegenerateFormError("Lee form is not closed on the base", res)

    theta_tilde = base_pullback(c, theta_base, name="theta~")

    def jet_fn(p):
        vs = variables(p)
        theta_jets = theta_base.coeff_jets(np.asarray(p, dtype=float)[:n])
        th = {i: compose_jet(j, vs[:n]) for (i,), j in theta_jets.items()}
        out = {}
        for i in range(n):
            out[(i, n + i)] = const(-1.0, 2 * n)
        for i in range(n):
            for j in range(i + 1, n):
                ti, tj = th.get(i), th.get(j)
                term = None
                if ti is not None:
                    term = -(ti * vs[n + j])
                if tj is not None:
                    piece = tj * vs[n + i]
                    term = piece if term is None else term + piece
                if term is not None:
                    out[(i, j)] = term
        return out

    omega = Form(c.chart, 2, jet_fn, name="omega_theta")
    return LCSStructure(omega, theta_tilde, name=f"lcs({c.chart.id})")


@dataclass(frozen=True)
class LiftedField:
    base_field: VectorField
    lifted: VectorField


def lift_fundamental_field(c: CotangentChart, x_base: VectorField) -> LiftedField:
    """Lift of a generator: q-part X^i(q), fiber part -sum_j c_j dX^j/dq_i."""
    if x_base.chart.id != c.base.id:
        raise FormError("field must live on the base chart")
    n = c.n

    def q_comp(i):
        return lambda coords: x_base.comps[i](list(coords)[:n])

    def c_comp(i):
        def jet_at(p):
            vs = variables(p)
            total = const(0.0, 2 * n)
            for j in range(n):
                xj = x_base.comps[j](vs[:n])
                if not isinstance(xj, Jet2):
                    continue  # constant component: zero derivative
                total = total + vs[n + j] * xj.partial(i)
            return -total

        return lambda coords: compose_through(jet_at, coords)

    comps = [q_comp(i) for i in range(n)] + [c_comp(i) for i in range(n)]
    lifted = VectorField(c.chart, comps, name=f"{x_base.name}~")
    return LiftedField(base_field=x_base, lifted=lifted)


def cotangent_lift_map(source: CotangentChart, phi: SmoothMap,
                       target: CotangentChart | None = None,
                       _build_inverse: bool = True) -> SmoothMap:
    """Push-forward action on covectors: (q, c) -> (phi(q), (d phi^{-1})^T c).

    The inverse Jacobian is taken at phi(q); this choice preserves the
    tautological form exactly.
    """
    target = target or source
    if phi.inverse is None:
        raise FormError("cotangent lift requires a registered inverse")
    if phi.source.id != source.base.id or phi.target.id != target.base.id:
        raise FormError("base map endpoints do not match the cotangent charts")
    n, m = source.n, target.n

    def q_comp(t):
        return lambda coords: phi.comps[t](list(coords)[:n])

    def c_comp(t):
        def jet_at(p):
            vs = variables(p)
            inner = [_as_jet(g(vs[:n]), 2 * n) for g in phi.comps]
            yval = np.array([j.value for j in inner])
            yjets = variables(yval)
            total = const(0.0, 2 * n)
            for j in range(n):
                inv_j = _as_jet(phi.inverse.comps[j](yjets), m)
                entry = compose_jet(inv_j.partial(t), inner)
                total = total + vs[n + j] * entry
            return total

        return lambda coords: compose_through(jet_at, coords)

    comps = [q_comp(t) for t in range(m)] + [c_comp(t) for t in range(m)]
    lift = SmoothMap(source.chart, target.chart, comps, name=f"T*({phi.name})")
    if _build_inverse:
        lift.inverse = cotangent_lift_map(target, phi.inverse, source, _build_inverse=False)
        lift.inverse.inverse = lift
    return lift


def theta_omega_dual(c: CotangentChart, theta_base: Form) -> VectorField:
    """The omega-dual of the pulled-back Lee form: sum theta_i(q) d/dc_i.

    Vertical by construction; agrees pointwise with the linear-solve dual
    of the twisted structure.
    """
    if theta_base.degree != 1:
        raise FormError("Lee form must be a 1-form")
    n = c.n
    theta_tilde = base_pullback(c, theta_base)

    def zero(_coords):
        return 0.0

    def c_comp(i):
        def jet_at(p):
            j = theta_tilde.coeff_jets(p).get((i,))
            return j if j is not None else const(0.0, 2 * n)

        return lambda coords: compose_through(jet_at, coords)

    comps = [zero] * n + [c_comp(i) for i in range(n)]
    return VectorField(c.chart, comps, name="theta_dual")


def _as_jet(x, n: int) -> Jet2:
    if isinstance(x, Jet2):
        return x
    return const(float(x), n)
