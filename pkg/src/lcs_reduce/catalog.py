"""Executable scenario bundles: charted examples with actions and quotients.

Every scenario is a list of self-contained chart contexts.  A context
carries one base chart with its cotangent chart, the Lee form, the group
action data, an optional level section alpha_xi, optional quotient data
(projection p, section s, quotient Lee form), samplers, and the catalog
of forms and scalar functions fed to the generic identity sweeps.

The 3-sphere is charted by two stereographic charts (poles (+-1,0,0,0));
sampling draws from the ambient Gaussian, normalizes, and maps into a
chart.  The circle factor of product scenarios is charted by two angle
charts with constant angle form dt.  All chart formulas are hand-coded
closed forms so that every registered coefficient is an exact
second-order jet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cotangent import (
    CotangentChart,
    cotangent_chart,
    lcs_form,
    tautological_form,
)
from .forms import (
    Chart,
    Form,
    LCSStructure,
    SmoothMap,
    VectorField,
    coeff_func,
    constant_one_form,
    form_from_coeffs,
    form_sum,
    pullback,
    scale_by_function,
    wedge,
    zero_form,
)
from .jets import cos as jcos
from .jets import sin as jsin
from .jets import sqrt as jsqrt
from .reduction import (
    ActionSpec,
    LevelSection,
    LieAlgebraSpec,
    QuotientData,
    level_set_point,
)

__all__ = [
    "ChartContext",
    "ScenarioBundle",
    "RxMQuotientBundle",
    "scenario_flat_baseline",
    "scenario_tstar_u",
    "scenario_twisted_cylinder",
    "scenario_hopf_s3",
    "scenario_s1_times_m",
    "quotient_diffeo_rxm",
    "alpha_xi_from_f",
    "scenario_names",
    "build_scenario",
    "MOMENTUM_FRAME_INDEX",
    "MOMENTUM_FRAME_SIGN",
    "hopf_frame_coefficients",
    "DEFAULT_XI_SWEEP",
]

DEFAULT_XI_SWEEP = (0.0, 0.3, -0.3, 0.7, -0.7, 1.0)

# Trivialization of T*S^3 by the frame (iq, jq, kq).  The momentum of the
# circle action is minus the iq-coefficient of the covector: the
# generator is iq itself, and mu(alpha) = -alpha(X).  Re-derived by the
# decomposition oracle in the test suite.
MOMENTUM_FRAME_INDEX = 0
MOMENTUM_FRAME_SIGN = -1.0


@dataclass
class ChartContext:
    """Everything the check suite needs on one chart."""

    base: Chart
    ct: CotangentChart
    theta: Form
    lcs: LCSStructure
    action: ActionSpec | None = None
    section_for: Callable[[float], LevelSection] | None = None
    section_valid: bool = False
    quotient: QuotientData | None = None
    quotient_ct: CotangentChart | None = None
    sample_base: Callable[[np.random.Generator], np.ndarray] | None = None
    catalog_forms: list[tuple[str, Form]] = field(default_factory=list)
    ad_functions: list[tuple[str, Callable, int]] = field(default_factory=list)

    def sample_covector(self, rng: np.random.Generator) -> np.ndarray:
        return rng.normal(0.0, 1.0, self.ct.n)

    def sample_cot_point(self, rng: np.random.Generator) -> np.ndarray:
        return np.concatenate([self.sample_base(rng), self.sample_covector(rng)])

    def sample_level_point(self, rng: np.random.Generator, xi) -> np.ndarray:
        q = self.sample_base(rng)
        return level_set_point(self.ct, self.action, xi, q, self.sample_covector(rng))


@dataclass
class ScenarioBundle:
    name: str
    contexts: list[ChartContext]
    xi_list: tuple[float, ...]
    expected: dict[str, int]
    has_valid_section: bool
    transition_pairs: list[tuple[SmoothMap, SmoothMap,
                                 Callable[[np.random.Generator], np.ndarray]]] = field(
        default_factory=list)
    notes: str = ""


# ---------------------------------------------------------------------------
# generic helpers


def _const(v):
    return lambda coords: v


def _uniform_box(rng, lo, hi, n):
    return rng.uniform(lo, hi, n)


def _translation(chart: Chart, delta: np.ndarray, name: str = "") -> SmoothMap:
    d = np.asarray(delta, dtype=float)

    def make(i, sign):
        return lambda coords: coords[i] + sign * d[i]

    fwd = SmoothMap(chart, chart, [make(i, 1.0) for i in range(chart.dim)], name=name)
    bwd = SmoothMap(chart, chart, [make(i, -1.0) for i in range(chart.dim)],
                    name=name + "_inv")
    fwd.inverse = bwd
    bwd.inverse = fwd
    return fwd


def _generic_test_forms(ct: CotangentChart, lcs: LCSStructure) -> list[tuple[str, Form]]:
    """Catalog forms for the twisted-complex and Cartan sweeps."""
    n = ct.n
    chart = ct.chart
    eta = tautological_form(ct)
    one = form_from_coeffs(chart, 1, {
        (0,): lambda c: jsin(c[0]) * c[n],
        (n,): lambda c: c[1 % (2 * n)] * c[0] + 0.3,
    }, name="gamma1")
    two_idx = {(0, n): lambda c: jcos(c[0]) + c[n] * 0.2}
    if n >= 2:
        two_idx[(0, 1)] = lambda c: c[n] * c[n + 1]
        two_idx[(1, n)] = lambda c: jsin(c[1] * 0.7) + 0.1 * c[0]
    two = form_from_coeffs(chart, 2, two_idx, name="gamma2")
    return [("eta", eta), ("omega", lcs.omega), ("theta~", lcs.theta),
            ("gamma1", one), ("gamma2", two)]


def _ad_catalog(theta: Form, extra: list[tuple[str, Callable, int]]) -> list:
    n = theta.chart.dim
    fns = [(f"theta_{i}", coeff_func(theta, (i,)), n) for i in range(n)]
    return fns + extra


# ---------------------------------------------------------------------------
# flat scenarios


def _flat_context(n: int, theta_coeffs: dict | None, *, box_half: float = 3.0,
                  action: bool, name: str) -> ChartContext:
    base = Chart(id=name, dim=n, box=tuple((-box_half, box_half) for _ in range(n)))
    theta = (form_from_coeffs(base, 1, theta_coeffs, name="theta")
             if theta_coeffs else zero_form(base, 1))
    ct = cotangent_chart(base)
    lcs = lcs_form(ct, theta)

    act = None
    if action:
        gen = VectorField(base, [_const(1.0)] + [_const(0.0)] * (n - 1), name="X")
        act = ActionSpec(
            algebra=LieAlgebraSpec(dim=1, labels=("e",)),
            base_chart=base,
            generators=[gen],
            group_elements=[
                _translation(base, np.array([0.4] + [0.0] * (n - 1)), "tr+"),
                _translation(base, np.array([-0.7] + [0.0] * (n - 1)), "tr-"),
            ],
        )

    ctx = ChartContext(
        base=base, ct=ct, theta=theta, lcs=lcs, action=act,
        sample_base=lambda rng: _uniform_box(rng, -1.5, 1.5, n),
    )
    ctx.catalog_forms = _generic_test_forms(ct, lcs)
    ctx.ad_functions = _ad_catalog(theta, [
        ("bilinear", lambda c: c[0] * c[min(1, n - 1)], n),
        ("sin_sq", lambda c: jsin(c[0] * c[0]), n),
    ])
    return ctx


def scenario_flat_baseline() -> ScenarioBundle:
    """Plane with a translation action and zero Lee form.

    The classical cotangent reduction sanity case: every identity of the
    twisted machinery degenerates to its untwisted counterpart.
    """
    ctx = _flat_context(2, None, action=True, name="R2")
    base = ctx.base

    qchart = Chart(id="R2/G", dim=1, box=((-3.0, 3.0),))
    proj = SmoothMap(base, qchart, [lambda c: c[1]], name="p")
    sect = SmoothMap(qchart, base, [_const(0.0), lambda c: c[0]], name="s")
    ctx.quotient = QuotientData(chart=qchart, projection=proj, section=sect,
                                theta_quotient=zero_form(qchart, 1))
    ctx.quotient_ct = cotangent_chart(qchart)

    def section_for(xi: float) -> LevelSection:
        return LevelSection(constant_one_form(base, [-xi, 0.0], name="alpha"), xi)

    ctx.section_for = section_for
    ctx.section_valid = True
    return ScenarioBundle(
        name="flat-baseline",
        contexts=[ctx],
        xi_list=DEFAULT_XI_SWEEP,
        expected={"dim_g": 1, "rank": 1, "foliation_dim": 1, "reduced_dim": 2},
        has_valid_section=True,
        notes="theta = 0; classical shift and quotient identities",
    )


_TSTAR_THETA = {
    1: {(0,): lambda c: jcos(c[0]) + 0.4},
    2: {(0,): lambda c: c[1] * jcos(c[0]) + 0.4,
        (1,): lambda c: jsin(c[0]) - 0.2},
    3: {(0,): lambda c: c[1] * jcos(c[0]) + 0.4,
        (1,): lambda c: jsin(c[0]) - 0.2,
        (2,): lambda c: c[2] + 0.1},
}


def scenario_tstar_u(n: int) -> ScenarioBundle:
    """Flat chart with a generic closed Lee form (exact by construction)."""
    if n not in _TSTAR_THETA:
        raise ValueError("tstar-u scenarios exist for n in {1, 2, 3}")
    ctx = _flat_context(n, _TSTAR_THETA[n], action=False, name=f"U{n}")
    return ScenarioBundle(
        name=f"tstar-u{n}",
        contexts=[ctx],
        xi_list=(0.0,),
        expected={},
        has_valid_section=False,
        notes="form-level checks only (no group action)",
    )


def scenario_twisted_cylinder() -> ScenarioBundle:
    """S^1 x R^2 with a translation action and Lee form dt from the circle.

    Carries a valid level section alpha_xi = -xi dr + w dt + xi r dt (the
    beta + f theta recipe with f = xi r), whose twisted differential
    descends to the nonzero quotient curvature dw~ ^ dt~.
    """
    contexts = []
    charts = []
    for tag, _angle0 in (("a", 0.0), ("b", math.pi)):
        base = Chart(id=f"Cyl{tag}", dim=3,
                     box=((-2.9, 2.9), (-4.0, 4.0), (-4.0, 4.0)))
        charts.append(base)
        theta = constant_one_form(base, [1.0, 0.0, 0.0], name="dt")
        ct = cotangent_chart(base)
        lcs = lcs_form(ct, theta)
        gen = VectorField(base, [_const(0.0), _const(1.0), _const(0.0)], name="X")
        act = ActionSpec(
            algebra=LieAlgebraSpec(dim=1, labels=("e",)),
            base_chart=base,
            generators=[gen],
            group_elements=[
                _translation(base, np.array([0.0, 0.55, 0.0]), "tr+"),
                _translation(base, np.array([0.0, -0.35, 0.0]), "tr-"),
            ],
        )
        qchart = Chart(id=f"Cyl{tag}/G", dim=2, box=((-2.9, 2.9), (-4.0, 4.0)))
        proj = SmoothMap(base, qchart, [lambda c: c[0], lambda c: c[2]], name="p")
        sect = SmoothMap(qchart, base, [lambda c: c[0], _const(0.0), lambda c: c[1]],
                         name="s")
        quotient = QuotientData(chart=qchart, projection=proj, section=sect,
                                theta_quotient=constant_one_form(qchart, [1.0, 0.0],
                                                                 name="dt~"))

        def section_for(xi: float, base=base) -> LevelSection:
            coeffs = {
                (0,): lambda c, xi=xi: c[2] + xi * c[1],
                (1,): _const(-xi),
            }
            return LevelSection(form_from_coeffs(base, 1, coeffs, name="alpha"), xi)

        ctx = ChartContext(
            base=base, ct=ct, theta=theta, lcs=lcs, action=act,
            section_for=section_for, section_valid=True,
            quotient=quotient, quotient_ct=cotangent_chart(qchart),
            sample_base=lambda rng: np.array([rng.uniform(-2.0, 2.0),
                                              rng.uniform(-1.5, 1.5),
                                              rng.uniform(-1.5, 1.5)]),
        )
        ctx.catalog_forms = _generic_test_forms(ct, lcs)
        ctx.ad_functions = _ad_catalog(theta, [
            ("alpha_t", lambda c: c[2] + 0.7 * c[1], 3),
        ])
        contexts.append(ctx)

    # overlap: angle t on chart a equals t' + pi on chart b
    a2b = SmoothMap(charts[0], charts[1],
                    [lambda c: c[0] - math.pi, lambda c: c[1], lambda c: c[2]],
                    name="a2b")
    b2a = SmoothMap(charts[1], charts[0],
                    [lambda c: c[0] + math.pi, lambda c: c[1], lambda c: c[2]],
                    name="b2a")
    a2b.inverse, b2a.inverse = b2a, a2b

    def overlap_sample(rng):
        return np.array([rng.uniform(0.4, 2.7), rng.uniform(-1.5, 1.5),
                         rng.uniform(-1.5, 1.5)])

    return ScenarioBundle(
        name="twisted-cylinder",
        contexts=contexts,
        xi_list=DEFAULT_XI_SWEEP,
        expected={"dim_g": 1, "rank": 1, "foliation_dim": 1, "reduced_dim": 4},
        has_valid_section=True,
        transition_pairs=[(a2b, b2a, overlap_sample)],
        notes="nonzero Lee form with a valid level section; B_xi != 0",
    )


# ---------------------------------------------------------------------------
# the 3-sphere


def _sphere_from_chart(eps: float):
    """Closures u -> ambient point of S^3, chart with pole (eps, 0, 0, 0)."""

    def comps(u):
        s = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
        d = s + 1.0
        x0 = eps * (s - 1.0) / d
        return [x0, 2.0 * u[0] / d, 2.0 * u[1] / d, 2.0 * u[2] / d]

    return comps


def _chart_from_sphere(eps: float):
    def to_chart(x):
        x = np.asarray(x, dtype=float)
        return x[1:] / (1.0 - eps * x[0])

    return to_chart


def _quat_i(x):
    """Left multiplication by i in coordinates (1, i, j, k)."""
    return [-x[1], x[0], -x[3], x[2]]


def _quat_j(x):
    return [-x[2], x[3], x[0], -x[1]]


def _quat_k(x):
    return [-x[3], -x[2], x[1], x[0]]


def _circle_mult(t: float, x):
    """Left multiplication by cos t + i sin t (coefficients are plain floats)."""
    c, s = math.cos(t), math.sin(t)
    return [c * x[0] - s * x[1], c * x[1] + s * x[0],
            c * x[2] - s * x[3], c * x[3] + s * x[2]]


def _sphere_pushforward(eps: float, ambient_field):
    """Chart components of an ambient tangent field V(x) on S^3."""
    sphere = _sphere_from_chart(eps)

    def comp(m):
        def f(u):
            x = sphere(u)
            v = ambient_field(x)
            w = 1.0 - eps * x[0]
            return (v[m + 1] * w + eps * x[m + 1] * v[0]) / (w * w)

        return f

    return [comp(m) for m in range(3)]


def _hopf_generator_comps(eps: float):
    return _sphere_pushforward(eps, _quat_i)


def _lee_potential(eps: float):
    """g = x0^2 + x1^2 (= |z1|^2), invariant under the circle action."""

    def g(u):
        s = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
        d = s + 1.0
        return ((s - 1.0) ** 2 + 4.0 * u[0] * u[0]) / (d * d)

    return g


def _lee_coeffs(eps: float):
    """Hand-differentiated dg (same expression on both charts)."""

    def coeff(i):
        def f(u):
            s = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
            d = s + 1.0
            num = (s - 1.0) ** 2 + 4.0 * u[0] * u[0]
            out = 4.0 * u[i] * (s - 1.0) / (d * d) - 4.0 * u[i] * num / (d * d * d)
            if i == 0:
                out = out + 8.0 * u[0] / (d * d)
            return out

        return f

    return {(i,): coeff(i) for i in range(3)}


def _connection_coeffs(eps: float):
    """chi_i(u) = <i x, dx/du_i>: the standard contact/connection form."""

    def coeff(i):
        def f(u):
            s = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
            d = s + 1.0
            x = _sphere_from_chart(eps)(u)
            v = _quat_i(x)
            # jacobian of the inverse stereographic map:
            # dx0/du_i = eps 4 u_i / d^2, dx_m/du_i = 2 delta_mi/d - 4 u_m u_i/d^2
            total = v[0] * (eps * 4.0 * u[i] / (d * d))
            for m in range(3):
                dxm = (2.0 if m == i else 0.0) / d - 4.0 * u[m] * u[i] / (d * d)
                total = total + v[m + 1] * dxm
            return total

        return f

    return {(i,): coeff(i) for i in range(3)}


def _circle_chart_map(eps: float, t: float) -> list:
    """Chart closures of the rotation u -> chart(e^{it} . sphere(u))."""
    sphere = _sphere_from_chart(eps)

    def comp(m):
        def f(u):
            x = sphere(u)
            y = _circle_mult(t, x)
            return y[m + 1] / (1.0 - eps * y[0])

        return f

    return [comp(m) for m in range(3)]


def _sphere_group_element(base: Chart, eps: float, t: float) -> SmoothMap:
    fwd = SmoothMap(base, base, _circle_chart_map(eps, t), name=f"rot{t:+.2f}")
    bwd = SmoothMap(base, base, _circle_chart_map(eps, -t), name=f"rot{-t:+.2f}")
    fwd.inverse = bwd
    bwd.inverse = fwd
    return fwd


def _sample_sphere_chart(rng: np.random.Generator, eps: float,
                         require_g: float | None = None,
                         g_max: float | None = None) -> np.ndarray:
    """Ambient Gaussian, normalized, conditioned into this chart's region.

    ``require_g``/``g_max`` bound |z1|^2 = x0^2 + x1^2; an upper bound
    keeps every circle-action image of the point inside the chart box,
    since the action moves (x0, x1) on its own circle.
    """
    to_chart = _chart_from_sphere(eps)
    for _ in range(1000):
        x = rng.normal(0.0, 1.0, 4)
        x = x / float(np.sqrt(x @ x))
        if eps * x[0] > 0.2:  # too close to the projection pole
            continue
        g = x[0] * x[0] + x[1] * x[1]
        if require_g is not None and g < require_g:
            continue
        if g_max is not None and g > g_max:
            continue
        return to_chart(x)
    raise RuntimeError("sphere sampler failed to find a chart point")


def _hopf_projection_comps(eps: float):
    """zeta = z2 / z1 in chart coordinates (valid where |z1|^2 >= delta)."""
    sphere = _sphere_from_chart(eps)

    def re(u):
        x = sphere(u)
        g = x[0] * x[0] + x[1] * x[1]
        return (x[2] * x[0] + x[3] * x[1]) / g

    def im(u):
        x = sphere(u)
        g = x[0] * x[0] + x[1] * x[1]
        return (x[3] * x[0] - x[2] * x[1]) / g

    return [re, im]


def _hopf_section_comps(eps: float):
    """zeta -> chart coords of (1, 0, zeta1, zeta2)/N; lands in the eps=-1 chart."""
    if eps != -1.0:
        raise ValueError("the standard section lands in the chart with pole (-1,0,0,0)")

    def make(m):
        def f(z):
            nsq = 1.0 + z[0] * z[0] + z[1] * z[1]
            n = jsqrt(nsq)
            if m == 0:
                return 0.0 * z[0]
            return z[m - 1] / (n + 1.0)

        return f

    return [make(m) for m in range(3)]


def hopf_frame_coefficients(eps: float, u: np.ndarray, covector: np.ndarray) -> np.ndarray:
    """Coefficients of a chart covector in the frame (iq, jq, kq)."""
    fields = [_sphere_pushforward(eps, amb) for amb in (_quat_i, _quat_j, _quat_k)]
    out = np.zeros(3)
    for k, comps in enumerate(fields):
        vec = np.array([float(c([float(x) for x in u])) for c in comps])
        out[k] = float(np.asarray(covector) @ vec)
    return out


def _hopf_context(eps: float, with_quotient: bool) -> ChartContext:
    tag = "A" if eps > 0 else "B"
    base = Chart(id=f"S3{tag}", dim=3, box=tuple((-4.0, 4.0) for _ in range(3)))
    theta = form_from_coeffs(base, 1, _lee_coeffs(eps), name="dg")
    ct = cotangent_chart(base)
    lcs = lcs_form(ct, theta)
    gen = VectorField(base, _hopf_generator_comps(eps), name="X")
    act = ActionSpec(
        algebra=LieAlgebraSpec(dim=1, labels=("e",)),
        base_chart=base,
        generators=[gen],
        group_elements=[_sphere_group_element(base, eps, 0.37),
                        _sphere_group_element(base, eps, -0.23)],
    )

    require_g = 0.25 if with_quotient else None

    ctx = ChartContext(
        base=base, ct=ct, theta=theta, lcs=lcs, action=act,
        sample_base=lambda rng: _sample_sphere_chart(rng, eps, require_g),
    )

    def section_for(xi: float) -> LevelSection:
        if xi == 0.0:
            return LevelSection(zero_form(base, 1), 0.0)
        # connection candidate: satisfies the membership condition but
        # not the invariance equation; reported, never repaired
        chi = _connection_coeffs(eps)
        coeffs = {k: (lambda c, f=f, xi=xi: -xi * f(c)) for k, f in chi.items()}
        return LevelSection(form_from_coeffs(base, 1, coeffs, name="-xi*chi"), xi)

    ctx.section_for = section_for
    ctx.section_valid = False  # valid at xi=0 only; see checks
    if with_quotient:
        qchart = Chart(id="CP1", dim=2, box=((-4.0, 4.0), (-4.0, 4.0)))
        proj = SmoothMap(base, qchart, _hopf_projection_comps(eps), name="hopf")
        sect = SmoothMap(qchart, base, _hopf_section_comps(eps), name="s")
        # g = |z1|^2 descends to 1/(1 + |zeta|^2); the Lee form descends with it
        def qtheta_coeff(i):
            def f(z):
                nsq = 1.0 + z[0] * z[0] + z[1] * z[1]
                return -2.0 * z[i] / (nsq * nsq)

            return f

        qtheta = form_from_coeffs(qchart, 1, {(0,): qtheta_coeff(0),
                                              (1,): qtheta_coeff(1)}, name="dg~")
        ctx.quotient = QuotientData(chart=qchart, projection=proj, section=sect,
                                    theta_quotient=qtheta)
        ctx.quotient_ct = cotangent_chart(qchart)
    ctx.catalog_forms = _generic_test_forms(ct, lcs)
    g = _lee_potential(eps)
    xc = _hopf_generator_comps(eps)
    ctx.ad_functions = _ad_catalog(theta, [
        ("lee_potential", g, 3),
        ("hopf_x0", xc[0], 3),
        ("hopf_x2", xc[2], 3),
    ])
    return ctx


def scenario_hopf_s3() -> ScenarioBundle:
    """The 3-sphere with the circle action by unit-complex multiplication."""
    ctx_b = _hopf_context(-1.0, with_quotient=True)
    ctx_a = _hopf_context(+1.0, with_quotient=False)

    # transition between the stereographic charts: inversion u / |u|^2
    def inv_comps():
        def make(m):
            def f(u):
                s = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
                return u[m] / s

            return f

        return [make(m) for m in range(3)]

    a2b = SmoothMap(ctx_a.base, ctx_b.base, inv_comps(), name="a2b")
    b2a = SmoothMap(ctx_b.base, ctx_a.base, inv_comps(), name="b2a")
    a2b.inverse, b2a.inverse = b2a, a2b

    def overlap_sample(rng):
        for _ in range(1000):
            x = rng.normal(0.0, 1.0, 4)
            x = x / float(np.sqrt(x @ x))
            if abs(x[0]) < 0.45:
                return _chart_from_sphere(+1.0)(x)
        raise RuntimeError("overlap sampler failed")

    return ScenarioBundle(
        name="hopf-s3",
        contexts=[ctx_b, ctx_a],
        xi_list=DEFAULT_XI_SWEEP,
        expected={"dim_g": 1, "rank": 1, "foliation_dim": 1, "reduced_dim": 4},
        has_valid_section=False,  # valid only at xi = 0
        transition_pairs=[(a2b, b2a, overlap_sample)],
        notes="Lee form d|z1|^2 (exact on S^3); quotient data on chart B",
    )


# ---------------------------------------------------------------------------
# products with a circle factor


def _product_context(s1_tag: str, eps: float, with_quotient: bool) -> ChartContext:
    """S^1 x S^3 chart: coordinates (t, u1, u2, u3)."""
    sphere_tag = "A" if eps > 0 else "B"
    base = Chart(id=f"S1{s1_tag}xS3{sphere_tag}", dim=4,
                 box=((-2.9, 2.9),) + tuple((-4.0, 4.0) for _ in range(3)))
    theta = constant_one_form(base, [1.0, 0.0, 0.0, 0.0], name="dt")
    ct = cotangent_chart(base)
    lcs = lcs_form(ct, theta)

    hopf = _hopf_generator_comps(eps)

    def sub(f):
        return lambda coords: f(list(coords)[1:])

    gen = VectorField(base, [_const(0.0)] + [sub(f) for f in hopf], name="X")

    def group(t):
        rot = _circle_chart_map(eps, t)
        fwd = SmoothMap(base, base, [lambda c: c[0]] + [sub(f) for f in rot],
                        name=f"idxrot{t:+.2f}")
        rot_b = _circle_chart_map(eps, -t)
        bwd = SmoothMap(base, base, [lambda c: c[0]] + [sub(f) for f in rot_b],
                        name=f"idxrot{-t:+.2f}")
        fwd.inverse = bwd
        bwd.inverse = fwd
        return fwd

    act = ActionSpec(
        algebra=LieAlgebraSpec(dim=1, labels=("e",)),
        base_chart=base,
        generators=[gen],
        group_elements=[group(0.41), group(-0.19)],
    )

    require_g = 0.25 if with_quotient else None

    def sample(rng):
        t = rng.uniform(-2.0, 2.0)
        u = _sample_sphere_chart(rng, eps, require_g)
        return np.concatenate([[t], u])

    ctx = ChartContext(base=base, ct=ct, theta=theta, lcs=lcs, action=act,
                       sample_base=sample)

    chi = _connection_coeffs(eps)

    def section_for(xi: float) -> LevelSection:
        if xi == 0.0:
            return LevelSection(zero_form(base, 1), 0.0)
        coeffs = {(i + 1,): (lambda c, f=f, xi=xi: -xi * f(list(c)[1:]))
                  for (i,), f in chi.items()}
        return LevelSection(form_from_coeffs(base, 1, coeffs, name="-xi*chi"), xi)

    ctx.section_for = section_for
    ctx.section_valid = False

    if with_quotient:
        if eps != -1.0:
            raise ValueError("quotient data requires the chart-B sphere factor")
        qchart = Chart(id=f"S1{s1_tag}xCP1", dim=3,
                       box=((-2.9, 2.9), (-4.0, 4.0), (-4.0, 4.0)))
        hp = _hopf_projection_comps(eps)
        proj = SmoothMap(base, qchart, [lambda c: c[0]] + [sub(f) for f in hp],
                         name="idxhopf")
        hs = _hopf_section_comps(eps)

        def sub_q(f):
            return lambda coords: f(list(coords)[1:])

        sect = SmoothMap(qchart, base, [lambda c: c[0]] + [sub_q(f) for f in hs],
                         name="idxs")
        ctx.quotient = QuotientData(
            chart=qchart, projection=proj, section=sect,
            theta_quotient=constant_one_form(qchart, [1.0, 0.0, 0.0], name="dt~"))
        ctx.quotient_ct = cotangent_chart(qchart)

    ctx.catalog_forms = _generic_test_forms(ct, lcs)
    ctx.ad_functions = _ad_catalog(theta, [
        ("hopf_x1_shift", lambda c: hopf[1](list(c)[1:]), 4),
    ])
    return ctx


def scenario_s1_times_m(m_bundle: ScenarioBundle | None = None) -> ScenarioBundle:
    """S^1 x M with the circle acting on the M factor only; Lee form dt.

    M defaults to the 3-sphere scenario.  The Lee form is pulled back
    from the circle factor, so it is closed per chart but not exact
    globally; for nonzero xi no valid level section exists and the
    reduction is not a cotangent bundle.
    """
    if m_bundle is not None and m_bundle.name != "hopf-s3":
        raise ValueError("the product scenario is instantiated with the 3-sphere")
    ctx0 = _product_context("a", -1.0, with_quotient=True)
    ctx1 = _product_context("b", -1.0, with_quotient=False)
    return ScenarioBundle(
        name="s1xs3",
        contexts=[ctx0, ctx1],
        xi_list=DEFAULT_XI_SWEEP,
        expected={"dim_g": 1, "rank": 1, "foliation_dim": 1, "reduced_dim": 6},
        has_valid_section=False,
        notes="level set is S^1 x R x mu'^-1(xi); reduction leaves the "
              "cotangent category for xi != 0",
    )


# ---------------------------------------------------------------------------
# the R x M quotient map


@dataclass
class RxMQuotientBundle:
    name: str
    xi: float
    chart: Chart                 # (t, u) on R x S^3
    target: Chart                # S^3 chart
    quotient_map: SmoothMap      # (t, m) -> e^{-i t / xi} . m
    action_map: Callable[[float], SmoothMap]
    invariant_form: Form         # on R x M, invariant + horizontal
    restricted_form: Form        # its value on {0} x M
    sample: Callable[[np.random.Generator], np.ndarray]


def quotient_diffeo_rxm(xi: float, m_bundle: ScenarioBundle | None = None) -> RxMQuotientBundle:
    """The R-action s.(t, m) = (t + xi s, e^{is} m) and its quotient map.

    Verifies the equivariance phi(t + s xi, e^{is} m) = phi(t, m) and the
    descent phi^* alpha_0 = alpha for an invariant horizontal test form.
    """
    if xi == 0.0:
        raise ValueError("the quotient map needs a nonzero level")
    eps = -1.0
    target = Chart(id="S3B", dim=3, box=tuple((-4.0, 4.0) for _ in range(3)))
    chart = Chart(id="RxS3B", dim=4,
                  box=((-2.5, 2.5),) + tuple((-4.0, 4.0) for _ in range(3)))
    sphere = _sphere_from_chart(eps)

    def phi_comp(m):
        def f(coords):
            t = coords[0]
            x = sphere(list(coords)[1:])
            ct, st = jcos(t * (-1.0 / xi)), jsin(t * (-1.0 / xi))
            y = [ct * x[0] - st * x[1], ct * x[1] + st * x[0],
                 ct * x[2] - st * x[3], ct * x[3] + st * x[2]]
            return y[m + 1] / (1.0 - eps * y[0])

        return f

    quotient_map = SmoothMap(chart, target, [phi_comp(m) for m in range(3)], name="phi~")

    def action_map(s: float) -> SmoothMap:
        rot = _circle_chart_map(eps, s)

        def make(i):
            if i == 0:
                return lambda coords: coords[0] + xi * s
            return lambda coords: rot[i - 1](list(coords)[1:])

        fwd = SmoothMap(chart, chart, [make(i) for i in range(4)], name=f"act{s:+.2f}")
        rot_b = _circle_chart_map(eps, -s)

        def make_b(i):
            if i == 0:
                return lambda coords: coords[0] - xi * s
            return lambda coords: rot_b[i - 1](list(coords)[1:])

        bwd = SmoothMap(chart, chart, [make_b(i) for i in range(4)], name=f"act{-s:+.2f}")
        fwd.inverse = bwd
        bwd.inverse = fwd
        return fwd

    # invariant + horizontal 2-form: pr* (chi ^ p* lam) - (1/xi) dt ^ pr* p* lam
    chi = form_from_coeffs(target, 1, _connection_coeffs(eps), name="chi")
    cp1 = Chart(id="CP1", dim=2, box=((-4.0, 4.0), (-4.0, 4.0)))
    lam = form_from_coeffs(cp1, 1, {(0,): lambda z: z[1], (1,): lambda z: 0.3 + z[0]},
                           name="lam")
    hopf_p = SmoothMap(target, cp1, _hopf_projection_comps(eps), name="hopf")
    p_lam = pullback(hopf_p, lam, name="p*lam")
    gamma = wedge(chi, p_lam, name="gamma")

    pr = SmoothMap(chart, target, [lambda c, i=i: c[i + 1] for i in range(3)], name="pr")
    dt = constant_one_form(chart, [1.0, 0.0, 0.0, 0.0], name="dt")
    invariant = form_sum([pullback(pr, gamma), wedge(dt, pullback(pr, p_lam))],
                         [1.0, -1.0 / xi], name="alpha")

    def sample(rng):
        # g in [0.25, 0.64] keeps every rotation image inside the chart box
        # and the projective coordinates well-conditioned
        t = rng.uniform(-1.8, 1.8)
        u = _sample_sphere_chart(rng, eps, require_g=0.25, g_max=0.64)
        return np.concatenate([[t], u])

    return RxMQuotientBundle(
        name="rxm-quotient", xi=xi, chart=chart, target=target,
        quotient_map=quotient_map, action_map=action_map,
        invariant_form=invariant, restricted_form=gamma, sample=sample,
    )


def alpha_xi_from_f(beta_form: Form, f: Callable, theta: Form,
                    action: ActionSpec, xi) -> LevelSection:
    """Level section beta + f theta from a function with X_a(f) = xi(a).

    The caller supplies beta satisfying the untwisted conditions (orbit
    pairing -xi, invariant); the twisted invariance equation then holds
    by construction and is re-checked by ``hypothesis_residuals``.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    combined = form_sum([beta_form, scale_by_function(theta, f)], name="beta+f*theta")
    return LevelSection(combined, xi)


# ---------------------------------------------------------------------------
# registry


def scenario_names() -> list[str]:
    return ["flat-baseline", "twisted-cylinder", "hopf-s3", "s1xs3",
            "tstar-u1", "tstar-u2", "tstar-u3", "rxm-quotient"]


def build_scenario(name: str):
    if name == "flat-baseline":
        return scenario_flat_baseline()
    if name == "twisted-cylinder":
        return scenario_twisted_cylinder()
    if name == "hopf-s3":
        return scenario_hopf_s3()
    if name == "s1xs3":
        return scenario_s1_times_m()
    if name.startswith("tstar-u"):
        return scenario_tstar_u(int(name.removeprefix("tstar-u")))
    if name == "rxm-quotient":
        return quotient_diffeo_rxm(0.7)
    raise KeyError(f"unknown scenario {name!r}")
