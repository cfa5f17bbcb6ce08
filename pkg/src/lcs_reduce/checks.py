"""Registered identity checks over scenario bundles.

Each check draws its own substream from (seed, check index), so checks
are independent and may run in any order or in parallel without
changing the report.  Within a check, sampling consumes the stream per
context in bundle order, then per xi in sweep order.  Aggregation is
order-independent (max and mean of per-sample residuals).

Every check is paired with a negative control where one exists: a
deliberate hypothesis violation whose residual must exceed a stated
floor, confirming the check has power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import __version__
from .catalog import (
    ChartContext,
    RxMQuotientBundle,
    ScenarioBundle,
    build_scenario,
)
from .cotangent import (
    cotangent_lift_map,
    direct_lcs_two_form,
    lcs_form,
    lift_fundamental_field,
    tautological_form,
    theta_omega_dual,
)
from .forms import (
    VectorField,
    coeff_residual,
    conformal_rescale,
    exterior_derivative,
    flow_map,
    form_determinant,
    form_from_coeffs,
    form_matrix,
    form_sum,
    interior_product,
    lie_derivative,
    omega_dual_vector,
    pullback,
    sup_coeff,
    twisted_derivative,
    twisted_lie_derivative,
    wedge,
    zero_form,
)
from .jets import eval_jet, fd_oracle
from .jets import sin as jsin
from .linalg import SubspaceBasis, principal_angle_distance
from .reduction import (
    ActionSpec,
    LevelSection,
    LieAlgebraSpec,
    composite_embedding_residuals,
    curvature_residuals,
    foliation_frame,
    foliation_frame_bruteforce,
    hypothesis_residuals,
    image_annihilator_residuals,
    level_tangent_basis,
    momentum_map,
    omega_annihilator_closed_form,
    omega_annihilator_numeric,
    phi0_identity_residuals,
    phi0_well_definedness,
    quotient_covector,
    regularity_rank,
    shift_identity_residuals,
    shift_map,
    shift_transport_residual,
    surjectivity_witness_residuals,
    twisted_hamiltonian_residuals,
)
from .report import CheckRecord, RunConfig, VerificationReport

__all__ = ["CHECKS", "run_suite", "list_checks"]


class _Agg:
    """Order-independent residual aggregation with worst-3 tracking."""

    def __init__(self):
        self.count = 0
        self.total = 0.0
        self.max = 0.0
        self.worst: list[dict] = []

    def add(self, residual: float, chart_id: str = "", point=None, weight: int = 1):
        residual = float(residual)
        self.count += weight
        self.total += residual * weight
        self.max = max(self.max, residual)
        entry = {
            "chart": chart_id,
            "point": [float(x) for x in (point if point is not None else [])],
            "residual": residual,
        }
        self.worst.append(entry)
        self.worst.sort(key=lambda w: -w["residual"])
        del self.worst[3:]

    def record(self, check_id: str, anchor: str, tol: float, *,
               note: str = "", expected_min: float | None = None,
               passed: bool | None = None) -> CheckRecord:
        if self.count == 0:
            return CheckRecord(check_id, anchor, 0.0, 0.0, tol, True, 0,
                               na=True, note=note or "no applicable samples",
                               expected_min=expected_min)
        mean = self.total / self.count
        if passed is None:
            passed = (self.max > (expected_min or 0.0)) if expected_min is not None \
                else (self.max <= tol)
        return CheckRecord(check_id, anchor, self.max, mean, tol, passed,
                           self.count, note=note, worst=list(self.worst),
                           expected_min=expected_min)


@dataclass(frozen=True)
class CheckSpec:
    id: str
    anchor: str
    tolerance: float
    runner: Callable
    needs: str = ""        # "", "action", "section", "quotient"
    samples_note: str = ""


def _na(spec: CheckSpec, note: str) -> list[CheckRecord]:
    return [CheckRecord(spec.id, spec.anchor, 0.0, 0.0, spec.tolerance,
                        True, 0, na=True, note=note)]


def _contexts(bundle: ScenarioBundle, needs: str):
    for ctx in bundle.contexts:
        if needs == "action" and ctx.action is None:
            continue
        if needs == "quotient" and (ctx.quotient is None or ctx.action is None):
            continue
        if needs == "section" and (ctx.section_for is None or ctx.action is None):
            continue
        yield ctx


def _per_cell(n: int, divisor: int = 1, floor: int = 4) -> int:
    return max(floor, n // divisor)


# ---------------------------------------------------------------------------
# form-level checks


def _check_twisted_complex(spec, bundle, rng, n, tol):
    agg = _Agg()
    ctl = _Agg()
    for ctx in bundle.contexts:
        pts = [ctx.sample_cot_point(rng) for _ in range(n)]
        for _, a in ctx.catalog_forms:
            if a.degree + 2 > ctx.ct.chart.dim:
                continue
            dd = twisted_derivative(ctx.lcs.theta,
                                    twisted_derivative(ctx.lcs.theta, a))
            for p in pts:
                agg.add(sup_coeff(dd, p), ctx.ct.chart.id, p)
        # control: a non-closed twisting form breaks the complex;
        # on a 0-form f the defect is exactly -f d(theta_bad)
        bad = form_from_coeffs(ctx.ct.chart, 1,
                               {(0,): lambda c: c[ctx.ct.n]}, name="c1*dq1")
        f = form_from_coeffs(ctx.ct.chart, 0, {(): lambda c: 0.7 + c[0] * c[0]},
                             name="f")
        dd_bad = twisted_derivative(bad, twisted_derivative(bad, f))
        for p in pts[: max(4, n // 10)]:
            ctl.add(sup_coeff(dd_bad, p), ctx.ct.chart.id, p)
    return [agg.record(spec.id, spec.anchor, tol),
            ctl.record(spec.id + "-control", "d_theta^2 != 0 for non-closed theta",
                       tol, expected_min=1e-4,
                       note="twisting by the non-closed c1 dq1")]


def _check_lcs_validity(spec, bundle, rng, n, tol):
    agg = _Agg()
    det_agg = _Agg()
    ctl = _Agg()
    for ctx in bundle.contexts:
        pts = [ctx.sample_cot_point(rng) for _ in range(n)]
        top = ctx.lcs.omega.degree >= ctx.ct.chart.dim
        dtheta = exterior_derivative(ctx.lcs.theta)
        defect = None if top else form_sum(
            [exterior_derivative(ctx.lcs.omega),
             wedge(ctx.lcs.theta, ctx.lcs.omega)], [1.0, -1.0])
        for p in pts:
            res = sup_coeff(dtheta, p)
            if defect is not None:
                res = max(res, sup_coeff(defect, p))
            agg.add(res, ctx.ct.chart.id, p)
            det_agg.add(1.0 / max(abs(form_determinant(ctx.lcs.omega, p)), 1e-300))
        # control: doubling the Lee form breaks the structure equation
        nontrivial = ctx.theta.coeff_values(ctx.sample_base(rng))
        if not top and any(abs(v) > 1e-12 for v in nontrivial.values()):
            bad = form_sum([exterior_derivative(ctx.lcs.omega),
                            wedge(form_sum([ctx.lcs.theta], [2.0]), ctx.lcs.omega)],
                           [1.0, -1.0])
            for p in pts[: max(4, n // 10)]:
                ctl.add(sup_coeff(bad, p), ctx.ct.chart.id, p)
    note = f"max 1/|det Omega| = {det_agg.max:.3e}" if det_agg.count else ""
    recs = [agg.record(spec.id, spec.anchor, tol, note=note)]
    det_ok = det_agg.count == 0 or det_agg.max < 1e8
    recs[0].passed = recs[0].passed and det_ok
    recs.append(ctl.record(spec.id + "-control",
                           "d omega != (2 theta) ^ omega", tol,
                           expected_min=1e-4, note="doubled Lee form"))
    return recs


def _check_lcs_construction(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in bundle.contexts:
        direct = direct_lcs_two_form(ctx.ct, ctx.theta)
        for _ in range(n):
            p = ctx.sample_cot_point(rng)
            agg.add(coeff_residual(direct, ctx.lcs.omega, p), ctx.ct.chart.id, p)
    return [agg.record(spec.id, spec.anchor, tol)]


def _check_ad_vs_fd(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in bundle.contexts:
        for name, fn, dim in ctx.ad_functions:
            for _ in range(max(4, n // max(1, len(ctx.ad_functions)))):
                q = (ctx.sample_base(rng) if dim == ctx.base.dim
                     else ctx.sample_cot_point(rng)[:dim])
                jet = eval_jet(fn, q)
                g, h = fd_oracle(fn, q, 1e-4)
                scale = max(1.0, float(np.max(np.abs(g))), float(np.max(np.abs(h))))
                res = max(float(np.max(np.abs(jet.grad - g))),
                          float(np.max(np.abs(jet.hess - h)))) / scale
                agg.add(res, ctx.base.id, q)
    return [agg.record(spec.id, spec.anchor, tol)]


def _check_cartan(spec, bundle, rng, n, tol):
    agg = _Agg()
    ctl = _Agg()
    for ctx in bundle.contexts:
        chart = ctx.ct.chart
        nn = chart.dim
        # generic field with nonzero Lee pairing, plus the lifted generator
        fields = [VectorField(chart, [
            (lambda i: (lambda c: jsin(c[i % nn]) + 0.3 * c[(i + 1) % nn]))(i)
            for i in range(nn)], name="generic")]
        if ctx.action is not None:
            fields.append(lift_fundamental_field(ctx.ct, ctx.action.generators[0]).lifted)
        pts = [ctx.sample_cot_point(rng) for _ in range(_per_cell(n, 4))]
        for x in fields:
            for _, a in ctx.catalog_forms:
                if a.degree >= chart.dim:
                    continue
                lhs = twisted_lie_derivative(x, ctx.lcs.theta, a)
                if a.degree == 0:
                    rhs = interior_product(x, twisted_derivative(ctx.lcs.theta, a))
                else:
                    rhs = form_sum([
                        twisted_derivative(ctx.lcs.theta, interior_product(x, a)),
                        interior_product(x, twisted_derivative(ctx.lcs.theta, a)),
                    ])
                untwisted = lie_derivative(x, a)
                for p in pts:
                    agg.add(coeff_residual(lhs, rhs, p), chart.id, p)
                    if x.name == "generic" and a.degree > 0:
                        # control: dropping the theta(X) a correction
                        ctl.add(coeff_residual(untwisted, rhs, p), chart.id, p)
    nontrivial = any(
        sup_coeff(ctx.lcs.theta, ctx.sample_cot_point(rng)) > 1e-6
        for ctx in bundle.contexts)
    recs = [agg.record(spec.id, spec.anchor, tol)]
    if nontrivial:
        recs.append(ctl.record(spec.id + "-control",
                               "L_X a != d_theta i_X a + i_X d_theta a", tol,
                               expected_min=1e-4,
                               note="untwisted derivative against the twisted Cartan sum"))
    return recs


def _check_flow_oracle(spec, bundle, rng, n, tol):
    agg = _Agg()
    h = 1e-3
    for ctx in bundle.contexts:
        chart = ctx.ct.chart
        nn = chart.dim
        x = VectorField(chart, [
            (lambda i: (lambda c: jsin(c[i % nn]) + 0.3 * c[(i + 1) % nn]))(i)
            for i in range(nn)], name="generic")
        fwd = flow_map(x, h, steps=10)
        bwd = flow_map(x, -h, steps=10)
        a = ctx.catalog_forms[3][1]
        quotient = form_sum([pullback(fwd, a), pullback(bwd, a)],
                            [0.5 / h, -0.5 / h])
        lie = lie_derivative(x, a)
        for _ in range(_per_cell(n, 8)):
            p = ctx.sample_cot_point(rng)
            agg.add(coeff_residual(quotient, lie, p), chart.id, p)
    return [agg.record(spec.id, spec.anchor, tol,
                       note="central flow quotient, h=1e-3, rk4 substeps")]


def _check_conformal(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in bundle.contexts:
        f = lambda c: 0.3 * jsin(c[0]) + 0.1 * c[ctx.ct.n]
        neg = lambda c: -(0.3 * jsin(c[0]) + 0.1 * c[ctx.ct.n])
        rescaled = conformal_rescale(ctx.lcs, f)
        back = conformal_rescale(rescaled, neg)
        pts = [ctx.sample_cot_point(rng) for _ in range(_per_cell(n, 4))]
        res = rescaled.validity_residuals(pts)
        agg.add(max(res["dtheta"], res["lcs"]), ctx.ct.chart.id, pts[0])
        for p in pts:
            agg.add(max(coeff_residual(back.omega, ctx.lcs.omega, p),
                        coeff_residual(back.theta, ctx.lcs.theta, p)),
                    ctx.ct.chart.id, p)
    return [agg.record(spec.id, spec.anchor, tol)]


def _check_tautological(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in bundle.contexts:
        eta = tautological_form(ctx.ct)
        nn = ctx.ct.n
        for _ in range(n):
            p = ctx.sample_cot_point(rng)
            v = rng.normal(0.0, 1.0, 2 * nn)
            # intrinsic definition: eta(v) = covector(pi_* v)
            intrinsic = float(p[nn:] @ v[:nn])
            agg.add(abs(eta(p, v) - intrinsic), ctx.ct.chart.id, p)
    return [agg.record(spec.id, spec.anchor, tol)]


def _check_eta_invariance(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in _contexts(bundle, "action"):
        eta = tautological_form(ctx.ct)
        for g in ctx.action.group_elements:
            lifted = cotangent_lift_map(ctx.ct, g)
            pb = pullback(lifted, eta)
            for _ in range(_per_cell(n, 2 * max(1, len(ctx.action.group_elements)))):
                p = ctx.sample_cot_point(rng)
                agg.add(coeff_residual(pb, eta, p), ctx.ct.chart.id, p)
    if agg.count == 0:
        return _na(spec, "no group action in this scenario")
    return [agg.record(spec.id, spec.anchor, tol)]


def _check_lift_projection(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in _contexts(bundle, "action"):
        lifts = [lift_fundamental_field(ctx.ct, g) for g in ctx.action.generators]
        for _ in range(n):
            p = ctx.sample_cot_point(rng)
            for lf in lifts:
                v = lf.lifted.values(p)
                bv = lf.base_field.values(p[: ctx.ct.n])
                agg.add(float(np.max(np.abs(v[: ctx.ct.n] - bv))), ctx.ct.chart.id, p)
    if agg.count == 0:
        return _na(spec, "no group action in this scenario")
    return [agg.record(spec.id, spec.anchor, tol)]


def _check_theta_dual(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in bundle.contexts:
        dual = theta_omega_dual(ctx.ct, ctx.theta)
        nn = ctx.ct.n
        for _ in range(n):
            p = ctx.sample_cot_point(rng)
            closed = dual.values(p)
            om = form_matrix(ctx.lcs.omega, p)
            tv = np.array([ctx.lcs.theta.coeff_values(p).get((i,), 0.0)
                           for i in range(2 * nn)])
            solved = omega_dual_vector(om, tv)
            res = float(np.max(np.abs(closed - solved)))
            res = max(res, float(np.max(np.abs(closed[:nn]), initial=0.0)))  # verticality
            agg.add(res, ctx.ct.chart.id, p)
    return [agg.record(spec.id, spec.anchor, tol)]


# ---------------------------------------------------------------------------
# momentum-level checks


def _check_momentum_vs_rho(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in _contexts(bundle, "action"):
        eta = tautological_form(ctx.ct)
        pairs = [interior_product(lift_fundamental_field(ctx.ct, g).lifted, eta)
                 for g in ctx.action.generators]
        for _ in range(n):
            p = ctx.sample_cot_point(rng)
            mu = momentum_map(ctx.ct, ctx.action, p)
            for k, paired in enumerate(pairs):
                rho = -paired.coeff_values(p).get((), 0.0)
                agg.add(abs(mu[k] - rho), ctx.ct.chart.id, p)
    if agg.count == 0:
        return _na(spec, "no group action in this scenario")
    return [agg.record(spec.id, spec.anchor, tol)]


def _check_twisted_hamiltonian(spec, bundle, rng, n, tol):
    agg = _Agg()
    pair_agg = _Agg()
    inv_agg = _Agg()
    for ctx in _contexts(bundle, "action"):
        pts = [ctx.sample_cot_point(rng) for _ in range(_per_cell(n, 4))]
        qs = [ctx.sample_base(rng) for _ in range(_per_cell(n, 4))]
        res = twisted_hamiltonian_residuals(ctx.ct, ctx.action, ctx.lcs,
                                            ctx.theta, pts, qs)
        agg.add(res["hamiltonian"], ctx.ct.chart.id, pts[0], weight=len(pts))
        pair_agg.add(res["theta_pairing"], ctx.base.id, qs[0], weight=len(qs))
        inv_agg.add(max(res["omega_invariance"], res["theta_invariance"]),
                    ctx.ct.chart.id, pts[0], weight=len(pts))
    if agg.count == 0:
        return _na(spec, "no group action in this scenario")
    return [
        agg.record(spec.id, spec.anchor, tol),
        pair_agg.record("theta-pairing", "theta(X_a) = 0", 1e-10),
        inv_agg.record("group-invariance", "g* omega = omega and g* theta = theta",
                       1e-9),
    ]


def _check_regularity(spec, bundle, rng, n, tol):
    agg = _Agg()
    ctl = _Agg()
    expected = bundle.expected.get("rank")
    for ctx in _contexts(bundle, "action"):
        for xi in bundle.xi_list:
            for _ in range(_per_cell(n, max(1, len(bundle.xi_list)))):
                p = ctx.sample_level_point(rng, xi)
                rk = regularity_rank(ctx.ct, ctx.action, p)
                agg.add(abs(rk - (expected or ctx.action.algebra.dim)),
                        ctx.ct.chart.id, p)
        # control: the zero action has rank-0 momentum differential
        zero_gen = VectorField(ctx.base, [lambda c: 0.0] * ctx.base.dim, name="0")
        degenerate = ActionSpec(LieAlgebraSpec(dim=1), ctx.base, [zero_gen])
        p = ctx.sample_cot_point(rng)
        ctl.add(float(ctx.action.algebra.dim - regularity_rank(ctx.ct, degenerate, p)),
                ctx.ct.chart.id, p)
    if agg.count == 0:
        return _na(spec, "no group action in this scenario")
    return [agg.record(spec.id, spec.anchor, 0.0, passed=agg.max == 0.0,
                       note="integer rank defect"),
            ctl.record(spec.id + "-control", "rank d mu = 0 for the zero action",
                       0.0, expected_min=0.5, note="degenerate synthetic action")]


def _check_level_projection(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in _contexts(bundle, "action"):
        for xi in bundle.xi_list:
            for _ in range(_per_cell(n, max(1, len(bundle.xi_list)))):
                p = ctx.sample_level_point(rng, xi)
                mu = momentum_map(ctx.ct, ctx.action, p)
                agg.add(float(np.max(np.abs(mu - xi))), ctx.ct.chart.id, p)
    if agg.count == 0:
        return _na(spec, "no group action in this scenario")
    return [agg.record(spec.id, spec.anchor, tol)]


def _check_foliation(spec, bundle, rng, n, tol):
    agg = _Agg()
    dim_agg = _Agg()
    ctl = _Agg()
    expected_dim = bundle.expected.get("foliation_dim")
    for ctx in _contexts(bundle, "action"):
        dual = theta_omega_dual(ctx.ct, ctx.theta)
        for xi in bundle.xi_list:
            for _ in range(_per_cell(n, 2 * max(1, len(bundle.xi_list)))):
                p = ctx.sample_level_point(rng, xi)
                frame = foliation_frame(ctx.ct, ctx.action, ctx.theta, xi, p)
                brute = foliation_frame_bruteforce(ctx.ct, ctx.action,
                                                   ctx.lcs.omega, p)
                if frame.basis.dim != brute.dim:
                    agg.add(math.pi, ctx.ct.chart.id, p)
                    continue
                agg.add(principal_angle_distance(frame.basis, brute),
                        ctx.ct.chart.id, p)
                if expected_dim is not None:
                    dim_agg.add(abs(frame.basis.dim - expected_dim))
                if xi != 0.0 and sup_coeff(ctx.lcs.theta, p) > 1e-6:
                    # control: dropping the xi(a) theta-dual term moves the frame
                    lifted = lift_fundamental_field(
                        ctx.ct, ctx.action.generators[0]).lifted
                    wrong = SubspaceBasis(ctx.ct.chart.dim, [lifted.values(p)])
                    if brute.dim == 1:
                        ctl.add(principal_angle_distance(wrong, brute),
                                ctx.ct.chart.id, p)
    if agg.count == 0:
        return _na(spec, "no group action in this scenario")
    recs = [agg.record(spec.id, spec.anchor, tol)]
    if dim_agg.count:
        recs.append(dim_agg.record("foliation-dimension",
                                   "dim F = dim g_xi", 0.0,
                                   passed=dim_agg.max == 0.0,
                                   note="integer dimension defect"))
    recs.append(ctl.record(spec.id + "-control",
                           "the frame without the xi(a) term leaves F", tol,
                           expected_min=1e-4,
                           note="xi(a) theta-dual component dropped"))
    return recs


def _check_annihilator(spec, bundle, rng, n, tol):
    agg = _Agg()
    dim_agg = _Agg()
    for ctx in _contexts(bundle, "action"):
        for xi in bundle.xi_list:
            for _ in range(_per_cell(n, 2 * max(1, len(bundle.xi_list)))):
                p = ctx.sample_level_point(rng, xi)
                closed = omega_annihilator_closed_form(ctx.ct, ctx.action,
                                                       ctx.theta, xi, p)
                numeric = omega_annihilator_numeric(ctx.ct, ctx.action,
                                                    ctx.lcs.omega, p)
                tangent = level_tangent_basis(ctx.ct, ctx.action, p)
                dim_agg.add(abs((tangent.dim + numeric.dim) - ctx.ct.chart.dim))
                if closed.dim != numeric.dim:
                    agg.add(math.pi, ctx.ct.chart.id, p)
                else:
                    agg.add(principal_angle_distance(closed, numeric),
                            ctx.ct.chart.id, p)
    if agg.count == 0:
        return _na(spec, "no group action in this scenario")
    return [agg.record(spec.id, spec.anchor, tol),
            dim_agg.record("annihilator-dimension",
                           "dim W + dim W^omega = dim V", 0.0,
                           passed=dim_agg.max == 0.0,
                           note="integer dimension defect")]


# ---------------------------------------------------------------------------
# shift, quotient and embedding checks


def _valid_sections(bundle: ScenarioBundle, ctx: ChartContext):
    """(xi, section, expected_valid) triples declared by the scenario."""
    if ctx.section_for is None:
        return
    for xi in bundle.xi_list:
        section = ctx.section_for(float(xi))
        valid = ctx.section_valid or float(xi) == 0.0
        yield float(xi), section, valid


def _check_shift(spec, bundle, rng, n, tol):
    agg = _Agg()
    level_agg = _Agg()
    for ctx in _contexts(bundle, "section"):
        for xi, section, _valid in _valid_sections(bundle, ctx):
            pts = [ctx.sample_level_point(rng, xi)
                   for _ in range(_per_cell(n, 4 * max(1, len(bundle.xi_list))))]
            res = shift_identity_residuals(ctx.ct, section, ctx.lcs, ctx.theta, pts)
            agg.add(max(res.values()), ctx.ct.chart.id, pts[0], weight=len(pts))
            smap = shift_map(ctx.ct, section)
            for p in pts:
                shifted = smap.value(p)
                mu = momentum_map(ctx.ct, ctx.action, shifted)
                level_agg.add(float(np.max(np.abs(mu))), ctx.ct.chart.id, p)
                roundtrip = smap.inverse.value(shifted)
                level_agg.add(float(np.max(np.abs(roundtrip - p))),
                              ctx.ct.chart.id, p)
    if agg.count == 0:
        return _na(spec, "no level section declared")
    return [agg.record(spec.id, spec.anchor, tol),
            level_agg.record("shift-level", "S_xi maps mu^-1(xi) onto mu^-1(0)",
                             1e-10)]


def _check_shift_transport(spec, bundle, rng, n, tol):
    agg = _Agg()
    obstruct = _Agg()
    ctl = _Agg()
    for ctx in _contexts(bundle, "section"):
        for xi, section, valid in _valid_sections(bundle, ctx):
            pts = [ctx.sample_level_point(rng, xi)
                   for _ in range(_per_cell(n, 4 * max(1, len(bundle.xi_list))))]
            res = shift_transport_residual(ctx.ct, section, ctx.action,
                                           ctx.theta, pts)
            if valid:
                agg.add(res, ctx.ct.chart.id, pts[0], weight=len(pts))
            else:
                # the declared candidate violates the invariance equation;
                # the equivalence must detect it
                obstruct.add(res, ctx.ct.chart.id, pts[0], weight=len(pts))
            if valid and xi != 0.0:
                # the bump must vary along the orbit direction to break
                # the invariance equation
                def bump_coeff(c):
                    total = c[0]
                    for x in c[1:]:
                        total = total + x
                    return 0.01 * jsin(total)

                bump = form_from_coeffs(ctx.base, 1, {(0,): bump_coeff},
                                        name="bump")
                perturbed = LevelSection(form_sum([section.form, bump]), xi)
                ctl.add(shift_transport_residual(ctx.ct, perturbed, ctx.action,
                                                 ctx.theta, pts),
                        ctx.ct.chart.id, pts[0], weight=len(pts))
    if agg.count == 0 and obstruct.count == 0:
        return _na(spec, "no level section declared")
    recs = []
    if agg.count:
        recs.append(agg.record(spec.id, spec.anchor, tol))
    if ctl.count:
        recs.append(ctl.record(spec.id + "-control",
                               "a 1e-2 perturbation of alpha_xi is detected",
                               tol, expected_min=1e-4,
                               note="non-invariant bump added to alpha_xi"))
    if obstruct.count:
        recs.append(obstruct.record("no-section-obstruction",
                                    "L_X alpha = xi theta fails for the "
                                    "connection candidate", tol,
                                    expected_min=1e-4,
                                    note="declared candidate; violation expected"))
    return recs


def _check_hypothesis(spec, bundle, rng, n, tol):
    agg = _Agg()
    obstruct = _Agg()
    for ctx in _contexts(bundle, "section"):
        qs = [ctx.sample_base(rng)
              for _ in range(_per_cell(n, 2 * max(1, len(bundle.xi_list))))]
        for xi, section, valid in _valid_sections(bundle, ctx):
            res = hypothesis_residuals(section, ctx.action, ctx.theta, qs)
            if valid:
                agg.add(max(res.values()), ctx.base.id, qs[0], weight=len(qs))
            else:
                agg.add(res["membership"], ctx.base.id, qs[0], weight=len(qs))
                obstruct.add(res["lie"], ctx.base.id, qs[0], weight=len(qs))
    if agg.count == 0:
        return _na(spec, "no level section declared")
    recs = [agg.record(spec.id, spec.anchor, tol)]
    if obstruct.count:
        recs.append(obstruct.record("no-section-obstruction-hypothesis",
                                    "the connection candidate fails "
                                    "L_X alpha = xi theta", tol,
                                    expected_min=1e-3,
                                    note="expected failure magnitude ~ |xi|"))
    return recs


def _check_curvature(spec, bundle, rng, n, tol):
    agg = _Agg()
    for ctx in _contexts(bundle, "quotient"):
        if ctx.section_for is None:
            continue
        qs = [ctx.sample_base(rng)
              for _ in range(_per_cell(n, 4 * max(1, len(bundle.xi_list))))]
        qhs = [ctx.quotient.projection.value(q) for q in qs]
        for xi, section, valid in _valid_sections(bundle, ctx):
            if not valid:
                continue
            res = curvature_residuals(section, ctx.theta, ctx.action,
                                      ctx.quotient, qs, qhs)
            agg.add(max(res.values()), ctx.base.id, qs[0], weight=len(qs))
    if agg.count == 0:
        return _na(spec, "no quotient data or valid section")
    return [agg.record(spec.id, spec.anchor, tol)]


def _check_phi0(spec, bundle, rng, n, tol):
    agg = _Agg()
    wd_agg = _Agg()
    ctl = _Agg()
    for ctx in _contexts(bundle, "quotient"):
        pts = [ctx.sample_level_point(rng, 0.0) for _ in range(_per_cell(n, 4))]
        res = phi0_identity_residuals(ctx.ct, ctx.quotient_ct, ctx.quotient,
                                      ctx.theta, pts)
        agg.add(max(res.values()), ctx.ct.chart.id, pts[0], weight=len(pts))
        wd_agg.add(phi0_well_definedness(ctx.ct, ctx.quotient, ctx.action,
                                         pts, rng), ctx.ct.chart.id, pts[0],
                   weight=len(pts))
        # control: off the zero level the output depends on the lift
        p_off = ctx.sample_level_point(rng, 0.5)
        q = ctx.ct.q_part(p_off)
        shift = ctx.action.generators[0].values(q)
        _, g0 = quotient_covector(ctx.ct, ctx.quotient, ctx.action, p_off,
                                  mu_tol=np.inf)
        _, g1 = quotient_covector(ctx.ct, ctx.quotient, ctx.action, p_off,
                                  mu_tol=np.inf, lift_shift=shift)
        ctl.add(float(np.max(np.abs(g0 - g1))), ctx.ct.chart.id, p_off)
    if agg.count == 0:
        return _na(spec, "no quotient data in this scenario")
    return [agg.record(spec.id, spec.anchor, tol),
            wd_agg.record("phi0-well-defined",
                          "the lift choice does not matter on mu^-1(0)", 1e-12),
            ctl.record(spec.id + "-control",
                       "off the zero level the quotient covector is "
                       "lift-dependent", tol, expected_min=1e-4,
                       note="same construction at mu = 0.5")]


def _check_embedding(spec, bundle, rng, n, tol):
    agg = _Agg()
    ann_agg = _Agg()
    wit_agg = _Agg()
    for ctx in _contexts(bundle, "quotient"):
        if ctx.section_for is None:
            continue
        theta_q = ctx.quotient.theta_quotient
        lcs_hat = lcs_form(ctx.quotient_ct,
                           theta_q if theta_q is not None
                           else zero_form(ctx.quotient.chart, 1))
        for xi, section, valid in _valid_sections(bundle, ctx):
            if not valid:
                continue
            pts = [ctx.sample_level_point(rng, xi)
                   for _ in range(_per_cell(n, 4 * max(1, len(bundle.xi_list))))]
            res = composite_embedding_residuals(
                ctx.ct, ctx.quotient_ct, ctx.quotient, section, ctx.lcs,
                lcs_hat, ctx.action, ctx.theta, pts)
            agg.add(max(res.values()), ctx.ct.chart.id, pts[0], weight=len(pts))
            ann_agg.add(image_annihilator_residuals(
                ctx.ct, ctx.quotient_ct, ctx.quotient, section, ctx.action,
                pts), ctx.ct.chart.id, pts[0], weight=len(pts))
            samples = [(rng.uniform(-1.0, 1.0, ctx.quotient.chart.dim),
                        rng.normal(0.0, 1.0, ctx.quotient.chart.dim))
                       for _ in range(_per_cell(n, 8 * max(1, len(bundle.xi_list))))]
            wit = surjectivity_witness_residuals(
                ctx.ct, ctx.quotient_ct, ctx.quotient, section, ctx.action,
                samples)
            wit_agg.add(max(wit.values()), ctx.quotient.chart.id, samples[0][0],
                        weight=len(samples))
    if agg.count == 0:
        return _na(spec, "no quotient data or valid section")
    return [agg.record(spec.id, spec.anchor, tol),
            ann_agg.record("image-annihilator", "Im phi = Ann(p_* O)", 1e-9),
            wit_agg.record("surjectivity-witness",
                           "mu(p* eta + alpha_xi) = xi and phi hits eta", 1e-10)]


def _check_structure_facts(spec, bundle, rng, n, tol):
    agg = _Agg()
    dual_agg = _Agg()
    for ctx in _contexts(bundle, "action"):
        d = ctx.action.algebra.dim
        for xi in bundle.xi_list:
            p = ctx.sample_level_point(rng, xi)
            frame = foliation_frame(ctx.ct, ctx.action, ctx.theta, xi, p)
            level_dim = ctx.ct.chart.dim - regularity_rank(ctx.ct, ctx.action, p)
            reduced = level_dim - frame.basis.dim
            defects = 0
            if "foliation_dim" in bundle.expected:
                defects += abs(frame.basis.dim - bundle.expected["foliation_dim"])
            if "reduced_dim" in bundle.expected:
                defects += abs(reduced - bundle.expected["reduced_dim"])
            if "dim_g" in bundle.expected:
                defects += abs(d - bundle.expected["dim_g"])
            agg.add(float(defects), ctx.ct.chart.id, p)
            if xi != 0.0:
                dual = theta_omega_dual(ctx.ct, ctx.theta).values(p)
                theta_norm = math.sqrt(sum(
                    v * v for v in ctx.lcs.theta.coeff_values(p).values()))
                if theta_norm > 0.5:
                    # margin below the 0.1 floor; zero means the vertical
                    # twist component is genuinely present
                    ratio = float(np.linalg.norm(dual)) / theta_norm
                    dual_agg.add(max(0.0, 0.1 - ratio), ctx.ct.chart.id, p)
    if agg.count == 0:
        return _na(spec, "no group action in this scenario")
    recs = [agg.record(spec.id, spec.anchor, 0.0, passed=agg.max == 0.0,
                       note="integer structure defects")]
    if dual_agg.count:
        recs.append(dual_agg.record(
            "theta-dual-nonzero",
            "the foliation generator has a vertical twist component", 0.0,
            passed=dual_agg.max == 0.0,
            note="shortfall of |theta-dual| / |theta| below 0.1 at nonzero xi"))
    return recs


def _check_transitions(spec, bundle, rng, n, tol):
    agg = _Agg()
    for fwd, bwd, sampler in bundle.transition_pairs:
        for _ in range(_per_cell(n, 4)):
            u = sampler(rng)
            agg.add(float(np.max(np.abs(bwd.value(fwd.value(u)) - u))),
                    fwd.source.id, u)
    if agg.count == 0:
        return _na(spec, "single-chart scenario")
    return [agg.record(spec.id, spec.anchor, tol)]


# ---------------------------------------------------------------------------
# R x M quotient checks


def _rxm_records(bundle: RxMQuotientBundle, rng, n, tolerances) -> list[CheckRecord]:
    eq_agg = _Agg()
    desc_agg = _Agg()
    inv_agg = _Agg()
    phi = bundle.quotient_map
    pb = pullback(phi, bundle.restricted_form)
    for _ in range(max(4, n // 4)):
        p = bundle.sample(rng)
        s = float(rng.uniform(-0.6, 0.6))
        moved = bundle.action_map(s).value(p)
        eq_agg.add(float(np.max(np.abs(phi.value(moved) - phi.value(p)))),
                   bundle.chart.id, p)
        desc_agg.add(coeff_residual(pb, bundle.invariant_form, p),
                     bundle.chart.id, p)
        act_pb = pullback(bundle.action_map(s), bundle.invariant_form)
        inv_agg.add(coeff_residual(act_pb, bundle.invariant_form, p),
                    bundle.chart.id, p)
    t_eq = tolerances.get("rxm-equivariance", 1e-10)
    t_desc = tolerances.get("rxm-descent", 1e-8)
    return [
        eq_agg.record("rxm-equivariance",
                      "phi(t + s xi, e^{is} m) = phi(t, m)", t_eq),
        desc_agg.record("rxm-descent", "phi* alpha_0 = alpha", t_desc),
        inv_agg.record("rxm-invariance",
                       "the test form is action-invariant", t_desc),
    ]


# ---------------------------------------------------------------------------
# registry and driver


CHECKS: list[CheckSpec] = [
    CheckSpec("twisted-complex", "d_theta^2 = 0", 1e-9, _check_twisted_complex,
              samples_note="samples per chart, every catalog form"),
    CheckSpec("lcs-validity", "d omega = theta ^ omega", 1e-9, _check_lcs_validity),
    CheckSpec("lcs-construction",
              "omega_theta = d eta - theta~ ^ eta matches the coefficient "
              "expansion", 1e-10, _check_lcs_construction),
    CheckSpec("ad-vs-fd", "plumbing", 1e-6, _check_ad_vs_fd,
              samples_note="relative error vs central differences, h=1e-4"),
    CheckSpec("tautological-intrinsic", "eta_alpha(v) = alpha(pi_* v)", 1e-10,
              _check_tautological),
    CheckSpec("twisted-cartan",
              "L^theta_X = d_theta i_X + i_X d_theta", 1e-8, _check_cartan,
              samples_note="samples//4 per chart"),
    CheckSpec("lie-flow-oracle",
              "L_X a = d/dt Phi_t^* a at t = 0", 1e-5, _check_flow_oracle,
              samples_note="samples//8 per chart"),
    CheckSpec("conformal-rescale",
              "e^f omega is again LCS with Lee form theta + df", 1e-9,
              _check_conformal, samples_note="samples//4 per chart"),
    CheckSpec("theta-dual", "theta~^omega = sum theta_i d/dc_i", 1e-10,
              _check_theta_dual),
    CheckSpec("eta-invariance", "(T* g)^* eta = eta", 1e-9,
              _check_eta_invariance, needs="action"),
    CheckSpec("lift-projection", "pi_* X~_a = X_a", 1e-10,
              _check_lift_projection, needs="action"),
    CheckSpec("momentum-vs-rho", "mu(alpha)(a) = -alpha(X_a) = -eta(X~_a)",
              1e-12, _check_momentum_vs_rho, needs="action"),
    CheckSpec("twisted-hamiltonian", "i_{X~_a} omega = d_theta rho_a", 1e-8,
              _check_twisted_hamiltonian, needs="action",
              samples_note="samples//4 per chart"),
    CheckSpec("regularity", "rank d mu = dim G", 0.0, _check_regularity,
              needs="action", samples_note="samples//len(xi) per xi"),
    CheckSpec("level-projection", "mu(level point) = xi", 1e-12,
              _check_level_projection, needs="action"),
    CheckSpec("foliation-frame",
              "F = {X~_a + xi(a) theta^omega : a in g_xi}", 1e-6,
              _check_foliation, needs="action",
              samples_note="samples//(2 len(xi)) per xi, brute-force oracle"),
    CheckSpec("omega-annihilator",
              "(T mu^-1(xi))^omega = {X~_a + xi(a) theta^omega : a in g}",
              1e-6, _check_annihilator, needs="action"),
    CheckSpec("shift-identities",
              "S* theta~ = theta~; S* eta = eta - pi* alpha; "
              "S* omega = omega - pi* d_theta alpha; S_* theta^omega = "
              "theta^omega", 1e-8, _check_shift, needs="section"),
    CheckSpec("shift-transport",
              "S_* X~_a = X~_a - xi(a) theta^omega iff "
              "L_{X_a} alpha_xi = xi(a) theta", 1e-8, _check_shift_transport,
              needs="section"),
    CheckSpec("alpha-hypothesis",
              "alpha_xi(X_a) = -xi(a) and L_{X_a} alpha_xi = xi(a) theta",
              1e-9, _check_hypothesis, needs="section"),
    CheckSpec("curvature-descent",
              "p* beta_xi = d_theta alpha_xi; i_{X_a} d_theta alpha_xi = 0; "
              "d_theta' beta_xi = 0", 1e-8, _check_curvature,
              needs="quotient"),
    CheckSpec("phi0-identities", "phi0* eta' = eta; phi0* theta~' = theta~",
              1e-8, _check_phi0, needs="quotient"),
    CheckSpec("embedding-composite",
              "S* phi0* (omega' + B_xi) = omega; S* phi0* theta~' = theta~",
              1e-8, _check_embedding, needs="quotient"),
    CheckSpec("structure-facts",
              "reduced dim = dim mu^-1(xi) - dim g_xi", 0.0,
              _check_structure_facts, needs="action"),
    CheckSpec("chart-transitions", "transition maps are mutually inverse",
              1e-9, _check_transitions),
]


def list_checks() -> list[dict]:
    out = []
    for spec in CHECKS:
        out.append({"id": spec.id, "anchor": spec.anchor,
                    "tolerance": spec.tolerance, "needs": spec.needs or "none",
                    "samples": spec.samples_note or "samples per chart"})
    out.append({"id": "rxm-equivariance",
                "anchor": "phi(t + s xi, e^{is} m) = phi(t, m)",
                "tolerance": 1e-10, "needs": "rxm scenario",
                "samples": "samples//4"})
    out.append({"id": "rxm-descent", "anchor": "phi* alpha_0 = alpha",
                "tolerance": 1e-8, "needs": "rxm scenario",
                "samples": "samples//4"})
    return out


def run_suite(config: RunConfig) -> VerificationReport:
    """Build the scenario and run every applicable check deterministically."""
    bundle = build_scenario(config.scenario)
    if isinstance(bundle, RxMQuotientBundle):
        xi = tuple(config.xi) if config.xi else (bundle.xi,)
        report = VerificationReport(scenario=config.scenario, seed=config.seed,
                                    samples=config.samples, version=__version__,
                                    xi=xi)
        rng = np.random.default_rng([config.seed, 0])
        for rec in _rxm_records(bundle, rng, config.samples, config.tolerances):
            if rec.expected_min is not None:
                report.controls.append(rec)
            else:
                report.checks.append(rec)
        return report

    if config.xi is not None:
        bundle.xi_list = tuple(config.xi)
    report = VerificationReport(scenario=config.scenario, seed=config.seed,
                                samples=config.samples, version=__version__,
                                xi=tuple(bundle.xi_list))
    for index, spec in enumerate(CHECKS):
        rng = np.random.default_rng([config.seed, index])
        tol = config.tolerances.get(spec.id, spec.tolerance)
        records = spec.runner(spec, bundle, rng, config.samples, tol)
        for rec in records:
            if rec.expected_min is not None:
                report.controls.append(rec)
            else:
                report.checks.append(rec)
    return report
