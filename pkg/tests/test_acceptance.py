"""Acceptance criteria, one test per criterion, run at stated tolerances.

Each test prints a single PASS/FAIL line (visible with `pytest -s` or on
failure); tolerances and sample counts are pinned here, not configurable.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from lcs_reduce.catalog import build_scenario, quotient_diffeo_rxm
from lcs_reduce.cotangent import direct_lcs_two_form, lcs_form
from lcs_reduce.forms import (
    VectorField,
    coeff_residual,
    flow_map,
    form_from_coeffs,
    form_sum,
    interior_product,
    lie_derivative,
    pullback,
    sup_coeff,
    twisted_derivative,
    twisted_lie_derivative,
    zero_form,
)
from lcs_reduce.jets import eval_jet, fd_oracle
from lcs_reduce.jets import sin as jsin
from lcs_reduce.linalg import principal_angle_distance
from lcs_reduce.reduction import (
    LevelSection,
    composite_embedding_residuals,
    foliation_frame,
    foliation_frame_bruteforce,
    image_annihilator_residuals,
    shift_transport_residual,
    phi0_identity_residuals,
    phi0_well_definedness,
    regularity_rank,
    shift_identity_residuals,
    surjectivity_witness_residuals,
)

ALL_SCENARIOS = ["flat-baseline", "twisted-cylinder", "hopf-s3", "s1xs3",
                 "tstar-u1", "tstar-u2", "tstar-u3"]


def _report(num: int, ok: bool, detail: str):
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
    assert ok, detail


def test_criterion_1_twisted_complex():
    """d_theta^2 = 0 for every catalog form at 200 seeded points per chart."""
    worst = 0.0
    rng = np.random.default_rng(100)
    for name in ALL_SCENARIOS:
        bundle = build_scenario(name)
        for ctx in bundle.contexts:
            pts = [ctx.sample_cot_point(rng) for _ in range(200)]
            for _, a in ctx.catalog_forms:
                if a.degree + 2 > ctx.ct.chart.dim:
                    continue
                dd = twisted_derivative(ctx.lcs.theta,
                                        twisted_derivative(ctx.lcs.theta, a))
                worst = max(worst, max(sup_coeff(dd, p) for p in pts))
    _report(1, worst < 1e-9, f"max |d_theta^2 a| = {worst:.3e} (tol 1e-9)")


def test_criterion_2_lcs_validity_n123():
    """Structure equation, nondegeneracy and the coefficient expansion
    on T*U for n in {1, 2, 3}."""
    worst_lcs = 0.0
    worst_match = 0.0
    min_det = float("inf")
    rng = np.random.default_rng(101)
    for n in (1, 2, 3):
        ctx = build_scenario(f"tstar-u{n}").contexts[0]
        pts = [ctx.sample_cot_point(rng) for _ in range(200)]
        res = ctx.lcs.validity_residuals(pts)
        worst_lcs = max(worst_lcs, res["dtheta"], res["lcs"])
        min_det = min(min_det, res["min_abs_det"])
        direct = direct_lcs_two_form(ctx.ct, ctx.theta)
        worst_match = max(worst_match,
                          max(coeff_residual(direct, ctx.lcs.omega, p)
                              for p in pts))
    ok = worst_lcs < 1e-9 and min_det > 1e-8 and worst_match < 1e-10
    _report(2, ok, f"lcs residual {worst_lcs:.3e} (tol 1e-9), "
                   f"min |det| {min_det:.3e} (> 1e-8), "
                   f"expansion match {worst_match:.3e} (tol 1e-10)")


def test_criterion_3_ad_vs_fd():
    """Jets against central differences (h = 1e-4) within 1e-6 relative."""
    worst = 0.0
    rng = np.random.default_rng(102)
    for name in ALL_SCENARIOS:
        bundle = build_scenario(name)
        for ctx in bundle.contexts:
            for fname, fn, dim in ctx.ad_functions:
                for _ in range(50):
                    q = (ctx.sample_base(rng) if dim == ctx.base.dim
                         else ctx.sample_cot_point(rng)[:dim])
                    jet = eval_jet(fn, q)
                    g, h = fd_oracle(fn, q, 1e-4)
                    scale = max(1.0, float(np.max(np.abs(g))),
                                float(np.max(np.abs(h))))
                    worst = max(worst,
                                max(float(np.max(np.abs(jet.grad - g))),
                                    float(np.max(np.abs(jet.hess - h)))) / scale)
    _report(3, worst < 1e-6, f"max relative AD-FD gap = {worst:.3e} (tol 1e-6)")


def test_criterion_4_twisted_cartan_and_flow():
    """Twisted Cartan < 1e-8 with the flow oracle agreeing within 1e-5."""
    worst_cartan = 0.0
    worst_flow = 0.0
    rng = np.random.default_rng(103)
    for name in ("flat-baseline", "twisted-cylinder", "hopf-s3"):
        ctx = build_scenario(name).contexts[0]
        chart = ctx.ct.chart
        nn = chart.dim
        x = VectorField(chart, [
            (lambda i: (lambda c: jsin(c[i % nn]) + 0.3 * c[(i + 1) % nn]))(i)
            for i in range(nn)], name="generic")
        for _, a in ctx.catalog_forms:
            if a.degree >= chart.dim:
                continue
            lhs = twisted_lie_derivative(x, ctx.lcs.theta, a)
            if a.degree == 0:
                rhs = interior_product(x, twisted_derivative(ctx.lcs.theta, a))
            else:
                rhs = form_sum([
                    twisted_derivative(ctx.lcs.theta, interior_product(x, a)),
                    interior_product(x, twisted_derivative(ctx.lcs.theta, a))])
            for _ in range(30):
                p = ctx.sample_cot_point(rng)
                worst_cartan = max(worst_cartan, coeff_residual(lhs, rhs, p))
        h = 1e-3
        a = ctx.catalog_forms[3][1]
        quotient = form_sum([pullback(flow_map(x, h), a),
                             pullback(flow_map(x, -h), a)], [0.5 / h, -0.5 / h])
        lie = lie_derivative(x, a)
        for _ in range(10):
            p = ctx.sample_cot_point(rng)
            worst_flow = max(worst_flow, coeff_residual(quotient, lie, p))
    ok = worst_cartan < 1e-8 and worst_flow < 1e-5
    _report(4, ok, f"Cartan residual {worst_cartan:.3e} (tol 1e-8), "
                   f"flow oracle gap {worst_flow:.3e} (tol 1e-5)")


def test_criterion_5_momentum_regularity():
    """rank d mu = dim G at 100 level samples, xi in {0, +-0.3, +-0.7}."""
    rng = np.random.default_rng(104)
    bad = 0
    total = 0
    for name in ("hopf-s3", "s1xs3"):
        ctx = build_scenario(name).contexts[0]
        for xi in (0.0, 0.3, -0.3, 0.7, -0.7):
            for _ in range(100):
                p = ctx.sample_level_point(rng, xi)
                total += 1
                if regularity_rank(ctx.ct, ctx.action, p) != 1:
                    bad += 1
    _report(5, bad == 0, f"rank defects {bad}/{total} over both scenarios")


def test_criterion_6_foliation_characterization():
    """Closed-form frame vs brute-force intersection, angle < 1e-6."""
    rng = np.random.default_rng(105)
    worst = 0.0
    for name in ("flat-baseline", "twisted-cylinder", "hopf-s3", "s1xs3"):
        ctx = build_scenario(name).contexts[0]
        for xi in (0.0, 0.3, -0.3, 0.7, -0.7):
            for _ in range(20):
                p = ctx.sample_level_point(rng, xi)
                frame = foliation_frame(ctx.ct, ctx.action, ctx.theta, xi, p)
                brute = foliation_frame_bruteforce(ctx.ct, ctx.action,
                                                   ctx.lcs.omega, p)
                assert frame.basis.dim == brute.dim
                worst = max(worst,
                            principal_angle_distance(frame.basis, brute))
    _report(6, worst < 1e-6, f"max principal angle = {worst:.3e} (tol 1e-6)")


def test_criterion_7_shift_identities_with_control():
    """Shift identities < 1e-8 on valid-section scenarios; a 1e-2
    perturbation violating the invariance equation is detected (> 1e-4)."""
    rng = np.random.default_rng(106)
    worst = 0.0
    control = float("inf")
    for name in ("flat-baseline", "twisted-cylinder"):
        ctx = build_scenario(name).contexts[0]
        for xi in (0.0, 0.3, -0.3, 0.7, -0.7, 1.0):
            section = ctx.section_for(xi)
            pts = [ctx.sample_level_point(rng, xi) for _ in range(10)]
            res = shift_identity_residuals(ctx.ct, section, ctx.lcs,
                                           ctx.theta, pts)
            worst = max(worst, max(res.values()))
            worst = max(worst, shift_transport_residual(
                ctx.ct, section, ctx.action, ctx.theta, pts))
            if xi == 0.7:
                def bump_coeff(c):
                    total = c[0]
                    for v in c[1:]:
                        total = total + v
                    return 0.01 * jsin(total)

                bump = form_from_coeffs(ctx.base, 1, {(0,): bump_coeff})
                perturbed = LevelSection(form_sum([section.form, bump]), xi)
                control = min(control, shift_transport_residual(
                    ctx.ct, perturbed, ctx.action, ctx.theta, pts))
    ok = worst < 1e-8 and control > 1e-4
    _report(7, ok, f"shift residual {worst:.3e} (tol 1e-8), "
                   f"negative control {control:.3e} (floor 1e-4)")


def test_criterion_8_phi0_identities():
    """phi0 pullback identities < 1e-8 at xi = 0 on every scenario with
    quotient data; lift independence < 1e-12."""
    rng = np.random.default_rng(107)
    worst = 0.0
    worst_wd = 0.0
    found = 0
    for name in ("flat-baseline", "twisted-cylinder", "hopf-s3", "s1xs3"):
        bundle = build_scenario(name)
        for ctx in bundle.contexts:
            if ctx.quotient is None:
                continue
            found += 1
            pts = [ctx.sample_level_point(rng, 0.0) for _ in range(25)]
            res = phi0_identity_residuals(ctx.ct, ctx.quotient_ct,
                                          ctx.quotient, ctx.theta, pts)
            worst = max(worst, max(res.values()))
            worst_wd = max(worst_wd, phi0_well_definedness(
                ctx.ct, ctx.quotient, ctx.action, pts, rng))
    ok = found >= 4 and worst < 1e-8 and worst_wd < 1e-12
    _report(8, ok, f"{found} quotient scenarios; pullback residual "
                   f"{worst:.3e} (tol 1e-8), lift independence "
                   f"{worst_wd:.3e} (tol 1e-12)")


def test_criterion_9_main_theorem_composite():
    """The composed embedding identities, the image annihilator and the
    surjectivity witness on the g = g_xi scenarios."""
    rng = np.random.default_rng(108)
    worst = 0.0
    worst_ann = 0.0
    worst_wit = 0.0
    cells = 0
    plan = [("flat-baseline", (0.0, 0.3, -0.3, 0.7, -0.7, 1.0)),
            ("twisted-cylinder", (0.0, 0.3, -0.3, 0.7, -0.7, 1.0)),
            ("hopf-s3", (0.0,)),
            ("s1xs3", (0.0,))]
    for name, xis in plan:
        ctx = build_scenario(name).contexts[0]
        theta_q = ctx.quotient.theta_quotient
        lcs_hat = lcs_form(ctx.quotient_ct,
                           theta_q if theta_q is not None
                           else zero_form(ctx.quotient.chart, 1))
        for xi in xis:
            section = ctx.section_for(xi)
            pts = [ctx.sample_level_point(rng, xi) for _ in range(10)]
            res = composite_embedding_residuals(
                ctx.ct, ctx.quotient_ct, ctx.quotient, section, ctx.lcs,
                lcs_hat, ctx.action, ctx.theta, pts)
            worst = max(worst, res["omega"], res["theta"])
            worst_ann = max(worst_ann, image_annihilator_residuals(
                ctx.ct, ctx.quotient_ct, ctx.quotient, section, ctx.action,
                pts))
            samples = [(rng.uniform(-1.0, 1.0, ctx.quotient.chart.dim),
                        rng.normal(0.0, 1.0, ctx.quotient.chart.dim))
                       for _ in range(5)]
            wit = surjectivity_witness_residuals(
                ctx.ct, ctx.quotient_ct, ctx.quotient, section, ctx.action,
                samples)
            worst_wit = max(worst_wit, wit["level"], wit["roundtrip"])
            cells += 1
    ok = worst < 1e-8 and worst_ann < 1e-9 and worst_wit < 1e-8
    _report(9, ok, f"{cells} cells; composite {worst:.3e} (tol 1e-8), "
                   f"annihilator {worst_ann:.3e} (tol 1e-9), "
                   f"witness {worst_wit:.3e}")


def test_criterion_10_section4_structure():
    """S1 x S3 at xi = 0.7: foliation dim 1, reduced dim 6; the R x M
    quotient map passes its equivariance and descent identities."""
    rng = np.random.default_rng(109)
    ctx = build_scenario("s1xs3").contexts[0]
    xi = 0.7
    dims_ok = True
    for _ in range(10):
        p = ctx.sample_level_point(rng, xi)
        frame = foliation_frame(ctx.ct, ctx.action, ctx.theta, xi, p)
        level_dim = ctx.ct.chart.dim - regularity_rank(ctx.ct, ctx.action, p)
        dims_ok = dims_ok and frame.basis.dim == 1 \
            and (level_dim - frame.basis.dim) == 6

    b = quotient_diffeo_rxm(xi)
    worst = 0.0
    pb = pullback(b.quotient_map, b.restricted_form)
    for _ in range(10):
        p = b.sample(rng)
        s = float(rng.uniform(-0.6, 0.6))
        moved = b.action_map(s).value(p)
        worst = max(worst, float(np.max(np.abs(
            b.quotient_map.value(moved) - b.quotient_map.value(p)))))
        worst = max(worst, coeff_residual(pb, b.invariant_form, p))
    ok = dims_ok and worst < 1e-8
    _report(10, ok, f"foliation/reduced dims {'ok' if dims_ok else 'WRONG'}; "
                    f"quotient-map residual {worst:.3e} (tol 1e-8)")


def test_criterion_11_cli_determinism():
    """Two default runs of `verify --scenario hopf-s3 --seed 42` emit
    byte-identical JSON and exit 0."""
    cmd = [sys.executable, "-m", "lcs_reduce.cli", "verify",
           "--scenario", "hopf-s3", "--seed", "42"]
    r1 = subprocess.run(cmd, capture_output=True, timeout=590)
    r2 = subprocess.run(cmd, capture_output=True, timeout=590)
    identical = r1.stdout == r2.stdout
    ok = identical and r1.returncode == 0 and r2.returncode == 0
    verdict = ""
    if r1.stdout:
        verdict = json.loads(r1.stdout).get("verdict", "")
    _report(11, ok, f"byte-identical={identical}, exits=({r1.returncode}, "
                    f"{r2.returncode}), verdict={verdict}")
