import numpy as np
import pytest

from lcs_reduce.catalog import (
    MOMENTUM_FRAME_INDEX,
    MOMENTUM_FRAME_SIGN,
    _chart_from_sphere,
    _quat_i,
    _quat_j,
    _quat_k,
    _sample_sphere_chart,
    _sphere_from_chart,
    alpha_xi_from_f,
    build_scenario,
    hopf_frame_coefficients,
    quotient_diffeo_rxm,
    scenario_names,
)
from lcs_reduce.cotangent import theta_omega_dual
from lcs_reduce.forms import coeff_residual, form_from_coeffs, pullback
from lcs_reduce.jets import eval_jet
from lcs_reduce.reduction import (
    hypothesis_residuals,
    foliation_frame,
    level_set_point,
    momentum_map,
    regularity_rank,
)

RNG = np.random.default_rng(21)


def _chart_jacobian_inverse(eps, u):
    """d(sphere)/d(chart) stacked from jets: 4 x 3."""
    comps = _sphere_from_chart(eps)

    def comp_fn(m):
        return lambda c: comps(c)[m]

    return np.array([eval_jet(comp_fn(m), u).grad for m in range(4)])


def test_quaternion_products():
    q = [1.0, 0.0, 0.0, 0.0]
    assert _quat_i(q) == [0.0, 1.0, 0.0, 0.0]
    assert _quat_j(q) == [0.0, 0.0, 1.0, 0.0]
    assert _quat_k(q) == [0.0, 0.0, 0.0, 1.0]
    # i(jq) = kq and anti-commutation i(iq) = -q
    r = [0.3, -0.5, 0.7, 0.4]
    assert np.allclose(_quat_i(_quat_j(r)), _quat_k(r))
    assert np.allclose(_quat_i(_quat_i(r)), [-x for x in r])


def test_sphere_chart_roundtrip():
    for eps in (+1.0, -1.0):
        sphere = _sphere_from_chart(eps)
        to_chart = _chart_from_sphere(eps)
        for _ in range(10):
            u = RNG.uniform(-1.0, 1.0, 3)
            x = np.array(sphere(list(u)))
            assert abs(float(x @ x) - 1.0) < 1e-12
            assert np.max(np.abs(to_chart(x) - u)) < 1e-12


def test_sampler_stays_in_region():
    for eps in (+1.0, -1.0):
        for _ in range(20):
            u = _sample_sphere_chart(RNG, eps, require_g=0.25, g_max=0.64)
            x = np.array(_sphere_from_chart(eps)(list(u)))
            g = x[0] ** 2 + x[1] ** 2
            assert 0.25 - 1e-12 <= g <= 0.64 + 1e-12
            assert eps * x[0] <= 0.2 + 1e-12


def test_fundamental_field_matches_ambient_generator():
    """Chart components push forward to i q on the sphere."""
    bundle = build_scenario("hopf-s3")
    for ctx, eps in zip(bundle.contexts, (-1.0, +1.0)):
        gen = ctx.action.generators[0]
        sphere = _sphere_from_chart(eps)
        for _ in range(5):
            u = _sample_sphere_chart(RNG, eps)
            jac = _chart_jacobian_inverse(eps, u)
            ambient = jac @ gen.values(u)
            expected = np.array(_quat_i(sphere(list(u))))
            assert np.max(np.abs(ambient - expected)) < 1e-10


def test_fundamental_field_at_unit_quaternion():
    """At q = (1,0,0,0) the generator is (0,1,0,0) in ambient coordinates."""
    eps = -1.0  # q is the antipode of this chart's pole, chart coords 0
    bundle = build_scenario("hopf-s3")
    gen = bundle.contexts[0].action.generators[0]
    u = np.zeros(3)
    jac = _chart_jacobian_inverse(eps, u)
    ambient = jac @ gen.values(u)
    assert np.max(np.abs(ambient - np.array([0.0, 1.0, 0.0, 0.0]))) < 1e-12


def test_momentum_frame_convention_oracle():
    """Pre-build decomposition oracle: mu equals the signed frame coefficient.

    The covector is decomposed in the orthonormal frame (iq, jq, kq); the
    recorded index/sign constants reproduce the momentum for random
    covectors and random chart points.
    """
    bundle = build_scenario("hopf-s3")
    ctx = bundle.contexts[0]
    eps = -1.0
    for _ in range(100):
        u = _sample_sphere_chart(RNG, eps)
        cov = RNG.normal(0.0, 1.0, 3)
        coords = np.concatenate([u, cov])
        mu = momentum_map(ctx.ct, ctx.action, coords)[0]
        coeffs = hopf_frame_coefficients(eps, u, cov)
        assert abs(mu - MOMENTUM_FRAME_SIGN * coeffs[MOMENTUM_FRAME_INDEX]) < 1e-12


def test_hopf_level_point_designated_coefficient():
    bundle = build_scenario("hopf-s3")
    ctx = bundle.contexts[0]
    xi = 0.7
    for _ in range(10):
        q = ctx.sample_base(RNG)
        p = level_set_point(ctx.ct, ctx.action, xi, q, RNG.normal(0.0, 1.0, 3))
        coeffs = hopf_frame_coefficients(-1.0, p[:3], p[3:])
        assert abs(MOMENTUM_FRAME_SIGN * coeffs[MOMENTUM_FRAME_INDEX] - xi) < 1e-10


def test_hopf_regularity_at_levels():
    bundle = build_scenario("hopf-s3")
    ctx = bundle.contexts[0]
    for xi in (0.0, 0.7):
        for _ in range(10):
            p = ctx.sample_level_point(RNG, xi)
            assert regularity_rank(ctx.ct, ctx.action, p) == 1


def test_hopf_twisted_hamiltonian_at_scale():
    """i_{X~} omega = d_theta rho, theta(X) = 0 and group invariance over
    200 cotangent samples."""
    from lcs_reduce.reduction import twisted_hamiltonian_residuals

    bundle = build_scenario("hopf-s3")
    ctx = bundle.contexts[0]
    pts = [ctx.sample_cot_point(RNG) for _ in range(200)]
    qs = [ctx.sample_base(RNG) for _ in range(50)]
    res = twisted_hamiltonian_residuals(ctx.ct, ctx.action, ctx.lcs, ctx.theta,
                                        pts, qs)
    assert res["hamiltonian"] < 1e-8
    assert res["theta_pairing"] < 1e-10
    assert max(res["omega_invariance"], res["theta_invariance"]) < 1e-9


def test_hopf_theta_annihilates_generator():
    bundle = build_scenario("hopf-s3")
    for ctx in bundle.contexts:
        from lcs_reduce.forms import interior_product

        paired = interior_product(ctx.action.generators[0], ctx.theta)
        for _ in range(10):
            q = ctx.sample_base(RNG)
            assert abs(paired.coeff_values(q).get((), 0.0)) < 1e-12


def test_transition_maps_mutually_inverse():
    for name in ("hopf-s3", "twisted-cylinder"):
        bundle = build_scenario(name)
        for fwd, bwd, sampler in bundle.transition_pairs:
            for _ in range(10):
                u = sampler(RNG)
                assert np.max(np.abs(bwd.value(fwd.value(u)) - u)) < 1e-9
                assert np.max(np.abs(fwd.value(bwd.value(u)) - u)) < 1e-9


def test_s1xs3_structure_facts():
    bundle = build_scenario("s1xs3")
    ctx = bundle.contexts[0]
    xi = 0.7
    for _ in range(5):
        p = ctx.sample_level_point(RNG, xi)
        frame = foliation_frame(ctx.ct, ctx.action, ctx.theta, xi, p)
        assert frame.basis.dim == 1
        level_dim = ctx.ct.chart.dim - regularity_rank(ctx.ct, ctx.action, p)
        assert level_dim - frame.basis.dim == 6
        # the twist component of the generator is a unit vertical vector
        dual = theta_omega_dual(ctx.ct, ctx.theta).values(p)
        assert abs(np.linalg.norm(dual) - 1.0) < 1e-12


def test_s1xs3_connection_candidate_fails_invariance():
    bundle = build_scenario("s1xs3")
    ctx = bundle.contexts[0]
    section = ctx.section_for(0.7)
    qs = [ctx.sample_base(RNG) for _ in range(5)]
    res = hypothesis_residuals(section, ctx.action, ctx.theta, qs)
    assert res["membership"] < 1e-9       # it does sit on the level
    assert abs(res["lie"] - 0.7) < 1e-6   # but violates the invariance equation


def test_rxm_quotient_map_basics():
    b = quotient_diffeo_rxm(0.7)
    for _ in range(5):
        p = b.sample(RNG)
        p0 = p.copy()
        p0[0] = 0.0
        assert np.max(np.abs(b.quotient_map.value(p0) - p0[1:])) < 1e-12


def test_rxm_requires_nonzero_level():
    with pytest.raises(ValueError):
        quotient_diffeo_rxm(0.0)


def test_rxm_equivariance():
    b = quotient_diffeo_rxm(0.7)
    for _ in range(10):
        p = b.sample(RNG)
        s = float(RNG.uniform(-0.6, 0.6))
        moved = b.action_map(s).value(p)
        assert np.max(np.abs(b.quotient_map.value(moved)
                             - b.quotient_map.value(p))) < 1e-10


def test_rxm_invariant_form_descends():
    b = quotient_diffeo_rxm(0.7)
    pb = pullback(b.quotient_map, b.restricted_form)
    for _ in range(5):
        p = b.sample(RNG)
        assert coeff_residual(pb, b.invariant_form, p) < 1e-8
        s = float(RNG.uniform(-0.5, 0.5))
        act = pullback(b.action_map(s), b.invariant_form)
        assert coeff_residual(act, b.invariant_form, p) < 1e-8


def test_alpha_xi_from_f_recipe_on_cylinder():
    bundle = build_scenario("twisted-cylinder")
    ctx = bundle.contexts[0]
    xi = 0.7
    beta = form_from_coeffs(ctx.base, 1, {(0,): lambda c: c[2],
                                          (1,): lambda c: -xi})
    section = alpha_xi_from_f(beta, lambda c: xi * c[1], ctx.theta,
                              ctx.action, xi)
    qs = [ctx.sample_base(RNG) for _ in range(5)]
    res = hypothesis_residuals(section, ctx.action, ctx.theta, qs)
    assert max(res.values()) < 1e-9
    declared = ctx.section_for(xi)
    assert max(coeff_residual(section.form, declared.form, q) for q in qs) < 1e-12


def test_alpha_xi_from_f_constant_zero_level():
    bundle = build_scenario("flat-baseline")
    ctx = bundle.contexts[0]
    beta = form_from_coeffs(ctx.base, 1, {(0,): lambda c: 0.0})
    section = alpha_xi_from_f(beta, lambda c: 1.0, ctx.theta, ctx.action, 0.0)
    qs = [ctx.sample_base(RNG) for _ in range(3)]
    # f constant and xi = 0: alpha = beta (theta vanishes here)
    assert max(coeff_residual(section.form, beta, q) for q in qs) < 1e-15


def test_scenario_registry_names():
    names = scenario_names()
    for required in ("hopf-s3", "s1xs3", "rxm-quotient", "flat-baseline"):
        assert required in names
    with pytest.raises(KeyError):
        build_scenario("nonexistent")


def test_expected_facts_recorded():
    for name in ("flat-baseline", "twisted-cylinder", "hopf-s3", "s1xs3"):
        bundle = build_scenario(name)
        assert bundle.expected["rank"] == 1
        assert bundle.expected["foliation_dim"] == 1
    assert build_scenario("s1xs3").expected["reduced_dim"] == 6
    assert build_scenario("hopf-s3").expected["reduced_dim"] == 4
