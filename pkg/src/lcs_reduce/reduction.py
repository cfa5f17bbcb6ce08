"""Momentum maps, level sets, the reduction foliation and quotient maps.

All group actions here are given by explicit generator fields per Lie
algebra basis element (linear in the algebra coefficient) plus sampled
group-element diffeomorphisms for invariance oracles.  Quotients are
never constructed abstractly: a scenario supplies an explicit quotient
chart with the projection p and a section s, and every statement is
checked by finite evaluation on samples.

Conventions: mu(alpha)(a) = -alpha(X_a), which is linear on fibers; the
shift by a level section alpha_xi is (q, c) -> (q, c - alpha_xi(q)); the
zero-level quotient map sends (q, c) to (p(q), (dp dp^T)^{-1} dp c),
whose covector part is lift-independent exactly on the zero level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cotangent import (
    CotangentChart,
    base_pullback,
    cotangent_lift_map,
    lift_fundamental_field,
    tautological_form,
    theta_omega_dual,
)
from .forms import (
    Chart,
    Form,
    FormError,
    LCSStructure,
    SmoothMap,
    VectorField,
    coeff_func,
    coeff_residual,
    compose_through,
    exterior_derivative,
    form_matrix,
    form_sum,
    function_form,
    interior_product,
    lie_derivative,
    omega_dual_subspace,
    pullback,
    pushforward,
    sup_coeff,
    twisted_derivative,
)
from .jets import Jet2, const, eval_jet, variables
from .linalg import (
    DEFAULT_PIVOT_TOL,
    SubspaceBasis,
    null_space,
    rank,
    solve_linear,
)

__all__ = [
    "PreconditionError",
    "LieAlgebraSpec",
    "ActionSpec",
    "LevelSection",
    "QuotientData",
    "FoliationFrame",
    "momentum_map",
    "momentum_functions",
    "momentum_jacobian",
    "regularity_rank",
    "level_set_point",
    "level_tangent_basis",
    "foliation_frame",
    "foliation_frame_bruteforce",
    "omega_annihilator_closed_form",
    "omega_annihilator_numeric",
    "shift_map",
    "phi0_map",
    "quotient_covector",
    "hypothesis_residuals",
    "descend_curvature",
    "shift_identity_residuals",
    "shift_transport_residual",
    "twisted_hamiltonian_residuals",
    "curvature_residuals",
    "phi0_identity_residuals",
    "phi0_well_definedness",
    "composite_embedding_residuals",
    "image_annihilator_residuals",
    "surjectivity_witness_residuals",
]


class PreconditionError(ValueError):
    def __init__(self, msg: str, residual: float):
        self.residual = residual
        super().__init__(f"{msg} (residual {residual:.3e})")


@dataclass(frozen=True)
class LieAlgebraSpec:
    """Finite-dimensional algebra with a declared coadjoint stabilizer.

    Catalog groups are abelian, where the stabilizer of every value is
    the whole algebra; declaring the sub-basis keeps non-abelian
    extensions possible without coadjoint machinery.
    """

    dim: int
    labels: tuple[str, ...] = ()
    abelian: bool = True
    stabilizer: tuple[tuple[float, ...], ...] | None = None

    def stabilizer_basis(self, xi) -> list[np.ndarray]:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if self.abelian or not np.any(xi):
            return [np.eye(self.dim)[k] for k in range(self.dim)]
        if self.stabilizer is None:
            raise PreconditionError("non-abelian algebra without declared stabilizer", 0.0)
        basis = [np.asarray(v, dtype=float) for v in self.stabilizer]
        if basis and rank(np.array(basis)) != len(basis):
            raise PreconditionError("declared stabilizer sub-basis is dependent", 0.0)
        return basis


@dataclass
class ActionSpec:
    algebra: LieAlgebraSpec
    base_chart: Chart
    generators: list[VectorField]
    group_elements: list[SmoothMap] = field(default_factory=list)

    def __post_init__(self):
        if len(self.generators) != self.algebra.dim:
            raise FormError("one generator field per algebra basis element required")

    def fundamental_field(self, a) -> VectorField:
        """X_a for algebra coefficients a (linear in a)."""
        a = np.atleast_1d(np.asarray(a, dtype=float))

        def make(i):
            def comp(coords):
                total = None
                for k, gen in enumerate(self.generators):
                    if a[k] == 0.0:
                        continue
                    piece = a[k] * gen.comps[i](list(coords))
                    total = piece if total is None else total + piece
                return total if total is not None else 0.0

            return comp

        return VectorField(self.base_chart, [make(i) for i in range(self.base_chart.dim)],
                           name="X_a")


@dataclass
class LevelSection:
    """A 1-form on the base whose values sit on a momentum level.

    Violations of its hypotheses are reported by ``hypothesis_residuals``,
    never repaired.
    """

    form: Form
    xi: np.ndarray

    def __post_init__(self):
        self.xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if self.form.degree != 1:
            raise FormError("level section must be a 1-form")

    def covector(self, q) -> np.ndarray:
        vals = self.form.coeff_values(q)
        n = self.form.chart.dim
        return np.array([vals.get((i,), 0.0) for i in range(n)])


@dataclass
class QuotientData:
    """Explicit quotient chart: projection p, section s with p o s = id."""

    chart: Chart
    projection: SmoothMap
    section: SmoothMap
    theta_quotient: Form | None = None

    def validate(self, samples, tol: float = 1e-9) -> "QuotientData":
        for qh in samples:
            back = self.projection.value(self.section.value(qh))
            res = float(np.max(np.abs(back - np.asarray(qh, dtype=float))))
            if res > tol:
                raise PreconditionError("section is not a right inverse of p", res)
        return self


@dataclass
class FoliationFrame:
    point: np.ndarray
    basis: SubspaceBasis
    dmu_residual: float


# ---------------------------------------------------------------------------
# momentum map


def momentum_functions(c: CotangentChart, action: ActionSpec):
    """Components of mu as scalar functions on the cotangent chart."""
    n = c.n

    def make(gen):
        def f(coords):
            total = None
            for i in range(n):
                piece = coords[n + i] * gen.comps[i](list(coords)[:n])
                total = piece if total is None else total + piece
            return -total if total is not None else 0.0

        return f

    return [make(gen) for gen in action.generators]


def momentum_map(c: CotangentChart, action: ActionSpec, coords) -> np.ndarray:
    q, cv = c.q_part(coords), c.c_part(coords)
    return np.array([-float(cv @ gen.values(q)) for gen in action.generators])


def momentum_jacobian(c: CotangentChart, action: ActionSpec, coords) -> np.ndarray:
    fns = momentum_functions(c, action)
    return np.array([eval_jet(f, coords).grad for f in fns])


def regularity_rank(c: CotangentChart, action: ActionSpec, coords,
                    tol: float = DEFAULT_PIVOT_TOL, xi=None,
                    level_tol: float = 1e-9) -> int:
    """Rank of d mu at the point; with ``xi`` given, the point must sit
    on that level to ``level_tol``."""
    if xi is not None:
        mu = momentum_map(c, action, coords)
        off = float(np.max(np.abs(mu - np.atleast_1d(np.asarray(xi, dtype=float)))))
        if off > level_tol:
            raise PreconditionError("sample is off the requested level set", off)
    return rank(momentum_jacobian(c, action, coords), tol)


def level_set_point(c: CotangentChart, action: ActionSpec, xi, q, seed_covector) -> np.ndarray:
    """Project a seed covector onto the xi-level fiber over q.

    Minimal Euclidean-norm correction; exact because mu is fiber-affine.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    q = np.asarray(q, dtype=float)
    c0 = np.asarray(seed_covector, dtype=float)
    m = np.array([gen.values(q) for gen in action.generators])
    if rank(m) != action.algebra.dim:
        raise PreconditionError("generator fields dependent at base point",
                                float(action.algebra.dim - rank(m)))
    lam = solve_linear(m @ m.T, -xi - m @ c0)
    return np.concatenate([q, c0 + m.T @ lam])


def level_tangent_basis(c: CotangentChart, action: ActionSpec, coords,
                        tol: float = DEFAULT_PIVOT_TOL) -> SubspaceBasis:
    """Tangent space of the momentum level set: the kernel of d mu."""
    return null_space(momentum_jacobian(c, action, coords), tol)


# ---------------------------------------------------------------------------
# foliation


def _lifted_generators(c: CotangentChart, action: ActionSpec) -> list[VectorField]:
    return [lift_fundamental_field(c, gen).lifted for gen in action.generators]


def foliation_frame(c: CotangentChart, action: ActionSpec, theta_base: Form, xi,
                    coords, dmu_tol: float = 1e-9) -> FoliationFrame:
    """Closed-form frame {X~_a + xi(a) theta-dual : a in the stabilizer}."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    coords = np.asarray(coords, dtype=float)
    lifted = _lifted_generators(c, action)
    dual = theta_omega_dual(c, theta_base).values(coords)
    dmu = momentum_jacobian(c, action, coords)
    vectors = []
    worst = 0.0
    for a in action.algebra.stabilizer_basis(xi):
        v = sum(a[k] * lifted[k].values(coords) for k in range(action.algebra.dim))
        v = v + float(xi @ a) * dual
        vectors.append(v)
        worst = max(worst, float(np.max(np.abs(dmu @ v), initial=0.0)))
    basis = SubspaceBasis(c.chart.dim, vectors)
    if worst > dmu_tol:
        raise PreconditionError("frame vector leaves the level set tangent space", worst)
    return FoliationFrame(point=coords, basis=basis, dmu_residual=worst)


def foliation_frame_bruteforce(c: CotangentChart, action: ActionSpec,
                               omega: Form, coords) -> SubspaceBasis:
    """T mu^-1(xi) intersected with its omega-dual, from raw linear algebra."""
    tangent = level_tangent_basis(c, action, coords)
    om = form_matrix(omega, coords)
    dual = omega_dual_subspace(om, tangent)
    return _intersect(tangent, dual)


def _intersect(b1: SubspaceBasis, b2: SubspaceBasis) -> SubspaceBasis:
    if b1.dim == 0 or b2.dim == 0:
        return SubspaceBasis(b1.ambient_dim, [])
    m = np.hstack([b1.matrix().T, -b2.matrix().T])
    combos = null_space(m)
    vecs = [b1.matrix().T @ v[: b1.dim] for v in combos.vectors]
    return SubspaceBasis(b1.ambient_dim, vecs)


def omega_annihilator_closed_form(c: CotangentChart, action: ActionSpec,
                                  theta_base: Form, xi, coords) -> SubspaceBasis:
    """(T mu^-1(xi))^omega as the span {X~_a + xi(a) theta-dual : a in g}."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    coords = np.asarray(coords, dtype=float)
    lifted = _lifted_generators(c, action)
    dual = theta_omega_dual(c, theta_base).values(coords)
    vectors = [lifted[k].values(coords) + xi[k] * dual
               for k in range(action.algebra.dim)]
    return SubspaceBasis(c.chart.dim, vectors)


def omega_annihilator_numeric(c: CotangentChart, action: ActionSpec,
                              omega: Form, coords) -> SubspaceBasis:
    tangent = level_tangent_basis(c, action, coords)
    return omega_dual_subspace(form_matrix(omega, coords), tangent)


# ---------------------------------------------------------------------------
# shift map and quotient map


def shift_map(c: CotangentChart, section: LevelSection) -> SmoothMap:
    """Fiber translation (q, c) -> (q, c - alpha_xi(q)); a diffeomorphism."""
    return _fiber_translation(c, section.form, -1.0)


def _fiber_translation(c: CotangentChart, alpha: Form, sign: float,
                       _build_inverse: bool = True) -> SmoothMap:
    n = c.n

    def q_comp(i):
        return lambda coords: coords[i]

    def c_comp(i):
        alpha_i = coeff_func(alpha, (i,))

        def comp(coords):
            return coords[n + i] + sign * alpha_i(list(coords)[:n])

        return comp

    comps = [q_comp(i) for i in range(n)] + [c_comp(i) for i in range(n)]
    m = SmoothMap(c.chart, c.chart, comps, name="shift")
    if _build_inverse:
        m.inverse = _fiber_translation(c, alpha, -sign, _build_inverse=False)
        m.inverse.inverse = m
    return m


def phi0_map(c: CotangentChart, c_hat: CotangentChart, p_map: SmoothMap) -> SmoothMap:
    """Zero-level quotient map (q, c) -> (p(q), (dp dp^T)^{-1} dp c).

    Off the zero level this is one particular smooth extension; on it,
    the covector output does not depend on the choice of lifts.
    """
    if p_map.source.id != c.base.id or p_map.target.id != c_hat.base.id:
        raise FormError("projection endpoints do not match the cotangent charts")
    n, m = c.n, c_hat.n
    memo: dict[bytes, list[Jet2]] = {}

    def gamma_jets(point) -> list[Jet2]:
        p = np.asarray(point, dtype=float)
        key = p.tobytes()
        hit = memo.get(key)
        if hit is not None:
            return hit
        vs = variables(p)
        pj = [_as_jet(g(vs[:n]), 2 * n) for g in p_map.comps]
        dp = [[pj[t].partial(s) for s in range(n)] for t in range(m)]
        gram = [[_dot(dp[t], dp[u]) for u in range(m)] for t in range(m)]
        w = [_dot(dp[u], vs[n:]) for u in range(m)]
        gam = _solve_jets(gram, w)
        if len(memo) >= 32:
            memo.clear()
        memo[key] = gam
        return gam

    def q_comp(t):
        return lambda coords: p_map.comps[t](list(coords)[:n])

    def c_comp(t):
        return lambda coords: compose_through(lambda p: gamma_jets(p)[t], coords)

    comps = [q_comp(t) for t in range(m)] + [c_comp(t) for t in range(m)]
    return SmoothMap(c.chart, c_hat.chart, comps, name="phi0")


def quotient_covector(c: CotangentChart, qd: QuotientData, action: ActionSpec,
                      coords, mu_tol: float = 1e-9,
                      lift_shift: np.ndarray | None = None):
    """Numeric quotient covector with an explicit, shiftable lift choice.

    Returns (target point, covector).  ``lift_shift`` adds a combination
    of orbit directions to every lift; on the zero level the output must
    not change.
    """
    coords = np.asarray(coords, dtype=float)
    mu = momentum_map(c, action, coords)
    off = float(np.max(np.abs(mu)))
    if off > mu_tol:
        raise PreconditionError("point is off the zero level set", off)
    q, cv = c.q_part(coords), c.c_part(coords)
    dp = qd.projection.jacobian(q)
    m = dp.shape[0]
    qh = qd.projection.value(q)
    gam = np.zeros(m)
    for t in range(m):
        e = np.zeros(m)
        e[t] = 1.0
        v = dp.T @ solve_linear(dp @ dp.T, e)
        if lift_shift is not None:
            v = v + lift_shift
        gam[t] = float(cv @ v)
    return qh, gam


# ---------------------------------------------------------------------------
# hypothesis and identity residuals


def hypothesis_residuals(section: LevelSection, action: ActionSpec,
                         theta_base: Form, base_points) -> dict[str, float]:
    """Membership |alpha(X_a) + xi(a)| and |L_{X_a} alpha - xi(a) theta|."""
    membership = 0.0
    lie_res = 0.0
    for a in action.algebra.stabilizer_basis(section.xi):
        xa = action.fundamental_field(a)
        xia = float(section.xi @ a)
        paired = interior_product(xa, section.form)
        defect = form_sum([lie_derivative(xa, section.form), theta_base], [1.0, -xia])
        for q in base_points:
            membership = max(membership, abs(paired.coeff_values(q).get((), 0.0) + xia))
            lie_res = max(lie_res, sup_coeff(defect, q))
    return {"membership": membership, "lie": lie_res}


def descend_curvature(section: LevelSection, theta_base: Form,
                      qd: QuotientData) -> Form | None:
    """The quotient 2-form beta with p^* beta = d_theta alpha, via the section.

    On a 1-dimensional quotient every 2-form vanishes; ``None`` stands
    for that zero form (d_theta alpha must then vanish, which the
    descent residual still verifies).
    """
    if qd.chart.dim < 2:
        return None
    d_alpha = twisted_derivative(theta_base, section.form)
    return pullback(qd.section, d_alpha, name="beta_xi")


def shift_identity_residuals(c: CotangentChart, section: LevelSection,
                             lcs: LCSStructure, theta_base: Form,
                             points) -> dict[str, float]:
    """Residuals of the four shift identities at cotangent-chart points:

    S* theta~ = theta~;  S* eta = eta - pi* alpha;
    S* omega = omega - pi* d_theta alpha;  S_* theta-dual = theta-dual.
    """
    s = shift_map(c, section)
    eta = tautological_form(c)
    theta_tilde = lcs.theta
    omega = lcs.omega
    dual_field = theta_omega_dual(c, theta_base)

    pb_theta = pullback(s, theta_tilde)
    pb_eta = pullback(s, eta)
    rhs_eta = form_sum([eta, base_pullback(c, section.form)], [1.0, -1.0])
    pb_omega = pullback(s, omega)
    d_alpha = twisted_derivative(theta_base, section.form)
    rhs_omega = form_sum([omega, base_pullback(c, d_alpha)], [1.0, -1.0])
    pushed_dual = pushforward(s, dual_field)

    out = {"theta": 0.0, "eta": 0.0, "omega": 0.0, "theta_dual": 0.0}
    for x in points:
        x = np.asarray(x, dtype=float)
        out["theta"] = max(out["theta"], coeff_residual(pb_theta, theta_tilde, x))
        out["eta"] = max(out["eta"], coeff_residual(pb_eta, rhs_eta, x))
        out["omega"] = max(out["omega"], coeff_residual(pb_omega, rhs_omega, x))
        y = s.value(x)
        diff = pushed_dual.values(y) - dual_field.values(y)
        out["theta_dual"] = max(out["theta_dual"], float(np.max(np.abs(diff))))
    return out


def shift_transport_residual(c: CotangentChart, section: LevelSection,
                               action: ActionSpec, theta_base: Form,
                               points) -> float:
    """Residual of S_* X~_a = X~_a - xi(a) theta-dual over the stabilizer."""
    s = shift_map(c, section)
    dual_field = theta_omega_dual(c, theta_base)
    lifted = _lifted_generators(c, action)
    worst = 0.0
    for a in action.algebra.stabilizer_basis(section.xi):
        xa_tilde = _combine_fields(c.chart, lifted, a)
        pushed = pushforward(s, xa_tilde)
        xia = float(section.xi @ a)
        for x in points:
            y = s.value(np.asarray(x, dtype=float))
            lhs = pushed.values(y)
            rhs = xa_tilde.values(y) - xia * dual_field.values(y)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _combine_fields(chart: Chart, fields: list[VectorField], a) -> VectorField:
    a = np.atleast_1d(np.asarray(a, dtype=float))

    def make(i):
        def comp(coords):
            total = None
            for k, f in enumerate(fields):
                if a[k] == 0.0:
                    continue
                piece = a[k] * f.comps[i](list(coords))
                total = piece if total is None else total + piece
            return total if total is not None else 0.0

        return comp

    return VectorField(chart, [make(i) for i in range(chart.dim)], name="combo")


def twisted_hamiltonian_residuals(c: CotangentChart, action: ActionSpec,
                                  lcs: LCSStructure, theta_base: Form,
                                  points, base_points) -> dict[str, float]:
    """i_{X~_a} omega = d_theta rho_a, theta(X_a) = 0, and group invariance."""
    n = c.n
    mom_fns = momentum_functions(c, action)
    out = {"hamiltonian": 0.0, "theta_pairing": 0.0, "omega_invariance": 0.0,
           "theta_invariance": 0.0}
    for k, gen in enumerate(action.generators):
        lifted = lift_fundamental_field(c, gen).lifted
        contraction = interior_product(lifted, lcs.omega)
        rho = function_form(c.chart, mom_fns[k], name=f"rho_{k}")
        d_rho = twisted_derivative(lcs.theta, rho)
        defect = form_sum([contraction, d_rho], [1.0, -1.0])
        paired = interior_product(gen, theta_base)
        for x in points:
            out["hamiltonian"] = max(out["hamiltonian"], sup_coeff(defect, x))
        for q in base_points:
            out["theta_pairing"] = max(out["theta_pairing"],
                                       abs(paired.coeff_values(q).get((), 0.0)))
    from .cotangent import cotangent_lift_map
    for g in action.group_elements:
        lifted_g = cotangent_lift_map(c, g)
        pb_omega = pullback(lifted_g, lcs.omega)
        pb_theta = pullback(lifted_g, lcs.theta)
        for x in points:
            out["omega_invariance"] = max(out["omega_invariance"],
                                          coeff_residual(pb_omega, lcs.omega, x))
            out["theta_invariance"] = max(out["theta_invariance"],
                                          coeff_residual(pb_theta, lcs.theta, x))
    return out


# ---------------------------------------------------------------------------
# quotient identities


def curvature_residuals(section: LevelSection, theta_base: Form, action: ActionSpec,
                        qd: QuotientData, base_points, quotient_points) -> dict[str, float]:
    """beta = s*(d_theta alpha): checks p* beta = d_theta alpha,
    d_theta~ beta = 0 on the quotient, and i_{X_a} d_theta alpha = 0."""
    d_alpha = twisted_derivative(theta_base, section.form)
    beta = descend_curvature(section, theta_base, qd)
    out = {"descent": 0.0, "quotient_closed": 0.0, "orbit_contraction": 0.0}
    if beta is None:
        for q in base_points:
            out["descent"] = max(out["descent"], sup_coeff(d_alpha, q))
    else:
        pb = pullback(qd.projection, beta)
        for q in base_points:
            out["descent"] = max(out["descent"], coeff_residual(pb, d_alpha, q))
        if beta.degree < qd.chart.dim:
            if qd.theta_quotient is not None:
                closed = twisted_derivative(qd.theta_quotient, beta)
            else:
                closed = exterior_derivative(beta)
            for qh in quotient_points:
                out["quotient_closed"] = max(out["quotient_closed"],
                                             sup_coeff(closed, qh))
    for a in action.algebra.stabilizer_basis(section.xi):
        xa = action.fundamental_field(a)
        contracted = interior_product(xa, d_alpha)
        for q in base_points:
            out["orbit_contraction"] = max(out["orbit_contraction"],
                                           sup_coeff(contracted, q))
    return out


def phi0_identity_residuals(c: CotangentChart, c_hat: CotangentChart,
                            qd: QuotientData, theta_base: Form,
                            points) -> dict[str, float]:
    """phi0* eta' = eta and phi0* theta~' = theta~ at zero-level points.

    The eta identity holds for all ambient directions exactly on the zero
    level; the theta~ identity holds identically (it only uses
    pi' o phi0 = p o pi).
    """
    phi0 = phi0_map(c, c_hat, qd.projection)
    eta = tautological_form(c)
    eta_hat = tautological_form(c_hat)
    pb_eta = pullback(phi0, eta_hat)
    out = {"eta": 0.0, "theta": 0.0}
    theta_pair = None
    if qd.theta_quotient is not None:
        theta_hat = base_pullback(c_hat, qd.theta_quotient)
        theta_tilde = base_pullback(c, theta_base)
        theta_pair = (pullback(phi0, theta_hat), theta_tilde)
    for x in points:
        x = np.asarray(x, dtype=float)
        out["eta"] = max(out["eta"], coeff_residual(pb_eta, eta, x))
        if theta_pair is not None:
            out["theta"] = max(out["theta"], coeff_residual(*theta_pair, x))
    return out


def phi0_well_definedness(c: CotangentChart, qd: QuotientData, action: ActionSpec,
                          points, rng) -> float:
    """Output change under a shifted lift choice; zero on the zero level."""
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=float)
        q = c.q_part(x)
        shift = np.zeros(c.n)
        for gen in action.generators:
            shift = shift + rng.normal(0.0, 1.0) * gen.values(q)
        _, g0 = quotient_covector(c, qd, action, x)
        _, g1 = quotient_covector(c, qd, action, x, lift_shift=shift)
        worst = max(worst, float(np.max(np.abs(g0 - g1), initial=0.0)))
    return worst


def composite_embedding_residuals(c: CotangentChart, c_hat: CotangentChart,
                                  qd: QuotientData, section: LevelSection,
                                  lcs: LCSStructure, lcs_hat: LCSStructure,
                                  action: ActionSpec, theta_base: Form,
                                  points) -> dict[str, float]:
    """The composed pullback identities of the embedding:

    (phi0 o S)^* (omega' + B) = omega on level-tangent pairs, and
    (phi0 o S)^* theta~' = theta~ on all coordinate directions.
    """
    s = shift_map(c, section)
    phi0 = phi0_map(c, c_hat, qd.projection)
    comp = phi0.compose(s, name="phi")
    beta = descend_curvature(section, theta_base, qd)
    if beta is None:
        target = lcs_hat.omega
    else:
        b_corr = base_pullback(c_hat, beta)
        target = form_sum([lcs_hat.omega, b_corr], name="omega'+B")
    pb_two = pullback(comp, target)
    pb_theta = pullback(comp, lcs_hat.theta)
    out = {"omega": 0.0, "theta": 0.0}
    for x in points:
        x = np.asarray(x, dtype=float)
        frame = level_tangent_basis(c, action, x).vectors
        for i in range(len(frame)):
            for j in range(i + 1, len(frame)):
                lhs = pb_two(x, frame[i], frame[j])
                rhs = lcs.omega(x, frame[i], frame[j])
                out["omega"] = max(out["omega"], abs(lhs - rhs))
        out["theta"] = max(out["theta"], coeff_residual(pb_theta, lcs.theta, x))
    return out


def image_annihilator_residuals(c: CotangentChart, c_hat: CotangentChart,
                                qd: QuotientData, section: LevelSection,
                                action: ActionSpec, points) -> float:
    """Every image covector annihilates the projected orbit directions."""
    s = shift_map(c, section)
    phi0 = phi0_map(c, c_hat, qd.projection)
    comp = phi0.compose(s, name="phi")
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=float)
        z = comp.value(x)
        gam = z[c_hat.n :]
        q = c.q_part(x)
        dp = qd.projection.jacobian(q)
        for gen in action.generators:
            worst = max(worst, abs(float(gam @ (dp @ gen.values(q)))))
    return worst


def surjectivity_witness_residuals(c: CotangentChart, c_hat: CotangentChart,
                                   qd: QuotientData, section: LevelSection,
                                   action: ActionSpec, quotient_covector_samples) -> dict[str, float]:
    """alpha = p* eta_hat + alpha_xi(q) lands on the xi-level and hits the
    annihilator covector through the embedding."""
    s = shift_map(c, section)
    phi0 = phi0_map(c, c_hat, qd.projection)
    comp = phi0.compose(s, name="phi")
    out = {"level": 0.0, "roundtrip": 0.0}
    for qh, eta_hat in quotient_covector_samples:
        q = qd.section.value(np.asarray(qh, dtype=float))
        dp = qd.projection.jacobian(q)
        alpha = dp.T @ np.asarray(eta_hat, dtype=float) + section.covector(q)
        x = np.concatenate([q, alpha])
        mu = momentum_map(c, action, x)
        out["level"] = max(out["level"], float(np.max(np.abs(mu - section.xi))))
        z = comp.value(x)
        out["roundtrip"] = max(out["roundtrip"],
                               float(np.max(np.abs(z[c_hat.n :] - np.asarray(eta_hat)))))
    return out


# ---------------------------------------------------------------------------
# jet-level linear algebra helpers


def _as_jet(x, n: int) -> Jet2:
    if isinstance(x, Jet2):
        return x
    return const(float(x), n)


def _dot(row: list[Jet2], col: list[Jet2]) -> Jet2:
    total = None
    for a, b in zip(row, col):
        piece = a * b
        total = piece if total is None else total + piece
    return total


def _solve_jets(a: list[list[Jet2]], b: list[Jet2]) -> list[Jet2]:
    """Gaussian elimination with partial pivoting, generic over jets."""
    m = len(a)
    a = [row[:] for row in a]
    b = b[:]
    for c in range(m):
        p = max(range(c, m), key=lambda r: abs(a[r][c].value))
        if abs(a[p][c].value) < 1e-13:
            raise PreconditionError("singular jet system", abs(a[p][c].value))
        if p != c:
            a[c], a[p] = a[p], a[c]
            b[c], b[p] = b[p], b[c]
        for r in range(c + 1, m):
            f = a[r][c] / a[c][c]
            for cc in range(c, m):
                a[r][cc] = a[r][cc] - f * a[c][cc]
            b[r] = b[r] - f * b[c]
    out: list[Jet2] = [None] * m  # type: ignore[list-item]
    for r in range(m - 1, -1, -1):
        acc = b[r]
        for cc in range(r + 1, m):
            acc = acc - a[r][cc] * out[cc]
        out[r] = acc / a[r][r]
    return out
