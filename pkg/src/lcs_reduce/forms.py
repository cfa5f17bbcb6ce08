"""Differential forms, vector fields and smooth maps on explicit charts.

Conventions, fixed once for the whole package:

* A chart is a box in R^n with named coordinates; all geometric objects
  are stored as coefficient *functions* over increasing multi-indices,
  each evaluable as a second-order jet at a chart point.
* ``dx^I(v_1, .., v_k) = det[(v_s)_{i_r}]_{r,s}`` (rows run over the
  index set I, columns over the argument vectors).
* The matrix of a 2-form is ``Omega[i, j] = omega(e_i, e_j)`` in the
  chart basis ordering, and the omega-dual of a covector t is the unique
  v with ``omega(v, .) = t``, i.e. the solution of ``Omega^T v = t``.
* The twisted differential is ``d_theta a = d a - theta ^ a`` and the
  twisted Lie derivative is ``L_X a - theta(X) a``.

Operations never repair a failed precondition; they raise a typed error
carrying the offending residual or pivot.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .jets import Jet2, JetError, const, variables
from .linalg import (
    DEFAULT_PIVOT_TOL,
    SubspaceBasis,
    check_finite,
    null_space,
    solve_linear,
)

__all__ = [
    "Chart",
    "ChartPoint",
    "ChartDomainError",
    "FormError",
    "DegenerateFormError",
    "Form",
    "VectorField",
    "SmoothMap",
    "LCSStructure",
    "form_from_coeffs",
    "zero_form",
    "function_form",
    "constant_one_form",
    "coordinate_differential",
    "identity_map",
    "closedness_residual",
    "form_sum",
    "scale_by_function",
    "wedge",
    "exterior_derivative",
    "interior_product",
    "pullback",
    "lie_derivative",
    "twisted_derivative",
    "twisted_lie_derivative",
    "pairing",
    "compose_jet",
    "compose_through",
    "coeff_func",
    "det_jet",
    "form_matrix",
    "form_determinant",
    "omega_dual_vector",
    "omega_dual_subspace",
    "conformal_rescale",
    "pushforward",
    "flow_map",
    "coeff_residual",
    "sup_coeff",
    "increasing_indices",
]

ScalarFunc = Callable[[Sequence[Jet2]], "Jet2 | float"]


class FormError(ValueError):
    pass


class ChartDomainError(FormError):
    def __init__(self, chart_id: str, coords):
        self.chart_id = chart_id
        self.coords = np.asarray(coords, dtype=float)
        super().__init__(f"point {self.coords} outside domain of chart {chart_id!r}")


class DegenerateFormError(FormError):
    def __init__(self, msg: str, residual: float):
        self.residual = residual
        super().__init__(f"{msg} (residual {residual:.3e})")


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class Chart:
    id: str
    dim: int
    box: tuple[tuple[float, float], ...] | None = None

    def contains(self, coords, slack: float = 1e-12) -> bool:
        p = np.asarray(coords, dtype=float)
        if p.shape != (self.dim,):
            return False
        if self.box is None:
            return True
        for x, (lo, hi) in zip(p, self.box):
            if lo is not None and x < lo - slack:
                return False
            if hi is not None and x > hi + slack:
                return False
        return True

    def require(self, coords):
        if not self.contains(coords):
            raise ChartDomainError(self.id, coords)
        return np.asarray(coords, dtype=float)


@dataclass(frozen=True)
class ChartPoint:
    chart: Chart
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", self.chart.require(self.coords))


def _same_chart(a: Chart, b: Chart):
    if a.dim != b.dim or a.id != b.id:
        raise FormError(f"chart mismatch: {a.id!r} (dim {a.dim}) vs {b.id!r} (dim {b.dim})")


# ---------------------------------------------------------------------------
# multi-index helpers


def increasing_indices(n: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(n), k))


def _merge_sign(i: tuple[int, ...], j: tuple[int, ...]):
    """Sign of sorting the concatenation i+j; None if the sets overlap."""
    if set(i) & set(j):
        return None, ()
    merged = i + j
    inversions = 0
    for a in range(len(merged)):
        for b in range(a + 1, len(merged)):
            if merged[a] > merged[b]:
                inversions += 1
    return (-1) ** inversions, tuple(sorted(merged))


def _insert_sign(m: int, i: tuple[int, ...]):
    """Sign of dx^m ^ dx^I relative to the sorted index; None if m in I."""
    if m in i:
        return None, ()
    below = sum(1 for x in i if x < m)
    return (-1) ** below, tuple(sorted(i + (m,)))


def _as_jet(x, n: int) -> Jet2:
    if isinstance(x, Jet2):
        return x
    return const(float(x), n)


# ---------------------------------------------------------------------------
# core containers


class Form:
    """Degree-k differential form; coefficients lazily evaluated as jets."""

    def __init__(self, chart: Chart, degree: int, jet_fn, name: str = ""):
        if not 0 <= degree <= chart.dim:
            raise FormError(f"degree {degree} invalid on a dim-{chart.dim} chart")
        self.chart = chart
        self.degree = degree
        self._jet_fn = jet_fn
        self.name = name
        self._memo: dict[bytes, dict] = {}

    def coeff_jets(self, point) -> dict[tuple[int, ...], Jet2]:
        p = np.asarray(point, dtype=float)
        key = p.tobytes()
        hit = self._memo.get(key)
        if hit is None:
            hit = self._jet_fn(p)
            if len(self._memo) >= 16:
                self._memo.clear()
            self._memo[key] = hit
        return hit

    def coeff_values(self, point) -> dict[tuple[int, ...], float]:
        return {i: j.value for i, j in self.coeff_jets(point).items()}

    def __call__(self, point, *vectors) -> float:
        if len(vectors) != self.degree:
            raise FormError(f"degree-{self.degree} form applied to {len(vectors)} vectors")
        if self.degree == 0:
            return self.coeff_jets(point).get((), const(0.0, self.chart.dim)).value
        v = np.column_stack([check_finite(np.asarray(w, float), "vector") for w in vectors])
        total = 0.0
        for idx, jet in self.coeff_jets(point).items():
            total += jet.value * float(np.linalg.det(v[list(idx), :]))
        return total

    def __repr__(self):
        return f"Form(deg={self.degree}, chart={self.chart.id!r}, name={self.name!r})"


class VectorField:
    def __init__(self, chart: Chart, comps: Sequence[ScalarFunc], name: str = ""):
        if len(comps) != chart.dim:
            raise FormError(f"{len(comps)} components on a dim-{chart.dim} chart")
        self.chart = chart
        self.comps = list(comps)
        self.name = name

    def jets(self, point) -> list[Jet2]:
        vs = variables(np.asarray(point, dtype=float))
        return [_as_jet(c(vs), self.chart.dim) for c in self.comps]

    def values(self, point) -> np.ndarray:
        return check_finite(np.array([j.value for j in self.jets(point)]), "vector field value")

    def __repr__(self):
        return f"VectorField(chart={self.chart.id!r}, name={self.name!r})"


class SmoothMap:
    """Map between charts given by component functions, optionally invertible."""

    def __init__(self, source: Chart, target: Chart, comps: Sequence[ScalarFunc],
                 inverse: "SmoothMap | None" = None, name: str = ""):
        if len(comps) != target.dim:
            raise FormError(f"{len(comps)} components for a dim-{target.dim} target")
        self.source = source
        self.target = target
        self.comps = list(comps)
        self.inverse = inverse
        self.name = name

    def jets(self, point) -> list[Jet2]:
        vs = variables(np.asarray(point, dtype=float))
        return [_as_jet(c(vs), self.source.dim) for c in self.comps]

    def value(self, point) -> np.ndarray:
        return check_finite(np.array([j.value for j in self.jets(point)]), "map value")

    def jacobian(self, point) -> np.ndarray:
        js = self.jets(point)
        return np.array([j.grad for j in js])

    def compose(self, inner: "SmoothMap", name: str = "") -> "SmoothMap":
        """self after inner (self o inner)."""
        _same_chart(self.source, inner.target)

        def make(t):
            def comp(coords):
                mid = [_as_jet(g(coords), inner.source.dim) for g in inner.comps]
                return self.comps[t](mid)

            return comp

        inv = None
        if self.inverse is not None and inner.inverse is not None:
            inv = inner.inverse.compose(self.inverse)
        return SmoothMap(inner.source, self.target, [make(t) for t in range(self.target.dim)],
                         inverse=inv, name=name or f"{self.name}o{inner.name}")


def identity_map(chart: Chart) -> SmoothMap:
    comps = [(lambda i: (lambda c: c[i]))(i) for i in range(chart.dim)]
    m = SmoothMap(chart, chart, comps, name="id")
    m.inverse = m
    return m


# ---------------------------------------------------------------------------
# constructors


def form_from_coeffs(chart: Chart, degree: int,
                     coeffs: dict[tuple[int, ...], ScalarFunc], name: str = "") -> Form:
    fixed = {tuple(i): f for i, f in coeffs.items()}
    for i in fixed:
        if len(i) != degree or list(i) != sorted(set(i)):
            raise FormError(f"index {i} is not an increasing {degree}-index")
        if any(x < 0 or x >= chart.dim for x in i):
            raise FormError(f"index {i} out of range on a dim-{chart.dim} chart")

    def jet_fn(p):
        vs = variables(p)
        return {i: _as_jet(f(vs), chart.dim) for i, f in fixed.items()}

    return Form(chart, degree, jet_fn, name)


def zero_form(chart: Chart, degree: int) -> Form:
    return Form(chart, degree, lambda p: {}, name="0")


def function_form(chart: Chart, f: ScalarFunc, name: str = "") -> Form:
    return form_from_coeffs(chart, 0, {(): f}, name)


def constant_one_form(chart: Chart, covector, name: str = "") -> Form:
    cv = np.asarray(covector, dtype=float)
    coeffs = {(i,): (lambda c, v=cv[i]: v) for i in range(chart.dim) if cv[i] != 0.0}
    return form_from_coeffs(chart, 1, coeffs, name)


def coordinate_differential(chart: Chart, i: int) -> Form:
    return form_from_coeffs(chart, 1, {(i,): lambda c: 1.0}, name=f"dx{i}")


# ---------------------------------------------------------------------------
# algebraic operations


def form_sum(terms: Sequence[Form], weights: Sequence[float] | None = None, name: str = "") -> Form:
    if not terms:
        raise FormError("empty form sum")
    chart, degree = terms[0].chart, terms[0].degree
    for t in terms[1:]:
        _same_chart(chart, t.chart)
        if t.degree != degree:
            raise FormError("summing forms of different degree")
    w = [1.0] * len(terms) if weights is None else [float(x) for x in weights]

    def jet_fn(p):
        out: dict[tuple, Jet2] = {}
        for t, c in zip(terms, w):
            for i, jet in t.coeff_jets(p).items():
                out[i] = out[i] + c * jet if i in out else c * jet
        return out

    return Form(chart, degree, jet_fn, name)


def scale_by_function(a: Form, f: ScalarFunc, name: str = "") -> Form:
    def jet_fn(p):
        fj = _as_jet(f(variables(p)), a.chart.dim)
        return {i: fj * jet for i, jet in a.coeff_jets(p).items()}

    return Form(a.chart, a.degree, jet_fn, name)


def wedge(a: Form, b: Form, name: str = "") -> Form:
    _same_chart(a.chart, b.chart)
    degree = a.degree + b.degree
    if degree > a.chart.dim:
        raise FormError(f"wedge degree {degree} exceeds chart dimension {a.chart.dim}")

    def jet_fn(p):
        aj, bj = a.coeff_jets(p), b.coeff_jets(p)
        out: dict[tuple, Jet2] = {}
        for i, ci in aj.items():
            for j, cj in bj.items():
                s, k = _merge_sign(i, j)
                if s is None:
                    continue
                term = s * (ci * cj) if s != 1 else ci * cj
                out[k] = out[k] + term if k in out else term
        return out

    return Form(a.chart, degree, jet_fn, name or f"({a.name}^{b.name})")


def exterior_derivative(a: Form, name: str = "") -> Form:
    if a.degree == a.chart.dim:
        raise FormError(f"exterior derivative of a top-degree ({a.degree}) form")
    n = a.chart.dim

    def jet_fn(p):
        out: dict[tuple, Jet2] = {}
        for i, c in a.coeff_jets(p).items():
            for m in range(n):
                s, k = _insert_sign(m, i)
                if s is None:
                    continue
                term = c.partial(m)
                if s != 1:
                    term = -term
                out[k] = out[k] + term if k in out else term
        return out

    return Form(a.chart, a.degree + 1, jet_fn, name or f"d({a.name})")


def interior_product(x: VectorField, a: Form, name: str = "") -> Form:
    _same_chart(x.chart, a.chart)
    if a.degree == 0:
        raise FormError("interior product with a 0-form")

    def jet_fn(p):
        xj = x.jets(p)
        out: dict[tuple, Jet2] = {}
        for i, c in a.coeff_jets(p).items():
            for pos, m in enumerate(i):
                rest = i[:pos] + i[pos + 1 :]
                term = xj[m] * c
                if pos % 2:
                    term = -term
                out[rest] = out[rest] + term if rest in out else term
        return out

    return Form(a.chart, a.degree - 1, jet_fn, name or f"i_{x.name}({a.name})")


def compose_through(jet_at: Callable[[np.ndarray], Jet2], coords):
    """Evaluate a jet-valued function of the numeric point, then chain it
    into the incoming coordinates.

    Works in both evaluation modes: jet inputs get the full chain rule,
    float inputs get the plain value.
    """
    jets_in = [c for c in coords if isinstance(c, Jet2)]
    if jets_in:
        n = jets_in[0].n
        inner = [c if isinstance(c, Jet2) else const(float(c), n) for c in coords]
        p = np.array([c.value for c in inner])
        return compose_jet(jet_at(p), inner)
    p = np.array([float(c) for c in coords])
    return jet_at(p).value


def coeff_func(a: Form, idx) -> ScalarFunc:
    """A coefficient of a form as a standalone scalar function."""
    key = tuple(idx)

    def jet_at(p):
        j = a.coeff_jets(p).get(key)
        return j if j is not None else const(0.0, a.chart.dim)

    return lambda coords: compose_through(jet_at, coords)


def pairing(x: VectorField, theta: Form) -> ScalarFunc:
    """theta(X) as a scalar function (theta a 1-form)."""
    if theta.degree != 1:
        raise FormError("pairing requires a 1-form")
    _same_chart(x.chart, theta.chart)
    return coeff_func(interior_product(x, theta), ())


def compose_jet(outer: Jet2, inner: Sequence[Jet2]) -> Jet2:
    """Chain rule: jet of ``outer`` (in target coords) through ``inner`` maps."""
    if len(inner) != outer.n:
        raise JetError(f"composition: outer expects {outer.n} coords, got {len(inner)}")
    n = inner[0].n
    order = min([outer.order] + [j.order for j in inner])
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    if order >= 1:
        og = outer._grad
        for t, ij in enumerate(inner):
            if og[t] != 0.0:
                grad = grad + og[t] * ij._grad
        if order >= 2:
            oh = outer._hess
            for t, ij in enumerate(inner):
                if og[t] != 0.0:
                    hess = hess + og[t] * ij._hess
            inner_grads = np.array([j._grad for j in inner])
            hess = hess + inner_grads.T @ oh @ inner_grads
    return Jet2(outer.value, grad, hess, order)


def det_jet(entries: list[list[Jet2]]):
    """Determinant by cofactor expansion, generic over jet entries."""
    k = len(entries)
    if k == 0:
        return 1.0
    if k == 1:
        return entries[0][0]
    if k == 2:
        return entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0]
    total = None
    for c in range(k):
        minor = [[entries[r][cc] for cc in range(k) if cc != c] for r in range(1, k)]
        term = entries[0][c] * det_jet(minor)
        if c % 2:
            term = -term
        total = term if total is None else total + term
    return total


def pullback(f: SmoothMap, a: Form, name: str = "") -> Form:
    """(f^* a)_p(v_1..v_k) = a_{f(p)}(df v_1, .., df v_k)."""
    _same_chart(f.target, a.chart)
    if a.degree > f.source.dim:
        raise FormError(f"pullback of a degree-{a.degree} form to a dim-{f.source.dim} chart")
    k = a.degree
    src_idx = increasing_indices(f.source.dim, k)

    def jet_fn(p):
        inner = f.jets(p)
        q = np.array([j.value for j in inner])
        if not f.target.contains(q):
            raise ChartDomainError(f.target.id, q)
        outer = a.coeff_jets(q)
        if k == 0:
            return {(): compose_jet(c, inner) for _, c in outer.items()}
        # jets of the Jacobian entries d f^t / d x^s
        dfj = [[inner[t].partial(s) for s in range(f.source.dim)]
               for t in range(f.target.dim)]
        out: dict[tuple, Jet2] = {}
        for jdx, c in outer.items():
            cj = compose_jet(c, inner)
            for idx in src_idx:
                minor = [[dfj[t][s] for s in idx] for t in jdx]
                term = cj * det_jet(minor)
                out[idx] = out[idx] + term if idx in out else term
        return out

    return Form(f.source, k, jet_fn, name or f"{f.name}*({a.name})")


def lie_derivative(x: VectorField, a: Form, name: str = "") -> Form:
    """Cartan formula d i_X + i_X d (degenerate degrees use the defined term)."""
    _same_chart(x.chart, a.chart)
    if a.degree == 0:
        return interior_product(x, exterior_derivative(a), name or f"L_{x.name}({a.name})")
    if a.degree == a.chart.dim:
        return exterior_derivative(interior_product(x, a), name or f"L_{x.name}({a.name})")
    return form_sum(
        [exterior_derivative(interior_product(x, a)),
         interior_product(x, exterior_derivative(a))],
        name=name or f"L_{x.name}({a.name})",
    )


def closedness_residual(theta: Form, points) -> float:
    d = exterior_derivative(theta)
    return max(sup_coeff(d, p) for p in points)


def twisted_derivative(theta: Form, a: Form, check_points=None,
                       tol: float = 1e-9, name: str = "") -> Form:
    """d a - theta ^ a.  theta must be a closed 1-form."""
    if theta.degree != 1:
        raise FormError("twist requires a 1-form")
    _same_chart(theta.chart, a.chart)
    if check_points is not None:
        res = closedness_residual(theta, check_points)
        if res > tol:
            raise DegenerateFormError("twisting form is not closed", res)
    if a.degree == a.chart.dim:
        raise FormError(f"twisted derivative of a top-degree ({a.degree}) form")
    return form_sum([exterior_derivative(a), wedge(theta, a)], [1.0, -1.0],
                    name=name or f"d_theta({a.name})")


def twisted_lie_derivative(x: VectorField, theta: Form, a: Form, name: str = "") -> Form:
    """L_X a - theta(X) a."""
    lie = lie_derivative(x, a)
    correction = scale_by_function(a, pairing(x, theta))
    return form_sum([lie, correction], [1.0, -1.0], name=name or f"L^theta_{x.name}({a.name})")


# ---------------------------------------------------------------------------
# pointwise duals and structures


def form_matrix(omega: Form, point) -> np.ndarray:
    """Omega[i, j] = omega(e_i, e_j) at the point."""
    if omega.degree != 2:
        raise FormError("form_matrix requires a 2-form")
    n = omega.chart.dim
    m = np.zeros((n, n))
    for (i, j), jet in omega.coeff_jets(point).items():
        m[i, j] = jet.value
        m[j, i] = -jet.value
    return m


def form_determinant(omega: Form, point) -> float:
    return float(np.linalg.det(form_matrix(omega, point)))


def omega_dual_vector(omega_matrix: np.ndarray, theta_covector: np.ndarray,
                      det_tol: float = 1e-8) -> np.ndarray:
    """The unique v with omega(v, .) = theta at a point."""
    om = check_finite(omega_matrix)
    det = abs(float(np.linalg.det(om)))
    if det <= det_tol:
        raise DegenerateFormError("degenerate 2-form in omega-dual", det)
    th = check_finite(np.asarray(theta_covector, dtype=float), "covector")
    if not th.any():
        return np.zeros_like(th)
    return solve_linear(om.T, th)


def omega_dual_subspace(omega_matrix: np.ndarray, w: SubspaceBasis,
                        det_tol: float = 1e-8, tol: float = DEFAULT_PIVOT_TOL) -> SubspaceBasis:
    """{v : omega(v, W) = 0} as the null space of the stacked pairings."""
    om = check_finite(omega_matrix)
    det = abs(float(np.linalg.det(om)))
    if det <= det_tol:
        raise DegenerateFormError("degenerate 2-form in omega-dual", det)
    if w.dim == 0:
        n = om.shape[0]
        return SubspaceBasis(n, list(np.eye(n)))
    return null_space(w.matrix() @ om, tol)


@dataclass
class LCSStructure:
    """Nondegenerate 2-form with a closed Lee 1-form satisfying d omega = theta ^ omega."""

    omega: Form
    theta: Form
    name: str = ""

    def __post_init__(self):
        _same_chart(self.omega.chart, self.theta.chart)
        if self.omega.degree != 2 or self.theta.degree != 1:
            raise FormError("LCS structure needs a 2-form and a 1-form")

    @property
    def chart(self) -> Chart:
        return self.omega.chart

    def validity_residuals(self, points) -> dict[str, float]:
        dtheta = exterior_derivative(self.theta)
        # on a 2-dimensional chart both sides of d omega = theta ^ omega
        # are 3-forms, hence identically zero
        defect = None
        if self.omega.degree < self.chart.dim:
            defect = form_sum([exterior_derivative(self.omega),
                               wedge(self.theta, self.omega)], [1.0, -1.0])
        out = {"dtheta": 0.0, "lcs": 0.0, "min_abs_det": float("inf")}
        for p in points:
            out["dtheta"] = max(out["dtheta"], sup_coeff(dtheta, p))
            if defect is not None:
                out["lcs"] = max(out["lcs"], sup_coeff(defect, p))
            out["min_abs_det"] = min(out["min_abs_det"], abs(form_determinant(self.omega, p)))
        return out

    def validate(self, points, tol: float = 1e-9, det_tol: float = 1e-8) -> "LCSStructure":
        r = self.validity_residuals(points)
        if r["dtheta"] > tol:
            raise DegenerateFormError("Lee form is not closed", r["dtheta"])
        if r["lcs"] > tol:
            raise DegenerateFormError("d omega != theta ^ omega", r["lcs"])
        if r["min_abs_det"] <= det_tol:
            raise DegenerateFormError("2-form degenerate on samples", r["min_abs_det"])
        return self


def conformal_rescale(s: LCSStructure, f: ScalarFunc, name: str = "") -> LCSStructure:
    """(omega, theta) -> (e^f omega, theta + df)."""
    chart = s.chart

    def ef(coords):
        return _as_jet(f(coords), chart.dim).exp()

    new_omega = scale_by_function(s.omega, ef, name=f"e^f*{s.omega.name}")
    df = exterior_derivative(function_form(chart, f, "f"))
    new_theta = form_sum([s.theta, df], name=f"{s.theta.name}+df")
    return LCSStructure(new_omega, new_theta, name=name or f"rescale({s.name})")


# ---------------------------------------------------------------------------
# maps acting on fields


def pushforward(f: SmoothMap, x: VectorField, name: str = "") -> VectorField:
    """(f_* X)(y) = df(X) at f^{-1}(y); requires a registered inverse."""
    _same_chart(f.source, x.chart)
    if f.inverse is None:
        raise FormError("pushforward requires an invertible map")

    def make(t):
        def comp(coords):
            xj = [_as_jet(g(coords), f.target.dim) for g in f.inverse.comps]
            xval = np.array([j.value for j in xj])
            fj = f.jets(xval)
            vj = x.jets(xval)
            term = None
            for s in range(f.source.dim):
                piece = fj[t].partial(s) * vj[s]
                term = piece if term is None else term + piece
            return compose_jet(term, xj)

        return comp

    return VectorField(f.target, [make(t) for t in range(f.target.dim)],
                       name=name or f"{f.name}_*({x.name})")


def flow_map(x: VectorField, time: float, steps: int = 10, name: str = "",
             _build_inverse: bool = True) -> SmoothMap:
    """Time-t flow of X by the classical 4-stage RK scheme (fixed step)."""
    chart = x.chart
    n = chart.dim
    h = time / steps

    def flow_comps(coords):
        state = list(coords)
        for _ in range(steps):
            k1 = [_as_jet(c(state), n) for c in x.comps]
            s2 = [state[i] + (h / 2.0) * k1[i] for i in range(n)]
            k2 = [_as_jet(c(s2), n) for c in x.comps]
            s3 = [state[i] + (h / 2.0) * k2[i] for i in range(n)]
            k3 = [_as_jet(c(s3), n) for c in x.comps]
            s4 = [state[i] + h * k3[i] for i in range(n)]
            k4 = [_as_jet(c(s4), n) for c in x.comps]
            state = [state[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                     for i in range(n)]
        return state

    def make(i):
        return lambda coords: flow_comps(coords)[i]

    fwd = SmoothMap(chart, chart, [make(i) for i in range(n)], name=name or f"flow_{x.name}")
    if not _build_inverse:
        return fwd
    if time != 0.0:
        bwd = flow_map(x, -time, steps, _build_inverse=False, name=f"flow_{x.name}_back")
        fwd.inverse = bwd
        bwd.inverse = fwd
    else:
        fwd.inverse = fwd
    return fwd


# ---------------------------------------------------------------------------
# residual helpers


def sup_coeff(a: Form, point) -> float:
    vals = a.coeff_values(point)
    return max((abs(v) for v in vals.values()), default=0.0)


def coeff_residual(a: Form, b: Form, point) -> float:
    """Max absolute coefficient difference at a point."""
    av, bv = a.coeff_values(point), b.coeff_values(point)
    keys = set(av) | set(bv)
    return max((abs(av.get(k, 0.0) - bv.get(k, 0.0)) for k in keys), default=0.0)
