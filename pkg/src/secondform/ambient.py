"""Ambient semi-Riemannian charts and their curvature data.

A chart packages a metric-component function that is evaluable in jet
arithmetic, together with optional closed-form Christoffel data used by the
geodesic integrator.  All model spaces (the six constant-curvature spaces and
products of Riemannian factors) are conformally flat in the chart used here,

    ḡ_ab = ε_a δ_ab / (1 + C̄⟨x,x⟩_ε/4)²,

so one construction covers them all.

Curvature convention (fixed once, asserted against space forms in the tests):

    R(X,Y)Z = ∇_{[X,Y]}Z − ∇_X∇_Y Z + ∇_Y∇_X Z,
    R_{ijkl} = ḡ(R(∂_i,∂_j)∂_k, ∂_l),

which makes the sectional curvature of an orthonormal plane K = R(X,Y,X,Y)
and gives space forms R_{ijkl} = C̄(ḡ_ik ḡ_jl − ḡ_il ḡ_jk).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    BadDirection,
    DegenerateMetric,
    InsufficientSmoothness,
    LeftDomain,
    OutOfDomain,
    StepFailure,
    UnsupportedSignature,
)
from .jets import Jet, compose, jet_space, jinv, seed_jets

__all__ = [
    "MetricChart",
    "CurvatureJet",
    "space_form",
    "product_chart",
    "flat_chart",
    "registry_chart",
    "chart_from_descriptor",
    "christoffel",
    "curvature_jet",
    "geodesic",
    "exp_map",
    "metric_value",
    "orthonormal_frame",
    "CHART_REGISTRY",
]

DEGENERACY_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class MetricChart:
    """One coordinate chart of an ambient semi-Riemannian manifold.

    `metric_fn` receives the coordinates as a list of jets and must return a
    (dim, dim) object array whose entries are jets or plain floats.  The
    optional closed-form fields accelerate geodesic integration; when absent,
    the generic metric-derived path is used.
    """

    dim: int
    index: int
    metric_fn: Callable
    domain_lo: np.ndarray
    domain_hi: np.ndarray
    descriptor: dict
    christoffel_jets_fn: Optional[Callable] = None
    geodesic_rhs: Optional[Callable] = None
    predicate_fn: Optional[Callable] = None
    curvature_const: Optional[float] = None
    product_factors: Optional[tuple] = None  # ((chart, slice), ...)
    is_flat: bool = False
    conjugate_radius: float = math.inf
    max_taylor_order: Optional[int] = None
    name: str = "chart"

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.all((x > self.domain_lo) & (x < self.domain_hi), axis=-1)
        if self.predicate_fn is not None:
            inside = inside & self.predicate_fn(x)
        return inside

    def __repr__(self):
        return f"MetricChart({self.name}, dim={self.dim}, index={self.index})"


@dataclass
class CurvatureJet:
    """Pointwise curvature data of an ambient chart.

    Index conventions: `riem[i,j,k,l]` = R_{ijkl} as in the module docstring,
    `nabla_riem[a,i,j,k,l]` = ∇_a R_{ijkl}, `nabla2_riem[a,b,...]` = ∇_a∇_b R,
    and likewise for the Ricci fields.  Arrays may carry trailing batch axes.
    """

    point: np.ndarray
    dim: int
    index: int
    order: int
    metric: np.ndarray
    metric_inv: np.ndarray
    gamma: np.ndarray
    riem: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray
    nabla_riem: Optional[np.ndarray] = None
    nabla_ricci: Optional[np.ndarray] = None
    grad_scalar: Optional[np.ndarray] = None
    nabla2_riem: Optional[np.ndarray] = None
    nabla2_ricci: Optional[np.ndarray] = None
    hess_scalar: Optional[np.ndarray] = None
    lap_ricci: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# jet-level tensor calculus
# ---------------------------------------------------------------------------


def lift_matrix(entries, like: Jet):
    d0, d1 = entries.shape
    out = np.empty((d0, d1), dtype=object)
    for i in range(d0):
        for j in range(d1):
            e = entries[i, j]
            out[i, j] = e if isinstance(e, Jet) else Jet.constant(like.space, np.broadcast_to(np.asarray(e, dtype=float), like.batch_shape).copy())
    return out


def metric_jets(chart: MetricChart, x_jets):
    """Evaluate the metric on jet coordinates, entries lifted to jets."""
    return lift_matrix(np.asarray(chart.metric_fn(x_jets), dtype=object), x_jets[0])


def christoffel_jets(g):
    """Levi-Civita coefficients Γ^k_{ij} as jets, one order below the metric."""
    d = g.shape[0]
    ginv = jinv(g)
    dg = [[[g[i, j].partial(k) for j in range(d)] for i in range(d)] for k in range(d)]
    gamma = np.empty((d, d, d), dtype=object)
    for k in range(d):
        for i in range(d):
            for j in range(i, d):
                acc = None
                for l in range(d):
                    term = ginv[k, l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j])
                    acc = term if acc is None else acc + term
                gamma[k, i, j] = acc * 0.5
                gamma[k, j, i] = gamma[k, i, j]
    return gamma


def riemann_lower_jets(g, gamma):
    """R_{ijkl} jets in the fixed sign convention (see module docstring)."""
    d = g.shape[0]
    dgamma = [
        [[[gamma[l, j, k].partial(i) for k in range(d)] for j in range(d)] for l in range(d)]
        for i in range(d)
    ]
    r_up = np.empty((d, d, d, d), dtype=object)  # R^l_{ijk}
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(d):
                for l in range(d):
                    acc = dgamma[j][l][i][k] - dgamma[i][l][j][k]
                    for s in range(d):
                        acc = acc - gamma[l, i, s] * gamma[s, j, k] + gamma[l, j, s] * gamma[s, i, k]
                    r_up[i, j, k, l] = acc
    lower = np.empty((d, d, d, d), dtype=object)
    zero = Jet.constant(g[0, 0].space, np.zeros(g[0, 0].batch_shape))
    for i in range(d):
        lower[i, i, :, :] = zero
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(d):
                for l in range(d):
                    acc = None
                    for s in range(d):
                        term = r_up[i, j, k, s] * g[s, l]
                        acc = term if acc is None else acc + term
                    lower[i, j, k, l] = acc
                    lower[j, i, k, l] = -acc
    return lower


def ricci_jets(ginv, riem):
    d = riem.shape[0]
    ric = np.empty((d, d), dtype=object)
    for j in range(d):
        for l in range(j, d):
            acc = None
            for i in range(d):
                for k in range(d):
                    term = ginv[i, k] * riem[i, j, k, l]
                    acc = term if acc is None else acc + term
            ric[j, l] = acc
            ric[l, j] = acc
    return ric


def _cov_deriv_tensor(t, gamma, d):
    """Covariant derivative of a fully covariant tensor given as nested object array."""
    rank = t.ndim
    out = np.empty((d,) + t.shape, dtype=object)
    for a in range(d):
        for idx in np.ndindex(*t.shape):
            acc = t[idx].partial(a)
            for slot in range(rank):
                for s in range(d):
                    rep = idx[:slot] + (s,) + idx[slot + 1 :]
                    acc = acc - gamma[s, a, idx[slot]] * t[rep]
            out[(a,) + idx] = acc
    return out


def _values(obj_arr):
    """Extract value parts of an object array of jets into a float array."""
    flat = obj_arr.ravel()
    first = np.asarray(flat[0].value)
    out = np.empty(obj_arr.shape + first.shape)
    for idx in np.ndindex(*obj_arr.shape):
        out[idx] = obj_arr[idx].value
    return out


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def metric_value(chart: MetricChart, x) -> np.ndarray:
    """Metric components at point(s) x; batched input gives shape (..., d, d)."""
    x = np.asarray(x, dtype=float)
    jets = seed_jets(x, chart.dim, 0)
    vals = _values(metric_jets(chart, jets))
    if x.ndim > 1:
        vals = np.moveaxis(np.moveaxis(vals, 0, -1), 0, -1)
    return vals


def _check_domain(chart: MetricChart, x):
    if not np.all(chart.contains(x)):
        raise OutOfDomain(f"point outside the domain of {chart.name}")


def _check_nondegenerate(gval, batched_ok=True):
    det = np.linalg.det(np.moveaxis(np.moveaxis(gval, 0, -1), 0, -1)) if gval.ndim > 2 else np.linalg.det(gval)
    if np.any(np.abs(det) <= DEGENERACY_FLOOR):
        raise DegenerateMetric(f"|det g| <= {DEGENERACY_FLOOR}")
    return det


def christoffel(chart: MetricChart, x) -> np.ndarray:
    """Levi-Civita coefficients Γ^k_{ij} at x (k first index)."""
    x = np.asarray(x, dtype=float)
    _check_domain(chart, x)
    jets = seed_jets(x, chart.dim, 1)
    g = metric_jets(chart, jets)
    _check_nondegenerate(_values(g))
    return _values(christoffel_jets(g))


def curvature_jet(chart: MetricChart, x, order: int = 2) -> CurvatureJet:
    """Curvature data at x to the requested derivative order (0, 1 or 2)."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if chart.max_taylor_order is not None and 2 + order > chart.max_taylor_order:
        raise InsufficientSmoothness(
            f"chart {chart.name} only supports Taylor order {chart.max_taylor_order}"
        )
    x = np.asarray(x, dtype=float)
    _check_domain(chart, x)
    d = chart.dim
    jets = seed_jets(x, d, 2 + order)
    g = metric_jets(chart, jets)
    gval = _values(g)
    _check_nondegenerate(gval)
    ginv = jinv(g)
    gamma = christoffel_jets(g)
    riem = riemann_lower_jets(g, gamma)
    ric = ricci_jets(ginv, riem)
    scal = None
    for j in range(d):
        for l in range(d):
            term = ginv[j, l] * ric[j, l]
            scal = term if scal is None else scal + term
    jet = CurvatureJet(
        point=x,
        dim=d,
        index=chart.index,
        order=order,
        metric=gval,
        metric_inv=_values(ginv),
        gamma=_values(gamma),
        riem=_values(riem),
        ricci=_values(ric),
        scalar=np.asarray(scal.value),
    )
    if order >= 1:
        nabla_r = _cov_deriv_tensor(riem, gamma, d)
        nabla_ric = _cov_deriv_tensor(ric, gamma, d)
        jet.nabla_riem = _values(nabla_r)
        jet.nabla_ricci = _values(nabla_ric)
        jet.grad_scalar = np.stack([np.asarray(scal.partial(i).value) for i in range(d)])
    if order >= 2:
        nabla2_r = _cov_deriv_tensor(nabla_r, gamma, d)
        nabla2_ric = _cov_deriv_tensor(nabla_ric, gamma, d)
        jet.nabla2_riem = _values(nabla2_r)
        jet.nabla2_ricci = _values(nabla2_ric)
        hess = np.empty((d, d), dtype=object)
        for i in range(d):
            for j in range(d):
                acc = scal.partial(i).partial(j)
                for s in range(d):
                    acc = acc - gamma[s, i, j] * scal.partial(s)
                hess[i, j] = acc
        jet.hess_scalar = _values(hess)
        ginv_val = jet.metric_inv
        jet.lap_ricci = np.einsum("ab,ab...->...", ginv_val, jet.nabla2_ricci) if x.ndim == 1 else np.einsum(
            "ab...,ab...->...", ginv_val, jet.nabla2_ricci
        )
    return jet


# ---------------------------------------------------------------------------
# conformally flat charts (space forms, perturbations) and products
# ---------------------------------------------------------------------------


def _signs(dim: int, index: int) -> np.ndarray:
    return np.array([-1.0] * index + [1.0] * (dim - index))


def _conformal_chart(dim, index, cbar, name, descriptor, bump=None):
    """Chart with ḡ = ε δ / (1 + C̄⟨x,x⟩_ε/4 )², optionally with a conformal bump.

    With σ = log of the conformal factor, Γ^k_ab = δ^k_a σ_b + δ^k_b σ_a −
    ε_a δ_ab ε_k σ_k, which the geodesic integrator consumes directly.
    """
    eps = _signs(dim, index)

    def sigma_and_grad(x):
        # returns (F or None, sigma, [σ_1..σ_d]); F kept for the metric fast path
        q = None
        for a in range(dim):
            term = x[a] * x[a] * eps[a]
            q = term if q is None else q + term
        denom = 1.0 + q * (cbar / 4.0)
        f = denom.reciprocal()
        grads = [x[a] * (-0.5 * cbar * eps[a]) * f for a in range(dim)]
        if bump is not None:
            s_extra, grads_extra = bump(x)
            grads = [grads[a] + grads_extra[a] for a in range(dim)]
            return f, s_extra, grads
        return f, None, grads

    def metric_fn(x):
        f, s_extra, _ = sigma_and_grad(x)
        conf = f * f if s_extra is None else (f * (s_extra).exp()) ** 2
        out = np.empty((dim, dim), dtype=object)
        zero = conf * 0.0
        for i in range(dim):
            for j in range(dim):
                out[i, j] = conf * eps[i] if i == j else zero
        return out

    def christoffel_fn(x):
        _, _, sg = sigma_and_grad(x)
        zero = sg[0] * 0.0
        gamma = np.empty((dim, dim, dim), dtype=object)
        for k in range(dim):
            for a in range(dim):
                for b in range(a, dim):
                    acc = zero
                    if k == a:
                        acc = acc + sg[b]
                    if k == b:
                        acc = acc + sg[a]
                    if a == b:
                        acc = acc - sg[k] * (eps[a] * eps[k])
                    gamma[k, a, b] = acc
                    gamma[k, b, a] = acc
        return gamma

    def rhs(x, v):
        _, _, sg = sigma_and_grad(x)
        sv = None
        vv = None
        for a in range(dim):
            t1 = sg[a] * v[a]
            t2 = v[a] * v[a] * eps[a]
            sv = t1 if sv is None else sv + t1
            vv = t2 if vv is None else vv + t2
        return [v[k] * sv * (-2.0) + sg[k] * vv * eps[k] for k in range(dim)]

    flat = cbar == 0.0 and bump is None

    def predicate(x):
        q = np.sum(eps * x * x, axis=-1)
        return 1.0 + cbar * q / 4.0 > 0.05

    if cbar > 0:
        half = math.sqrt((10 ** (11.0 / (2 * dim)) - 1.0) * 4.0 / (dim * cbar))
        conj = math.pi / math.sqrt(cbar)
        if index == 0:
            predicate = None  # 1 + C̄|x|²/4 >= 1 on the whole box
    elif cbar < 0:
        half = 0.98 * 2.0 / math.sqrt(dim * abs(cbar))
        conj = math.inf
    else:
        half, predicate, conj = 50.0, None, math.inf
    return MetricChart(
        dim=dim,
        index=index,
        metric_fn=metric_fn,
        domain_lo=-half * np.ones(dim),
        domain_hi=half * np.ones(dim),
        descriptor=descriptor,
        christoffel_jets_fn=christoffel_fn,
        geodesic_rhs=rhs,
        predicate_fn=predicate,
        curvature_const=cbar if bump is None else None,
        is_flat=flat,
        conjugate_radius=conj,
        name=name,
    )


def space_form(m_plus_1: int, cbar: float, index: int = 0) -> MetricChart:
    """Conformal chart of the constant-curvature space of dimension m+1."""
    if m_plus_1 < 2:
        raise ValueError("ambient dimension must be >= 2")
    if index not in (0, 1):
        raise UnsupportedSignature("only Riemannian (0) and Lorentzian (1) signatures")
    names = {
        (0, 1): "sphere",
        (0, 0): "euclidean",
        (0, -1): "hyperbolic",
        (1, 1): "de_sitter",
        (1, 0): "minkowski",
        (1, -1): "anti_de_sitter",
    }
    name = f"{names[(index, int(np.sign(cbar)))]}_{m_plus_1}d"
    desc = {"kind": "space_form", "dim": m_plus_1, "index": index, "Cbar": cbar}
    return _conformal_chart(m_plus_1, index, float(cbar), name, desc)


def flat_chart(dim: int, index: int = 0) -> MetricChart:
    """Flat chart of any dimension >= 1 (dim-1 factors are used in products)."""
    if dim >= 2:
        return space_form(dim, 0.0, index)
    if index != 0:
        raise UnsupportedSignature("a 1-dim factor must be Riemannian")
    return _conformal_chart(
        1, 0, 0.0, "euclidean_1d", {"kind": "space_form", "dim": 1, "index": 0, "Cbar": 0.0}
    )


def product_chart(a: MetricChart, b: MetricChart) -> MetricChart:
    """Riemannian product chart with block-diagonal metric."""
    if a.index != 0 or b.index != 0:
        raise UnsupportedSignature("product charts require Riemannian factors")
    dim = a.dim + b.dim
    sl_a, sl_b = slice(0, a.dim), slice(a.dim, dim)
    factors = []
    for chart, sl in ((a, sl_a), (b, sl_b)):
        if chart.product_factors is not None:
            for sub, sub_sl in chart.product_factors:
                factors.append((sub, slice(sub_sl.start + sl.start, sub_sl.stop + sl.start)))
        else:
            factors.append((chart, sl))
    factors = tuple(factors)

    def metric_fn(x):
        out = np.empty((dim, dim), dtype=object)
        zero = (x[0] * 0.0) if isinstance(x[0], Jet) else 0.0
        out[:, :] = zero
        for chart, sl in factors:
            block = np.asarray(chart.metric_fn(x[sl]), dtype=object)
            out[sl, sl] = block
        return out

    def christoffel_fn(x):
        gamma = np.empty((dim, dim, dim), dtype=object)
        zero = x[0] * 0.0
        gamma[:, :, :] = zero
        for chart, sl in factors:
            gamma[sl, sl, sl] = chart.christoffel_jets_fn(x[sl])
        return gamma

    def rhs(x, v):
        out = [None] * dim
        for chart, sl in factors:
            block = chart.geodesic_rhs(x[sl], v[sl])
            for i, k in enumerate(range(sl.start, sl.stop)):
                out[k] = block[i]
        return out

    ok_gamma = all(c.christoffel_jets_fn is not None for c, _ in factors)
    ok_rhs = all(c.geodesic_rhs is not None for c, _ in factors)
    preds = [(c.predicate_fn, sl) for c, sl in factors if c.predicate_fn is not None]

    def predicate(x):
        good = np.ones(x.shape[:-1], dtype=bool)
        for p, sl in preds:
            good = good & p(x[..., sl])
        return good

    return MetricChart(
        dim=dim,
        index=0,
        metric_fn=metric_fn,
        domain_lo=np.concatenate([a.domain_lo, b.domain_lo]),
        domain_hi=np.concatenate([a.domain_hi, b.domain_hi]),
        descriptor={"kind": "product", "factors": [a.descriptor, b.descriptor]},
        christoffel_jets_fn=christoffel_fn if ok_gamma else None,
        geodesic_rhs=rhs if ok_rhs else None,
        predicate_fn=predicate if preds else None,
        curvature_const=None,
        product_factors=factors,
        is_flat=a.is_flat and b.is_flat,
        conjugate_radius=min(a.conjugate_radius, b.conjugate_radius),
        name=f"{a.name}*{b.name}",
    )


def _bumpy_e3() -> MetricChart:
    """Flat 3-space with a small conformal Gaussian bump (a genuinely
    non-symmetric test metric: curvature and its derivatives all nonzero)."""
    amp = 0.05

    def bump(x):
        q = None
        for a in range(3):
            t = x[a] * x[a]
            q = t if q is None else q + t
        s = (q * -1.0).exp() * amp
        grads = [x[a] * (-2.0) * s for a in range(3)]
        return s, grads

    chart = _conformal_chart(3, 0, 0.0, "bumpy_e3", {"kind": "custom", "name": "bumpy_e3"}, bump=bump)
    return chart


CHART_REGISTRY = {
    "bumpy_e3": _bumpy_e3,
}


def registry_chart(name: str) -> MetricChart:
    try:
        return CHART_REGISTRY[name]()
    except KeyError:
        raise OutOfDomain(f"no registered custom chart named {name!r}") from None


def chart_from_descriptor(desc: dict) -> MetricChart:
    kind = desc.get("kind")
    if kind == "space_form":
        dim, cbar = int(desc["dim"]), float(desc["Cbar"])
        if dim == 1 and cbar == 0.0:
            return flat_chart(1)
        return space_form(dim, cbar, int(desc.get("index", 0)))
    if kind == "product":
        charts = [chart_from_descriptor(d) for d in desc["factors"]]
        out = charts[0]
        for c in charts[1:]:
            out = product_chart(out, c)
        return out
    if kind == "custom":
        return registry_chart(desc["name"])
    raise OutOfDomain(f"unknown chart kind {kind!r}")


# ---------------------------------------------------------------------------
# geodesics
# ---------------------------------------------------------------------------


def christoffel_on_jets(chart: MetricChart, x_jets):
    """Γ^k_{ab} evaluated at jet-valued coordinates.

    Falls back to composing the ambient Taylor expansion of Γ with the
    displacement when the chart has no closed form.
    """
    if chart.christoffel_jets_fn is not None:
        return chart.christoffel_jets_fn(x_jets)
    order = x_jets[0].space.order
    x0 = np.stack([np.asarray(j.value, dtype=float) for j in x_jets], axis=-1)
    amb = seed_jets(x0, chart.dim, order + 1)
    gamma_amb = christoffel_jets(metric_jets(chart, amb))
    disp = [x_jets[k] - x0[..., k] for k in range(chart.dim)]
    d = chart.dim
    out = np.empty((d, d, d), dtype=object)
    for k in range(d):
        for a in range(d):
            for b in range(a, d):
                out[k, a, b] = compose(gamma_amb[k, a, b].truncate(order), disp)
                out[k, b, a] = out[k, a, b]
    return out


def _geodesic_rhs(chart: MetricChart, x_jets, v_jets):
    if chart.geodesic_rhs is not None:
        return chart.geodesic_rhs(x_jets, v_jets)
    gamma = christoffel_on_jets(chart, x_jets)
    d = chart.dim
    acc = []
    for k in range(d):
        total = None
        for a in range(d):
            for b in range(a, d):
                term = gamma[k, a, b] * v_jets[a] * v_jets[b]
                if a != b:
                    term = term * 2.0
                total = term if total is None else total + term
        acc.append(-total)
    return acc


def exp_map(chart: MetricChart, x0_jets, w_jets, n_steps: int = 256, domain_checks: bool = True):
    """Endpoint of the geodesic with initial position x0 and velocity w at t=1.

    Works on jets (so parameter derivatives of sphere charts flow through the
    integrator) or on order-0 jets for plain points.  Classical RK4.
    """
    d = chart.dim
    x = list(x0_jets)
    v = list(w_jets)
    h = 1.0 / n_steps
    for step in range(n_steps):
        k1x, k1v = v, _geodesic_rhs(chart, x, v)
        x2 = [x[i] + k1x[i] * (h / 2) for i in range(d)]
        v2 = [v[i] + k1v[i] * (h / 2) for i in range(d)]
        k2x, k2v = v2, _geodesic_rhs(chart, x2, v2)
        x3 = [x[i] + k2x[i] * (h / 2) for i in range(d)]
        v3 = [v[i] + k2v[i] * (h / 2) for i in range(d)]
        k3x, k3v = v3, _geodesic_rhs(chart, x3, v3)
        x4 = [x[i] + k3x[i] * h for i in range(d)]
        v4 = [v[i] + k3v[i] * h for i in range(d)]
        k4x, k4v = v4, _geodesic_rhs(chart, x4, v4)
        x = [x[i] + (k1x[i] + (k2x[i] + k3x[i]) * 2.0 + k4x[i]) * (h / 6) for i in range(d)]
        v = [v[i] + (k1v[i] + (k2v[i] + k3v[i]) * 2.0 + k4v[i]) * (h / 6) for i in range(d)]
        if domain_checks and (step % 32 == 31 or step == n_steps - 1):
            pts = np.stack([np.asarray(j.value, dtype=float) for j in x], axis=-1)
            if not np.all(chart.contains(pts)):
                raise LeftDomain(f"geodesic left the domain of {chart.name}")
    return x, v


def geodesic(chart: MetricChart, n, v, r: float, n_steps: int = 1024, check: bool = True):
    """Point γ(r) of the unit-speed geodesic with γ(0)=n, γ'(0)=v."""
    n = np.asarray(n, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_domain(chart, n)
    g0 = metric_value(chart, n)
    speed2 = float(v @ g0 @ v)
    if abs(abs(speed2) - 1.0) > 1e-9:
        raise BadDirection(f"|g(v,v)| = {abs(speed2)} is not 1")
    if r < 0:
        raise ValueError("arclength must be nonnegative")
    if r == 0.0:
        return n.copy()
    if chart.is_flat:
        end = n + r * v
        _check_domain(chart, end)
        return end
    x0 = [Jet.constant(jet_space(1, 0), n[i]) for i in range(chart.dim)]
    w = [Jet.constant(jet_space(1, 0), r * v[i]) for i in range(chart.dim)]
    x, vel = exp_map(chart, x0, w, n_steps=n_steps)
    end = np.array([float(j.value) for j in x])
    if check:
        x2, _ = exp_map(chart, x0, w, n_steps=2 * n_steps)
        end2 = np.array([float(j.value) for j in x2])
        if np.max(np.abs(end - end2)) > 1e-9:
            raise StepFailure("halving estimate above 1e-9; step too coarse")
        end = end2
        gv = metric_value(chart, end)
        vel_arr = np.array([float(j.value) for j in vel]) / r
        if abs(abs(vel_arr @ gv @ vel_arr) - 1.0) > 1e-9:
            raise StepFailure("unit speed not preserved along geodesic")
    return end


# ---------------------------------------------------------------------------
# orthonormal frames
# ---------------------------------------------------------------------------


def orthonormal_frame(g: np.ndarray, e0: Optional[np.ndarray] = None) -> np.ndarray:
    """Rows of the result are g-orthonormal frame vectors (Riemannian g).

    When `e0` is given it becomes the 0th frame vector (it must be a unit
    vector); remaining directions are Gram–Schmidt completions of the chart
    basis, lowest index first.
    """
    d = g.shape[0]
    frame = []
    if e0 is not None:
        nrm2 = float(e0 @ g @ e0)
        if abs(nrm2 - 1.0) > 1e-9:
            raise BadDirection("e0 is not a unit vector")
        frame.append(np.asarray(e0, dtype=float))
    for i in range(d):
        if len(frame) == d:
            break
        w = np.zeros(d)
        w[i] = 1.0
        for f in frame:
            w = w - (f @ g @ w) * f
        nrm2 = float(w @ g @ w)
        if nrm2 < 1e-12:
            continue
        frame.append(w / math.sqrt(nrm2))
    if len(frame) != d:
        raise DegenerateMetric("could not complete an orthonormal frame")
    return np.array(frame)
