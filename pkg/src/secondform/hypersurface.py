"""Immersed hypersurface patches and their classical invariants.

The pipeline evaluates the immersion map in jet arithmetic, so first/second
fundamental forms, the shape operator and their parameter derivatives come
out exact to roundoff.  Conventions:

    A(V)   = −∇̄_V U                    (shape operator),
    II(V,W) = α g(A V, W) = α ḡ(∇̄_V W, U),   α = ḡ(U,U) = ±1,
    III(V,W) = g(A V, A W),
    H = (α/m) tr A.

The second fundamental form is computed both ways (through ∇̄U and through
∇̄∂∂); their agreement is asserted at 1e−9 on every call, which catches sign
and index errors in one stroke.

The default normal orientation picks U so that tr A > 0 where that is
decidable (on ovaloids and geodesic spheres this selects the inward normal);
surfaces with tr A ≈ 0 everywhere (minimal surfaces, the Clifford torus) keep
the raw cofactor orientation.  An explicit ±1 on the immersion overrides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations_with_replacement
from typing import Callable, Optional

import numpy as np

from . import ambient as amb
from .ambient import MetricChart, christoffel_jets, metric_jets, riemann_lower_jets
from .errors import (
    BadParameters,
    DegenerateImmersion,
    DegenerateInducedMetric,
    GeometryError,
    NullNormal,
    OutOfDomain,
)
from .jets import Jet, compose, jdet, jdot, jinv, jmatvec, seed_jets

__all__ = [
    "Immersion",
    "SurfacePointData",
    "surface_point",
    "gauss_codazzi_residual",
    "standard_immersion",
    "immersion_from_descriptor",
    "reparametrized",
    "flipped",
    "validate_immersion",
]

RANK_FLOOR = 1e-10
ORIENTATION_TIE = 1e-9


@dataclass(frozen=True, eq=False)
class Immersion:
    """A parametrized hypersurface patch u ↦ x in an ambient chart.

    `map_fn` maps a list of m parameter jets to a list of dim ambient-chart
    jets; it must be evaluable to total derivative order 4.

    On patches where tr A changes sign (possible only with indefinite II),
    the auto orientation rule is evaluated per point; pass an explicit ±1
    orientation there to keep one continuous normal field.
    """

    ambient: MetricChart
    param_dim: int
    map_fn: Callable
    param_lo: np.ndarray
    param_hi: np.ndarray
    orientation: int = 0  # 0: auto (tr A > 0 when decidable), else ±1
    descriptor: Optional[dict] = None
    grid_hint: tuple = ()  # per-axis "gl" or "per", used by quadrature builders

    def contains(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.all((u >= self.param_lo - 1e-12) & (u <= self.param_hi + 1e-12), axis=-1)

    def __repr__(self):
        name = (self.descriptor or {}).get("kind", "immersion")
        return f"Immersion({name}, m={self.param_dim}, ambient={self.ambient.name})"


@dataclass
class SurfacePointData:
    """Classical per-point data; arrays gain a leading batch axis on grids."""

    u: np.ndarray
    x: np.ndarray
    tangent: np.ndarray  # (..., m, dim)
    normal: np.ndarray  # (..., dim)
    alpha: np.ndarray
    first: np.ndarray  # g_ij
    second: np.ndarray  # II_ij
    third: np.ndarray  # III_ij
    shape: np.ndarray  # A^i_j  (row upper index)
    mean: np.ndarray
    detA: np.ndarray
    lam: np.ndarray  # principal curvatures, ascending
    epsilon: np.ndarray  # signs of a g-orthonormal frame, ascending
    _bundle: Optional["_SurfaceJets"] = field(default=None, repr=False)


@dataclass
class _SurfaceJets:
    """Jet-level intermediates shared by the II-geometry layer."""

    imm: Immersion
    order: int
    batched: bool
    u_jets: list
    x: list
    t: np.ndarray  # (m, dim) object
    gbar: np.ndarray
    gbar_inv: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    ddx: np.ndarray  # (m, m, dim) object: ∇̄_{∂_i}∂_j
    U: np.ndarray  # (dim,) object
    alpha: np.ndarray
    II: np.ndarray
    A: np.ndarray
    detA: Jet
    H: Jet


def _vals(obj_arr, batched):
    vals = amb._values(np.asarray(obj_arr, dtype=object))
    if batched:
        vals = np.moveaxis(vals, -1, 0)
    return vals


def frame_jets(imm: Immersion, u_jets, check_two_routes: bool = True) -> _SurfaceJets:
    """Run the fundamental-form pipeline on caller-supplied parameter jets."""
    m, d = imm.param_dim, imm.ambient.dim
    x = list(imm.map_fn(u_jets))
    space = u_jets[0].space
    x = [xi if isinstance(xi, Jet) else Jet.constant(space, xi) for xi in x]
    batched = len(x[0].batch_shape) > 0

    t = np.empty((m, d), dtype=object)
    for i in range(m):
        for a in range(d):
            t[i, a] = x[a].partial(i)

    # the metric and ambient Christoffels only ever multiply derivatives of x,
    # so evaluating them at reduced jet order loses nothing and saves a lot
    order = space.order
    x_metric = [xa.truncate(max(order - 1, 0)) for xa in x]
    x_gamma = [xa.truncate(max(order - 2, 0)) for xa in x]
    gbar = metric_jets(imm.ambient, x_metric)
    gbar_inv = jinv(gbar)

    g = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(i, m):
            g[i, j] = jdot(gbar, t[i], t[j])
            g[j, i] = g[i, j]

    gval = _vals(g, batched)
    g_scale = np.maximum(np.max(np.abs(gval), axis=(-2, -1)), 1e-300)
    if np.any(np.abs(np.linalg.det(gval)) <= 1e-12 * g_scale**m):
        raise DegenerateInducedMetric("induced metric degenerate at a sampled point")
    tval = _vals(t, batched)
    sv = np.linalg.svd(np.swapaxes(tval, -1, -2), compute_uv=False)
    if np.any(sv[..., -1] <= RANK_FLOOR):
        raise DegenerateImmersion("immersion Jacobian lost rank")
    ginv = jinv(g)

    # covariant normal via the generalized cross product (metric-free), raised
    n_cov = _generalized_cross(t, d)
    N = jmatvec(gbar_inv, n_cov)
    nn = jdot(gbar, N, N)
    nn_val = np.asarray(nn.value)
    scale = sum(np.asarray((N[a] * N[a]).value) for a in range(d))
    if np.any(np.abs(nn_val) <= 1e-12 * np.maximum(scale, 1e-300)):
        raise NullNormal("normal direction is null for the ambient metric")
    alpha = np.sign(nn_val)
    U = np.empty(d, dtype=object)
    inv_len = nn.sqrt_abs().reciprocal()
    for a in range(d):
        U[a] = N[a] * inv_len

    gamma_bar = amb.christoffel_on_jets(imm.ambient, x_gamma)
    ddx = np.empty((m, m, d), dtype=object)
    for i in range(m):
        for j in range(i, m):
            for k in range(d):
                acc = t[j, k].partial(i)
                for a in range(d):
                    for b in range(d):
                        acc = acc + gamma_bar[k, a, b] * t[i, a] * t[j, b]
                ddx[i, j, k] = acc
                ddx[j, i, k] = acc

    II = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(i, m):
            II[i, j] = jdot(gbar, ddx[i, j], U) * alpha
            II[j, i] = II[i, j]

    # orientation: flip U (and II) if tr A would be negative where decidable
    A = _shape_from_ii(ginv, II, alpha, m)
    trA = None
    for i in range(m):
        trA = A[i, i] if trA is None else trA + A[i, i]
    if imm.orientation == 0:
        flip = np.asarray(trA.value) < -ORIENTATION_TIE
    else:
        flip = np.broadcast_to(imm.orientation < 0, np.shape(np.asarray(trA.value)))
    if np.any(flip):
        sgn = np.where(flip, -1.0, 1.0)
        for a in range(d):
            U[a] = U[a] * sgn
        for i in range(m):
            for j in range(m):
                II[i, j] = II[i, j] * sgn
        A = _shape_from_ii(ginv, II, alpha, m)
        trA = None
        for i in range(m):
            trA = A[i, i] if trA is None else trA + A[i, i]

    detA = jdet(A)
    H = trA * (alpha / m)

    bundle = _SurfaceJets(
        imm=imm,
        order=space.order,
        batched=batched,
        u_jets=u_jets,
        x=x,
        t=t,
        gbar=gbar,
        gbar_inv=gbar_inv,
        g=g,
        ginv=ginv,
        ddx=ddx,
        U=U,
        alpha=alpha,
        II=II,
        A=A,
        detA=detA,
        H=H,
    )
    if check_two_routes:
        _check_shape_operator_two_routes(bundle, gamma_bar)
    return bundle


def _generalized_cross(t, d):
    """Covector n with n(v) = det[v; t_1; …; t_m], via cofactor expansion."""
    m = t.shape[0]
    if m != d - 1:
        raise DegenerateImmersion("hypersurface requires param_dim = ambient dim − 1")
    n = np.empty(d, dtype=object)
    cols = list(range(d))
    for a in range(d):
        rest = [c for c in cols if c != a]
        minor = np.empty((m, m), dtype=object)
        for i in range(m):
            for j, c in enumerate(rest):
                minor[i, j] = t[i, c]
        det = jdet(minor) if m >= 1 else 1.0
        n[a] = det if a % 2 == 0 else -det
    return n


def _shape_from_ii(ginv, II, alpha, m):
    A = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(m):
            acc = None
            for k in range(m):
                term = ginv[i, k] * II[k, j]
                acc = term if acc is None else acc + term
            A[i, j] = acc * alpha
    return A


def _check_shape_operator_two_routes(b: _SurfaceJets, gamma_bar):
    """II via ∇̄∂∂ against A = −∇̄U, asserted to 1e−9."""
    m, d = b.imm.param_dim, b.imm.ambient.dim
    av_direct = np.empty((m, d), dtype=object)  # ambient components of A(∂_i)
    for i in range(m):
        for k in range(d):
            acc = -b.U[k].partial(i)
            for a in range(d):
                for bb in range(d):
                    acc = acc - gamma_bar[k, a, bb] * b.t[i, a] * b.U[bb]
            av_direct[i, k] = acc
    # A(∂_i) from the primary route, pushed to ambient components
    resid = 0.0
    for i in range(m):
        for k in range(d):
            acc = None
            for j in range(m):
                term = b.A[j, i] * b.t[j, k]
                acc = term if acc is None else acc + term
            resid = np.maximum(resid, np.max(np.abs(np.asarray((acc - av_direct[i, k]).value))))
    scale = 1.0 + np.max(np.abs(_vals(b.A, b.batched)))
    if np.max(resid) > 1e-9 * scale:
        raise GeometryError(f"shape-operator routes disagree by {np.max(resid):.3e}")


def principal_curvatures(first, second, alpha):
    """Eigenvalues of A from II v = μ g v with λ = α μ, ascending.

    Positive/negative definite g uses the symmetric reduction; indefinite g
    falls back to the non-symmetric spectrum of A with a 1e−10 pairing
    tolerance on imaginary parts (complex pairs come back as NaN).
    """
    g = np.asarray(first, dtype=float)
    ii = np.asarray(second, dtype=float)
    batched = g.ndim == 3
    if not batched:
        g, ii, alpha = g[None], ii[None], np.atleast_1d(alpha)
    evg = np.linalg.eigvalsh(g)
    lam = np.empty(g.shape[:2])
    pos = evg[:, 0] > 0
    neg = evg[:, -1] < 0
    for mask, sign in ((pos, 1.0), (neg, -1.0)):
        if np.any(mask):
            L = np.linalg.cholesky(sign * g[mask])
            linv_ii = np.linalg.solve(L, ii[mask])
            M = np.linalg.solve(L, np.swapaxes(linv_ii, -1, -2))
            mu = np.linalg.eigvalsh(M) * sign
            lam[mask] = np.sort(alpha[mask, None] * mu, axis=-1)
    indef = ~(pos | neg)
    if np.any(indef):
        a_mat = alpha[indef, None, None] * np.linalg.solve(g[indef], ii[indef])
        ev = np.linalg.eigvals(a_mat)
        scale = 1.0 + np.max(np.abs(ev.real), axis=-1, keepdims=True)
        bad = np.abs(ev.imag) > 1e-10 * scale
        vals = np.where(bad, np.nan, ev.real)
        lam[indef] = np.sort(vals, axis=-1)
    return lam if batched else lam[0]


def surface_point(imm: Immersion, u, order: int = 4) -> SurfacePointData:
    """All classical pointwise data at parameter point(s) u.

    u may be a single point of shape (m,) or a batch (N, m); batched results
    carry the batch axis first.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(imm.contains(u)):
        raise OutOfDomain("parameter point outside the immersion domain")
    u_jets = seed_jets(u, imm.param_dim, order)
    b = frame_jets(imm, u_jets)
    batched = b.batched
    first = _vals(b.g, batched)
    second = _vals(b.II, batched)
    shape_a = _vals(b.A, batched)
    third = np.einsum("...si,...tj,...st->...ij", shape_a, shape_a, first)
    alpha = np.asarray(b.alpha, dtype=float)
    lam = principal_curvatures(first, second, alpha)
    eps = np.sign(np.linalg.eigvalsh(first))
    return SurfacePointData(
        u=u,
        x=_vals(np.asarray(b.x, dtype=object), batched),
        tangent=_vals(b.t, batched),
        normal=_vals(b.U, batched),
        alpha=alpha,
        first=first,
        second=second,
        third=third,
        shape=shape_a,
        mean=np.asarray(b.H.value),
        detA=np.asarray(b.detA.value),
        lam=lam,
        epsilon=eps,
        _bundle=b,
    )


# ---------------------------------------------------------------------------
# ambient curvature along an immersion
# ---------------------------------------------------------------------------


def ambient_curvature_on_jets(chart: MetricChart, x_jets, gbar=None, order: int = 2):
    """R̄_{abcd}, Ric̄_{ab}, S̄ along jet-valued coordinates, to jet order
    `order` (2 is enough for every consumer here: the Z field needs one
    parameter derivative, everything else point values).

    Constant-curvature and product-of-space-form charts use their closed
    forms; anything else composes the ambient Taylor expansion of the
    curvature with the displacement jets.
    """
    d = chart.dim
    x_jets = [xj.truncate(order) for xj in x_jets]
    if gbar is None:
        gbar = metric_jets(chart, x_jets)
    else:
        trunc = np.empty(gbar.shape, dtype=object)
        for i in range(d):
            for j in range(d):
                trunc[i, j] = gbar[i, j].truncate(order)
        gbar = trunc
    if chart.curvature_const is not None:
        return _space_form_curvature(gbar, chart.curvature_const, d)
    if chart.product_factors is not None and all(
        c.curvature_const is not None for c, _ in chart.product_factors
    ):
        zero = x_jets[0] * 0.0
        riem = np.empty((d, d, d, d), dtype=object)
        riem[...] = zero
        ric = np.empty((d, d), dtype=object)
        ric[...] = zero
        scal = zero
        for sub, sl in chart.product_factors:
            nb = sub.dim
            block_g = gbar[sl, sl]
            br, bric, bs = _space_form_curvature(block_g, sub.curvature_const, nb)
            riem[sl, sl, sl, sl] = br
            ric[sl, sl] = bric
            scal = scal + bs
        return riem, ric, scal
    return _generic_curvature_along(chart, x_jets)


def _space_form_curvature(g, cbar, d):
    zero = g[0, 0] * 0.0
    riem = np.empty((d, d, d, d), dtype=object)
    riem[...] = zero
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(d):
                for l in range(d):
                    val = (g[i, k] * g[j, l] - g[i, l] * g[j, k]) * cbar
                    riem[i, j, k, l] = val
                    riem[j, i, k, l] = -val
    ric = np.empty((d, d), dtype=object)
    for i in range(d):
        for j in range(i, d):
            ric[i, j] = g[i, j] * (cbar * (d - 1))
            ric[j, i] = ric[i, j]
    scal = zero + cbar * d * (d - 1)
    return riem, ric, scal


def _generic_curvature_along(chart: MetricChart, x_jets):
    d = chart.dim
    order = min(x_jets[0].space.order, 2)
    x0 = np.stack([np.asarray(j.value, dtype=float) for j in x_jets], axis=-1)
    amb_jets = seed_jets(x0, d, order + 2)
    g = metric_jets(chart, amb_jets)
    gamma = christoffel_jets(g)
    riem_amb = riemann_lower_jets(g, gamma)
    ginv = jinv(g)
    ric_amb = amb.ricci_jets(ginv, riem_amb)
    scal_amb = None
    for j in range(d):
        for l in range(d):
            term = ginv[j, l] * ric_amb[j, l]
            scal_amb = term if scal_amb is None else scal_amb + term
    disp = [x_jets[k] - x0[..., k] for k in range(d)]

    def comp(jet):
        return compose(jet.truncate(order), disp)

    riem = np.empty((d, d, d, d), dtype=object)
    zero = x_jets[0] * 0.0
    for i in range(d):
        riem[i, i, :, :] = zero
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(d):
                for l in range(d):
                    val = comp(riem_amb[i, j, k, l])
                    riem[i, j, k, l] = val
                    riem[j, i, k, l] = -val
    ric = np.empty((d, d), dtype=object)
    for i in range(d):
        for j in range(i, d):
            ric[i, j] = comp(ric_amb[i, j])
            ric[j, i] = ric[i, j]
    return riem, ric, comp(scal_amb)


# ---------------------------------------------------------------------------
# Gauss and Codazzi residuals
# ---------------------------------------------------------------------------


def intrinsic_curvature_jets(metric_obj):
    """(Γ, R_lower) of a metric given as an object matrix of jets."""
    gamma = christoffel_jets(metric_obj)
    return gamma, riemann_lower_jets(metric_obj, gamma)


def gauss_codazzi_residual(imm: Immersion, u):
    """Max-norm residuals of the Gauss and Codazzi equations at u."""
    u = np.asarray(u, dtype=float)
    u_jets = seed_jets(u, imm.param_dim, 3)
    b = frame_jets(imm, u_jets)
    m, d = imm.param_dim, imm.ambient.dim
    batched = b.batched

    gamma_g, r_g = intrinsic_curvature_jets(b.g)
    r_val = _vals(r_g, batched)
    riem_bar, _, _ = ambient_curvature_on_jets(imm.ambient, b.x, b.gbar)
    rb = _vals(riem_bar, batched)
    tv = _vals(b.t, batched)
    iiv = _vals(b.II, batched)
    alpha = np.asarray(b.alpha, dtype=float)
    rbar_tangent = np.einsum("...abcd,...ia,...jb,...kc,...ld->...ijkl", rb, tv, tv, tv, tv)
    gauss = r_val - rbar_tangent - (alpha[..., None, None, None, None] if batched else alpha) * (
        np.einsum("...ik,...jl->...ijkl", iiv, iiv) - np.einsum("...il,...jk->...ijkl", iiv, iiv)
    )
    gauss_res = np.max(np.abs(gauss))

    # Codazzi: (∇_i A)_j − (∇_j A)_i = R̄(∂_i, ∂_j)U, compared in parameter components
    gam_val = _vals(gamma_g, batched)
    a_val = _vals(b.A, batched)
    dAkji = np.empty(a_val.shape[:-2] + (m, m, m))  # [..., i, k, j] = ∂_i A^k_j
    for i in range(m):
        for k in range(m):
            for j in range(m):
                dAkji[..., i, k, j] = np.asarray(b.A[k, j].partial(i).value)
    nabla_a = (
        dAkji
        + np.einsum("...kis,...sj->...ikj", gam_val, a_val)
        - np.einsum("...sij,...ks->...ikj", gam_val, a_val)
    )
    # antisymmetrize in (i, j); nabla_a axes are [..., i, k, j]
    lhs = nabla_a - np.moveaxis(nabla_a, [-3, -1], [-1, -3])
    gbar_inv_v = _vals(b.gbar_inv, batched)
    uv = _vals(np.asarray(b.U, dtype=object).reshape(1, d), batched)[..., 0, :]
    rhs_amb = np.einsum("...abcf,...ia,...jb,...c,...ef->...ije", rb, tv, tv, uv, gbar_inv_v)
    gbar_v = _vals(b.gbar, batched)
    g_val = _vals(b.g, batched)
    rhs_cov = np.einsum("...ije,...ef,...kf->...ijk", rhs_amb, gbar_v, tv)
    rhs_param = np.einsum("...kl,...ijl->...ijk", np.linalg.inv(g_val), rhs_cov)
    # lhs[..., i, k, j] has k the component; rhs_param[..., i, j, k]
    codazzi = lhs - np.moveaxis(rhs_param, -1, -2)
    codazzi_res = np.max(np.abs(codazzi))
    return float(gauss_res), float(codazzi_res)


# ---------------------------------------------------------------------------
# standard immersions
# ---------------------------------------------------------------------------


def _unit_sphere_map(k, jets_u):
    """ω: (θ_1, …, θ_{k−1}, φ) ↦ unit vector in ℝ^{k+1} (colatitudes first)."""
    if k == 0:
        return [1.0]
    comps = []
    prefix = None
    for i in range(k - 1):
        th = jets_u[i]
        comps.append(th.cos() if prefix is None else prefix * th.cos())
        prefix = th.sin() if prefix is None else prefix * th.sin()
    phi = jets_u[k - 1]
    comps.append(phi.cos() if prefix is None else prefix * phi.cos())
    comps.append(phi.sin() if prefix is None else prefix * phi.sin())
    return comps


def _sphere_param_box(k):
    lo = np.array([0.0] * (k - 1) + [0.0])
    hi = np.array([math.pi] * (k - 1) + [2 * math.pi])
    hint = tuple(["gl"] * (k - 1) + ["per"])
    return lo, hi, hint


def _chart_radius_fn(cbar):
    """Geodesic radius ρ ↦ conformal-chart radius of the sphere exp(ρ·ω)."""
    if cbar == 0.0:
        return lambda rho: rho
    s = math.sqrt(abs(cbar))

    def fn(rho):
        half = rho * (s / 2)
        if isinstance(half, Jet):
            val = half.sin() / half.cos() if cbar > 0 else half.sinh() / half.cosh()
        else:
            val = math.tan(half) if cbar > 0 else math.tanh(half)
        return val * (2 / s)

    return fn


def _random_quartic(nvars, rng, amplitude):
    terms = list(combinations_with_replacement(range(nvars), 4))
    coeffs = rng.normal(size=len(terms))
    coeffs *= amplitude / np.sum(np.abs(coeffs))

    def q(omega):
        acc = None
        for c, term in zip(coeffs, terms):
            prod = None
            for i in term:
                prod = omega[i] if prod is None else prod * omega[i]
            prod = prod * c
            acc = prod if acc is None else acc + prod
        return acc

    return q


def standard_immersion(kind: str, **params) -> Immersion:
    """Catalog of closed-form immersions used throughout the test corpus.

    kinds: round_sphere, ellipsoid, perturbed_ovaloid, graph, rotational,
    clifford, small_sphere_in_sphere, perturbed_sphere_in_space_form,
    product_sphere_in_sphere, latitude_circle.
    """
    desc = {"kind": kind, **params}
    if kind == "round_sphere":
        radius = float(params.get("radius", 1.0))
        m = int(params.get("m", 2))
        if radius <= 0:
            raise BadParameters("radius must be positive")
        chart = amb.flat_chart(m + 1)
        lo, hi, hint = _sphere_param_box(m)

        def map_fn(u):
            return [w * radius for w in _unit_sphere_map(m, u)]

        return Immersion(chart, m, map_fn, lo, hi, descriptor=desc, grid_hint=hint)

    if kind == "ellipsoid":
        axes = [float(a) for a in params["axes"]]
        if min(axes) <= 0:
            raise BadParameters("all semi-axes must be positive")
        m = len(axes) - 1
        chart = amb.flat_chart(m + 1)
        lo, hi, hint = _sphere_param_box(m)

        def map_fn(u):
            return [w * a for w, a in zip(_unit_sphere_map(m, u), axes)]

        return Immersion(chart, m, map_fn, lo, hi, descriptor=desc, grid_hint=hint)

    if kind == "perturbed_ovaloid":
        m = int(params.get("m", 2))
        amplitude = float(params.get("amplitude", 0.02))
        seed = int(params.get("seed", 0))
        if not 0 <= amplitude < 0.2:
            raise BadParameters("amplitude outside the ovaloid-safe range")
        chart = amb.flat_chart(m + 1)
        lo, hi, hint = _sphere_param_box(m)
        q = _random_quartic(m + 1, np.random.default_rng(seed), amplitude)

        def map_fn(u):
            omega = _unit_sphere_map(m, u)
            rho = q(omega) + 1.0
            return [w * rho for w in omega]

        return Immersion(chart, m, map_fn, lo, hi, descriptor=desc, grid_hint=hint)

    if kind == "graph":
        quad = np.asarray(params.get("quadratic", np.eye(2)), dtype=float)
        m = quad.shape[0]
        half = float(params.get("half_width", 1.0))
        chart = amb.flat_chart(m + 1)

        def map_fn(u):
            z = None
            for i in range(m):
                for j in range(m):
                    if quad[i, j] == 0.0:
                        continue
                    term = u[i] * u[j] * (0.5 * quad[i, j])
                    z = term if z is None else z + term
            if z is None:
                z = u[0] * 0.0
            return list(u) + [z]

        return Immersion(
            chart, m, map_fn, -half * np.ones(m), half * np.ones(m), descriptor=desc,
            grid_hint=("gl",) * m,
        )

    if kind == "rotational":
        profile = params.get("profile", "catenoid")
        if profile != "catenoid":
            raise BadParameters(f"unknown rotational profile {profile!r}")
        a = float(params.get("waist", 1.0))
        half = float(params.get("half_height", 1.0))
        chart = amb.flat_chart(3)

        def map_fn(u):
            s, phi = u
            r = (s / a).cosh() * a
            return [r * phi.cos(), r * phi.sin(), s]

        return Immersion(
            chart, 2, map_fn, np.array([-half, 0.0]), np.array([half, 2 * math.pi]),
            descriptor=desc, grid_hint=("gl", "per"),
        )

    if kind == "clifford":
        chart = amb.space_form(3, 1.0)
        c = 1.0 / math.sqrt(2.0)

        def map_fn(u):
            s, t = u
            y0 = s.cos() * c
            rest = [s.sin() * c, t.cos() * c, t.sin() * c]
            denom = (y0 + 1.0).reciprocal() * 2.0
            return [yi * denom for yi in rest]

        box = np.array([2 * math.pi, 2 * math.pi])
        return Immersion(
            chart, 2, map_fn, np.zeros(2), box, descriptor=desc, grid_hint=("per", "per")
        )

    if kind == "small_sphere_in_sphere":
        cbar = float(params.get("Cbar", 1.0))
        m = int(params.get("m", 2))
        rho = float(params["geodesic_radius"])
        if rho <= 0:
            raise BadParameters("geodesic radius must be positive")
        if cbar > 0 and rho >= math.pi / math.sqrt(cbar):
            raise BadParameters("geodesic sphere beyond the conjugate radius")
        chart = amb.space_form(m + 1, cbar)
        c = _chart_radius_fn(cbar)(rho)
        lo, hi, hint = _sphere_param_box(m)

        def map_fn(u):
            return [w * c for w in _unit_sphere_map(m, u)]

        return Immersion(chart, m, map_fn, lo, hi, descriptor=desc, grid_hint=hint)

    if kind == "perturbed_sphere_in_space_form":
        cbar = float(params.get("Cbar", 1.0))
        m = int(params.get("m", 3))
        rho0 = float(params.get("base_radius", 0.7))
        amplitude = float(params.get("amplitude", 0.02))
        seed = int(params.get("seed", 0))
        chart = amb.space_form(m + 1, cbar)
        lo, hi, hint = _sphere_param_box(m)
        q = _random_quartic(m + 1, np.random.default_rng(seed), amplitude)
        radius_fn = _chart_radius_fn(cbar)

        def map_fn(u):
            omega = _unit_sphere_map(m, u)
            rho = (q(omega) + 1.0) * rho0
            c = radius_fn(rho)
            return [w * c for w in omega]

        return Immersion(chart, m, map_fn, lo, hi, descriptor=desc, grid_hint=hint)

    if kind == "product_sphere_in_sphere":
        m = int(params.get("m", 2))
        k = int(params.get("k", 1))
        if not 1 <= k <= m - 1:
            raise BadParameters("need 1 <= k <= m-1")
        chart = amb.space_form(m + 1, 1.0)
        c = 1.0 / math.sqrt(2.0)
        lo_a, hi_a, hint_a = _sphere_param_box(k)
        lo_b, hi_b, hint_b = _sphere_param_box(m - k)

        def map_fn(u):
            a_part = [w * c for w in _unit_sphere_map(k, u[:k])]
            b_part = [w * c for w in _unit_sphere_map(m - k, u[k:])]
            y = a_part + b_part
            denom = (y[0] + 1.0).reciprocal() * 2.0
            return [yi * denom for yi in y[1:]]

        return Immersion(
            chart, m, map_fn, np.concatenate([lo_a, lo_b]), np.concatenate([hi_a, hi_b]),
            descriptor=desc, grid_hint=hint_a + hint_b,
        )

    if kind == "latitude_circle":
        theta = float(params.get("colatitude", math.pi / 4))
        cbar = float(params.get("Cbar", 1.0))
        if not 0 < theta < math.pi / 2 + 1e-9:
            raise BadParameters("colatitude must lie in (0, π/2]")
        chart = amb.space_form(2, cbar)
        rc = _chart_radius_fn(cbar)(theta)
        circumference = 2 * math.pi * math.sin(theta)  # unit sphere

        def map_fn(u):
            (s,) = u
            ang = s * (2 * math.pi / circumference)
            return [ang.cos() * rc, ang.sin() * rc]

        return Immersion(
            chart, 1, map_fn, np.array([0.0]), np.array([circumference]),
            descriptor=desc, grid_hint=("per",),
        )

    raise BadParameters(f"unknown standard immersion kind {kind!r}")


def immersion_from_descriptor(desc: dict) -> Immersion:
    desc = dict(desc)
    kind = desc.pop("kind")
    orientation = desc.pop("orientation", 0)
    imm = standard_immersion(kind, **desc)
    return replace(imm, orientation=orientation) if orientation else imm


def reparametrized(imm: Immersion, mat, shift, new_lo, new_hi) -> Immersion:
    """Compose the parameter chart with the affine map u ↦ mat·u + shift."""
    mat = np.asarray(mat, dtype=float)
    shift = np.asarray(shift, dtype=float)

    def map_fn(u):
        w = [None] * imm.param_dim
        for i in range(imm.param_dim):
            acc = None
            for j in range(imm.param_dim):
                if mat[i, j] == 0.0:
                    continue
                term = u[j] * mat[i, j]
                acc = term if acc is None else acc + term
            w[i] = (acc if acc is not None else u[0] * 0.0) + shift[i]
        return imm.map_fn(w)

    return Immersion(
        imm.ambient, imm.param_dim, map_fn, np.asarray(new_lo, float), np.asarray(new_hi, float),
        orientation=imm.orientation, descriptor=None, grid_hint=imm.grid_hint,
    )


def resolved_orientation(imm: Immersion) -> int:
    """The concrete ±1 (relative to the cofactor normal) that the immersion's
    orientation rule realizes.  Resolved at the domain midpoint; the auto rule
    cannot change sign across a connected nondegenerate patch."""
    if imm.orientation != 0:
        return imm.orientation
    u_mid = 0.5 * (imm.param_lo + imm.param_hi)
    auto = surface_point(imm, u_mid, order=2)
    raw = surface_point(replace(imm, orientation=1), u_mid, order=2)
    return 1 if float(np.dot(auto.normal, raw.normal)) > 0 else -1


def flipped(imm: Immersion) -> Immersion:
    """Same patch with the opposite normal orientation."""
    return replace(imm, orientation=-resolved_orientation(imm))


def validate_immersion(imm: Immersion, n_per_axis: int = 5, margin: float = 1e-3) -> None:
    """Run the SurfacePointData invariants on a coarse grid; raises on failure."""
    m = imm.param_dim
    axes = [
        np.linspace(lo + margin * (hi - lo), hi - margin * (hi - lo), n_per_axis)
        for lo, hi in zip(imm.param_lo, imm.param_hi)
    ]
    mesh = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=-1)
    data = surface_point(imm, mesh, order=2)
    gbar = amb.metric_value(imm.ambient, data.x)
    udotu = np.einsum("...a,...ab,...b->...", data.normal, gbar, data.normal)
    if np.max(np.abs(np.abs(udotu) - 1.0)) > 1e-10:
        raise GeometryError("normal is not unit")
    tdotu = np.einsum("...ia,...ab,...b->...i", data.tangent, gbar, data.normal)
    if np.max(np.abs(tdotu)) > 1e-9:
        raise GeometryError("normal not orthogonal to tangents")
    ii_sym = np.max(np.abs(data.second - np.swapaxes(data.second, -1, -2)))
    if ii_sym > 1e-10:
        raise GeometryError("second fundamental form not symmetric")
    third = np.einsum("...si,...tj,...st->...ij", data.shape, data.shape, data.first)
    if np.max(np.abs(third - data.third)) > 1e-9:
        raise GeometryError("III != II ∘ A relation violated")
    aga = np.einsum("...ik,...kj->...ij", data.first, data.shape) * data.alpha[..., None, None]
    if np.max(np.abs(aga - data.second)) > 1e-9:
        raise GeometryError("α·g·A != II")
    h = data.alpha / m * np.einsum("...ii->...", data.shape)
    if np.max(np.abs(h - data.mean)) > 1e-10:
        raise GeometryError("mean curvature mismatch")
    prod = np.prod(data.lam, axis=-1)
    ok = np.isfinite(prod)
    if np.any(np.abs(prod[ok] - data.detA[ok]) > 1e-8 * (1 + np.abs(data.detA[ok]))):
        raise GeometryError("det A != product of principal curvatures")
