"""Geometry measured in the second fundamental form.

Everything here lives on hypersurfaces whose second fundamental form II is a
semi-Riemannian metric: the II-orthonormal frame (V_i, κ_i), the Levi-Civita
connection of II and the difference tensor L = ∇^II − ∇, the curvature field

    Z = Σ_i κ_i A^{←}([R̄(V_i, U)V_i]^T),

the II-Laplacian and II-divergence (sign convention Δf = f″ on ℝ), and the
mean curvature of the second fundamental form computed through three
genuinely different routes:

  variational:  H_II = ½(mH − Σ_i κ_i ḡ(R̄(V_i,U)V_i,U)) + tail,
  principal:    H_II = ½(mH − Σ_i K̄(E_i,U)/λ_i) + tail,
  contracted:   H_II = −(α/2)(tr_II R̄ic − tr_II Ric + α(m²−2m)H) + tail,

with the shared tail (α/4)Δ_II log|det A| − (α/2) div_II Z.  The first uses
the ambient curvature along the II-frame, the second the principal
directions, the third the intrinsic Ricci curvature of the induced metric;
their mutual agreement is the strongest single correctness check in the
package.  For m = 2 the contracted route loses its α(m²−2m)H term and leans
entirely on the trace terms; it is still computed and must still agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import ambient as amb
from .errors import (
    DegenerateII,
    GeometryError,
    SingularShapeOperator,
    StepFailure,
)
from .hypersurface import (
    Immersion,
    SurfacePointData,
    _SurfaceJets,
    _vals,
    ambient_curvature_on_jets,
    frame_jets,
    intrinsic_curvature_jets,
    surface_point,
)
from .jets import jdet, jinv, seed_jets

__all__ = [
    "IIGeometryPoint",
    "ii_geometry",
    "z_field",
    "z_field_surface_alt",
    "laplacian_ii",
    "div_ii",
    "transport_holonomy_probe",
    "sphere_inequality_report",
    "brioschi_gauss_curvature",
    "SphereInequalityReport",
]

SHAPE_EIGENVALUE_FLOOR = 1e-8
II_DET_FLOOR = 1e-12
PRINCIPAL_GAP = 1e-6


@dataclass
class IIGeometryPoint:
    """Per-point package of II-metric quantities (batch axis first on grids).

    `h_ii` holds the three routes under keys "variational", "principal",
    "gauss"; `principal_valid` marks points where the eigenbasis route was
    computable.  `valid` marks points passing the nondegeneracy guards; with
    on_error="mask" the invalid entries are NaN instead of raising.
    """

    base: SurfacePointData
    ii_frame: np.ndarray  # (..., m, m): row i = V_i in parameter components
    kappa: np.ndarray  # (..., m)
    gamma_ii: np.ndarray  # (..., m, m, m): Γ_II^k_{ij}, k first
    L: np.ndarray  # (..., m, m, m): L^k_{ij}
    tr_ii_L: np.ndarray  # (..., m)
    Z: np.ndarray  # (..., m) parameter components
    h_ii: dict
    s_ii: np.ndarray
    ii_LL: np.ndarray
    lap_ii_log_det_a: np.ndarray
    div_ii_z: np.ndarray
    tr_ii_ricbar: np.ndarray
    tr_ii_ric: np.ndarray
    metricity_residual: np.ndarray
    principal_valid: np.ndarray
    valid: np.ndarray
    invalid_reason: np.ndarray = None

    @property
    def h_ii_spread(self):
        """Max relative disagreement of the available routes."""
        routes = [self.h_ii["variational"], self.h_ii["gauss"]]
        hp = np.where(self.principal_valid, self.h_ii["principal"], self.h_ii["variational"])
        routes.append(hp)
        stack = np.stack(routes)
        return (np.max(stack, axis=0) - np.min(stack, axis=0)) / (
            1.0 + np.abs(self.h_ii["variational"])
        )


def _ii_orthonormal_frame(ii_val, tol_scale):
    """Gram–Schmidt on II, pivoting by largest |II(w,w)|, lowest index ties.

    Returns (V, kappa, ok) with V[..., i, :] the i-th frame vector.
    """
    single = ii_val.ndim == 2
    ii = ii_val[None] if single else ii_val
    n, m, _ = ii.shape
    V = np.zeros((n, m, m))
    kappa = np.zeros((n, m))
    ok = np.ones(n, dtype=bool)
    used = np.zeros((n, m), dtype=bool)
    cand = np.broadcast_to(np.eye(m), (n, m, m)).copy()
    floor = 1e-10 * np.maximum(tol_scale, 1e-30)
    for step in range(m):
        q = np.einsum("nja,nab,njb->nj", cand, ii, cand)
        qm = np.where(used, -np.inf, np.abs(q))
        j = np.argmax(qm, axis=1)
        qj = np.take_along_axis(q, j[:, None], 1)[:, 0]
        ok &= np.abs(qj) > floor
        safe = np.where(np.abs(qj) > floor, qj, 1.0)
        w = np.take_along_axis(cand, j[:, None, None], 1)[:, 0, :]
        k = np.sign(safe)
        v = w / np.sqrt(np.abs(safe))[:, None]
        V[:, step, :] = v
        kappa[:, step] = k
        used[np.arange(n), j] = True
        proj = np.einsum("nja,nab,nb->nj", cand, ii, v) * k[:, None]
        cand = cand - proj[:, :, None] * v[:, None, :]
    if single:
        return V[0], kappa[0], ok[0]
    return V, kappa, ok


def _tr_ii_bilinear(V, kappa, B):
    """Σ_i κ_i B(V_i, V_i) for a symmetric bilinear form in param components."""
    return np.einsum("...i,...ia,...ib,...ab->...", kappa, V, V, B)


def _principal_directions(first, second, alpha, lam_hint=None):
    """Principal curvatures and g-orthonormal eigenvectors of A.

    Returns (lam, E, eps, valid) with E[..., i, :] the direction for lam[..., i]
    and eps the signs g(E_i, E_i).  The non-symmetric fallback (indefinite g)
    marks points with complex or null-direction spectra invalid.
    """
    g = np.asarray(first, dtype=float)
    ii = np.asarray(second, dtype=float)
    single = g.ndim == 2
    if single:
        g, ii, alpha = g[None], ii[None], np.atleast_1d(alpha)
    n, m, _ = g.shape
    lam = np.full((n, m), np.nan)
    E = np.full((n, m, m), np.nan)
    eps = np.ones((n, m))
    valid = np.zeros(n, dtype=bool)
    evg = np.linalg.eigvalsh(g)
    pos = evg[:, 0] > 0
    neg = evg[:, -1] < 0
    for mask, sign in ((pos, 1.0), (neg, -1.0)):
        if not np.any(mask):
            continue
        L = np.linalg.cholesky(sign * g[mask])
        Mred = np.linalg.solve(L, np.swapaxes(np.linalg.solve(L, ii[mask]), -1, -2))
        mu, y = np.linalg.eigh(Mred)
        vecs = np.swapaxes(np.linalg.solve(np.swapaxes(L, -1, -2), y), -1, -2)
        lam[mask] = alpha[mask, None] * mu * sign
        E[mask] = vecs
        eps[mask] = sign
        valid[mask] = True
    indef = ~(pos | neg)
    if np.any(indef):
        a_mat = alpha[indef, None, None] * np.einsum(
            "nij,njk->nik", np.linalg.inv(g[indef]), ii[indef]
        )
        ev, vec = np.linalg.eig(a_mat)
        scale = 1.0 + np.max(np.abs(ev.real), axis=-1)
        real = np.max(np.abs(ev.imag), axis=-1) <= 1e-10 * scale
        lam_i = ev.real
        vec = np.real(np.swapaxes(vec, -1, -2))
        gvv = np.einsum("nia,nab,nib->ni", vec, g[indef], vec)
        nonnull = np.min(np.abs(gvv), axis=-1) > 1e-10
        okm = real & nonnull
        norm = np.sqrt(np.abs(np.where(np.abs(gvv) > 1e-300, gvv, 1.0)))
        lam[indef] = lam_i
        E[indef] = vec / norm[:, :, None]
        eps[indef] = np.sign(gvv)
        valid[indef] = okm
    order = np.argsort(lam, axis=-1)
    lam = np.take_along_axis(lam, order, axis=-1)
    E = np.take_along_axis(E, order[:, :, None], axis=1)
    eps = np.take_along_axis(eps, order, axis=-1)
    if single:
        return lam[0], E[0], eps[0], valid[0]
    return lam, E, eps, valid


def _divergence_form(W_jet, comps, m):
    """(1/W)·Σ_i ∂_i(W·comps_i) at the base point.  comps are jets."""
    inv_w = np.asarray(W_jet.value) ** -1.0
    acc = 0.0
    for i in range(m):
        acc = acc + np.asarray((W_jet * comps[i]).partial(i).value)
    return acc * inv_w


def _ii_machine(b: _SurfaceJets):
    """Jet-level II-metric quantities shared by the public operations."""
    m = b.imm.param_dim
    ii_inv = jinv(b.II)
    det_ii = jdet(b.II)
    w = det_ii.sqrt_abs()
    gamma_ii = amb.christoffel_jets(b.II)
    return ii_inv, det_ii, w, gamma_ii


def ii_geometry(imm: Immersion, u, on_error: str = "raise") -> IIGeometryPoint:
    """Full II-geometry package at parameter point(s) u.

    Needs the immersion to Taylor order 4 (Δ_II log|det A| consumes two
    parameter derivatives of det A).  With on_error="mask", points failing
    the nondegeneracy guards come back NaN with `valid`=False rather than
    raising.
    """
    data = surface_point(imm, u, order=4)
    b = data._bundle
    m, d = imm.param_dim, imm.ambient.dim
    batched = b.batched

    with np.errstate(all="ignore"):
        return _ii_geometry_from(data, b, m, d, batched, on_error)


def _ii_geometry_from(data, b, m, d, batched, on_error):
    lam_mod = np.abs(np.linalg.eigvals(np.asarray(data.shape, dtype=float)))
    singular = np.min(lam_mod, axis=-1) < SHAPE_EIGENVALUE_FLOOR
    ii_val = data.second
    det_ii_val = np.linalg.det(ii_val)
    degenerate = np.abs(det_ii_val) < II_DET_FLOOR
    valid = ~(singular | degenerate)
    reason = np.where(singular, "singular_shape", np.where(degenerate, "degenerate_ii", ""))
    if on_error == "raise":
        if np.any(singular):
            raise SingularShapeOperator(
                f"min |principal curvature| < {SHAPE_EIGENVALUE_FLOOR} at "
                f"{int(np.sum(singular))} point(s)"
            )
        if np.any(degenerate):
            raise DegenerateII(f"|det II| < {II_DET_FLOOR} at {int(np.sum(degenerate))} point(s)")

    ii_inv, det_ii, w, gamma_ii = _ii_machine(b)
    gamma_g, r_g = intrinsic_curvature_jets(b.g)

    gamma_ii_val = _vals(gamma_ii, batched)
    gamma_g_val = _vals(gamma_g, batched)
    L = gamma_ii_val - gamma_g_val

    V, kappa, frame_ok = _ii_orthonormal_frame(ii_val, np.max(np.abs(ii_val), axis=(-1, -2)))
    valid &= frame_ok
    reason = np.where(~frame_ok & (reason == ""), "degenerate_frame", reason)
    if on_error == "raise" and not np.all(frame_ok):
        raise DegenerateII("II-orthonormal frame construction failed")

    # metricity of ∇^II (a plumbing check: holds to roundoff by construction)
    dii = np.empty(ii_val.shape[:-2] + (m, m, m))
    for k in range(m):
        for i in range(m):
            for j in range(m):
                dii[..., k, i, j] = np.asarray(b.II[i, j].partial(k).value)
    nab_ii = (
        dii
        - np.einsum("...ski,...sj->...kij", gamma_ii_val, ii_val)
        - np.einsum("...skj,...is->...kij", gamma_ii_val, ii_val)
    )
    metricity = np.max(np.abs(nab_ii), axis=(-1, -2, -3))

    # tr_II L as a vector
    tr_l = np.einsum("...i,...ia,...ib,...kab->...k", kappa, V, V, L)

    # ambient curvature along the patch
    riem_bar, ric_bar, _ = ambient_curvature_on_jets(b.imm.ambient, b.x, b.gbar)

    # Z = A^{←} of the II-trace of (X,Y) ↦ [R̄(X,U)Y]^T, assembled in jets
    a_inv = jinv(b.A)
    z_param = _z_field_jets(b, riem_bar, ii_inv, a_inv, m, d)
    z_val = np.stack([np.asarray(z_param[k].value) for k in range(m)], axis=-1)

    # Δ_II log|det A| and div_II Z via the divergence form
    f_log = b.detA.log_abs()
    grad_terms = []
    for i in range(m):
        acc = None
        for j in range(m):
            term = ii_inv[i, j] * f_log.partial(j)
            acc = term if acc is None else acc + term
        grad_terms.append(acc)
    lap_log_det_a = _divergence_form(w, grad_terms, m)
    div_z = _divergence_form(w, z_param, m)

    alpha = data.alpha
    h = data.mean
    tail = 0.25 * alpha * lap_log_det_a - 0.5 * alpha * div_z

    # variational head: tr_II of B(X,Y) = ḡ(R̄(X,U)Y,U)
    rb = _vals(riem_bar, batched)
    tv, uv = data.tangent, data.normal
    B = np.einsum("...abcf,...ia,...b,...jc,...f->...ij", rb, tv, uv, tv, uv)
    h_var = 0.5 * (m * h - _tr_ii_bilinear(V, kappa, B)) + tail

    # principal head: Σ K̄(E_i,U)/λ_i with eigenvalue clusters merged
    lam, E, eps_dir, prin_ok = _principal_directions(data.first, ii_val, alpha)
    scale = 1.0 + np.max(np.abs(lam), axis=-1, keepdims=True)
    lam_grouped = _group_eigenvalues(lam, PRINCIPAL_GAP * scale)
    e_amb = np.einsum("...ik,...ka->...ia", E, tv)
    kbar_num = np.einsum("...abcf,...ia,...b,...ic,...f->...i", rb, e_amb, uv, e_amb, uv)
    kbar = kbar_num / (eps_dir * alpha[..., None] if batched else eps_dir * alpha)
    with np.errstate(all="ignore"):
        h_prin = 0.5 * (m * h - np.sum(kbar / lam_grouped, axis=-1)) + tail

    # contracted-Gauss head: needs tr_II of ambient and intrinsic Ricci
    ric_bar_val = _vals(ric_bar, batched)
    t_ric_b = np.einsum("...ab,...ia,...jb->...ij", ric_bar_val, tv, tv)
    tr_ii_ricbar = _tr_ii_bilinear(V, kappa, t_ric_b)
    ginv_val = _guarded_inv(data.first, ~valid)
    ric_g = np.einsum("...ik,...ijkl->...jl", ginv_val, _vals(r_g, batched))
    tr_ii_ric = _tr_ii_bilinear(V, kappa, ric_g)
    h_gauss = -0.5 * alpha * (tr_ii_ricbar - tr_ii_ric + alpha * (m * m - 2 * m) * h) + tail

    # intrinsic scalar curvature of (M, II)
    _, r_ii = intrinsic_curvature_jets(b.II)
    ric_ii = np.einsum("...ik,...ijkl->...jl", _guarded_inv(ii_val, ~valid), _vals(r_ii, batched))
    s_ii = _tr_ii_bilinear(V, kappa, ric_ii)

    # II(L,L) = Σ (II(L(V_i,V_j),V_k))²
    lvv = np.einsum("...kab,...ia,...jb->...ijk", L, V, V)
    ii_l = np.einsum("...ijk,...kl,...ml->...ijm", lvv, ii_val, V)
    ii_ll = np.sum(ii_l**2, axis=(-1, -2, -3))

    nanify = None if on_error == "raise" else ~valid
    out = IIGeometryPoint(
        base=data,
        ii_frame=V,
        kappa=kappa,
        gamma_ii=gamma_ii_val,
        L=L,
        tr_ii_L=tr_l,
        Z=z_val,
        h_ii={
            "variational": _mask(h_var, nanify),
            "principal": _mask(h_prin, nanify),
            "gauss": _mask(h_gauss, nanify),
        },
        s_ii=_mask(s_ii, nanify),
        ii_LL=ii_ll,
        lap_ii_log_det_a=_mask(lap_log_det_a, nanify),
        div_ii_z=_mask(div_z, nanify),
        tr_ii_ricbar=_mask(tr_ii_ricbar, nanify),
        tr_ii_ric=_mask(tr_ii_ric, nanify),
        metricity_residual=metricity,
        principal_valid=prin_ok & valid,
        valid=valid,
        invalid_reason=reason,
    )
    return out


def _mask(arr, bad):
    if bad is None or not np.any(bad):
        return arr
    return np.where(bad, np.nan, arr)


def _guarded_inv(mat, bad):
    """Matrix inverse with singular (already invalid) entries replaced by id."""
    if bad is not None and np.any(bad):
        eye = np.eye(mat.shape[-1])
        mat = np.where(np.asarray(bad)[..., None, None], eye, mat)
    return np.linalg.inv(mat)


def _group_eigenvalues(lam, tol):
    """Merge eigenvalue clusters closer than tol (sorted input)."""
    out = lam.copy()
    m = lam.shape[-1]
    i = 0
    # vectorized pairwise merge: average runs of near-equal eigenvalues
    for _ in range(m - 1):
        diff = np.abs(np.diff(out, axis=-1))
        close = diff < tol
        if not np.any(close):
            break
        for j in range(m - 1):
            mask = close[..., j]
            if np.any(mask):
                avg = 0.5 * (out[..., j] + out[..., j + 1])
                out[..., j] = np.where(mask, avg, out[..., j])
                out[..., j + 1] = np.where(mask, avg, out[..., j + 1])
    return out


def _z_field_jets(b: _SurfaceJets, riem_bar, ii_inv, a_inv, m, d):
    """Z in parameter components as jets (order >= 1, enough for div_II).

    The II-trace of (X,Y) ↦ R̄(X,U)Y is assembled covariantly as
    T_f = II^{ij} t_i^a U^b t_j^c R̄_{abcf}; precontracting the tangents keeps
    the jet-multiplication count at O(d³) instead of O(d³ m²).
    """
    # P_ac = II^{ij} t_i^a t_j^c (symmetric in a, c)
    p = np.empty((d, d), dtype=object)
    for a_ in range(d):
        for c in range(a_, d):
            acc = None
            for i in range(m):
                for j in range(m):
                    term = ii_inv[i, j] * b.t[i, a_] * b.t[j, c]
                    acc = term if acc is None else acc + term
            p[a_, c] = acc
            p[c, a_] = acc
    t_f = []
    for f in range(d):
        acc = None
        for a_ in range(d):
            for bb in range(d):
                for c in range(d):
                    term = riem_bar[a_, bb, c, f] * p[a_, c] * b.U[bb]
                    acc = term if acc is None else acc + term
        t_f.append(acc)
    return _finish_z(b, t_f, a_inv, m, d)


def _finish_z(b, t_f, a_inv, m, d):
    # raise the last index, project tangentially, convert to parameters, apply A^{←}
    w_up = [None] * d
    for e in range(d):
        acc = None
        for f in range(d):
            term = b.gbar_inv[e, f] * t_f[f]
            acc = term if acc is None else acc + term
        w_up[e] = acc
    # tangential projection: W − α ḡ(W,U) U
    gwu = None
    for a_ in range(d):
        for bb in range(d):
            term = b.gbar[a_, bb] * w_up[a_] * b.U[bb]
            gwu = term if gwu is None else gwu + term
    alpha = b.alpha
    w_tan = [w_up[e] - b.U[e] * gwu * alpha for e in range(d)]
    # parameter components: solve g c = ḡ(W, t_k)
    rhs = []
    for k in range(m):
        acc = None
        for a_ in range(d):
            for bb in range(d):
                term = b.gbar[a_, bb] * w_tan[a_] * b.t[k, bb]
                acc = term if acc is None else acc + term
        rhs.append(acc)
    c = [None] * m
    for k in range(m):
        acc = None
        for l in range(m):
            term = b.ginv[k, l] * rhs[l]
            acc = term if acc is None else acc + term
        c[k] = acc
    # apply A^{←}
    z = [None] * m
    for k in range(m):
        acc = None
        for l in range(m):
            term = a_inv[k, l] * c[l]
            acc = term if acc is None else acc + term
        z[k] = acc
    return z


def z_field(imm: Immersion, u) -> np.ndarray:
    """The curvature correction field Z in parameter components."""
    geo = ii_geometry(imm, u)
    return geo.Z


def z_field_surface_alt(imm: Immersion, u) -> np.ndarray:
    """For surfaces in 3-dim ambients: Z = A(Z₀)/det A with II(Z₀,·) = R̄ic(U,·)."""
    if imm.param_dim != 2 or imm.ambient.dim != 3:
        raise GeometryError("alternate Z formula needs a surface in a 3-dim ambient")
    data = surface_point(imm, u, order=2)
    b = data._bundle
    _, ric_bar, _ = ambient_curvature_on_jets(imm.ambient, b.x, b.gbar)
    ric_val = _vals(ric_bar, b.batched)
    rhs = np.einsum("...ab,...a,...ib->...i", ric_val, data.normal, data.tangent)
    z0 = np.linalg.solve(data.second, rhs[..., None])[..., 0]
    az0 = np.einsum("...kj,...j->...k", data.shape, z0)
    return az0 / data.detA[..., None]


def laplacian_ii(imm: Immersion, f: Callable, u) -> np.ndarray:
    """Δ_II f = (1/√|det II|) ∂_i(√|det II| II^{ij} ∂_j f) at u.

    `f` maps a list of parameter jets to a jet; the sign convention makes
    Δf = f″ on the real line.
    """
    u = np.asarray(u, dtype=float)
    u_jets = seed_jets(u, imm.param_dim, 4)
    b = frame_jets(imm, u_jets, check_two_routes=False)
    ii_inv, _, w, _ = _ii_machine(b)
    fj = f(u_jets)
    m = imm.param_dim
    comps = []
    for i in range(m):
        acc = None
        for j in range(m):
            term = ii_inv[i, j] * fj.partial(j)
            acc = term if acc is None else acc + term
        comps.append(acc)
    return _divergence_form(w, comps, m)


def div_ii(imm: Immersion, X: Callable, u) -> np.ndarray:
    """div_II X = (1/√|det II|) ∂_i(√|det II| X^i) for X in param components."""
    u = np.asarray(u, dtype=float)
    u_jets = seed_jets(u, imm.param_dim, 3)
    b = frame_jets(imm, u_jets, check_two_routes=False)
    _, _, w, _ = _ii_machine(b)
    comps = X(u_jets)
    return _divergence_form(w, comps, imm.param_dim)


# ---------------------------------------------------------------------------
# parallel-transport probe of the difference tensor
# ---------------------------------------------------------------------------


def _connections_on_path(imm: Immersion, pts):
    """(Γ_g, Γ_II) values at a batch of parameter points."""
    u_jets = seed_jets(pts, imm.param_dim, 3)
    b = frame_jets(imm, u_jets, check_two_routes=False)
    gamma_g = amb.christoffel_jets(b.g)
    gamma_ii = amb.christoffel_jets(b.II)
    return _vals(gamma_g, True), _vals(gamma_ii, True)


def transport_holonomy_probe(imm: Immersion, curve: Callable, v, eps: float, n_steps: int = 32):
    """(v★_ε − v)/ε for ∇-transport out and ∇^II-transport back along `curve`.

    As ε → 0 this converges (first order) to L(v, c′(0)); `curve` maps a
    1-variable jet to a list of parameter jets.
    """
    if eps == 0.0:
        raise StepFailure("transport probe needs a nonzero step")
    m = imm.param_dim
    v = np.asarray(v, dtype=float)
    # sample the curve and its velocity at the RK4 stage times, both legs
    n_nodes = 2 * n_steps + 1
    ts = np.linspace(0.0, eps, n_nodes)
    t_jets = seed_jets(ts[:, None], 1, 1)
    c_jets = curve(t_jets[0])
    pts = np.stack([np.asarray(cj.value) for cj in c_jets], axis=-1)
    vel = np.stack([np.asarray(cj.partial(0).value) for cj in c_jets], axis=-1)
    gam_g, gam_ii = _connections_on_path(imm, pts)

    def rk4_leg(v0, gamma, order, sign):
        h = eps / n_steps * sign
        w = v0.copy()
        for k in range(n_steps):
            idx = order[2 * k], order[2 * k + 1], order[2 * k + 2]
            m0 = -np.einsum("kij,i->kj", gamma[idx[0]], vel[idx[0]])
            m1 = -np.einsum("kij,i->kj", gamma[idx[1]], vel[idx[1]])
            m2 = -np.einsum("kij,i->kj", gamma[idx[2]], vel[idx[2]])
            k1 = m0 @ w
            k2 = m1 @ (w + 0.5 * h * k1)
            k3 = m1 @ (w + 0.5 * h * k2)
            k4 = m2 @ (w + h * k3)
            w = w + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        return w

    fwd_order = list(range(n_nodes))
    v_out = rk4_leg(v, gam_g, fwd_order, +1.0)
    back_order = list(range(n_nodes - 1, -1, -1))
    v_back = rk4_leg(v_out, gam_ii, back_order, -1.0)
    return (v_back - v) / eps


# ---------------------------------------------------------------------------
# hypersphere inequality diagnostics
# ---------------------------------------------------------------------------


@dataclass
class SphereInequalityReport:
    """Per-point values of the hypersphere characterisation quantities.

    Columns follow the inequalities: `lemma51`/`thm52` is
    S_II − 2α(m−1)(H_II + C̄ tr A^{←}) (nonpositive exactly on parallel
    hypersurfaces / extrinsic hyperspheres), `thm61` the Einstein-space
    quantity H_II + mβ − ½ tr_II Ric (m ≥ 3), `thm71` the surface quantity
    K_II − αH_II − ½ tr_II R̄ic (m = 2), and `cor7` the sign quantity
    H_II − αK_II + 2C̄H/(K − C̄).  Quantities whose hypotheses fail at a
    point are NaN there and flagged in `status`.
    """

    u: np.ndarray
    geo: IIGeometryPoint
    lemma51: np.ndarray
    thm52: np.ndarray
    thm61: Optional[np.ndarray]
    thm71: Optional[np.ndarray]
    cor7: Optional[np.ndarray]
    status: list
    summary: dict


def sphere_inequality_report(imm: Immersion, grid_u) -> SphereInequalityReport:
    """Evaluate the space-form / Einstein / surface inequality quantities."""
    u = np.atleast_2d(np.asarray(grid_u, dtype=float))
    geo = ii_geometry(imm, u, on_error="mask")
    data = geo.base
    m = imm.param_dim
    alpha = data.alpha
    cbar = imm.ambient.curvature_const
    h_ii = geo.h_ii["variational"]
    status = np.where(geo.valid, "ok", "degenerate").astype(object)

    with np.errstate(all="ignore"):
        tr_a_inv = np.einsum("...ii->...", _guarded_inv(data.shape, ~geo.valid))
        lemma51 = thm52 = None
        if cbar is not None:
            lemma51 = geo.s_ii - 2.0 * alpha * (m - 1) * (h_ii + cbar * tr_a_inv)
            thm52 = lemma51
        thm61 = thm71 = cor7 = None
        if m >= 3:
            _, _, sbar = ambient_curvature_on_jets(imm.ambient, data._bundle.x, data._bundle.gbar)
            sbar_val = np.asarray(sbar.value)
            beta = np.sqrt(np.maximum(((m - 2) / (m + 1)) * sbar_val, 0.0))
            thm61 = h_ii + m * beta - 0.5 * geo.tr_ii_ric
            bad = sbar_val <= 0
            if np.any(bad):
                thm61 = np.where(bad, np.nan, thm61)
                status[bad & geo.valid] = "ambient_scalar_nonpositive"
        if m == 2:
            k_ii = 0.5 * geo.s_ii
            thm71 = k_ii - alpha * h_ii - 0.5 * geo.tr_ii_ricbar
            if cbar is not None:
                k_gauss = _tr_ii_bilinear_intrinsic(geo)
                denom = k_gauss - cbar
                cor7 = h_ii - alpha * k_ii + 2.0 * cbar * data.mean / denom
                near = np.abs(denom) < 1e-10
                if np.any(near):
                    cor7 = np.where(near, np.nan, cor7)
                    status[near & geo.valid] = "K_equals_Cbar"

    def stats(arr):
        if arr is None:
            return None
        ok = np.isfinite(arr)
        if not np.any(ok):
            return {"min": math.nan, "max": math.nan}
        return {"min": float(np.min(arr[ok])), "max": float(np.max(arr[ok]))}

    summary = {
        "lemma51": stats(lemma51),
        "thm61": stats(thm61),
        "thm71": stats(thm71),
        "cor7": stats(cor7),
        "max_abs_h_ii": float(np.nanmax(np.abs(h_ii))) if np.any(geo.valid) else math.nan,
        "n_valid": int(np.sum(geo.valid)),
        "n_points": int(u.shape[0]),
    }
    return SphereInequalityReport(
        u=u, geo=geo, lemma51=lemma51, thm52=thm52, thm61=thm61, thm71=thm71, cor7=cor7,
        status=list(status), summary=summary,
    )


def _tr_ii_bilinear_intrinsic(geo: IIGeometryPoint):
    """Intrinsic Gauss curvature (m = 2) recovered from tr_II Ric: since
    Ric = K g for surfaces, tr_II Ric = K tr_II g; solve for K."""
    data = geo.base
    tr_ii_g = np.einsum(
        "...i,...ia,...ib,...ab->...", geo.kappa, geo.ii_frame, geo.ii_frame, data.first
    )
    return geo.tr_ii_ric / tr_ii_g


def brioschi_gauss_curvature(imm: Immersion, u, which: str = "second") -> np.ndarray:
    """Gauss curvature of the first or second fundamental form (m = 2) by the
    Brioschi determinant formula; an independent route used as an oracle."""
    if imm.param_dim != 2:
        raise GeometryError("Brioschi formula is for surfaces")
    u = np.asarray(u, dtype=float)
    u_jets = seed_jets(u, 2, 4)
    b = frame_jets(imm, u_jets, check_two_routes=False)
    form = b.II if which == "second" else b.g
    E, F, G = form[0, 0], form[0, 1], form[1, 1]

    def d(jet, *vs):
        for v_ in vs:
            jet = jet.partial(v_)
        return np.asarray(jet.value)

    e, f_, g_ = np.asarray(E.value), np.asarray(F.value), np.asarray(G.value)
    m1 = np.array(
        [
            [-0.5 * d(E, 1, 1) + d(F, 0, 1) - 0.5 * d(G, 0, 0), 0.5 * d(E, 0), d(F, 0) - 0.5 * d(E, 1)],
            [d(F, 1) - 0.5 * d(G, 0), e, f_],
            [0.5 * d(G, 1), f_, g_],
        ]
    )
    m2 = np.array(
        [
            [np.zeros_like(e), 0.5 * d(E, 1), 0.5 * d(G, 0)],
            [0.5 * d(E, 1), e, f_],
            [0.5 * d(G, 0), f_, g_],
        ]
    )
    if m1.ndim == 3:
        det1 = np.linalg.det(np.moveaxis(m1, -1, 0))
        det2 = np.linalg.det(np.moveaxis(m2, -1, 0))
    else:
        det1, det2 = np.linalg.det(m1), np.linalg.det(m2)
    return (det1 - det2) / (e * g_ - f_**2) ** 2
