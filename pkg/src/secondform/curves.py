"""Curves in semi-Riemannian surfaces: Frenet data, H_II, Length_II, ODEs.

For an arclength-parametrized Frenet curve with frame {T, U} and geodesic
curvature κ (signs β = ḡ(T,T), α = ḡ(U,U)), the mean curvature of the second
fundamental form reduces to the closed formula

    H_II = ½( −α K̄/κ + κ + (αβ/4)(2κ″/κ² − 3(κ′)²/κ³) ),

with K̄ the Gauss curvature of the ambient surface.  II-minimal planar curves
satisfy 4κ⁴ + 2κκ″ − 3(κ′)² = 0, solved by κ(s) = A/(A²(s+Q)²+1) (the
catenaries); on the unit sphere the equation becomes
4κ² − 4κ⁴ − 2κ″κ + 3(κ′)² = 0, with κ ≡ 1 (the circle of radius 1/√2) as the
constant solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import ambient as amb
from .ambient import MetricChart
from .errors import BadParameters, BlowUp, NotFrenet, NotUnitSpeed
from .jets import seed_jets

__all__ = [
    "FrenetCurve",
    "FrenetData",
    "frenet",
    "h_ii_curve",
    "length_ii",
    "ode_residual",
    "integrate_ii_minimal",
    "standard_curve",
    "curve_from_descriptor",
    "catenary_family_kappa",
    "IIMinimalSolution",
]

FRENET_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class FrenetCurve:
    """Arclength-parametrized curve in a 2-dim chart, order-4 differentiable."""

    surface: MetricChart
    curve_fn: Callable  # 1-variable jet -> [x0, x1] jets
    s_lo: float
    s_hi: float
    descriptor: Optional[dict] = None


@dataclass
class FrenetData:
    s: np.ndarray
    x: np.ndarray
    T: np.ndarray
    U: np.ndarray
    kappa: np.ndarray
    alpha: float
    beta: float
    frenet_residual: np.ndarray  # max norm of the two Frenet-Serret defects


def _curve_jets(curve: FrenetCurve, s, order=4):
    s = np.asarray(s, dtype=float)
    (sj,) = seed_jets(s[..., None] if s.ndim else s[None], 1, order)
    x = curve.curve_fn(sj)
    return s, x


def _frenet_core(curve: FrenetCurve, s):
    """Shared jets: returns (s, x, T, accel, q, κ-jet, α, β)."""
    s, x = _curve_jets(curve, s)
    T = [xi.partial(0) for xi in x]
    gbar = amb.metric_jets(curve.surface, x)
    tt = None
    for a in range(2):
        for b in range(2):
            term = gbar[a, b] * T[a] * T[b]
            tt = term if tt is None else tt + term
    tt_val = np.asarray(tt.value)
    if np.max(np.abs(np.abs(tt_val) - 1.0)) > 1e-9:
        raise NotUnitSpeed("curve is not parametrized by arclength")
    beta = float(np.sign(tt_val).ravel()[0])
    gamma = amb.christoffel_on_jets(curve.surface, x)
    accel = []
    for k in range(2):
        acc = T[k].partial(0)
        for a in range(2):
            for b in range(2):
                acc = acc + gamma[k, a, b] * T[a] * T[b]
        accel.append(acc)
    q = None
    for a in range(2):
        for b in range(2):
            term = gbar[a, b] * accel[a] * accel[b]
            q = term if q is None else q + term
    q_val = np.asarray(q.value)
    if np.min(np.abs(q_val)) < FRENET_FLOOR:
        raise NotFrenet("curve acceleration is null or zero")
    alpha = float(np.sign(q_val).ravel()[0])
    kappa_jet = q.sqrt_abs() * beta
    return s, x, T, gbar, gamma, accel, q, kappa_jet, alpha, beta


def frenet(curve: FrenetCurve, s) -> FrenetData:
    """Frenet frame, geodesic curvature and Frenet-Serret residuals at s."""
    s, x, T, gbar, gamma, accel, q, kappa_jet, alpha, beta = _frenet_core(curve, s)
    inv_norm = q.sqrt_abs().reciprocal()
    U = [a * inv_norm for a in accel]
    # residuals: ∇̄_T T − βκU and ∇̄_T U + ακT
    res1 = 0.0
    for k in range(2):
        res1 = np.maximum(res1, np.abs(np.asarray((accel[k] - kappa_jet * U[k] * beta).value)))
    res2 = 0.0
    for k in range(2):
        du = U[k].partial(0)
        for a in range(2):
            for b in range(2):
                du = du + gamma[k, a, b] * T[a] * U[b]
        res2 = np.maximum(res2, np.abs(np.asarray((du + kappa_jet * T[k] * alpha).value)))
    return FrenetData(
        s=s,
        x=np.stack([np.asarray(xi.value) for xi in x], axis=-1),
        T=np.stack([np.asarray(t.value) for t in T], axis=-1),
        U=np.stack([np.asarray(u.value) for u in U], axis=-1),
        kappa=np.asarray(kappa_jet.value),
        alpha=alpha,
        beta=beta,
        frenet_residual=np.maximum(res1, res2),
    )


def h_ii_curve(curve: FrenetCurve, s) -> np.ndarray:
    """The closed formula for H_II along the curve."""
    s, x, T, gbar, gamma, accel, q, kappa_jet, alpha, beta = _frenet_core(curve, s)
    kappa = np.asarray(kappa_jet.value)
    kp = np.asarray(kappa_jet.partial(0).value)
    kpp = np.asarray(kappa_jet.partial(0).partial(0).value)
    x_val = np.stack([np.asarray(xi.value) for xi in x], axis=-1)
    jet = amb.curvature_jet(curve.surface, x_val, order=0)
    gv = jet.metric
    if x_val.ndim > 1:
        det = gv[0, 0] * gv[1, 1] - gv[0, 1] ** 2
        kbar = jet.riem[0, 1, 0, 1] / det
    else:
        kbar = jet.riem[0, 1, 0, 1] / (gv[0, 0] * gv[1, 1] - gv[0, 1] ** 2)
    return 0.5 * (
        -alpha * kbar / kappa
        + kappa
        + (alpha * beta / 4.0) * (2 * kpp / kappa**2 - 3 * kp**2 / kappa**3)
    )


def length_ii(curve: FrenetCurve, a: float, b: float, n_nodes: int = 64) -> float:
    """∫_a^b √|κ| ds by Gauss–Legendre quadrature."""
    if b < a:
        raise BadParameters("need a <= b")
    if b == a:
        return 0.0
    xg, wg = np.polynomial.legendre.leggauss(n_nodes)
    s = 0.5 * (b - a) * (xg + 1.0) + a
    data = frenet(curve, s)
    return float(0.5 * (b - a) * np.sum(wg * np.sqrt(np.abs(data.kappa))))


def ode_residual(kappa, kappa_p, kappa_pp, ambient: str = "planar"):
    """LHS of the II-minimality ODE for curvature samples (pure arithmetic)."""
    kappa = np.asarray(kappa, dtype=float)
    kappa_p = np.asarray(kappa_p, dtype=float)
    kappa_pp = np.asarray(kappa_pp, dtype=float)
    if ambient == "planar":
        return 4 * kappa**4 + 2 * kappa * kappa_pp - 3 * kappa_p**2
    if ambient == "unit_sphere":
        return 4 * kappa**2 - 4 * kappa**4 - 2 * kappa_pp * kappa + 3 * kappa_p**2
    raise BadParameters(f"unknown ambient {ambient!r}")


def catenary_family_kappa(A: float, Q: float, s):
    """κ(s) = A/(A²(s+Q)²+1): the general planar II-minimal curvature."""
    s = np.asarray(s, dtype=float)
    return A / (A**2 * (s + Q) ** 2 + 1.0)


@dataclass
class IIMinimalSolution:
    s: np.ndarray
    kappa: np.ndarray
    kappa_prime: np.ndarray
    halving_error: float
    family_A: Optional[float] = None
    family_Q: Optional[float] = None
    family_max_dev: Optional[float] = None
    phi_third_deriv_max: Optional[float] = None


def _kappa_rhs(kappa, kp, ambient):
    if ambient == "planar":
        return (3 * kp**2 - 4 * kappa**4) / (2 * kappa)
    return (4 * kappa**2 - 4 * kappa**4 + 3 * kp**2) / (2 * kappa)


def _integrate(ambient, k0, kp0, s_max, n_steps):
    h = s_max / n_steps
    out_k = np.empty(n_steps + 1)
    out_kp = np.empty(n_steps + 1)
    k, kp = float(k0), float(kp0)
    out_k[0], out_kp[0] = k, kp
    for i in range(n_steps):
        if not (1e-8 < k < 1e8):
            raise BlowUp(f"curvature left (1e-8, 1e8) at s = {i * h:.4f}")
        a1, b1 = kp, _kappa_rhs(k, kp, ambient)
        a2, b2 = kp + 0.5 * h * b1, _kappa_rhs(k + 0.5 * h * a1, kp + 0.5 * h * b1, ambient)
        a3, b3 = kp + 0.5 * h * b2, _kappa_rhs(k + 0.5 * h * a2, kp + 0.5 * h * b2, ambient)
        a4, b4 = kp + h * b3, _kappa_rhs(k + h * a3, kp + h * b3, ambient)
        k += (h / 6) * (a1 + 2 * a2 + 2 * a3 + a4)
        kp += (h / 6) * (b1 + 2 * b2 + 2 * b3 + b4)
        out_k[i + 1], out_kp[i + 1] = k, kp
    return out_k, out_kp


def integrate_ii_minimal(
    ambient: str, kappa0: float, kappa_prime0: float, s_max: float, n_steps: int = 4096
) -> IIMinimalSolution:
    """Integrate the II-minimality ODE from (κ₀, κ′₀); RK4 with one halving check.

    Planar solutions are cross-checked against the closed two-parameter
    family by a quadratic fit of φ = 1/κ; φ‴ ≈ 0 is reported from finite
    differences as an independent structure check.
    """
    if ambient not in ("planar", "unit_sphere"):
        raise BadParameters(f"unknown ambient {ambient!r}")
    if kappa0 <= 0:
        raise BadParameters("need κ₀ > 0")
    k, kp = _integrate(ambient, kappa0, kappa_prime0, s_max, n_steps)
    k2, _ = _integrate(ambient, kappa0, kappa_prime0, s_max, 2 * n_steps)
    halving = float(np.max(np.abs(k - k2[::2])))
    s = np.linspace(0.0, s_max, n_steps + 1)
    sol = IIMinimalSolution(s=s, kappa=k, kappa_prime=kp, halving_error=halving)
    if ambient == "planar":
        phi = 1.0 / k
        c2, c1, c0 = np.polyfit(s, phi, 2)
        A = c2
        if A > 1e-12:
            Q = c1 / (2 * A)
            dev = np.max(np.abs(catenary_family_kappa(A, Q, s) - k))
            sol.family_A, sol.family_Q, sol.family_max_dev = float(A), float(Q), float(dev)
        # third difference on a coarse stride: at the integrator's raw step
        # width, roundoff divided by h³ would swamp the (exactly zero) signal
        stride = max(1, n_steps // 16)
        ps = phi[::stride]
        h = (s[1] - s[0]) * stride
        phi3 = np.abs(ps[3:] - 3 * ps[2:-1] + 3 * ps[1:-2] - ps[:-3]) / h**3
        sol.phi_third_deriv_max = float(np.max(phi3))
    return sol


# ---------------------------------------------------------------------------
# bundled curves
# ---------------------------------------------------------------------------


def standard_curve(kind: str, **params) -> FrenetCurve:
    """Closed-form test curves: circle_e2, latitude_circle_s2, catenary_e2."""
    desc = {"kind": kind, **params}
    if kind == "circle_e2":
        radius = float(params.get("radius", 1.0))
        if radius <= 0:
            raise BadParameters("radius must be positive")
        chart = amb.flat_chart(2)

        def curve_fn(sj):
            ang = sj * (1.0 / radius)
            return [ang.cos() * radius, ang.sin() * radius]

        return FrenetCurve(chart, curve_fn, 0.0, 2 * math.pi * radius, desc)

    if kind == "latitude_circle_s2":
        theta = float(params.get("colatitude", math.pi / 4))
        if not 0 < theta < math.pi:
            raise BadParameters("colatitude must lie in (0, π)")
        chart = amb.space_form(2, 1.0)
        rc = 2 * math.tan(theta / 2)
        circumference = 2 * math.pi * math.sin(theta)

        def curve_fn(sj):
            ang = sj * (2 * math.pi / circumference)
            return [ang.cos() * rc, ang.sin() * rc]

        return FrenetCurve(chart, curve_fn, 0.0, circumference, desc)

    if kind == "catenary_e2":
        # arclength parametrization of y = cosh x: (asinh s, √(1+s²)),
        # whose curvature is κ(s) = 1/(1+s²)
        chart = amb.flat_chart(2)
        half = float(params.get("half_span", 3.0))

        def curve_fn(sj):
            root = (sj * sj + 1.0).sqrt()
            return [(sj + root).log_abs(), root]

        return FrenetCurve(chart, curve_fn, -half, half, desc)

    if kind == "line_e2":
        chart = amb.flat_chart(2)
        return FrenetCurve(chart, lambda sj: [sj, sj * 0.0], -1.0, 1.0, desc)

    raise BadParameters(f"unknown standard curve kind {kind!r}")


def curve_from_descriptor(desc: dict) -> FrenetCurve:
    desc = dict(desc)
    return standard_curve(desc.pop("kind"), **desc)
