"""Checks for the truncated Taylor arithmetic against finite differences."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from secondform.jets import Jet, compose, jdet, jet_space, jinv, jmatmul, seed_jets


def central_diff(f, x, i, h=1e-5):
    xp, xm = np.array(x, dtype=float), np.array(x, dtype=float)
    xp[i] += h
    xm[i] -= h
    return (f(xp) - f(xm)) / (2 * h)


def sample_fn_jet(u):
    x, y = u
    return (x * y + (x * x * 0.5).sin()) * (1.0 + y * y).reciprocal() + (x + 2.0).log_abs()


def sample_fn_np(u):
    x, y = u
    return (x * y + np.sin(0.5 * x * x)) / (1.0 + y * y) + np.log(np.abs(x + 2.0))


def test_first_derivatives_match_finite_differences():
    base = np.array([0.3, -0.7])
    jets = seed_jets(base, 2, 4)
    out = sample_fn_jet(jets)
    for i in range(2):
        fd = central_diff(sample_fn_np, base, i)
        alpha = tuple(1 if k == i else 0 for k in range(2))
        assert_allclose(out.deriv(alpha), fd, rtol=1e-8)


def test_fourth_derivative_single_variable():
    # f(t) = exp(sin t): d4 at t0 via nested central differences (Richardson-free,
    # large-ish h keeps roundoff at bay; jet value is exact so 1e-4 is plenty).
    t0 = 0.4

    def f(t):
        return np.exp(np.sin(t))

    h = 2e-2
    stencil = sum(
        c * f(t0 + k * h)
        for c, k in [(1, -2), (-4, -1), (6, 0), (-4, 1), (1, 2)]
    ) / h**4
    (t,) = seed_jets(np.array([t0]), 1, 4)
    out = t.sin().exp()
    assert_allclose(out.deriv((4,)), stencil, rtol=5e-3)


def test_batched_matches_scalar():
    pts = np.array([[0.1, 0.2], [0.5, -0.3], [1.2, 0.8]])
    batch = sample_fn_jet(seed_jets(pts, 2, 3))
    for row in range(3):
        single = sample_fn_jet(seed_jets(pts[row], 2, 3))
        assert_allclose(batch.coeffs[:, row], single.coeffs, atol=1e-15)


@given(
    st.floats(min_value=-1.5, max_value=1.5),
    st.floats(min_value=-1.5, max_value=1.5),
    st.floats(min_value=0.2, max_value=2.0),
)
@settings(max_examples=60, deadline=None)
def test_field_axioms_and_inverses(a, b, c):
    jets = seed_jets(np.array([a, b]), 2, 4)
    x, y = jets
    p = x * y + c
    q = x + y * y - 0.5
    assert_allclose(((p * q) * x).coeffs, (p * (q * x)).coeffs, atol=1e-10)
    assert_allclose((p * (q + x)).coeffs, (p * q + p * x).coeffs, atol=1e-10)
    w = p * p + 1.0  # strictly positive value
    assert_allclose((w.log_abs().exp()).coeffs, w.coeffs, atol=1e-8)
    assert_allclose((w.sqrt() * w.sqrt()).coeffs, w.coeffs, atol=1e-8)
    assert_allclose((w * w.reciprocal()).coeffs, Jet.constant(w.space, 1.0).coeffs, atol=1e-8)


def test_trig_identity():
    x, y = seed_jets(np.array([0.7, -0.2]), 2, 4)
    s, co = (x * y).sin(), (x * y).cos()
    one = s * s + co * co
    assert_allclose(one.coeffs, Jet.constant(one.space, 1.0).coeffs, atol=1e-12)


def test_partial_shifts_coefficients():
    x, y = seed_jets(np.array([0.0, 0.0]), 2, 3)
    f = x * x * y  # ∂x = 2xy, ∂x∂y = 2x, ∂x∂x∂y = 2
    fx = f.partial(0)
    assert_allclose(fx.deriv((1, 1)), 2.0)
    assert_allclose(fx.deriv((0, 1)), 0.0)


def test_compose_matches_direct_evaluation():
    # outer polynomial g(v) at v0=0 composed with displacement jets of (u1,u2)
    space_o = jet_space(2, 3)
    rng = np.random.default_rng(0)
    outer = Jet(space_o, rng.normal(size=space_o.n))
    u = seed_jets(np.array([0.4, -0.1]), 2, 3)
    d0 = u[0] * u[0] - 0.16  # zero constant term
    d1 = u[0] * u[1] + 0.04
    composed = compose(outer, [d0, d1])

    def direct(uv):
        a, b = uv
        v0 = a * a - 0.16
        v1 = a * b + 0.04
        total = 0.0
        for k, mono in enumerate(space_o.monomials):
            total += outer.coeffs[k] * v0 ** mono[0] * v1 ** mono[1]
        return total

    for i in range(2):
        assert_allclose(
            composed.deriv(tuple(1 if k == i else 0 for k in range(2))),
            central_diff(direct, [0.4, -0.1], i),
            rtol=1e-7,
        )


def test_jet_matrix_inverse():
    u = seed_jets(np.array([0.2, 0.3]), 2, 3)
    m = np.empty((3, 3), dtype=object)
    vals = [[2.0, 0.1, 0.0], [0.1, 1.5, 0.2], [0.0, 0.2, 1.0]]
    for i in range(3):
        for j in range(3):
            m[i, j] = vals[i][j] + u[0] * u[1] * (0.1 * (i + 1) * (j + 1))
    inv = jinv(m)
    ident = jmatmul(m, inv)
    for i in range(3):
        for j in range(3):
            expect = 1.0 if i == j else 0.0
            assert_allclose(ident[i, j].coeffs, Jet.constant(u[0].space, expect).coeffs, atol=1e-12)
    det = jdet(m)
    numeric = np.linalg.det(np.array([[m[i, j].value for j in range(3)] for i in range(3)]))
    assert_allclose(det.value, numeric, rtol=1e-12)


def test_order_mixing_truncates():
    x, y = seed_jets(np.array([0.1, 0.2]), 2, 4)
    low = (x * y).truncate(2)
    mixed = low * x
    assert mixed.space.order == 2


def test_deriv_out_of_order_raises():
    (x,) = seed_jets(np.array([0.0]), 1, 2)
    with pytest.raises(ValueError):
        x.deriv((3,))
