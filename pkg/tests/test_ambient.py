"""Ambient charts: Christoffel symbols, curvature jets, geodesics.

The space-form identity R_{ijkl} = C̄(g_ik g_jl − g_il g_jk) and the
product-metric block structure serve as independent oracles for the whole
curvature stack; Christoffel symbols get a central-difference oracle.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from secondform.ambient import (
    chart_from_descriptor,
    christoffel,
    curvature_jet,
    flat_chart,
    geodesic,
    metric_value,
    orthonormal_frame,
    product_chart,
    registry_chart,
    space_form,
)
from secondform.errors import (
    BadDirection,
    LeftDomain,
    OutOfDomain,
    UnsupportedSignature,
)


def christoffel_fd_oracle(chart, x, h=1e-4):
    """Γ from Richardson-extrapolated central differences of the metric."""
    d = chart.dim

    def dmetric(i, step):
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        return (metric_value(chart, xp) - metric_value(chart, xm)) / (2 * step)

    dg = np.empty((d, d, d))
    for i in range(d):
        coarse, fine = dmetric(i, h), dmetric(i, h / 2)
        dg[i] = (4 * fine - coarse) / 3
    ginv = np.linalg.inv(metric_value(chart, x))
    gamma = np.empty((d, d, d))
    for k in range(d):
        for i in range(d):
            for j in range(d):
                gamma[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[i][l, j] + dg[j][l, i] - dg[l][i, j]) for l in range(d)
                )
    return gamma


def space_form_riem_oracle(cbar, g):
    return cbar * (np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g))


class TestChristoffel:
    def test_euclidean_vanishes(self):
        chart = flat_chart(3)
        assert_allclose(christoffel(chart, np.array([0.3, -1.0, 2.0])), 0.0, atol=1e-15)

    def test_sphere_chart_origin_vanishes(self):
        chart = space_form(4, 1.0)
        assert_allclose(christoffel(chart, np.zeros(4)), 0.0, atol=1e-14)

    def test_matches_central_differences(self):
        chart = space_form(4, 1.0)
        x = np.array([0.1, 0.0, 0.0, 0.0])
        assert_allclose(christoffel(chart, x), christoffel_fd_oracle(chart, x), atol=1e-7)

    def test_bumpy_chart_matches_central_differences(self):
        chart = registry_chart("bumpy_e3")
        x = np.array([0.2, -0.4, 0.1])
        assert_allclose(christoffel(chart, x), christoffel_fd_oracle(chart, x), atol=1e-7)

    def test_closed_form_gamma_agrees_with_metric_derived(self):
        from secondform.jets import seed_jets
        from secondform.ambient import _values

        for chart in (space_form(3, 1.0), space_form(3, -1.0), registry_chart("bumpy_e3")):
            x = np.array([0.2, -0.1, 0.3])
            jets = seed_jets(x, chart.dim, 0)
            closed = _values(np.asarray(chart.christoffel_jets_fn(jets), dtype=object))
            assert_allclose(closed, christoffel(chart, x), atol=1e-11)

    def test_out_of_domain(self):
        chart = space_form(3, -1.0)
        with pytest.raises(OutOfDomain):
            christoffel(chart, np.array([5.0, 0.0, 0.0]))


class TestCurvatureJet:
    def test_euclidean_all_zero(self):
        jet = curvature_jet(flat_chart(3), np.array([0.5, 0.5, -0.2]), order=2)
        for fld in (jet.riem, jet.ricci, jet.nabla_riem, jet.nabla2_riem, jet.hess_scalar):
            assert_allclose(fld, 0.0, atol=1e-13)
        assert_allclose(jet.scalar, 0.0, atol=1e-13)

    def test_unit_s3_space_form_values(self):
        chart = space_form(3, 1.0)
        jet = curvature_jet(chart, np.zeros(3), order=2)
        assert_allclose(jet.riem, space_form_riem_oracle(1.0, jet.metric), atol=1e-10)
        assert_allclose(jet.ricci, 2.0 * jet.metric, atol=1e-10)
        assert_allclose(jet.scalar, 6.0, atol=1e-10)
        # orthonormal sectional curvature K = R(e0,e1,e0,e1) = +1
        assert_allclose(jet.riem[0, 1, 0, 1], 1.0, atol=1e-10)

    def test_unit_s4_scalar(self):
        jet = curvature_jet(space_form(4, 1.0), np.zeros(4), order=0)
        assert_allclose(jet.scalar, 12.0, atol=1e-9)

    def test_space_form_identity_random_points(self):
        rng = np.random.default_rng(7)
        for cbar, index in [(1.0, 0), (-1.0, 0), (1.0, 1)]:
            chart = space_form(3, cbar, index)
            for _ in range(10):
                x = rng.uniform(-0.3, 0.3, size=3)
                jet = curvature_jet(chart, x, order=1)
                assert_allclose(jet.riem, space_form_riem_oracle(cbar, jet.metric), atol=1e-8)
                assert np.max(np.abs(jet.nabla_riem)) < 1e-7

    def test_de_sitter_sectional_curvature(self):
        chart = space_form(3, 1.0, index=1)
        jet = curvature_jet(chart, np.array([0.05, 0.1, -0.08]), order=0)
        g = jet.metric
        rng = np.random.default_rng(3)
        for _ in range(5):
            x, y = rng.normal(size=3), rng.normal(size=3)
            denom = (x @ g @ x) * (y @ g @ y) - (x @ g @ y) ** 2
            if abs(denom) < 1e-3:
                continue
            k = np.einsum("ijkl,i,j,k,l->", jet.riem, x, y, x, y) / denom
            assert_allclose(k, 1.0, atol=1e-8)

    def test_product_s2_s2(self):
        s2 = space_form(2, 1.0)
        chart = product_chart(s2, s2)
        jet = curvature_jet(chart, np.array([0.1, 0.05, -0.1, 0.2]), order=0)
        assert_allclose(jet.scalar, 4.0, atol=1e-9)
        # mixed-plane curvature components vanish
        assert_allclose(jet.riem[0, 2], 0.0, atol=1e-10)
        assert_allclose(jet.riem[1, 3], 0.0, atol=1e-10)
        # Ricci eigenvalues relative to the metric are all 1
        evals = np.linalg.eigvals(np.linalg.solve(jet.metric, jet.ricci))
        assert_allclose(np.sort(evals.real), 1.0, atol=1e-9)

    def test_product_s2_e2(self):
        chart = product_chart(space_form(2, 1.0), flat_chart(2))
        jet = curvature_jet(chart, np.array([0.1, 0.0, 3.0, -2.0]), order=0)
        assert_allclose(jet.scalar, 2.0, atol=1e-9)
        s2_jet = curvature_jet(space_form(2, 1.0), np.array([0.1, 0.0]), order=0)
        assert_allclose(np.sum(jet.riem**2), np.sum(s2_jet.riem**2), atol=1e-9)

    def test_curvature_jet_invariants_on_bumpy_chart(self):
        chart = registry_chart("bumpy_e3")
        jet = curvature_jet(chart, np.array([0.3, -0.2, 0.5]), order=2)
        r = jet.riem
        assert_allclose(r, -np.swapaxes(r, 0, 1), atol=1e-9)
        assert_allclose(r, -np.swapaxes(r, 2, 3), atol=1e-9)
        assert_allclose(r, np.einsum("klij->ijkl", r), atol=1e-9)
        bianchi1 = r + np.einsum("jkil->ijkl", r) + np.einsum("kijl->ijkl", r)
        assert np.max(np.abs(bianchi1)) < 1e-9
        assert_allclose(jet.ricci, jet.ricci.T, atol=1e-10)
        assert_allclose(jet.hess_scalar, jet.hess_scalar.T, atol=1e-10)
        assert_allclose(np.einsum("ij,ij->", jet.metric_inv, jet.ricci), jet.scalar, atol=1e-10)
        # contracted second Bianchi: 2 div Ric = ∇S
        div_ric = 2.0 * np.einsum("ab,abj->j", jet.metric_inv, jet.nabla_ricci)
        assert_allclose(div_ric, jet.grad_scalar, atol=1e-8)

    def test_taylor_matches_nested_central_differences(self):
        # second metric derivative of the bumpy chart vs nested differences
        from secondform.jets import seed_jets
        from secondform.ambient import metric_jets

        chart = registry_chart("bumpy_e3")
        x = np.array([0.25, -0.15, 0.05])
        jets = seed_jets(x, 3, 4)
        g = metric_jets(chart, jets)
        h = 1e-3

        def g00(pt):
            return metric_value(chart, pt)[0, 0]

        for i in range(3):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            fd2 = (g00(xp) - 2 * g00(x) + g00(xm)) / h**2
            alpha = tuple(2 if k == i else 0 for k in range(3))
            assert_allclose(g[0, 0].deriv(alpha), fd2, rtol=1e-6, atol=1e-9)


class TestGeodesic:
    def test_euclidean_straight_line(self):
        chart = flat_chart(4)
        end = geodesic(chart, np.zeros(4), np.array([1.0, 0, 0, 0]), 0.7)
        assert_allclose(end, [0.7, 0, 0, 0], atol=1e-15)

    def test_zero_arclength_returns_start(self):
        chart = space_form(3, 1.0)
        n = np.array([0.1, 0.2, 0.0])
        assert_allclose(geodesic(chart, n, _unit(chart, n, [1.0, 0, 0]), 0.0), n)

    def test_great_circle_oracle_unit_s3(self):
        chart = space_form(3, 1.0)
        rng = np.random.default_rng(5)
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)  # metric at origin is identity
        r = 0.5
        end = geodesic(chart, np.zeros(3), v, r, n_steps=256)
        assert_allclose(end, 2 * math.tan(r / 2) * v, atol=1e-10)

    def test_flow_property(self):
        chart = space_form(3, 1.0)
        n = np.array([0.2, -0.1, 0.05])
        v = _unit(chart, n, [0.3, 1.0, -0.2])
        r1, r2 = 0.3, 0.45
        direct = geodesic(chart, n, v, r1 + r2, n_steps=512)
        mid = geodesic(chart, n, v, r1, n_steps=512)
        # restart: velocity at the midpoint via the integrator
        from secondform.ambient import exp_map
        from secondform.jets import Jet, jet_space

        sp = jet_space(1, 0)
        x0 = [Jet.constant(sp, n[i]) for i in range(3)]
        w = [Jet.constant(sp, r1 * v[i]) for i in range(3)]
        xs, vs = exp_map(chart, x0, w, n_steps=512)
        v_mid = np.array([float(j.value) for j in vs]) / r1
        restarted = geodesic(chart, mid, v_mid, r2, n_steps=512)
        assert_allclose(direct, restarted, atol=1e-7)

    def test_non_unit_vector_rejected(self):
        chart = flat_chart(3)
        with pytest.raises(BadDirection):
            geodesic(chart, np.zeros(3), np.array([2.0, 0, 0]), 1.0)

    def test_leaves_domain(self):
        chart = space_form(2, 1.0)
        with pytest.raises(LeftDomain):
            geodesic(chart, np.zeros(2), np.array([1.0, 0.0]), 3.13)


class TestConstructorsAndDescriptors:
    def test_space_form_signature_guard(self):
        with pytest.raises(UnsupportedSignature):
            space_form(4, 1.0, index=2)

    def test_product_requires_riemannian(self):
        with pytest.raises(UnsupportedSignature):
            product_chart(space_form(2, 1.0, index=1), flat_chart(2))

    def test_descriptor_roundtrip(self):
        for chart in (
            space_form(4, 1.0),
            product_chart(space_form(2, 1.0), space_form(2, 1.0)),
            registry_chart("bumpy_e3"),
        ):
            rebuilt = chart_from_descriptor(chart.descriptor)
            x = np.zeros(chart.dim) + 0.05
            assert_allclose(metric_value(rebuilt, x), metric_value(chart, x), atol=1e-15)

    def test_metric_symmetry_and_signature(self):
        rng = np.random.default_rng(11)
        for chart, idx in [(space_form(4, 1.0), 0), (space_form(3, 1.0, 1), 1), (space_form(3, -1.0), 0)]:
            for _ in range(4):
                x = rng.uniform(-0.2, 0.2, size=chart.dim)
                g = metric_value(chart, x)
                assert np.max(np.abs(g - g.T)) < 1e-14
                assert int(np.sum(np.linalg.eigvalsh(g) < 0)) == idx


def _unit(chart, x, v):
    v = np.asarray(v, dtype=float)
    g = metric_value(chart, x)
    return v / math.sqrt(abs(v @ g @ v))


def test_orthonormal_frame_with_prescribed_direction():
    chart = space_form(3, 1.0)
    x = np.array([0.2, 0.1, -0.3])
    g = metric_value(chart, x)
    e0 = _unit(chart, x, [0.3, -1.0, 0.5])
    frame = orthonormal_frame(g, e0)
    gram = frame @ g @ frame.T
    assert_allclose(gram, np.eye(3), atol=1e-12)
    assert_allclose(frame[0], e0)


def test_insufficient_smoothness_guard():
    import dataclasses

    import pytest as _pytest

    from secondform.errors import InsufficientSmoothness

    chart = dataclasses.replace(space_form(3, 1.0), max_taylor_order=3)
    with _pytest.raises(InsufficientSmoothness):
        curvature_jet(chart, np.zeros(3), order=2)
    curvature_jet(chart, np.zeros(3), order=1)  # within the declared order


def test_taylor_derivatives_match_fd_on_all_model_charts():
    # first and second metric derivatives vs central differences, 5 random
    # points per model chart
    from secondform.ambient import metric_jets
    from secondform.jets import seed_jets

    rng = np.random.default_rng(123)
    charts = [
        space_form(3, 1.0),
        space_form(3, -1.0),
        space_form(3, 1.0, index=1),
        product_chart(space_form(2, 1.0), flat_chart(2)),
        registry_chart("bumpy_e3"),
    ]
    for chart in charts:
        for _ in range(5):
            x = rng.uniform(-0.25, 0.25, size=chart.dim)
            jets = seed_jets(x, chart.dim, 2)
            g = metric_jets(chart, jets)
            h = 1e-4
            for i in range(chart.dim):
                xp, xm = x.copy(), x.copy()
                xp[i] += h
                xm[i] -= h
                gp, gm = metric_value(chart, xp), metric_value(chart, xm)
                fd1 = (gp - gm) / (2 * h)
                fd2 = (gp - 2 * metric_value(chart, x) + gm) / h**2
                alpha1 = tuple(1 if k == i else 0 for k in range(chart.dim))
                alpha2 = tuple(2 if k == i else 0 for k in range(chart.dim))
                for a in range(chart.dim):
                    for b in range(chart.dim):
                        assert abs(g[a, b].deriv(alpha1) - fd1[a, b]) < 1e-6 * (1 + abs(fd1[a, b]))
                        assert abs(g[a, b].deriv(alpha2) - fd2[a, b]) < 1e-4 * (1 + abs(fd2[a, b]))


def test_triple_product_chart():
    s2 = space_form(2, 1.0)
    chart = product_chart(product_chart(s2, s2), s2)
    assert chart.dim == 6
    assert len(chart.product_factors) == 3
    jet = curvature_jet(chart, 0.03 * np.ones(6), order=0)
    assert_allclose(jet.scalar, 6.0, atol=1e-9)


def test_hyperbolic_geodesic_closed_form():
    chart = space_form(3, -1.0)
    v = np.array([0.0, 1.0, 0.0])
    r = 0.8
    end = geodesic(chart, np.zeros(3), v, r, n_steps=256)
    assert_allclose(end, 2 * np.tanh(r / 2) * v, atol=1e-10)


def test_geodesic_default_arguments_with_halving_check():
    chart = space_form(3, 1.0)
    v = np.array([0.6, -0.8, 0.0])  # unit at the origin
    end = geodesic(chart, np.zeros(3), v, 0.5)  # default 1024 steps + halving
    assert_allclose(end, 2 * math.tan(0.25) * v, atol=1e-10)
