import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shadowcast import _pykernels, kernels

BACKENDS = kernels.backends()
compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def unit_rows(rng, n):
    v = rng.normal(size=(n, 3))
    v[:, 2] = np.abs(v[:, 2]) + 0.05
    return v / np.linalg.norm(v, axis=1)[:, None]


def test_backend_reported():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@compiled
class TestCompiledMatchesPython:
    cy = BACKENDS.get("cython")

    @given(st.integers(0, 10_000), st.integers(1, 40), st.integers(1, 5), st.floats(1e-4, 20))
    def test_prefix_posteriors(self, seed, n, g, beta):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-50, 50, (n, 3))
        start = pts[0].copy()
        goals = rng.uniform(-50, 50, (g, 3))
        prior = np.log(rng.dirichlet(np.ones(g)))
        a = _pykernels.prefix_posteriors(pts, start, goals, prior, beta)
        b = self.cy.prefix_posteriors(pts, start, goals, prior, beta)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14)

    def test_zero_prior_entry(self):
        pts = np.array([[0.0, 0, 0], [1, 0, 0]])
        goals = np.array([[5.0, 0, 0], [-5.0, 0, 0]])
        prior = np.array([0.0, -np.inf])
        for impl in (_pykernels, self.cy):
            out = impl.prefix_posteriors(pts, pts[0].copy(), goals, prior, 1.0)
            assert np.array_equal(out[:, 1], [0.0, 0.0])

    @given(st.integers(0, 10_000), st.integers(1, 30), st.integers(1, 12))
    def test_polyline_sqdist(self, seed, n, m):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-20, 20, (n, 3))
        poly = rng.uniform(-20, 20, (m, 3))
        a = _pykernels.polyline_sqdist(pts, poly)
        b = self.cy.polyline_sqdist(pts, poly)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_polyline_vertex_exact(self):
        poly = np.array([[0.0, 0, 0], [3.3, 1.7, 0.2], [9.1, -4, 2]])
        for impl in (_pykernels, self.cy):
            assert np.array_equal(impl.polyline_sqdist(poly.copy(), poly), np.zeros(3))

    @given(st.integers(0, 10_000), st.integers(2, 50), st.floats(0.01, 30))
    def test_rate_clamp(self, seed, n, budget):
        rng = np.random.default_rng(seed)
        vecs = unit_rows(rng, n)
        budgets = np.full(n - 1, budget)
        a, ma = _pykernels.rate_clamp(vecs, budgets)
        b, mb = self.cy.rate_clamp(vecs, budgets)
        assert np.array_equal(ma, mb)
        assert np.allclose(a, b, atol=1e-12)

    @given(st.integers(0, 10_000), st.integers(1, 50), st.floats(0.001, 1.0))
    def test_first_order_filter(self, seed, n, gain):
        pts = np.random.default_rng(seed).uniform(-10, 10, (n, 2))
        a = _pykernels.first_order_filter(pts, gain)
        b = self.cy.first_order_filter(pts, gain)
        assert np.allclose(a, b, rtol=0, atol=1e-12)

    @given(st.integers(0, 10_000), st.integers(2, 12), st.integers(2, 120), st.integers(1, 4), st.floats(1e-3, 5))
    def test_knot_legibility(self, seed, m, n, g, beta):
        rng = np.random.default_rng(seed)
        knots = rng.uniform(-30, 30, (m, 3))
        knot_times = np.linspace(0.0, 10.0, m)
        times = np.linspace(0.0, 10.0, n)
        weights = 10.0 - times + 0.1
        goals = rng.uniform(-30, 30, (g, 3))
        prior = np.log(rng.dirichlet(np.ones(g)))
        idx = int(rng.integers(g))
        args = (knot_times, knots, times, weights, knots[0].copy(), goals, prior, beta, idx)
        assert _pykernels.knot_legibility(*args) == pytest.approx(self.cy.knot_legibility(*args), rel=1e-11, abs=1e-13)


@pytest.mark.parametrize("name", sorted(BACKENDS))
class TestEachBackend:
    def test_rate_clamp_respects_budget(self, name):
        impl = BACKENDS[name]
        vecs = unit_rows(np.random.default_rng(1), 40)
        out, mask = impl.rate_clamp(vecs, np.full(39, 2.0))
        steps = np.degrees(np.arccos(np.clip(np.einsum("ij,ij->i", out[1:], out[:-1]), -1, 1)))
        assert np.all(steps <= 2.0 + 1e-6)
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0)
        assert not mask[0]

    def test_filter_identity_at_unit_gain(self, name):
        pts = np.random.default_rng(2).normal(size=(9, 2))
        assert np.array_equal(BACKENDS[name].first_order_filter(pts, 1.0), pts)

    def test_posteriors_sum_to_one(self, name):
        rng = np.random.default_rng(3)
        pts = rng.uniform(-5, 5, (10, 3))
        out = BACKENDS[name].prefix_posteriors(pts, pts[0].copy(), rng.uniform(-5, 5, (3, 3)), np.log(np.full(3, 1 / 3)), 2.0)
        assert np.allclose(out.sum(axis=1), 1.0, atol=1e-12)

    def test_knot_legibility_matches_unfused(self, name):
        impl = BACKENDS[name]
        rng = np.random.default_rng(4)
        knot_times = np.linspace(0.0, 10.0, 6)
        knots = rng.uniform(-10, 10, (6, 3))
        times = np.linspace(0.0, 10.0, 101)
        goals = np.array([[11.5, 0, 5], [-11.5, 0, 5.0]])
        prior = np.log([0.5, 0.5])
        pts = np.column_stack([np.interp(times, knot_times, knots[:, j]) for j in range(3)])
        p = impl.prefix_posteriors(pts, knots[0].copy(), goals, prior, 1.0)[:, 0]
        w = 10.0 - times
        ref = np.sum(0.5 * (p[1:] * w[1:] + p[:-1] * w[:-1]) * 0.1) / np.sum(0.5 * (w[1:] + w[:-1]) * 0.1)
        got = impl.knot_legibility(knot_times, knots, times, w, knots[0].copy(), goals, prior, 1.0, 0)
        assert got == pytest.approx(ref, rel=1e-12)
