import math

import numpy as np
import pytest
from conftest import mean_se

from zoda.rng import (
    DirectionStream,
    RngState,
    l1_ball_batch,
    l1_sphere_batch,
    l2_sphere_batch,
    laplace,
    laplace_inverse,
    sample_l1_ball,
    sample_l1_sphere,
    sample_l2_sphere,
)

N = 10**6


class TestRngState:
    def test_same_seed_same_stream(self):
        a, b = RngState(5), RngState(5)
        np.testing.assert_array_equal(a.uniform(1000), b.uniform(1000))

    def test_children_differ(self):
        r = RngState(5)
        assert not np.array_equal(r.child(0).uniform(10), r.child(1).uniform(10))

    def test_child_is_reproducible(self):
        np.testing.assert_array_equal(RngState(1).child(3, 1).uniform(5), RngState(1, (3, 1)).uniform(5))

    def test_uniform_open_interval(self):
        u = RngState(0).uniform(10**6)
        assert u.min() > 0.0 and u.max() < 1.0

    def test_zero_uniforms_are_redrawn(self, monkeypatch):
        r = RngState(0)
        seq = iter([np.array([0.0, 0.25, 0.0]), np.array([0.5, 0.75])])

        class Fake:
            def random(self, size=None):
                return next(seq)

        monkeypatch.setattr(r, "_gen", Fake())
        np.testing.assert_array_equal(r.uniform(3), [0.5, 0.25, 0.75])

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(ValueError):
            RngState(seed)


class TestLaplace:
    @pytest.mark.parametrize(
        "u, expected", [(0.5, 0.0), (0.25, -0.6931471805599453), (0.75, 0.6931471805599453)]
    )
    def test_quantiles(self, u, expected):
        assert laplace_inverse(u) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain(self, u):
        with pytest.raises(ValueError):
            laplace_inverse(u)

    def test_batch_matches_scalar(self, kernel_module):
        u = RngState(3).uniform(1000)
        ref = np.array([laplace_inverse(v) for v in u])
        np.testing.assert_allclose(kernel_module.laplace_inverse_array(u), ref, rtol=0, atol=1e-15)

    def test_moments(self):
        w = laplace(RngState(4), N)
        m, se = mean_se(w)
        assert abs(m) <= 4 * se
        # unit-scale Laplace: E|W| = 1, Var = 2
        assert np.abs(w).mean() == pytest.approx(1.0, abs=0.01)
        assert w.var() == pytest.approx(2.0, abs=0.02)


class TestL1Sphere:
    def test_d1_is_plus_minus_one(self, rng):
        z = l1_sphere_batch(10**5, 1, rng)[:, 0]
        assert set(np.unique(z)) == {-1.0, 1.0}
        frac, se = mean_se(z > 0)
        assert abs(frac - 0.5) <= 3 * se

    @pytest.mark.parametrize("d", [3, 9, 19])
    def test_second_moment(self, d, rng):
        m, se = mean_se((l1_sphere_batch(N, d, rng) ** 2).sum(axis=1))
        assert abs(m - 2.0 / (d + 1)) <= 3 * se

    @pytest.mark.parametrize("d", [2, 5])
    def test_abs_coordinate_mean(self, d, rng):
        m, se = mean_se(np.abs(l1_sphere_batch(N, d, rng)[:, 0]))
        assert abs(m - 1.0 / d) <= 3 * se

    def test_sign_symmetry(self, rng):
        z = l1_sphere_batch(N, 4, rng)
        se = z.std(axis=0, ddof=1) / math.sqrt(N)
        assert np.all(np.abs(z.mean(axis=0)) <= 3 * se)

    def test_on_sphere(self, rng):
        z = l1_sphere_batch(10**5, 7, rng)
        assert np.max(np.abs(np.abs(z).sum(axis=1) - 1.0)) <= 1e-12

    def test_sample_signs(self, rng):
        for _ in range(50):
            s = sample_l1_sphere(6, rng)
            assert abs(np.abs(s.zeta).sum() - 1.0) <= 1e-12
            np.testing.assert_array_equal(s.signs, np.where(s.zeta >= 0, 1, -1))
            assert s.signs.dtype == np.int8 and s.d == 6

    def test_determinism(self):
        a = [sample_l1_sphere(5, r).zeta for r in [RngState(11)] for _ in range(20)]
        b = [sample_l1_sphere(5, r).zeta for r in [RngState(11)] for _ in range(20)]
        np.testing.assert_array_equal(a, b)


class TestL1Ball:
    def test_inside(self, rng):
        u = l1_ball_batch(10**5, 5, rng)
        assert np.abs(u).sum(axis=1).max() < 1.0

    def test_mean_norm_d4(self, rng):
        m, se = mean_se(np.abs(l1_ball_batch(N, 4, rng)).sum(axis=1))
        assert abs(m - 0.8) <= 3 * se
        assert m <= 0.8 + 3 * se

    def test_dirichlet_oracle(self):
        # independent construction: radius ~ Beta(d, 1), direction Dirichlet with random signs
        g = np.random.default_rng(2)
        d = 4
        r = g.beta(d, 1, N)
        u = r[:, None] * g.dirichlet(np.ones(d), N) * g.choice([-1.0, 1.0], (N, d))
        m, se = mean_se(np.abs(u).sum(axis=1))
        assert abs(m - 0.8) <= 3 * se
        ours = np.abs(l1_ball_batch(N, d, RngState(9))).sum(axis=1)
        # compare the radial law by quantiles
        np.testing.assert_allclose(np.quantile(ours, [0.1, 0.5, 0.9]), np.quantile(np.abs(u).sum(axis=1), [0.1, 0.5, 0.9]), atol=3e-3)

    def test_single(self, rng):
        assert sample_l1_ball(3, rng).shape == (3,)


class TestL2Sphere:
    def test_unit_norm(self, rng):
        z = l2_sphere_batch(10**4, 6, rng)
        np.testing.assert_allclose(np.sqrt((z * z).sum(axis=1)), 1.0, atol=1e-12)

    def test_d2_mean_zero(self, rng):
        m, se = mean_se(l2_sphere_batch(N, 2, rng)[:, 0])
        assert abs(m) <= 3 * se

    @pytest.mark.parametrize("d", [3, 8])
    def test_square_coordinate(self, d, rng):
        m, se = mean_se(l2_sphere_batch(N, d, rng)[:, 0] ** 2)
        assert abs(m - 1.0 / d) <= 3 * se

    def test_single(self, rng):
        assert sample_l2_sphere(4, rng).shape == (4,)


class TestDirectionStream:
    def test_matches_batch(self):
        s = DirectionStream("l1", 4, RngState(1), block=8)
        got = np.array([s.next()[0] for _ in range(20)])
        r = RngState(1)
        ref = np.concatenate([l1_sphere_batch(8, 4, r) for _ in range(3)])[:20]
        np.testing.assert_array_equal(got, ref)

    def test_l2_has_no_signs(self):
        z, s = DirectionStream("l2", 3, RngState(1)).next()
        assert s is None and z.shape == (3,)

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            DirectionStream("l3", 3, RngState(1))

    @pytest.mark.parametrize("d", [0, -1, 2.5])
    def test_bad_dimension(self, d, rng):
        with pytest.raises(ValueError):
            l1_sphere_batch(1, d, rng)
