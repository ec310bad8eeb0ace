import math

import numpy as np
import pytest

from zoda.mirror import EntropySimplex, SquaredL2Ball, argmax_step, make_mirror, range_bound


class TestEntropySimplex:
    def test_zero_state_is_uniform(self):
        np.testing.assert_allclose(argmax_step(EntropySimplex(5), np.zeros(5), 3.0), np.full(5, 0.2))

    def test_softmax_arithmetic(self):
        np.testing.assert_allclose(argmax_step(EntropySimplex(2), np.array([math.log(3), 0.0]), 1.0), [0.75, 0.25])

    @pytest.mark.parametrize("c", [-1e6, 1e6])
    def test_shift_invariance(self, c):
        m = EntropySimplex(6)
        # dyadic entries keep z + c exact in binary64
        z = np.round(np.random.default_rng(0).standard_normal(6) * 1024) / 1024
        np.testing.assert_allclose(m.argmax(z + c, 0.7), m.argmax(z, 0.7), rtol=0, atol=1e-12)

    def test_extreme_state_feasible(self):
        m = EntropySimplex(4)
        x = m.argmax(np.array([1e300, 0.0, -1e300, 5.0]), 1.0)
        assert m.contains(x) and x.min() >= 0.0
        np.testing.assert_array_equal(x, [1.0, 0.0, 0.0, 0.0])

    def test_optimality_certificate(self):
        g = np.random.default_rng(1)
        m = EntropySimplex(7)
        for _ in range(10):
            z, eta = g.standard_normal(7) * 3, float(g.uniform(0.1, 5))
            x = m.argmax(z, eta)
            assert m.contains(x)
            best = eta * z @ x - m.V(x)
            for xp in g.dirichlet(np.ones(7), 100):
                assert best >= eta * z @ xp - m.V(xp) - 1e-9

    def test_range(self):
        assert EntropySimplex(10).R_squared == pytest.approx(2.302585, abs=1e-6)
        assert range_bound(EntropySimplex(3)) == pytest.approx(1.098612, abs=1e-6)
        # sup V - inf V over the simplex is attained at a vertex vs the centre
        m = EntropySimplex(10)
        assert m.V(np.eye(10)[0]) - m.V(np.full(10, 0.1)) <= m.R_squared + 1e-12


class TestSquaredL2Ball:
    def test_clip(self):
        np.testing.assert_allclose(argmax_step(SquaredL2Ball(2), np.array([3.0, 4.0]), 1.0), [0.6, 0.8])

    def test_interior(self):
        np.testing.assert_allclose(SquaredL2Ball(2).argmax(np.array([0.3, -0.1]), 2.0), [0.6, -0.2])

    def test_optimality_and_direction(self):
        g = np.random.default_rng(2)
        m = SquaredL2Ball(5)
        for _ in range(10):
            z, eta = g.standard_normal(5), float(g.uniform(0.05, 3))
            x = m.argmax(z, eta)
            assert m.contains(x)
            k = x @ z / (z @ z)
            assert k > 0
            np.testing.assert_allclose(x, k * z, atol=1e-14)
            best = eta * z @ x - m.V(x)
            pts = g.standard_normal((100, 5))
            pts *= (g.uniform(size=100) ** (1 / 5) / np.linalg.norm(pts, axis=1))[:, None]
            for xp in pts:
                assert best >= eta * z @ xp - m.V(xp) - 1e-9

    def test_range(self):
        assert range_bound(SquaredL2Ball(7)) == 0.5


class TestValidation:
    @pytest.mark.parametrize("z", [np.array([np.nan, 0.0]), np.array([np.inf, 0.0])])
    def test_non_finite(self, z):
        with pytest.raises(ValueError):
            EntropySimplex(2).argmax(z, 1.0)

    def test_eta(self):
        with pytest.raises(ValueError):
            SquaredL2Ball(2).argmax(np.zeros(2), 0.0)

    def test_shape(self):
        with pytest.raises(ValueError):
            SquaredL2Ball(3).argmax(np.zeros(2), 1.0)

    def test_factory(self):
        assert make_mirror("entropy_simplex", 4) == EntropySimplex(4)
        with pytest.raises(ValueError):
            make_mirror("box", 3)

    def test_out_buffer(self):
        out = np.empty(3)
        assert EntropySimplex(3).argmax(np.zeros(3), 1.0, out=out) is out
