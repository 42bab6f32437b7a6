import unittest
import os
import sys

import numpy as np
from numpy.testing import assert_allclose

# Ensure src/ is on sys.path for direct imports without installation
ROOT = os.path.dirname(os.path.dirname(__file__))
SRC = os.path.join(ROOT, "src")
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from nkappa import colligation
from nkappa.colligation import Colligation
from nkappa.errors import DimensionError, DomainError, ResolventError
from nkappa.indefinite import well_conditioned
from nkappa.ratfun import example2_value


def minus_inv_z_model():
    # H = i, K = 1: H_R = 0 and V(z) = -1/z
    return Colligation([[1.0]], [[1j]], [[1.0]])


def random_points(rng, count):
    return [complex(x, y) for x, y in zip(rng.uniform(-3, 3, count), rng.uniform(0.5, 3, count))]


class TestColligation(unittest.TestCase):
    def test_validate(self):
        report = colligation.validate(minus_inv_z_model())
        self.assertTrue(report.passed)
        self.assertEqual(report.metric_kappa, 0)
        broken = Colligation([[1.0]], [[2j]], [[1.0]])
        self.assertFalse(colligation.validate(broken).passed)

    def test_impedance_and_transfer(self):
        c = minus_inv_z_model()
        for z in (2j, 0.5 + 2j, -3 + 0.1j):
            assert_allclose(colligation.impedance_V(c, z), [[-1 / z]], atol=1e-12)
            assert_allclose(colligation.transfer_W(c, z), [[(z + 1j) / (z - 1j)]], atol=1e-12)

    def test_resolvent_error(self):
        with self.assertRaises(ResolventError):
            colligation.impedance_V(minus_inv_z_model(), 0.0)

    def test_shape_checks(self):
        with self.assertRaises(DimensionError):
            Colligation(np.eye(2), np.eye(3), np.ones((2, 1)))
        with self.assertRaises(DimensionError):
            Colligation(np.eye(2), np.eye(2), np.ones((3, 1)))

    def test_impedance_form(self):
        c = Colligation.from_impedance_form([[1.0]], [[0.0]], [[1.0]])
        assert_allclose(c.H_full, [[1j]])
        assert_allclose(c.H_R, [[0.0]], atol=1e-15)

    def test_cayley_on_random_systems(self):
        rng = np.random.default_rng(21)
        for trial in range(20):
            n = int(rng.integers(1, 9))
            kappa = int(rng.integers(0, min(3, n) + 1))
            m = int(rng.integers(1, 3))
            c = colligation.random_colligation(n, m, kappa, rng)
            self.assertTrue(colligation.validate(c).passed)
            self.assertEqual(c.metric.kappa, kappa)
            for z in random_points(rng, 5):
                try:
                    self.assertLess(colligation.cayley(c, z), 1e-8)
                except ResolventError:
                    continue

    def test_congruence_keeps_impedance(self):
        rng = np.random.default_rng(4)
        c = colligation.random_colligation(5, 2, 2, rng, mix=False)
        d = c.congruent(well_conditioned(5, rng))
        self.assertTrue(colligation.validate(d).passed)
        for z in random_points(rng, 4):
            assert_allclose(colligation.impedance_V(d, z), colligation.impedance_V(c, z), atol=1e-9)

    def test_direct_sum_needs_equal_channels(self):
        rng = np.random.default_rng(9)
        a = colligation.random_colligation(2, 1, 0, rng)
        b = colligation.random_colligation(2, 2, 0, rng)
        with self.assertRaises(DimensionError):
            a.direct_sum(b)


class TestMinimality(unittest.TestCase):
    def test_minimal_model(self):
        self.assertTrue(colligation.minimality_check(minus_inv_z_model()).minimal)

    def test_uncoupled_state(self):
        spare = Colligation([[1.0]], [[2.0]], [[0.0]])
        c = minus_inv_z_model().direct_sum(spare)
        rep = colligation.minimality_check(c)
        self.assertFalse(rep.minimal)
        self.assertEqual(rep.rank, 1)
        assert_allclose(colligation.impedance_V(c, 1j), [[1j]], atol=1e-12)

    def test_w_kernel_inertia(self):
        c = minus_inv_z_model()
        G, inr = colligation.w_kernel_gram(c, [2j, 0.5 + 2j, -1 + 0.7j])
        assert_allclose(G, G.conj().T)
        self.assertEqual(inr.n_minus, 0)
        self.assertEqual(inr.n_plus, 1)

    def test_w_kernel_sees_negative_square(self):
        rng = np.random.default_rng(2)
        c = colligation.random_colligation(3, 1, 1, rng)
        _, inr = colligation.w_kernel_gram(c, random_points(rng, 6))
        self.assertEqual(inr.n_minus, 1)


class TestSchur(unittest.TestCase):
    def test_against_direct_inverse(self):
        rng = np.random.default_rng(33)
        for trial in range(50):
            n0 = int(rng.integers(1, 30))
            p = int(rng.integers(1, 11))
            X = rng.standard_normal((n0, n0))
            A0 = 0.5 * (X + X.T)
            B = rng.standard_normal((p, n0)) + 1j * rng.standard_normal((p, n0))
            Y = rng.standard_normal((p, p))
            block, _ = colligation.schur_build(A0, B, 0.5 * (Y + Y.T))
            z = complex(rng.uniform(-2, 2), rng.uniform(0.2, 2))
            (R11, R12), (R21, R22) = colligation.schur_resolvent(block, z)
            R = np.block([[R11, R12], [R21, R22]])
            direct = np.linalg.inv(block.T() - z * np.eye(n0 + p))
            self.assertLess(np.linalg.norm(R - direct) / np.linalg.norm(direct), 1e-10)

    def test_hermitian_operands_required(self):
        with self.assertRaises(DomainError):
            colligation.schur_build([[0, 1], [2, 0]], np.ones((1, 2)), [[0.0]])

    def test_example2_quadrature_model(self):
        block = colligation.example2_block(1.0, 0.0, 200)
        c = colligation.schur_colligation(block)
        self.assertEqual(c.metric.kappa, 1)
        self.assertTrue(colligation.validate(c).passed)
        model = colligation.impedance_V(c, 2j)[0, 0]
        self.assertLessEqual(abs(model - example2_value(2j, 1.0, 0.0)), 1e-8)

    def test_impedance_callable(self):
        _, V = colligation.schur_build([[0.0]], [[1.0]], [[0.0]])
        # V(z) = -1 / (1/(0 - z) - z) = z / (1 + z^2)
        z = 0.3 + 0.8j
        assert_allclose(V(z), [[z / (1 + z * z)]], atol=1e-12)


if __name__ == "__main__":
    unittest.main()
