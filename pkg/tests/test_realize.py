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

from nkappa import realize
from nkappa.batch import generate_corpus
from nkappa.colligation import (
    example2_block,
    impedance_V,
    minimality_check,
    schur_colligation,
    validate,
)
from nkappa.config import RealizeConfig
from nkappa.errors import (
    ConditioningError,
    DimensionError,
    DomainError,
    UnsupportedRepresentationError,
)
from nkappa.ratfun import BlockDiagFunction, BuiltinFunction, RationalFunction

MINUS_INV_Z = RationalFunction.scalar([-1.0], [0.0, 1.0])
INV_Z = RationalFunction.scalar([1.0], [0.0, 1.0])
MINUS_INV_Z2 = RationalFunction.scalar([-1.0], [0.0, 0.0, 1.0])
MINUS_Z_OVER = RationalFunction.scalar([0, -1], [1, 0, 1])  # -z/(z^2+1)
REFERENCE = (
    (MINUS_INV_Z, 1, 0),
    (INV_Z, 1, 1),
    (MINUS_INV_Z2, 2, 1),
    (MINUS_Z_OVER, 2, 1),
)

POINTS = realize.held_out_points(50, 7)


def max_relative_gap(c1, c2, points):
    worst = 0.0
    for z in points:
        a, b = impedance_V(c1, z), impedance_V(c2, z)
        worst = max(worst, float(np.linalg.norm(a - b) / np.linalg.norm(b)))
    return worst


class TestMcMillanDegree(unittest.TestCase):
    def test_scalar(self):
        self.assertEqual(realize.mcmillan_degree(MINUS_INV_Z), 1)
        self.assertEqual(realize.mcmillan_degree(MINUS_INV_Z2), 2)
        self.assertEqual(realize.mcmillan_degree(MINUS_Z_OVER), 2)

    def test_block_diagonal(self):
        V = BlockDiagFunction([MINUS_INV_Z, RationalFunction.scalar([-1.0], [-1.0, 1.0])])
        self.assertEqual(realize.mcmillan_degree(V), 2)

    def test_not_strictly_proper(self):
        with self.assertRaises(DomainError):
            realize.mcmillan_degree(RationalFunction.scalar([0, 1]))


class TestKernelSpaceRealization(unittest.TestCase):
    def test_reference_functions(self):
        for V, n, kappa in REFERENCE:
            c = realize.realize_rkps(V)
            self.assertEqual(c.n, n)
            self.assertEqual(c.metric.kappa, kappa)
            self.assertTrue(validate(c).passed)
            self.assertTrue(minimality_check(c).minimal)
            for z in POINTS[:10]:
                assert_allclose(impedance_V(c, z), V(z), rtol=1e-8)

    def test_single_pole_at_zero(self):
        for V, kappa in ((MINUS_INV_Z, 0), (INV_Z, 1)):
            history = []
            c = realize.realize_rkps(V, history=history)
            self.assertEqual((c.n, c.metric.kappa), (1, kappa))
            assert_allclose(c.H_R, [[0.0]], atol=1e-10)
            self.assertEqual(len(history), 1)
            self.assertLess(history[0].selfadjoint_residual, 1e-10)
            assert_allclose(impedance_V(c, 2j), V(2j), rtol=1e-10)

    def test_matrix_function(self):
        V = BlockDiagFunction([INV_Z, RationalFunction.scalar([-1.0], [-1.0, 1.0])])
        c = realize.realize_rkps(V)
        self.assertEqual((c.n, c.m), (2, 2))
        self.assertEqual(c.metric.kappa, 1)
        for z in POINTS[:10]:
            assert_allclose(impedance_V(c, z), V(z), atol=1e-8)

    def test_kernel_identity(self):
        c = realize.realize_rkps(MINUS_INV_Z2)
        grid = [complex(x, y) for x in (-3, -1, 0.5, 2, 3.5, 5) for y in (0.5, 1.5, 3, 4, 6, 8)]
        self.assertLess(realize.kernel_identity_residual(MINUS_INV_Z2, c, grid[::6]), 1e-8)
        self.assertLess(realize.kernel_identity_residual(MINUS_INV_Z2, c, grid[:6]), 1e-8)

    def test_rejects_unsupported(self):
        with self.assertRaises(UnsupportedRepresentationError):
            realize.realize_rkps(BuiltinFunction("example2", 1.0, 0.0))
        with self.assertRaises(DomainError):
            realize.realize_rkps(RationalFunction.scalar([2.0]))

    def test_conditioning_failure_keeps_history(self):
        history = []
        with self.assertRaises(ConditioningError) as ctx:
            realize.realize_rkps(MINUS_INV_Z2, RealizeConfig(cond_max=0.5, retries=1), history)
        self.assertEqual(len(history), 2)
        self.assertEqual(len(ctx.exception.history), 2)
        self.assertTrue(all(d.reason for d in history))


class TestPartialFractionRealization(unittest.TestCase):
    def test_wrong_sign_pole(self):
        c = realize.pf_realize(INV_Z)
        assert_allclose(c.metric.gram, [[-1.0]])
        assert_allclose(c.H_R, [[0.0]], atol=1e-14)

    def test_double_pole(self):
        c = realize.pf_realize(MINUS_INV_Z2)
        assert_allclose(c.H_R, [[0, 1], [0, 0]], atol=1e-12)
        assert_allclose(c.K[:, 0], [0, 1], atol=1e-12)
        self.assertEqual(c.metric.kappa, 1)

    def test_conjugate_pair(self):
        c = realize.pf_realize(MINUS_Z_OVER)
        assert_allclose(np.diag(c.H_R), [1j, -1j], atol=1e-10)
        assert_allclose(c.K[:, 0], [1 / np.sqrt(2)] * 2, atol=1e-10)
        self.assertEqual(c.metric.kappa, 1)

    def test_matrix_rejected(self):
        with self.assertRaises(DimensionError):
            realize.pf_realize(BlockDiagFunction([INV_Z, INV_Z]))

    def test_agrees_with_kernel_space_model(self):
        for V, _, _ in REFERENCE:
            self.assertLess(max_relative_gap(realize.pf_realize(V), realize.realize_rkps(V), POINTS), 1e-7)


class TestRoundtrip(unittest.TestCase):
    def test_passes_for_exact_model(self):
        report = realize.roundtrip_verify(MINUS_INV_Z2, realize.realize_rkps(MINUS_INV_Z2), POINTS)
        self.assertTrue(report.passed, report.problems)
        self.assertEqual(report.kernel_kappa, 1)

    def test_negative_control(self):
        report = realize.roundtrip_verify(MINUS_INV_Z, realize.realize_rkps(MINUS_INV_Z2), POINTS)
        self.assertFalse(report.passed)
        self.assertIsNotNone(report.worst_point)
        self.assertGreater(report.max_impedance_error, 1e-3)

    def test_channel_mismatch(self):
        V = BlockDiagFunction([MINUS_INV_Z, MINUS_INV_Z])
        report = realize.roundtrip_verify(V, realize.realize_rkps(MINUS_INV_Z))
        self.assertFalse(report.passed)

    def test_corpus(self):
        for entry in generate_corpus(20, kappas=(0, 1, 2), poles=2, seed=2024):
            V = entry.function
            c = realize.realize_rkps(V)
            self.assertEqual(c.metric.kappa, entry.kappa, entry.name)
            report = realize.roundtrip_verify(V, c, POINTS, tol=1e-6)
            self.assertTrue(report.passed, f"{entry.name}: {report.problems}")
            self.assertLess(max_relative_gap(realize.pf_realize(V), c, POINTS), 1e-7, entry.name)

    def test_quadrature_model_of_example2(self):
        V = BuiltinFunction("example2", 1.0, 0.0)
        c = schur_colligation(example2_block(1.0, 0.0, 200))
        report = realize.roundtrip_verify(V, c, realize.held_out_points(20, 3), tol=1e-6, require_minimal=False)
        self.assertTrue(report.passed, report.problems)
        self.assertEqual(report.metric_kappa, 1)


if __name__ == "__main__":
    unittest.main()
