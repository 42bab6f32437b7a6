import unittest
import math
import os
import sys

import numpy as np

# Ensure src/ is on sys.path for direct imports without installation
ROOT = os.path.dirname(os.path.dirname(__file__))
SRC = os.path.join(ROOT, "src")
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from nkappa import classify
from nkappa.errors import DomainError
from nkappa.ratfun import BlockDiagFunction, BuiltinFunction, RationalFunction

MINUS_INV_Z = RationalFunction.scalar([-1.0], [0.0, 1.0])
INV_Z = RationalFunction.scalar([1.0], [0.0, 1.0])


class TestRayLimit(unittest.TestCase):
    def test_convergent(self):
        res = classify.ray_limit(lambda y: 2.0 + 1.0 / y)
        self.assertEqual(res.verdict, "convergent")
        self.assertAlmostEqual(res.value, 2.0, places=8)

    def test_divergent(self):
        res = classify.ray_limit(lambda y: y)
        self.assertEqual(res.verdict, "infinite")
        self.assertEqual(res.value, complex(math.inf, 0.0))

    def test_oscillating(self):
        res = classify.ray_limit(lambda y: math.sin(math.log(y)))
        self.assertEqual(res.verdict, "indeterminate")

    def test_extended_directions(self):
        self.assertEqual(classify.extended(-3.0 + 0j), complex(-math.inf, 0.0))
        self.assertTrue(math.isinf(classify.extended(1j).imag))


class TestInfinityType(unittest.TestCase):
    def test_odd_power_is_nonpositive_pole(self):
        V = RationalFunction.scalar([0, 0, 0, 1])
        self.assertEqual(classify.infinity_type(V).label, "gen_pole_nonpos")

    def test_identity_grows(self):
        self.assertEqual(classify.infinity_type(RationalFunction.scalar([0, 1])).label, "improper_growth")

    def test_wrong_sign_residue_is_nonpositive_zero(self):
        self.assertEqual(classify.infinity_type(INV_Z).label, "gen_zero_nonpos")

    def test_herglotz_decay_is_neither(self):
        self.assertEqual(classify.infinity_type(MINUS_INV_Z).label, "neither")


class TestSubclass(unittest.TestCase):
    def test_labels(self):
        self.assertEqual(classify.subclass_of(None, 2), "not_applicable")
        self.assertEqual(classify.subclass_of([], 2), "N0")
        self.assertEqual(classify.subclass_of([np.ones(2)], 2), "N01")
        self.assertEqual(classify.subclass_of([np.ones(1)], 1), "N1")

    def test_partial_subspace(self):
        V = BlockDiagFunction([MINUS_INV_Z, RationalFunction.scalar([0, 1])])
        basis, _ = classify.subspace_B(V)
        self.assertEqual(len(basis), 1)
        self.assertAlmostEqual(abs(basis[0][0]), 1.0, places=10)


class TestClassifyFull(unittest.TestCase):
    def test_example2(self):
        report = classify.classify_full(BuiltinFunction("example2", 1.0, 0.0))
        self.assertEqual(report.kappa.kappa, 1)
        self.assertEqual(report.subclass, "N1")
        self.assertTrue(report.cond_growth)
        self.assertTrue(report.cond_decay_on_B)
        self.assertTrue(report.realizable)

    def test_example1(self):
        report = classify.classify_full(BuiltinFunction("example1"))
        self.assertEqual(report.kappa.kappa, 1)
        self.assertEqual(report.subclass, "N0")

    def test_example1_trace_unbounded(self):
        rows = classify.ray_trace(BuiltinFunction("example1"))
        late = [r for r in rows if r[0] >= 1e4 - 1]
        self.assertTrue(late)
        self.assertGreater(late[0][3], 1e3)

    def test_growth_fails_for_z(self):
        report = classify.classify_full(RationalFunction.scalar([0, 1]))
        self.assertFalse(report.cond_growth)
        self.assertFalse(report.realizable)

    def test_constant_fails_strictness(self):
        report = classify.classify_full(RationalFunction.scalar([3.0]))
        self.assertFalse(report.cond_strict)
        self.assertFalse(report.realizable)

    def test_z_cubed(self):
        report = classify.classify_full(RationalFunction.scalar([0, 0, 0, 1]))
        self.assertEqual(report.kappa.kappa, 1)
        self.assertEqual(report.infinity.label, "gen_pole_nonpos")
        self.assertFalse(report.realizable)

    def test_double_pole_realizable(self):
        report = classify.classify_full(RationalFunction.scalar([-1.0], [0, 0, 1]))
        self.assertEqual(report.kappa.kappa, 1)
        self.assertEqual(report.subclass, "N1")
        self.assertTrue(report.realizable)

    def test_asymmetric_rejected(self):
        with self.assertRaises(DomainError):
            classify.classify_full(RationalFunction.scalar([1j], [0, 1]))

    def test_trace_marks_poles(self):
        rows = classify.ray_trace(MINUS_INV_Z)
        self.assertTrue(all(r[2] is not None for r in rows))
        self.assertAlmostEqual(rows[-1][3], 1.0, places=8)


if __name__ == "__main__":
    unittest.main()
