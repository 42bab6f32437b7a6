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

from nkappa import ratfun
from nkappa.errors import DomainError, PoleError, UnsupportedRepresentationError
from nkappa.ratfun import (
    BlockDiagFunction,
    BuiltinFunction,
    ComplexPolynomial,
    RationalEntry,
    RationalFunction,
)


def minus_inv_z():
    return RationalFunction.scalar([-1.0], [0.0, 1.0])


class TestPolynomials(unittest.TestCase):
    def test_roots_of_z2_plus_1(self):
        roots = ratfun.poly_roots(ComplexPolynomial([1, 0, 1]))
        self.assertEqual([k for _, k in roots], [1, 1])
        assert_allclose([r for r, _ in roots], [-1j, 1j], atol=1e-12)

    def test_roots_of_z(self):
        roots = ratfun.poly_roots(ratfun.Z)
        self.assertEqual(len(roots), 1)
        self.assertAlmostEqual(abs(roots[0][0]), 0.0, places=12)

    def test_triple_root(self):
        roots = ratfun.poly_roots(ComplexPolynomial([-1, 3, -3, 1]))
        self.assertEqual(len(roots), 1)
        r, k = roots[0]
        self.assertEqual(k, 3)
        self.assertAlmostEqual(abs(r - 1), 0.0, places=8)

    def test_roots_reconstruct(self):
        rng = np.random.default_rng(7)
        c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        p = ComplexPolynomial(c)
        rebuilt = ComplexPolynomial.from_roots(ratfun.root_list(p), p.lead)
        self.assertTrue(rebuilt.allclose(p, 1e-10))

    def test_zero_polynomial_has_no_roots(self):
        with self.assertRaises(DomainError):
            ratfun.poly_roots(ratfun.ZERO)

    def test_trailing_zeros_trimmed(self):
        p = ComplexPolynomial([1, 2, 0, 0])
        self.assertEqual(p.degree, 1)
        self.assertTrue(ratfun.ZERO.is_zero)

    def test_sharp_is_involution(self):
        p = ComplexPolynomial([1 + 2j, -3j, 0.5])
        self.assertTrue(p.sharp().sharp().allclose(p))
        self.assertAlmostEqual(p.sharp()(0.3 + 0.2j), np.conj(p(0.3 - 0.2j)))


class TestRational(unittest.TestCase):
    def test_reduce_common_factor(self):
        e = RationalEntry.make([-1, 0, 1], [-1, 1])  # (z^2 - 1)/(z - 1)
        self.assertEqual(e.den.degree, 0)
        assert_allclose(e.num.coeffs, [1, 1], atol=1e-10)

    def test_denominator_is_monic(self):
        e = RationalEntry.make([2.0], [0.0, 4.0])
        assert_allclose(e.den.coeffs, [0, 1])
        assert_allclose(e.num.coeffs, [0.5])

    def test_eval_and_pole(self):
        V = minus_inv_z()
        assert_allclose(ratfun.evaluate(V, 2j), [[0.5j]])
        with self.assertRaises(PoleError) as ctx:
            V(0.0)
        self.assertEqual(ctx.exception.location, 0.0)

    def test_derivative(self):
        V = minus_inv_z()
        assert_allclose(ratfun.derivative_eval(V, 1j), [[1 / (1j) ** 2]], atol=1e-12)

    def test_symmetry(self):
        self.assertTrue(ratfun.symmetry_check(minus_inv_z()))
        self.assertFalse(ratfun.symmetry_check(RationalFunction.scalar([1j], [0, 1])))

    def test_blockdiag_eval(self):
        V = BlockDiagFunction([minus_inv_z(), RationalFunction.scalar([1.0], [-1.0, 1.0])])
        assert_allclose(V(2j), np.diag([0.5j, 1 / (2j - 1)]))
        self.assertEqual(V.dim, 2)
        self.assertTrue(V.is_rational)
        assert_allclose(V.to_rational()(1 + 1j), V(1 + 1j))

    def test_laurent_at_infinity(self):
        # z^2 / (z - 1) = z + 1 + 1/z + 1/z^2 + ...
        V = RationalFunction.scalar([0, 0, 1], [-1, 1])
        L = ratfun.laurent_at_infinity(V, order=3)
        self.assertEqual(L.polynomial_degree, 1)
        assert_allclose(L.poly[1], [[1]])
        assert_allclose(L.tail[:, 0, 0], [1, 1, 1, 1], atol=1e-12)
        z = 40 + 30j
        self.assertLess(abs(L.evaluate(z)[0, 0] - V(z)[0, 0]), 1e-5)

    def test_laurent_needs_rational(self):
        with self.assertRaises(UnsupportedRepresentationError):
            ratfun.laurent_at_infinity(BuiltinFunction("example1"))

    def test_partial_fractions_double_pole(self):
        parts = ratfun.partial_fractions(RationalFunction.scalar([-1.0], [0, 0, 1]))
        self.assertEqual(len(parts), 1)
        self.assertEqual(parts[0].order, 2)
        assert_allclose(parts[0].coeffs[:, 0, 0], [0, -1], atol=1e-12)

    def test_partial_fractions_reconstruct(self):
        V = RationalFunction.scalar([0, -1], [1, 0, 1])  # -z/(z^2+1)
        parts = ratfun.partial_fractions(V)
        self.assertEqual(len(parts), 2)
        z = 0.4 + 0.9j
        total = sum(p.evaluate(z) for p in parts)
        assert_allclose(total, V(z), atol=1e-12)
        for p in parts:
            assert_allclose(p.coeffs[0, 0, 0], -0.5, atol=1e-12)

    def test_partial_fractions_needs_strictly_proper(self):
        with self.assertRaises(DomainError):
            ratfun.partial_fractions(RationalFunction.scalar([0, 1]))


class TestExamples(unittest.TestCase):
    def test_example2_branch(self):
        z = 0.3 + 0.5j
        self.assertGreater(ratfun.sqrt_z2m1(z).imag, 0)
        self.assertAlmostEqual(ratfun.sqrt_z2m1(1e6j) / 1e6j, 1.0, places=6)

    def test_example2_value(self):
        V = BuiltinFunction("example2", 1.0, 0.0)
        assert_allclose(ratfun.evaluate(V, 2j), [[-1j * (3 + np.sqrt(5)) / 8]], atol=1e-14)
        self.assertAlmostEqual(V(-2j)[0, 0], np.conj(V(2j)[0, 0]))

    def test_example2_cut_is_a_pole(self):
        with self.assertRaises(PoleError):
            BuiltinFunction("example2", 1.0, 0.0)(0.5)

    def test_example2_needs_gamma(self):
        with self.assertRaises(DomainError):
            BuiltinFunction("example2", 0.0, 0.0)

    def test_unknown_builtin(self):
        with self.assertRaises(DomainError):
            BuiltinFunction("example3")

    def test_example2_pole(self):
        for gamma, d in ((1.0, 0.0), (1.0, 0.5), (2.0, 1.0)):
            expected = ratfun.example2_pole(gamma, d)
            V = BuiltinFunction("example2", gamma, d)
            found = ratfun.find_pole(V, expected * 1.03 + 0.02)
            self.assertLess(abs(found - expected) / abs(expected), 1e-6)
            self.assertGreater(abs(V(found + 1e-7)[0, 0]), 1e4)
        assert_allclose(ratfun.example2_pole(1.0, 0.0), 2j / np.sqrt(5), atol=1e-14)

    def test_example2_quadrature_accuracy(self):
        exact = ratfun.example2_value(2j, 1.0, 0.0)
        approx = ratfun.example2_quadrature(1.0, 0.0, 200, 2j)
        self.assertLessEqual(abs(approx - exact), 1e-8)

    def test_example2_quadrature_converges(self):
        z = 0.1j
        exact = ratfun.example2_value(z, 1.0, 0.0)
        errors = [abs(ratfun.example2_quadrature(1.0, 0.0, n, z) - exact) for n in (25, 50, 100, 200)]
        for a, b in zip(errors, errors[1:]):
            self.assertLess(b, a)

    def test_chebyshev_weights_sum_to_one(self):
        t, w = ratfun.gauss_chebyshev_u(50)
        self.assertAlmostEqual(float(np.sum(w)), 1.0, places=12)
        self.assertTrue(np.all(np.abs(t) < 1))

    def test_example1_asymptote_and_symmetry(self):
        self.assertLess(abs(ratfun.example1_value(1000j) - 1j), 1e-3)
        z = 0.3 + 0.7j
        self.assertAlmostEqual(ratfun.example1_value(z.conjugate()), np.conj(ratfun.example1_value(z)))

    def test_example1_pole_at_integers(self):
        with self.assertRaises(PoleError):
            ratfun.example1_value(2.0 + 0j)

    def test_example1_transfer_cayley(self):
        for z in (0.3 + 0.7j, -1.2 + 0.4j, 2.5 + 3j):
            W = ratfun.example1_transfer(z)
            self.assertAlmostEqual(1j * (W - 1) / (W + 1), ratfun.example1_value(z), places=10)


if __name__ == "__main__":
    unittest.main()
