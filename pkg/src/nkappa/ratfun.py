"""Complex polynomials and symmetric meromorphic matrix functions.

Coefficients [1, 2, 3] correspond to p = 1 + 2z + 3z^2 throughout (ascending
degree, as in numpy.polynomial.polynomial).

Three representations of a matrix function V are supported:

- ``RationalFunction``: an m x m array of coprime numerator/denominator pairs
  with monic denominators,
- ``BuiltinFunction``: the two closed-form scalar examples ``example1`` and
  ``example2``,
- ``BlockDiagFunction``: a block-diagonal composition of the above.
"""
from __future__ import annotations
from dataclasses import dataclass
from math import factorial
from typing import List, Sequence, Tuple
import cmath
import math

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import linalg, optimize, special

from .errors import DimensionError, DomainError, PoleError, UnsupportedRepresentationError

# Companion eigenvalues closer than this (relative) are one multiple root
ROOT_CLUSTER = 1e-4
# |den(z)| below this fraction of sum |c_k||z|^k counts as a pole
POLE_GUARD = 1e-14
GCD_TOL = 1e-10
SYMMETRY_TOL = 1e-10

BUILTIN_NAMES = ("example1", "example2")


@dataclass(frozen=True, eq=False)
class ComplexPolynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).ravel()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1].copy() if nz.size else np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, value: complex) -> "ComplexPolynomial":
        return cls(np.array([value], dtype=complex))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "ComplexPolynomial":
        if len(roots) == 0:
            return cls.constant(lead)
        return cls(lead * P.polyfromroots(np.asarray(roots, dtype=complex)))

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, z):
        return P.polyval(z, self.coeffs)

    def scale(self, z: complex) -> float:
        """sum |c_k| |z|^k, the magnitude against which cancellation is judged."""
        return float(P.polyval(abs(z), np.abs(self.coeffs)))

    def __add__(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        return ComplexPolynomial(P.polyadd(self.coeffs, _coeffs(other)))

    def __sub__(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        return ComplexPolynomial(P.polysub(self.coeffs, _coeffs(other)))

    def __neg__(self) -> "ComplexPolynomial":
        return ComplexPolynomial(-self.coeffs)

    def __mul__(self, other) -> "ComplexPolynomial":
        if isinstance(other, ComplexPolynomial):
            return ComplexPolynomial(P.polymul(self.coeffs, other.coeffs))
        return ComplexPolynomial(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __divmod__(self, other: "ComplexPolynomial"):
        if other.is_zero:
            raise DomainError("division by the zero polynomial")
        q, r = P.polydiv(self.coeffs, other.coeffs)
        return ComplexPolynomial(q), ComplexPolynomial(r).chop()

    def __pow__(self, k: int) -> "ComplexPolynomial":
        return ComplexPolynomial(P.polypow(self.coeffs, k))

    def sharp(self) -> "ComplexPolynomial":
        """p#(z) = conj(p(conj z)): conjugate every coefficient."""
        return ComplexPolynomial(np.conj(self.coeffs))

    def deriv(self, k: int = 1) -> "ComplexPolynomial":
        if k == 0:
            return self
        return ComplexPolynomial(P.polyder(self.coeffs, k))

    def monic(self) -> "ComplexPolynomial":
        if self.is_zero:
            raise DomainError("zero polynomial cannot be made monic")
        return ComplexPolynomial(self.coeffs / self.lead)

    def chop(self, tol: float = 1e-13) -> "ComplexPolynomial":
        """Zero out coefficients below tol * max|c| (division remainders)."""
        c = np.array(self.coeffs)
        big = np.max(np.abs(c)) if c.size else 0.0
        c[np.abs(c) <= tol * big] = 0
        return ComplexPolynomial(c)

    def taylor(self, point: complex, order: int) -> np.ndarray:
        """Coefficients of p(point + u) in u up to u^order."""
        out = np.zeros(order + 1, dtype=complex)
        for s in range(min(order, self.degree) + 1):
            out[s] = P.polyval(point, P.polyder(self.coeffs, s)) / factorial(s)
        return out

    def allclose(self, other: "ComplexPolynomial", tol: float = 1e-10) -> bool:
        diff = P.polysub(self.coeffs, other.coeffs)
        scale = max(np.max(np.abs(self.coeffs)), np.max(np.abs(other.coeffs)), 1e-300)
        return bool(np.max(np.abs(diff)) <= tol * scale)

    def __repr__(self) -> str:
        return f"ComplexPolynomial({np.round(self.coeffs, 12).tolist()})"


def _coeffs(p) -> np.ndarray:
    return p.coeffs if isinstance(p, ComplexPolynomial) else np.atleast_1d(np.asarray(p, dtype=complex))


ONE = ComplexPolynomial.constant(1.0)
ZERO = ComplexPolynomial.constant(0.0)
Z = ComplexPolynomial([0.0, 1.0])


def poly_roots(p: ComplexPolynomial) -> List[Tuple[complex, int]]:
    """Roots of p with multiplicities.

    Companion-matrix eigenvalues are grouped into clusters (a multiple root
    splits into a small ring of eigenvalues whose centroid is accurate), and
    each cluster center gets one Newton step on p^(k-1), which has a simple
    root there.
    """
    if p.is_zero:
        raise DomainError("the zero polynomial has no finite root multiset")
    if p.degree == 0:
        return []
    raw = np.linalg.eigvals(P.polycompanion(p.coeffs))
    clusters = _cluster(raw)
    out: List[Tuple[complex, int]] = []
    for members in clusters:
        k = len(members)
        r = complex(np.mean(raw[members]))
        q = p.deriv(k - 1)
        dq = q.deriv()
        denom = dq(r)
        if denom != 0:
            polished = r - q(r) / denom
            if abs(q(polished)) <= abs(q(r)):
                r = complex(polished)
        out.append((r, k))
    return sort_roots(out)


def sort_roots(roots):
    """Sort (root, multiplicity) pairs on the real part then the imaginary part."""
    return sorted(roots, key=lambda rm: (round(rm[0].real, 12), round(rm[0].imag, 12)))


def root_list(p: ComplexPolynomial) -> List[complex]:
    out = []
    for r, k in poly_roots(p):
        out.extend([r] * k)
    return out


def _cluster(values: np.ndarray, rel: float = ROOT_CLUSTER) -> List[List[int]]:
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(1.0, abs(values[i]), abs(values[j]))
            if abs(values[i] - values[j]) <= rel * scale:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _gcd_degree(a: ComplexPolynomial, b: ComplexPolynomial, tol: float = GCD_TOL) -> int:
    """Numerical degree of gcd(a, b): nullity of the Sylvester matrix."""
    m, n = a.degree, b.degree
    if m == 0 or n == 0 or a.is_zero or b.is_zero:
        return 0
    ad = a.coeffs[::-1] / np.linalg.norm(a.coeffs)
    bd = b.coeffs[::-1] / np.linalg.norm(b.coeffs)
    S = np.zeros((m + n, m + n), dtype=complex)
    for i in range(n):
        S[i, i : i + m + 1] = ad
    for i in range(m):
        S[n + i, i : i + n + 1] = bd
    s = linalg.svdvals(S)
    return int(np.sum(s <= tol * s[0]))


def _match_roots(xs: List[complex], ys: List[complex], count: int) -> List[complex]:
    xs, ys = list(xs), list(ys)
    common = []
    for _ in range(count):
        if not xs or not ys:
            break
        d = np.abs(np.subtract.outer(np.asarray(xs), np.asarray(ys)))
        i, j = np.unravel_index(np.argmin(d), d.shape)
        common.append(0.5 * (xs[i] + ys[j]))
        xs.pop(i)
        ys.pop(j)
    return common


def reduce_fraction(num: ComplexPolynomial, den: ComplexPolynomial):
    """Coprime form of num/den with a monic denominator."""
    if den.is_zero:
        raise DomainError("zero denominator")
    if num.is_zero:
        return ZERO, ONE
    g = _gcd_degree(num, den)
    if g:
        common = _match_roots(root_list(num), root_list(den), g)
        gp = ComplexPolynomial.from_roots(common)
        num = divmod(num, gp)[0]
        den = divmod(den, gp)[0]
    lead = den.lead
    return num * (1.0 / lead), den * (1.0 / lead)


@dataclass(frozen=True, eq=False)
class RationalEntry:
    num: ComplexPolynomial
    den: ComplexPolynomial

    @classmethod
    def make(cls, num, den=None, *, reduce: bool = True) -> "RationalEntry":
        num = num if isinstance(num, ComplexPolynomial) else ComplexPolynomial(num)
        den = ONE if den is None else (den if isinstance(den, ComplexPolynomial) else ComplexPolynomial(den))
        if reduce:
            num, den = reduce_fraction(num, den)
        return cls(num, den)

    def __call__(self, z: complex) -> complex:
        d = self.den(z)
        if abs(d) <= POLE_GUARD * self.den.scale(z):
            raise PoleError(z)
        return complex(self.num(z) / d)

    def derivative(self, z: complex) -> complex:
        d = self.den(z)
        if abs(d) <= POLE_GUARD * self.den.scale(z):
            raise PoleError(z)
        return complex((self.num.deriv()(z) * d - self.num(z) * self.den.deriv()(z)) / (d * d))

    @property
    def is_proper_strict(self) -> bool:
        return self.num.is_zero or self.num.degree < self.den.degree

    def sharp(self) -> "RationalEntry":
        return RationalEntry(self.num.sharp(), self.den.sharp())


class MatrixFunction:
    """A meromorphic function on C \\ R with values in the m x m matrices."""

    dim: int = 1

    def __call__(self, z: complex) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, z: complex) -> np.ndarray:
        return richardson_derivative(self, complex(z))

    @property
    def is_rational(self) -> bool:
        return False

    @property
    def symmetric(self) -> bool:
        return True

    def to_rational(self) -> "RationalFunction":
        raise UnsupportedRepresentationError(f"{self!r} has no rational representation")


class RationalFunction(MatrixFunction):
    def __init__(self, entries: Sequence[Sequence[RationalEntry]]):
        rows = [list(r) for r in entries]
        m = len(rows)
        if m == 0 or any(len(r) != m for r in rows):
            raise DimensionError("rational matrix function must be square and nonempty")
        self.entries: Tuple[Tuple[RationalEntry, ...], ...] = tuple(tuple(r) for r in rows)
        self.dim = m
        self._symmetric = None

    @classmethod
    def scalar(cls, num, den=None) -> "RationalFunction":
        return cls([[RationalEntry.make(num, den)]])

    @classmethod
    def from_coeffs(cls, rows) -> "RationalFunction":
        """rows[i][j] = (num_coeffs, den_coeffs)."""
        return cls([[RationalEntry.make(n, d) for (n, d) in row] for row in rows])

    @property
    def is_rational(self) -> bool:
        return True

    def to_rational(self) -> "RationalFunction":
        return self

    @property
    def scalar_entry(self) -> RationalEntry:
        if self.dim != 1:
            raise DimensionError("scalar function expected")
        return self.entries[0][0]

    def __call__(self, z: complex) -> np.ndarray:
        z = complex(z)
        out = np.empty((self.dim, self.dim), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[i, j] = e(z)
        return out

    def derivative(self, z: complex) -> np.ndarray:
        z = complex(z)
        out = np.empty((self.dim, self.dim), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[i, j] = e.derivative(z)
        return out

    @property
    def symmetric(self) -> bool:
        if self._symmetric is None:
            self._symmetric = _rational_symmetric(self)
        return self._symmetric

    @property
    def is_strictly_proper(self) -> bool:
        return all(e.is_proper_strict for row in self.entries for e in row)

    @property
    def is_constant(self) -> bool:
        return all(e.num.degree == 0 and e.den.degree == 0 for row in self.entries for e in row)

    def poles(self) -> List[complex]:
        out: List[complex] = []
        for row in self.entries:
            for e in row:
                if e.num.is_zero:
                    continue
                for r, _ in poly_roots(e.den):
                    if not any(abs(r - s) <= 1e-8 * max(1.0, abs(r)) for s in out):
                        out.append(r)
        return out

    def times_scalar(self, num: ComplexPolynomial, den: ComplexPolynomial) -> "RationalFunction":
        """(num/den) * V with every entry reduced to coprime form."""
        return RationalFunction(
            [[RationalEntry.make(e.num * num, e.den * den) for e in row] for row in self.entries]
        )

    def __repr__(self) -> str:
        if self.dim == 1:
            e = self.scalar_entry
            return f"RationalFunction(num={np.round(e.num.coeffs, 10).tolist()}, den={np.round(e.den.coeffs, 10).tolist()})"
        return f"RationalFunction(dim={self.dim})"


def _rational_symmetric(V: RationalFunction) -> bool:
    # V_ij(conj z) = conj V_ji(z)  <=>  N_ij * D_ji# - N_ji# * D_ij == 0
    for i in range(V.dim):
        for j in range(V.dim):
            a = V.entries[i][j]
            b = V.entries[j][i].sharp()
            lhs = a.num * b.den
            rhs = b.num * a.den
            if not lhs.allclose(rhs, SYMMETRY_TOL):
                return False
    return True


class BuiltinFunction(MatrixFunction):
    """The closed-form scalar examples.

    example1: V(z) = ((2 - pi i z) e^{2 pi i z} - 2 - pi i z) / (pi z (e^{2 pi i z} - 1))
    example2: V(z) = 1 / ((1 + 2 gamma^2) z - 2 gamma^2 sqrt(z^2 - 1) - d)
    """

    dim = 1

    def __init__(self, name: str, gamma: float = 1.0, d: float = 0.0):
        if name not in BUILTIN_NAMES:
            raise DomainError(f"unknown builtin function {name!r}; expected one of {BUILTIN_NAMES}")
        gamma, d = float(gamma), float(d)
        if name == "example2" and gamma == 0:
            raise DomainError("example2 needs gamma != 0")
        self.name = name
        self.gamma = gamma
        self.d = d

    def __call__(self, z: complex) -> np.ndarray:
        z = complex(z)
        if self.name == "example1":
            return np.array([[example1_value(z)]])
        return np.array([[example2_value(z, self.gamma, self.d)]])

    def __repr__(self) -> str:
        if self.name == "example1":
            return "BuiltinFunction('example1')"
        return f"BuiltinFunction('example2', gamma={self.gamma}, d={self.d})"


class BlockDiagFunction(MatrixFunction):
    def __init__(self, blocks: Sequence[MatrixFunction]):
        if not blocks:
            raise DimensionError("block-diagonal function needs at least one block")
        self.blocks = tuple(blocks)
        self.dim = sum(b.dim for b in self.blocks)

    def __call__(self, z: complex) -> np.ndarray:
        return linalg.block_diag(*[b(z) for b in self.blocks]).astype(complex)

    def derivative(self, z: complex) -> np.ndarray:
        return linalg.block_diag(*[b.derivative(z) for b in self.blocks]).astype(complex)

    @property
    def is_rational(self) -> bool:
        return all(b.is_rational for b in self.blocks)

    @property
    def symmetric(self) -> bool:
        return all(b.symmetric for b in self.blocks)

    def to_rational(self) -> RationalFunction:
        rats = [b.to_rational() for b in self.blocks]
        zero = RationalEntry(ZERO, ONE)
        rows = [[zero] * self.dim for _ in range(self.dim)]
        off = 0
        for r in rats:
            for i in range(r.dim):
                for j in range(r.dim):
                    rows[off + i][off + j] = r.entries[i][j]
            off += r.dim
        return RationalFunction(rows)

    def __repr__(self) -> str:
        return f"BlockDiagFunction({list(self.blocks)!r})"


# --- closed-form examples ---

def sqrt_z2m1(z: complex) -> complex:
    """sqrt(z^2 - 1) with Im > 0 on C_+, cut along [-1, 1], ~z at infinity."""
    return cmath.sqrt(z - 1) * cmath.sqrt(z + 1)


def example2_value(z: complex, gamma: float, d: float) -> complex:
    if z.imag == 0 and -1.0 <= z.real <= 1.0:
        raise PoleError(z, "example2 (branch cut [-1, 1])")
    g2 = gamma * gamma
    f = (1 + 2 * g2) * z - 2 * g2 * sqrt_z2m1(z) - d
    if abs(f) <= POLE_GUARD * max(1.0, abs(z)):
        raise PoleError(z, "example2")
    return 1.0 / f


def example1_value(z: complex) -> complex:
    if z.imag < 0:
        return example1_value(z.conjugate()).conjugate()
    if abs(z.imag) < 1e-12 and abs(z.real - round(z.real)) < 1e-12:
        raise PoleError(z, "example1")
    # |q| <= 1 on the closed upper half-plane, so no overflow
    q = cmath.exp(2j * math.pi * z)
    num = (2 - math.pi * 1j * z) * q - 2 - math.pi * 1j * z
    den = math.pi * z * (q - 1)
    return num / den


def example1_transfer(z: complex) -> complex:
    """W(z) = (e^{2 pi i z} - pi i z - 1) / ((pi i z - 1) e^{2 pi i z} + 1).

    i (W + 1)^{-1} (W - 1) reproduces the example1 impedance.
    """
    z = complex(z)
    a = math.pi * 1j * z
    if z.imag >= 0:
        q = cmath.exp(2j * math.pi * z)
        return (q - a - 1) / ((a - 1) * q + 1)
    qi = cmath.exp(-2j * math.pi * z)
    return (1 - (a + 1) * qi) / ((a - 1) + qi)


def example2_pole(gamma: float, d: float) -> complex:
    """The simple pole of example2 in C_+ (needs gamma^2 > max(0, (d^2 - 1)/4)).

    Squaring (1 + 2g^2) z - d = 2 g^2 sqrt(z^2 - 1) gives
    (1 + 4g^2) z^2 - 2(1 + 2g^2) d z + d^2 + 4g^4 = 0.
    """
    g2 = gamma * gamma
    if not g2 > max(0.0, (d * d - 1) / 4):
        raise DomainError("example2 has no pole in C_+ for these parameters")
    return complex(d * (1 + 2 * g2), 2 * g2 * math.sqrt(4 * g2 + 1 - d * d)) / (1 + 4 * g2)


def gauss_chebyshev_u(nodes: int):
    """Nodes t_k and weights w_k for the weight (2/pi) sqrt(1 - t^2) on [-1, 1] (sum w_k = 1)."""
    if nodes < 1:
        raise DomainError("quadrature needs at least one node")
    t, w = special.roots_chebyu(nodes)
    return np.asarray(t, dtype=float), (2.0 / math.pi) * np.asarray(w, dtype=float)


def example2_quadrature(gamma: float, d: float, nodes: int, z: complex) -> complex:
    """example2 with the semicircle Stieltjes transform replaced by a quadrature sum.

    V_n(z) = -1 / (d + gamma^2 sum_k w_k / (t_k - z) - z)
    """
    t, w = gauss_chebyshev_u(nodes)
    z = complex(z)
    x = d + gamma * gamma * np.sum(w / (t - z)) - z
    if abs(x) <= POLE_GUARD * max(1.0, abs(z)):
        raise PoleError(z, "quadrature model")
    return complex(-1.0 / x)


def find_pole(V: MatrixFunction, z_start: complex, tol: float = 1e-12, maxiter: int = 100) -> complex:
    """Complex Newton search for a zero of 1/V (scalar V)."""
    if V.dim != 1:
        raise DimensionError("find_pole works on scalar functions")

    def f(z):
        try:
            return 1.0 / V(z)[0, 0]
        except PoleError:
            # off the real axis the guard only trips at the pole itself
            if complex(z).imag == 0:
                raise
            return 0j

    def fprime(z):
        # 1/V is analytic at the pole; difference it directly
        return complex(richardson_derivative(f, complex(z)))

    root = optimize.newton(f, complex(z_start), fprime=fprime, tol=tol, maxiter=maxiter)
    return complex(root)


# --- operations ---

def evaluate(V: MatrixFunction, z: complex) -> np.ndarray:
    return V(complex(z))


def derivative_eval(V: MatrixFunction, z: complex) -> np.ndarray:
    return V.derivative(complex(z))


def richardson_derivative(V, z: complex, levels: int = 4) -> np.ndarray:
    """Central differences at h, h/2, h/4, ... combined by Richardson extrapolation.

    The step runs parallel to the real axis so it never crosses the real line
    (branch cuts and real poles stay on one side).
    """
    h = 0.02 * min(max(abs(z.imag), 1e-3), max(1.0, abs(z)))
    table = []
    for k in range(levels):
        hk = h / 2**k
        table.append((V(z + hk) - V(z - hk)) / (2 * hk))
    for k in range(1, levels):
        for i in range(levels - 1, k - 1, -1):
            table[i] = table[i] + (table[i] - table[i - 1]) / (4**k - 1)
    return np.asarray(table[-1], dtype=complex)


def symmetry_check(V: MatrixFunction) -> bool:
    return V.symmetric


@dataclass(frozen=True, eq=False)
class LaurentExpansion:
    """V(z) = sum_k poly[k] z^k + tail[0] + tail[1]/z + tail[2]/z^2 + ... (poly[0] == 0)."""

    poly: np.ndarray
    tail: np.ndarray

    @property
    def polynomial_degree(self) -> int:
        for k in range(self.poly.shape[0] - 1, 0, -1):
            if np.any(self.poly[k] != 0):
                return k
        return 0

    @property
    def polynomial_part(self) -> ComplexPolynomial:
        """Scalar view of the polynomial part (constant term excluded)."""
        return ComplexPolynomial(self.poly[:, 0, 0])

    def evaluate(self, z: complex) -> np.ndarray:
        out = np.zeros(self.tail.shape[1:], dtype=complex)
        for k in range(self.poly.shape[0]):
            out += self.poly[k] * z**k
        for k in range(self.tail.shape[0]):
            out += self.tail[k] * z ** (-k)
        return out


def laurent_at_infinity(V: MatrixFunction, order: int = 4) -> LaurentExpansion:
    if not V.is_rational:
        raise UnsupportedRepresentationError("laurent_at_infinity needs a rational function")
    R = V.to_rational()
    m = R.dim
    quotients = {}
    deg = 0
    for i in range(m):
        for j in range(m):
            e = R.entries[i][j]
            q, r = divmod(e.num, e.den)
            quotients[i, j] = (q, r, e.den)
            if not q.is_zero:
                deg = max(deg, q.degree)
    poly = np.zeros((deg + 1, m, m), dtype=complex)
    tail = np.zeros((order + 1, m, m), dtype=complex)
    for (i, j), (q, r, den) in quotients.items():
        poly[: q.coeffs.size, i, j] = q.coeffs
        tail[0, i, j] = q.coeffs[0]
        poly[0, i, j] = 0
        tail[1:, i, j] = _series_at_infinity(r, den, order)[1:]
    return LaurentExpansion(poly=poly, tail=tail)


def _series_at_infinity(r: ComplexPolynomial, den: ComplexPolynomial, order: int) -> np.ndarray:
    # r/den in powers of w = 1/z, deg r < deg den
    n = den.degree
    out = np.zeros(order + 1, dtype=complex)
    if r.is_zero or n == 0:
        return out
    den_rev = den.coeffs[::-1]
    num_rev = np.zeros(max(order, n) + 1, dtype=complex)
    for k, c in enumerate(r.coeffs):
        num_rev[n - k] = c
    for j in range(order + 1):
        acc = num_rev[j] if j < num_rev.size else 0
        for l in range(1, min(j, n) + 1):
            acc -= den_rev[l] * out[j - l]
        out[j] = acc / den_rev[0]
    return out


@dataclass(frozen=True, eq=False)
class PolePart:
    pole: complex
    order: int
    coeffs: np.ndarray  # coeffs[k-1] multiplies 1/(z - pole)^k

    def evaluate(self, z: complex) -> np.ndarray:
        out = np.zeros(self.coeffs.shape[1:], dtype=complex)
        for k in range(1, self.order + 1):
            out += self.coeffs[k - 1] / (z - self.pole) ** k
        return out


def partial_fractions(V: MatrixFunction) -> List[PolePart]:
    if not V.is_rational:
        raise UnsupportedRepresentationError("partial_fractions needs a rational function")
    R = V.to_rational()
    if not R.is_strictly_proper:
        raise DomainError("partial_fractions needs a strictly proper function")
    m = R.dim
    poles: List[complex] = []
    parts = {}
    for i in range(m):
        for j in range(m):
            e = R.entries[i][j]
            if e.num.is_zero:
                continue
            den_roots = poly_roots(e.den)
            for idx, (r, k) in enumerate(den_roots):
                slot = _pole_slot(poles, r)
                p = poles[slot]
                others = []
                for jdx, (s, ks) in enumerate(den_roots):
                    if jdx != idx:
                        others.extend([s] * ks)
                reduced = ComplexPolynomial.from_roots(others, e.den.lead)
                g = _series_div(e.num.taylor(p, k - 1), reduced.taylor(p, k - 1), k - 1)
                for s in range(k):
                    parts.setdefault(slot, {})[(k - s, i, j)] = g[s]
    out = []
    for slot, coeff_map in parts.items():
        order = max(key[0] for key in coeff_map)
        coeffs = np.zeros((order, m, m), dtype=complex)
        for (k, i, j), c in coeff_map.items():
            coeffs[k - 1, i, j] = c
        out.append(PolePart(poles[slot], order, coeffs))
    out.sort(key=lambda pp: (round(pp.pole.real, 12), round(pp.pole.imag, 12)))
    return out


def _pole_slot(poles: List[complex], r: complex) -> int:
    for i, p in enumerate(poles):
        if abs(p - r) <= 1e-8 * max(1.0, abs(r)):
            return i
    poles.append(r)
    return len(poles) - 1


def _series_div(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order + 1, dtype=complex)
    for j in range(order + 1):
        acc = a[j]
        for l in range(1, j + 1):
            acc -= b[l] * out[j - l]
        out[j] = acc / b[0]
    return out
