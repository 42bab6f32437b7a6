"""Scalar factorization V = (p p#)/(q q#) V0 with V0 in the Nevanlinna class N0."""
from __future__ import annotations
from dataclasses import dataclass, field
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classify import infinity_type
from .config import KernelConfig
from .console import log_verbose
from .errors import (
    DimensionError,
    DomainError,
    InconsistencyError,
    StrictnessError,
    UnsupportedRepresentationError,
)
from .kernel import negative_squares
from .ratfun import (
    ONE,
    ComplexPolynomial,
    MatrixFunction,
    RationalEntry,
    RationalFunction,
    partial_fractions,
    poly_roots,
)

REAL_AXIS = 1e-8
MATCH = 1e-6
INF = complex(math.inf, 0.0)


@dataclass(frozen=True)
class NonposPoint:
    location: complex  # INF for the point at infinity
    kind: str  # pole | zero
    multiplicity: Optional[int]

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.location.real)


@dataclass(frozen=True, eq=False)
class Factorization:
    p: ComplexPolynomial
    q: ComplexPolynomial
    V0: RationalFunction
    kappa: int
    points: Tuple[NonposPoint, ...] = ()
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def reconstruct(self, z: complex) -> complex:
        p, q = self.p, self.q
        return complex(p(z) * p.sharp()(z) / (q(z) * q.sharp()(z)) * self.V0(z)[0, 0])


def _scalar_entry(V: MatrixFunction) -> RationalEntry:
    if V.dim != 1:
        raise DimensionError("factorization is defined for scalar functions")
    if not V.is_rational:
        raise UnsupportedRepresentationError("factorization needs rational data")
    if not V.symmetric:
        raise DomainError("factorization needs a symmetric function")
    return V.to_rational().scalar_entry


def _is_real(r: complex) -> bool:
    return abs(r.imag) <= REAL_AXIS * max(1.0, abs(r))


def _leading(e: RationalEntry, t: float, k: int, kind: str) -> float:
    """Leading local coefficient c: V ~ c (z - t)^(-k) at a pole, V ~ c (z - t)^k at a zero."""
    if kind == "pole":
        others = [r for r, mult in poly_roots(e.den) for _ in range(mult) if abs(r - t) > MATCH * max(1.0, abs(t))]
        reduced = ComplexPolynomial.from_roots(others, e.den.lead)
        return float((e.num(t) / reduced(t)).real)
    return float((e.num.taylor(t, k)[k] / e.den(t)).real)


def _real_budget(c: float, k: int, kind: str) -> int:
    # multiplicity of (z - t) that must go into q (poles) or p (zeros)
    if k % 2 == 0:
        return k // 2
    if kind == "pole":
        return (k - 1) // 2 if c < 0 else (k + 1) // 2
    return (k - 1) // 2 if c > 0 else (k + 1) // 2


def _finite_points(e: RationalEntry) -> List[NonposPoint]:
    found: List[NonposPoint] = []
    for kind, poly in (("pole", e.den), ("zero", e.num)):
        if poly.is_zero:
            continue
        for r, k in poly_roots(poly):
            if _is_real(r):
                t = r.real
                j = _real_budget(_leading(e, t, k, kind), k, kind)
                if j:
                    found.append(NonposPoint(complex(t, 0.0), kind, j))
            elif r.imag > 0:
                found.append(NonposPoint(r, kind, k))
    nonreal = [pt for pt in found if pt.location.imag != 0]
    real = sorted((pt for pt in found if pt.location.imag == 0), key=lambda pt: abs(pt.location))
    return nonreal + real


def nonpos_points(V: MatrixFunction) -> List[NonposPoint]:
    """Generalized poles and zeros of nonpositive type; infinity first."""
    if V.dim != 1:
        raise DimensionError("nonpos_points works on scalar functions")
    out: List[NonposPoint] = []
    label = infinity_type(V).label
    if label == "gen_pole_nonpos":
        out.append(NonposPoint(INF, "pole", None))
    elif label == "gen_zero_nonpos":
        out.append(NonposPoint(INF, "zero", None))
    if V.is_rational:
        e = _scalar_entry(V)
        if not e.num.is_zero:
            out.extend(_finite_points(e))
    return out


def _multiset(poly: ComplexPolynomial) -> List[List]:
    return [[r, k] for r, k in poly_roots(poly)] if not poly.is_zero and poly.degree else []


def _remove(roots: List[List], w: complex, k: int, gained: List[List]):
    """Take k copies of w out of roots; copies that are not there move to gained."""
    for item in roots:
        if abs(item[0] - w) <= MATCH * max(1.0, abs(w)):
            take = min(k, item[1])
            item[1] -= take
            k -= take
            break
    if k:
        gained.append([w, k])


def _from_multiset(roots: List[List], lead: complex = 1.0) -> ComplexPolynomial:
    flat = [r for r, k in roots for _ in range(k)]
    return _realify(ComplexPolynomial.from_roots(flat, lead))


def _realify(p: ComplexPolynomial) -> ComplexPolynomial:
    c = p.coeffs
    if np.max(np.abs(c.imag)) <= 1e-10 * max(1.0, float(np.max(np.abs(c)))):
        return ComplexPolynomial(c.real)
    return p


def is_nevanlinna_rational(V: MatrixFunction, tol: float = 1e-10) -> bool:
    """V = a + b z + sum c_j/(t_j - z) with a, t_j real, b >= 0 and c_j > 0."""
    e = _scalar_entry(V)
    if e.num.is_zero:
        return True
    quo, rem = divmod(e.num, e.den)
    scale = max(1.0, float(np.max(np.abs(quo.coeffs))))
    if quo.degree > 1 or np.max(np.abs(quo.coeffs.imag)) > tol * scale:
        return False
    if quo.degree == 1 and quo.coeffs[1].real < 0:
        return False
    if rem.is_zero:
        return True
    for part in partial_fractions(RationalFunction([[RationalEntry(rem, e.den)]])):
        a = part.coeffs[0, 0, 0]
        if part.order > 1 and np.max(np.abs(part.coeffs[1:])) > tol * max(1.0, abs(a)):
            return False
        if not _is_real(part.pole):
            return False
        # c/(t - z) = -c/(z - t): residue must be negative
        if abs(a.imag) > tol * max(1.0, abs(a)) or a.real >= 0:
            return False
    return True


def _strip(e: RationalEntry, finite: Sequence[NonposPoint]):
    """V0 = V q q# / (p p#) for the given points; returns V0 and the p, q root lists."""
    zeros, poles = _multiset(e.num), _multiset(e.den)
    p_roots: List[complex] = []
    q_roots: List[complex] = []
    for pt in finite:
        w, k = pt.location, pt.multiplicity
        if not k:
            continue
        own, other = (zeros, poles) if pt.kind == "zero" else (poles, zeros)
        (p_roots if pt.kind == "zero" else q_roots).extend([w] * k)
        # strip (z - w)^k (z - conj w)^k from the own side
        _remove(own, w, k, other)
        _remove(own, w.conjugate(), k, other)
    lead = e.num.lead / e.den.lead
    V0 = RationalFunction([[RationalEntry(_from_multiset(zeros, lead), _from_multiset(poles))]])
    return V0, p_roots, q_roots


def _confirm_points(e: RationalEntry, finite: List[NonposPoint], kernel_cfg: Optional[KernelConfig]):
    """Lowest multiplicity per point that still leaves a stripped function without negative squares.

    The sign rules propose the points; the kernel count of the stripped
    function decides. A lower choice is kept only if the stripped function
    also passes the exact N0 test.
    """
    chosen = list(finite)
    overrides = []
    for i, pt in enumerate(finite):
        for j in range(pt.multiplicity):
            trial = chosen[:i] + [NonposPoint(pt.location, pt.kind, j)] + chosen[i + 1 :]
            V0, _, _ = _strip(e, trial)
            try:
                exact = is_nevanlinna_rational(V0)
                est = negative_squares(V0, kernel_cfg)
            except DomainError:
                continue
            counted = est.stabilized and est.kappa == 0
            if exact != counted:
                log_verbose("factor", f"{pt.kind} at {pt.location} x{j}: N0 test {exact}, kernel count {est.kappa}")
            if exact and counted:
                log_verbose("factor", f"{pt.kind} at {pt.location}: sign rules give {pt.multiplicity}, kernel count gives {j}")
                overrides.append((pt.location, pt.kind, pt.multiplicity, j))
                chosen[i] = NonposPoint(pt.location, pt.kind, j)
                break
    return [pt for pt in chosen if pt.multiplicity], overrides


def factorize(
    V: MatrixFunction,
    kernel_cfg: Optional[KernelConfig] = None,
    verify: bool = True,
    candidates: Optional[Sequence[NonposPoint]] = None,
) -> Factorization:
    """Krein-Langer factorization; candidates replaces the sign-rule point list."""
    e = _scalar_entry(V)
    if e.num.degree == 0 and e.den.degree == 0:
        raise StrictnessError("constant function: the kernel vanishes identically", {"value": complex(e.num.coeffs[0])})
    points = tuple(nonpos_points(V) if candidates is None else candidates)
    finite = [pt for pt in points if not pt.at_infinity]
    finite, overrides = _confirm_points(e, finite, kernel_cfg)
    points = tuple(pt for pt in points if pt.at_infinity) + tuple(finite)

    V0, p_roots, q_roots = _strip(e, finite)
    p = _realify(ComplexPolynomial.from_roots(p_roots)) if p_roots else ONE
    q = _realify(ComplexPolynomial.from_roots(q_roots)) if q_roots else ONE
    kappa = max(p.degree, q.degree)

    diagnostics: Dict[str, object] = {"p_roots": p_roots, "q_roots": q_roots, "overrides": overrides}
    if not is_nevanlinna_rational(V0):
        raise InconsistencyError("stripped function V0 is not of class N0", diagnostics)
    if verify:
        est0 = negative_squares(V0, kernel_cfg)
        diagnostics["kappa_V0"] = est0.kappa
        if est0.stabilized and est0.kappa != 0:
            raise InconsistencyError(f"kernel of V0 shows {est0.kappa} negative squares", diagnostics)
        est = negative_squares(V, kernel_cfg)
        diagnostics["kappa_kernel"] = est.kappa
        if est.stabilized and est.kappa != kappa:
            log_verbose("factor", f"kernel kappa {est.kappa} differs from max(deg p, deg q) = {kappa}")
    log_verbose("factor", f"p roots {p_roots} q roots {q_roots} kappa={kappa}")
    return Factorization(p=p, q=q, V0=V0, kappa=kappa, points=points, diagnostics=diagnostics)


def t19_check(V: MatrixFunction, kernel_cfg: Optional[KernelConfig] = None) -> Tuple[bool, str]:
    """Realizability from the factorization degrees."""
    if V.dim != 1:
        raise DimensionError("t19_check works on scalar functions")
    if not V.is_rational:
        label = infinity_type(V).label
        if label == "gen_pole_nonpos":
            return False, "generalized pole of nonpositive type at infinity: not realizable"
        if label == "gen_zero_nonpos":
            return True, "generalized zero of nonpositive type at infinity: realizable"
        raise UnsupportedRepresentationError(f"infinity type {label!r}: the equal-degree test needs rational data")
    fact = factorize(V, kernel_cfg, verify=False)
    dp, dq = fact.p.degree, fact.q.degree
    if dp > dq:
        return False, f"deg p = {dp} > deg q = {dq}: not realizable"
    if dp < dq:
        return True, f"deg p = {dp} < deg q = {dq}: realizable"
    e0 = fact.V0.scalar_entry
    if e0.num.is_zero:
        return False, f"deg p = deg q = {dp}, V0 = 0: strictness fails"
    if e0.num.degree >= e0.den.degree + 1:
        return False, f"deg p = deg q = {dp}, V0 has a linear term: growth fails"
    if e0.num.degree == 0 and e0.den.degree == 0:
        return False, f"deg p = deg q = {dp}, V0 constant: strictness fails"
    if e0.num.degree == e0.den.degree:
        return False, f"deg p = deg q = {dp}, V0(iy) tends to a nonzero constant: decay fails"
    return True, f"deg p = deg q = {dp}, V0 strictly proper in N0: realizable, subclass N1 carries over"
