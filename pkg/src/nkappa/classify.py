"""Membership in the realizable class N_kappa(R) and the N0 / N1 / N01 subclasses.

Four conditions decide realizability of a symmetric V on E:

1. the kernel N_V has finitely many (kappa) negative squares,
2. growth: (V(iy)f, f)/y -> 0 for every f,
3. strictness: the kernel matrices have no common null vector,
4. decay: V(iy)f -> 0 for every f in B, where B collects the directions with
   y (Im V(iy)f, f) bounded as y grows.

Rational data is decided from the Laurent expansion at infinity; everything
else is sampled along the ray z = iy.
"""
from __future__ import annotations
from dataclasses import dataclass, field
import math
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import linalg, optimize

from .config import KernelConfig, LimitConfig
from .console import log_verbose
from .errors import DimensionError, DomainError, PoleError
from .kernel import KappaEstimate, negative_squares, strictness_check
from .ratfun import MatrixFunction, laurent_at_infinity

INFINITY_LABELS = ("gen_pole_nonpos", "gen_zero_nonpos", "neither", "improper_growth", "indeterminate")
SUBCLASSES = ("N0", "N1", "N01", "not_applicable")

EXACT_TOL = 1e-10
REAL_TOL = 1e-6
# Beyond this ratio to the first sample a trace counts as divergent
BLOWUP = 1e6


@dataclass(frozen=True, eq=False)
class LimitResult:
    verdict: str  # convergent | infinite | indeterminate
    value: complex
    ys: np.ndarray
    samples: np.ndarray

    @property
    def converged(self) -> bool:
        return self.verdict == "convergent"

    def is_zero(self, rtol: float) -> bool:
        return self.converged and abs(self.value) <= rtol * max(1.0, abs(self.samples[0]))


@dataclass(frozen=True)
class InfinityType:
    label: str
    limit_V_over_z: complex
    limit_zV: complex


@dataclass(eq=False)
class ClassificationReport:
    kappa: KappaEstimate
    cond_growth: bool
    cond_strict: bool
    B_basis: Optional[List[np.ndarray]]
    cond_decay_on_B: bool
    subclass: str
    realizable: bool
    infinity: Optional[InfinityType] = None
    evidence: Dict[str, object] = field(default_factory=dict)


def extended(v: complex) -> complex:
    """Point at infinity in the direction of v: +inf, -inf or complex infinity."""
    if abs(v.imag) <= REAL_TOL * abs(v):
        return complex(math.copysign(math.inf, v.real), 0.0)
    return complex(math.inf, math.inf)


def y_grid(cfg: LimitConfig) -> np.ndarray:
    decades = math.log10(cfg.y_max / cfg.y_min)
    count = int(round(decades * cfg.per_decade)) + 1
    return np.logspace(math.log10(cfg.y_min), math.log10(cfg.y_max), count)


def _tail_slope(ys: np.ndarray, vals: np.ndarray, per_decade: int) -> float:
    a, b = abs(vals[-per_decade - 1]), abs(vals[-1])
    if a == 0 or b == 0:
        return 0.0
    return math.log(b / a) / math.log(ys[-1] / ys[-per_decade - 1])


def ray_limit(f: Callable[[float], complex], cfg: Optional[LimitConfig] = None) -> LimitResult:
    """lim f(y) as y -> infinity, from samples on a geometric grid.

    Consecutive samples are combined as L = (y2 f2 - y1 f1)/(y2 - y1), which
    removes a c/y correction; three agreeing extrapolants mean convergence.
    """
    cfg = cfg or LimitConfig()
    ys = y_grid(cfg)
    vals = np.empty(ys.size, dtype=complex)
    for i, y in enumerate(ys):
        try:
            vals[i] = complex(f(y))
        except (PoleError, ZeroDivisionError):
            vals[i] = complex(math.nan, math.nan)
    if not np.all(np.isfinite(vals[-cfg.per_decade - 1 :])):
        return LimitResult("indeterminate", complex(math.nan, math.nan), ys, vals)
    ext = (ys[1:] * vals[1:] - ys[:-1] * vals[:-1]) / (ys[1:] - ys[:-1])
    last = ext[-3:]
    first = vals[0] if np.isfinite(vals[0]) else vals[-1]
    ref = max(abs(first), abs(last[-1]), 1e-300)
    if np.max(np.abs(last - last[-1])) <= cfg.rtol * ref:
        return LimitResult("convergent", complex(last[-1]), ys, vals)
    growth = abs(vals[-1]) / max(abs(first), 1e-300)
    if growth > BLOWUP or (_tail_slope(ys, vals, cfg.per_decade) >= 0.5 and growth > 10):
        return LimitResult("infinite", extended(complex(vals[-1])), ys, vals)
    return LimitResult("indeterminate", complex(math.nan, math.nan), ys, vals)


def trace_bounded(ys: np.ndarray, trace: np.ndarray, cfg: LimitConfig) -> Optional[bool]:
    """Boundedness verdict for y (Im V(iy) f, f) samples; None if the samples are unusable."""
    if not np.all(np.isfinite(trace)):
        return None
    if np.max(np.abs(trace)) >= cfg.bound:
        return False
    if abs(trace[-1]) > 1 and _tail_slope(ys, trace, cfg.per_decade) >= 0.5:
        return False
    return True


# --- behavior at infinity ---

def infinity_type(V: MatrixFunction, cfg: Optional[LimitConfig] = None) -> InfinityType:
    if V.dim != 1:
        raise DimensionError("infinity_type works on scalar functions")
    if V.is_rational:
        return _infinity_type_exact(V)
    cfg = cfg or LimitConfig()
    over_z = ray_limit(lambda y: V(1j * y)[0, 0] / (1j * y), cfg)
    times_z = ray_limit(lambda y: 1j * y * V(1j * y)[0, 0], cfg)
    label = _label(over_z, times_z, cfg.rtol)
    log_verbose("infinity", f"V/z {over_z.verdict} {over_z.value:.6g}; zV {times_z.verdict} {times_z.value:.6g} -> {label}")
    return InfinityType(label, over_z.value, times_z.value)


def _label(over_z: LimitResult, times_z: LimitResult, rtol: float) -> str:
    if over_z.verdict == "indeterminate":
        return "indeterminate"
    v = over_z.value
    if not over_z.is_zero(rtol):
        if abs(v.imag) <= REAL_TOL * abs(v) and v.real < 0:
            return "gen_pole_nonpos"
        return "improper_growth"
    if times_z.converged and abs(times_z.value.imag) <= REAL_TOL * max(1.0, abs(times_z.value)) and times_z.value.real >= -REAL_TOL:
        return "gen_zero_nonpos"
    return "neither"


def _infinity_type_exact(V: MatrixFunction) -> InfinityType:
    L = laurent_at_infinity(V, order=2)
    d = L.polynomial_degree
    c0 = complex(L.tail[0, 0, 0])
    c1 = complex(L.tail[1, 0, 0])
    if d >= 1:
        top = complex(L.poly[d, 0, 0])
        # along z = iy: V/z ~ top (iy)^(d-1), zV ~ top (iy)^(d+1)
        over_z = top if d == 1 else extended(top * 1j ** (d - 1))
        times_z = extended(top * 1j ** (d + 1))
    else:
        over_z = 0j
        times_z = extended(c0 * 1j) if abs(c0) > EXACT_TOL else c1
    if d >= 1:
        real_neg = abs(over_z.imag) <= REAL_TOL * abs(over_z) and over_z.real < 0
        label = "gen_pole_nonpos" if real_neg else "improper_growth"
    elif abs(c0) <= EXACT_TOL and abs(c1.imag) <= REAL_TOL * max(1.0, abs(c1)) and c1.real >= 0:
        label = "gen_zero_nonpos"
    else:
        label = "neither"
    return InfinityType(label, over_z, times_z)


# --- growth, B and decay ---

@dataclass(eq=False)
class _Conditions:
    growth: bool
    B: Optional[np.ndarray]  # columns span B; None when undecided
    decay: bool
    evidence: Dict[str, object]


def _null_space(mats: List[np.ndarray], m: int) -> np.ndarray:
    if not mats:
        return np.eye(m, dtype=complex)
    stack = np.vstack(mats)
    scale = max(1.0, float(np.max(np.abs(stack))))
    return linalg.null_space(stack / scale, rcond=EXACT_TOL)


def _rational_conditions(V: MatrixFunction) -> _Conditions:
    R = V.to_rational()
    m = R.dim
    L = laurent_at_infinity(R, order=2)
    scale = max(1.0, float(np.max(np.abs(L.tail[0]))), float(np.max(np.abs(L.poly))))
    poly = [L.poly[k] for k in range(1, L.poly.shape[0]) if np.max(np.abs(L.poly[k])) > EXACT_TOL * scale]
    growth = not poly
    odd = [L.poly[k] for k in range(1, L.poly.shape[0], 2)]
    B = _null_space([P for P in odd if np.max(np.abs(P)) > EXACT_TOL * scale], m)
    decay = True
    if B.shape[1]:
        residual = [np.linalg.norm(P @ B) for P in poly] + [np.linalg.norm(L.tail[0] @ B)]
        decay = bool(max(residual) <= EXACT_TOL * scale)
    evidence = {
        "route": "laurent",
        "polynomial_degree": L.polynomial_degree,
        "C0": L.tail[0],
        "C1": L.tail[1],
    }
    return _Conditions(growth, B, decay, evidence)


def _ray_values(V: MatrixFunction, ys: np.ndarray) -> np.ndarray:
    out = np.empty((ys.size, V.dim, V.dim), dtype=complex)
    for i, y in enumerate(ys):
        try:
            out[i] = V(1j * y)
        except PoleError:
            out[i] = math.nan
    return out


def _track_eigen(Ms: np.ndarray):
    """Eigenvalue tracks of Hermitian M(y), matched across the grid by eigenvector overlap."""
    lam, U = linalg.eigh(Ms[0])
    tracks = [lam]
    for M in Ms[1:]:
        lam, W = linalg.eigh(M)
        overlap = np.abs(U.conj().T @ W)
        rows, cols = optimize.linear_sum_assignment(-overlap)
        order = cols[np.argsort(rows)]
        U = W[:, order]
        tracks.append(lam[order])
    return np.array(tracks), U


def _numeric_conditions(V: MatrixFunction, cfg: LimitConfig) -> _Conditions:
    m = V.dim
    ys = y_grid(cfg)
    vals = _ray_values(V, ys)
    evidence: Dict[str, object] = {"route": "ray", "ys": ys}
    if not np.all(np.isfinite(vals)):
        evidence["note"] = "pole on the ray"
        return _Conditions(False, None, False, evidence)

    growth_limits = []
    for i in range(m):
        res = ray_limit(lambda y, i=i: V(1j * y)[i, i] / y, cfg)
        growth_limits.append(res)
    growth = all(r.is_zero(cfg.rtol) for r in growth_limits)
    evidence["growth"] = [(r.verdict, r.value) for r in growth_limits]

    Ms = np.array([y * (v - v.conj().T) / 2j for y, v in zip(ys, vals)])
    tracks, U = _track_eigen(Ms)
    verdicts = [trace_bounded(ys, tracks[:, k], cfg) for k in range(m)]
    evidence["B_tracks"] = tracks
    if any(v is None for v in verdicts):
        return _Conditions(growth, None, False, evidence)
    B = U[:, [k for k in range(m) if verdicts[k]]]

    decay = True
    for k in range(B.shape[1]):
        f = B[:, k]
        res = ray_limit(lambda y, f=f: np.linalg.norm(V(1j * y) @ f), cfg)
        if not res.is_zero(cfg.rtol):
            decay = False
        evidence.setdefault("decay", []).append((res.verdict, res.value))
    return _Conditions(growth, B, decay, evidence)


def _conditions(V: MatrixFunction, cfg: LimitConfig) -> _Conditions:
    if V.is_rational:
        return _rational_conditions(V)
    return _numeric_conditions(V, cfg)


def subspace_B(V: MatrixFunction, cfg: Optional[LimitConfig] = None):
    """Basis vectors of B (list of arrays, None if undecided) and the evidence."""
    if not V.symmetric:
        raise DomainError("subspace_B needs a symmetric function")
    conds = _conditions(V, cfg or LimitConfig())
    basis = None if conds.B is None else [conds.B[:, k] for k in range(conds.B.shape[1])]
    return basis, conds.evidence


def subclass_of(basis: Optional[List[np.ndarray]], m: int) -> str:
    if basis is None:
        return "not_applicable"
    if not basis:
        return "N0"
    if len(basis) == m:
        return "N1"
    return "N01"


def classify_full(
    V: MatrixFunction,
    kernel_cfg: Optional[KernelConfig] = None,
    limit_cfg: Optional[LimitConfig] = None,
) -> ClassificationReport:
    if not V.symmetric:
        raise DomainError("classification needs a symmetric function V(conj z) = V(z)*")
    limit_cfg = limit_cfg or LimitConfig()
    kappa = negative_squares(V, kernel_cfg)
    conds = _conditions(V, limit_cfg)
    strict = strictness_check(V)
    basis = None if conds.B is None else [conds.B[:, k] for k in range(conds.B.shape[1])]
    subclass = subclass_of(basis, V.dim)
    infinity = infinity_type(V, limit_cfg) if V.dim == 1 else None
    realizable = bool(conds.growth and strict and conds.decay and kappa.stabilized and basis is not None)
    log_verbose(
        "classify",
        f"kappa={kappa.kappa} stabilized={kappa.stabilized} growth={conds.growth} strict={strict} "
        f"decay={conds.decay} subclass={subclass}",
    )
    return ClassificationReport(
        kappa=kappa,
        cond_growth=bool(conds.growth),
        cond_strict=bool(strict),
        B_basis=basis,
        cond_decay_on_B=bool(conds.decay),
        subclass=subclass,
        realizable=realizable,
        infinity=infinity,
        evidence=conds.evidence,
    )


def ray_trace(V: MatrixFunction, cfg: Optional[LimitConfig] = None):
    """Rows (y, direction, (V(iy)f,f)/y, y (Im V(iy)f,f), |V(iy)f|) along the ray for each basis direction f."""
    cfg = cfg or LimitConfig()
    ys = y_grid(cfg)
    rows = []
    for y in ys:
        try:
            v = V(1j * y)
        except PoleError:
            for i in range(V.dim):
                rows.append((y, i, None, None, None))
            continue
        im = (v - v.conj().T) / 2j
        for i in range(V.dim):
            rows.append((y, i, v[i, i] / y, y * im[i, i].real, float(np.linalg.norm(v[:, i]))))
    return rows
