"""Minimal colligations realizing a rational V and checks of the round trip.

realize_rkps builds the model inside the reproducing kernel space of N_V:
the state vectors are the kernel atoms Gamma_{z_j} e_i, whose Gram matrix is
known from V alone. H_R acts on differences of atoms by

    H_R (Gamma_{z_j} - Gamma_{z_0}) e = z_j Gamma_{z_j} e - z_0 Gamma_{z_0} e

and the channel is K e = (H_R - z_j) Gamma_{z_j} e for every j.
pf_realize assembles the same function from partial fractions and serves as
an independent oracle.
"""
from __future__ import annotations
from dataclasses import dataclass, field
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .colligation import Colligation, gamma_field, impedance_V, minimality_check
from .config import KernelConfig, RealizeConfig
from .console import log_verbose
from .errors import (
    ConditioningError,
    DimensionError,
    DomainError,
    NonStabilizationError,
    PoleError,
    ResolventError,
    UnsupportedRepresentationError,
)
from .indefinite import SignatureMetric
from .kernel import gram_matrix, kernel_rank, kernel_value, negative_squares, strictness_check
from .ratfun import MatrixFunction, PolePart, partial_fractions

REAL_AXIS = 1e-8
ANGLE_SHIFT = 0.05
RETRY_ROTATION = 0.137
# consistency checks are relaxed to ROUNDOFF * Gram condition on ill-conditioned samples
ROUNDOFF = 1e-15


@dataclass
class RealizationDiagnostics:
    attempt: int
    points: Tuple[complex, ...]
    gram_condition: float = math.nan
    tail_ratio: float = math.nan
    selfadjoint_residual: float = math.nan
    consistency_spread: float = math.nan
    reason: str = ""


def _require_realizable_rational(V: MatrixFunction):
    if not V.is_rational:
        raise UnsupportedRepresentationError("finite-dimensional realization needs rational data")
    if not V.symmetric:
        raise DomainError("realization needs a symmetric function")
    R = V.to_rational()
    if not R.is_strictly_proper:
        raise DomainError("only strictly proper functions have a realization with B = E")
    if all(e.num.is_zero for row in R.entries for e in row):
        raise DomainError("the zero function has no realization")
    return R


def _hankel_rank(part: PolePart, tol: float = 1e-10) -> int:
    k, m = part.order, part.coeffs.shape[1]
    H = np.zeros((k * m, k * m), dtype=complex)
    for a in range(k):
        for b in range(k - a):
            H[a * m : (a + 1) * m, b * m : (b + 1) * m] = part.coeffs[a + b]
    s = linalg.svdvals(H)
    return int(np.sum(s > tol * s[0])) if s[0] > 0 else 0


def mcmillan_degree(V: MatrixFunction, kernel_cfg: Optional[KernelConfig] = None) -> int:
    if V.is_rational:
        R = _require_realizable_rational(V)
        if R.dim == 1:
            return R.scalar_entry.den.degree
        return sum(_hankel_rank(part) for part in partial_fractions(R))
    est = kernel_rank(V, kernel_cfg)
    if not est.stabilized:
        raise NonStabilizationError("kernel rank did not stabilize", list(est.history))
    return est.rank


def _circle_points(count: int, attempt: int, cfg: RealizeConfig) -> List[complex]:
    theta = 2 * np.pi * (np.arange(count) + 0.5 + RETRY_ROTATION * attempt) / count + ANGLE_SHIFT
    return [complex(cfg.center + cfg.radius * np.exp(1j * t)) for t in theta]


def _attempt(V: MatrixFunction, n: int, points: List[complex], cfg: RealizeConfig, diag: RealizationDiagnostics):
    m = V.dim
    r = len(points) - 1
    atoms_z = [z for z in points for _ in range(m)]
    dirs = np.vstack([np.eye(m, dtype=complex)] * len(points))
    G = gram_matrix(V, atoms_z, dirs).gram
    G = 0.5 * (G + G.conj().T)

    # difference vectors d_(j,i) = atom_(j,i) - atom_(0,i), j = 1..r
    S = np.zeros(((r + 1) * m, r * m), dtype=complex)
    for j in range(1, r + 1):
        for i in range(m):
            S[j * m + i, (j - 1) * m + i] = 1.0
            S[i, (j - 1) * m + i] = -1.0
    row_max = np.max(np.abs(S.conj().T @ G @ S), axis=1)
    S = S * (1.0 / np.sqrt(np.where(row_max > 0, row_max, 1.0)))[None, :]
    Gd = S.conj().T @ G @ S
    lam, U = linalg.eigh(0.5 * (Gd + Gd.conj().T))
    order = np.argsort(-np.abs(lam))
    lam, U = lam[order], U[:, order]
    if lam.size < n or abs(lam[n - 1]) == 0:
        diag.reason = "difference Gram has rank below the McMillan degree"
        return None
    diag.gram_condition = float(abs(lam[0]) / abs(lam[n - 1]))
    diag.tail_ratio = float(abs(lam[n]) / abs(lam[0])) if lam.size > n else 0.0
    limit = max(cfg.consistency_tol, ROUNDOFF * diag.gram_condition)
    if diag.gram_condition > cfg.cond_max:
        diag.reason = f"Gram condition {diag.gram_condition:.3e} above {cfg.cond_max:g}"
        return None
    if diag.tail_ratio > limit:
        diag.reason = f"difference Gram has rank above {n}"
        return None

    lam_n, U_n = lam[:n], U[:, :n]
    scale = 1.0 / np.sqrt(np.abs(lam_n))
    J = np.diag(np.sign(lam_n))
    W = S @ U_n * scale[None, :]
    Zd = np.diag(np.asarray(atoms_z))
    M = J @ W.conj().T @ G @ Zd @ S @ U_n * scale[None, :]
    # H_R is zero for a single pole at 0
    op_scale = max(np.linalg.norm(M), max(abs(z) for z in points), 1.0)
    diag.selfadjoint_residual = float(np.linalg.norm(M - J @ M.conj().T @ J) / op_scale)
    if diag.selfadjoint_residual > limit:
        diag.reason = f"model operator not selfadjoint (residual {diag.selfadjoint_residual:.3e})"
        return None
    M = 0.5 * (M + J @ M.conj().T @ J)

    coords = J @ W.conj().T @ G  # column (j,i) holds the coordinates of atom (j,i)
    Ks = []
    for j, z in enumerate(points):
        c = coords[:, j * m : (j + 1) * m]
        Ks.append(M @ c - z * c)
    K = np.mean(Ks, axis=0)
    spread = max(np.linalg.norm(Kj - K) for Kj in Ks) / max(1e-300, np.linalg.norm(K))
    diag.consistency_spread = float(spread)
    if spread > limit:
        diag.reason = f"channel vectors disagree across sample points (spread {spread:.3e})"
        return None
    return Colligation.from_impedance_form(SignatureMetric(J), M, K, SignatureMetric.identity(m))


def realize_rkps(
    V: MatrixFunction,
    cfg: Optional[RealizeConfig] = None,
    history: Optional[List[RealizationDiagnostics]] = None,
) -> Colligation:
    cfg = cfg or RealizeConfig()
    R = _require_realizable_rational(V)
    if not strictness_check(R):
        raise DomainError("kernel matrices share a null vector: strictness fails")
    n = mcmillan_degree(R)
    history = [] if history is None else history
    for attempt in range(cfg.retries + 1):
        points = _circle_points(n + 1, attempt, cfg)
        diag = RealizationDiagnostics(attempt, tuple(points))
        history.append(diag)
        try:
            c = _attempt(R, n, points, cfg, diag)
        except PoleError as e:
            diag.reason = f"sample point on a pole ({e.location})"
            c = None
        if c is not None:
            log_verbose("realize", f"n={n} attempt={attempt} cond={diag.gram_condition:.3e} spread={diag.consistency_spread:.3e}")
            return c
        log_verbose("realize", f"attempt {attempt} rejected: {diag.reason}")
    raise ConditioningError(f"no well-conditioned sample set after {cfg.retries + 1} attempts", history)


# --- partial-fraction assembly ---

def _flip(k: int) -> np.ndarray:
    return np.fliplr(np.eye(k))


def _shift(k: int) -> np.ndarray:
    return np.eye(k, k=1)


def _real_block(t: float, A: np.ndarray):
    """Jordan block at a real pole with sum_s A[s-1]/(z - t)^s as impedance."""
    k = A.size
    m = -A.real  # m_s = K* J N^s K
    sigma = 1.0 if m[k - 1] > 0 else -1.0
    c = np.zeros(k)
    c[k - 1] = math.sqrt(abs(m[k - 1]))
    for s in range(k - 2, -1, -1):
        acc = sigma * m[s] - sum(c[i] * c[k - 1 + s - i] for i in range(s + 1, k - 1))
        c[s] = acc / (2 * c[k - 1])
    return t * np.eye(k) + _shift(k), sigma * _flip(k), c.astype(complex)


def _pair_block(w: complex, A: np.ndarray):
    """Blocks at w and conj w with flip metric; A holds the coefficients at w."""
    k = A.size
    m = -A
    alpha = math.sqrt(float(np.max(np.abs(m))))
    c = np.zeros(k, dtype=complex)
    c[k - 1] = alpha
    d = np.conj(m) / alpha
    H = linalg.block_diag(w * np.eye(k) + _shift(k), np.conj(w) * np.eye(k) + _shift(k))
    return H, _flip(2 * k), np.concatenate([c, d])


def pf_realize(V: MatrixFunction) -> Colligation:
    R = _require_realizable_rational(V)
    if R.dim != 1:
        raise DimensionError("pf_realize works on scalar functions")
    Hs, Js, Ks = [], [], []
    for part in partial_fractions(R):
        A = part.coeffs[:, 0, 0]
        w = part.pole
        if abs(w.imag) <= REAL_AXIS * max(1.0, abs(w)):
            H, J, K = _real_block(w.real, A)
        elif w.imag > 0:
            H, J, K = _pair_block(w, A)
        else:
            continue
        Hs.append(H)
        Js.append(J)
        Ks.append(K)
    metric = SignatureMetric(linalg.block_diag(*Js))
    K = np.concatenate(Ks).reshape(-1, 1)
    return Colligation.from_impedance_form(metric, linalg.block_diag(*Hs), K, SignatureMetric.identity(1))


# --- verification ---

@dataclass
class RoundtripReport:
    max_impedance_error: float
    worst_point: Optional[complex]
    kernel_identity_residual: float
    minimal: Optional[bool]
    metric_kappa: int
    kernel_kappa: Optional[int]
    passed: bool
    problems: List[str] = field(default_factory=list)


def held_out_points(count: int, seed: int) -> List[complex]:
    rng = np.random.default_rng(seed + 1)
    return [complex(x, y) for x, y in zip(rng.uniform(-4, 4, count), rng.uniform(2.5, 6.0, count))]


def kernel_identity_residual(V: MatrixFunction, c: Colligation, points: Sequence[complex]) -> float:
    """max over pairs of |Gamma_zeta^[+] Gamma_z - N_V(zeta, z)| relative to max(1, |N_V|)."""
    gammas = [gamma_field(c, z) for z in points]
    G = c.metric.gram
    worst = 0.0
    for zeta, g_zeta in zip(points, gammas):
        for z, g_z in zip(points, gammas):
            model = c.Jdir.J @ g_zeta.conj().T @ G @ g_z
            exact = kernel_value(V, zeta, z)
            worst = max(worst, float(np.linalg.norm(model - exact) / max(1.0, np.linalg.norm(exact))))
    return worst


def roundtrip_verify(
    V: MatrixFunction,
    c: Colligation,
    points: Optional[Sequence[complex]] = None,
    tol: float = 1e-6,
    kernel_cfg: Optional[KernelConfig] = None,
    require_minimal: bool = True,
    check_kappa: bool = True,
) -> RoundtripReport:
    kernel_cfg = kernel_cfg or KernelConfig()
    pts = list(held_out_points(50, kernel_cfg.seed) if points is None else points)
    problems = []
    if V.dim != c.m:
        problems.append(f"channel dimension {c.m} differs from function dimension {V.dim}")
        return RoundtripReport(math.inf, None, math.inf, None, c.metric.kappa, None, False, problems)

    worst, worst_z = 0.0, None
    for z in pts:
        try:
            exact = V(z)
            model = impedance_V(c, z)
            err = float(np.linalg.norm(model - exact) / max(1e-300, np.linalg.norm(exact)))
        except (PoleError, ResolventError):
            err = math.inf
        if err > worst or worst_z is None:
            worst, worst_z = err, z
    if worst > tol:
        problems.append(f"impedance error {worst:.3e} at z = {worst_z}")

    try:
        kid = kernel_identity_residual(V, c, pts[:6])
    except (PoleError, ResolventError):
        kid = math.inf
    if kid > tol:
        problems.append(f"kernel identity residual {kid:.3e}")

    minimal = minimality_check(c).minimal
    if require_minimal and not minimal:
        problems.append("realization is not minimal")

    kernel_kappa = None
    if check_kappa:
        est = negative_squares(V, kernel_cfg)
        kernel_kappa = est.kappa
        if est.kappa != c.metric.kappa:
            problems.append(f"metric kappa {c.metric.kappa} differs from kernel kappa {est.kappa}")

    report = RoundtripReport(worst, worst_z, kid, minimal, c.metric.kappa, kernel_kappa, not problems, problems)
    log_verbose("verify", f"max_err={worst:.3e} kernel_identity={kid:.3e} minimal={minimal} passed={report.passed}")
    return report
