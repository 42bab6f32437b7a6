"""Finite-dimensional colligations (state space C^n with an indefinite metric).

A colligation is (H_full, K, Jdir) over a metric G on the states and a
signature Jdir on the channel space E = C^m. With

    K^[+] = Jdir K* G                     (maps states to E)
    H_R   = (H_full + H_full^[+]) / 2
    H_I   = (H_full - H_full^[+]) / 2i

it must satisfy H_I = K Jdir K^[+] and have an injective K. The transfer and
impedance functions are

    W(z) = I - 2i K^[+] (H_full - z)^{-1} K Jdir
    V(z) = K^[+] (H_R - z)^{-1} K
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .console import log_verbose
from .errors import DimensionError, DomainError, ResolventError
from .indefinite import (
    IndefiniteMetric,
    SignatureMetric,
    inertia,
    random_signature,
    well_conditioned,
)
from .ratfun import gauss_chebyshev_u

SINGULAR = 1e-13


def _solve(A: np.ndarray, rhs: np.ndarray, z: complex, block: str) -> np.ndarray:
    s = linalg.svdvals(A)
    if s.size and s[-1] <= SINGULAR * max(1.0, s[0]):
        raise ResolventError(z, block)
    return linalg.solve(A, rhs)


class Colligation:
    def __init__(self, metric, H_full, K, Jdir=None):
        self.metric: IndefiniteMetric = metric if isinstance(metric, IndefiniteMetric) else SignatureMetric(metric)
        H = np.atleast_2d(np.asarray(H_full, dtype=complex))
        K = np.asarray(K, dtype=complex)
        if K.ndim == 1:
            K = K.reshape(-1, 1)
        n = self.metric.dim
        if H.shape != (n, n):
            raise DimensionError(f"H_full has shape {H.shape}, metric has dimension {n}")
        if K.shape[0] != n:
            raise DimensionError(f"K has {K.shape[0]} rows, metric has dimension {n}")
        m = K.shape[1]
        if Jdir is None:
            Jdir = SignatureMetric.identity(m)
        elif not isinstance(Jdir, SignatureMetric):
            Jdir = SignatureMetric(Jdir)
        if Jdir.dim != m:
            raise DimensionError(f"Jdir has dimension {Jdir.dim}, K has {m} columns")
        self.H_full = H
        self.K = K
        self.Jdir = Jdir
        self.H_full.setflags(write=False)
        self.K.setflags(write=False)

    @classmethod
    def from_impedance_form(cls, metric, H_R, K, Jdir=None) -> "Colligation":
        """Build the colligation whose real part is H_R: H_full = H_R + i K Jdir K^[+]."""
        draft = cls(metric, H_R, K, Jdir)
        H_full = np.asarray(H_R, dtype=complex) + 1j * draft.K @ draft.Jdir.J @ draft.K_plus
        return cls(draft.metric, H_full, draft.K, draft.Jdir)

    @property
    def n(self) -> int:
        return self.metric.dim

    @property
    def m(self) -> int:
        return self.K.shape[1]

    @property
    def K_plus(self) -> np.ndarray:
        return self.Jdir.J @ self.K.conj().T @ self.metric.gram

    @property
    def H_adjoint(self) -> np.ndarray:
        return self.metric.adjoint(self.H_full)

    @property
    def H_R(self) -> np.ndarray:
        return 0.5 * (self.H_full + self.H_adjoint)

    @property
    def H_I(self) -> np.ndarray:
        return (self.H_full - self.H_adjoint) / 2j

    def congruent(self, S) -> "Colligation":
        """Same system in the coordinates x = S x'; the metric becomes S* G S."""
        S = np.asarray(S, dtype=complex)
        Si = linalg.inv(S)
        return Colligation(self.metric.congruent(S), Si @ self.H_full @ S, Si @ self.K, self.Jdir)

    def direct_sum(self, other: "Colligation") -> "Colligation":
        """Block-diagonal union sharing one channel space (the K blocks are stacked)."""
        if other.m != self.m:
            raise DimensionError("direct sum needs equal channel dimensions")
        G = linalg.block_diag(self.metric.gram, other.metric.gram)
        metric = SignatureMetric(G) if _is_involution(G) else IndefiniteMetric(G)
        return Colligation(metric, linalg.block_diag(self.H_full, other.H_full), np.vstack([self.K, other.K]), self.Jdir)

    def __repr__(self) -> str:
        return f"Colligation(n={self.n}, m={self.m}, kappa={self.metric.kappa})"


def _is_involution(G: np.ndarray) -> bool:
    return bool(np.allclose(G, G.conj().T) and np.allclose(G @ G, np.eye(G.shape[0])))


@dataclass
class ValidationReport:
    identity_residual: float
    K_margin: float
    metric_kappa: int
    passed: bool
    problems: List[str] = field(default_factory=list)


def validate(c: Colligation, tol: float = 1e-10) -> ValidationReport:
    problems = []
    lhs = c.H_I
    rhs = c.K @ c.Jdir.J @ c.K_plus
    scale = max(1.0, np.linalg.norm(c.H_full, 2), np.linalg.norm(c.K, 2) ** 2 * np.linalg.norm(c.metric.gram, 2))
    residual = float(np.linalg.norm(lhs - rhs, 2) / scale)
    if residual > tol:
        problems.append(f"colligation identity residual {residual:.3e} exceeds {tol:g}")
    s = linalg.svdvals(c.K)
    margin = float(s[-1] / s[0]) if s.size and s[0] > 0 else 0.0
    if margin <= 1e-12:
        problems.append("K has a nontrivial null space")
    report = ValidationReport(residual, margin, c.metric.kappa, not problems, problems)
    log_verbose("colligation", f"validate n={c.n} residual={residual:.3e} K_margin={margin:.3e} passed={report.passed}")
    return report


def transfer_W(c: Colligation, z: complex) -> np.ndarray:
    z = complex(z)
    X = _solve(c.H_full - z * np.eye(c.n), c.K @ c.Jdir.J, z, "H_full - z")
    return np.eye(c.m) - 2j * c.K_plus @ X


def impedance_V(c: Colligation, z: complex) -> np.ndarray:
    z = complex(z)
    return c.K_plus @ _solve(c.H_R - z * np.eye(c.n), c.K, z, "H_R - z")


def gamma_field(c: Colligation, z: complex) -> np.ndarray:
    """Gamma_z = (H_R - z)^{-1} K."""
    z = complex(z)
    return _solve(c.H_R - z * np.eye(c.n), c.K, z, "H_R - z")


def cayley(c: Colligation, z: complex) -> float:
    """|| V(z) - i (W(z) + I)^{-1} (W(z) - I) Jdir || relative to max(1, ||V(z)||)."""
    z = complex(z)
    W = transfer_W(c, z)
    V = impedance_V(c, z)
    I = np.eye(c.m)
    rhs = 1j * _solve(W + I, W - I, z, "W + I") @ c.Jdir.J
    return float(np.linalg.norm(V - rhs, 2) / max(1.0, np.linalg.norm(V, 2)))


@dataclass
class MinimalityReport:
    minimal: Optional[bool]
    rank: int
    singular_values: np.ndarray
    points: Tuple[complex, ...]


def default_test_points(count: int) -> List[complex]:
    # irregular points in C_+, away from symmetric spectra such as {i, -i}
    angles = 2 * np.pi * (np.arange(count) + 0.318) / count
    return [complex(0.41 + 2.3 * np.cos(a), 2.7 + 1.3 * np.sin(a)) for a in angles]


def minimality_check(c: Colligation, points: Optional[Sequence[complex]] = None, tol: float = 1e-10) -> MinimalityReport:
    points = list(default_test_points(c.n + 2) if points is None else points)
    columns = []
    used = []
    for z in points:
        try:
            columns.append(gamma_field(c, z))
            used.append(complex(z))
        except ResolventError:
            continue
    needed = -(-c.n // c.m)
    if len(used) < needed:
        return MinimalityReport(None, 0, np.zeros(0), tuple(used))
    M = np.hstack(columns)
    s = linalg.svdvals(M)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return MinimalityReport(rank == c.n, rank, s, tuple(used))


def w_kernel_gram(c: Colligation, points: Sequence[complex]):
    """Gram of (Jdir - W(zeta) Jdir W(z)*) / (i (zeta - conj z)) over points and basis directions.

    For a minimal colligation its negative inertia matches the metric kappa.
    """
    pts = [complex(p) for p in points]
    Ws = [transfer_W(c, p) for p in pts]
    m = c.m
    N = len(pts) * m
    G = np.empty((N, N), dtype=complex)
    J = c.Jdir.J
    for j, (zj, Wj) in enumerate(zip(pts, Ws)):
        for k, (zk, Wk) in enumerate(zip(pts, Ws)):
            block = (J - Wk @ J @ Wj.conj().T) / (1j * (zk - zj.conjugate()))
            G[j * m : (j + 1) * m, k * m : (k + 1) * m] = block
    G = 0.5 * (G + G.conj().T)
    return G, inertia(G)


# --- block operator systems ---

@dataclass(frozen=True, eq=False)
class BlockSystem:
    """T = [[A0, -B*], [B, D]] on H0 + N with metric diag(I, -I)."""

    A0: np.ndarray
    B: np.ndarray
    D: np.ndarray

    @property
    def sizes(self) -> Tuple[int, int]:
        return self.A0.shape[0], self.D.shape[0]

    @property
    def D_re(self) -> np.ndarray:
        return 0.5 * (self.D + self.D.conj().T)

    @property
    def D_im(self) -> np.ndarray:
        return (self.D - self.D.conj().T) / 2j

    def T(self, real_part: bool = False) -> np.ndarray:
        D = self.D_re if real_part else self.D
        return np.block([[self.A0, -self.B.conj().T], [self.B, D]])

    @property
    def metric(self) -> SignatureMetric:
        n0, p = self.sizes
        return SignatureMetric.diag(np.concatenate([np.ones(n0), -np.ones(p)]))


def _block_operands(A0, B, D):
    A0 = np.atleast_2d(np.asarray(A0, dtype=complex))
    D = np.atleast_2d(np.asarray(D, dtype=complex))
    B = np.asarray(B, dtype=complex).reshape(D.shape[0], A0.shape[0])
    if A0.shape[0] != A0.shape[1] or D.shape[0] != D.shape[1]:
        raise DimensionError("A0 and D must be square")
    return A0, B, D


def schur_build(A0, B, D) -> Tuple[BlockSystem, Callable[[complex], np.ndarray]]:
    """Block system with Im D = -I and the impedance V(z) = -X(z)^{-1}.

    X(z) = D + B (A0 - z)^{-1} B* - z with the Hermitian D supplied here.
    """
    A0, B, D = _block_operands(A0, B, D)
    if not np.allclose(A0, A0.conj().T, atol=1e-12 * max(1.0, np.abs(A0).max())):
        raise DomainError("A0 must be Hermitian")
    if not np.allclose(D, D.conj().T, atol=1e-12 * max(1.0, np.abs(D).max())):
        raise DomainError("D must be Hermitian (the imaginary part -I is added here)")
    p = D.shape[0]
    block = BlockSystem(A0=A0, B=B, D=D - 1j * np.eye(p))

    def impedance(z: complex) -> np.ndarray:
        blocks = schur_resolvent(block, z, real_part=True)
        return -blocks[1][1]

    return block, impedance


def schur_resolvent(block: BlockSystem, z: complex, real_part: bool = False):
    """((R11, R12), (R21, R22)) with R = (T - z)^{-1}, via the Schur complement of A0 - z."""
    z = complex(z)
    n0, p = block.sizes
    D = block.D_re if real_part else block.D
    A = block.A0 - z * np.eye(n0)
    C = -block.B.conj().T
    s = linalg.svdvals(A) if n0 else np.ones(1)
    if s[-1] <= SINGULAR * max(1.0, s[0]):
        raise ResolventError(z, "A0 - z")
    lu = linalg.lu_factor(A) if n0 else None
    AiC = linalg.lu_solve(lu, C) if n0 else np.zeros((0, p), dtype=complex)
    X = D - z * np.eye(p) - block.B @ AiC
    sx = linalg.svdvals(X)
    if sx[-1] <= SINGULAR * max(1.0, sx[0]):
        raise ResolventError(z, "Schur complement X(z)")
    Xi = linalg.inv(X)
    if n0:
        BAi = linalg.lu_solve(lu, block.B.T, trans=1).T  # B (A0 - z)^{-1}
        Ai = linalg.lu_solve(lu, np.eye(n0))
    else:
        BAi = np.zeros((p, 0), dtype=complex)
        Ai = np.zeros((0, 0), dtype=complex)
    R11 = Ai + AiC @ Xi @ BAi
    R12 = -AiC @ Xi
    R21 = -Xi @ BAi
    return (R11, R12), (R21, Xi)


def schur_colligation(block: BlockSystem) -> Colligation:
    """Metric diag(I, -I), H_full = T, K the injection of N, Jdir = I."""
    n0, p = block.sizes
    K = np.vstack([np.zeros((n0, p)), np.eye(p)])
    return Colligation(block.metric, block.T(), K, SignatureMetric.identity(p))


def example2_block(gamma: float, d: float, nodes: int) -> BlockSystem:
    """Quadrature discretization of example2: A0 = diag(t_k), B = gamma sqrt(w_k)."""
    t, w = gauss_chebyshev_u(nodes)
    block, _ = schur_build(np.diag(t), gamma * np.sqrt(w)[None, :], np.array([[d]]))
    return block


# --- random systems ---

def random_colligation(n: int, m: int, kappa: int, rng: np.random.Generator, mix: bool = True) -> Colligation:
    """Valid colligation with a random pi-selfadjoint real part and Jdir = I.

    With mix=True the state coordinates are scrambled by a well-conditioned
    congruence, so the metric is a general Hermitian Gram matrix.
    """
    metric = random_signature(n, kappa, rng)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H_R = 0.5 * (X + metric.adjoint(X))
    K = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    c = Colligation.from_impedance_form(metric, H_R, K, SignatureMetric.identity(m))
    if mix:
        c = c.congruent(well_conditioned(n, rng))
    return c
