"""Indefinite inner products on C^n.

[x, y] = (G x, y) = y* G x for an invertible Hermitian Gram matrix G. A
signature metric is the special case G = J with J^2 = I.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from . import config
from .errors import DimensionError, DomainError


@dataclass(frozen=True)
class Inertia:
    n_plus: int
    n_zero: int
    n_minus: int

    @property
    def dim(self) -> int:
        return self.n_plus + self.n_zero + self.n_minus

    @property
    def rank(self) -> int:
        return self.n_plus + self.n_minus

    def as_tuple(self):
        return (self.n_plus, self.n_zero, self.n_minus)


@dataclass(frozen=True)
class SpectralInertia:
    """Inertia plus the eigenvalues that sit in the gray band tau < |lam| <= factor * tau."""

    inertia: Inertia
    eigenvalues: np.ndarray
    tau: float
    ambiguous_minus: int
    ambiguous_plus: int

    @property
    def ambiguous(self) -> int:
        return self.ambiguous_minus + self.ambiguous_plus


def _norm(H: np.ndarray) -> float:
    return float(np.linalg.norm(H, 2)) if H.size else 0.0


def default_tol(n: int) -> float:
    return config.TOL * max(1, n)


def hermitian_part(H, tol: Optional[float] = None) -> np.ndarray:
    """Check H against H* and return (H + H*)/2."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionError(f"square matrix expected, got shape {H.shape}")
    tol = default_tol(H.shape[0]) if tol is None else tol
    scale = max(_norm(H), 1.0)
    if H.size and np.linalg.norm(H - H.conj().T, 2) > max(tol, 1e-12) * scale:
        raise DomainError("matrix is not Hermitian within tolerance")
    return 0.5 * (H + H.conj().T)


def spectral_inertia(H, tol: Optional[float] = None, ambiguity_factor: float = config.AMBIGUITY_FACTOR) -> SpectralInertia:
    Hh = hermitian_part(H, tol)
    n = Hh.shape[0]
    tol = default_tol(n) if tol is None else tol
    if n == 0:
        return SpectralInertia(Inertia(0, 0, 0), np.zeros(0), 0.0, 0, 0)
    lam = linalg.eigvalsh(Hh)
    tau = tol * max(1.0, _norm(Hh))
    n_minus = int(np.sum(lam < -tau))
    n_plus = int(np.sum(lam > tau))
    band = ambiguity_factor * tau
    amb_minus = int(np.sum((lam < -tau) & (lam >= -band)))
    amb_plus = int(np.sum((lam > tau) & (lam <= band)))
    return SpectralInertia(
        inertia=Inertia(n_plus, n - n_plus - n_minus, n_minus),
        eigenvalues=lam,
        tau=tau,
        ambiguous_minus=amb_minus,
        ambiguous_plus=amb_plus,
    )


def inertia(H, tol: Optional[float] = None) -> Inertia:
    return spectral_inertia(H, tol).inertia


def equilibrate(H) -> np.ndarray:
    """D H D with D = diag(1 / sqrt(max_k |H_jk|)); zero rows keep scale 1.

    A diagonal congruence, so the inertia is unchanged while rows of very
    different magnitude are brought to a common scale.
    """
    H = np.asarray(H, dtype=complex)
    if H.size == 0:
        return H
    row_max = np.max(np.abs(H), axis=1)
    d = np.ones_like(row_max)
    nz = row_max > 0
    d[nz] = 1.0 / np.sqrt(row_max[nz])
    return H * d[:, None] * d[None, :]


class IndefiniteMetric:
    """[x, y] = y* G x with G invertible and Hermitian."""

    def __init__(self, gram, tol: float = 1e-10):
        G = hermitian_part(gram, tol)
        if G.shape[0] == 0:
            raise DimensionError("metric needs dimension >= 1")
        s = linalg.svdvals(G)
        if s[-1] <= 1e-12 * s[0]:
            raise DomainError("metric Gram matrix is singular")
        self._G = G
        self._G.setflags(write=False)
        self._inertia = inertia(G, tol)

    @property
    def gram(self) -> np.ndarray:
        return self._G

    @property
    def dim(self) -> int:
        return self._G.shape[0]

    @property
    def kappa(self) -> int:
        return self._inertia.n_minus

    @property
    def inertia(self) -> Inertia:
        return self._inertia

    def inner(self, x, y) -> complex:
        return complex(np.vdot(y, self._G @ x))

    def _check(self, M) -> np.ndarray:
        M = np.asarray(M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != self.dim:
            raise DimensionError(f"operand with {M.shape[0] if M.ndim else 0} rows on a {self.dim}-dim metric")
        return M

    def adjoint(self, M) -> np.ndarray:
        """M^[+] = G^{-1} M* G, so that [Mx, y] = [x, M^[+] y]."""
        M = self._check(M)
        if M.shape[1] != self.dim:
            raise DimensionError("adjoint needs a square operator")
        return linalg.solve(self._G, M.conj().T @ self._G)

    def congruent(self, S) -> "IndefiniteMetric":
        S = np.asarray(S, dtype=complex)
        return IndefiniteMetric(S.conj().T @ self._G @ S)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, kappa={self.kappa})"


class SignatureMetric(IndefiniteMetric):
    def __init__(self, J, tol: float = 1e-10):
        J = np.asarray(J, dtype=complex)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise DimensionError(f"square matrix expected, got shape {J.shape}")
        if np.linalg.norm(J - J.conj().T, 2) > 1e-12 * max(1.0, _norm(J)):
            raise DomainError("signature metric must be Hermitian")
        if np.linalg.norm(J @ J - np.eye(J.shape[0]), 2) > tol:
            raise DomainError("signature metric must satisfy J^2 = I")
        super().__init__(J, tol)

    @property
    def J(self) -> np.ndarray:
        return self.gram

    @classmethod
    def diag(cls, signs) -> "SignatureMetric":
        return cls(np.diag(np.asarray(signs, dtype=float)))

    @classmethod
    def identity(cls, n: int) -> "SignatureMetric":
        return cls(np.eye(n))

    @classmethod
    def flip(cls, n: int, sign: float = 1.0) -> "SignatureMetric":
        """sign times the anti-diagonal exchange matrix."""
        return cls(sign * np.fliplr(np.eye(n)))

    def adjoint(self, M) -> np.ndarray:
        M = self._check(M)
        if M.shape[1] != self.dim:
            raise DimensionError("adjoint needs a square operator")
        return self.J @ M.conj().T @ self.J


def as_metric(J) -> IndefiniteMetric:
    if isinstance(J, IndefiniteMetric):
        return J
    return SignatureMetric(J)


def j_adjoint(M, J) -> np.ndarray:
    return as_metric(J).adjoint(M)


def is_pi_selfadjoint(M, J, tol: float = 1e-10) -> bool:
    M = np.asarray(M, dtype=complex)
    try:
        Mp = j_adjoint(M, J)
    except DimensionError:
        return False
    return bool(np.linalg.norm(M - Mp) <= tol * np.linalg.norm(M))


def random_signature(n: int, kappa: int, rng: np.random.Generator) -> SignatureMetric:
    if not 0 <= kappa <= n:
        raise DomainError(f"kappa={kappa} out of range for dimension {n}")
    signs = np.ones(n)
    signs[:kappa] = -1.0
    return SignatureMetric.diag(rng.permutation(signs))


def well_conditioned(n: int, rng: np.random.Generator, spread: float = 0.4) -> np.ndarray:
    """I + E with ||E||_2 = spread, so the condition number is at most (1+spread)/(1-spread)."""
    E = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return np.eye(n) + spread * E / np.linalg.norm(E, 2)
