from __future__ import annotations
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from . import config
from .config import KernelConfig
from .console import log_verbose
from .errors import DomainError, PoleError
from .indefinite import Inertia, equilibrate, inertia, spectral_inertia
from .ratfun import MatrixFunction

# First grid points: a fixed lattice spread over the sampling box
LATTICE = tuple(complex(x, y) for y in (0.55, 1.85) for x in (-2.7, -0.9, 0.9, 2.7))
COINCIDE = 1e-12
STABLE_RUN = 3


@dataclass(frozen=True, eq=False)
class KernelGram:
    points: Tuple[complex, ...]
    directions: np.ndarray  # row j is h_j
    gram: np.ndarray
    inertia: Inertia


@dataclass(frozen=True)
class GridStep:
    size: int
    negatives: int
    positives: int
    zeros: int
    ambiguous: int


@dataclass(frozen=True, eq=False)
class KappaEstimate:
    kappa: int
    stabilized: bool
    history: Tuple[GridStep, ...]
    grids_used: str

    @property
    def counts(self) -> List[Tuple[int, int]]:
        """(grid size, negative count) pairs."""
        return [(s.size, s.negatives) for s in self.history]


@dataclass(frozen=True, eq=False)
class RankEstimate:
    rank: int
    stabilized: bool
    history: Tuple[GridStep, ...]
    grids_used: str


def _check_point(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0:
        raise DomainError(f"kernel points must lie off the real axis (got {z})")
    return z


def kernel_value(V: MatrixFunction, z: complex, zeta: complex) -> np.ndarray:
    """N_V(z, zeta) = (V(zeta) - V(z)*) / (zeta - conj z).

    At zeta = conj z the quotient is replaced by its limit V'(zeta).
    """
    z, zeta = _check_point(z), _check_point(zeta)
    gap = zeta - z.conjugate()
    if gap == 0 or abs(gap) < COINCIDE:
        return V.derivative(zeta)
    return (V(zeta) - V(z).conj().T) / gap


def _default_directions(n: int, m: int) -> np.ndarray:
    H = np.zeros((n, m), dtype=complex)
    for j in range(n):
        H[j, j % m] = 1.0
    return H


def _assemble(V: MatrixFunction, z: np.ndarray, H: np.ndarray, values: np.ndarray) -> np.ndarray:
    # gram[j, k] = h_j* N(z_j, z_k) h_k
    n = z.size
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    A = np.einsum("kab,kb->ak", values, H)  # column k is V(z_k) h_k
    Hc = H.T
    num = Hc.conj().T @ A - A.conj().T @ Hc
    den = z[None, :] - z.conj()[:, None]
    coincide = np.abs(den) < COINCIDE
    G = num / np.where(coincide, 1.0, den)
    for j, k in np.argwhere(coincide):
        G[j, k] = H[j].conj() @ V.derivative(z[k]) @ H[k]
    return G


def gram_matrix(V: MatrixFunction, points: Sequence[complex], directions=None, tol: Optional[float] = None) -> KernelGram:
    pts = tuple(_check_point(p) for p in points)
    n, m = len(pts), V.dim
    if directions is None:
        H = _default_directions(n, m)
    else:
        H = np.asarray(directions, dtype=complex).reshape(n, m)
        if n and np.any(np.linalg.norm(H, axis=1) == 0):
            raise DomainError("kernel directions must be nonzero")
    values = np.array([V(p) for p in pts], dtype=complex).reshape(n, m, m)
    G = _assemble(V, np.asarray(pts, dtype=complex), H, values)
    return KernelGram(points=pts, directions=H, gram=G, inertia=inertia(equilibrate(G), tol))


class _GridSampler:
    """Nested point/direction sequence: every grid is a prefix of the next one."""

    def __init__(self, V: MatrixFunction, cfg: KernelConfig):
        self.V = V
        self.m = V.dim
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self._lattice = iter(LATTICE)
        self.points: List[complex] = []
        self.dirs: List[np.ndarray] = []
        self.values: List[np.ndarray] = []
        self.skipped = 0

    def _candidate(self) -> complex:
        z = next(self._lattice, None)
        if z is not None:
            return z
        x0, x1, y0, y1 = self.cfg.box
        return complex(self.rng.uniform(x0, x1), self.rng.uniform(y0, y1))

    def _direction(self, j: int) -> np.ndarray:
        m = self.m
        h = np.zeros(m, dtype=complex)
        if m == 1 or (j // m) % 2 == 0:
            h[j % m] = 1.0
            return h
        h = self.rng.standard_normal(m) + 1j * self.rng.standard_normal(m)
        return h / np.linalg.norm(h)

    def take(self, count: int):
        while len(self.points) < count:
            z = self._candidate()
            try:
                val = self.V(z)
            except PoleError:
                self.skipped += 1
                log_verbose("kernel", f"skipping sample point {z:.6g} (pole)")
                continue
            self.dirs.append(self._direction(len(self.points)))
            self.points.append(z)
            self.values.append(val)
        return (
            np.asarray(self.points[:count], dtype=complex),
            np.asarray(self.dirs[:count]),
            np.asarray(self.values[:count]),
        )

    def describe(self, sizes) -> str:
        x0, x1, y0, y1 = self.cfg.box
        return (
            f"lattice{len(LATTICE)}+random seed={self.cfg.seed:#x} box=[{x0:g},{x1:g}]x[{y0:g},{y1:g}]i "
            f"sizes={','.join(str(s) for s in sizes)}"
        )


def _grid_steps(V: MatrixFunction, cfg: KernelConfig, tag: str, settled):
    """Run the grid-doubling loop; settled(history) decides when to stop."""
    if not V.symmetric:
        raise DomainError("kernel analysis needs a symmetric function V(conj z) = V(z)*")
    sampler = _GridSampler(V, cfg)
    history: List[GridStep] = []
    size = max(1, cfg.grid_start)
    while size <= cfg.grid_max:
        z, H, values = sampler.take(size)
        G = equilibrate(_assemble(V, z, H, values))
        si = spectral_inertia(G, cfg.tol, cfg.ambiguity_factor)
        step = GridStep(size, si.inertia.n_minus, si.inertia.n_plus, si.inertia.n_zero, si.ambiguous)
        history.append(step)
        log_verbose(tag, f"grid={size} negatives={step.negatives} positives={step.positives} "
                         f"zeros={step.zeros} ambiguous={step.ambiguous}")
        if settled(history, si):
            return history, True, sampler
        size *= 2
    return history, False, sampler


def negative_squares(V: MatrixFunction, cfg: Optional[KernelConfig] = None) -> KappaEstimate:
    cfg = cfg or KernelConfig()
    ambiguous_minus = []

    def settled(history, si):
        ambiguous_minus.append(si.ambiguous_minus)
        if len(history) < STABLE_RUN:
            return False
        tail = history[-STABLE_RUN:]
        return len({s.negatives for s in tail}) == 1 and not any(ambiguous_minus[-STABLE_RUN:])

    history, ok, sampler = _grid_steps(V, cfg, "kappa", settled)
    kappa = history[-1].negatives if history else 0
    if not ok:
        log_verbose("kappa", f"no stabilization up to grid {cfg.grid_max}; last count {kappa}")
    return KappaEstimate(
        kappa=kappa,
        stabilized=ok,
        history=tuple(history),
        grids_used=sampler.describe([s.size for s in history]),
    )


def kernel_rank(V: MatrixFunction, cfg: Optional[KernelConfig] = None) -> RankEstimate:
    cfg = cfg or KernelConfig()

    def settled(history, si):
        if len(history) < STABLE_RUN:
            return False
        tail = history[-STABLE_RUN:]
        return len({s.positives + s.negatives for s in tail}) == 1 and not any(s.ambiguous for s in tail)

    history, ok, sampler = _grid_steps(V, cfg, "rank", settled)
    last = history[-1] if history else GridStep(0, 0, 0, 0, 0)
    return RankEstimate(
        rank=last.positives + last.negatives,
        stabilized=ok,
        history=tuple(history),
        grids_used=sampler.describe([s.size for s in history]),
    )


def strictness_check(V: MatrixFunction, points: Optional[Sequence[complex]] = None, tol: float = config.TOL) -> bool:
    """True iff the kernel matrices N_V(z, zeta) over all point pairs share only the zero null vector."""
    pts = [_check_point(p) for p in (LATTICE if points is None else points)]
    if not pts:
        return False
    blocks = [kernel_value(V, z, zeta) for z in pts for zeta in pts]
    stack = np.vstack(blocks)
    s = linalg.svdvals(stack)
    if s.size < V.dim or s[0] == 0:
        return False
    return bool(s[-1] > tol * s[0])
