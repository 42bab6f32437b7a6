from __future__ import annotations
from dataclasses import dataclass, replace
import os

FORMAT_VERSION = 1

# Reproducible sampling unless overridden (--seed or NKAPPA_SEED)
DEFAULT_SEED = 0x4E4B

# Relative eigenvalue / singular value threshold
TOL = 1e-10

# Kernel Gram grids: sizes grid_start, 2*grid_start, ... up to grid_max
KERNEL_GRID_START = 8
KERNEL_GRID_MAX = 256
# Eigenvalues within AMBIGUITY_FACTOR * tau of zero are neither zero nor counted
AMBIGUITY_FACTOR = 100.0

# Sampling rectangle in C_+: (x_min, x_max, y_min, y_max)
SAMPLE_BOX = (-5.0, 5.0, 0.1, 10.0)

# Ray z = iy used for limits at infinity
Y_MIN = 1e1
Y_MAX = 1e6
Y_PER_DECADE = 8
LIMIT_RTOL = 1e-6
B_BOUND = 1e4

# Realization
COND_MAX = 1e10
RETRIES = 5
CIRCLE_CENTER = 2j
CIRCLE_RADIUS = 1.0
CONSISTENCY_TOL = 1e-8

# Chebyshev nodes for the example2 block model
QUAD_NODES = 200

CSV_DIGITS = 17

# Toggle verbose logging from CLI
VERBOSE = os.environ.get("NKAPPA_VERBOSE", "") not in ("", "0")


def env_seed(default: int) -> int:
    raw = os.environ.get("NKAPPA_SEED")
    if raw is None or not raw.strip():
        return default
    return int(raw, 0)


@dataclass(frozen=True)
class KernelConfig:
    grid_start: int = KERNEL_GRID_START
    grid_max: int = KERNEL_GRID_MAX
    seed: int = DEFAULT_SEED
    tol: float | None = None  # None: TOL scaled by the Gram dimension
    ambiguity_factor: float = AMBIGUITY_FACTOR
    box: tuple[float, float, float, float] = SAMPLE_BOX

    @classmethod
    def from_env(cls, **overrides) -> "KernelConfig":
        cfg = cls(**overrides)
        return replace(cfg, seed=env_seed(cfg.seed))


@dataclass(frozen=True)
class LimitConfig:
    y_min: float = Y_MIN
    y_max: float = Y_MAX
    per_decade: int = Y_PER_DECADE
    rtol: float = LIMIT_RTOL
    bound: float = B_BOUND


@dataclass(frozen=True)
class RealizeConfig:
    cond_max: float = COND_MAX
    retries: int = RETRIES
    center: complex = CIRCLE_CENTER
    radius: float = CIRCLE_RADIUS
    consistency_tol: float = CONSISTENCY_TOL
    tol: float = TOL
