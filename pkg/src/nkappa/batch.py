"""Batch utilities: ray scans to CSV and generated test corpora."""
from __future__ import annotations
from dataclasses import dataclass, field
import os
from typing import Dict, List, Optional

import numpy as np

from . import config
from .classify import ray_trace
from .config import LimitConfig
from .console import log_verbose
from .errors import DomainError
from .formats import format_csv, format_function, write_json
from .ratfun import ONE, ComplexPolynomial, MatrixFunction, RationalFunction

SCAN_HEADER = ("y", "direction", "growth_Vff_over_y", "B_bound_y_ImVff", "decay_abs_Vf")
MAX_KAPPA = 4
MAX_POLES = 10
MIN_GAP = 0.25


def scan(V: MatrixFunction, cfg: Optional[LimitConfig] = None) -> str:
    """CSV trace along z = iy; rows at a pole carry 'pole' cells."""
    if not V.symmetric:
        raise DomainError("scan needs a symmetric function")
    return format_csv(SCAN_HEADER, ray_trace(V, cfg))


@dataclass
class CorpusEntry:
    name: str
    function: RationalFunction
    kappa: int
    deg_p: int
    deg_q: int
    poles: int
    realizable: bool
    params: Dict[str, object] = field(default_factory=dict)


def herglotz_sum(t: np.ndarray, c: np.ndarray):
    """Numerator and denominator of sum_j c_j / (t_j - z)."""
    den = ComplexPolynomial.from_roots(t)
    num = ComplexPolynomial.constant(0.0)
    for j, cj in enumerate(c):
        others = ComplexPolynomial.from_roots(np.delete(t, j))
        num = num + others * (-float(cj))
    return num, den


def _spread(rng: np.random.Generator, count: int, lo: float, hi: float, taken: List[float]) -> List[float]:
    out: List[float] = []
    while len(out) < count:
        x = float(rng.uniform(lo, hi))
        if all(abs(x - y) > MIN_GAP for y in taken + out):
            out.append(round(x, 3))
    return out


def _nonreal_roots(rng: np.random.Generator, count: int, taken: List[complex]) -> List[complex]:
    out: List[complex] = []
    while len(out) < count:
        w = complex(round(float(rng.uniform(-3, 3)), 3), round(float(rng.uniform(0.3, 0.9)), 3))
        if all(abs(w - u) > MIN_GAP for u in taken + out):
            out.append(w)
    return out


def corpus_function(
    kappa: int,
    poles: int,
    rng: np.random.Generator,
    deg_p: Optional[int] = None,
    deg_q: Optional[int] = None,
) -> CorpusEntry:
    """V = p p# / (q q#) V0 with V0 a Herglotz sum, kappa = max(deg p, deg q).

    By default deg q = kappa and deg p < deg q, which keeps V realizable.
    """
    if not 0 <= kappa <= MAX_KAPPA:
        raise DomainError(f"corpus kappa must lie in [0, {MAX_KAPPA}]")
    if not 1 <= poles <= MAX_POLES:
        raise DomainError(f"corpus pole count must lie in [1, {MAX_POLES}]")
    if deg_q is None:
        deg_q = kappa if deg_p is None or deg_p < kappa else int(rng.integers(0, kappa + 1))
    if deg_p is None:
        deg_p = int(rng.integers(0, max(1, deg_q))) if deg_q else 0
    if max(deg_p, deg_q) != kappa:
        raise DomainError(f"max(deg p, deg q) = {max(deg_p, deg_q)} differs from kappa = {kappa}")

    t = np.array(_spread(rng, poles, -4.0, 4.0, []))
    c = np.round(rng.uniform(0.2, 2.0, poles), 3)
    num, den = herglotz_sum(t, c)
    q_roots = _nonreal_roots(rng, deg_q, [])
    p_roots = _nonreal_roots(rng, deg_p, q_roots)
    p = ComplexPolynomial.from_roots(p_roots) if p_roots else ONE
    q = ComplexPolynomial.from_roots(q_roots) if q_roots else ONE
    V = RationalFunction.scalar(num * p * p.sharp(), den * q * q.sharp())
    params = {
        "t": t.tolist(),
        "c": c.tolist(),
        "p_roots": [[w.real, w.imag] for w in p_roots],
        "q_roots": [[w.real, w.imag] for w in q_roots],
    }
    return CorpusEntry(
        name="",
        function=V,
        kappa=kappa,
        deg_p=deg_p,
        deg_q=deg_q,
        poles=poles,
        realizable=deg_p <= deg_q,
        params=params,
    )


def generate_corpus(
    count: int,
    kappas=(0, 1, 2),
    poles: int = 3,
    seed: int = config.DEFAULT_SEED,
    realizable_only: bool = True,
) -> List[CorpusEntry]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        kappa = kappas[k % len(kappas)]
        n_poles = int(rng.integers(1, poles + 1))
        if realizable_only or kappa == 0 or k % 2 == 0:
            entry = corpus_function(kappa, n_poles, rng)
        else:
            entry = corpus_function(kappa, n_poles, rng, deg_p=kappa, deg_q=kappa - 1)
        entry.name = f"fn{k:03d}_k{kappa}"
        log_verbose("corpus", f"{entry.name} poles={n_poles} deg_p={entry.deg_p} deg_q={entry.deg_q}")
        out.append(entry)
    return out


def write_corpus(entries: List[CorpusEntry], outdir: str, seed: int) -> str:
    os.makedirs(outdir, exist_ok=True)
    manifest = {"format": config.FORMAT_VERSION, "seed": seed, "functions": []}
    for e in entries:
        fname = f"{e.name}.json"
        write_json(os.path.join(outdir, fname), format_function(e.function))
        manifest["functions"].append({
            "file": fname,
            "kappa": e.kappa,
            "deg_p": e.deg_p,
            "deg_q": e.deg_q,
            "poles": e.poles,
            "realizable": e.realizable,
            "params": e.params,
        })
    path = os.path.join(outdir, "manifest.json")
    write_json(path, manifest)
    return path
