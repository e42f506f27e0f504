"""Seeded test corpora of input pairs for the inequality sweeps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import gammaln

from .diffusion import smooth
from .fock import TruncatedState, make_fock, random_state

LAMBDAS = tuple(round(0.1 * k, 1) for k in range(1, 10))


@dataclass(frozen=True)
class PairCase:
    index: int
    x: TruncatedState
    y: TruncatedState
    lam: float
    label: str


@dataclass(frozen=True)
class CorpusConfig:
    size: int = 200
    seed: int = 7
    min_cutoff: int = 10
    max_cutoff: int = 16

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("corpus size must be positive")
        if not 2 <= self.min_cutoff <= self.max_cutoff:
            raise ValueError("need 2 <= min_cutoff <= max_cutoff")


def _random_arm(rng: np.random.Generator, cfg: CorpusConfig) -> tuple[TruncatedState, str]:
    d = int(rng.integers(cfg.min_cutoff, cfg.max_cutoff + 1))
    kind = rng.choice(["full", "low", "pure", "fock", "thermal", "coherent"], p=[0.2, 0.2, 0.15, 0.1, 0.2, 0.15])
    if kind == "fock":
        k = int(rng.integers(0, d))
        return make_fock(k, d), f"fock{k}@{d}"
    if kind == "thermal":
        N = float(rng.uniform(0.05, 2.0))
        return _clipped_thermal(N, d), f"thermal{N:.3f}@{d}"
    if kind == "coherent":
        alpha = complex(*rng.uniform(-1.2, 1.2, size=2))
        return _clipped_coherent(alpha, d), f"coherent{alpha:.3f}@{d}"
    rank = {"full": d, "low": int(rng.integers(2, max(3, d // 2))), "pure": 1}[kind]
    return random_state(d, rank=rank, seed=int(rng.integers(2**32))), f"rank{rank}@{d}"


def _clipped_thermal(N: float, d: int) -> TruncatedState:
    """Geometric distribution cut at ``d`` levels and renormalized (exactly a state on the cutoff)."""
    p = (N / (N + 1)) ** np.arange(d)
    return TruncatedState(np.diag(p / p.sum()).astype(complex), d)


def _clipped_coherent(alpha: complex, d: int) -> TruncatedState:
    n = np.arange(d)
    amp = np.exp(n * np.log(abs(alpha) + 1e-300) - 0.5 * gammaln(n + 1)) * np.exp(1j * n * np.angle(alpha))
    amp /= np.linalg.norm(amp)
    return TruncatedState(np.outer(amp, amp.conj()), d)


def random_pairs(cfg: CorpusConfig = CorpusConfig()) -> Iterator[PairCase]:
    """Random single-mode product pairs with mixed ranks and cutoffs; ``lam`` cycles over 0.1..0.9."""
    rng = np.random.default_rng(cfg.seed)
    for i in range(cfg.size):
        x, lx = _random_arm(rng, cfg)
        y, ly = _random_arm(rng, cfg)
        yield PairCase(i, x, y, LAMBDAS[i % len(LAMBDAS)], f"{lx}|{ly}")


@dataclass(frozen=True)
class SmoothedConfig:
    size: int = 50
    seed: int = 11
    base_cutoff: tuple[int, int] = (4, 6)
    cutoff: int = 22
    epsilon: float = 0.1


def smoothed_state(rng: np.random.Generator, cfg: SmoothedConfig) -> tuple[TruncatedState, str]:
    """A low-energy random or Fock state made full rank by a short diffusion."""
    b = int(rng.integers(cfg.base_cutoff[0], cfg.base_cutoff[1] + 1))
    u = rng.random()
    if u < 0.2:
        k = int(rng.integers(0, b))
        base, label = make_fock(k, b), f"fock{k}"
    elif u < 0.4:
        N = float(rng.uniform(0.05, 0.6))
        base, label = _clipped_thermal(N, b), f"thermal{N:.3f}@{b}"
    elif u < 0.55:
        alpha = complex(*rng.uniform(-0.6, 0.6, size=2))
        base, label = _clipped_coherent(alpha, b), f"coherent{alpha:.3f}@{b}"
    else:
        rank = int(rng.integers(1, b + 1))
        base, label = random_state(b, rank=rank, seed=int(rng.integers(2**32))), f"rank{rank}@{b}"
    return smooth(base, cfg.epsilon, cutoff=cfg.cutoff), f"{label}~{cfg.epsilon}"


def smoothed_states(cfg: SmoothedConfig = SmoothedConfig()) -> Iterator[tuple[TruncatedState, str]]:
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.size):
        yield smoothed_state(rng, cfg)


def smoothed_pairs(cfg: SmoothedConfig = SmoothedConfig()) -> Iterator[PairCase]:
    rng = np.random.default_rng(cfg.seed)
    for i in range(cfg.size):
        x, lx = smoothed_state(rng, cfg)
        y, ly = smoothed_state(rng, cfg)
        yield PairCase(i, x, y, LAMBDAS[i % len(LAMBDAS)], f"{lx}|{ly}")
