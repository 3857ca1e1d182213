"""Two scenarios, three decisions, six independent U[0, 1) costs per sample.

Each sample picks a decision under every requested rule and is scored by
the equal-weight average of the chosen decision's two scenario costs.

Randomness is counter based: sample ``i`` reads the eight 64-bit words of
Philox4x64 blocks ``2i`` and ``2i + 1`` under key ``seed`` and uses the first
six as ``C[s, d] = u[3 s + d]`` (word to double as ``(w >> 11) * 2**-53``).
Any partition of the index range therefore sees the same numbers, and the
exactly rounded sums from :func:`math.fsum` make the estimate independent
of chunking and worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ValidationError

RULES = ("minimax-cost", "minimax-regret")
WORDS_PER_SAMPLE = 8
CHUNK = 1 << 16


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int = 0
    rules: tuple[str, ...] = RULES
    tie_break: str = "first"
    workers: int = 1
    chunk: int = CHUNK

    def __post_init__(self) -> None:
        if int(self.samples) < 1:
            raise ValidationError("samples must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in 64 unsigned bits")
        rules = tuple(self.rules)
        if not rules or any(r not in RULES for r in rules):
            raise ValidationError(f"rules must be a non-empty subset of {RULES}")
        if self.tie_break not in ("first", "last"):
            raise ValidationError("tie_break must be 'first' or 'last'")
        if self.workers < 1 or self.chunk < 1:
            raise ValidationError("workers and chunk must be positive")
        object.__setattr__(self, "rules", rules)


@dataclass(frozen=True)
class RuleEstimate:
    mean: float
    stderr: float


@dataclass(frozen=True)
class McResult:
    estimates: Mapping[str, RuleEstimate] = field(default_factory=dict)
    samples: int = 0
    seed: int = 0

    def __getitem__(self, rule: str) -> RuleEstimate:
        return self.estimates[rule]


def sample_matrices(seed: int, start: int, count: int) -> np.ndarray:
    """Cost tables for samples ``start .. start + count - 1``, shape (count, 2, 3)."""
    bg = np.random.Philox(key=seed)
    bg.advance(2 * start)
    words = bg.random_raw(WORDS_PER_SAMPLE * count).reshape(count, WORDS_PER_SAMPLE)
    u = (words[:, :6] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return u.reshape(count, 2, 3)


def choose(C: np.ndarray, rule: str, tie_break: str = "first") -> np.ndarray:
    """Chosen decision index per sample."""
    if rule == "minimax-regret":
        C = C - C.min(axis=2, keepdims=True)
    worst = C.max(axis=1)
    if tie_break == "last":
        return worst.shape[1] - 1 - np.argmin(worst[:, ::-1], axis=1)
    return np.argmin(worst, axis=1)


def score_chunk(config: McConfig, start: int, count: int) -> dict[str, np.ndarray]:
    C = sample_matrices(config.seed, start, count)
    expected = C.mean(axis=1)  # equal scenario weights
    rows = np.arange(count)
    return {r: expected[rows, choose(C, r, config.tie_break)] for r in config.rules}


def run_study(config: McConfig) -> McResult:
    n = int(config.samples)
    starts = list(range(0, n, config.chunk))
    sizes = [min(config.chunk, n - s) for s in starts]
    if config.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            parts = list(pool.map(lambda a: score_chunk(config, *a), zip(starts, sizes)))
    else:
        parts = [score_chunk(config, s, m) for s, m in zip(starts, sizes)]
    out = {}
    for rule in config.rules:
        scores = np.concatenate([p[rule] for p in parts])
        mean = math.fsum(scores) / n
        if n > 1:
            var = math.fsum((scores - mean) ** 2) / (n - 1)
            stderr = math.sqrt(var / n)
        else:
            stderr = 0.0
        out[rule] = RuleEstimate(mean, stderr)
    return McResult(out, n, int(config.seed))
