"""Dropout-sampled posteriors and acquisition scoring for the unlabelled pool.

Scores use natural-log entropies throughout; only the induced ordering
matters for acquisition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import Network


@dataclass(frozen=True)
class PosteriorSamples:
    """T stochastic softmax rows for one instance (one row per dropout mask)."""

    probs: np.ndarray  # (T, C), every row sums to 1

    def __post_init__(self):
        if self.probs.ndim != 2 or self.probs.shape[0] < 1:
            raise ValueError("need a (T, C) matrix with T >= 1")
        if not np.allclose(self.probs.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("rows must sum to 1")

    @property
    def mean_probs(self) -> np.ndarray:
        return self.probs.mean(axis=0)


def instance_seed(
    base_seed: int, epoch: int, instance_id: int
) -> np.random.SeedSequence:
    """Deterministic per-(run, epoch, instance) seed for dropout sampling."""
    return np.random.SeedSequence([int(base_seed), int(epoch), int(instance_id)])


def mc_posteriors(
    net: Network,
    x: np.ndarray,
    n_passes: int,
    seed: int | np.random.SeedSequence,
) -> PosteriorSamples:
    """Run `n_passes` forward passes with independent seeded dropout masks.

    All passes are drawn from one generator, so the full matrix is a pure
    function of (network, x, n_passes, seed).
    """
    if n_passes < 1:
        raise ValueError("need at least one pass")
    rng = np.random.default_rng(seed)
    row = np.asarray(x, dtype=np.float64).reshape(1, -1)
    tiled = np.repeat(row, n_passes, axis=0)
    masks = net.make_masks(n_passes, rng)
    probs, _, _ = net.forward_batch(tiled, masks)
    return PosteriorSamples(probs=probs)


def _entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64)
    nz = p > 0.0
    return float(-(p[nz] * np.log(p[nz])).sum())


def bald_mcd(samples: PosteriorSamples) -> float:
    """Disagreement score: entropy of the mean row minus mean row entropy.

    Non-negative by Jensen's inequality and zero exactly when all rows agree.
    """
    mean_entropy = float(
        np.mean([_entropy(row) for row in samples.probs])
    )
    return max(0.0, _entropy(samples.mean_probs) - mean_entropy)


def predictive_entropy(samples: PosteriorSamples) -> float:
    """Entropy of the mean posterior, in [0, ln C]."""
    return _entropy(samples.mean_probs)


def normalized_entropy(probs: np.ndarray) -> float:
    """Entropy of a distribution scaled by ln C, so the range is [0, 1]."""
    n_classes = len(probs)
    if n_classes < 2:
        return 0.0
    return _entropy(probs) / math.log(n_classes)


def select_top_b(scores: np.ndarray | list[float], b_frac: float) -> list[int]:
    """Indices of the ceil(b_frac * N) highest scores, ties to lower index."""
    if not 0.0 < b_frac <= 1.0:
        raise ValueError("b_frac must lie in (0, 1]")
    values = np.asarray(scores, dtype=np.float64)
    if values.size == 0:
        return []
    count = math.ceil(b_frac * values.size)
    order = np.lexsort((np.arange(values.size), -values))
    return [int(i) for i in order[:count]]
