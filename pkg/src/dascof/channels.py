"""Channel models and per-trial random streams for the Monte Carlo engine.

Every random draw comes from its own counter-based stream keyed by
``(seed, trial, tag)``.  Adding a scheme or reordering the evaluation never
shifts the channel realizations, and trials can run in any order.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .baselines import wyner_matrix

__all__ = ["ChannelModel", "trial_rng", "draw_channel", "MODEL_KINDS"]

MODEL_KINDS = ("bernoulli_gaussian", "rayleigh", "wyner")


def trial_rng(seed: int, trial: int, tag: str) -> np.random.Generator:
    """Philox generator keyed by the master seed, the trial index and a purpose tag."""
    key = np.random.SeedSequence([int(seed) & (2**64 - 1), int(trial), zlib.crc32(tag.encode())])
    return np.random.Generator(np.random.Philox(key))


@dataclass(frozen=True)
class ChannelModel:
    """A random (or fixed) channel ensemble.

    Drawn matrices have one row per receiver: ``L x K`` for the uplink
    (antenna terminals by users).  The Wyner model is square with
    ``K = L`` cells.

    Parameters
    ----------
    kind : {'bernoulli_gaussian', 'rayleigh', 'wyner'}
    K, L : int
    q : float
        Probability that an entry is present (``bernoulli_gaussian`` only).
    gamma : float
        Inter-cell gain (``wyner`` only).
    circulant : bool
        Wrap the Wyner network around (needs ``L >= 3``).
    seed : int
    """

    kind: str
    K: int
    L: int
    q: float = 1.0
    gamma: float = 0.0
    circulant: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown channel model {self.kind!r}")
        if self.K < 1 or self.L < 1:
            raise ValueError("K and L must be positive")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        if self.kind == "wyner":
            if self.K != self.L:
                raise ValueError("the Wyner model has K = L")
            if not 0.0 < self.gamma <= 1.0:
                raise ValueError("gamma must lie in (0, 1]")

    @property
    def random(self) -> bool:
        return self.kind != "wyner"


def draw_channel(model: ChannelModel, trial: int = 0, tag: str = "channel", shape=None) -> np.ndarray:
    """One channel realization for ``trial``.

    ``shape`` overrides the default ``(L, K)``; downlink callers pass
    ``(K, L)`` so that rows are users.  Entries are ``CN(0, 1)``; the
    Bernoulli-Gaussian model keeps each entry with probability ``q``.
    """
    rows, cols = (model.L, model.K) if shape is None else shape
    if model.kind == "wyner":
        return wyner_matrix(model.L, model.gamma, model.circulant)
    rng = trial_rng(model.seed, trial, tag)
    g = rng.standard_normal((rows, cols, 2))
    H = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)
    if model.kind == "bernoulli_gaussian":
        H = H * (rng.random((rows, cols)) < model.q)
    return H
