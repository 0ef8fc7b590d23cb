"""Energy bookkeeping for DSC runs."""
from __future__ import annotations

import numpy as np

from ..operators import CausalOperator
from ..timesignal import Signal


def quadratic_energy(v) -> float:
    v = np.asarray(v)
    return float(np.real(np.vdot(v, v)))


def energy_window(G: CausalOperator) -> int:
    """Number of full steps of ``h1`` the full-step operator ``G`` reads.

    With ``g(t + tau) = G[e + g](t)`` the future of a memoryless-map run is
    fixed by the last ``energy_window(G)`` values of ``g``; their summed
    energy is what is conserved (or dissipated).
    """
    if G.memory_depth is None:
        raise ValueError("energy in flight needs an operator with finite memory")
    return G.memory_depth * G.step // 2 + 1


def energy_in_flight(h1: Signal, n_steps: int, window: int) -> np.ndarray:
    """``E(n) = sum_{j < window} ||h1((n - j) tau)||**2`` for ``n = 0..n_steps``."""
    per_step = np.array([quadratic_energy(h1(2 * n)) for n in range(n_steps + 1)])
    return np.array([per_step[max(n + 1 - window, 0) : n + 1].sum() for n in range(n_steps + 1)])
