"""Single-node scatterers: linear diffusion, saturating clip, time-varying rotor."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dsc import ScatteringMapPair, lift_connection, lift_reflection
from ..timesignal import StateSpace

_EPS = 1e-12


def _identity_routing(space: StateSpace):
    return lift_connection(lambda k, hist: hist(k), space, name="C[identity]")


@dataclass(frozen=True)
class DiffusionNode:
    """Nonnegative scattering matrix with column sums <= 1."""

    D: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.D, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValueError("D must be square")
        if np.any(D < 0):
            raise ValueError("D must be componentwise nonnegative")
        sums = D.sum(axis=0)
        if np.any(sums > 1 + _EPS):
            raise ValueError(f"D is not sub-stochastic: column sums {sums}")
        object.__setattr__(self, "D", D)

    @property
    def n(self) -> int:
        return self.D.shape[0]


def diffusion_maps(node: DiffusionNode) -> ScatteringMapPair:
    space = StateSpace(node.n)
    D = node.D
    return ScatteringMapPair(
        _identity_routing(space),
        lift_reflection(lambda k, hist: D @ hist(k), space, name="R[diffusion]"),
        name=f"diffusion{node.n}",
    )


def clip(x, s: float) -> np.ndarray:
    """``sign(x) * min(|x|, s)`` componentwise."""
    return np.clip(x, -s, s)


@dataclass(frozen=True)
class SaturatingScatterer:
    """``z -> clip(M z, s)`` with ``||M||_2 <= 1``."""

    M: np.ndarray
    s: float = 1.0

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("M must be square")
        if np.linalg.norm(M, 2) > 1 + _EPS:
            raise ValueError(f"M is not a contraction: ||M|| = {np.linalg.norm(M, 2):.6g}")
        if not self.s > 0:
            raise ValueError("clip threshold must be positive")
        object.__setattr__(self, "M", M)

    @property
    def n(self) -> int:
        return self.M.shape[0]


def saturating_maps(sat: SaturatingScatterer) -> ScatteringMapPair:
    space = StateSpace(sat.n)
    M, s = sat.M, sat.s
    return ScatteringMapPair(
        _identity_routing(space),
        lift_reflection(lambda k, hist: clip(M @ hist(k), s), space, name="R[saturating]"),
        name="saturating",
    )


@dataclass(frozen=True)
class RotorNode:
    """Two-port node with a time-varying rotation and an averaging connection.

    Reflection at half step ``k`` rotates by ``theta * k``; connection is
    ``sum_j w_j f(t - j tau)`` with ``sum |w_j| <= 1``.
    """

    theta: float = 0.3
    weights: tuple[float, ...] = (0.5, 0.5)

    def __post_init__(self):
        if not self.weights:
            raise ValueError("need at least one connection weight")
        if sum(abs(w) for w in self.weights) > 1 + _EPS:
            raise ValueError("connection weights must satisfy sum |w_j| <= 1")


def rotation(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def rotor_maps(node: RotorNode) -> ScatteringMapPair:
    space = StateSpace(2)
    w = tuple(float(x) for x in node.weights)
    m = len(w) - 1

    def connect(k, hist):
        acc = np.zeros(2)
        for j, wj in enumerate(w):
            acc = acc + wj * hist(k - 2 * j)
        return acc

    return ScatteringMapPair(
        lift_connection(connect, space, memory_depth=m, name=f"C[avg{m + 1}]"),
        lift_reflection(lambda k, hist: rotation(node.theta * k) @ hist(k), space, name="R[rotor]"),
        name="rotor",
    )
