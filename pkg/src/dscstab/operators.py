"""Causal operators on signals and their composition algebra.

An operator is a callback ``func(history, k) -> vector`` evaluated at
half-step index ``k``.  ``apply`` is the raw call used by the checkers;
``at`` is what the engines use: it hands the callback the history
truncated at ``k`` (and cut down to the declared taps), so a well-behaved
operator cannot see the future even by accident.
"""
from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .timesignal import Signal, StateSpace

__all__ = [
    "CausalOperator",
    "compose",
    "pointwise",
    "identity",
    "zero_operator",
    "delay",
    "shift_operator",
    "scale",
    "convolution_operator",
    "lookahead",
]

FULL_STEP = 2
HALF_STEP = 1


class CausalOperator:
    """History-to-value map on one state space.

    Parameters
    ----------
    func : callable
        ``func(history: Signal, k: int) -> array`` giving the value at ``k``.
    space : StateSpace
        Space of both input and output values.
    memory_depth : int or None
        Number of past steps (of size ``step``) the operator may read, so
        it depends on the history at ``k, k - step, ..., k - memory_depth*step``.
        ``None`` means unbounded memory.
    step : int
        Lattice spacing in half steps: 2 for ``I``/``J`` operators, 1 for ``H``.
    taps : callable, optional
        ``taps(k) -> iterable of indices`` read by ``func``; overrides the
        window implied by ``memory_depth``.
    """

    def __init__(
        self,
        func: Callable[[Signal, int], np.ndarray],
        space: StateSpace,
        *,
        memory_depth: int | None = None,
        step: int = FULL_STEP,
        taps: Callable[[int], Iterable[int]] | None = None,
        name: str = "F",
    ):
        if memory_depth is not None and memory_depth < 0:
            raise ValueError("memory_depth must be >= 0 or None")
        if step not in (HALF_STEP, FULL_STEP):
            raise ValueError("step must be 1 (half step) or 2 (full step)")
        self.func = func
        self.space = space
        self.memory_depth = memory_depth
        self.step = step
        self.name = name
        self._taps = taps

    def taps(self, k: int) -> Iterable[int] | None:
        if self._taps is not None:
            return self._taps(k)
        if self.memory_depth is None:
            return None
        return range(k - self.memory_depth * self.step, k + 1, self.step)

    def apply(self, history: Signal, k: int) -> np.ndarray:
        if history.space != self.space:
            raise ValueError(f"{self.name}: state space mismatch ({history.space} vs {self.space})")
        return self.space.vector(self.func(history, k))

    def at(self, f: Signal, k: int) -> np.ndarray:
        """Evaluate on ``truncate(f, k)``."""
        taps = self.taps(k)
        if taps is None:
            h = f.truncate(k)
        else:
            h = f.restrict(s for s in taps if s <= k)
        return self.apply(h, k)

    def output(self, f: Signal, points: Iterable[int]) -> Signal:
        """The signal ``F f`` sampled on ``points``; exact zeros are not stored."""
        vals = {}
        for k in points:
            v = self.at(f, k)
            if np.any(v):
                vals[k] = v
        return Signal(f.grid, self.space, vals)

    __call__ = output

    def __matmul__(self, other: "CausalOperator") -> "CausalOperator":
        return compose(self, other)

    def __repr__(self):
        depth = "inf" if self.memory_depth is None else self.memory_depth
        return f"CausalOperator({self.name}, dim={self.space.dim}, depth={depth}, step={self.step})"


def _taps_union(outer: CausalOperator, inner: CausalOperator):
    def taps(k):
        pts = outer.taps(k)
        if pts is None:
            return None
        seen = set()
        for s in pts:
            if s > k:
                continue
            t = inner.taps(s)
            if t is None:
                return None
            seen.update(t)
        return sorted(seen)

    return taps


def compose(outer: CausalOperator, inner: CausalOperator) -> CausalOperator:
    """Product ``outer . inner`` of two causal operators.

    The inner operator is evaluated, on histories truncated at each point,
    wherever the outer one reads.
    """
    if outer.space != inner.space:
        raise ValueError(f"cannot compose {outer.name} and {inner.name}: state spaces differ")

    def func(f: Signal, k: int):
        pts = outer.taps(k)
        if pts is None:
            lo = f.first if f.first is not None else k
            pts = range(min(lo, k), k + 1)
        g = {}
        for s in pts:
            if s > k:
                continue
            v = inner.at(f, s)
            if np.any(v):
                v.flags.writeable = False
                g[s] = v
        return outer.apply(Signal._wrap(f.grid, f.space, g), k)

    if outer.memory_depth is None or inner.memory_depth is None:
        depth = None
    else:
        depth = outer.memory_depth * outer.step + inner.memory_depth * inner.step
    return CausalOperator(
        func,
        outer.space,
        memory_depth=depth,
        step=HALF_STEP,
        taps=_taps_union(outer, inner),
        name=f"{outer.name}*{inner.name}",
    )


def pointwise(fn: Callable[[np.ndarray], np.ndarray], space: StateSpace, name: str = "pointwise") -> CausalOperator:
    """Memoryless operator ``F f(k) = fn(f(k))``.  ``fn(0)`` should be 0."""
    return CausalOperator(lambda f, k: fn(f(k)), space, memory_depth=0, taps=lambda k: (k,), name=name)


def identity(space: StateSpace) -> CausalOperator:
    return pointwise(lambda z: z, space, name="identity")


def zero_operator(space: StateSpace) -> CausalOperator:
    return CausalOperator(lambda f, k: space.zero(), space, memory_depth=0, taps=lambda k: (), name="zero")


def shift_operator(space: StateSpace, s: int) -> CausalOperator:
    """``T_s``: ``F f(k) = f(k + s)`` with ``s`` in half steps.

    Causal only for ``s <= 0``; positive ``s`` is accepted so that the
    checkers can be demonstrated on it.
    """
    s = int(s)
    depth = -s if s <= 0 else None
    return CausalOperator(
        lambda f, k: f(k + s), space, memory_depth=depth, step=HALF_STEP, taps=lambda k: (k + s,), name=f"T({s})"
    )


def delay(space: StateSpace, steps: int = 1, step: int = FULL_STEP) -> CausalOperator:
    """Pure delay by ``steps`` lattice steps: ``F f(k) = f(k - steps*step)``."""
    if steps < 0:
        raise ValueError("delay must be non-negative")
    d = steps * step
    return CausalOperator(
        lambda f, k: f(k - d), space, memory_depth=steps, step=step, taps=lambda k: (k - d,), name=f"delay({steps})"
    )


def scale(op: CausalOperator, lam) -> CausalOperator:
    """``lam * F``; keeps the memory and taps of ``op``."""
    return CausalOperator(
        lambda f, k: lam * np.asarray(op.func(f, k)),
        op.space,
        memory_depth=op.memory_depth,
        step=op.step,
        taps=op.taps,
        name=f"{lam}*{op.name}",
    )


def convolution_operator(kernel: Sequence, space: StateSpace, tau: float, step: int = FULL_STEP) -> CausalOperator:
    """Discrete causal convolution ``F f(k) = tau * sum_j K_j f(k - j*step)``.

    Each ``K_j`` is a scalar or a ``dim x dim`` matrix.
    """
    if len(kernel) == 0:
        raise ValueError("kernel must not be empty")
    mats = []
    for K in kernel:
        K = np.asarray(K, dtype=space.dtype)
        if K.ndim == 0:
            K = K * np.eye(space.dim, dtype=space.dtype)
        if K.shape != (space.dim, space.dim):
            raise ValueError(f"kernel entry has shape {K.shape}, expected ({space.dim}, {space.dim})")
        mats.append(K)
    m = len(mats) - 1

    def func(f, k):
        acc = space.zero()
        for j, K in enumerate(mats):
            v = f.get(k - j * step)
            if v is not None:
                acc = acc + K @ v
        return tau * acc

    return CausalOperator(func, space, memory_depth=m, step=step, name=f"conv[{m + 1}]")


def lookahead(space: StateSpace, step: int = FULL_STEP) -> CausalOperator:
    """Anti-causal ``F f(k) = f(k + step)``; a negative control for the checkers."""
    return CausalOperator(lambda f, k: f(k + step), space, memory_depth=None, step=step, name="lookahead")


def kernel_l1_mass(kernel: Sequence, tau: float) -> float:
    """``tau * sum_j ||K_j||_2``; passivity for ``||.||^p`` holds when this is <= 1."""
    total = 0.0
    for K in kernel:
        K = np.asarray(K, dtype=float)
        total += abs(float(K)) if K.ndim == 0 else float(np.linalg.norm(K, 2))
    return tau * total


def is_unbounded(op: CausalOperator) -> bool:
    return op.memory_depth is None or math.isinf(op.memory_depth)
