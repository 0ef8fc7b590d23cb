"""Delimiting functionals ``alpha`` with witness constants ``(a, b, c)``.

A delimiting functional is non-negative and controls the state norm via
``||z|| <= a + b * alpha(z)**c``.  Built-in kinds carry constants that are
valid for the norm of the state space they were built for.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .timesignal import StateSpace

KINDS = ("norm", "norm_power", "quadratic_form", "linear_sum", "custom")


def power(x: float, c: float) -> float:
    # 0**c is taken as 0 for every c > 0 (alpha >= 0, continuous extension)
    if x <= 0.0:
        return 0.0
    return x ** c


@dataclass(frozen=True)
class DelimitingFunctional:
    func: Callable[[np.ndarray], float]
    a: float
    b: float
    c: float
    kind: str = "custom"
    space: StateSpace | None = None
    p: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.a < 0 or self.b <= 0 or self.c <= 0:
            raise ValueError(f"witness constants need a >= 0, b > 0, c > 0; got {(self.a, self.b, self.c)}")

    def __call__(self, z) -> float:
        return float(self.func(np.asarray(z)))

    @property
    def constants(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    def norm_bound(self, value: float) -> float:
        """``a + b * value**c``."""
        return self.a + self.b * power(value, self.c)

    def with_constants(self, a: float, b: float, c: float) -> "DelimitingFunctional":
        return DelimitingFunctional(self.func, a, b, c, self.kind, self.space, self.p, self.label)

    def describe(self) -> dict:
        return {"kind": self.kind, "label": self.label, "p": self.p, "a": self.a, "b": self.b, "c": self.c}


def norm(space: StateSpace) -> DelimitingFunctional:
    return DelimitingFunctional(space.norm, 0.0, 1.0, 1.0, "norm", space, 1.0, "norm")


def norm_power(space: StateSpace, p: float) -> DelimitingFunctional:
    """``alpha = ||.||**p`` with constants ``(0, 1, 1/p)``."""
    if p <= 0:
        raise ValueError("p must be positive")
    if p == 1:
        return norm(space)
    return DelimitingFunctional(
        lambda z: space.norm(z) ** p, 0.0, 1.0, 1.0 / p, "norm_power", space, float(p), f"norm^{p:g}"
    )


def quadratic_form(space: StateSpace, weights) -> DelimitingFunctional:
    """``alpha = sum(w_i |z_i|**2)`` with positive weights."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (space.dim,) or np.any(w <= 0):
        raise ValueError("quadratic_form needs one positive weight per component")
    wmin = float(w.min())
    kind = space.norm_kind
    if kind in ("l2", "linf"):
        b = 1.0 / math.sqrt(wmin)
    elif kind == "l1":
        b = math.sqrt(space.dim / wmin)
    else:
        b = math.sqrt(float(np.max(np.asarray(space.weights) / w)))
    return DelimitingFunctional(
        lambda z: float(np.sum(w * np.abs(z) ** 2)), 0.0, b, 0.5, "quadratic_form", space, 2.0, "quadratic"
    )


def linear_sum(space: StateSpace) -> DelimitingFunctional:
    """``alpha = sum |z_i|``; the plain component sum on the nonnegative cone."""
    b = 1.0 if space.norm_kind != "weighted_l2" else math.sqrt(max(space.weights))
    return DelimitingFunctional(
        lambda z: float(np.sum(np.abs(z))), 0.0, b, 1.0, "linear_sum", space, 1.0, "l1-sum"
    )


def custom(func: Callable[[np.ndarray], float], a: float, b: float, c: float, label: str = "custom"):
    return DelimitingFunctional(func, a, b, c, "custom", None, None, label)


def from_spec(spec: str, space: StateSpace) -> DelimitingFunctional:
    """Parse ``norm``, ``norm2``, ``normp:<p>``, ``l1`` or ``quadratic``."""
    if spec == "norm":
        return norm(space)
    if spec in ("norm2", "energy"):
        return norm_power(space, 2)
    if spec.startswith("normp:"):
        return norm_power(space, float(spec.split(":", 1)[1]))
    if spec in ("l1", "linear_sum"):
        return linear_sum(space)
    if spec == "quadratic":
        return quadratic_form(space, np.ones(space.dim))
    raise ValueError(f"unknown alpha spec {spec!r}")
