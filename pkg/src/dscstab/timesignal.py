"""Discrete half-step time axis, state spaces and sparse signals.

Time is carried as an integer half-step index ``k`` which stands for the
instant ``k * tau / 2``.  Even indices form the full-step lattice ``I``,
odd indices the staggered lattice ``J``.  Every grid point carries the
same weight ``tau`` for summation purposes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "TimeGrid",
    "StateSpace",
    "Signal",
    "Excitation",
    "truncate",
    "shift",
    "mu_sum",
    "impulse",
]

NORMS = ("l2", "l1", "linf", "weighted_l2")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform half-step grid ``H = I u J`` with step ``tau``.

    ``k_min``/``k_max`` only bound what is shown or serialized; operations
    accept any integer index.
    """

    tau: float = 1.0
    k_min: int | None = None
    k_max: int | None = None

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive and finite, got {self.tau!r}")

    @property
    def half_step(self) -> float:
        return self.tau / 2

    @property
    def weight(self) -> float:
        return self.tau

    def time(self, k: int) -> float:
        return k * self.tau / 2

    def index_of(self, t: float) -> int:
        """Half-step index of time ``t``; raises if ``t`` is off-grid."""
        q = 2 * t / self.tau
        k = round(q)
        if not math.isclose(q, k, rel_tol=1e-12, abs_tol=1e-9):
            raise ValueError(f"time {t!r} is not a multiple of tau/2 = {self.half_step!r}")
        return int(k)

    @staticmethod
    def in_I(k: int) -> bool:
        return k % 2 == 0

    @staticmethod
    def in_J(k: int) -> bool:
        return k % 2 == 1

    @staticmethod
    def parity(k: int) -> str:
        return "I" if k % 2 == 0 else "J"


@dataclass(frozen=True)
class StateSpace:
    """Finite dimensional normed space the signal values live in."""

    dim: int
    norm_kind: str = "l2"
    weights: tuple[float, ...] | None = None
    complex: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.norm_kind not in NORMS:
            raise ValueError(f"unknown norm {self.norm_kind!r}; expected one of {NORMS}")
        if self.norm_kind == "weighted_l2":
            if self.weights is None or len(self.weights) != self.dim:
                raise ValueError("weighted_l2 needs one weight per component")
            if min(self.weights) <= 0:
                raise ValueError("weights must be strictly positive")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def dtype(self):
        return np.complex128 if self.complex else np.float64

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=self.dtype)

    def vector(self, values) -> np.ndarray:
        z = np.asarray(values, dtype=self.dtype)
        if z.shape != (self.dim,):
            raise ValueError(f"expected a vector of shape ({self.dim},), got {z.shape}")
        return z

    def norm(self, z) -> float:
        z = np.asarray(z)
        if self.norm_kind == "l2":
            return float(np.sqrt(np.sum(np.abs(z) ** 2)))
        if self.norm_kind == "l1":
            return float(np.sum(np.abs(z)))
        if self.norm_kind == "linf":
            return float(np.max(np.abs(z)))
        return float(np.sqrt(np.sum(np.asarray(self.weights) * np.abs(z) ** 2)))

    def to_meta(self) -> dict:
        meta = {"n": self.dim, "norm": self.norm_kind, "complex": self.complex}
        if self.weights is not None:
            meta["weights"] = ",".join(repr(w) for w in self.weights)
        return meta

    @classmethod
    def from_meta(cls, meta: Mapping) -> "StateSpace":
        weights = meta.get("weights")
        if isinstance(weights, str):
            weights = tuple(float(w) for w in weights.split(","))
        return cls(
            int(meta["n"]),
            meta.get("norm", "l2"),
            weights,
            bool(meta.get("complex", False)),
        )


def _freeze(z: np.ndarray) -> np.ndarray:
    z.flags.writeable = False
    return z


class Signal:
    """Finitely supported map from half-step indices to state vectors.

    Values outside the stored support are zero.  Instances are treated as
    immutable; every operation returns a new signal.
    """

    __slots__ = ("grid", "space", "_values")

    def __init__(self, grid: TimeGrid, space: StateSpace, values: Mapping[int, object] | None = None):
        self.grid = grid
        self.space = space
        vals = {}
        for k, v in (values or {}).items():
            if int(k) != k:
                raise ValueError(f"signal index must be integral, got {k!r}")
            vals[int(k)] = _freeze(np.array(space.vector(v)))
        self._values = vals

    @classmethod
    def _wrap(cls, grid, space, values: dict) -> "Signal":
        # trusted constructor: values already validated and read-only
        s = cls.__new__(cls)
        s.grid = grid
        s.space = space
        s._values = values
        return s

    @classmethod
    def zeros(cls, grid: TimeGrid, space: StateSpace) -> "Signal":
        return cls._wrap(grid, space, {})

    def __call__(self, k: int) -> np.ndarray:
        v = self._values.get(k)
        return self.space.zero() if v is None else v

    def get(self, k: int):
        """Stored value at ``k`` or ``None`` (implicit zero)."""
        return self._values.get(k)

    def __contains__(self, k) -> bool:
        return k in self._values

    def __len__(self) -> int:
        return len(self._values)

    def items(self):
        return sorted(self._values.items())

    @property
    def support(self) -> list[int]:
        return sorted(self._values)

    @property
    def first(self) -> int | None:
        return min(self._values) if self._values else None

    @property
    def last(self) -> int | None:
        return max(self._values) if self._values else None

    def is_zero(self) -> bool:
        return all(not np.any(v) for v in self._values.values())

    def truncate(self, k) -> "Signal":
        if k == math.inf:
            return self
        if k == -math.inf:
            return Signal._wrap(self.grid, self.space, {})
        return Signal._wrap(self.grid, self.space, {s: v for s, v in self._values.items() if s <= k})

    def restrict(self, indices: Iterable[int]) -> "Signal":
        vals = self._values
        return Signal._wrap(self.grid, self.space, {s: vals[s] for s in indices if s in vals})

    def on_lattice(self, parity: str) -> "Signal":
        """View restricted to ``I`` (even) or ``J`` (odd) indices."""
        r = 0 if parity == "I" else 1
        return Signal._wrap(self.grid, self.space, {s: v for s, v in self._values.items() if s % 2 == r})

    def shift(self, s: int) -> "Signal":
        """``result(k) = self(k + s)``, ``s`` in half steps."""
        s = _half_steps(s)
        return Signal._wrap(self.grid, self.space, {k - s: v for k, v in self._values.items()})

    def shift_time(self, t: float) -> "Signal":
        return self.shift(self.grid.index_of(t))

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Signal":
        return Signal(self.grid, self.space, {k: fn(v) for k, v in self._values.items()})

    def _check_compatible(self, other: "Signal"):
        if self.space != other.space:
            raise ValueError(f"state space mismatch: {self.space} vs {other.space}")
        if self.grid.tau != other.grid.tau:
            raise ValueError("signals live on grids with different tau")

    def __add__(self, other: "Signal") -> "Signal":
        self._check_compatible(other)
        out = dict(self._values)
        for k, v in other._values.items():
            out[k] = _freeze(out[k] + v) if k in out else v
        return Signal._wrap(self.grid, self.space, out)

    def __sub__(self, other: "Signal") -> "Signal":
        return self + other * -1.0

    def __mul__(self, lam) -> "Signal":
        return Signal._wrap(self.grid, self.space, {k: _freeze(lam * v) for k, v in self._values.items()})

    __rmul__ = __mul__

    def allclose(self, other: "Signal", rtol=1e-12, atol=0.0) -> bool:
        keys = set(self._values) | set(other._values)
        return all(np.allclose(self(k), other(k), rtol=rtol, atol=atol) for k in keys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signal):
            return NotImplemented
        keys = set(self._values) | set(other._values)
        return self.space == other.space and all(np.array_equal(self(k), other(k)) for k in keys)

    __hash__ = None

    def sup_norm(self) -> float:
        return max((self.space.norm(v) for v in self._values.values()), default=0.0)

    def __repr__(self):
        return f"Signal(tau={self.grid.tau}, dim={self.space.dim}, support={len(self._values)} pts)"

    # -- serialization ---------------------------------------------------

    def meta(self) -> dict:
        return {"tau": self.grid.tau, **self.space.to_meta()}

    def to_csv(self, fh=None, include_zero_rows: bool = False, k_range: range | None = None) -> str | None:
        """Write ``k,t,c0..c{n-1}`` rows; returns the text when ``fh`` is None."""
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "t"] + [f"c{i}" for i in range(self.space.dim)])
        keys = k_range if k_range is not None else self.support
        for k in keys:
            v = self.get(k)
            if v is None:
                if not include_zero_rows:
                    continue
                v = self.space.zero()
            w.writerow([k, repr(self.grid.time(k))] + [_fmt(c) for c in v])
        return fh.getvalue() if own else None

    @classmethod
    def from_csv(cls, text_or_fh, meta: Mapping) -> "Signal":
        fh = io.StringIO(text_or_fh) if isinstance(text_or_fh, str) else text_or_fh
        grid = TimeGrid(float(meta["tau"]))
        space = StateSpace.from_meta(meta)
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) - 2
        if header[:2] != ["k", "t"] or n != space.dim:
            raise ValueError(f"bad signal CSV header {header!r} for dim {space.dim}")
        parse = complex if space.complex else float
        vals = {}
        for row in reader:
            if not row:
                continue
            vals[int(row[0])] = [parse(c) for c in row[2:]]
        return cls(grid, space, vals)

    def save(self, csv_path, meta_path=None):
        with open(csv_path, "w", newline="") as fh:
            self.to_csv(fh)
        meta_path = meta_path or f"{csv_path}.json"
        with open(meta_path, "w") as fh:
            json.dump(self.meta(), fh, sort_keys=True, indent=2)

    @classmethod
    def load(cls, csv_path, meta_path=None) -> "Signal":
        with open(meta_path or f"{csv_path}.json") as fh:
            meta = json.load(fh)
        with open(csv_path, newline="") as fh:
            return cls.from_csv(fh, meta)


def _fmt(c) -> str:
    if isinstance(c, (complex, np.complexfloating)):
        return repr(complex(c))
    return repr(float(c))


def _half_steps(s) -> int:
    if isinstance(s, (int, np.integer)):
        return int(s)
    if isinstance(s, float) and s.is_integer():
        return int(s)
    raise ValueError(f"shift offset must be a whole number of half steps, got {s!r}")


def truncate(f: Signal, t) -> Signal:
    """``chi_{s<=t} f``; ``t`` is a half-step index or +-inf."""
    return f.truncate(t)


def shift(f: Signal, s) -> Signal:
    """Shift operator ``T_s``: ``result(k) = f(k + s)`` for ``s`` in half steps."""
    return f.shift(s)


def mu_sum(f: Signal, alpha: Callable[[np.ndarray], float], window=(-math.inf, math.inf)) -> float:
    """``tau * sum(alpha(f(k)))`` over stored points of the half-open window.

    ``window`` is ``(lo, hi)`` in half-step indices, meaning ``lo <= k < hi``.
    Implicit zeros are skipped, which presumes ``alpha(0) == 0``.
    """
    lo, hi = window
    tau = f.grid.weight
    total = 0.0
    for k, v in f._values.items():
        if lo <= k < hi:
            total += alpha(v)
    return tau * total


@dataclass(frozen=True)
class Excitation:
    """Incident-channel excitation supported on ``[0, N*tau)`` of lattice ``I``."""

    signal: Signal
    N: int = field(default=1)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        for k in self.signal.support:
            if not (0 <= k < 2 * self.N):
                raise ValueError(f"excitation value at k={k} lies outside [0, N*tau) with N={self.N}")
            if k % 2:
                raise ValueError(f"excitation value at k={k} is not on the full-step lattice I")

    @property
    def grid(self) -> TimeGrid:
        return self.signal.grid

    @property
    def space(self) -> StateSpace:
        return self.signal.space

    @classmethod
    def from_values(cls, grid: TimeGrid, space: StateSpace, values: Sequence, N: int | None = None) -> "Excitation":
        """Excitation with ``values[n]`` at time ``n * tau``."""
        N = len(values) if N is None else N
        return cls(Signal(grid, space, {2 * n: v for n, v in enumerate(values) if np.any(np.asarray(v))}), N)

    @classmethod
    def random(cls, grid: TimeGrid, space: StateSpace, N: int, rng: np.random.Generator, scale: float = 1.0):
        vals = rng.uniform(-scale, scale, size=(N, space.dim))
        if space.complex:
            vals = vals + 1j * rng.uniform(-scale, scale, size=(N, space.dim))
        return cls.from_values(grid, space, list(vals), N)


def impulse(grid: TimeGrid, space: StateSpace, value, k: int = 0) -> Signal:
    """Signal carrying ``value`` at index ``k`` only."""
    return Signal(grid, space, {k: value})
