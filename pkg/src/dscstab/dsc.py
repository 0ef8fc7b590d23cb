"""Dual scattering channel processes.

A DSC process is a pair ``h = (h1, h2)`` on the half-step grid: ``h1`` is
the incident channel, updated by the connection map at full steps ``I``,
``h2`` the outgoing channel, updated by the reflection map at the
staggered points ``J``.  Between updates each channel holds its value.

Two timing conventions are provided.  ``"composed"`` (default) updates

    h2(t + tau/2) = F_R T_{-tau/2} [e + h1] (t + tau/2)          t in I
    h1(t + tau/2) = T_{-tau/2} F_C T_{-tau/2} [h2] (t)            t in J

so that ``h1(t + tau) = F_C T_{-tau/2} F_R T_{-tau/2} [e + h1](t)`` holds
exactly.  ``"literal"`` applies ``T_{-tau/2} F_R T_{-tau/2}`` on the first
branch as well, which delays the outgoing channel by one more full step;
its full-step operator is ``F_C T_{-3tau/2} F_R T_{-tau/2}``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .checks import CheckReport, Witness
from .iteration import iterate
from .operators import CausalOperator, compose, shift_operator
from .timesignal import Excitation, Signal, StateSpace, TimeGrid

CONVENTIONS = ("composed", "literal")


@dataclass(frozen=True)
class PropagatingField:
    incident: np.ndarray
    outgoing: np.ndarray

    def __post_init__(self):
        if np.shape(self.incident) != np.shape(self.outgoing):
            raise ValueError("incident and outgoing parts must have the same dimension")

    def norm(self, space: StateSpace | None = None) -> float:
        """``sqrt(||incident||**2 + ||outgoing||**2)``."""
        nrm = space.norm if space is not None else (lambda z: float(np.linalg.norm(z)))
        return math.hypot(nrm(self.incident), nrm(self.outgoing))


def node_boundary(z: PropagatingField) -> PropagatingField:
    """Swap incident and outgoing parts."""
    return PropagatingField(z.outgoing, z.incident)


def lift_connection(
    rule: Callable[[int, Signal], np.ndarray],
    space: StateSpace,
    memory_depth: int | None = 0,
    name: str = "F_C",
) -> CausalOperator:
    """Turn a connection rule ``C(k, outgoing_history) -> incident`` into ``F_C`` on ``I``."""

    def func(f, k):
        z = PropagatingField(np.asarray(rule(k, f)), space.zero())
        return node_boundary(z).outgoing

    return CausalOperator(func, space, memory_depth=memory_depth, step=2, name=name)


def lift_reflection(
    rule: Callable[[int, Signal], np.ndarray],
    space: StateSpace,
    memory_depth: int | None = 0,
    name: str = "F_R",
) -> CausalOperator:
    """Turn a reflection rule ``R(k, incident_history) -> outgoing`` into ``F_R`` on ``J``."""

    def func(f, k):
        z = PropagatingField(space.zero(), np.asarray(rule(k, f)))
        return node_boundary(z).incident

    return CausalOperator(func, space, memory_depth=memory_depth, step=2, name=name)


@dataclass(frozen=True)
class ScatteringMapPair:
    connection: CausalOperator
    reflection: CausalOperator
    name: str = "maps"

    def __post_init__(self):
        if self.connection.space != self.reflection.space:
            raise ValueError("connection and reflection maps act on different state spaces")

    @property
    def space(self) -> StateSpace:
        return self.connection.space


class ScattererError(RuntimeError):
    def __init__(self, k: int, cause: Exception):
        super().__init__(f"scattering map failed at half step k={k}: {cause!r}")
        self.k = k


@dataclass(frozen=True)
class DscTrace:
    h1: Signal
    h2: Signal
    grid: TimeGrid
    n_half_steps: int
    convention: str = "composed"

    def incident(self) -> Signal:
        """``h1`` on its update lattice ``I``."""
        return self.h1.on_lattice("I")

    def outgoing(self) -> Signal:
        """``h2`` on its update lattice ``J``."""
        return self.h2.on_lattice("J")

    def switching_violations(self) -> list[tuple[str, int]]:
        """Indices where a channel does not hold its value between updates."""
        bad = []
        for k in range(0, self.n_half_steps + 1):
            if k % 2 == 1 and not np.array_equal(self.h1(k), self.h1(k - 1)):
                bad.append(("h1", k))
            if k % 2 == 0 and not np.array_equal(self.h2(k), self.h2(k - 1)):
                bad.append(("h2", k))
        return bad

    def sup_norms(self) -> tuple[float, float]:
        return self.h1.sup_norm(), self.h2.sup_norm()

    def write_csv(self, fh, include_zero_rows: bool = False):
        space = self.h1.space
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "t", "channel", "parity"] + [f"c{i}" for i in range(space.dim)])
        for k in range(0, self.n_half_steps + 1):
            for channel, sig in (("in", self.h1), ("out", self.h2)):
                v = sig.get(k)
                if v is None:
                    if not include_zero_rows:
                        continue
                    v = space.zero()
                w.writerow([k, repr(self.grid.time(k)), channel, self.grid.parity(k)] + [repr(float(c)) for c in v])

    def to_csv(self, include_zero_rows: bool = False) -> str:
        buf = io.StringIO()
        self.write_csv(buf, include_zero_rows)
        return buf.getvalue()


def _check_convention(convention: str):
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")


def _check_excitation(maps: ScatteringMapPair, e: Excitation):
    if e.space != maps.space:
        raise ValueError("excitation and maps act on different state spaces")


def run_dsc(
    maps: ScatteringMapPair,
    e: Excitation,
    n_half_steps: int,
    convention: str = "composed",
) -> DscTrace:
    """Alternate reflection and connection for ``n_half_steps`` half steps.

    The excitation enters the incident channel only, inside the argument of
    the reflection map.
    """
    _check_convention(convention)
    _check_excitation(maps, e)
    if n_half_steps < 0:
        raise ValueError("n_half_steps must be >= 0")
    grid, space = e.grid, e.space
    shift = shift_operator(space, -1)
    refl = compose(maps.reflection, shift)
    conn = compose(maps.connection, shift)
    lag = 0 if convention == "composed" else 2

    x = {k: v for k, v in e.signal.items()}  # e + h1 on I
    h1: dict[int, np.ndarray] = {}
    h2: dict[int, np.ndarray] = {}
    X = Signal._wrap(grid, space, x)
    H2 = Signal._wrap(grid, space, h2)
    for k in range(n_half_steps):
        try:
            if k % 2 == 0:
                if k in h1:
                    h1[k + 1] = h1[k]
                v = refl.at(X, k + 1 - lag)
                if np.any(v):
                    h2[k + 1] = _frozen(v)
            else:
                if k in h2:
                    h2[k + 1] = h2[k]
                v = conn.at(H2, k - 1)
                if np.any(v):
                    v = _frozen(v)
                    h1[k + 1] = v
                    prev = x.get(k + 1)
                    x[k + 1] = v if prev is None else _frozen(prev + v)
        except Exception as exc:
            raise ScattererError(k, exc) from exc
    return DscTrace(Signal._wrap(grid, space, h1), Signal._wrap(grid, space, h2), grid, n_half_steps, convention)


def _frozen(v) -> np.ndarray:
    v = np.array(v)
    v.flags.writeable = False
    return v


def composed_step_operator(maps: ScatteringMapPair, convention: str = "composed") -> CausalOperator:
    """Full-step operator ``F_C T_{-tau/2} F_R T_{-tau/2}`` driving ``h1``.

    For the literal convention the middle shift is ``T_{-3tau/2}``.
    """
    _check_convention(convention)
    space = maps.space
    mid = -1 if convention == "composed" else -3
    inner = compose(maps.reflection, shift_operator(space, -1))
    G = compose(maps.connection, compose(shift_operator(space, mid), inner))
    G.name = f"G[{maps.name}]"
    return G


def recover_h2(
    maps: ScatteringMapPair,
    e: Excitation,
    h1: Signal,
    n_half_steps: int,
    convention: str = "composed",
) -> Signal:
    """Outgoing channel ``h2 = F_R T_{-tau/2}[e + h1]`` (held between updates)."""
    _check_convention(convention)
    refl = compose(maps.reflection, shift_operator(maps.space, -1))
    lag = 0 if convention == "composed" else 2
    x = e.signal + h1.on_lattice("I")
    vals = {}
    for j in range(1, n_half_steps + 1, 2):
        v = refl.at(x, j - lag)
        if np.any(v):
            v = _frozen(v)
            vals[j] = v
            if j + 1 <= n_half_steps:
                vals[j + 1] = v
    return Signal._wrap(e.grid, e.space, vals)


EQUIVALENCE_RTOL = 1e-12


def check_equivalence(
    maps: ScatteringMapPair,
    e: Excitation,
    n_steps: int,
    convention: str = "composed",
    rtol: float = EQUIVALENCE_RTOL,
    atol: float = 0.0,
) -> CheckReport:
    """Compare ``run_dsc`` h1 with the iterated full-step operator at every full step.

    Passes when ``||a - b|| <= max(atol, rtol * max(||a||, ||b||))`` at all
    ``t = 0, tau, ..., n_steps*tau``.
    """
    trace = run_dsc(maps, e, 2 * n_steps, convention)
    process = iterate(composed_step_operator(maps, convention), e, n_steps)
    nrm = maps.space.norm
    worst = 0.0
    for k in range(0, 2 * n_steps + 1, 2):
        a, b = trace.h1(k), process.g(k)
        diff = nrm(a - b)
        scale = max(nrm(a), nrm(b))
        tol = max(atol, rtol * scale)
        if scale > 0:
            worst = max(worst, diff / scale)
        if diff > tol:
            w = Witness(
                "equivalence",
                k,
                diff,
                tol,
                probe=e.signal,
                note=f"paired h1 and composed iterate differ at t={trace.grid.time(k)!r}",
            )
            return CheckReport("equivalence", "fail", k // 2 + 1, rtol, atol, w, {"convention": convention})
    details = {"convention": convention, "steps": n_steps, "max_relative_difference": worst}
    return CheckReport("equivalence", "pass", n_steps + 1, rtol, atol, details=details)
