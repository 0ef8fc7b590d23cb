"""Iterated passive causal processes and their a-priori bound.

``iterate`` runs the recursion ``g(t + tau) = F[e + g](t)`` on the full-step
lattice starting from ``g = 0`` for ``t <= 0``.  ``bound_value`` evaluates

    a + ((b / tau) * sum_{[0, N tau)} (alpha(e + g) - alpha(g)) * tau) ** c

and ``verify_stability`` compares it against ``||g(t)||`` for ``t >= N tau``.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .checks import ATOL, RTOL, tolerance
from .functionals import DelimitingFunctional, power
from .operators import CausalOperator
from .timesignal import Excitation, Signal, mu_sum

log = logging.getLogger(__name__)

MAX_STEPS = 10_000


class ExistenceError(RuntimeError):
    """A partial sum ``s_n`` left the admissible set, so the process may not exist."""

    def __init__(self, n: int, partial: Signal):
        super().__init__(f"partial sum s_{n} is outside the admissible domain")
        self.n = n
        self.partial = partial


class InconsistencyError(ArithmeticError):
    """The bound's inner sum came out clearly negative (``F`` is not passive for ``alpha``)."""


@dataclass(frozen=True)
class IteratedProcess:
    g: Signal
    F: CausalOperator
    e: Excitation
    steps_run: int

    @property
    def N(self) -> int:
        return self.e.N

    @property
    def driven(self) -> Signal:
        """``e + g``, the signal ``F`` is applied to."""
        return self.e.signal + self.g

    def times(self) -> range:
        """Half-step indices of all computed full steps ``0, 2, ..., 2*steps_run``."""
        return range(0, 2 * self.steps_run + 1, 2)


def _partial_sums(F: CausalOperator, e: Excitation, n_steps: int, upto: int):
    """Yield ``s_0 = e`` and ``s_n(t) = e(t) + F[s_{n-1}](t - tau)`` on ``[0, n_steps*tau]``."""
    s = e.signal
    yield 0, s
    pts = range(0, 2 * n_steps + 1, 2)
    for n in range(1, upto):
        vals = {}
        for t in pts:
            v = F.at(s, t - 2) + e.signal(t)
            if np.any(v):
                vals[t] = v
        s = Signal(e.grid, e.space, vals)
        yield n, s


def iterate(
    F: CausalOperator,
    e: Excitation,
    n_steps: int,
    domain: Callable[[Signal], bool] | None = None,
    max_steps: int = MAX_STEPS,
) -> IteratedProcess:
    """Generate ``g`` on ``t = tau, ..., n_steps*tau`` from ``g(t+tau) = F[e+g](t)``.

    With ``domain`` given, the partial sums ``s_0 .. s_{N-1}`` are tested
    for membership before the corresponding step is taken; a miss raises
    :class:`ExistenceError`.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if n_steps > max_steps:
        raise ValueError(f"n_steps={n_steps} exceeds the configured cap of {max_steps}")
    if F.space != e.space:
        raise ValueError("operator and excitation live in different state spaces")
    grid, space = e.grid, e.space
    guard = _partial_sums(F, e, n_steps, e.N) if domain is not None else None

    x = {k: v for k, v in e.signal.items()}
    g = {}
    for n in range(n_steps):
        if guard is not None and n < e.N:
            idx, s_n = next(guard)
            if not domain(s_n):
                raise ExistenceError(idx, s_n)
        t = 2 * n
        v = F.at(Signal._wrap(grid, space, x), t)
        if np.any(v):
            v = np.array(v)
            v.flags.writeable = False
            g[t + 2] = v
            prev = x.get(t + 2)
            if prev is None:
                x[t + 2] = v
            else:
                s = prev + v
                s.flags.writeable = False
                x[t + 2] = s
    log.debug("iterated %s for %d steps", F.name, n_steps)
    return IteratedProcess(Signal._wrap(grid, space, g), F, e, n_steps)


def bound_value(
    process: IteratedProcess,
    alpha: DelimitingFunctional,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> float:
    """Right-hand side of the stability estimate for this process."""
    N = process.N
    if process.steps_run < N - 1:
        raise ValueError(f"process covers {process.steps_run} steps but the bound needs [0, {N}*tau)")
    tau = process.g.grid.tau
    window = (0, 2 * N)
    driven = mu_sum(process.driven, alpha, window)
    own = mu_sum(process.g, alpha, window)
    inner = (alpha.b / tau) * (driven - own)
    if inner < 0:
        if -inner <= tolerance((alpha.b / tau) * max(driven, own), rtol, atol):
            inner = 0.0
        else:
            raise InconsistencyError(
                f"sum of alpha(e+g) - alpha(g) over [0, N tau) is {driven - own:.6g} < 0; "
                "the operator is not passive for this functional"
            )
    return alpha.a + power(inner, alpha.c)


@dataclass
class StabilityReport:
    rows: list[tuple[int, float, float, float]]
    bound: float
    constants: tuple[float, float, float]
    verdict: str
    N: int
    tau: float
    sup_norm: float
    first_violation: int | None = None
    rtol: float = RTOL
    atol: float = ATOL
    alpha: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def __bool__(self):
        return self.passed

    @property
    def min_margin(self) -> float:
        """Smallest ``bound - ||g(t)||`` over ``t >= N tau``."""
        return min((m for k, _, _, m in self.rows if k >= 2 * self.N), default=float("inf"))

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "norm_g", "bound", "margin"])
        for k, nrm, bnd, margin in self.rows:
            w.writerow([repr(k * self.tau / 2), repr(nrm), repr(bnd), repr(margin)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def summary(self) -> dict:
        a, b, c = self.constants
        return {
            "verdict": self.verdict,
            "constants": {"a": a, "b": b, "c": c},
            "alpha": self.alpha,
            "N": self.N,
            "tau": self.tau,
            "bound": self.bound,
            "sup_norm": self.sup_norm,
            "first_violation_t": None if self.first_violation is None else self.first_violation * self.tau / 2,
            "tolerance": {"rtol": self.rtol, "atol": self.atol},
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def verify_stability(
    process: IteratedProcess,
    alpha: DelimitingFunctional,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> StabilityReport:
    """Check ``||g(t)|| <= bound`` at every computed ``t >= N tau``."""
    bound = bound_value(process, alpha, rtol, atol)
    tol = tolerance(bound, rtol, atol)
    nrm = process.g.space.norm
    rows = []
    first = None
    sup = 0.0
    for k in process.times():
        v = process.g.get(k)
        n = 0.0 if v is None else nrm(v)
        rows.append((k, n, bound, bound - n))
        sup = max(sup, n)
        if k >= 2 * process.N:
            if first is None and n > bound + tol:
                first = k
    verdict = "pass" if first is None else "fail"
    if first is not None:
        log.info("bound %.6g first exceeded at t=%g", bound, first * process.g.grid.tau / 2)
    return StabilityReport(
        rows, bound, alpha.constants, verdict, process.N, process.g.grid.tau, sup, first, rtol, atol, alpha.describe()
    )
