"""Probe-based checkers for causality, alpha-passivity and delimiting bounds."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .functionals import DelimitingFunctional
from .operators import CausalOperator
from .timesignal import Signal, StateSpace, TimeGrid, mu_sum

RTOL = 1e-9
ATOL = 1e-12
MAX_PROBE_STEPS = 16


def tolerance(scale: float, rtol: float = RTOL, atol: float = ATOL) -> float:
    return float(max(atol, rtol * abs(scale)))


@dataclass
class Witness:
    """Counterexample found by a checker.  ``margin = rhs - lhs`` (negative on failure)."""

    kind: str
    time: int
    lhs: float
    rhs: float
    probe: Signal | None = None
    companion: Signal | None = None
    sample: np.ndarray | None = None
    points: range | None = None
    note: str = ""

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def replay(self, target, alpha: DelimitingFunctional | None = None) -> tuple[float, float]:
        """Recompute ``(lhs, rhs)`` against ``target`` (operator or functional)."""
        if self.kind == "causality":
            a = target.apply(self.probe, self.time)
            b = target.apply(self.companion, self.time)
            return float(np.linalg.norm(a - b)), 0.0
        if self.kind == "passivity":
            pts = [k for k in self.points if k <= self.time]
            out = target.output(self.probe, pts)
            window = (-math.inf, self.time + 1)
            return mu_sum(out, alpha, window), mu_sum(self.probe, alpha, window)
        if self.kind == "delimiting":
            z = self.sample
            return target.space.norm(z) if target.space else float(np.linalg.norm(z)), target.norm_bound(target(z))
        raise ValueError(f"cannot replay witness of kind {self.kind!r}")

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "time": self.time,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "note": self.note,
        }
        if self.probe is not None:
            d["probe_meta"] = self.probe.meta()
            d["probe_csv"] = self.probe.to_csv()
        if self.companion is not None:
            d["companion_csv"] = self.companion.to_csv()
        if self.sample is not None:
            d["sample"] = [float(x) for x in np.real(self.sample)]
        return d


@dataclass
class CheckReport:
    kind: str
    verdict: str
    trials: int
    rtol: float
    atol: float
    witness: Witness | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict == "fail" and self.witness is None:
            raise ValueError("a failing report needs a witness")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {
            "check": self.kind,
            "verdict": self.verdict,
            "trials": self.trials,
            "tolerance": {"rtol": self.rtol, "atol": self.atol},
            "witness": self.witness.to_dict() if self.witness else None,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _random_values(space: StateSpace, rng: np.random.Generator, n: int) -> np.ndarray:
    vals = rng.uniform(-1.0, 1.0, size=(n, space.dim))
    if space.complex:
        vals = vals + 1j * rng.uniform(-1.0, 1.0, size=(n, space.dim))
    return vals


def random_probe(
    grid: TimeGrid,
    space: StateSpace,
    rng: np.random.Generator,
    start: int = 0,
    step: int = 2,
    max_steps: int = MAX_PROBE_STEPS,
    nonnegative: bool = False,
) -> Signal:
    """Components uniform in [-1, 1] on ``1..max_steps`` consecutive lattice points."""
    n = int(rng.integers(1, max_steps + 1))
    vals = _random_values(space, rng, n)
    if nonnegative:
        vals = np.abs(vals)
    return Signal(grid, space, {start + step * i: v for i, v in enumerate(vals)})


def probe_family(
    grid: TimeGrid,
    space: StateSpace,
    rng: np.random.Generator,
    count: int = 100,
    start: int = 0,
    step: int = 2,
    impulses: bool = True,
    max_impulses: int | None = None,
    nonnegative: bool = False,
) -> list[Signal]:
    """Unit impulses per basis direction followed by ``count`` random probes."""
    probes = []
    if impulses:
        dims = range(space.dim) if max_impulses is None else range(min(space.dim, max_impulses))
        for i in dims:
            e = space.zero()
            e[i] = 1.0
            probes.append(Signal(grid, space, {start: e}))
    probes.extend(random_probe(grid, space, rng, start, step, nonnegative=nonnegative) for _ in range(count))
    return probes


def check_causality(
    F: CausalOperator,
    grid: TimeGrid,
    trials: int = 100,
    horizon: tuple[int, int] = (0, 64),
    rng: np.random.Generator | int = 0,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> CheckReport:
    """Compare ``F f(t)`` with ``F f'(t)`` where ``f'`` agrees with ``f`` up to ``t`` only."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng)
    lo, hi = horizon
    space = F.space
    for trial in range(trials):
        t = int(rng.integers(lo, hi))
        n_before = int(rng.integers(1, 2 * MAX_PROBE_STEPS + 1))
        before = {k: v for k, v in zip(range(t - n_before + 1, t + 1), _random_values(space, rng, n_before))}
        f = Signal(grid, space, before)
        n_after = int(rng.integers(1, 2 * MAX_PROBE_STEPS + 1))
        after = dict(before)
        after.update(zip(range(t + 1, t + 1 + n_after), _random_values(space, rng, n_after)))
        g = Signal(grid, space, after)
        try:
            a = F.apply(f, t)
            b = F.apply(g, t)
        except Exception as exc:  # operator failures count against it
            w = Witness("causality", t, math.inf, 0.0, f, g, note=f"operator raised {exc!r}")
            return CheckReport("causality", "fail", trial + 1, rtol, atol, w)
        diff = float(np.linalg.norm(a - b))
        tol = tolerance(max(np.linalg.norm(a), np.linalg.norm(b)), rtol, atol)
        if diff > tol:
            w = Witness("causality", t, diff, tol, f, g, note="output at t depends on the future")
            return CheckReport("causality", "fail", trial + 1, rtol, atol, w)
    return CheckReport("causality", "pass", trials, rtol, atol, details={"horizon": list(horizon)})


def _output_points(f: Signal, horizon, step: int):
    if isinstance(horizon, range):
        return horizon
    lo, hi = horizon
    return range(lo, hi, step)


def check_passivity(
    F: CausalOperator,
    alpha: DelimitingFunctional,
    excitations: Sequence[Signal],
    horizon: range | tuple[int, int] | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> CheckReport:
    """Cumulative test ``sum_{s<t} alpha(F f(s)) <= sum_{s<t} alpha(f(s))`` for all ``t``.

    ``horizon`` gives the evaluation points of ``F f`` (a ``range`` or a
    half-open ``(lo, hi)`` pair sampled every ``F.step``).  By default it
    runs from each probe's first point to 32 full steps (or the operator's
    memory, if longer) past its last.
    """
    if not excitations:
        raise ValueError("need at least one excitation")
    for idx, f in enumerate(excitations):
        if horizon is None:
            first = f.first if f.first is not None else 0
            last = f.last if f.last is not None else 0
            reach = 0 if F.memory_depth is None else F.memory_depth * F.step
            pts = range(first, last + max(4 * MAX_PROBE_STEPS, reach) + 1, F.step)
        else:
            pts = _output_points(f, horizon, F.step)
        Ff = {k: F.at(f, k) for k in pts}
        in_vals = sorted((k, alpha(v)) for k, v in f.items())
        out_vals = sorted((k, alpha(v)) for k, v in Ff.items())
        times = sorted({k for k, _ in in_vals} | {k for k, _ in out_vals})
        # check at every t just after a point carrying mass, which covers all t
        lhs = rhs = 0.0
        i = j = 0
        for t in times:
            while i < len(out_vals) and out_vals[i][0] <= t:
                lhs += out_vals[i][1]
                i += 1
            while j < len(in_vals) and in_vals[j][0] <= t:
                rhs += in_vals[j][1]
                j += 1
            L, R = f.grid.weight * lhs, f.grid.weight * rhs
            if L > R + tolerance(max(L, R), rtol, atol):
                w = Witness(
                    "passivity",
                    t,
                    L,
                    R,
                    f,
                    points=pts,
                    note=f"excitation #{idx}: cumulative alpha of F f exceeds that of f on s <= {t}",
                )
                return CheckReport("passivity", "fail", idx + 1, rtol, atol, w, {"alpha": alpha.describe()})
    return CheckReport("passivity", "pass", len(excitations), rtol, atol, details={"alpha": alpha.describe()})


def check_delimiting(
    alpha: DelimitingFunctional,
    samples: Sequence,
    space: StateSpace | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> CheckReport:
    """``||z|| <= a + b * alpha(z)**c`` on every sample."""
    space = space or alpha.space
    nrm = space.norm if space is not None else (lambda z: float(np.linalg.norm(z)))
    for i, z in enumerate(samples):
        z = np.asarray(z)
        lhs = nrm(z)
        val = alpha(z)
        if val < 0:
            w = Witness("delimiting", i, val, 0.0, sample=z, note="alpha is negative")
            return CheckReport("delimiting", "fail", i + 1, rtol, atol, w, {"alpha": alpha.describe()})
        rhs = alpha.norm_bound(val)
        if lhs > rhs + tolerance(max(lhs, rhs), rtol, atol):
            w = Witness("delimiting", i, lhs, rhs, sample=z, note=f"sample #{i}")
            return CheckReport("delimiting", "fail", i + 1, rtol, atol, w, {"alpha": alpha.describe()})
    return CheckReport("delimiting", "pass", len(samples), rtol, atol, details={"alpha": alpha.describe()})


def sample_vectors(space: StateSpace, rng: np.random.Generator | int, count: int = 200) -> list[np.ndarray]:
    """Random vectors over several decades of magnitude, plus zero and basis vectors."""
    rng = np.random.default_rng(rng)
    out = [space.zero()]
    for i in range(space.dim):
        e = space.zero()
        e[i] = 1.0
        out.append(e)
    scales = 10.0 ** rng.uniform(-4, 4, size=count)
    for s, v in zip(scales, _random_values(space, rng, count)):
        out.append(s * v)
    return out
