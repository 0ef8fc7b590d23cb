"""Command-line front end: ``run``, ``check`` and ``demo``.

Exit codes: 0 pass, 1 fail, 2 configuration error, 3 existence-guard
failure.  ``DSC_LOG`` (error|info|debug) sets the log level.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import functionals
from .checks import CheckReport, check_causality, check_delimiting, check_passivity, probe_family, sample_vectors
from .dsc import DscTrace, check_equivalence, composed_step_operator, run_dsc, CONVENTIONS
from .iteration import ExistenceError, InconsistencyError, IteratedProcess, iterate, verify_stability
from .models.energy import energy_in_flight, energy_window
from .models.zoo import MODEL_NAMES, ConfigError, Model, bundled_config, load_model, operator_zoo
from .timesignal import Excitation, Signal, StateSpace, TimeGrid

log = logging.getLogger("dscstab")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_EXISTENCE = 3

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
EXCITATIONS = ("impulse", "random", "zero", "csv")
CHECKS = ("causality", "passivity", "delimiting", "equivalence")
OPERATOR_NAMES = tuple(operator_zoo(StateSpace(2)).keys())


@dataclass
class RunConfig:
    """Everything a ``run`` or ``check`` needs; validated on construction."""

    model: str | dict | None = None
    operator: str | None = None
    excite: str = "impulse"
    excite_path: str | None = None
    seed: int | None = None
    support: int = 1
    steps: int = 200
    amplitude: float = 1.0
    alpha: str | None = None
    constants: tuple[float, float, float] | None = None
    rtol: float | None = None
    atol: float | None = None
    tau: float = 1.0
    dim: int = 2
    rho: float | None = None
    allow_active: bool = False
    convention: str = "composed"
    domain_linf: float | None = None
    trials: int = 100
    out: str = "dsc_out"
    trace: bool = False

    def __post_init__(self):
        if (self.model is None) == (self.operator is None):
            raise ConfigError("give exactly one of model or operator", "model")
        if self.operator is not None and self.operator not in OPERATOR_NAMES:
            raise ConfigError(f"unknown operator {self.operator!r}; choose from {', '.join(OPERATOR_NAMES)}",
                              "operator")
        if self.excite not in EXCITATIONS:
            raise ConfigError(f"expected one of {EXCITATIONS}", "excite")
        if self.excite == "csv" and not self.excite_path:
            raise ConfigError("csv excitation needs a path", "excite_path")
        if self.excite == "random" and self.seed is None:
            raise ConfigError("random excitations need an explicit seed", "seed")
        if self.support < 1:
            raise ConfigError("support N must be >= 1", "support")
        if self.steps < self.support:
            raise ConfigError(f"horizon ({self.steps} steps) must be >= N ({self.support})", "steps")
        for name in ("rtol", "atol", "tau"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ConfigError("must be > 0", name)
        if self.dim < 1:
            raise ConfigError("must be >= 1", "dim")
        if self.trials < 1:
            raise ConfigError("must be >= 1", "trials")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"expected one of {CONVENTIONS}", "convention")
        if self.constants is not None:
            if len(self.constants) != 3:
                raise ConfigError("expected three numbers a,b,c", "constants")
            self.constants = tuple(float(x) for x in self.constants)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown key; expected one of {sorted(known)}", key)
        try:
            return cls(**data)
        except TypeError as err:
            raise ConfigError(str(err)) from None


def read_config_file(path: str) -> dict:
    """Load a JSON run config, reporting the line and column of syntax errors."""
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(err.strerror or str(err), "config") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: {err.msg}", "config") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object", "config")
    return data


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = read_config_file(args.config) if getattr(args, "config", None) else {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None and val is not False:
            data[f.name] = val
    excite = data.get("excite", "impulse")
    if excite not in EXCITATIONS and excite is not None:
        data["excite"], data["excite_path"] = "csv", excite
    return RunConfig.from_dict(data)


def _resolve_model(cfg: RunConfig) -> Model:
    spec = cfg.model
    if isinstance(spec, str):
        if spec in MODEL_NAMES:
            spec = bundled_config(spec)
        elif spec.endswith(".json"):
            spec = read_config_file(spec)
        else:
            raise ConfigError(f"unknown model {spec!r}; bundled models are {', '.join(MODEL_NAMES)}", "model")
    if not isinstance(spec, dict):
        raise ConfigError("must be a bundled name, a JSON path or an object", "model")
    overrides = {"rho": cfg.rho, "allow_active": cfg.allow_active or None}
    return load_model(spec, **overrides)


@dataclass
class Target:
    """The system under study: a model's map pair or a single zoo operator."""

    name: str
    space: StateSpace
    alpha: functionals.DelimitingFunctional
    model: Model | None = None
    operator: object = None
    impulse_value: np.ndarray = field(default=None)


def build_target(cfg: RunConfig) -> Target:
    if cfg.model is not None:
        m = _resolve_model(cfg)
        space, alpha, target = m.space, m.alpha, Target(m.name, m.space, m.alpha, model=m,
                                                         impulse_value=m.impulse_value)
    else:
        space = StateSpace(cfg.dim)
        entry = operator_zoo(space, cfg.tau)[cfg.operator]
        alpha = functionals.norm_power(space, 2.0)
        target = Target(entry.name, space, alpha, operator=entry.op, impulse_value=np.eye(cfg.dim)[0])
    if cfg.alpha is not None:
        try:
            alpha = functionals.from_spec(cfg.alpha, space)
        except ValueError as err:
            raise ConfigError(str(err), "alpha") from None
    if cfg.constants is not None:
        try:
            alpha = alpha.with_constants(*cfg.constants)
        except ValueError as err:
            raise ConfigError(str(err), "constants") from None
    target.alpha = alpha
    return target


def build_excitation(cfg: RunConfig, target: Target, grid: TimeGrid) -> Excitation:
    space = target.space
    if cfg.excite == "impulse":
        return Excitation.from_values(grid, space, [cfg.amplitude * target.impulse_value], cfg.support)
    if cfg.excite == "zero":
        return Excitation.from_values(grid, space, [], cfg.support)
    if cfg.excite == "random":
        if target.model is not None:
            return target.model.excitation(grid, "random", cfg.support, cfg.seed, cfg.amplitude)
        return Excitation.random(grid, space, cfg.support, np.random.default_rng(cfg.seed), cfg.amplitude)
    try:
        sig = Signal.load(cfg.excite_path)
    except (OSError, ValueError, KeyError) as err:
        raise ConfigError(f"cannot read {cfg.excite_path}: {err}", "excite_path") from None
    if sig.space != space:
        raise ConfigError(f"excitation has dim {sig.space.dim}, target needs {space.dim}", "excite_path")
    sig = Signal(grid, space, dict(sig.items()))
    N = max(cfg.support, (sig.last // 2 + 1) if sig.last is not None else 1)
    try:
        return Excitation(sig, N)
    except ValueError as err:
        raise ConfigError(str(err), "excite_path") from None


def _domain(cfg: RunConfig):
    if cfg.domain_linf is None:
        return None
    bound = cfg.domain_linf

    def inside(s: Signal) -> bool:
        return all(float(np.max(np.abs(v))) <= bound for _, v in s.items())

    return inside


def _tolerances(cfg: RunConfig, rtol: float, atol: float) -> tuple[float, float]:
    return (cfg.rtol if cfg.rtol is not None else rtol, cfg.atol if cfg.atol is not None else atol)


def _write_stability(out: Path, report, extra: dict):
    with open(out / "stability.csv", "w", newline="") as fh:
        report.write_csv(fh)
    with open(out / "stability.json", "w") as fh:
        json.dump({**extra, **report.summary()}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_norm_trace(path: Path, trace: DscTrace):
    nrm = trace.h1.space.norm
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "t", "parity", "norm_h1", "norm_h2"])
        for k in range(trace.n_half_steps + 1):
            w.writerow([k, repr(trace.grid.time(k)), trace.grid.parity(k), repr(nrm(trace.h1(k))),
                        repr(nrm(trace.h2(k)))])


def _write_energy(path: Path, h1: Signal, n_steps: int, window: int):
    per_step = energy_in_flight(h1, n_steps, 1)
    flight = energy_in_flight(h1, n_steps, window)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "energy_h1", "energy_in_flight"])
        for n in range(n_steps + 1):
            w.writerow([repr(n * h1.grid.tau), repr(float(per_step[n])), repr(float(flight[n]))])


def cmd_run(cfg: RunConfig) -> int:
    """Drive the engine, write CSV traces and the stability report."""
    target = build_target(cfg)
    grid = TimeGrid(cfg.tau)
    e = build_excitation(cfg, target, grid)
    rtol, atol = _tolerances(cfg, 1e-9, 1e-12)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    domain = _domain(cfg)

    if target.model is not None:
        maps = target.model.maps
        G = composed_step_operator(maps, cfg.convention)
        if domain is not None:
            iterate(G, e, e.N, domain=domain)
        trace = run_dsc(maps, e, 2 * cfg.steps, cfg.convention)
        process = IteratedProcess(trace.h1.on_lattice("I"), G, e, cfg.steps)
        _write_norm_trace(out / "trace.csv", trace)
        _write_energy(out / "energy.csv", trace.h1, cfg.steps, energy_window(G))
        if cfg.trace:
            with open(out / "dsc_trace.csv", "w", newline="") as fh:
                trace.write_csv(fh)
    else:
        process = iterate(target.operator, e, cfg.steps, domain=domain)
        with open(out / "trace.csv", "w", newline="") as fh:
            process.g.to_csv(fh, include_zero_rows=True, k_range=process.times())
    report = verify_stability(process, target.alpha, rtol, atol)
    _write_stability(out, report, {"target": target.name, "steps": cfg.steps, "convention": cfg.convention})
    print(f"{target.name}: verdict={report.verdict} bound={report.bound!r} sup_norm={report.sup_norm!r}")
    if not report.passed:
        t = report.first_violation * grid.tau / 2
        print(f"{target.name}: bound first crossed at t={t!r}")
        return EXIT_FAIL
    return EXIT_PASS


def _check_targets(target: Target, cfg: RunConfig):
    """``(label, operator, probe start)`` triples to examine."""
    if target.model is None:
        return [(target.name, target.operator, 0)]
    maps = target.model.maps
    return [("connection", maps.connection, 0), ("reflection", maps.reflection, 1)]


def _run_checks(cfg: RunConfig, which: str, target: Target, grid: TimeGrid) -> list[tuple[str, CheckReport]]:
    space = target.space
    if which == "causality":
        rtol, atol = _tolerances(cfg, 1e-9, 1e-12)
        seed = 0 if cfg.seed is None else cfg.seed
        reports = [
            (label, check_causality(op, grid, cfg.trials, rng=seed, rtol=rtol, atol=atol))
            for label, op, _ in _check_targets(target, cfg)
        ]
        if target.model is not None:
            G = composed_step_operator(target.model.maps, cfg.convention)
            reports.append(("composed", check_causality(G, grid, cfg.trials, rng=seed, rtol=rtol, atol=atol)))
        return reports
    if which == "passivity":
        rtol, atol = _tolerances(cfg, 1e-9, 1e-12)
        seed = 0 if cfg.seed is None else cfg.seed
        nonneg = target.model is not None and target.model.kind == "diffusion"
        reports = []
        for label, op, start in _check_targets(target, cfg):
            probes = probe_family(grid, space, np.random.default_rng(seed), cfg.trials, start=start,
                                  nonnegative=nonneg)
            reports.append((label, check_passivity(op, target.alpha, probes, rtol=rtol, atol=atol)))
        return reports
    if which == "delimiting":
        rtol, atol = _tolerances(cfg, 1e-9, 1e-12)
        seed = 0 if cfg.seed is None else cfg.seed
        samples = sample_vectors(space, seed, cfg.trials)
        return [("alpha", check_delimiting(target.alpha, samples, space, rtol, atol))]
    if target.model is None:
        raise ConfigError("equivalence needs a model with a map pair", "model")
    rtol, atol = _tolerances(cfg, 1e-12, 0.0)
    e = build_excitation(cfg, target, grid)
    return [("equivalence", check_equivalence(target.model.maps, e, cfg.steps, cfg.convention, rtol, atol))]


def _write_witness(path: Path, report: CheckReport):
    w = report.witness
    if w.probe is not None and w.kind != "equivalence":
        with open(path, "w", newline="") as fh:
            w.probe.to_csv(fh)
        if w.companion is not None:
            with open(path.with_name(path.stem + "_companion.csv"), "w", newline="") as fh:
                w.companion.to_csv(fh)
        return
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["kind", "time", "lhs", "rhs", "margin"])
        wr.writerow([w.kind, w.time, repr(w.lhs), repr(w.rhs), repr(w.margin)])
        if w.sample is not None:
            wr.writerow(["sample"] + [repr(float(x)) for x in np.real(w.sample)])


def cmd_check(cfg: RunConfig, which: str) -> int:
    """Run one checker family and write ``check_<which>.json`` (plus a witness CSV on failure)."""
    if which not in CHECKS:
        raise ConfigError(f"expected one of {CHECKS}", "check")
    target = build_target(cfg)
    grid = TimeGrid(cfg.tau)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = _run_checks(cfg, which, target, grid)
    verdict = "pass" if all(r.passed for _, r in reports) else "fail"
    doc = {"target": target.name, "check": which, "verdict": verdict,
           "reports": {label: r.to_dict() for label, r in reports}}
    with open(out / f"check_{which}.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for label, r in reports:
        line = f"{target.name} {which} [{label}]: {r.verdict} ({r.trials} trials)"
        if not r.passed:
            wpath = out / f"witness_{which}_{label}.csv"
            _write_witness(wpath, r)
            line += f" witness t={r.witness.time} lhs={r.witness.lhs!r} rhs={r.witness.rhs!r} -> {wpath}"
        print(line)
    return EXIT_PASS if verdict == "pass" else EXIT_FAIL


def cmd_demo(out: str, steps: int, seed: int) -> int:
    """Equivalence, passivity and stability for every bundled model."""
    status = EXIT_PASS
    for name in MODEL_NAMES:
        base = dict(model=name, steps=steps, seed=seed, trials=20, out=str(Path(out) / name))
        codes = [
            cmd_check(RunConfig(**base), "equivalence"),
            cmd_check(RunConfig(**base), "passivity"),
            cmd_run(RunConfig(**base)),
        ]
        if any(codes):
            status = EXIT_FAIL
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dscstab", description="Passive scattering processes: runs and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--model", help=f"bundled model ({', '.join(MODEL_NAMES)}) or model JSON path")
    src.add_argument("--operator", help=f"zoo operator ({', '.join(OPERATOR_NAMES)})")
    common.add_argument("--config", help="JSON run config; command-line flags override its keys")
    common.add_argument("--excite", help="impulse | random | zero | path to a signal CSV")
    common.add_argument("--seed", type=int, help="seed for random excitations and probes")
    common.add_argument("--support", type=int, help="excitation support N in full steps")
    common.add_argument("--steps", type=int, help="horizon in full steps")
    common.add_argument("--amplitude", type=float, help="excitation scale")
    common.add_argument("--alpha", help="delimiting functional: norm, norm2, normp:P, l1, quadratic")
    common.add_argument("--constants", type=lambda s: tuple(float(x) for x in s.split(",")),
                        help="override delimiting constants as a,b,c")
    common.add_argument("--rtol", type=float)
    common.add_argument("--atol", type=float)
    common.add_argument("--tau", type=float, help="full time step")
    common.add_argument("--dim", type=int, help="state dimension for zoo operators")
    common.add_argument("--rho", type=float, help="mesh boundary reflection coefficient")
    common.add_argument("--allow-active", dest="allow_active", action="store_true", default=None,
                        help="permit |rho| > 1")
    common.add_argument("--convention", choices=CONVENTIONS)
    common.add_argument("--domain-linf", dest="domain_linf", type=float,
                        help="existence domain: partial sums must satisfy max |z_i| <= value")
    common.add_argument("--trials", type=int, help="randomized trials per check")
    common.add_argument("--out", help="output directory")

    run = sub.add_parser("run", parents=[common], help="iterate a model or operator and verify the bound")
    run.add_argument("--trace", action="store_true", default=None, help="also write the full DSC channel trace")
    check = sub.add_parser("check", parents=[common], help="run a checker")
    check.add_argument("which", choices=CHECKS)
    demo = sub.add_parser("demo", help="run every bundled model")
    demo.add_argument("--out", default="dsc_demo")
    demo.add_argument("--steps", type=int, default=200)
    demo.add_argument("--seed", type=int, default=0)
    return parser


def _setup_logging():
    level = os.environ.get("DSC_LOG", "error").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "demo":
            return cmd_demo(args.out, args.steps, args.seed)
        cfg = config_from_args(args)
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_check(cfg, args.which)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ExistenceError as err:
        print(f"existence guard: {err}", file=sys.stderr)
        return EXIT_EXISTENCE
    except InconsistencyError as err:
        print(f"inconsistent: {err}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
