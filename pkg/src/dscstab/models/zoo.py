"""Bundled model configurations and the operator zoo used by the suites."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .. import functionals
from ..dsc import ScatteringMapPair
from ..functionals import DelimitingFunctional
from ..operators import (
    CausalOperator,
    compose,
    convolution_operator,
    delay,
    identity,
    lookahead,
    pointwise,
    scale,
    zero_operator,
)
from ..timesignal import Excitation, StateSpace, TimeGrid
from .mesh import ShuntNodeMesh, build_mesh_maps
from .nodes import DiffusionNode, RotorNode, SaturatingScatterer, diffusion_maps, rotation, rotor_maps, saturating_maps

MODEL_NAMES = ("shunt4", "shunt16", "shunt16_lossy", "diffusion2", "saturating", "rotor")
MODEL_KINDS = ("shunt_mesh", "diffusion", "saturating", "rotor")


class ConfigError(ValueError):
    """Invalid model or run configuration; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


def bundled_config(name: str) -> dict:
    if name not in MODEL_NAMES:
        raise ConfigError(f"unknown model {name!r}; bundled models are {', '.join(MODEL_NAMES)}", "model")
    text = resources.files("dscstab.models").joinpath("configs", f"{name}.json").read_text()
    return json.loads(text)


def alpha_from_config(spec: dict, space: StateSpace) -> DelimitingFunctional:
    kind = spec.get("kind", "norm_power")
    if kind == "norm":
        alpha = functionals.norm(space)
    elif kind == "norm_power":
        alpha = functionals.norm_power(space, float(spec.get("p", 2)))
    elif kind == "linear_sum":
        alpha = functionals.linear_sum(space)
    elif kind == "quadratic_form":
        alpha = functionals.quadratic_form(space, spec.get("weights", np.ones(space.dim)))
    else:
        raise ConfigError(f"unsupported alpha kind {kind!r}", "alpha.kind")
    if {"a", "b", "c"} <= spec.keys():
        alpha = alpha.with_constants(float(spec["a"]), float(spec["b"]), float(spec["c"]))
    return alpha


@dataclass
class Model:
    name: str
    kind: str
    maps: ScatteringMapPair
    alpha: DelimitingFunctional
    config: dict
    mesh: ShuntNodeMesh | None = None
    passive: bool = True
    impulse_value: np.ndarray = field(default=None)

    @property
    def space(self) -> StateSpace:
        return self.maps.space

    def excitation(self, grid: TimeGrid, kind: str = "impulse", N: int = 1, seed: int | None = None,
                   amplitude: float = 1.0) -> Excitation:
        """``impulse`` (the configured one at t = 0), ``random`` (needs a seed) or ``zero``."""
        if kind == "impulse":
            return Excitation.from_values(grid, self.space, [amplitude * self.impulse_value], 1)
        if kind == "zero":
            return Excitation.from_values(grid, self.space, [], max(N, 1))
        if kind == "random":
            if seed is None:
                raise ConfigError("random excitations need an explicit seed", "seed")
            rng = np.random.default_rng(seed)
            nonneg = self.kind == "diffusion"
            e = Excitation.random(grid, self.space, N, rng, amplitude)
            return Excitation(e.signal.map(np.abs), N) if nonneg else e
        raise ConfigError(f"unknown excitation kind {kind!r}", "excitation")


def load_model(config: dict, **overrides) -> Model:
    """Build a model from a config dict; ``overrides`` replace top-level keys."""
    cfg = {**config, **{k: v for k, v in overrides.items() if v is not None}}
    kind = cfg.get("kind")
    name = cfg.get("name", kind)
    exc = cfg.get("excitation", {})
    try:
        if kind == "shunt_mesh":
            try:
                mesh = ShuntNodeMesh(int(cfg["width"]), int(cfg["height"]), float(cfg.get("rho", 1.0)),
                                     bool(cfg.get("allow_active", False)))
            except ValueError as err:
                raise ConfigError(str(err), "rho" if "rho" in str(err) else "width") from None
            maps = build_mesh_maps(mesh)
            impulse = mesh.space.zero()
            x, y = exc.get("node", mesh.center())
            impulse[mesh.index(int(exc.get("port", 0)), x, y)] = float(exc.get("value", 1.0))
            alpha = alpha_from_config(cfg.get("alpha", {}), mesh.space)
            return Model(name, kind, maps, alpha, cfg, mesh, abs(mesh.rho) <= 1, impulse)
        if kind == "diffusion":
            node = DiffusionNode(np.array(cfg["D"], dtype=float))
            maps = diffusion_maps(node)
        elif kind == "saturating":
            maps = saturating_maps(SaturatingScatterer(np.array(cfg["M"], dtype=float), float(cfg.get("s", 1.0))))
        elif kind == "rotor":
            maps = rotor_maps(RotorNode(float(cfg.get("theta", 0.3)), tuple(cfg.get("weights", (0.5, 0.5)))))
        else:
            raise ConfigError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}", "kind")
    except KeyError as missing:
        raise ConfigError("missing required key", str(missing.args[0])) from None
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(str(err), "kind") from None
    space = maps.space
    impulse = space.vector(exc.get("value", np.eye(space.dim)[0]))
    alpha = alpha_from_config(cfg.get("alpha", {}), space)
    return Model(name, kind, maps, alpha, cfg, None, True, impulse)


def model(name: str, **overrides) -> Model:
    return load_model(bundled_config(name), **overrides)


@dataclass(frozen=True)
class ZooEntry:
    name: str
    op: CausalOperator
    passive: bool


def operator_zoo(space: StateSpace, tau: float = 1.0) -> dict[str, ZooEntry]:
    """Passive operators for the stability suites plus two negative controls.

    Every passive entry is passive for ``||.||**p`` (``p >= 1``) in the l2
    norm: pointwise maps are contractions and kernels have
    ``tau * sum ||K_j|| <= 1``.
    """
    d = delay(space)
    rot = rotation(0.7) if space.dim == 2 else np.eye(space.dim)
    conv = convolution_operator([0.3 / tau, 0.4 / tau, 0.3 / tau], space, tau)
    conv_rot = convolution_operator([0.5 / tau * rot, 0.5 / tau * rot.T], space, tau)
    entries = [
        ZooEntry("delay", d, True),
        ZooEntry("scaled_delay_0.5", scale(d, 0.5), True),
        ZooEntry("scaled_delay_0.9", scale(d, 0.9), True),
        ZooEntry("scaled_delay_1.0", scale(d, 1.0), True),
        ZooEntry("delay2", delay(space, 2), True),
        ZooEntry("conv3", conv, True),
        ZooEntry("conv_rot", conv_rot, True),
        ZooEntry("identity", identity(space), True),
        ZooEntry("zero", zero_operator(space), True),
        ZooEntry("composed_delay_conv", compose(scale(d, 0.9), conv), True),
        ZooEntry("composed_rot_delay", compose(pointwise(lambda z: rot @ z, space, "rot"), d), True),
        ZooEntry("scaled_delay_1.1", scale(d, 1.1), False),
        ZooEntry("lookahead", lookahead(space), False),
    ]
    return {e.name: e for e in entries}
