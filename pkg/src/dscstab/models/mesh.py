"""Two-dimensional shunt-node mesh.

Each node carries four pulses (west, east, south, north).  Reflection is
the energy conserving 4x4 shunt matrix at every node; connection swaps
pulses across shared edges and reflects the outer ones with ``rho``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..dsc import ScatteringMapPair, lift_connection, lift_reflection
from ..timesignal import StateSpace

WEST, EAST, SOUTH, NORTH = range(4)

S_SHUNT = 0.5 * np.array(
    [
        [-1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0, -1.0],
    ]
)


def shunt_scatter(incident) -> np.ndarray:
    """Outgoing pulses of one node for the four ``incident`` pulses."""
    z = np.asarray(incident, dtype=float)
    if z.shape != (4,):
        raise ValueError(f"a shunt node has 4 ports, got input of shape {z.shape}")
    return S_SHUNT @ z


@dataclass(frozen=True)
class ShuntNodeMesh:
    width: int
    height: int
    rho: float = 1.0
    allow_active: bool = False

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("mesh dimensions must be positive")
        if abs(self.rho) > 1 and not self.allow_active:
            raise ValueError(f"|rho| = {abs(self.rho)} > 1 makes the boundary active; pass allow_active=True")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (4, self.height, self.width)

    @property
    def dim(self) -> int:
        return 4 * self.width * self.height

    @property
    def space(self) -> StateSpace:
        return StateSpace(self.dim)

    def index(self, port: int, x: int, y: int) -> int:
        """Flat state index of ``port`` at node ``(x, y)``."""
        return int(np.ravel_multi_index((port, y, x), self.shape))

    def center(self) -> tuple[int, int]:
        return (self.width // 2, self.height // 2)

    def boundary_mask(self) -> np.ndarray:
        """Flat mask of the ports facing the outer boundary."""
        m = np.zeros(self.shape, dtype=bool)
        m[WEST, :, 0] = True
        m[EAST, :, -1] = True
        m[SOUTH, 0, :] = True
        m[NORTH, -1, :] = True
        return m.ravel()


def build_mesh_maps(mesh: ShuntNodeMesh, backend: str | None = None) -> ScatteringMapPair:
    """Reflection scatters at every node, connection exchanges across edges."""
    kern = kernels if backend is None else kernels.load(backend)
    shape = mesh.shape
    space = mesh.space
    rho = float(mesh.rho)

    def reflect(k, hist):
        inc = np.ascontiguousarray(hist(k), dtype=float).reshape(shape)
        out = np.empty(shape)
        kern.shunt_scatter(inc, out)
        return out.ravel()

    def connect(k, hist):
        out = np.ascontiguousarray(hist(k), dtype=float).reshape(shape)
        inc = np.empty(shape)
        kern.mesh_connect(out, rho, inc)
        return inc.ravel()

    return ScatteringMapPair(
        lift_connection(connect, space, name=f"C[rho={rho}]"),
        lift_reflection(reflect, space, name="R[shunt]"),
        name=f"shunt{mesh.width}x{mesh.height}",
    )
