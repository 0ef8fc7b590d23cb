"""NumPy implementations of the mesh kernels (fallback for ``_kernels``).

Mesh pulses are stored port-major as ``(4, ny, nx)`` float64 arrays with
ports 0 = west, 1 = east, 2 = south, 3 = north.
"""
import numpy as np


def shunt_scatter(inc, out):
    """``out = S @ inc`` at every node, ``S = 0.5 * ones - I`` (4x4)."""
    half = 0.5 * (inc[0] + inc[1] + inc[2] + inc[3])
    for p in range(4):
        np.subtract(half, inc[p], out=out[p])


def mesh_connect(out, rho, inc):
    """Exchange pulses across shared edges; outer edges reflect with ``rho``."""
    inc[0, :, 1:] = out[1, :, :-1]
    inc[0, :, 0] = rho * out[0, :, 0]
    inc[1, :, :-1] = out[0, :, 1:]
    inc[1, :, -1] = rho * out[1, :, -1]
    inc[2, 1:, :] = out[3, :-1, :]
    inc[2, 0, :] = rho * out[2, 0, :]
    inc[3, :-1, :] = out[2, 1:, :]
    inc[3, -1, :] = rho * out[3, -1, :]

