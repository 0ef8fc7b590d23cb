"""Backend selection for the mesh kernels.

The compiled extension is used when it was built; otherwise, or when
``DSC_PURE_PYTHON`` is set to a non-empty value other than ``0``, the NumPy
fallback is used.
"""
import importlib
import os

_FORCE_PY = os.environ.get("DSC_PURE_PYTHON", "") not in ("", "0")


def load(name: str):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "cython":
        return importlib.import_module("dscstab._kernels")
    if name == "python":
        return importlib.import_module("dscstab._kernels_py")
    raise ValueError(f"unknown kernel backend {name!r}")


def available() -> list[str]:
    names = ["python"]
    try:
        load("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


if _FORCE_PY:
    _mod = load("python")
else:
    try:
        _mod = load("cython")
    except ImportError:
        _mod = load("python")

BACKEND = "cython" if _mod.__name__.endswith("._kernels") else "python"
shunt_scatter = _mod.shunt_scatter
mesh_connect = _mod.mesh_connect
