from .mesh import S_SHUNT, ShuntNodeMesh, build_mesh_maps, shunt_scatter
from .nodes import (
    DiffusionNode,
    RotorNode,
    SaturatingScatterer,
    clip,
    diffusion_maps,
    rotor_maps,
    saturating_maps,
)
from .energy import energy_in_flight, quadratic_energy
from .zoo import MODEL_NAMES, ConfigError, Model, bundled_config, load_model, model, operator_zoo

__all__ = [
    "S_SHUNT",
    "ShuntNodeMesh",
    "build_mesh_maps",
    "shunt_scatter",
    "DiffusionNode",
    "RotorNode",
    "SaturatingScatterer",
    "clip",
    "diffusion_maps",
    "rotor_maps",
    "saturating_maps",
    "energy_in_flight",
    "quadratic_energy",
    "MODEL_NAMES",
    "ConfigError",
    "Model",
    "bundled_config",
    "load_model",
    "model",
    "operator_zoo",
]
