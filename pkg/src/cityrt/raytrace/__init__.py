"""Deterministic polarimetric ray tracing over compiled scene geometry."""

from .amplitude import attach_amplitudes, path_amplitude, reflection_matrix, spherical_basis
from .diffraction import (
    candidate_edge_ids,
    diffraction_matrix,
    diffraction_paths,
    diffraction_paths_geometry,
    transition_function,
    utd_coefficients,
    wedge_frame,
)
from .fresnel import fresnel_coefficients
from .geometry import EdgeTable, SceneGeometry, compile_geometry
from .io import paths_csv
from .sampling import fibonacci_directions
from .tracer import trace_paths, trace_to_grid
from .types import C0, DIFFRACT, LOS, REFLECT, Interaction, PropagationPath, RtConfig, make_path

__all__ = [
    "C0",
    "DIFFRACT",
    "EdgeTable",
    "Interaction",
    "LOS",
    "PropagationPath",
    "REFLECT",
    "RtConfig",
    "SceneGeometry",
    "attach_amplitudes",
    "candidate_edge_ids",
    "compile_geometry",
    "diffraction_matrix",
    "diffraction_paths",
    "diffraction_paths_geometry",
    "fibonacci_directions",
    "fresnel_coefficients",
    "make_path",
    "path_amplitude",
    "paths_csv",
    "reflection_matrix",
    "spherical_basis",
    "trace_paths",
    "trace_to_grid",
    "transition_function",
    "utd_coefficients",
    "wedge_frame",
]
