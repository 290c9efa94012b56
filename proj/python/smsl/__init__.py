"""Anomalous change detection in multi-temporal hyperspectral cubes.

Cubes are numpy arrays shaped (bands, height, width). Score maps come back as
(height, width) arrays.
"""

from ._smsl import (
    ConfigError,
    DataError,
    SolverError,
    baseline,
    build_dictionary,
    detect,
    exclusivity,
    exclusivity_grad,
    jlt_matrix,
    l21_shrink,
    load_cube,
    roc,
    save_cube,
    soft_threshold,
    solve,
    svt,
    synth_scene,
)

__all__ = [
    "ConfigError",
    "DataError",
    "SolverError",
    "baseline",
    "build_dictionary",
    "detect",
    "exclusivity",
    "exclusivity_grad",
    "jlt_matrix",
    "l21_shrink",
    "load_cube",
    "roc",
    "save_cube",
    "soft_threshold",
    "solve",
    "svt",
    "synth_scene",
]

__version__ = "0.1.0"
