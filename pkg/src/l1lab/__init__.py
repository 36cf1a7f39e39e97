"""Experiments on the geometry of piecewise-constant integrable functions."""

from ._version import __version__
from .convex_geometry import (
    ConvexBody,
    chebyshev,
    diameter,
    empirical_modulus,
    normal_structure_gap,
    separation_check,
    slack,
)
from .errors import (
    ConfigError,
    DegenerateBody,
    DomainViolation,
    L1LabError,
    NoValidPair,
    PartitionMismatch,
    ResolutionExhausted,
)
from .fixed_point_lab import (
    MapSpec,
    alspach_map,
    alspach_map_projected,
    apply_map,
    km_iterate,
    lipschitz_estimate,
    orbit_hull_scan,
    sample_example_set,
)
from .grid_space import (
    FunctionFamily,
    GridFunction,
    Partition,
    egorov_bad_set,
    extract_measure_cauchy_subsequence,
    ky_fan_distance,
    l1_norm,
    local_measure_distance,
    rearrange_decreasing,
    truncate,
)
from .integrability import (
    OrliczFunction,
    UICertificate,
    build_orlicz,
    layer_cake_bound,
    orlicz_integral,
    tail_profile,
    ui_certificate,
)
from .lorentz import lorentz_norm_table, lorentz_p1_norm
from .scenarios import ScenarioConfig, load_config, run_scenario, validate_config

__all__ = [
    "__version__",
    "ConfigError",
    "ConvexBody",
    "DegenerateBody",
    "DomainViolation",
    "FunctionFamily",
    "GridFunction",
    "L1LabError",
    "MapSpec",
    "NoValidPair",
    "OrliczFunction",
    "Partition",
    "PartitionMismatch",
    "ResolutionExhausted",
    "ScenarioConfig",
    "UICertificate",
    "alspach_map",
    "alspach_map_projected",
    "apply_map",
    "build_orlicz",
    "chebyshev",
    "diameter",
    "egorov_bad_set",
    "empirical_modulus",
    "extract_measure_cauchy_subsequence",
    "km_iterate",
    "ky_fan_distance",
    "l1_norm",
    "layer_cake_bound",
    "lipschitz_estimate",
    "load_config",
    "local_measure_distance",
    "lorentz_norm_table",
    "lorentz_p1_norm",
    "normal_structure_gap",
    "orbit_hull_scan",
    "orlicz_integral",
    "rearrange_decreasing",
    "run_scenario",
    "sample_example_set",
    "separation_check",
    "slack",
    "tail_profile",
    "truncate",
    "ui_certificate",
    "validate_config",
]
