"""Quasiperiodic acoustic radiation potential patterns.

Fields of ``N`` standing plane-wave pairs restricted to ``d`` dimensions,
their potentials and derivatives, control synthesis, cut-and-project
tilings, periodicity classification and constant-power transitions.
"""

__version__ = "0.1.0"

from .calculus import (
    LevelSetFamily,
    MinControls,
    arp_gradient,
    arp_gradient_nd,
    arp_gradient_restricted,
    arp_hessian,
    arp_hessian_nd,
    arp_hessian_restricted,
    check_derivatives,
    dual_basis,
    fd_gradient,
    fd_hessian,
    kkt_residual,
    lagrange_multipliers,
    level_set_family,
    null_basis,
    phase_sensitivity,
    synthesize_min_controls,
)
from .control import (
    SymmetryAction,
    TransitionPath,
    averaged_q,
    direct_path,
    geodesic_path,
    match_unitary,
    reflection_action,
    rotation_action,
    total_arp,
    transition_cost,
    translate_controls,
)
from .errors import QCFieldError, ResourceCapError, ValidationError
from .quasiperiodicity import PeriodicityReport, Verdict, classify, lattice_translations, moire_angle, moire_wavevectors
from .render import FieldGrid, level_set_points_3d, render_csv, render_raster, render_tiling_svg, sample_field
from .scene import Scene, SceneError, load_scene, parse_scene
from .tiling import TilingGraph, build_tiling, cell_intersects_subspace, tile_statistics, tiling_1d
from .wavefield import (
    DEFAULT_SPEC,
    Controls,
    PotentialSpec,
    WaveConfig,
    arp_25d_identity,
    arp_nd,
    arp_quadratic,
    arp_value,
    fan_config,
    icosahedral_config,
    lifted_fan_config,
    pressure_nd,
    pressure_restricted,
    phase_shift,
    q_matrix,
    q_matrix_nd,
    spectral_bounds,
)
