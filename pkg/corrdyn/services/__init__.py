"""
Correspondence dynamics services
Branch arithmetic, cycles, Cantor bundles, solenoids, holomorphic motions and rendering
"""

from .correspondence import (
    images,
    preimages,
    branch_image,
    preimage_branch,
    branch_label,
    branch_derivative,
    annulus_bounds,
    escape_radius,
    estimate_expansion,
)

from .cycles import (
    unit_circle_periodic_points,
    cycle_from_symbols,
    continue_cycle,
    attracting_cycles_search,
    critical_cycles,
    two_cycle_parameters,
    periodic_word,
)

from .bundle import (
    choose_bundle_params,
    forward_orbit,
    backward_orbit,
    periodic_orbit,
    bundle_point_from_orbit,
    bundle_map,
    bundle_map_c2,
    bundle_preimage,
    bundle_jacobian,
    metric_ds,
    enumerate_sections,
    decode_series,
    reencode,
    mixing_diagnostic,
)

from .solenoid import (
    theta,
    torus_map,
    torus_iterate,
    symbolic_point,
    symbolic_to_torus,
    deck_transform,
    quotient_equal,
)

from .motion import (
    estimate_motion_config,
    shadow_orbit,
    motion_point,
    branched_motion,
    curve_sample,
    holomorphy_residual,
    dilatation_estimate,
    injectivity_check,
    conjugacy_defect,
    lipschitz_estimate,
    roundtrip_error,
)

from .render import (
    membership_grid,
    inverse_ifs_sample,
    dual_ifs_sample,
    write_image,
    write_color_image,
)

__all__ = [
    # Correspondence
    'images',
    'preimages',
    'branch_image',
    'preimage_branch',
    'branch_label',
    'branch_derivative',
    'annulus_bounds',
    'escape_radius',
    'estimate_expansion',

    # Cycles
    'unit_circle_periodic_points',
    'cycle_from_symbols',
    'continue_cycle',
    'attracting_cycles_search',
    'critical_cycles',
    'two_cycle_parameters',
    'periodic_word',

    # Bundle
    'choose_bundle_params',
    'forward_orbit',
    'backward_orbit',
    'periodic_orbit',
    'bundle_point_from_orbit',
    'bundle_map',
    'bundle_map_c2',
    'bundle_preimage',
    'bundle_jacobian',
    'metric_ds',
    'enumerate_sections',
    'decode_series',
    'reencode',
    'mixing_diagnostic',

    # Solenoid
    'theta',
    'torus_map',
    'torus_iterate',
    'symbolic_point',
    'symbolic_to_torus',
    'deck_transform',
    'quotient_equal',

    # Motion
    'estimate_motion_config',
    'shadow_orbit',
    'motion_point',
    'branched_motion',
    'curve_sample',
    'holomorphy_residual',
    'dilatation_estimate',
    'injectivity_check',
    'conjugacy_defect',
    'lipschitz_estimate',
    'roundtrip_error',

    # Render
    'membership_grid',
    'inverse_ifs_sample',
    'dual_ifs_sample',
    'write_image',
    'write_color_image',
]
