"""Rotatable XL-MIMO panels for high-speed rail links."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    SPEED_OF_LIGHT,
    ArrayConfig,
    PanelPose,
    Scenario,
    antenna_offsets,
    antenna_positions,
    center_distance,
)
from .channel import (  # noqa: E402
    PowerPolicy,
    capacity,
    doppler_frequency,
    exact_channel,
    gram,
    orthogonality_defect,
)
from .correlation import (  # noqa: E402
    approx_pair_distance,
    eta_coefficients,
    factorized_channel,
    gain_entry_closed_form,
    gain_matrix,
    gain_matrix_closed_form,
    numerical_rank,
    optimal_spacing,
)
from .trajectory import (  # noqa: E402
    PolarObservation,
    TrackParams,
    estimate_speed,
    nmse,
    predict_position,
    simulate_track,
)
from .optimizer import DEConfig, de_optimize, mutation_scale, rank_objective  # noqa: E402
