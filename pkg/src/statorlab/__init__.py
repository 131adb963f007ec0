"""statorlab: modal simulation and holographic-observable synthesis
for traveling-wave ultrasonic stators."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DiscretizationError,
    DomainError,
    GeometryError,
    GridMismatchError,
    NoModeError,
    NumericalError,
    SamplingError,
    StatorLabError,
    TimeStepError,
    UndefinedIndexError,
    UnwrapError,
)
from .geometry import EffectivePlate, Material, StatorGeometry, fill_factor, homogenize
from .modal import (
    CalibrationResult,
    Discretization,
    ModalBasis,
    Mode,
    assemble,
    calibrate,
    mode_shape_eval,
    solve_modes,
)
from .grids import DisplacementField, RasterGrid, RingGrid, circle_values
from .dynamics import (
    DriveConfig,
    ExternalMode,
    MixedResponse,
    ModalTrajectory,
    ProbeSeries,
    calibrate_force_per_volt,
    field_at,
    field_envelope,
    lateral_mode_proxy,
    lorentzian_weight,
    mixed_response,
    probe,
    respond,
    settling_damping_ratio,
    snapshot_at_strobe,
)
from .holography import (
    FringeImage,
    OpticalConfig,
    PhaseMap,
    first_dark_fringe_amplitude,
    stroboscopic,
    time_averaged,
    unwrap_to_displacement,
    wrap_phase,
)
from .analysis import (
    CircleSample,
    FitResult,
    StrobeTrack,
    asymmetry_index,
    detect_mode_number,
    fit_eq1,
    track_strobe_phase,
)

__all__ = [
    "__version__",
    "StatorLabError", "GeometryError", "ConfigError", "DiscretizationError",
    "DomainError", "TimeStepError", "GridMismatchError", "SamplingError",
    "NoModeError", "UnwrapError", "UndefinedIndexError", "NumericalError",
    "StatorGeometry", "Material", "EffectivePlate", "fill_factor", "homogenize",
    "Discretization", "Mode", "ModalBasis", "CalibrationResult",
    "assemble", "solve_modes", "mode_shape_eval", "calibrate",
    "DisplacementField", "RasterGrid", "RingGrid", "circle_values",
    "DriveConfig", "ModalTrajectory", "ProbeSeries", "ExternalMode",
    "MixedResponse", "respond", "probe", "field_at", "field_envelope",
    "snapshot_at_strobe", "mixed_response", "lateral_mode_proxy",
    "lorentzian_weight", "settling_damping_ratio", "calibrate_force_per_volt",
    "OpticalConfig", "FringeImage", "PhaseMap", "time_averaged",
    "stroboscopic", "unwrap_to_displacement", "wrap_phase",
    "first_dark_fringe_amplitude",
    "CircleSample", "FitResult", "StrobeTrack", "detect_mode_number",
    "fit_eq1", "track_strobe_phase", "asymmetry_index",
]
