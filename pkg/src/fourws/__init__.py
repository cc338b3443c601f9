"""Four-wheel-steering path tracking: kinematic model, steering law,
closed-loop stability charts, double-pole gain design and simulation."""

from .config import Config, build_scenario, load_config, parse_config
from .controller import ControlGains, ControllerConfig, command, feedback, feedforward
from .errors import (
    ConfigError,
    FourWSError,
    GuardError,
    PathRangeError,
    PlacementError,
    ProjectionError,
    SingularityError,
)
from .path import (
    Arc,
    PathFrameState,
    PathPoint,
    Piecewise,
    Straight,
    path_frame_derivatives,
    pose_at,
    project,
    to_path_frame,
)
from .sim import Metrics, Scenario, SimulationAborted, Trace, compute_metrics, rk4_step, run
from .stability import (
    CharPoly,
    PolePlacementSpec,
    Stability,
    StabilityGrid,
    boundary_curves,
    char_coeffs,
    closed_loop_matrix,
    eigenvalues,
    is_stable,
    place_double_pole,
    sample_region,
)
from .vehicle_model import (
    GlobalDerivative,
    GlobalState,
    SteeringInput,
    VehicleParams,
    constraint_residuals,
    global_derivatives,
    lateral_acceleration,
)

__version__ = "0.1.0"
