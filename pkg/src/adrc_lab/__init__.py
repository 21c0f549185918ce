"""Linear active disturbance rejection control: gain design, closed-loop
simulation against configurable LTI plants, and experiment suites."""

from .lti import (
    InvalidInput,
    Polynomial,
    StateSpaceModel,
    characteristic_polynomial,
    poly_roots_all_equal,
    zoh_discretize,
)
from .design import (
    AdrcDesign,
    DiscreteEsoGains,
    design_first_order,
    design_second_order,
    discrete_gains_first,
    discrete_gains_for,
    discrete_gains_second,
    map_pole_to_z,
)
from .controllers import (
    ControllerState,
    DiscreteEso,
    PidGains,
    TransformedEso,
    apply_saturation,
    assemble_discrete_eso,
    build_transformed,
    control_law,
    discrete_adrc_update,
    eso_derivative,
    optimized_latency_update,
    optimized_post_step,
)
from .simulate import (
    ControllerConfig,
    PlantSpec,
    Scenario,
    SimulationDiverged,
    Trajectory,
    build_plant,
    gaussian_noise,
    run_closed_loop,
    simulate_plant,
)
from .equivalence import (
    AugmentedDesign,
    EquivalenceReport,
    build_augmented_design,
    design_feedback,
    disturbance_gain,
    gain_compensation,
    verify_equivalence,
)

__version__ = "0.1.0"
