"""Leader-follower population dynamics with birth/death mass exchange.

Macroscopic finite-volume and atomic solvers, an equivalent
total-distribution form, an N-particle jump-process approximation, and the
harness that measures mean-field convergence between the two levels.
"""

from .errors import (
    CflViolation,
    ConfigMismatch,
    DegeneratePair,
    DimensionError,
    FrameMissing,
    H1Violation,
    MassMismatch,
    NegativeWeight,
    PositivityLoss,
    TooLarge,
)
from .harness import (
    ConvergenceReport,
    convergence_study,
    micro_macro_gap,
    reference_solution,
    theta_bound,
)
from .initial import (
    GaussianMixDensity,
    ProportionalInit,
    SeparateInit,
    TwoPlateauDensity,
    UniformDensity,
    initial_grids,
)
from .kernels import (
    CombinedPowerLaw,
    HegselmannKrause,
    PowerLawAttract,
    PowerLawRepel,
    SteeringDrift,
    ZeroKernel,
    convolve,
    coupled_velocity,
    eval_kernel,
)
from .macro import (
    MacroConfig,
    TimeSeries,
    cluster_count,
    equivalence_check,
    euler_pushforward_solve,
    euler_pushforward_step,
    fv_solve,
    fv_step,
    nu_sigma_solve,
    reconstruct_populations,
)
from .measures import (
    DiscreteMeasure,
    GridMeasure,
    LabelDist,
    flat_distance,
    flat_distance_oracle,
    grid_to_discrete,
    label_w1,
    mass,
    pushforward,
    w1_distance_1d,
)
from .micro import (
    MicroConfig,
    ParticleState,
    empirical,
    ensemble_run,
    particle_step,
    sample_initial,
    simulate,
)
from .presets import (
    PRESET_NAMES,
    macro_preset,
    micro_preset,
    ia_text_sigma0_variant,
    ib_text_variant,
)
from .rates import (
    ConstantRate,
    MassSigmoid,
    MollifiedMassThreshold,
    TargetVarianceSigmoid,
    VarianceSigmoid,
    eval_rates,
    lipschitz_probe,
    sigmoid_switch,
    target_variance,
    transition_matrix,
    variance,
)

__version__ = "0.1.0"
