"""Two-time-scale SPDEs driven by cylindrical stable noise, in spectral form.

Simulation kernels for regime-switching and fast-slow stochastic fields with
heavy-tailed (alpha-stable) driving noise, plus a statistical harness that
verifies the averaging behaviour of the slow component at desk scale.
"""

from .rng import RngStream
from .stable_noise import (
    NoiseWeights,
    PowerLawRule,
    StableSpec,
    convolution_scale,
    cylindrical_increment,
    ecf,
    sample_standard_stable,
    stable_cf,
)
from .spectral import (
    AdmissibilityReport,
    FieldState,
    SpectralOperator,
    admissibility,
    fractional_power_apply,
    h_norm,
    hoelder_bound_check,
    rod_operator,
    semigroup_apply,
    smoothing_bound_check,
)
from .switching import (
    ChainPath,
    ClassPartition,
    GeneratorMatrix,
    aggregate_generator,
    aggregate_path,
    block_diagonal,
    empirical_transition_rates,
    mixing_decay_probe,
    occupation_fractions,
    simulate_chain,
    stationary_distribution,
)
from .drifts import (
    LinearRegimeDrift,
    SaturatingCoupledDrift,
    SaturatingRegimeDrift,
    TableRegimeDrift,
    ZeroCoupledDrift,
    verify_lipschitz,
)
from .engine import (
    MildStepPlan,
    TrajectoryRecord,
    drift_factor,
    fast_substep_factors,
    make_step_plan,
    solve_averaged_spde,
    solve_fast_slow,
    solve_frozen_fast,
    solve_switching_averaged_spde,
    solve_switching_spde,
    step_ou_mode,
)
from .averaging import (
    ErgodicEstimatorConfig,
    class_average_drift,
    ergodic_decay_probe,
    estimate_ergodic_drift,
    fit_decay_rate,
    lipschitz_probe,
    make_class_averaged,
    make_nu_averaged,
    nu_average_drift,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config

__version__ = "0.1.0"
