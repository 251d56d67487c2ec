"""Resonance poles, survival dynamics and complex entropy of unstable states."""

from .numerics import (
    QuadratureSpec,
    RootSearchConfig,
    NonConvergence,
    IntegrandError,
    MaxIterExceeded,
    SingularStep,
    StepUnderflow,
    integrate,
    principal_value,
    complex_newton,
    ode_evolve,
    derivative,
)
from .friedrichs import (
    ContinuationUnavailable,
    PoleInUpperHalfPlane,
    FormFactor,
    FlatCutoff,
    RationalFormFactor,
    TabulatedFormFactor,
    form_factor,
    FriedrichsModel,
    ResonancePole,
    DiscretizedSpectrum,
    self_energy,
    self_energy_boundary,
    find_pole,
    perturbative_pole,
    spectral_density,
    discretize,
)
from .decay import (
    InsufficientSpan,
    SurvivalSeries,
    RegimeReport,
    DensityTable,
    density_table,
    survival_amplitude,
    survival_probability,
    gamow_approximation,
    zeno_check,
    classify_regimes,
)
from .thermo import (
    IllDefinedBracket,
    ThermoPoint,
    ComplexEntropy,
    EntropyScan,
    complex_entropy,
    entropy_via_log_identity,
    canonical_entropy,
    entropy_scan,
    naive_partition_function,
)
from .evolution import (
    Mode,
    LadderCoefficient,
    MonotonicityTable,
    thermal_evolve,
    time_evolve,
    temperature_monotonicity,
    verify_ode_solutions,
)

__version__ = "0.1.0"
