from .correlators import (
    ActionCumulant,
    DensityKind,
    OscillatorEnsemble,
    PDensitySpec,
    action_cumulant,
    ChaosCheck,
    allegiance_classical,
    chaos_check,
    correlator_fit,
    fgr_prediction,
    phase_correlation,
    simulate_density,
)
from .glauber import FockWeights, PDensity, fock_to_p, geometric_weights, p_to_fock, thermal_fock_weights
from .model import (
    DEFAULT_DRIVE,
    DriveSpec,
    OscillatorParams,
    OscillatorTrajectory,
    integrate_orbit,
    run_orbits,
)
from .semiclassical import (
    EarlyTimeFidelity,
    SemiclassicalAmplitude,
    early_time_fidelity,
    growth_rate,
    semiclassical_amplitude,
)
