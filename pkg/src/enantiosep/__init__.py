"""Two-step coherent-pulse discrimination of left- and right-handed molecules.

Three-level cyclic (Delta-type) systems are driven by a pi/2 pulse on 1-2 and
then a simultaneous 1-3/2-3 pair whose relative phase makes one enantiomer's
prepared state dark while the other is rotated into |3> for ionization.
"""

from .analytic import (
    BrightDarkDecomposition,
    Chirality,
    ImperfectionParams,
    coefficients_AB,
    dark_state,
    exact_populations,
    imperfect_final_state,
    imperfect_step1_state,
    infer_imperfections,
    perturbative_populations,
    step1_closed_form,
    step2_closed_form_pumped,
)
from .core import (
    LevelSystem,
    Method,
    NormalizationError,
    PopulationTrace,
    PropagationConfig,
    QuantumState,
    assemble_hamiltonian,
    propagate,
    step_unitary,
)
from .metrics import Engine, SeparationReport, SweepResult, perturbed_schedule, separate, sweep
from .pulses import (
    ChiralitySignMap,
    PulseEnvelope,
    PulseSchedule,
    Shape,
    Transition,
    apply_sign_map,
    effective_rabi,
    fig3_all_errors,
    fig3_duration_error,
    fig3_perfect,
    pulse_area,
    rabi_at,
)

__version__ = "0.1.0"
