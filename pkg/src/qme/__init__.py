"""Entropy of quantum measurements.

Effects, observables, instruments and measurement models on finite
dimensional Hilbert spaces, the rho-entropies they carry, and a seeded
property-check suite for the inequalities relating them.
"""

from .config import Tolerances, configure, overridden, tolerances
from .entropy import (
    EffectEntropyBounds,
    effect_entropy,
    effect_entropy_bounds,
    instrument_entropy,
    observable_entropy,
    probability,
    von_neumann_entropy,
)
from .errors import (
    ConfigError,
    DimensionError,
    InstrumentMismatchError,
    InvariantViolation,
    LabelError,
    NotHermitianError,
    NotPositiveError,
    NotSurjectiveError,
    NumericalError,
    QMEError,
    SchemaError,
    UndefinedBoundError,
    UnknownCheckError,
    ZeroEffectError,
)
from .objects import (
    Effect,
    Instrument,
    KrausMap,
    MeasurementModel,
    Observable,
    Operation,
    State,
    complement,
    random_atomic_observable,
    random_channel,
    random_effect,
    random_instrument,
    random_observable,
    random_state,
    spectral_observable,
    trivial_observable,
    validate_effect,
    validate_instrument,
    validate_observable,
    validate_operation,
    validate_state,
)
from .sequential import (
    coarse_grain,
    compose_instruments,
    distribution,
    holevo_chain,
    holevo_instrument,
    holevo_operation,
    iterated_sequential_product,
    luders_instrument,
    luders_operation,
    measured_effect,
    measured_observable,
    model_entropies,
    model_entropy_gap,
    model_instrument,
    model_observable,
    observable_sequential,
    sequential_product_effect,
    tensor_observable,
)

__version__ = "0.1.0"
