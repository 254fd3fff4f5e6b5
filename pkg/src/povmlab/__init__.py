"""povmlab: finite-dimensional POVM toolkit.

Simulation and verification of quantum observables on finite-dimensional
Hilbert spaces: coexistence and complementarity decision procedures, unsharp
spin and covariant phase observables, and truncated-Fock interferometry
models (Mach-Zehnder counting statistics and cross-Kerr nondemolition path
monitoring), with a CLI for parameter sweeps and statistics export.
"""

from . import kerrqnd, linalg, models, mzi, povm, spin
from .linalg import Operator, Vector, eigh, expm, partial_trace, tensor
from .povm import (
    DiscreteObservable,
    Effect,
    MeasurementScheme,
    State,
    StateTransformer,
    are_complementary,
    are_prob_complementary,
    induced_observable,
    joint_observable_feasible,
    marginal,
    probability,
)

__version__ = "0.1.0"

__all__ = [
    "linalg",
    "povm",
    "spin",
    "mzi",
    "kerrqnd",
    "models",
    "Operator",
    "Vector",
    "tensor",
    "partial_trace",
    "expm",
    "eigh",
    "Effect",
    "State",
    "DiscreteObservable",
    "StateTransformer",
    "MeasurementScheme",
    "probability",
    "induced_observable",
    "marginal",
    "are_complementary",
    "are_prob_complementary",
    "joint_observable_feasible",
]
