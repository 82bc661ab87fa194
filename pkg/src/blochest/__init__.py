"""blochest: average-fidelity estimation benchmarks for qubit mixed states.

The library evaluates how well different measure-and-guess strategies
reconstruct a qubit state drawn from a Bures-metric ensemble, given N
identical copies: local spin measurements along fixed or adaptively
chosen axes, and collective measurements on all copies at once.  Every
scheme is scored by the mean fidelity between the guess and the true
state, computed either exactly (outcome enumeration plus quadrature) or
by seeded Monte Carlo, together with the asymptotic rate constants the
exact sweeps converge to.
"""

from .asymptotics import (
    AsymptoticConstants,
    DegenerateSweepError,
    ExponentFit,
    appendix_integrals,
    assemble_xi_o,
    constants,
    fit_exponent,
)
from .core import (
    EmbeddedBloch,
    Prior,
    PriorKind,
    build_prior,
    embed,
    fidelity,
    random_guess_fidelity,
    sample_states,
)
from .estimators import (
    DegenerateEstimateError,
    MLGuess,
    TomographicGuess,
    ml_estimate,
    optimal_estimate,
    random_estimate,
    tomography_estimate,
)
from .evaluator import (
    AllOutcomesDiscardedError,
    EnumerationLimitError,
    FidelityReport,
    Method,
    SweepResult,
    adaptive_local_fidelity,
    exact_fidelity,
    monte_carlo_fidelity,
    sweep,
    tomography_with_discard,
)
from .schemes import (
    CollectiveOutcome,
    LocalOutcome,
    OutcomeSet,
    SchemeKind,
    SchemeSpec,
    collective_probability,
    collective_weight,
    enumerate_outcomes,
    local_probability,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "PriorKind",
    "Prior",
    "EmbeddedBloch",
    "embed",
    "fidelity",
    "build_prior",
    "random_guess_fidelity",
    "sample_states",
    # schemes
    "SchemeKind",
    "SchemeSpec",
    "LocalOutcome",
    "CollectiveOutcome",
    "OutcomeSet",
    "local_probability",
    "collective_probability",
    "collective_weight",
    "enumerate_outcomes",
    # estimators
    "TomographicGuess",
    "MLGuess",
    "tomography_estimate",
    "ml_estimate",
    "optimal_estimate",
    "random_estimate",
    "DegenerateEstimateError",
    # evaluator
    "Method",
    "FidelityReport",
    "SweepResult",
    "exact_fidelity",
    "monte_carlo_fidelity",
    "tomography_with_discard",
    "adaptive_local_fidelity",
    "sweep",
    "AllOutcomesDiscardedError",
    "EnumerationLimitError",
    # asymptotics
    "AsymptoticConstants",
    "ExponentFit",
    "appendix_integrals",
    "assemble_xi_o",
    "constants",
    "fit_exponent",
    "DegenerateSweepError",
]
