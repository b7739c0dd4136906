"""Optical-pumping enantio-conversion of chiral molecules with tunneling.

Four-level (L, R, S, A) model, its adiabatic-elimination reductions, and
Lindblad dynamics with steady-state extraction.
"""

from .core import (
    build_liouvillian,
    commutator,
    devectorize,
    dissipator,
    min_eigenvalue,
    trace_distance,
    vectorize,
)
from .dissipation import DecayRates, collapse_operators
from .dynamics import SolverConfig, SteadyRun, Trajectory, evolve, evolve_lab, evolve_to_steady, steady_state
from .errors import (
    ChiralPumpError,
    DegenerateSteadyStateError,
    EliminationUndefinedError,
    IntegrationError,
    InvalidArgumentError,
    SteadyStateTimeout,
    UndefinedObservableError,
)
from .experiments import (
    FIGURES,
    Dataset,
    InitialStateSpec,
    Scenario,
    SweepSpec,
    make_initial,
    run_figure,
    sweep,
)
from .model import (
    DerivedParams,
    ModelParams,
    derive,
    frohlich_generator,
    hamiltonian_effective,
    hamiltonian_interaction,
    hamiltonian_lab,
    hamiltonian_reduced,
    matching_params,
    mhz,
)
from .observables import enantiomeric_excess, populations

__version__ = "0.1.0"
