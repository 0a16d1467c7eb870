"""Interval/circle exchange maps, their one-parameter families, and
area-preserving perturbations: periodic-interval oracles, symmetry lines,
and periodic-orbit location, classification and continuation.

Quick tour::

    from fractions import Fraction
    from iexmaps import Permutation, Lengths, Iem, periodic_intervals

    F = Iem(Permutation.reversing(4), Lengths(["7/50", "2/5", "1/10", "9/25"]))
    periodic_intervals(F, 3)   # exact orbit of period-3 intervals

Two-dimensional perturbed maps live in :mod:`iexmaps.perturbed`, their
symmetry lines in :mod:`iexmaps.symlines`, and the periodic-orbit machinery
in :mod:`iexmaps.orbits`.  The ``iexmaps`` command drives batch experiments
from sectioned key=value config files.
"""

from .iem import (
    Cem,
    DegeneracyWarning,
    Iem,
    Lengths,
    NotReversibleError,
    PeriodicInterval,
    Permutation,
    SaddleConnection,
    compose,
    conjugate_by_reflection,
    invert,
    is_reversible,
    orbit_intervals,
    periodic_intervals,
    reflection,
    saddle_connections,
    swap_decompose,
    translation_vector,
    verify_no_nonsymmetric,
)
from .families import Family, Subregion
from .perturbed import BoundaryEscape, Forcing, PerturbedMap, PhasePoint, Trajectory
from .symlines import (
    Branch,
    IntersectionCandidate,
    SymmetryLineSet,
    TransversalityVerdict,
    fixed_set_residual,
    gamma,
    gamma_primary,
    intersections,
    tangent_unperturbed,
    transversality_test,
)
from .orbits import (
    BalancedOrbitError,
    DegeneratePersistence,
    ItineraryMismatch,
    NewtonFailure,
    OrbitRecord,
    PredictedSeeds,
    ResidualG,
    SearchResult,
    SweepResult,
    balance,
    classify_residue,
    evaluate_M,
    find_symmetric,
    make_record,
    newton_refine,
    periodic_interval_width,
    predict_nonsymmetric,
    residue,
    sweep_eps,
)

__version__ = "0.1.0"
