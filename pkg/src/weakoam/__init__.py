"""Weak measurements with Gaussian and orbital-angular-momentum pointer states."""
from .algebra import (
    EigenSystem,
    Observable,
    SystemState,
    WeakValue,
    check_commuting,
    eigendecompose,
    joint_weak_value,
    make_observable,
    make_state,
    simultaneous_eigenbasis,
    weak_moment,
    weak_value,
)
from .evolution import (
    CouplingConfig,
    MomentReport,
    conditioned_moment_series,
    conditioned_moments,
    evolve,
    postselect,
    simulate,
)
from .extraction import (
    assemble_weak_value,
    extract_im_second_moment,
    extract_re_second_moment,
)
from .perturbation import (
    ObservableSpec,
    closed_form_x_gaussian,
    closed_form_xy,
    convergence_report,
    heisenberg_expectation,
)
from .pointer import (
    GridField,
    GridSpec,
    PointerSpec,
    mixed_moment,
    momentum_moment,
    oam_expectation,
    pointer_amplitude,
    position_moment,
    sample,
)

__version__ = "0.1.0"

__all__ = [
    "EigenSystem",
    "Observable",
    "SystemState",
    "WeakValue",
    "check_commuting",
    "eigendecompose",
    "joint_weak_value",
    "make_observable",
    "make_state",
    "simultaneous_eigenbasis",
    "weak_moment",
    "weak_value",
    "CouplingConfig",
    "MomentReport",
    "conditioned_moment_series",
    "conditioned_moments",
    "evolve",
    "postselect",
    "simulate",
    "assemble_weak_value",
    "extract_im_second_moment",
    "extract_re_second_moment",
    "ObservableSpec",
    "closed_form_x_gaussian",
    "closed_form_xy",
    "convergence_report",
    "heisenberg_expectation",
    "GridField",
    "GridSpec",
    "PointerSpec",
    "mixed_moment",
    "momentum_moment",
    "oam_expectation",
    "pointer_amplitude",
    "position_moment",
    "sample",
]
