"""Exact system-pointer evolution under ``H = g_A A P_x + g_B B P_y``.

Because ``P_x`` and ``P_y`` generate translations, the interaction shifts the
pointer by ``(alpha_k * delta_a, beta_k * delta_b)`` in the branch belonging to
the joint eigenvector ``|k>`` of (A, B).  No expansion in the coupling is made,
which is what makes this module usable as an oracle for the perturbative
formulas.
"""
from __future__ import annotations

import csv
import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebra import (
    Observable,
    SystemState,
    check_commuting,
    eigendecompose,
    simultaneous_eigenbasis,
)
from .errors import BadShape, NonCommuting, PostselectionTooRare
from .pointer import (
    GridField,
    GridSpec,
    MixedKind,
    PointerSpec,
    mixed_moment,
    momentum_moment,
    position_moment,
    sample,
)

MIN_POSTSELECTION = 1e-12


@dataclass(frozen=True, eq=False)
class CouplingConfig:
    """Interaction strengths ``delta_a = g_A t`` and ``delta_b = g_B t``.

    ``B = None`` means the observable B is absent (B = 0).
    """

    A: Observable
    delta_a: float
    B: Observable | None = None
    delta_b: float = 0.0

    def __post_init__(self):
        if self.B is not None:
            if self.B.dim != self.A.dim:
                raise BadShape("A and B act on different system dimensions")
            if not check_commuting(self.A, self.B):
                raise NonCommuting("A and B must commute")

    def with_delta(self, delta: float) -> "CouplingConfig":
        """Same observables with ``delta_a`` replaced by ``delta``.

        ``delta_b`` is rescaled to keep ``delta_b / delta_a`` fixed.
        """
        if self.delta_a != 0:
            delta_b = self.delta_b * delta / self.delta_a
        else:
            delta_b = self.delta_b if delta != 0 else 0.0
        return dataclasses.replace(self, delta_a=float(delta), delta_b=float(delta_b))


@dataclass(frozen=True, eq=False)
class EntangledState:
    basis: np.ndarray          # columns are the joint eigenvectors |k>
    alphas: np.ndarray
    betas: np.ndarray
    coefficients: np.ndarray   # c_k = <k|i>
    branch_fields: tuple
    pointer: PointerSpec

    @property
    def grid(self) -> GridSpec:
        return self.branch_fields[0].grid


@dataclass(frozen=True)
class MomentReport:
    p_post: float
    x: float
    y: float
    xy: float
    px: float
    py: float
    xpy: complex
    ypx: complex
    grid: GridSpec

    CSV_COLUMNS = ("p_post", "x", "y", "xy", "px", "py", "re_xpy", "im_xpy", "re_ypx", "im_ypx")

    def to_dict(self) -> dict:
        return {
            "p_post": self.p_post,
            "x": self.x,
            "y": self.y,
            "xy": self.xy,
            "px": self.px,
            "py": self.py,
            "re_xpy": self.xpy.real,
            "im_xpy": self.xpy.imag,
            "re_ypx": self.ypx.real,
            "im_ypx": self.ypx.imag,
            "grid_n": self.grid.n,
            "grid_half_extent": self.grid.half_extent,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_values(self) -> list:
        d = self.to_dict()
        return [d[c] for c in self.CSV_COLUMNS]


def _joint_basis(coupling: CouplingConfig):
    if coupling.B is None:
        eig = eigendecompose(coupling.A)
        return eig.matrix(), np.asarray(eig.eigenvalues), np.zeros(coupling.A.dim)
    joint = simultaneous_eigenbasis(coupling.A, coupling.B)
    return joint.matrix(), np.asarray(joint.alphas), np.asarray(joint.betas)


def evolve(i: SystemState, coupling: CouplingConfig, pointer: PointerSpec,
           grid: GridSpec) -> EntangledState:
    """Apply the impulsive coupling to ``|i> (x) |phi>``.

    Raises
    ------
    ExtentTooSmall
        If the largest branch shift pushes the pointer tails off the grid.
    """
    if i.dim != coupling.A.dim:
        raise BadShape("state and observable dimensions differ")
    basis, alphas, betas = _joint_basis(coupling)
    coefficients = basis.conj().T @ i.amplitudes
    cache = {}
    branches = []
    for a, b in zip(alphas, betas):
        shift = (float(a * coupling.delta_a), float(b * coupling.delta_b))
        if shift not in cache:
            cache[shift] = sample(pointer, grid, shift)
        branches.append(cache[shift])
    return EntangledState(basis, alphas, betas, coefficients, tuple(branches), pointer)


def postselect(state: EntangledState, f: SystemState) -> GridField:
    """Pointer field ``<f|psi_out>``, left unnormalized.

    Its squared norm is the post-selection probability.
    """
    if f.dim != state.basis.shape[0]:
        raise BadShape("post-selected state has the wrong dimension")
    weights = (f.amplitudes.conj() @ state.basis) * state.coefficients
    values = np.zeros_like(state.branch_fields[0].values)
    for w, branch in zip(weights, state.branch_fields):
        values = values + w * branch.values
    return GridField.from_values(state.grid, values)


def conditioned_moments(phi_f: GridField) -> MomentReport:
    """Pointer moments of the renormalized post-selected field."""
    p_post = phi_f.norm_hint
    if p_post < MIN_POSTSELECTION:
        raise PostselectionTooRare(f"post-selection probability {p_post:.3e} is below "
                                   f"{MIN_POSTSELECTION:.0e}")
    psi = phi_f.normalized()
    return MomentReport(
        p_post=p_post,
        x=position_moment(psi, 1, 0).real,
        y=position_moment(psi, 0, 1).real,
        xy=position_moment(psi, 1, 1).real,
        px=momentum_moment(psi, 1, 0).real,
        py=momentum_moment(psi, 0, 1).real,
        xpy=mixed_moment(psi, MixedKind.XPY),
        ypx=mixed_moment(psi, MixedKind.YPX),
        grid=phi_f.grid,
    )


def simulate(i, coupling, pointer, grid, f) -> MomentReport:
    """evolve, postselect and conditioned_moments in one call."""
    return conditioned_moments(postselect(evolve(i, coupling, pointer, grid), f))


def conditioned_moment_series(i, coupling, pointer, grid, f, deltas,
                              workers: int | None = None) -> list:
    """One :class:`MomentReport` per coupling strength, in input order.

    See :meth:`CouplingConfig.with_delta` for how ``delta_b`` follows.
    """
    def run(delta):
        return simulate(i, coupling.with_delta(delta), pointer, grid, f)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, deltas))
    return [run(d) for d in deltas]


def write_series_csv(deltas, reports, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("delta",) + MomentReport.CSV_COLUMNS)
        for delta, report in zip(deltas, reports):
            writer.writerow([f"{v:.17g}" for v in [delta, *report.csv_values()]])
