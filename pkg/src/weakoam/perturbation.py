"""Second-order Heisenberg expansion and closed-form pointer shifts.

``heisenberg_expectation`` evaluates

    <O(t)> = <O> + i <[K, O]> - 1/2 <[K, [K, O]]>,   K = H t = dA A P_x + dB B P_y

on the product state ``|i> (x) |phi>`` without building any operator matrix:
system operators act on the first axis of a ``(d, n, n)`` array, positions
multiply pointwise, momenta are FFT derivatives.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import (
    Observable,
    SystemState,
    check_commuting,
    joint_weak_value,
    weak_moment,
    weak_value,
)
from .errors import DegenerateFit, NonCommuting
from .evolution import CouplingConfig
from .pointer import GridSpec, PointerSpec, apply_momentum, apply_position, integrate, sample

POINTER_OPERATORS = ("X", "Y", "Px", "Py")
EXACT_AGREEMENT = 1e-12


@dataclass(frozen=True, eq=False)
class ObservableSpec:
    """``S (x) M`` with S = |f><f| (or identity when ``postselect`` is None).

    ``pointer_part`` lists pointer operators as written in the product, so
    ``("X", "Y")`` is XY and ``("Y", "Px")`` is Y P_x (P_x acts first).
    """

    pointer_part: tuple
    postselect: SystemState | None = None

    def __post_init__(self):
        part = tuple(self.pointer_part)
        object.__setattr__(self, "pointer_part", part)
        if len(part) > 2:
            raise ValueError("pointer monomials are limited to degree 2")
        bad = [op for op in part if op not in POINTER_OPERATORS]
        if bad:
            raise ValueError(f"unknown pointer operators {bad}; use {POINTER_OPERATORS}")


@dataclass(frozen=True)
class Prediction:
    value: complex
    order_used: int
    terms: dict = field(default_factory=dict)
    norm: float = 1.0  # <i|S|i>, the zeroth-order post-selection probability

    @property
    def conditioned(self) -> complex:
        """Expanded numerator over the zeroth-order post-selection probability."""
        return self.value / self.norm

    def to_dict(self) -> dict:
        out = {"order_used": self.order_used, "norm": self.norm,
               "re_value": self.value.real, "im_value": self.value.imag}
        for name, term in self.terms.items():
            out[f"re_{name}"] = term.real
            out[f"im_{name}"] = term.imag
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _system(matrix, psi):
    return np.tensordot(matrix, psi, axes=(1, 0))


def _pointer_op(name, psi, grid):
    # psi has shape (d, n, n); pointer axes are 1 (x) and 2 (y)
    if name == "X":
        return apply_position(psi, grid, px=1)
    if name == "Y":
        return apply_position(psi, grid, py=1)
    axis = 0 if name == "Px" else 1
    return np.stack([apply_momentum(component, grid, axis) for component in psi])


def _inner(grid, phi, psi):
    return sum(integrate(grid, a.conj() * b) for a, b in zip(phi, psi))


def heisenberg_expectation(obs: ObservableSpec, i: SystemState, coupling: CouplingConfig,
                           pointer: PointerSpec, grid: GridSpec, order: int = 2) -> Prediction:
    """Truncated Heisenberg expansion of ``<O>`` after the coupling.

    Parameters
    ----------
    obs : ObservableSpec
        The observable; with a post-selection projector the returned value is
        the unnormalized ``<|f><f| M>``.  Use :attr:`Prediction.conditioned`
        for the conditioned average.
    order : int
        Truncation order 0, 1 or 2.
    """
    if order not in (0, 1, 2):
        raise ValueError("expansion order must be 0, 1 or 2")
    phi = sample(pointer, grid).values
    psi = np.einsum("d,xy->dxy", i.amplitudes, phi)

    if obs.postselect is None:
        projector = np.eye(i.dim)
    else:
        f = obs.postselect.amplitudes
        projector = np.outer(f, f.conj())

    def O(state):
        for name in reversed(obs.pointer_part):
            state = _pointer_op(name, state, grid)
        return _system(projector, state)

    def K(state):
        out = coupling.delta_a * _system(coupling.A.entries, _pointer_op("Px", state, grid))
        if coupling.B is not None and coupling.delta_b != 0:
            out = out + coupling.delta_b * _system(coupling.B.entries,
                                                   _pointer_op("Py", state, grid))
        return out

    terms = {"zeroth": _inner(grid, psi, O(psi)), "first": 0j, "second": 0j}
    if order >= 1:
        terms["first"] = 1j * (_inner(grid, psi, K(O(psi))) - _inner(grid, psi, O(K(psi))))
    if order >= 2:
        k_psi = K(psi)
        double = (_inner(grid, psi, K(K(O(psi))))
                  - 2 * _inner(grid, psi, K(O(k_psi)))
                  + _inner(grid, psi, O(K(k_psi))))
        terms["second"] = -0.5 * double
    value = terms["zeroth"] + terms["first"] + terms["second"]
    norm = float(np.vdot(i.amplitudes, projector @ i.amplitudes).real)
    return Prediction(value, order, terms, norm)


def closed_form_xy(A: Observable, B: Observable | None, i: SystemState, f: SystemState,
                   l: int, delta_a: float, delta_b: float = 0.0,
                   variant: str = "dynamics") -> float:
    """Second-order conditioned ``<XY>`` for p = 0 pointers with ``|l| <= 1``.

    The joint part ``(dA dB / 2) [Re<AB>_w + Re(<A>_w* <B>_w)]`` is the same
    for every ``l``.  The winding-number part depends on ``variant``:

    ``"dynamics"``
        ``(l / 2) [-dA**2 Im<A^2>_w + dB**2 Im<B^2>_w]``.  This is what the
        translation ``phi(x - a dA, y - b dB)`` of the mode
        ``(x + i sgn(l) y)**|l|`` produces; the two terms differ in sign
        because exchanging x and y maps l to -l.
    ``"symmetric"``
        ``(l / 2) [dA**2 Im<A^2>_w + dB**2 Im<B^2>_w]``, the commonly quoted
        form, kept for comparison.  It disagrees in sign with the exact
        evolution for the A term.
    """
    if l not in (-1, 0, 1):
        raise ValueError("closed forms are available for l in {-1, 0, 1} only")
    if variant not in ("dynamics", "symmetric"):
        raise ValueError(f"unknown variant {variant!r}")
    a2 = weak_moment(A, 2, i, f).value
    result = 0.0
    a_sign = -1.0 if variant == "dynamics" else 1.0
    result += 0.5 * l * a_sign * delta_a**2 * a2.imag
    if B is not None:
        if not check_commuting(A, B):
            raise NonCommuting("A and B must commute")
        a = weak_value(A, i, f).value
        b = weak_value(B, i, f).value
        b2 = weak_moment(B, 2, i, f).value
        ab = joint_weak_value(A, B, i, f).value
        result += 0.5 * delta_a * delta_b * (ab.real + (a.conjugate() * b).real)
        result += 0.5 * l * delta_b**2 * b2.imag
    return float(result)


def closed_form_x_gaussian(A: Observable, i: SystemState, f: SystemState,
                           delta_a: float) -> float:
    """First-order conditioned ``<X>`` for a Gaussian pointer: ``dA Re<A>_w``."""
    return float(delta_a * weak_value(A, i, f).value.real)


@dataclass(frozen=True)
class ConvergenceReport:
    slope: float
    intercept: float
    deltas: tuple
    exact: tuple
    closed: tuple
    residuals: tuple
    exact_agreement: bool = False

    def summary(self) -> dict:
        def finite(v):
            return None if math.isnan(v) else v

        return {"slope": finite(self.slope), "intercept": finite(self.intercept),
                "exact_agreement": self.exact_agreement, "points": len(self.deltas)}


def convergence_report(closed, exact_series) -> ConvergenceReport:
    """Fit ``log|exact - closed|`` against ``log delta`` by least squares.

    ``closed`` may be a number, a sequence aligned with ``exact_series`` or a
    callable of delta.  When every residual is below 1e-12 the report is
    flagged ``exact_agreement`` and the slope is NaN.
    """
    series = [(float(d), float(m)) for d, m in exact_series]
    if len(series) < 3:
        raise ValueError("need at least three sweep points")
    deltas = np.array([d for d, _ in series])
    exact = np.array([m for _, m in series])
    if callable(closed):
        closed_vals = np.array([float(closed(d)) for d in deltas])
    else:
        closed_vals = np.broadcast_to(np.asarray(closed, dtype=float), deltas.shape).copy()
    residuals = exact - closed_vals
    small = np.abs(residuals) < EXACT_AGREEMENT
    common = dict(deltas=tuple(deltas), exact=tuple(exact), closed=tuple(closed_vals),
                  residuals=tuple(residuals))
    if small.all():
        return ConvergenceReport(math.nan, math.nan, exact_agreement=True, **common)
    if small.any():
        raise DegenerateFit("some residuals vanish to rounding; a log-log fit is meaningless")
    if np.any(deltas <= 0):
        raise ValueError("sweep deltas must be positive")
    slope, intercept = np.polyfit(np.log(deltas), np.log(np.abs(residuals)), 1)
    return ConvergenceReport(float(slope), float(intercept), **common)


def write_convergence(report: ConvergenceReport, path) -> Path:
    """CSV of (delta, exact, closed, residual) plus a JSON summary sidecar."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["delta", "exact", "closed", "residual"])
        for row in zip(report.deltas, report.exact, report.closed, report.residuals):
            writer.writerow([f"{v:.17g}" for v in row])
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps(report.summary(), sort_keys=True, indent=2) + "\n",
                       encoding="utf-8")
    return sidecar
