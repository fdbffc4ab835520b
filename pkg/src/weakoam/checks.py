"""Invariant suite run by ``weakoam --command verify``.

Each check returns a :class:`Check` verdict instead of raising, so one run
reports every failing invariant.
"""
from __future__ import annotations

import cmath
from dataclasses import asdict, dataclass

import numpy as np

from . import scenarios
from .algebra import eigendecompose, identity, make_state, weak_value
from .evolution import CouplingConfig, simulate
from .extraction import assemble_weak_value, random_weak_value_cases
from .perturbation import ObservableSpec, closed_form_xy, heisenberg_expectation
from .pointer import (
    GridSpec,
    MixedKind,
    PointerSpec,
    integrate,
    mixed_moment,
    oam_expectation,
    pointer_amplitude,
    sample,
)

MIN_GRID_N = 64


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def to_dict(self):
        return asdict(self)


def _check(name, error, tolerance, detail=""):
    error = float(error)
    return Check(name, bool(error <= tolerance), error, tolerance, detail)


def _relative(measured, expected):
    return abs(measured - expected) / max(abs(expected), 1e-300)


def grid_checks(grid: GridSpec, sigma: float, l: int):
    yield _check("grid_resolution", 0.0 if grid.n >= MIN_GRID_N else 1.0, 0.0,
                 f"n = {grid.n}, minimum {MIN_GRID_N}")
    X, Y = grid.mesh()
    for wind in sorted({0, 1, l}):
        raw = pointer_amplitude(PointerSpec.for_winding(wind, sigma), X, Y)
        norm = integrate(grid, np.abs(raw) ** 2).real
        yield _check(f"normalization_l{wind}", abs(norm - 1), 1e-8,
                     "analytic normalization constant, quadrature check")
    for wind in sorted({-2, -1, 0, 1, 2, l}):
        lz = oam_expectation(sample(PointerSpec.for_winding(wind, sigma), grid))
        yield _check(f"oam_expectation_l{wind}", abs(lz - wind), 1e-6)
    for wind in sorted({0, 1, l}):
        psi = sample(PointerSpec.for_winding(wind, sigma), grid)
        xpx = mixed_moment(psi, MixedKind.XPX)
        pxx = mixed_moment(psi, MixedKind.PXX)
        yield _check(f"canonical_pair_l{wind}", abs(xpx - pxx - 1j), 1e-5,
                     "<X P_x> - <P_x X> = i")
        yield _check(f"canonical_xpx_l{wind}", abs(xpx - 0.5j), 1e-5, "<X P_x> = i/2")


def convergence_check(grid: GridSpec, sigma: float, l: int, delta: float, epsilon: float):
    A = scenarios.example_observable()
    i, f = scenarios.horizontal(), scenarios.near_orthogonal(epsilon)
    pointer = PointerSpec.for_winding(l, sigma)
    fine = GridSpec(2 * grid.n, grid.half_extent)
    coarse_r = simulate(i, CouplingConfig(A, delta), pointer, grid, f).to_dict()
    fine_r = simulate(i, CouplingConfig(A, delta), pointer, fine, f).to_dict()
    keys = ("x", "y", "xy", "px", "py", "re_xpy", "im_xpy", "re_ypx", "im_ypx")
    change = max(abs(coarse_r[k] - fine_r[k]) for k in keys)
    return _check("grid_convergence", change, 1e-6, f"n = {grid.n} vs {fine.n}")


def algebra_checks():
    A = scenarios.example_observable()
    eig = eigendecompose(A)
    rebuilt = sum(lam * np.outer(v.amplitudes, v.amplitudes.conj())
                  for lam, v in zip(eig.eigenvalues, eig.eigenvectors))
    yield _check("eigen_reconstruction", np.max(np.abs(rebuilt - A.entries)), 1e-10)
    i, f = scenarios.horizontal(), scenarios.near_orthogonal(0.1)
    base = weak_value(A, i, f).value
    phase = cmath.exp(0.7j)
    shifted = weak_value(A, make_state(phase * i.amplitudes), make_state(phase * f.amplitudes))
    yield _check("weak_value_phase_invariance", abs(shifted.value - base), 1e-12)
    yield _check("weak_value_identity", abs(weak_value(identity(), i, f).value - 1), 1e-12)
    yield _check("weak_value_unselected_real", abs(weak_value(A, i, i).value.imag), 1e-12)


def oracle_checks(grid: GridSpec, sigma: float, delta: float, epsilon: float):
    A = scenarios.example_observable()
    i, f = scenarios.horizontal(), scenarios.near_orthogonal(epsilon)
    coupling = CouplingConfig(A, delta)
    for wind in (-1, 0, 1):
        pointer = PointerSpec.for_winding(wind, sigma)
        exact = simulate(i, coupling, pointer, grid, f).xy
        closed = closed_form_xy(A, None, i, f, wind, delta)
        if wind == 0:
            yield _check("gaussian_null_xy", abs(exact), 1e-8)
        else:
            yield _check(f"exact_vs_closed_xy_l{wind}", _relative(exact, closed), 0.05)
            pred = heisenberg_expectation(ObservableSpec(("X", "Y"), f), i, coupling, pointer, grid)
            yield _check(f"heisenberg_vs_closed_xy_l{wind}",
                         _relative(pred.conditioned.real, closed), 1e-8)
            yield _check(f"heisenberg_hermiticity_l{wind}",
                         abs(pred.conditioned.imag), 1e-8)


def random_weak_value_checks(grid: GridSpec, sigma: float, seed: int, delta: float = 0.01):
    for n, (A, i, f) in enumerate(random_weak_value_cases(seed)):
        ref = weak_value(A, i, f).value
        est = assemble_weak_value(A, i, f, delta, grid, sigma)
        yield _check(f"assemble_weak_value_random_{n}", abs(est - ref) / abs(ref), 0.05,
                     f"seed {seed}")


def run_all(grid: GridSpec, sigma: float = 1.0, l: int = 1, delta: float = 0.01,
            epsilon: float = 0.1, seed: int = 0) -> list:
    checks = []
    checks.extend(grid_checks(grid, sigma, l))
    checks.append(convergence_check(grid, sigma, l, delta, epsilon))
    checks.extend(algebra_checks())
    checks.extend(oracle_checks(grid, sigma, delta, epsilon))
    checks.extend(random_weak_value_checks(grid, sigma, seed))
    return checks
