"""Finite-dimensional operator algebra and weak values.

Observables are small Hermitian matrices, states are unit vectors.  Both are
immutable once built: the underlying arrays are flagged read-only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadShape,
    DegeneracyUnresolved,
    NonCommuting,
    NotHermitian,
    NotNormalized,
    OrthogonalPostselection,
)

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
OVERLAP_FLOOR = 1e-10
MAX_DIM = 64


def _frozen(array):
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Observable:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class SystemState:
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: tuple

    def matrix(self) -> np.ndarray:
        """Eigenvectors as the columns of a unitary matrix."""
        return np.column_stack([v.amplitudes for v in self.eigenvectors])


@dataclass(frozen=True, eq=False)
class JointEigenSystem:
    """Shared eigenbasis of two commuting observables with paired eigenvalues."""

    alphas: np.ndarray
    betas: np.ndarray
    eigenvectors: tuple

    def matrix(self) -> np.ndarray:
        return np.column_stack([v.amplitudes for v in self.eigenvectors])


@dataclass(frozen=True)
class WeakValue:
    value: complex
    order: int = 1

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag

    def __complex__(self):
        return complex(self.value)


def make_observable(entries) -> Observable:
    """Validate a square Hermitian matrix and wrap it as an :class:`Observable`."""
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise BadShape(f"observable must be a square matrix, got shape {m.shape}")
    if not 2 <= m.shape[0] <= MAX_DIM:
        raise BadShape(f"observable dimension must lie in [2, {MAX_DIM}], got {m.shape[0]}")
    asym = np.max(np.abs(m - m.conj().T))
    if asym > HERMITIAN_TOL:
        raise NotHermitian(f"max |A_jk - conj(A_kj)| = {asym:.3e}")
    return Observable(_frozen(m))


def make_state(amplitudes, normalize: bool = False) -> SystemState:
    v = np.asarray(amplitudes, dtype=complex)
    if v.ndim != 1 or v.shape[0] < 2:
        raise BadShape(f"state must be a vector of length >= 2, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if normalize:
        if norm == 0:
            raise NotNormalized("cannot normalize the zero vector")
        v = v / norm
    elif abs(norm**2 - 1) > NORM_TOL:
        raise NotNormalized(f"squared norm is {norm**2!r}, expected 1")
    return SystemState(_frozen(v))


def _fix_phase(v):
    # first component that is not numerically zero becomes real positive
    idx = np.flatnonzero(np.abs(v) > 1e-10 * np.max(np.abs(v)))[0]
    return v * (abs(v[idx]) / v[idx])


def eigendecompose(A: Observable) -> EigenSystem:
    """Eigenvalues in ascending order with phase-fixed orthonormal eigenvectors.

    Each eigenvector's first non-negligible component is made real and
    positive so that results are reproducible across LAPACK builds.
    """
    w, V = np.linalg.eigh(A.entries)
    vectors = tuple(SystemState(_frozen(_fix_phase(V[:, k]))) for k in range(len(w)))
    return EigenSystem(_frozen_real(w), vectors)


def _frozen_real(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_dims(*items):
    dims = {item.dim for item in items}
    if len(dims) != 1:
        raise BadShape(f"dimension mismatch: {sorted(dims)}")


def overlap(f: SystemState, i: SystemState) -> complex:
    """Inner product <f|i>."""
    return complex(np.vdot(f.amplitudes, i.amplitudes))


def _postselected_ratio(matrix, i, f, overlap_floor):
    fi = overlap(f, i)
    if abs(fi) < overlap_floor:
        raise OrthogonalPostselection(
            f"|<f|i>| = {abs(fi):.3e} is below the floor {overlap_floor:.1e}"
        )
    return complex(np.vdot(f.amplitudes, matrix @ i.amplitudes)) / fi


def weak_value(A: Observable, i: SystemState, f: SystemState,
               overlap_floor: float = OVERLAP_FLOOR) -> WeakValue:
    """Weak value ``<f|A|i> / <f|i>``.

    Raises
    ------
    OrthogonalPostselection
        If ``|<f|i>|`` falls below ``overlap_floor``.
    """
    _check_dims(A, i, f)
    return WeakValue(_postselected_ratio(A.entries, i, f, overlap_floor), order=1)


def weak_moment(A: Observable, n: int, i: SystemState, f: SystemState,
                overlap_floor: float = OVERLAP_FLOOR) -> WeakValue:
    """Weak value of the n-th power ``A**n``, built by repeated multiplication."""
    if n < 1:
        raise ValueError(f"moment order must be positive, got {n}")
    _check_dims(A, i, f)
    power = A.entries
    for _ in range(n - 1):
        power = power @ A.entries
    return WeakValue(_postselected_ratio(power, i, f, overlap_floor), order=n)


def check_commuting(A: Observable, B: Observable) -> bool:
    _check_dims(A, B)
    scale = max(np.max(np.abs(A.entries)), np.max(np.abs(B.entries)))
    comm = A.entries @ B.entries - B.entries @ A.entries
    return bool(np.max(np.abs(comm)) <= 1e-10 * scale**2)


def joint_weak_value(A: Observable, B: Observable, i: SystemState, f: SystemState,
                     overlap_floor: float = OVERLAP_FLOOR) -> WeakValue:
    """Weak value of the product ``AB`` of two commuting observables."""
    _check_dims(A, B, i, f)
    if not check_commuting(A, B):
        raise NonCommuting("joint weak values are only defined here for [A, B] = 0")
    return WeakValue(_postselected_ratio(A.entries @ B.entries, i, f, overlap_floor), order=2)


def simultaneous_eigenbasis(A: Observable, B: Observable, seed: int = 0,
                            attempts: int = 5) -> JointEigenSystem:
    """Common eigenbasis of commuting ``A`` and ``B``.

    ``A + c B`` is diagonalised for a generic real ``c``; a random ``c`` is
    redrawn when the result fails to diagonalise both operators.  Basis
    vectors are sorted by (alpha, beta).
    """
    _check_dims(A, B)
    if not check_commuting(A, B):
        raise NonCommuting("observables do not commute")
    rng = np.random.default_rng(seed)
    scale = max(np.max(np.abs(A.entries)), np.max(np.abs(B.entries)), 1.0)
    c = (np.sqrt(5) - 1) / 2
    for _ in range(attempts):
        _, V = np.linalg.eigh(A.entries + c * B.entries)
        alphas = np.einsum("jk,jl,lk->k", V.conj(), A.entries, V).real
        betas = np.einsum("jk,jl,lk->k", V.conj(), B.entries, V).real
        resid_a = np.max(np.abs(A.entries @ V - V * alphas))
        resid_b = np.max(np.abs(B.entries @ V - V * betas))
        if max(resid_a, resid_b) <= 1e-9 * scale:
            order = np.lexsort((np.round(betas, 9), np.round(alphas, 9)))
            vectors = tuple(SystemState(_frozen(_fix_phase(V[:, k]))) for k in order)
            return JointEigenSystem(_frozen_real(alphas[order]), _frozen_real(betas[order]),
                                    vectors)
        c = rng.uniform(0.1, 10.0)
    raise DegeneracyUnresolved(f"no splitting combination found in {attempts} attempts")


def identity(dim: int = 2) -> Observable:
    return make_observable(np.eye(dim))


# JSON interchange: {"re": [...], "im": [...]}, "im" optional.

def _from_json_parts(doc):
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise BadShape(f"'re' and 'im' shapes differ: {re.shape} vs {im.shape}")
    return re + 1j * im


def _read_doc(source):
    if isinstance(source, dict):
        return source
    return json.loads(Path(source).read_text(encoding="utf-8"))


def load_observable(source) -> Observable:
    """Read an observable from a JSON file path or an already parsed dict."""
    return make_observable(_from_json_parts(_read_doc(source)))


def load_state(source, normalize: bool = False) -> SystemState:
    return make_state(_from_json_parts(_read_doc(source)), normalize=normalize)


def to_json_parts(array) -> dict:
    array = np.asarray(array, dtype=complex)
    return {"re": array.real.tolist(), "im": array.imag.tolist()}
