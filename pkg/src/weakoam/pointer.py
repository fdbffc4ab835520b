"""Two-dimensional pointer wavefunctions on a uniform grid.

The pointer modes are p = 0 Laguerre-Gauss beams

    phi(x, y) = N (x + i sgn(l) y)**|l| exp(-(x**2 + y**2) / (4 sigma**2))

so ``|phi|**2`` has per-axis variance ``sigma**2`` for the Gaussian (l = 0).
Units: hbar = 1, lengths in the same units as ``sigma``.  Integrals use the
trapezoid rule; momentum operators act by FFT differentiation.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ExtentTooSmall, NotNormalized

EXTENT_SIGMAS = 6.0
NORMALIZED_TOL = 1e-6


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    OAM = "oam"


@dataclass(frozen=True)
class PointerSpec:
    family: Family
    l: int = 0
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.family is Family.GAUSSIAN and self.l != 0:
            raise ValueError("a Gaussian pointer has winding number l = 0")
        if self.family is Family.OAM and self.l == 0:
            raise ValueError("an OAM pointer needs a nonzero winding number")

    @classmethod
    def for_winding(cls, l: int, sigma: float = 1.0) -> "PointerSpec":
        """Gaussian for ``l == 0``, OAM mode otherwise."""
        family = Family.GAUSSIAN if l == 0 else Family.OAM
        return cls(family, int(l), float(sigma))


@dataclass(frozen=True)
class GridSpec:
    n: int = 256
    half_extent: float = 8.0

    def __post_init__(self):
        if self.n < 16 or self.n % 2:
            raise ValueError(f"grid needs an even number of points >= 16, got {self.n}")
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")

    @property
    def spacing(self) -> float:
        return 2 * self.half_extent / (self.n - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_extent, self.half_extent, self.n)

    def mesh(self):
        """(X, Y) arrays with ``X[j, k] = x_j`` and ``Y[j, k] = y_k``."""
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = self.spacing / 2
        return w

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    def to_dict(self) -> dict:
        return {"n": self.n, "half_extent": self.half_extent, "spacing": self.spacing}


def integrate(grid: GridSpec, integrand) -> complex:
    """Trapezoid-rule double integral of an n x n array."""
    w = grid.weights
    return complex(w @ integrand @ w)


@dataclass(frozen=True, eq=False)
class GridField:
    grid: GridSpec
    values: np.ndarray
    norm_hint: float

    @classmethod
    def from_values(cls, grid: GridSpec, values) -> "GridField":
        values = np.array(values, dtype=complex)
        if values.shape != (grid.n, grid.n):
            raise ValueError(f"values shape {values.shape} does not match grid n = {grid.n}")
        values.setflags(write=False)
        norm = integrate(grid, np.abs(values) ** 2).real
        return cls(grid, values, norm)

    def normalized(self) -> "GridField":
        if self.norm_hint <= 0:
            raise NotNormalized("cannot normalize a field with zero norm")
        return GridField.from_values(self.grid, self.values / math.sqrt(self.norm_hint))


def normalization_constant(l: int, sigma: float) -> float:
    """Analytic N such that the mode has unit L2 norm.

    With m = |l|, the radial integral gives
    ``int |phi|^2 = N^2 * pi * m! * (2 sigma^2)^(m + 1)``.
    """
    m = abs(int(l))
    return (math.pi * math.factorial(m) * (2 * sigma**2) ** (m + 1)) ** -0.5


def pointer_amplitude(spec: PointerSpec, x, y):
    """Normalized mode amplitude at ``(x, y)``; accepts scalars or arrays."""
    m = abs(spec.l)
    sign = int(np.sign(spec.l))
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    envelope = np.exp(-(x**2 + y**2) / (4 * spec.sigma**2))
    value = normalization_constant(spec.l, spec.sigma) * (x + 1j * sign * y) ** m * envelope
    return value if value.ndim else complex(value)


def required_extent(spec: PointerSpec, shift: float = 0.0) -> float:
    return EXTENT_SIGMAS * spec.sigma + abs(shift)


def sample(spec: PointerSpec, grid: GridSpec, shift=(0.0, 0.0)) -> GridField:
    """Sample the mode, translated by ``shift``, and renormalize by quadrature.

    The translation is applied by evaluating the analytic mode at
    ``(x - sx, y - sy)``, so no interpolation error enters.
    """
    sx, sy = shift
    need = required_extent(spec, max(abs(sx), abs(sy)))
    if grid.half_extent < need:
        raise ExtentTooSmall(
            f"grid half extent {grid.half_extent} < {need:.6g} "
            f"({EXTENT_SIGMAS:g} sigma plus shift {max(abs(sx), abs(sy)):.6g})"
        )
    X, Y = grid.mesh()
    return GridField.from_values(grid, pointer_amplitude(spec, X - sx, Y - sy)).normalized()


def _require_normalized(field: GridField):
    if abs(field.norm_hint - 1) > NORMALIZED_TOL:
        raise NotNormalized(f"field norm is {field.norm_hint!r}, expected 1")


def apply_position(values, grid: GridSpec, px: int = 0, py: int = 0):
    X, Y = grid.mesh()
    return values * X**px * Y**py


def apply_momentum(values, grid: GridSpec, axis: int, power: int = 1):
    """Apply ``P**power`` (P = -i d/dx_axis) by FFT along ``axis``."""
    if power == 0:
        return values
    k = grid.wavenumbers ** power
    if power % 2:
        k[grid.n // 2] = 0.0  # Nyquist mode has no odd derivative
    shape = [1, 1]
    shape[axis] = grid.n
    spectrum = np.fft.fft(values, axis=axis) * k.reshape(shape)
    return np.fft.ifft(spectrum, axis=axis)


def expectation(field: GridField, transformed) -> complex:
    """``<psi|O psi>`` given ``transformed = O psi`` on the same grid."""
    return integrate(field.grid, field.values.conj() * transformed)


def position_moment(field: GridField, px: int, py: int) -> complex:
    """``<x**px y**py>`` by trapezoid quadrature; the imaginary residue is kept."""
    _require_normalized(field)
    return expectation(field, apply_position(field.values, field.grid, px, py))


def momentum_moment(field: GridField, qx: int, qy: int) -> complex:
    """``<P_x**qx P_y**qy>`` with spectral derivatives, ``qx + qy <= 2``."""
    if qx < 0 or qy < 0 or qx + qy > 2:
        raise ValueError("momentum moments are limited to total order 2")
    _require_normalized(field)
    g = field.grid
    out = apply_momentum(apply_momentum(field.values, g, 1, qy), g, 0, qx)
    return expectation(field, out)


class MixedKind(str, enum.Enum):
    XPY = "XPy"
    YPX = "YPx"
    XPX = "XPx"
    YPY = "YPy"
    PXX = "PxX"
    PYY = "PyY"


def mixed_moment(field: GridField, kind) -> complex:
    """Position-momentum product in the operator order named by ``kind``.

    ``XPy`` is ``<psi| X P_y |psi>``: the momentum acts on the state first and
    the position multiplies the result.  ``PxX`` is the reversed ordering.
    """
    kind = MixedKind(kind)
    _require_normalized(field)
    g, v = field.grid, field.values
    if kind is MixedKind.XPY:
        out = apply_position(apply_momentum(v, g, 1), g, px=1)
    elif kind is MixedKind.YPX:
        out = apply_position(apply_momentum(v, g, 0), g, py=1)
    elif kind is MixedKind.XPX:
        out = apply_position(apply_momentum(v, g, 0), g, px=1)
    elif kind is MixedKind.YPY:
        out = apply_position(apply_momentum(v, g, 1), g, py=1)
    elif kind is MixedKind.PXX:
        out = apply_momentum(apply_position(v, g, px=1), g, 0)
    else:
        out = apply_momentum(apply_position(v, g, py=1), g, 1)
    return expectation(field, out)


def oam_expectation(field: GridField) -> float:
    """Orbital angular momentum ``<X P_y - Y P_x>`` in units of hbar."""
    lz = mixed_moment(field, MixedKind.XPY) - mixed_moment(field, MixedKind.YPX)
    return lz.real


def write_field_csv(field: GridField, path, metadata: dict | None = None) -> Path:
    """Write ``x,y,re,im`` rows (x outer, y inner) plus a JSON sidecar.

    Returns the sidecar path, which is ``path`` with a ``.json`` suffix.
    """
    path = Path(path)
    axis = field.grid.axis
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "re", "im"])
        for j, xj in enumerate(axis):
            row_vals = field.values[j]
            for k, yk in enumerate(axis):
                z = row_vals[k]
                writer.writerow([f"{xj:.17g}", f"{yk:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])
    sidecar = path.with_suffix(".json")
    doc = {"grid": field.grid.to_dict(), "norm": field.norm_hint}
    if metadata:
        doc.update(metadata)
    sidecar.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def read_field_csv(path) -> GridField:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    grid = GridSpec(meta["grid"]["n"], meta["grid"]["half_extent"])
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    values = (data[:, 2] + 1j * data[:, 3]).reshape(grid.n, grid.n)
    return GridField.from_values(grid, values)
