"""Periodic grid, discrete transforms, fractional Laplacians, and quadrature.

All fields live on an N x N uniform grid over a square periodic domain of
edge length L.  Differentiation is done by multiplying Fourier coefficients
with the appropriate wavenumber symbol; integration is the composite
trapezoidal rule, which on a periodic grid is just ``h**2 * sum``.

The transform normalization is chosen so coefficients approximate the
continuum Fourier integral: ``what(r) = h^2 * sum_s w(x_s) exp(-2*pi*i*r.x_s/L)``.
A constant field c therefore has ``what(0,0) = c*L**2``.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid2D",
    "PeriodicField",
    "SpectralField",
    "SpectralOps",
    "FftCounter",
    "GridMismatchError",
    "NonZeroMeanError",
    "SpectralSymmetryError",
]


class GridMismatchError(ValueError):
    """Raised when fields defined on different grids are combined."""


class NonZeroMeanError(ValueError):
    """Raised when an operation requiring a mean-zero field receives one that is not."""


class SpectralSymmetryError(ValueError):
    """Raised when an inverse transform of a supposedly real field has a large imaginary part."""


@dataclass(frozen=True)
class Grid2D:
    """Square periodic grid: N nodes per edge on a domain of edge length L.

    ``origin`` shifts the node coordinates (0 for a [0,L]^2 domain,
    -L/2 for [-L/2,L/2]^2).  It only matters when evaluating functions of
    physical position; transforms never see it.
    """

    L: float
    N: int
    origin: float = 0.0

    def __post_init__(self) -> None:
        if self.N <= 0:
            raise ValueError(f"grid resolution must be positive, got N={self.N}")
        if self.L <= 0:
            raise ValueError(f"domain length must be positive, got L={self.L}")

    @property
    def h(self) -> float:
        """Grid spacing L/N (always derived, never stored)."""
        return self.L / self.N

    def nodes(self) -> np.ndarray:
        """1-D physical node coordinates origin + h*m, m = 0..N-1."""
        return self.origin + self.h * np.arange(self.N)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) coordinate arrays; first index is x, second is y."""
        x = self.nodes()
        return np.meshgrid(x, x, indexing="ij")

    def node_index(self, x: float, y: float, tol_frac: float = 0.01) -> tuple[int, int]:
        """Indices of the grid node at physical position (x, y).

        The position must land on a node within ``tol_frac * h`` (periodic
        wrap-around allowed).
        """
        ix = self._snap(x, tol_frac)
        iy = self._snap(y, tol_frac)
        return ix, iy

    def _snap(self, coord: float, tol_frac: float) -> int:
        raw = (coord - self.origin) / self.h
        idx = int(round(raw))
        if abs(raw - idx) > tol_frac:
            raise ValueError(
                f"coordinate {coord} is {abs(raw - idx):.3g} cells away from the "
                f"nearest grid node (tolerance {tol_frac} cells)"
            )
        return idx % self.N


@dataclass
class PeriodicField:
    """Real grid function; one value per periodic equivalence class.

    Supports field/field and field/scalar arithmetic.  Combining fields from
    different grids raises :class:`GridMismatchError`.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.N, self.grid.N):
            raise ValueError(
                f"field shape {vals.shape} does not match grid N={self.grid.N}"
            )
        self.values = vals

    def _check(self, other: "PeriodicField") -> None:
        if other.grid != self.grid:
            raise GridMismatchError(
                f"cannot combine fields on {self.grid} and {other.grid}"
            )

    def copy(self) -> "PeriodicField":
        return PeriodicField(self.grid, self.values.copy())

    def __add__(self, other):
        if isinstance(other, PeriodicField):
            self._check(other)
            return PeriodicField(self.grid, self.values + other.values)
        return PeriodicField(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PeriodicField):
            self._check(other)
            return PeriodicField(self.grid, self.values - other.values)
        return PeriodicField(self.grid, self.values - other)

    def __rsub__(self, other):
        return PeriodicField(self.grid, other - self.values)

    def __mul__(self, other):
        if isinstance(other, PeriodicField):
            self._check(other)
            return PeriodicField(self.grid, self.values * other.values)
        return PeriodicField(self.grid, self.values * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PeriodicField):
            self._check(other)
            return PeriodicField(self.grid, self.values / other.values)
        return PeriodicField(self.grid, self.values / other)

    def __neg__(self):
        return PeriodicField(self.grid, -self.values)

    def __pow__(self, exponent):
        return PeriodicField(self.grid, self.values**exponent)


@dataclass
class SpectralField:
    """Complex Fourier coefficients in standard FFT ordering."""

    grid: Grid2D
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape != (self.grid.N, self.grid.N):
            raise ValueError(
                f"coefficient shape {coeffs.shape} does not match grid N={self.grid.N}"
            )
        self.coeffs = coeffs


class FftCounter:
    """Thread-safe tally of forward/inverse transforms.

    Diagnostics that should not show up in cost accounting can run inside
    the :meth:`paused` context.
    """

    def __init__(self) -> None:
        self._count = 0
        self._lock = threading.Lock()
        self._paused = 0

    def increment(self, n: int = 1) -> None:
        with self._lock:
            if not self._paused:
                self._count += n

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0

    @contextmanager
    def paused(self):
        with self._lock:
            self._paused += 1
        try:
            yield
        finally:
            with self._lock:
                self._paused -= 1


class SpectralOps:
    """Wavenumber tables and transform-based calculus for one grid.

    Immutable after construction except for the transform tally.  Integer
    wavenumbers run over {-N/2, ..., N/2-1} for even N and {-K, ..., K} for
    odd N = 2K+1 (standard FFT ordering).  First-derivative multipliers zero
    the Nyquist mode so derivatives of real fields stay real; all even
    symbols (|r|^2 powers) keep it.
    """

    def __init__(self, grid: Grid2D) -> None:
        self.grid = grid
        N, L = grid.N, grid.L
        r = np.fft.fftfreq(N, d=1.0 / N)  # integer wavenumbers
        r1, r2 = np.meshgrid(r, r, indexing="ij")
        scale = 2.0 * np.pi / L
        self.k2 = (scale**2) * (r1**2 + r2**2)
        # first-derivative multipliers, Nyquist zeroed for even N
        rd = r.copy()
        if N % 2 == 0:
            rd[N // 2] = 0.0
        rd1, rd2 = np.meshgrid(rd, rd, indexing="ij")
        self.kx = scale * rd1
        self.ky = scale * rd2
        self.fft_counter = FftCounter()
        # k^-2 with the zero mode masked out, used by the inverse Laplacian
        with np.errstate(divide="ignore"):
            inv = np.where(self.k2 > 0.0, 1.0 / np.where(self.k2 > 0.0, self.k2, 1.0), 0.0)
        self._k2_inv = inv

    # -- constructors -------------------------------------------------

    def field(self, values: np.ndarray) -> PeriodicField:
        return PeriodicField(self.grid, values)

    def constant(self, c: float) -> PeriodicField:
        return PeriodicField(self.grid, np.full((self.grid.N, self.grid.N), float(c)))

    def zeros(self) -> PeriodicField:
        return PeriodicField(self.grid, np.zeros((self.grid.N, self.grid.N)))

    def from_function(self, f) -> PeriodicField:
        """Sample ``f(X, Y)`` at the physical node coordinates (origin applied)."""
        X, Y = self.grid.meshgrid()
        return PeriodicField(self.grid, np.asarray(f(X, Y), dtype=np.float64))

    # -- transforms ---------------------------------------------------

    def dft(self, v: PeriodicField) -> SpectralField:
        """Forward transform; counts as one tally unit."""
        self._check_grid(v)
        self.fft_counter.increment()
        h = self.grid.h
        return SpectralField(self.grid, (h * h) * np.fft.fft2(v.values))

    def idft(self, w: SpectralField, symmetry_tol: float = 1e-10) -> PeriodicField:
        """Inverse transform to a real field; counts as one tally unit.

        Raises :class:`SpectralSymmetryError` if the imaginary residue exceeds
        ``symmetry_tol`` relative to the field magnitude.
        """
        self._check_grid(w)
        self.fft_counter.increment()
        h = self.grid.h
        out = np.fft.ifft2(w.coeffs) / (h * h)
        scale = np.abs(w.coeffs).max() / (self.grid.L**2)
        if scale > 0.0:
            residue = np.abs(out.imag).max()
            if residue > symmetry_tol * scale:
                raise SpectralSymmetryError(
                    f"imaginary residue {residue:.3e} exceeds {symmetry_tol:.1e} "
                    f"of field scale {scale:.3e}; spectrum is not conjugate-symmetric"
                )
        return PeriodicField(self.grid, out.real)

    # -- calculus -----------------------------------------------------

    def frac_laplacian(self, v: PeriodicField, alpha: int) -> PeriodicField:
        """Apply (-Laplacian)^alpha for alpha in {-1, 1, 2}.

        alpha = -1 requires a mean-zero input; the zero mode is dropped.
        Sign convention: ``laplacian(v) == -frac_laplacian(v, 1)``.
        """
        if alpha not in (-1, 1, 2):
            raise ValueError(f"alpha must be -1, 1 or 2, got {alpha}")
        self._check_grid(v)
        if alpha == -1:
            self._require_mean_zero(v, tol=1e-12)
            symbol = self._k2_inv
        elif alpha == 1:
            symbol = self.k2
        else:
            symbol = self.k2 * self.k2
        w = self.dft(v)
        w.coeffs *= symbol
        return self.idft(w)

    def laplacian(self, v: PeriodicField) -> PeriodicField:
        """Discrete Laplacian (negative of ``frac_laplacian(v, 1)``)."""
        self._check_grid(v)
        w = self.dft(v)
        w.coeffs *= -self.k2
        return self.idft(w)

    def biharmonic(self, v: PeriodicField) -> PeriodicField:
        """Discrete Laplacian squared (equals ``frac_laplacian(v, 2)``)."""
        return self.frac_laplacian(v, 2)

    def gradient_sq(self, v: PeriodicField) -> PeriodicField:
        """Pointwise |grad v|^2 via spectral first derivatives."""
        self._check_grid(v)
        w = self.dft(v)
        dx = self.idft(SpectralField(self.grid, 1j * self.kx * w.coeffs))
        dy = self.idft(SpectralField(self.grid, 1j * self.ky * w.coeffs))
        return PeriodicField(self.grid, dx.values**2 + dy.values**2)

    def gradient_sq_integral(self, v: PeriodicField) -> float:
        """Integral of |grad v|^2 evaluated as a spectral sum.

        Unlike integrating :meth:`gradient_sq`, this keeps the Nyquist
        content on even grids (the full |k|^2 symbol), which makes energies
        built from it exact antiderivatives of their chemical potentials.
        The two agree to round-off on fields without Nyquist content.
        """
        self._check_grid(v)
        w = self.dft(v)
        total = float(np.sum(self.k2 * (w.coeffs.real**2 + w.coeffs.imag**2)))
        return total / (self.grid.L**2)

    # -- quadrature and norms ------------------------------------------

    def inner(self, u: PeriodicField, v: PeriodicField) -> float:
        """Discrete L2 inner product h^2 * sum(u * v)."""
        self._check_grid(u)
        self._check_grid(v)
        h = self.grid.h
        return float(h * h * np.sum(u.values * v.values))

    def integral(self, v: PeriodicField) -> float:
        self._check_grid(v)
        h = self.grid.h
        return float(h * h * np.sum(v.values))

    def mean(self, v: PeriodicField) -> float:
        self._check_grid(v)
        return float(v.values.mean())

    def norm_l2(self, v: PeriodicField) -> float:
        return float(np.sqrt(max(self.inner(v, v), 0.0)))

    def norm_inf(self, v: PeriodicField) -> float:
        self._check_grid(v)
        return float(np.abs(v.values).max())

    def neg_norm(self, v: PeriodicField) -> float:
        """Norm induced by the inverse Laplacian; requires mean-zero input."""
        self._require_mean_zero(v, tol=1e-12)
        val = self.inner(self.frac_laplacian(v, -1), v)
        return float(np.sqrt(max(val, 0.0)))

    def mean_zero(self, v: PeriodicField) -> PeriodicField:
        """Project out the mean; idempotent."""
        self._check_grid(v)
        return PeriodicField(self.grid, v.values - v.values.mean())

    # -- internals -----------------------------------------------------

    def _check_grid(self, v) -> None:
        if v.grid != self.grid:
            raise GridMismatchError(f"field grid {v.grid} does not match ops grid {self.grid}")

    def _require_mean_zero(self, v: PeriodicField, tol: float) -> None:
        scale = np.abs(v.values).max()
        if scale == 0.0:
            return
        m = abs(v.values.mean())
        if m > tol * scale:
            raise NonZeroMeanError(
                f"field mean {m:.3e} exceeds {tol:.1e} of max magnitude {scale:.3e}"
            )
