"""Uniform periodic grid with Fourier-based calculus for decaying profiles.

The real-line problem is truncated to a periodic box [-L, L). Profiles that
decay below round-off at the boundary can be treated as functions on the whole
line: the discrete transform then approximates the continuum Fourier integral,
and the rectangle-rule norm the continuum L2 norm.

Conventions:
    nodes        x_i = -L + i*h,  h = 2L/N,  i = 0..N-1
    wavenumbers  k_n = pi*n/L,    n = -N/2..N/2-1 (stored in FFT order)
    forward      c_n = h * sum_i f(x_i) exp(-i k_n x_i)   ~ integral of f e^{-ikx}
    inverse      f(x_i) = (1/2L) * sum_n c_n exp(i k_n x_i)
    Parseval     ||f||_2^2 = h * sum_i f_i^2 = sum_n |c_n|^2 / (2L)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import cumulative_trapezoid

from .errors import GridMismatchError

__all__ = [
    "SpectralGrid",
    "GridFunction",
    "Spectrum",
    "make_grid",
    "grid_function",
    "forward_transform",
    "inverse_transform",
    "l2_norm",
    "sup_norm",
    "sobolev22_norm",
    "inner_product",
    "project_even",
    "evenness_defect",
    "derivative",
    "antiderivative",
    "sample",
]

_PARITIES = ("even", "odd", "none")


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform grid on [-L, L) paired with its wavenumber lattice.

    The wavenumber lattice is symmetric about zero except for the single
    Nyquist entry at -pi*N/(2L).
    """

    half_length: float
    num_points: int

    def __post_init__(self) -> None:
        if not self.half_length > 0:
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        if self.num_points < 16 or self.num_points % 2 != 0:
            raise ValueError(
                f"num_points must be even and >= 16, got {self.num_points}"
            )

    @property
    def spacing(self) -> float:
        """Node distance h = 2L/N."""
        return 2.0 * self.half_length / self.num_points

    @cached_property
    def nodes(self) -> NDArray[np.float64]:
        x = -self.half_length + self.spacing * np.arange(self.num_points)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> NDArray[np.float64]:
        """k_n = pi*n/L in FFT order, matching ``np.fft.fft`` output."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.num_points, d=self.spacing)
        k.flags.writeable = False
        return k

    @cached_property
    def mode_numbers(self) -> NDArray[np.int64]:
        """Integer mode index n of each FFT bin (n = L*k_n/pi)."""
        n = np.fft.fftfreq(self.num_points, d=1.0 / self.num_points).astype(np.int64)
        n.flags.writeable = False
        return n

    @cached_property
    def _reflection(self) -> NDArray[np.int64]:
        # index map i -> (N - i) mod N, realizing x -> -x on the grid
        idx = np.arange(self.num_points)
        ref = (-idx) % self.num_points
        ref.flags.writeable = False
        return ref

    @cached_property
    def _phase(self) -> NDArray[np.float64]:
        # (-1)^n factor translating FFT output at x_0 = -L into the
        # continuum-integral convention
        p = np.where(self.mode_numbers % 2 == 0, 1.0, -1.0)
        p.flags.writeable = False
        return p

    def __repr__(self) -> str:
        return f"SpectralGrid(L={self.half_length:g}, N={self.num_points})"


def make_grid(half_length: float, num_points: int) -> SpectralGrid:
    """Construct a grid, rejecting odd or tiny point counts."""
    return SpectralGrid(float(half_length), int(num_points))


@dataclass
class GridFunction:
    """Real samples of a profile on a :class:`SpectralGrid`.

    ``parity_hint`` is advisory metadata: operations that require evenness
    verify it numerically instead of trusting the tag. Values are locked
    against mutation after construction.
    """

    grid: SpectralGrid
    values: NDArray[np.float64]
    parity_hint: str = "none"

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != (self.grid.num_points,):
            raise ValueError(
                f"expected {self.grid.num_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        if self.parity_hint not in _PARITIES:
            raise ValueError(f"parity_hint must be one of {_PARITIES}")
        values.flags.writeable = False
        self.values = values
        if self.parity_hint == "even":
            scale = max(1.0, float(np.max(np.abs(values))))
            defect = np.max(np.abs(values - values[self.grid._reflection]))
            if defect > 1e-12 * scale:
                raise ValueError(
                    f"parity_hint='even' but reflection defect {defect:.3e} "
                    f"exceeds 1e-12 * {scale:.3e}"
                )

    def reflected(self) -> NDArray[np.float64]:
        """Samples of x -> f(-x)."""
        return self.values[self.grid._reflection]

    def with_values(self, values: NDArray[np.float64], parity_hint: str = "none") -> "GridFunction":
        return GridFunction(self.grid, values, parity_hint)

    def _check_same_grid(self, other: "GridFunction") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(f"{self.grid} vs {other.grid}")

    @staticmethod
    def _combine_parity(a: str, b: str) -> str:
        return a if a == b else "none"

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        hint = self._combine_parity(self.parity_hint, other.parity_hint)
        return _derived(self.grid, self.values + other.values, hint)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        hint = self._combine_parity(self.parity_hint, other.parity_hint)
        return _derived(self.grid, self.values - other.values, hint)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            if self.parity_hint == other.parity_hint != "none":
                hint = "even"
            else:
                hint = "none"
            return _derived(self.grid, self.values * other.values, hint)
        return _derived(self.grid, self.values * float(other), self.parity_hint)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values, self.parity_hint)


def grid_function(grid: SpectralGrid, values, parity_hint: str = "none") -> GridFunction:
    """Convenience constructor accepting any array-like of samples."""
    return GridFunction(grid, np.asarray(values, dtype=float), parity_hint)


def _derived(grid: SpectralGrid, values: NDArray[np.float64], hint: str) -> GridFunction:
    """Construct an arithmetic result, degrading an even hint that round-off
    no longer supports (e.g. near-cancelling combinations). Explicitly claimed
    hints still fail loudly in the constructor."""
    if hint == "even":
        scale = max(1.0, float(np.max(np.abs(values))))
        defect = np.max(np.abs(values - values[grid._reflection]))
        if defect > 1e-12 * scale:
            hint = "none"
    return GridFunction(grid, values, hint)


@dataclass
class Spectrum:
    """Complex coefficients of a grid function under the integral convention.

    Coefficients are stored in FFT order alongside ``grid.wavenumbers``. A
    real-valued function yields conjugate-symmetric coefficients.
    """

    grid: SpectralGrid
    coefficients: NDArray[np.complex128]

    def __post_init__(self) -> None:
        coeff = np.array(self.coefficients, dtype=complex, copy=True)
        if coeff.shape != (self.grid.num_points,):
            raise ValueError(
                f"expected {self.grid.num_points} coefficients, got {coeff.shape}"
            )
        coeff.flags.writeable = False
        self.coefficients = coeff


def forward_transform(f: GridFunction) -> Spectrum:
    """Coefficients c_n = h * sum_i f_i exp(-i k_n x_i)."""
    grid = f.grid
    coeff = grid.spacing * grid._phase * np.fft.fft(f.values)
    return Spectrum(grid, coeff)


def inverse_transform(spectrum: Spectrum, parity_hint: str = "none") -> GridFunction:
    """Samples f_i = (1/2L) sum_n c_n exp(i k_n x_i); realness enforced."""
    grid = spectrum.grid
    values = np.fft.ifft(grid._phase * spectrum.coefficients).real / grid.spacing
    return GridFunction(grid, values, parity_hint)


def l2_norm(f: GridFunction) -> float:
    """Rectangle-rule L2 norm (h * sum f_i^2)^(1/2).

    Exact for trigonometric polynomials by Parseval; approximates the
    continuum norm for profiles decaying below 1e-12 at the boundary.
    """
    return float(np.sqrt(f.grid.spacing * np.sum(f.values**2)))


def sup_norm(f: GridFunction) -> float:
    """max_i |f_i|."""
    return float(np.max(np.abs(f.values)))


def inner_product(f: GridFunction, g: GridFunction) -> float:
    """Discrete L2 pairing h * sum_i f_i g_i."""
    f._check_same_grid(g)
    return float(f.grid.spacing * np.sum(f.values * g.values))


def sobolev22_norm(f: GridFunction) -> float:
    """Norm with spectral weight 1 + k^2 + k^4.

    Normalized so that weight 1 reproduces :func:`l2_norm`, matching the
    W^{2,2} norm of the continuum profile.
    """
    grid = f.grid
    coeff = np.fft.fft(f.values)
    k2 = grid.wavenumbers**2
    weight = 1.0 + k2 + k2**2
    # h^2/(2L) = h/N converts |fft|^2 sums to the continuum normalization
    total = np.sum(weight * np.abs(coeff) ** 2) * grid.spacing / grid.num_points
    return float(np.sqrt(total))


def project_even(f: GridFunction) -> GridFunction:
    """Even part (f(x) + f(-x))/2; idempotent and l2-nonexpansive."""
    values = 0.5 * (f.values + f.reflected())
    return GridFunction(f.grid, values, "even")


def evenness_defect(f: GridFunction) -> float:
    """Sup-norm of the odd part, |f(x) - f(-x)|/2."""
    return float(0.5 * np.max(np.abs(f.values - f.reflected())))


def derivative(f: GridFunction, order: int) -> GridFunction:
    """Spectral derivative of order 1..4; exact for band-limited inputs.

    The Nyquist mode is zeroed for odd orders, removing the asymmetric mode.
    """
    if order not in (1, 2, 3, 4):
        raise ValueError(f"derivative order must be in 1..4, got {order}")
    grid = f.grid
    multiplier = (1j * grid.wavenumbers) ** order
    if order % 2 == 1:
        multiplier = multiplier.copy()
        multiplier[grid.num_points // 2] = 0.0
    values = np.fft.ifft(multiplier * np.fft.fft(f.values)).real
    if f.parity_hint in ("even", "odd"):
        hint = f.parity_hint if order % 2 == 0 else ("odd" if f.parity_hint == "even" else "even")
    else:
        hint = "none"
    return _derived(grid, values, hint)


def antiderivative(f: GridFunction) -> GridFunction:
    """Cumulative trapezoid integral from x_0 = -L, so result(-L) = 0.

    Intended for lattice initial positions: when mean(f) != 0 the result is
    a non-periodic ramp on [-L, L) and must not be fed back into transforms.
    """
    values = cumulative_trapezoid(f.values, dx=f.grid.spacing, initial=0.0)
    return GridFunction(f.grid, values, "none")


def sample(f: GridFunction, points) -> NDArray[np.float64]:
    """Band-limited (trigonometric interpolant) evaluation at arbitrary points."""
    grid = f.grid
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    coeff = grid._phase * grid.spacing * np.fft.fft(f.values)
    phases = np.exp(1j * np.outer(pts, grid.wavenumbers))
    return (phases @ coeff).real / (2.0 * grid.half_length)
