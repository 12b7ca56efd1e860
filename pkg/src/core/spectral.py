"""
DGBO Spectral Core
Periodic grids, real fields and Fourier multipliers.

Conventions:
    - ``Grid.x`` holds the box-centered nodes x_j = -L/2 + j*dx, so x = 0
      sits at index n/2 and the mirror image of index j is (-j) mod n.
    - ``Grid.wavenumbers`` is in FFT storage order, 2*pi*fftfreq(n, dx).
    - ``Field.spectrum`` is the unnormalized ``numpy.fft.fft`` of the
      samples, so sum(u**2)*dx == (dx/n)*sum(|u_hat|**2).
    - Odd symbols (derivative, Hilbert, dispersion) vanish at the Nyquist
      index; even symbols keep it.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from src.config import get_config
from src.core.exceptions import (
    InvalidExponentError,
    InvalidGridError,
    InvalidInputError,
    ResourceError,
)

logger = logging.getLogger(__name__)

MIN_POINTS = 8

Number = Union[int, float]


@dataclass(frozen=True)
class Grid:
    """
    Uniform periodic grid on [-L/2, L/2).

    Attributes:
        n_points: Number of nodes (even, at least 8)
        length: Box length L
    """

    n_points: int
    length: float

    def __post_init__(self):
        n, length = self.n_points, self.length
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise InvalidGridError("n_points must be an integer", n, length)
        if n < MIN_POINTS or n % 2:
            raise InvalidGridError(f"n_points must be even and >= {MIN_POINTS}", n, length)
        if not np.isfinite(length) or length <= 0:
            raise InvalidGridError("length must be positive and finite", n, length)
        if n & (n - 1):
            logger.debug(f"Grid with n={n} is not a power of two")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    @property
    def center_index(self) -> int:
        return self.n_points // 2

    @cached_property
    def x(self) -> np.ndarray:
        nodes = -0.5 * self.length + self.dx * np.arange(self.n_points)
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        xi = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        xi.setflags(write=False)
        return xi

    @cached_property
    def mirror_index(self) -> np.ndarray:
        """Index map j -> (-j) mod n realizing x -> -x."""
        index = (-np.arange(self.n_points)) % self.n_points
        index.setflags(write=False)
        return index


def make_grid(n_points: int, length: float) -> Grid:
    """
    Construct a periodic grid.

    Args:
        n_points: Number of nodes, even and >= 8
        length: Box length, positive

    Returns:
        Grid instance

    Raises:
        InvalidGridError: If n_points is odd or too small, or length is not positive
    """
    return Grid(n_points, float(length))


@dataclass(frozen=True)
class ModelParams:
    """
    Dispersion exponent beta and nonlinearity power k.

    The equation is u_t - D^beta u_x + (u^(k+1))_x = 0.
    """

    beta: float
    k: int

    def __post_init__(self):
        if not np.isfinite(self.beta) or not 1.0 <= self.beta <= 2.0:
            raise InvalidExponentError("beta must lie in [1, 2]", self.beta)
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise InvalidInputError(f"k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "k", int(self.k))

    @property
    def sigma(self) -> float:
        """The exponent 2 + (k+2)(beta-1) shared by the norm identities."""
        return 2.0 + (self.k + 2) * (self.beta - 1.0)

    @property
    def critical_index(self) -> float:
        """Scaling-critical Sobolev index s_k = 1/2 - beta/k."""
        return 0.5 - self.beta / self.k

    @property
    def theorem_applies(self) -> bool:
        return self.k > 2.0 * self.beta

    @property
    def regime(self) -> str:
        """Mass regime: subcritical (k < 2beta), critical or supercritical."""
        if self.k > 2.0 * self.beta:
            return "supercritical"
        if self.k == 2.0 * self.beta:
            return "critical"
        return "subcritical"


@dataclass(frozen=True, eq=False)
class Field:
    """
    Real samples of a periodic function on a grid.

    Samples are copied and frozen on construction; the spectrum is computed
    lazily and cached.
    """

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        if np.iscomplexobj(self.samples):
            raise InvalidInputError("field samples must be real")
        values = np.array(self.samples, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise InvalidInputError(
                f"expected {self.grid.n_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("field samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "samples", values)

    @cached_property
    def spectrum(self) -> np.ndarray:
        coefficients = transform(self.samples)
        coefficients.setflags(write=False)
        return coefficients

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum: np.ndarray) -> "Field":
        return cls(grid, inverse_transform(spectrum))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(grid, func(np.asarray(grid.x)))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.n_points))

    def _check_grid(self, other: "Field") -> None:
        if other.grid != self.grid:
            raise InvalidInputError("fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check_grid(other)
        return Field(self.grid, self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        self._check_grid(other)
        return Field(self.grid, self.samples - other.samples)

    def __mul__(self, factor: Number) -> "Field":
        if isinstance(factor, Field):
            return NotImplemented
        return Field(self.grid, float(factor) * self.samples)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.samples)

    def __repr__(self) -> str:
        return f"Field(n={self.grid.n_points}, L={self.grid.length}, max={np.max(np.abs(self.samples)):.6g})"


# ---------------------------------------------------------------------------
# Transforms and symbols
# ---------------------------------------------------------------------------

def transform(samples: np.ndarray) -> np.ndarray:
    """Forward transform of real samples (unnormalized FFT)."""
    return np.fft.fft(np.asarray(samples, dtype=float))


def inverse_transform(spectrum: np.ndarray) -> np.ndarray:
    """Inverse transform; the real part is returned."""
    return np.fft.ifft(spectrum).real


def imaginary_residue(spectrum: np.ndarray) -> float:
    """Largest imaginary part produced by the inverse transform."""
    return float(np.max(np.abs(np.fft.ifft(spectrum).imag)))


def fractional_symbol(grid: Grid, s: float) -> np.ndarray:
    if s < 0 or not np.isfinite(s):
        raise InvalidExponentError("fractional order must be non-negative", s)
    return np.abs(grid.wavenumbers) ** s


def derivative_symbol(grid: Grid) -> np.ndarray:
    symbol = 1j * grid.wavenumbers
    symbol[grid.nyquist_index] = 0.0
    return symbol


def hilbert_symbol(grid: Grid) -> np.ndarray:
    symbol = -1j * np.sign(grid.wavenumbers)
    symbol[grid.nyquist_index] = 0.0
    return symbol


def dispersion_symbol(grid: Grid, beta: float) -> np.ndarray:
    """Symbol i*|xi|^beta*xi of the linear part D^beta d/dx."""
    xi = grid.wavenumbers
    symbol = 1j * np.abs(xi) ** beta * xi
    symbol[grid.nyquist_index] = 0.0
    return symbol


def apply_multiplier(f: Field, symbol: np.ndarray) -> Field:
    return Field.from_spectrum(f.grid, symbol * f.spectrum)


def fractional_derivative(f: Field, s: float) -> Field:
    """
    Apply D^s, the Fourier multiplier |xi|^s.

    Args:
        f: Input field
        s: Order, s >= 0

    Returns:
        D^s f on the same grid

    Raises:
        InvalidExponentError: If s < 0
    """
    return apply_multiplier(f, fractional_symbol(f.grid, s))


def hilbert_transform(f: Field) -> Field:
    """Apply the Hilbert transform, symbol -i*sgn(xi)."""
    return apply_multiplier(f, hilbert_symbol(f.grid))


def spatial_derivative(f: Field) -> Field:
    return apply_multiplier(f, derivative_symbol(f.grid))


def translate(f: Field, shift: float) -> Field:
    """Exact spectral translation x -> x - shift."""
    xi = f.grid.wavenumbers
    phase = np.exp(-1j * xi * shift)
    phase[f.grid.nyquist_index] = np.cos(xi[f.grid.nyquist_index] * shift)
    return apply_multiplier(f, phase)


# ---------------------------------------------------------------------------
# Dealiased powers
# ---------------------------------------------------------------------------

def padded_size(n_points: int, p: int) -> int:
    """Padded transform length (p+2)*n/2, strictly above the (p+1)*n/2 alias limit."""
    return (p + 2) * n_points // 2


def dealiased_power_spectrum(
    spectrum: np.ndarray,
    p: int,
    max_points: Optional[int] = None,
) -> np.ndarray:
    """
    Spectrum of the p-th power of a band-limited field, free of aliasing.

    The spectrum is zero-padded to (p+2)*n/2 points, the power is taken on
    the fine grid and the result is truncated back to n modes. A Nyquist
    coefficient is split evenly between +n/2 and -n/2 on the way up and the
    two aliases are summed on the way down.

    Args:
        spectrum: Unnormalized FFT of the field (length n, even)
        p: Integer power, p >= 1
        max_points: Sample cap; defaults to the configured limit

    Returns:
        Unnormalized FFT of the dealiased power

    Raises:
        InvalidExponentError: If p is not a positive integer
        ResourceError: If the padded size exceeds the cap
    """
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or p < 1:
        raise InvalidExponentError("power must be a positive integer", p)
    if p == 1:
        return np.array(spectrum, dtype=complex)

    n = len(spectrum)
    half = n // 2
    size = padded_size(n, p)
    limit = max_points if max_points is not None else get_config().max_padded_points
    if size > limit:
        raise ResourceError(f"padded transform for power {p} on {n} points", size, limit)

    padded = np.zeros(size, dtype=complex)
    padded[:half] = spectrum[:half]
    padded[size - half + 1:] = spectrum[half + 1:]
    padded[half] = 0.5 * spectrum[half]
    padded[size - half] = 0.5 * spectrum[half]

    fine = np.fft.ifft(padded).real * (size / n)
    powered = np.fft.fft(fine ** p) * (n / size)

    result = np.empty(n, dtype=complex)
    result[:half] = powered[:half]
    result[half + 1:] = powered[size - half + 1:]
    result[half] = powered[half] + powered[size - half]
    return result


def dealiased_power(f: Field, p: int, max_points: Optional[int] = None) -> Field:
    """
    Compute f**p without aliasing.

    Args:
        f: Input field
        p: Integer power, p >= 1
        max_points: Sample cap for the padded transform

    Returns:
        The dealiased power on f's grid

    Raises:
        InvalidExponentError: If p is not a positive integer
        ResourceError: If the padded size exceeds the cap
    """
    return Field.from_spectrum(f.grid, dealiased_power_spectrum(f.spectrum, p, max_points))


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def inner_product(f: Field, g: Field) -> float:
    return float(np.dot(f.samples, g.samples) * f.grid.dx)


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(f.samples ** 2) * f.grid.dx))


def spectral_energy(f: Field) -> float:
    """(dx/n)*sum(|u_hat|^2), equal to ||f||^2 by Parseval."""
    return float(np.sum(np.abs(f.spectrum) ** 2) * f.grid.dx / f.grid.n_points)


def sobolev_seminorm(f: Field, s: float) -> float:
    """
    Homogeneous seminorm ||D^s f||, computed spectrally.

    Raises:
        InvalidExponentError: If s < 0
    """
    weights = fractional_symbol(f.grid, 2.0 * s)
    total = np.sum(weights * np.abs(f.spectrum) ** 2) * f.grid.dx / f.grid.n_points
    return float(np.sqrt(total))


def lp_norm_pow(f: Field, p: Number, absolute: bool = False) -> float:
    """
    Quadrature of f**p (or |f|**p when absolute).

    Raises:
        InvalidExponentError: If p <= 0, or p is fractional without absolute=True
    """
    if not p > 0:
        raise InvalidExponentError("power must be positive", p)
    if absolute:
        values = np.abs(f.samples) ** p
    else:
        if float(p) != int(p):
            raise InvalidExponentError("signed powers need an integer exponent", p)
        values = f.samples ** int(p)
    return float(np.sum(values) * f.grid.dx)


def linf_norm(f: Field) -> float:
    return float(np.max(np.abs(f.samples)))


def random_smooth_field(
    grid: Grid,
    rng: np.random.Generator,
    max_mode: Optional[int] = None,
    amplitude: float = 1.0,
) -> Field:
    """
    Random real field band-limited to |mode| <= max_mode (default n/8).

    The result is scaled so that its maximum absolute value is ``amplitude``.
    """
    max_mode = grid.n_points // 8 if max_mode is None else int(max_mode)
    if not 1 <= max_mode < grid.n_points // 2:
        raise InvalidInputError(f"max_mode must lie in [1, {grid.n_points // 2 - 1}]")
    modes = np.arange(1, max_mode + 1)
    decay = 1.0 / (1.0 + modes / max(1.0, max_mode / 4.0)) ** 2
    coefficients = (rng.standard_normal(max_mode) + 1j * rng.standard_normal(max_mode)) * decay

    spectrum = np.zeros(grid.n_points, dtype=complex)
    spectrum[0] = rng.standard_normal() * grid.n_points * 0.25
    spectrum[modes] = coefficients * grid.n_points
    spectrum[-modes] = np.conj(coefficients) * grid.n_points
    samples = inverse_transform(spectrum)
    peak = np.max(np.abs(samples))
    return Field(grid, samples * (amplitude / peak))
