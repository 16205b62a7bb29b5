"""Uniform frequency/time grids, complex envelopes and shape generators.

Frequencies are in THz and times in ps, so ``1/THz = ps`` and transforms
need no unit factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

LN2 = np.log(2.0)

#: Minimum number of grid spacings per FWHM before a shape is rejected.
MIN_POINTS_PER_FWHM = 4.0


def _sinc_fwhm_ratio() -> float:
    # sinc^2(pi x / w) = 1/2 at x = fwhm/2  ->  fwhm / w
    u = brentq(lambda u: np.sin(u) / u - np.sqrt(0.5), 0.1, 3.0, xtol=1e-15)
    return 2.0 * u / np.pi


#: Ratio between the intensity FWHM of sinc(pi x / w) and its first zero w.
SINC_FWHM_RATIO = _sinc_fwhm_ratio()


class GridError(ValueError):
    """Grid construction or grid compatibility failure."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid covering ``[center - span/2, center + span/2]`` in THz."""

    center: float
    span: float
    n_points: int

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)) or self.n_points < 2:
            raise GridError(f"n_points must be an integer >= 2, got {self.n_points!r}")
        if not _is_power_of_two(int(self.n_points)):
            raise GridError(f"n_points must be a power of two, got {self.n_points}")
        if not np.isfinite(self.span) or self.span <= 0:
            raise GridError(f"span must be positive, got {self.span}")
        if not np.isfinite(self.center):
            raise GridError("center must be finite")

    @property
    def step(self) -> float:
        return self.span / (self.n_points - 1)

    @property
    def start(self) -> float:
        return self.center - 0.5 * self.span

    @property
    def stop(self) -> float:
        return self.center + 0.5 * self.span

    @cached_property
    def nu(self) -> np.ndarray:
        v = self.start + self.step * np.arange(self.n_points)
        v.flags.writeable = False
        return v

    def contains(self, frequency: float, margin: float = 0.0) -> bool:
        return self.start + margin <= frequency <= self.stop - margin

    def time_axis(self) -> np.ndarray:
        """Time samples (ps) conjugate to this grid, centred on zero."""
        dt = 1.0 / (self.n_points * self.step)
        return (np.arange(self.n_points) - self.n_points // 2) * dt


def make_grid(center: float, span: float, n_points: int) -> FrequencyGrid:
    """Build a uniform frequency grid; see :class:`FrequencyGrid`."""
    return FrequencyGrid(float(center), float(span), int(n_points))


@dataclass(frozen=True)
class TimeGrid:
    """Time axis conjugate to a :class:`FrequencyGrid`."""

    spectral: FrequencyGrid

    @property
    def n_points(self) -> int:
        return self.spectral.n_points

    @property
    def step(self) -> float:
        return 1.0 / (self.spectral.n_points * self.spectral.step)

    @cached_property
    def t(self) -> np.ndarray:
        v = self.spectral.time_axis()
        v.flags.writeable = False
        return v


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SpectralEnvelope:
    """Complex amplitude sampled on a :class:`FrequencyGrid`."""

    grid: FrequencyGrid
    amplitude: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = _frozen(self.amplitude)
        if amp.shape != (self.grid.n_points,):
            raise GridError(
                f"amplitude has shape {amp.shape}, grid has {self.grid.n_points} points"
            )
        if not np.all(np.isfinite(amp)):
            raise ValueError("envelope amplitude contains NaN or Inf")
        object.__setattr__(self, "amplitude", amp)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def norm(self) -> float:
        """L2 norm, rectangle rule on the grid."""
        return float(np.sqrt(np.sum(self.intensity) * self.grid.step))

    def normalized(self) -> "SpectralEnvelope":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero envelope")
        return SpectralEnvelope(self.grid, self.amplitude / n)

    def scaled(self, factor: complex) -> "SpectralEnvelope":
        return SpectralEnvelope(self.grid, self.amplitude * factor)

    def __add__(self, other: "SpectralEnvelope") -> "SpectralEnvelope":
        _check_same_grid(self.grid, other.grid)
        return SpectralEnvelope(self.grid, self.amplitude + other.amplitude)


@dataclass(frozen=True, eq=False)
class TimeEnvelope:
    """Complex temporal amplitude on the grid conjugate to ``grid``."""

    grid: TimeGrid
    amplitude: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = _frozen(self.amplitude)
        if amp.shape != (self.grid.n_points,):
            raise GridError("amplitude does not match time grid")
        object.__setattr__(self, "amplitude", amp)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.intensity) * self.grid.step))


def _check_same_grid(a: FrequencyGrid, b: FrequencyGrid) -> None:
    if a != b:
        raise GridError(f"grid mismatch: {a} vs {b}")


def _check_shape_args(grid: FrequencyGrid, center: float, fwhm: float) -> None:
    if not fwhm > 0:
        raise ValueError(f"fwhm must be positive, got {fwhm}")
    if not grid.contains(center):
        raise GridError(
            f"center {center} THz outside grid [{grid.start}, {grid.stop}]"
        )
    if fwhm < MIN_POINTS_PER_FWHM * grid.step:
        raise GridError(
            f"fwhm {fwhm} THz is undersampled: needs >= {MIN_POINTS_PER_FWHM:g} "
            f"grid spacings ({MIN_POINTS_PER_FWHM * grid.step:.3g} THz)"
        )


def gaussian_profile(nu, center: float, fwhm: float, convention: str = "intensity"):
    """Unit-peak Gaussian amplitude evaluated at arbitrary frequencies.

    ``convention`` says whether ``fwhm`` is measured on ``|a|^2``
    ("intensity") or on ``|a|`` ("amplitude").
    """
    if convention == "intensity":
        c = 2.0 * LN2
    elif convention == "amplitude":
        c = 4.0 * LN2
    else:
        raise ValueError(f"unknown FWHM convention {convention!r}")
    x = (np.asarray(nu, dtype=float) - center) / fwhm
    return np.exp(-c * x * x)


def gaussian_envelope(
    grid: FrequencyGrid, center: float, fwhm: float, convention: str = "intensity"
) -> SpectralEnvelope:
    """Normalized Gaussian envelope ``a ~ exp(-(nu-center)^2 / (4 sigma^2))``."""
    _check_shape_args(grid, center, fwhm)
    return SpectralEnvelope(grid, gaussian_profile(grid.nu, center, fwhm, convention)).normalized()


def hermite_functions(x: np.ndarray, max_order: int) -> np.ndarray:
    """Orthonormal Hermite functions ``psi_0..psi_max_order`` at ``x``.

    Uses the three-term recurrence, which stays stable for large orders
    where explicit polynomials overflow.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((max_order + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if max_order >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(2, max_order + 1):
        out[n] = np.sqrt(2.0 / n) * x * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def hg_scale(fwhm0: float, convention: str = "intensity") -> float:
    """Width ``s`` such that HG0 ``exp(-x^2/2)``, ``x=(nu-c)/s``, has the given FWHM."""
    if convention == "intensity":
        return fwhm0 / (2.0 * np.sqrt(LN2))
    if convention == "amplitude":
        return fwhm0 / (2.0 * np.sqrt(2.0 * LN2))
    raise ValueError(f"unknown FWHM convention {convention!r}")


def hg_envelope(
    grid: FrequencyGrid,
    center: float,
    fwhm0: float,
    order: int,
    convention: str = "intensity",
) -> SpectralEnvelope:
    """Normalized Hermite-Gauss mode of the given order.

    Raises :class:`GridError` if less than 99.9% of the mode's norm lies
    inside the grid.
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    _check_shape_args(grid, center, fwhm0)
    s = hg_scale(fwhm0, convention)
    psi = hermite_functions((grid.nu - center) / s, order)[order]
    # analytic norm of psi over nu is s
    in_grid = np.sum(psi**2) * grid.step / s
    if in_grid < 0.999:
        raise GridError(
            f"HG{order} mode only has {in_grid:.4%} of its norm inside the grid"
        )
    return SpectralEnvelope(grid, psi).normalized()


def sinc_profile(nu, center: float, fwhm: float):
    """Unit-peak ``sinc(pi (nu-center)/w)`` with intensity FWHM ``fwhm``."""
    w = fwhm / SINC_FWHM_RATIO
    return np.sinc((np.asarray(nu, dtype=float) - center) / w)


def sinc_peak(grid: FrequencyGrid, center: float, fwhm: float) -> SpectralEnvelope:
    """Unnormalized sinc peak with value 1 at ``center``."""
    _check_shape_args(grid, center, fwhm)
    return SpectralEnvelope(grid, sinc_profile(grid.nu, center, fwhm))


def gaussian_peak(grid: FrequencyGrid, center: float, fwhm: float) -> SpectralEnvelope:
    """Unnormalized Gaussian peak with value 1 at ``center`` (intensity FWHM)."""
    _check_shape_args(grid, center, fwhm)
    return SpectralEnvelope(grid, gaussian_profile(grid.nu, center, fwhm))


def inner_product(a: SpectralEnvelope, b: SpectralEnvelope) -> complex:
    """``<a|b> = sum conj(a_i) b_i dnu``."""
    _check_same_grid(a.grid, b.grid)
    return complex(np.vdot(a.amplitude, b.amplitude) * a.grid.step)


def _phases(n: int):
    k = np.arange(n)
    # grid offsets from the centre are (k - (n-1)/2); time index offsets (k - n/2)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    post = np.exp(-1j * np.pi * (n - 1) * (k - n // 2) / n)
    return sign, post


def to_time_domain(e: SpectralEnvelope) -> TimeEnvelope:
    """Unitary transform ``E(t) = int A(nu) exp(2 pi i (nu - nu_c) t) dnu``.

    ``nu_c`` is the grid centre; a spectral phase ``exp(-2 pi i nu t0)``
    therefore shifts the pulse to ``+t0``.
    """
    grid = e.grid
    n = grid.n_points
    sign, post = _phases(n)
    spec = np.fft.ifft(e.amplitude * sign) * n
    amp = post * spec * grid.step
    return TimeEnvelope(TimeGrid(grid), amp)


def to_frequency_domain(e: TimeEnvelope) -> SpectralEnvelope:
    """Inverse of :func:`to_time_domain`."""
    grid = e.grid.spectral
    n = grid.n_points
    sign, post = _phases(n)
    spec = np.fft.fft(e.amplitude / post) / (n * grid.step)
    return SpectralEnvelope(grid, spec * sign)


def linear_phase(grid: FrequencyGrid, delay: float) -> np.ndarray:
    """Spectral phase ``exp(-2 pi i (nu - nu_c) delay)`` for a delay in ps."""
    return np.exp(-2j * np.pi * (grid.nu - grid.center) * delay)
