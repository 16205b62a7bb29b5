"""Encoding alphabets, mutually unbiased bases and superposition states."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .spectral import (
    LN2,
    FrequencyGrid,
    GridError,
    SpectralEnvelope,
    _check_shape_args,
    gaussian_profile,
    hermite_functions,
    hg_scale,
)


class AlphabetKind(str, Enum):
    TIME_BINS = "time_bins"
    HERMITE_GAUSS = "hermite_gauss"
    FREQUENCY_BINS = "frequency_bins"


# (kind, d) -> (fwhm, separation). Time bins in ps, everything else in THz.
TABLE1 = {
    (AlphabetKind.TIME_BINS, 3): (1.5, 3.5),
    (AlphabetKind.TIME_BINS, 5): (1.5, 5.0),
    (AlphabetKind.HERMITE_GAUSS, 3): (0.21, None),
    (AlphabetKind.HERMITE_GAUSS, 5): (0.14, None),
    (AlphabetKind.FREQUENCY_BINS, 3): (0.10, 0.20),
    (AlphabetKind.FREQUENCY_BINS, 5): (0.05, 0.10),
}

# frequency-bin parameters of the FFB rows; separation equals the channel spacing
TABLE1_FFB = {3: (0.30, 0.63), 5: (0.15, 0.50)}


class DimensionError(ValueError):
    """Dimension unsupported by the requested construction."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def require_odd_prime(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or not is_prime(int(d)) or d == 2:
        raise DimensionError(f"d must be an odd prime, got {d!r}")
    return int(d)


@dataclass(frozen=True)
class AlphabetSpec:
    """Parameters of a d-dimensional fundamental basis.

    ``fwhm`` and ``separation`` are in ps for time bins and THz otherwise;
    ``separation`` is unused for Hermite-Gauss modes. ``center`` is the
    spectral centre in THz.
    """

    kind: AlphabetKind
    dimension: int
    fwhm: float
    separation: float | None = None
    center: float = 0.0
    fwhm_convention: str = "intensity"

    def __post_init__(self):
        object.__setattr__(self, "kind", AlphabetKind(self.kind))
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise DimensionError(f"dimension must be an integer >= 2, got {self.dimension}")
        if not self.fwhm > 0:
            raise ValueError(f"fwhm must be positive, got {self.fwhm}")
        if self.kind is not AlphabetKind.HERMITE_GAUSS:
            if self.separation is None or not self.separation > 0:
                raise ValueError(f"{self.kind.value} needs a positive separation")
        if self.fwhm_convention not in ("intensity", "amplitude"):
            raise ValueError(f"unknown fwhm_convention {self.fwhm_convention!r}")

    @classmethod
    def table1(cls, kind, dimension: int, center: float = 0.0, ffb: bool = False) -> "AlphabetSpec":
        kind = AlphabetKind(kind)
        if ffb:
            if kind is not AlphabetKind.FREQUENCY_BINS:
                raise ValueError("FFB parameters exist only for frequency bins")
            fwhm, sep = TABLE1_FFB[dimension]
        else:
            fwhm, sep = TABLE1[(kind, dimension)]
        return cls(kind, dimension, fwhm, sep, center)

    def offsets(self) -> np.ndarray:
        """Bin positions relative to the centre, ``(j - (d-1)/2) * separation``."""
        return (np.arange(self.dimension) - 0.5 * (self.dimension - 1)) * (self.separation or 0.0)

    def spectral_fwhm(self) -> float:
        """Spectral intensity FWHM (THz) of a single mode envelope."""
        if self.kind is AlphabetKind.TIME_BINS:
            t_int = self.fwhm if self.fwhm_convention == "intensity" else self.fwhm / np.sqrt(2.0)
            return 2.0 * LN2 / (np.pi * t_int)
        return self.fwhm if self.fwhm_convention == "intensity" else self.fwhm / np.sqrt(2.0)


def _raw_modes(spec: AlphabetSpec, nu: np.ndarray) -> np.ndarray:
    """Unit-peak (unnormalized) fundamental modes, shape ``(len(nu), d)``."""
    nu = np.asarray(nu, dtype=float)
    d = spec.dimension
    if spec.kind is AlphabetKind.FREQUENCY_BINS:
        cols = [gaussian_profile(nu, spec.center + o, spec.fwhm, spec.fwhm_convention)
                for o in spec.offsets()]
        return np.stack(cols, axis=1).astype(complex)
    if spec.kind is AlphabetKind.TIME_BINS:
        env = gaussian_profile(nu, spec.center, spec.spectral_fwhm())
        cols = [env * np.exp(-2j * np.pi * (nu - spec.center) * t) for t in spec.offsets()]
        return np.stack(cols, axis=1)
    s = hg_scale(spec.fwhm, spec.fwhm_convention)
    return hermite_functions((nu - spec.center) / s, d - 1).T.astype(complex)


def _analytic_norm_sq(spec: AlphabetSpec, order: int) -> float:
    # integral of |raw mode|^2 over the real line
    if spec.kind is AlphabetKind.HERMITE_GAUSS:
        return hg_scale(spec.fwhm, spec.fwhm_convention)
    f = spec.spectral_fwhm() if spec.kind is AlphabetKind.TIME_BINS else spec.fwhm
    conv = "intensity" if spec.kind is AlphabetKind.TIME_BINS else spec.fwhm_convention
    c = 4.0 * LN2 if conv == "intensity" else 8.0 * LN2
    return f * np.sqrt(np.pi / c)


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """d orthonormal envelopes on a common grid.

    ``raw_overlap`` stores the largest off-diagonal overlap of the bare
    shapes before symmetric orthonormalization; ``transform`` maps the
    grid-normalized bare shapes onto the returned modes.
    """

    spec: AlphabetSpec
    grid: FrequencyGrid
    modes: tuple[SpectralEnvelope, ...]
    raw_norms: np.ndarray = field(repr=False)
    transform: np.ndarray = field(repr=False)
    raw_overlap: float = 0.0

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    def matrix(self) -> np.ndarray:
        """Modes as columns, shape ``(n_points, d)``."""
        return np.stack([m.amplitude for m in self.modes], axis=1)

    def evaluate(self, nu) -> np.ndarray:
        """Evaluate the modes at arbitrary frequencies, shape ``(len(nu), d)``."""
        return (_raw_modes(self.spec, nu) / self.raw_norms) @ self.transform

    def gram(self) -> np.ndarray:
        m = self.matrix()
        return m.conj().T @ m * self.grid.step


def fundamental_basis(
    spec: AlphabetSpec,
    grid: FrequencyGrid,
    orthonormalize: bool = True,
    max_raw_overlap: float = 0.25,
) -> ModeBasis:
    """Build the fundamental basis of ``spec`` on ``grid``.

    Bare Gaussian bins at the preset spacings overlap at the percent level, so
    by default the bare shapes are made exactly orthonormal with the
    symmetric (Loewdin) transform ``S^(-1/2)``, which changes each mode as
    little as possible. Bins whose bare overlap exceeds ``max_raw_overlap``
    are rejected as too close; with ``orthonormalize=False`` the limit is
    the 1e-3 field-orthogonality tolerance.
    """
    d = spec.dimension
    if spec.kind is AlphabetKind.FREQUENCY_BINS:
        for o in spec.offsets():
            _check_shape_args(grid, spec.center + o, spec.fwhm)
    else:
        _check_shape_args(grid, spec.center, spec.spectral_fwhm())
    raw = _raw_modes(spec, grid.nu)
    norms_sq = np.sum(np.abs(raw) ** 2, axis=0) * grid.step
    for j in range(d):
        frac = norms_sq[j] / _analytic_norm_sq(spec, j)
        if frac < 0.999:
            raise GridError(
                f"mode {j} of {spec.kind.value} has only {frac:.4%} of its norm inside the grid"
            )
    norms = np.sqrt(norms_sq)
    raw = raw / norms
    gram = raw.conj().T @ raw * grid.step
    off = np.abs(gram - np.diag(np.diag(gram)))
    overlap = float(off.max()) if d > 1 else 0.0
    limit = max_raw_overlap if orthonormalize else 1e-3
    if overlap > limit:
        raise ValueError(
            f"{spec.kind.value} modes overlap by {overlap:.3g} (> {limit:g}); "
            "bins too close for the chosen fwhm"
        )
    if orthonormalize:
        w, v = np.linalg.eigh(gram)
        transform = (v * w**-0.5) @ v.conj().T
    else:
        transform = np.eye(d, dtype=complex)
    modes = raw @ transform
    envs = tuple(SpectralEnvelope(grid, modes[:, j]) for j in range(d))
    return ModeBasis(spec, grid, envs, norms, transform, overlap)


@dataclass(frozen=True, eq=False)
class MubSet:
    """The d+1 mutually unbiased bases of an odd prime dimension.

    ``bases[b]`` is a ``d x d`` matrix whose rows are the basis vectors in
    fundamental-basis coordinates. Index 0 is the computational basis,
    index ``k`` in ``1..d-1`` the quadratic-phase bases and index ``d``
    the Fourier (linear-phase) basis.
    """

    dimension: int
    bases: np.ndarray = field(repr=False)

    def vector(self, basis: int, index: int) -> np.ndarray:
        return self.bases[basis, index]

    def __len__(self) -> int:
        return self.bases.shape[0]


def mub_bases(d: int) -> MubSet:
    """Weyl-Heisenberg MUBs: vector ``m`` of basis ``k`` is ``w^(k j^2 + m j)/sqrt(d)``."""
    d = require_odd_prime(d)
    j = np.arange(d)
    bases = np.empty((d + 1, d, d), dtype=complex)
    bases[0] = np.eye(d)
    for k in range(1, d + 1):
        # exponents mod d keep the phases exact for large d
        expo = (k * j[None, :] ** 2 + j[:, None] * j[None, :]) % d
        bases[k] = np.exp(2j * np.pi * expo / d) / np.sqrt(d)
    bases.flags.writeable = False
    return MubSet(d, bases)


def ffb_sortable_mubs(d: int) -> list[int]:
    """Basis indices reachable with a translation-invariant (FFB) pump.

    The computational basis and the quadratic bases ``k = 1..d-1``; the
    Fourier basis (index ``d``) would put every channel on the same vector.
    """
    d = require_odd_prime(d)
    return list(range(d))


def ffb_channel_vector(k: int, c: int, d: int) -> int:
    """Index of the MUB-``k`` vector that FFB channel ``c`` projects onto."""
    if k == 0:
        return c
    return (-2 * k * c) % d


def synthesize_state(basis: ModeBasis, coeffs) -> SpectralEnvelope:
    """Normalized envelope ``sum_j c_j mode_j``."""
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (basis.dimension,):
        raise ValueError(f"expected {basis.dimension} coefficients, got shape {c.shape}")
    if abs(np.vdot(c, c).real - 1.0) > 1e-10:
        raise ValueError("coefficients must be normalized (sum |c|^2 = 1)")
    return SpectralEnvelope(basis.grid, basis.matrix() @ c).normalized()


def superpose(basis: ModeBasis, coeffs) -> np.ndarray:
    """Raw linear combination of the modes, without normalization."""
    return basis.matrix() @ np.asarray(coeffs, dtype=complex)
