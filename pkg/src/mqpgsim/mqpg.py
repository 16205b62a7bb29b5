"""Transfer-function model of the multi-output quantum pulse gate.

A channel ``c`` maps an input amplitude ``xi(nu_in)`` to the output
amplitude ``A_c(nu_out) = Phi_c(nu_out) * int alpha(nu_out - nu_in) xi(nu_in) dnu_in``
(first-order, undepleted sum-frequency generation). All channels share the
pump term, so kernels store one pump matrix and a per-channel
phase-matching row weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .alphabets import (
    AlphabetKind,
    ModeBasis,
    ffb_channel_vector,
    ffb_sortable_mubs,
    mub_bases,
    require_odd_prime,
)
from .spectral import (
    FrequencyGrid,
    GridError,
    SpectralEnvelope,
    gaussian_profile,
    sinc_profile,
)


class PMShape(str, Enum):
    SINC = "sinc"
    GAUSSIAN = "gaussian"


class Layout(str, Enum):
    STANDARD = "standard"
    FFB = "ffb"


class PumpError(ValueError):
    """A requested pump cannot be realized on the device."""


@dataclass(frozen=True)
class DeviceSpec:
    """Static description of the waveguide and pump source.

    ``channel_centers`` are output frequencies in THz. ``pump_bandwidth_limit``
    bounds the half-maximum extent of any compiled pump.
    """

    channel_centers: tuple[float, ...]
    pm_fwhm: float = 0.03
    pm_shape: PMShape = PMShape.SINC
    pump_bandwidth_limit: float = 4.5
    input_center: float = 194.0
    pump_center: float = 348.6
    relative_delay: float = 0.0
    allow_channel_overlap: bool = False

    def __post_init__(self):
        centers = tuple(float(c) for c in self.channel_centers)
        object.__setattr__(self, "channel_centers", centers)
        object.__setattr__(self, "pm_shape", PMShape(self.pm_shape))
        if len(centers) < 1:
            raise ValueError("device needs at least one channel")
        if not self.pm_fwhm > 0:
            raise ValueError(f"pm_fwhm must be positive, got {self.pm_fwhm}")
        if not self.pump_bandwidth_limit > 0:
            raise ValueError("pump_bandwidth_limit must be positive")
        if len(centers) > 1:
            gaps = np.diff(centers)
            if np.any(gaps <= 0):
                raise ValueError("channel centers must be strictly increasing")
            if np.ptp(gaps) > 1e-9 * max(1.0, gaps.mean()):
                raise ValueError("channel spacing must be uniform")
            if not self.allow_channel_overlap and gaps[0] <= 3 * self.pm_fwhm:
                raise ValueError(
                    f"channel spacing {gaps[0]:.4g} THz must exceed 3 * pm_fwhm "
                    f"({3 * self.pm_fwhm:.4g} THz)"
                )

    @classmethod
    def uniform(cls, n_channels: int, spacing: float, input_center: float = 194.0,
                pump_center: float = 348.6, **kwargs) -> "DeviceSpec":
        """Channels centred on ``input_center + pump_center``."""
        out = input_center + pump_center
        centers = out + (np.arange(n_channels) - 0.5 * (n_channels - 1)) * spacing
        return cls(tuple(centers), input_center=input_center, pump_center=pump_center, **kwargs)

    @property
    def n_channels(self) -> int:
        return len(self.channel_centers)

    @property
    def spacing(self) -> float:
        if self.n_channels < 2:
            return np.inf
        return self.channel_centers[1] - self.channel_centers[0]

    def active_channels(self, d: int) -> np.ndarray:
        """Centres of the ``d`` central channels used for a d-dim alphabet."""
        if d > self.n_channels:
            raise ValueError(f"alphabet dimension {d} exceeds {self.n_channels} device channels")
        start = (self.n_channels - d) // 2
        return np.array(self.channel_centers[start:start + d])

    def peak(self, nu, center: float) -> np.ndarray:
        if self.pm_shape is PMShape.SINC:
            return sinc_profile(nu, center, self.pm_fwhm)
        return gaussian_profile(nu, center, self.pm_fwhm)


@dataclass(frozen=True, eq=False)
class PumpSpectrum:
    """Compiled pump plus the modes each channel is meant to project onto.

    ``targets[c]`` holds the fundamental-basis coefficients of channel
    ``c``'s intended mode.
    """

    envelope: SpectralEnvelope
    layout: Layout
    bin_count: int
    targets: np.ndarray = field(repr=False)
    channels: np.ndarray = field(repr=False)
    basis_index: int | None = None

    @property
    def grid(self) -> FrequencyGrid:
        return self.envelope.grid

    def span(self) -> float:
        """Half-maximum extent of ``|alpha|^2`` in THz."""
        return half_max_extent(self.grid, self.envelope.intensity)

    def region_count(self) -> int:
        return len(self.channels)


def half_max_extent(grid: FrequencyGrid, intensity: np.ndarray) -> float:
    peak = intensity.max()
    if peak == 0:
        return 0.0
    idx = np.nonzero(intensity >= 0.5 * peak)[0]
    return float(grid.nu[idx[-1]] - grid.nu[idx[0]])


def count_lobes(intensity: np.ndarray, threshold: float = 0.1) -> int:
    """Number of connected runs of ``intensity`` above ``threshold * max``."""
    peak = intensity.max()
    if peak == 0:
        return 0
    above = (intensity >= threshold * peak).astype(np.int8)
    return int(np.count_nonzero(np.diff(np.concatenate([[0], above])) == 1))


def _delay_phase(grid: FrequencyGrid, device: DeviceSpec) -> np.ndarray | float:
    if device.relative_delay == 0.0:
        return 1.0
    return np.exp(2j * np.pi * (grid.nu - device.pump_center) * device.relative_delay)


def _check_span(pump_amp: np.ndarray, grid: FrequencyGrid, device: DeviceSpec) -> None:
    span = half_max_extent(grid, np.abs(pump_amp) ** 2)
    if span > device.pump_bandwidth_limit:
        raise PumpError(
            f"pump extent {span:.4g} THz exceeds the bandwidth limit "
            f"{device.pump_bandwidth_limit:.4g} THz"
        )


def compile_pump_standard(
    basis_vectors,
    fundamental: ModeBasis,
    device: DeviceSpec,
    grid: FrequencyGrid,
    max_truncation: float = 0.05,
    weights=None,
    basis_index: int | None = None,
) -> PumpSpectrum:
    """One pump region per channel, each carrying the reversed conjugate target.

    Region ``c`` is cut to a window one channel spacing wide around
    ``nu_c - center``, which models the waveshaper carving the regions
    out of one spectrum. A target that loses more than ``max_truncation``
    of its energy to the cut collides with its neighbours and is rejected.
    """
    rows = np.atleast_2d(np.asarray(basis_vectors, dtype=complex))
    d = fundamental.dimension
    if rows.shape != (d, d):
        raise ValueError(f"expected {d} basis vectors of length {d}, got shape {rows.shape}")
    channels = device.active_channels(d)
    spacing = device.spacing if d > 1 else np.inf
    w = np.ones(d) if weights is None else np.asarray(weights, dtype=float)
    mu = grid.nu
    step = grid.step
    alpha = np.zeros(grid.n_points, dtype=complex)
    for c, nu_c in enumerate(channels):
        mu_c = nu_c - fundamental.spec.center
        if not grid.contains(mu_c):
            raise GridError(f"pump region {c} at {mu_c:.4f} THz lies outside the pump grid")
        target = fundamental.evaluate(nu_c - mu) @ rows[c]
        total = np.sum(np.abs(target) ** 2) * step
        if abs(total - np.vdot(rows[c], rows[c]).real) > 1e-3:
            raise GridError(f"pump grid does not contain the target mode of channel {c}")
        window = (mu >= mu_c - 0.5 * spacing) & (mu < mu_c + 0.5 * spacing)
        lost = 1.0 - np.sum(np.abs(target[window]) ** 2) * step / total
        if lost > max_truncation:
            raise PumpError(
                f"pump region {c} loses {lost:.2%} of its target to neighbouring regions "
                f"(limit {max_truncation:.2%}); adjacent target modes collide"
            )
        alpha[window] += w[c] * np.conj(target[window])
    alpha *= _delay_phase(grid, device)
    _check_span(alpha, grid, device)
    if fundamental.spec.kind is AlphabetKind.FREQUENCY_BINS:
        bins = int(np.count_nonzero(np.abs(rows) > 1e-12))
    else:
        bins = d
    return PumpSpectrum(SpectralEnvelope(grid, alpha), Layout.STANDARD, bins, rows.copy(),
                        channels, basis_index)


def ffb_bin_phases(k: int, d: int) -> np.ndarray:
    """Phases ``w^(-k (n-(d-1))^2)`` of the 2d-1 FFB pump bins."""
    n = np.arange(2 * d - 1) - (d - 1)
    return np.exp(-2j * np.pi * ((k * n * n) % d) / d)


def compile_pump_ffb(
    mub_index: int,
    fundamental: ModeBasis,
    device: DeviceSpec,
    grid: FrequencyGrid,
    weights=None,
) -> PumpSpectrum:
    """FFB pump: Gaussian bins at the channel spacing; phases select the MUB.

    The computational basis uses a single central bin. Quadratic basis
    ``k`` uses 2d-1 bins and channel ``c`` projects onto MUB-``k`` vector
    ``(-2 k c) mod d`` up to a global phase.
    """
    spec = fundamental.spec
    d = require_odd_prime(fundamental.dimension)
    if spec.kind is not AlphabetKind.FREQUENCY_BINS:
        raise PumpError("the FFB layout needs a frequency-bin alphabet")
    if mub_index not in ffb_sortable_mubs(d):
        raise PumpError(
            f"MUB {mub_index} is not FFB-sortable in d={d}; sortable: {ffb_sortable_mubs(d)}"
        )
    channels = device.active_channels(d)
    spacing = device.spacing
    if abs(spec.separation - spacing) > 1e-9:
        raise PumpError(
            f"FFB needs input bin spacing ({spec.separation} THz) equal to the channel "
            f"spacing ({spacing} THz)"
        )
    mu_center = channels.mean() - spec.center
    offsets = np.arange(2 * d - 1) - (d - 1)
    if mub_index == 0:
        amps = (offsets == 0).astype(complex)
    else:
        amps = ffb_bin_phases(mub_index, d)
    if weights is not None:
        amps = amps * np.asarray(weights, dtype=float)
    mu = grid.nu
    edge = 3.0 * spec.fwhm
    for n in (offsets[0], offsets[-1]):
        if not grid.contains(mu_center + n * spacing, margin=edge if amps[n + d - 1] else 0.0):
            raise GridError("pump grid does not contain all FFB bins")
    alpha = np.zeros(grid.n_points, dtype=complex)
    for n, a in zip(offsets, amps):
        if a != 0:
            alpha += a * gaussian_profile(mu, mu_center + n * spacing, spec.fwhm, spec.fwhm_convention)
    alpha *= _delay_phase(grid, device)
    _check_span(alpha, grid, device)
    mubs = mub_bases(d)
    targets = np.array([mubs.vector(mub_index, ffb_channel_vector(mub_index, c, d))
                        for c in range(d)])
    bins = int(np.count_nonzero(amps))
    return PumpSpectrum(SpectralEnvelope(grid, alpha), Layout.FFB, bins, targets, channels,
                        mub_index)


@dataclass(frozen=True, eq=False)
class ChannelKernel:
    """Discretized ``K_c[o, i] = Phi_c(nu_o) * alpha(nu_o - nu_i)``.

    ``pump_matrix`` is shared between the channels of one pump.
    """

    channel: int
    phi: np.ndarray = field(repr=False)
    pump_matrix: np.ndarray = field(repr=False)
    in_grid: FrequencyGrid
    out_grid: FrequencyGrid

    @property
    def matrix(self) -> np.ndarray:
        return self.phi[:, None] * self.pump_matrix


def _check_coverage(pump: PumpSpectrum, device: DeviceSpec, in_grid, out_grid) -> None:
    margin = 10.0 * device.pm_fwhm
    for c, nu_c in enumerate(pump.channels):
        if not out_grid.contains(nu_c - margin) or not out_grid.contains(nu_c + margin):
            raise GridError(
                f"output grid must cover channel {c} at {nu_c:.4f} THz +- {margin:.3g} THz"
            )
    inten = pump.envelope.intensity
    if inten.sum() > 0:
        centroid = float(np.sum(pump.grid.nu * inten) / inten.sum())
        for c, nu_c in enumerate(pump.channels):
            if not in_grid.contains(nu_c - centroid):
                raise GridError(f"input grid misses the frequencies converted into channel {c}")


def pump_kernel_matrix(pump: PumpSpectrum, in_grid: FrequencyGrid, out_grid: FrequencyGrid,
                       backend=None) -> np.ndarray:
    g = pump.grid
    return kernels.pump_matrix(pump.envelope.amplitude, g.start, g.step, out_grid.nu, in_grid.nu,
                               backend=backend)


def channel_kernels(pump: PumpSpectrum, device: DeviceSpec, in_grid: FrequencyGrid,
                    out_grid: FrequencyGrid, backend=None) -> list[ChannelKernel]:
    """Kernels of every active channel, sharing one pump matrix."""
    _check_coverage(pump, device, in_grid, out_grid)
    p = pump_kernel_matrix(pump, in_grid, out_grid, backend)
    p.flags.writeable = False
    out = []
    for c, nu_c in enumerate(pump.channels):
        phi = device.peak(out_grid.nu, nu_c)
        phi.flags.writeable = False
        out.append(ChannelKernel(c, phi, p, in_grid, out_grid))
    return out


def channel_kernel(pump: PumpSpectrum, device: DeviceSpec, c: int, in_grid: FrequencyGrid,
                   out_grid: FrequencyGrid) -> ChannelKernel:
    if not 0 <= c < pump.region_count():
        raise IndexError(f"channel {c} out of range")
    return channel_kernels(pump, device, in_grid, out_grid)[c]


def _check_input(input: SpectralEnvelope, kernel: ChannelKernel) -> None:
    if input.grid != kernel.in_grid:
        raise GridError("input envelope is not on the kernel's input grid")


def converted_field(input: SpectralEnvelope, kernel: ChannelKernel) -> np.ndarray:
    """Pump-convolved input ``int alpha(nu_o - nu) xi(nu) dnu`` before phase matching."""
    _check_input(input, kernel)
    return kernel.pump_matrix @ input.amplitude * kernel.in_grid.step


def convert(input: SpectralEnvelope, kernel: ChannelKernel) -> SpectralEnvelope:
    """Output amplitude ``A_c(nu_o) = sum_i K_c[o, i] xi_i dnu_in``."""
    return SpectralEnvelope(kernel.out_grid, kernel.phi * converted_field(input, kernel))


def channel_probabilities(input: SpectralEnvelope, kernels_: list[ChannelKernel]) -> np.ndarray:
    """Relative conversion probabilities ``p_c = int |A_c|^2 dnu_out``."""
    if not kernels_:
        return np.zeros(0)
    cache: dict[int, np.ndarray] = {}
    p = np.empty(len(kernels_))
    for n, k in enumerate(kernels_):
        key = id(k.pump_matrix)
        if key not in cache:
            cache[key] = converted_field(input, k)
        p[n] = np.sum(np.abs(k.phi * cache[key]) ** 2) * k.out_grid.step
    return p


def output_field(input: SpectralEnvelope, kernels_: list[ChannelKernel]) -> SpectralEnvelope:
    """Coherent output field of all channels (full phase-matching comb)."""
    f = converted_field(input, kernels_[0])
    phi = np.sum([k.phi for k in kernels_], axis=0)
    return SpectralEnvelope(kernels_[0].out_grid, phi * f)


@dataclass(frozen=True, eq=False)
class SchmidtResult:
    singular_values: np.ndarray
    schmidt_number: float
    dominant_mode: SpectralEnvelope


def schmidt_analysis(kernel: ChannelKernel) -> SchmidtResult:
    """SVD of the kernel as a continuous operator.

    The dominant input mode is the leading right-singular function, i.e.
    the input the channel is most sensitive to.
    """
    k = kernel.matrix * np.sqrt(kernel.out_grid.step * kernel.in_grid.step)
    if not np.any(k):
        raise ValueError("zero kernel has no Schmidt decomposition")
    _, s, vh = np.linalg.svd(k, full_matrices=False)
    s2 = s * s
    K = float(s2.sum() ** 2 / np.sum(s2 * s2))
    mode = SpectralEnvelope(kernel.in_grid, vh[0].conj() / np.sqrt(kernel.in_grid.step))
    return SchmidtResult(s, K, mode)


@dataclass(frozen=True, eq=False)
class PovmElement:
    """Hermitian PSD matrix in fundamental-basis coordinates."""

    matrix: np.ndarray = field(repr=False)
    basis_tag: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("POVM element must be a square matrix")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.conj().T).max() > 1e-12 * scale:
            raise ValueError("POVM element is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        if np.linalg.eigvalsh(m).min() < -1e-10 * scale:
            raise ValueError("POVM element is not positive semidefinite")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def _mode_response(kernels_: list[ChannelKernel], fundamental: ModeBasis) -> np.ndarray:
    k0 = kernels_[0]
    if fundamental.grid != k0.in_grid:
        raise GridError("fundamental modes are not on the kernel input grid")
    return k0.pump_matrix @ fundamental.matrix() * k0.in_grid.step


def _gram_povms(b: np.ndarray, weights: list[np.ndarray], step: float, tag: str,
                scale: float | None) -> list[PovmElement]:
    mats = [(b.conj().T * (w * step)) @ b for w in weights]
    mats = [0.5 * (m + m.conj().T) for m in mats]
    if scale is None:
        scale = max(float(np.trace(m).real) for m in mats)
    if scale <= 0:
        raise ValueError("all POVM elements vanish; nothing to normalize")
    return [PovmElement(m / scale, tag) for m in mats]


def theoretical_povm(kernels_: list[ChannelKernel], fundamental: ModeBasis,
                     scale: float | None = None) -> list[PovmElement]:
    """``pi_c[i, j] = <convert(m_i)|convert(m_j)>`` restricted to the alphabet.

    Elements are divided by ``scale``; by default the largest channel
    trace of this configuration, so every trace is at most one.
    """
    b = _mode_response(kernels_, fundamental)
    weights = [np.abs(k.phi) ** 2 for k in kernels_]
    return _gram_povms(b, weights, kernels_[0].out_grid.step, fundamental.spec.kind.value, scale)


def readout_povm(kernels_: list[ChannelKernel], fundamental: ModeBasis, readout_weights,
                 scale: float | None = None) -> list[PovmElement]:
    """POVM of the coherent output field read out with frequency weights.

    ``readout_weights[g]`` is the probability that a photon at each output
    grid frequency is registered in channel ``g`` (see
    :func:`mqpgsim.detection.readout_weights`).
    """
    phi = np.sum([k.phi for k in kernels_], axis=0)
    b = phi[:, None] * _mode_response(kernels_, fundamental)
    return _gram_povms(b, list(readout_weights), kernels_[0].out_grid.step,
                       fundamental.spec.kind.value, scale)
