"""End-to-end forward simulation and tomography of one configured device."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .alphabets import (
    AlphabetKind,
    AlphabetSpec,
    ModeBasis,
    ffb_sortable_mubs,
    fundamental_basis,
    mub_bases,
)
from .detection import (
    CountRecord,
    SpectrographSpec,
    derive_seed,
    readout_weights,
    sample_counts,
)
from .mqpg import (
    ChannelKernel,
    DeviceSpec,
    Layout,
    PumpSpectrum,
    channel_kernels,
    compile_pump_ffb,
    compile_pump_standard,
)
from .spectral import FrequencyGrid, make_grid
from .tomography import (
    ProbeSet,
    TomographyResult,
    normalize_columns,
    probe_set,
    reconstruct_povm,
)

READOUTS = ("spectrograph", "channel")


@dataclass(frozen=True)
class GridConfig:
    """Grid sizes; spans left as ``None`` are derived from the device."""

    input_points: int = 1024
    input_span: float = 3.0
    output_points: int = 2048
    output_span: float | None = None
    pump_points: int = 8192
    pump_span: float = 6.0

    def __post_init__(self):
        for name in ("input_points", "output_points", "pump_points"):
            n = getattr(self, name)
            if n < 2 or n & (n - 1):
                raise ValueError(f"{name} must be a power of two >= 2, got {n}")
        for name in ("input_span", "output_span", "pump_span"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class CountingConfig:
    enabled: bool = False
    n_pulses: int = 100_000
    mean_photon_number: float = 0.1
    efficiency: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_pulses < 0:
            raise ValueError("n_pulses must be >= 0")
        if self.mean_photon_number < 0:
            raise ValueError("mean_photon_number must be >= 0")
        if not 0 < self.efficiency <= 1:
            raise ValueError("efficiency must be in (0, 1]")


@dataclass(frozen=True)
class ExperimentConfig:
    alphabet: AlphabetSpec
    device: DeviceSpec
    layout: Layout = Layout.STANDARD
    bases: tuple[int, ...] | None = None
    spectrograph_resolution: float = 0.0
    readout: str = "spectrograph"
    counting: CountingConfig = field(default_factory=CountingConfig)
    grids: GridConfig = field(default_factory=GridConfig)
    max_truncation: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "layout", Layout(self.layout))
        d = self.alphabet.dimension
        if d > self.device.n_channels:
            raise ValueError(
                f"alphabet dimension {d} exceeds the device's {self.device.n_channels} channels"
            )
        if self.readout not in READOUTS:
            raise ValueError(f"readout must be one of {READOUTS}, got {self.readout!r}")
        if self.spectrograph_resolution < 0:
            raise ValueError("spectrograph resolution must be >= 0")
        if self.layout is Layout.FFB:
            from .alphabets import require_odd_prime

            require_odd_prime(d)
            if self.alphabet.kind is not AlphabetKind.FREQUENCY_BINS:
                raise ValueError("the FFB layout needs a frequency-bin alphabet")
        if self.bases is not None:
            allowed = self.sortable_bases()
            bad = [b for b in self.bases if b not in allowed]
            if bad:
                raise ValueError(f"bases {bad} not available for this layout (allowed {allowed})")

    def sortable_bases(self) -> list[int]:
        d = self.alphabet.dimension
        if self.layout is Layout.FFB:
            return ffb_sortable_mubs(d)
        return list(range(d + 1))

    def selected_bases(self) -> list[int]:
        return list(self.bases) if self.bases is not None else self.sortable_bases()

    def with_resolution(self, resolution: float) -> "ExperimentConfig":
        return replace(self, spectrograph_resolution=float(resolution))


def probe_probabilities(
    kernels_: list[ChannelKernel],
    fundamental: ModeBasis,
    coeffs: np.ndarray,
    readout: str = "spectrograph",
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """Channel probabilities, one column per coefficient row of ``coeffs``.

    ``readout="channel"`` credits each phase-matching peak's own output to
    its channel. ``"spectrograph"`` detects the coherent output field and
    assigns photons by frequency through ``weights`` (from
    :func:`~mqpgsim.detection.readout_weights`).
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    k0 = kernels_[0]
    x = fundamental.matrix() @ c.T
    f = k0.pump_matrix @ x * k0.in_grid.step
    step = k0.out_grid.step
    if readout == "channel":
        return np.array([np.sum(np.abs(k.phi[:, None] * f) ** 2, axis=0) * step for k in kernels_])
    if readout != "spectrograph":
        raise ValueError(f"unknown readout {readout!r}")
    if weights is None:
        raise ValueError("spectrograph readout needs readout weights")
    phi = np.sum([k.phi for k in kernels_], axis=0)
    inten = np.abs(phi[:, None] * f) ** 2
    return weights @ inten * step


class Experiment:
    """Lazily built grids, basis, pumps and kernels for one config."""

    def __init__(self, config: ExperimentConfig, backend=None):
        self.config = config
        self.backend = backend
        self._kernels: dict[int, tuple[PumpSpectrum, list[ChannelKernel]]] = {}

    @property
    def dimension(self) -> int:
        return self.config.alphabet.dimension

    @cached_property
    def channels(self) -> np.ndarray:
        return self.config.device.active_channels(self.dimension)

    @cached_property
    def input_grid(self) -> FrequencyGrid:
        g = self.config.grids
        return make_grid(self.config.alphabet.center, g.input_span, g.input_points)

    @cached_property
    def output_grid(self) -> FrequencyGrid:
        g = self.config.grids
        dev = self.config.device
        span = g.output_span
        if span is None:
            spacing = dev.spacing if self.dimension > 1 else 1.0
            margin = max(10.0 * dev.pm_fwhm, 0.5 * spacing) + 3.0 * self.config.spectrograph_resolution
            span = float(np.ptp(self.channels)) + 2.0 * margin + 4.0 * dev.pm_fwhm
        return make_grid(float(self.channels.mean()), span, g.output_points)

    @cached_property
    def pump_grid(self) -> FrequencyGrid:
        g = self.config.grids
        center = float(self.channels.mean()) - self.config.alphabet.center
        return make_grid(center, g.pump_span, g.pump_points)

    @cached_property
    def fundamental(self) -> ModeBasis:
        return fundamental_basis(self.config.alphabet, self.input_grid)

    @cached_property
    def probes(self) -> ProbeSet:
        return probe_set(self.dimension)

    @cached_property
    def spectrograph(self) -> SpectrographSpec:
        return SpectrographSpec.for_channels(self.channels, self.config.spectrograph_resolution)

    @cached_property
    def weights(self) -> np.ndarray:
        return readout_weights(self.output_grid, self.spectrograph)

    def compile_pump(self, basis: int) -> PumpSpectrum:
        cfg = self.config
        if basis not in cfg.sortable_bases():
            raise ValueError(f"basis {basis} not available (allowed {cfg.sortable_bases()})")
        if cfg.layout is Layout.FFB:
            return compile_pump_ffb(basis, self.fundamental, cfg.device, self.pump_grid)
        rows = mub_bases(self.dimension).bases[basis]
        return compile_pump_standard(rows, self.fundamental, cfg.device, self.pump_grid,
                                     max_truncation=cfg.max_truncation, basis_index=basis)

    def kernels(self, basis: int) -> tuple[PumpSpectrum, list[ChannelKernel]]:
        if basis not in self._kernels:
            pump = self.compile_pump(basis)
            ks = channel_kernels(pump, self.config.device, self.input_grid, self.output_grid,
                                 backend=self.backend)
            self._kernels[basis] = (pump, ks)
        return self._kernels[basis]

    def probabilities(self, basis: int, coeffs) -> np.ndarray:
        """Relative channel probabilities for each coefficient row."""
        _, ks = self.kernels(basis)
        return probe_probabilities(ks, self.fundamental, coeffs, self.config.readout, self.weights)

    def output_spectrum(self, basis: int, coeffs) -> tuple[np.ndarray, np.ndarray]:
        """Raw and smeared output intensity of one input state."""
        from .detection import apply_spectrograph

        _, ks = self.kernels(basis)
        c = np.asarray(coeffs, dtype=complex)
        f = ks[0].pump_matrix @ (self.fundamental.matrix() @ c) * self.input_grid.step
        phi = np.sum([k.phi for k in ks], axis=0)
        inten = np.abs(phi * f) ** 2
        return inten, apply_spectrograph(inten, self.output_grid, self.spectrograph)

    def count(self, probs, task_index: int) -> CountRecord:
        c = self.config.counting
        return sample_counts(probs, c.mean_photon_number, c.n_pulses, c.efficiency,
                             derive_seed(c.seed, task_index))

    def measured_probabilities(self, basis: int) -> np.ndarray:
        """Column-normalized probe probabilities, with shot noise if enabled."""
        p = self.probabilities(basis, self.probes.states)
        if self.config.counting.enabled:
            n = len(self.probes)
            counts = np.array(
                [self.count(p[:, j], basis * n + j).counts for j in range(n)], dtype=float
            ).T
            p = counts
        return normalize_columns(p)

    def tomography(self, basis: int, tol: float = 1e-10, max_iter: int = 10000) -> TomographyResult:
        pump, _ = self.kernels(basis)
        probs = self.measured_probabilities(basis)
        return reconstruct_povm(probs, self.probes, tol=tol, max_iter=max_iter,
                                targets=pump.targets, basis_tag=self.config.alphabet.kind.value)

    def full_tomography(self) -> dict[int, TomographyResult]:
        return {b: self.tomography(b) for b in self.config.selected_bases()}
