"""Spectrograph response, channel binning and photon counting."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import fftconvolve

from .spectral import FrequencyGrid

#: Resolutions quoted for the two readout systems (THz).
CCD_RESOLUTION = 0.03
TOF_RESOLUTION = 0.3


@dataclass(frozen=True)
class SpectrographSpec:
    """Gaussian instrument response and channel bin edges.

    ``resolution`` is the intensity FWHM of the response in THz (0 means
    ideal). ``channel_bounds`` holds d+1 increasing edges.
    """

    resolution: float
    channel_bounds: tuple[float, ...]

    def __post_init__(self):
        bounds = tuple(float(b) for b in self.channel_bounds)
        object.__setattr__(self, "channel_bounds", bounds)
        if self.resolution < 0:
            raise ValueError("resolution must be >= 0")
        if len(bounds) < 2 or np.any(np.diff(bounds) <= 0):
            raise ValueError("channel bounds must be strictly increasing with at least 2 edges")

    @classmethod
    def for_channels(cls, centers, resolution: float = 0.0) -> "SpectrographSpec":
        return cls(resolution, tuple(default_bounds(centers)))

    @property
    def n_channels(self) -> int:
        return len(self.channel_bounds) - 1


def default_bounds(centers) -> np.ndarray:
    """Midpoints between centres, extended by half a spacing at both ends."""
    c = np.asarray(centers, dtype=float)
    if c.size == 1:
        raise ValueError("need at least two channels to infer bounds")
    mid = 0.5 * (c[1:] + c[:-1])
    return np.concatenate([[c[0] - (mid[0] - c[0])], mid, [c[-1] + (c[-1] - mid[-1])]])


def _response(step: float, resolution: float) -> np.ndarray:
    sigma = resolution / (2.0 * np.sqrt(2.0 * np.log(2.0))) / step
    if sigma < 1e-3:
        return np.ones(1)  # narrower than the grid: a delta function
    half = int(np.ceil(8.0 * sigma))
    x = np.arange(-half, half + 1)
    r = np.exp(-0.5 * (x / sigma) ** 2)
    return r / r.sum()


def apply_spectrograph(intensity, grid: FrequencyGrid, spec: SpectrographSpec) -> np.ndarray:
    """Convolve an output intensity with the unit-area instrument response.

    Intensity spread past the grid edges is lost, so the input should sit
    well inside the grid.
    """
    inten = np.asarray(intensity, dtype=float)
    if inten.shape != (grid.n_points,):
        raise ValueError("intensity does not match grid")
    if np.any(inten < 0):
        raise ValueError("intensity must be non-negative")
    if spec.resolution == 0.0:
        return inten.copy()
    out = fftconvolve(inten, _response(grid.step, spec.resolution), mode="same")
    floor = -1e-14 * max(float(inten.max()), 1e-300)
    if out.min() < floor:
        raise FloatingPointError("spectrograph convolution produced negative intensity")
    return np.clip(out, 0.0, None)


def channel_masks(grid: FrequencyGrid, spec: SpectrographSpec) -> np.ndarray:
    """Boolean ``(d, n_points)`` assignment of grid points to channels."""
    b = np.asarray(spec.channel_bounds)
    nu = grid.nu
    return np.stack([(nu >= b[c]) & (nu < b[c + 1]) for c in range(spec.n_channels)])


@dataclass(frozen=True)
class BinnedCounts:
    probabilities: np.ndarray
    loss_fraction: float


def bin_channels(intensity, grid: FrequencyGrid, spec: SpectrographSpec) -> BinnedCounts:
    """Integrate the intensity inside each channel's bounds.

    Energy outside every channel is dropped and reported as ``loss_fraction``.
    """
    inten = np.asarray(intensity, dtype=float)
    masks = channel_masks(grid, spec)
    probs = (masks * inten).sum(axis=1) * grid.step
    total = inten.sum() * grid.step
    loss = 0.0 if total == 0 else float(1.0 - probs.sum() / total)
    return BinnedCounts(probs, max(loss, 0.0))


def readout_weights(grid: FrequencyGrid, spec: SpectrographSpec) -> np.ndarray:
    """Per-frequency registration probability for each channel.

    Smearing then binning is linear in intensity, so
    ``bin(smear(I))[c] = sum_o W[c, o] I[o] dnu``; W is the channel mask
    convolved with the (symmetric) response.
    """
    masks = channel_masks(grid, spec).astype(float)
    if spec.resolution == 0.0:
        return masks
    r = _response(grid.step, spec.resolution)
    return np.clip(np.stack([fftconvolve(m, r, mode="same") for m in masks]), 0.0, None)


@dataclass(frozen=True)
class CountRecord:
    counts: tuple[int, ...]
    n_pulses: int
    mean_photon_number: float
    seed: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CountRecord":
        data = json.loads(text)
        return cls(tuple(int(c) for c in data["counts"]), int(data["n_pulses"]),
                   float(data["mean_photon_number"]), int(data["seed"]))


def derive_seed(seed: int, task_index: int) -> int:
    """Reproducible 64-bit per-task seed, independent of execution order."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(task_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_counts(probs, mean_photon_number: float, n_pulses: int, efficiency: float = 1.0,
                  seed: int = 0) -> CountRecord:
    """Poisson counts with means ``n_pulses * n * eta * p_c / sum(p)``.

    Counts are clipped at ``n_pulses`` (at most one click per pulse).
    """
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and non-negative")
    if not 0 < efficiency <= 1:
        raise ValueError("efficiency must be in (0, 1]")
    if mean_photon_number < 0 or n_pulses < 0:
        raise ValueError("mean photon number and pulse count must be non-negative")
    flux = n_pulses * mean_photon_number * efficiency
    total = p.sum()
    if total == 0:
        if flux > 0:
            raise ValueError("all-zero probabilities with nonzero photon flux")
        lam = np.zeros_like(p)
    else:
        lam = flux * p / total
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    counts = np.minimum(rng.poisson(lam), n_pulses)
    return CountRecord(tuple(int(c) for c in counts), int(n_pulses), float(mean_photon_number),
                       int(seed))
