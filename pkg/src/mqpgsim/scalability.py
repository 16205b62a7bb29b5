"""Dimensional scalability of FFB mode sorting.

For a bandwidth ratio ``R = pump bandwidth / pm_fwhm`` the pump span
``R * pm_fwhm`` is split into ``2d - 1`` bins of spacing
``dnu = R * pm_fwhm / (2d - 1)``. Input bins and output channels inherit
that spacing and bins are ``dnu / bin_separation_factor`` wide, so large
``d`` at small ``R`` squeezes the output comb until neighbouring
phase-matching peaks overlap.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .alphabets import (
    AlphabetKind,
    AlphabetSpec,
    ffb_channel_vector,
    ffb_sortable_mubs,
    fundamental_basis,
    mub_bases,
    require_odd_prime,
)
from .detection import SpectrographSpec, readout_weights
from .experiment import probe_probabilities
from .mqpg import DeviceSpec, PMShape, channel_kernels, compile_pump_ffb
from .spectral import MIN_POINTS_PER_FWHM, GridError, make_grid
from .tomography import crosstalk_matrix

INPUT_CENTER = 194.0
PUMP_CENTER = 348.6


@dataclass(frozen=True)
class SweepConfig:
    """Grid of dimensions and bandwidth ratios plus the fixed device model.

    ``spectrograph_resolution`` of 0 is an ideal spectrograph. ``readout``
    selects how output photons are attributed to channels (see
    :func:`~mqpgsim.experiment.probe_probabilities`).
    """

    dimensions: tuple[int, ...] = (3, 5, 7, 11, 13)
    ratios: tuple[float, ...] = (10.0, 30.0, 100.0, 300.0)
    pm_fwhm: float = 0.03
    bin_separation_factor: float = 3.0
    spectrograph_resolution: float = 0.0
    readout: str = "channel"
    pm_shape: PMShape = PMShape.SINC
    n_points: int = 2048
    pump_points: int = 16384

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(int(d) for d in self.dimensions))
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        object.__setattr__(self, "pm_shape", PMShape(self.pm_shape))
        for d in self.dimensions:
            require_odd_prime(d)
        if not self.dimensions or not self.ratios:
            raise ValueError("dimensions and ratios must be non-empty")
        if any(not r > 0 for r in self.ratios):
            raise ValueError("ratios must be > 0")
        if not self.bin_separation_factor >= 2:
            raise ValueError("bin_separation_factor must be >= 2")
        if not self.pm_fwhm > 0:
            raise ValueError("pm_fwhm must be positive")
        if self.spectrograph_resolution < 0:
            raise ValueError("spectrograph_resolution must be >= 0")
        if self.readout not in ("channel", "spectrograph"):
            raise ValueError(f"unknown readout {self.readout!r}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["dimensions"] = list(self.dimensions)
        out["ratios"] = list(self.ratios)
        out["pm_shape"] = self.pm_shape.value
        return out


@dataclass(frozen=True)
class CellResult:
    error: float
    feasible: bool


@dataclass(frozen=True, eq=False)
class SweepResult:
    config: SweepConfig
    errors: np.ndarray = field(repr=False)  # (len(dimensions), len(ratios))
    feasible: np.ndarray = field(repr=False)

    def rows(self):
        for i, d in enumerate(self.config.dimensions):
            for j, r in enumerate(self.config.ratios):
                yield d, r, float(self.errors[i, j]), bool(self.feasible[i, j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "ratio", "error", "feasible"])
        for d, r, e, f in self.rows():
            w.writerow([d, repr(r), repr(e), int(f)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cells": [{"d": d, "ratio": r, "error": e, "feasible": f} for d, r, e, f in self.rows()],
        }


def geometry(d: int, ratio: float, config: SweepConfig) -> tuple[float, float]:
    """Bin spacing and bin FWHM (THz) for one grid cell."""
    spacing = ratio * config.pm_fwhm / (2 * d - 1)
    return spacing, spacing / config.bin_separation_factor


def _grids(d: int, spacing: float, config: SweepConfig):
    in_grid = make_grid(INPUT_CENTER, (d + 3) * spacing, config.n_points)
    margin = 10.0 * config.pm_fwhm + 4.0 * config.spectrograph_resolution
    out_grid = make_grid(INPUT_CENTER + PUMP_CENTER, (d + 1) * spacing + 2.0 * margin,
                         config.n_points)
    pump_grid = make_grid(PUMP_CENTER, in_grid.span + out_grid.span, config.pump_points)
    return in_grid, out_grid, pump_grid


def average_error(d: int, ratio: float, config: SweepConfig) -> CellResult:
    """Mean of ``1 - C[correct, xi]`` over all FFB-sortable MUB eigenstates.

    A cell whose bins would be sampled by fewer than the minimum number of
    grid points is reported as ``error = 1.0, feasible = False``.
    """
    d = require_odd_prime(d)
    if not ratio > 0:
        raise ValueError("ratio must be > 0")
    spacing, fwhm = geometry(d, ratio, config)
    in_grid, out_grid, pump_grid = _grids(d, spacing, config)
    if fwhm < MIN_POINTS_PER_FWHM * max(in_grid.step, pump_grid.step):
        return CellResult(1.0, False)
    spec = AlphabetSpec(AlphabetKind.FREQUENCY_BINS, d, fwhm, spacing, INPUT_CENTER)
    device = DeviceSpec.uniform(
        d, spacing, INPUT_CENTER, PUMP_CENTER, pm_fwhm=config.pm_fwhm, pm_shape=config.pm_shape,
        pump_bandwidth_limit=ratio * config.pm_fwhm, allow_channel_overlap=True,
    )
    try:
        basis = fundamental_basis(spec, in_grid)
    except (GridError, ValueError):
        return CellResult(1.0, False)
    weights = None
    if config.readout == "spectrograph":
        sg = SpectrographSpec.for_channels(device.active_channels(d), config.spectrograph_resolution)
        weights = readout_weights(out_grid, sg)
    mubs = mub_bases(d)
    errs = []
    for k in ffb_sortable_mubs(d):
        pump = compile_pump_ffb(k, basis, device, pump_grid)
        ks = channel_kernels(pump, device, in_grid, out_grid)
        c = crosstalk_matrix(probe_probabilities(ks, basis, mubs.bases[k], config.readout, weights))
        for c_out in range(d):
            errs.append(1.0 - c[c_out, ffb_channel_vector(k, c_out, d)])
    return CellResult(float(np.clip(np.mean(errs), 0.0, 1.0)), True)


def run_sweep(config: SweepConfig, threads: int = 1) -> SweepResult:
    """Evaluate every (d, ratio) cell; results do not depend on ``threads``."""
    cells = [(d, r) for d in config.dimensions for r in config.ratios]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: average_error(c[0], c[1], config), cells))
    else:
        results = [average_error(d, r, config) for d, r in cells]
    shape = (len(config.dimensions), len(config.ratios))
    errors = np.array([r.error for r in results]).reshape(shape)
    feasible = np.array([r.feasible for r in results]).reshape(shape)
    return SweepResult(config, errors, feasible)
