"""TOML configuration files and built-in presets.

A file may start from a preset and override individual keys::

    preset = "table1-d3-ffb"

    [spectrograph]
    resolution = 0.3

Unknown keys and ill-typed values are rejected with the offending
``[section].key`` and, when it can be found, its line number.
"""

from __future__ import annotations

import copy
import re
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .alphabets import TABLE1, TABLE1_FFB, AlphabetKind, AlphabetSpec
from .experiment import CountingConfig, ExperimentConfig, GridConfig
from .mqpg import DeviceSpec, Layout
from .scalability import SweepConfig


class ConfigError(ValueError):
    """Invalid configuration, with the location of the offending field."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


_NUM = (int, float)
# section -> key -> accepted types
SCHEMA: dict[str, dict[str, tuple]] = {
    "alphabet": {
        "kind": (str,), "dimension": (int,), "fwhm": _NUM, "separation": _NUM,
        "center": _NUM, "fwhm_convention": (str,),
    },
    "device": {
        "n_channels": (int,), "spacing": _NUM, "channel_centers": (list,), "pm_fwhm": _NUM,
        "pm_shape": (str,), "pump_bandwidth_limit": _NUM, "input_center": _NUM,
        "pump_center": _NUM, "relative_delay": _NUM, "allow_channel_overlap": (bool,),
    },
    "measurement": {"layout": (str,), "bases": (list,), "max_truncation": _NUM},
    "spectrograph": {"resolution": _NUM, "readout": (str,)},
    "counting": {
        "enabled": (bool,), "n_pulses": (int,), "mean_photon_number": _NUM,
        "efficiency": _NUM, "seed": (int,),
    },
    "grids": {
        "input_points": (int,), "input_span": _NUM, "output_points": (int,),
        "output_span": _NUM, "pump_points": (int,), "pump_span": _NUM,
    },
    "sweep": {
        "dimensions": (list,), "ratios": (list,), "pm_fwhm": _NUM,
        "bin_separation_factor": _NUM, "spectrograph_resolution": _NUM, "readout": (str,),
        "pm_shape": (str,), "n_points": (int,), "pump_points": (int,),
    },
}

_KIND_NAMES = {
    "timebins": AlphabetKind.TIME_BINS,
    "hg": AlphabetKind.HERMITE_GAUSS,
    "freqbins": AlphabetKind.FREQUENCY_BINS,
}
INPUT_CENTER = 194.0
CHANNEL_SPACING = 0.63


def _preset_table() -> dict[str, dict]:
    out = {}
    for (kind, d), (fwhm, sep) in TABLE1.items():
        short = next(k for k, v in _KIND_NAMES.items() if v is kind)
        alphabet = {"kind": kind.value, "dimension": d, "fwhm": fwhm, "center": INPUT_CENTER}
        if sep is not None:
            alphabet["separation"] = sep
        out[f"table1-d{d}-{short}"] = {
            "alphabet": alphabet,
            "device": {"n_channels": d, "spacing": CHANNEL_SPACING},
            "measurement": {"layout": "standard"},
        }
    for d, (fwhm, sep) in TABLE1_FFB.items():
        out[f"table1-d{d}-ffb"] = {
            "alphabet": {"kind": "frequency_bins", "dimension": d, "fwhm": fwhm,
                         "separation": sep, "center": INPUT_CENTER},
            "device": {"n_channels": d, "spacing": sep},
            "measurement": {"layout": "ffb"},
        }
    return dict(sorted(out.items()))


PRESETS = _preset_table()


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}", "preset")
    return copy.deepcopy(PRESETS[name])


def _find_line(text: str | None, section: str, key: str | None) -> int | None:
    if not text:
        return None
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return n
            continue
        if key is not None and current == section and re.match(rf"{re.escape(key)}\s*=", s):
            return n
    return None


def merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(raw: dict, text: str | None = None) -> None:
    """Check section and key names and value types against :data:`SCHEMA`."""
    for section, body in raw.items():
        if section == "preset":
            continue
        if section not in SCHEMA:
            raise ConfigError(f"unknown section {section!r}", f"[{section}]",
                              _find_line(text, section, None))
        if not isinstance(body, dict):
            raise ConfigError("expected a table", f"[{section}]")
        for key, value in body.items():
            where = f"[{section}].{key}"
            line = _find_line(text, section, key)
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key (allowed: {', '.join(SCHEMA[section])})", where,
                                  line)
            types = SCHEMA[section][key]
            ok = isinstance(value, types) and not (isinstance(value, bool) and bool not in types)
            if not ok:
                names = "/".join(t.__name__ for t in types)
                raise ConfigError(f"expected {names}, got {type(value).__name__}", where, line)


def resolve(raw: dict, text: str | None = None) -> dict:
    """Apply the ``preset`` (if any) under the file's own keys and validate."""
    validate(raw, text)
    name = raw.get("preset")
    if name is not None and not isinstance(name, str):
        raise ConfigError("expected a preset name", "preset")
    base = preset(name) if name else {}
    body = {k: v for k, v in raw.items() if k != "preset"}
    out = merge(base, body)
    if name:
        out["preset"] = name
    return out


def load_text(text: str) -> dict:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"TOML syntax error: {e}") from None
    return resolve(raw, text)


def load_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    return load_text(data.decode("utf-8"))


def _build(section: str, fn, text=None):
    try:
        return fn()
    except ConfigError:
        raise
    except (ValueError, TypeError) as e:
        msg = str(e)
        # point at the key the message names, if any
        key = next((k for k in SCHEMA.get(section, {}) if re.search(rf"\b{k}\b", msg)), None)
        if key is not None:
            raise ConfigError(msg, f"[{section}].{key}", _find_line(text, section, key)) from None
        raise ConfigError(msg, f"[{section}]", _find_line(text, section, None)) from None


def experiment_config(cfg: dict, text: str | None = None) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a resolved config dict."""
    if "alphabet" not in cfg:
        raise ConfigError("missing section (or use a preset)", "[alphabet]")
    a = dict(cfg["alphabet"])
    for key in ("kind", "dimension", "fwhm"):
        if key not in a:
            raise ConfigError("required key missing", f"[alphabet].{key}")
    alphabet = _build("alphabet", lambda: AlphabetSpec(**a), text)

    dev = dict(cfg.get("device", {}))
    n = dev.pop("n_channels", None)
    spacing = dev.pop("spacing", None)
    centers = dev.pop("channel_centers", None)
    if centers is None:
        if n is None or spacing is None:
            raise ConfigError("give channel_centers or both n_channels and spacing", "[device]")

        def make_dev():
            return DeviceSpec.uniform(n, spacing, **dev)
    else:
        if n is not None or spacing is not None:
            raise ConfigError("channel_centers excludes n_channels/spacing", "[device]")

        def make_dev():
            return DeviceSpec(tuple(centers), **dev)
    device = _build("device", make_dev, text)

    meas = dict(cfg.get("measurement", {}))
    sg = dict(cfg.get("spectrograph", {}))
    bases = meas.get("bases")
    if bases is not None:
        if not all(isinstance(b, int) and not isinstance(b, bool) for b in bases):
            raise ConfigError("bases must be integers", "[measurement].bases",
                              _find_line(text, "measurement", "bases"))
        bases = tuple(bases)
    counting = _build("counting", lambda: CountingConfig(**cfg.get("counting", {})), text)
    grids = _build("grids", lambda: GridConfig(**cfg.get("grids", {})), text)
    layout = meas.get("layout", "standard")
    if layout not in [x.value for x in Layout]:
        raise ConfigError(f"layout must be 'standard' or 'ffb', got {layout!r}",
                          "[measurement].layout", _find_line(text, "measurement", "layout"))
    return _build(
        "measurement",
        lambda: ExperimentConfig(
            alphabet, device, Layout(layout), bases,
            spectrograph_resolution=float(sg.get("resolution", 0.0)),
            readout=sg.get("readout", "spectrograph"),
            counting=counting, grids=grids,
            max_truncation=float(meas.get("max_truncation", 0.05)),
        ),
        text,
    )


def sweep_config(cfg: dict, text: str | None = None) -> SweepConfig:
    body = dict(cfg.get("sweep", {}))
    return _build("sweep", lambda: SweepConfig(**body), text)
