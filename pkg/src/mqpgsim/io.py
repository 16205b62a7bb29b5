"""JSON and CSV writers with a metadata header.

Outputs carry the resolved configuration and the package version but no
timestamps or host details, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from . import __version__

ARTIFACT = "mqpgsim"


def metadata(config: dict | None = None, **extra) -> dict:
    out = {"artifact": ARTIFACT, "version": __version__}
    if config is not None:
        out["config"] = config
    out.update(extra)
    return out


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if hasattr(o, "value"):  # enums
        return o.value
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps_json(payload: dict, meta: dict | None = None) -> str:
    doc = {"metadata": meta if meta is not None else metadata(), **payload}
    return json.dumps(doc, indent=2, sort_keys=True, default=_default) + "\n"


def dumps_csv(header, rows, meta: dict | None = None) -> str:
    """CSV text; metadata goes in leading ``#`` comment lines."""
    buf = _io.StringIO()
    m = meta if meta is not None else metadata()
    buf.write("# " + json.dumps(m, sort_keys=True, default=_default) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict, list[str], list[list[str]]]:
    """Inverse of :func:`dumps_csv`: metadata, header and raw rows."""
    lines = text.splitlines()
    meta = {}
    while lines and lines[0].startswith("#"):
        meta.update(json.loads(lines.pop(0)[1:]))
    rows = list(csv.reader(lines))
    return meta, rows[0], rows[1:]


def pump_rows(envelope):
    nu = envelope.grid.nu
    a = envelope.amplitude
    return [(float(f), float(z.real), float(z.imag)) for f, z in zip(nu, a)]


PUMP_HEADER = ("frequency_THz", "amplitude_re", "amplitude_im")


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
