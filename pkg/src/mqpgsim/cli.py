"""Command-line front end: ``mqpgsim <command> [options]``.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as mio
from .alphabets import DimensionError, mub_bases
from .config import (
    PRESETS,
    ConfigError,
    experiment_config,
    load_text,
    merge,
    preset,
    resolve,
    sweep_config,
)
from .experiment import Experiment
from .mqpg import PumpError
from .scalability import run_sweep
from .spectral import GridError
from .tomography import crosstalk_matrix

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2


class NonConvergence(RuntimeError):
    pass


def _global_args(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=d, help="TOML config file")
    parser.add_argument("--preset", default=d, help=f"built-in config ({', '.join(PRESETS)})")
    parser.add_argument("--seed", type=int, default=d, help="override the counting seed")
    parser.add_argument("--out", type=Path, default=d, help="output directory (default: stdout)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1)
    parser.add_argument("--format", choices=("json", "csv"),
                        default=argparse.SUPPRESS if suppress else "json")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mqpgsim", description=__doc__.splitlines()[0])
    _global_args(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_args(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mubs", parents=[common], help="print MUB coefficient tables")
    s.add_argument("d", type=int)

    s = sub.add_parser("compile-pump", parents=[common], help="compile the pump of one basis")
    s.add_argument("--basis", type=int, default=0)

    s = sub.add_parser("simulate", parents=[common], help="forward-simulate one input state")
    s.add_argument("--basis", type=int, default=0, help="measurement basis (pump)")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--state", default="0:0", help="input MUB eigenstate as BASIS:INDEX")
    g.add_argument("--coeffs", help="comma-separated complex coefficients, e.g. '1,0,0'")
    s.add_argument("--counts", action="store_true", help="sample photon counts")

    sub.add_parser("tomography", parents=[common], help="detector tomography of each basis")
    sub.add_parser("sweep", parents=[common], help="dimensional scalability sweep")
    return p


def _load(args) -> tuple[dict, str | None]:
    """Resolved config dict plus the config file text (for error lines)."""
    cfg: dict = {}
    text = None
    name = getattr(args, "preset", None)
    if name:
        cfg = preset(name)
        cfg["preset"] = name
    if getattr(args, "config", None) is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
        cfg = merge(cfg, load_text(text))
    cfg = resolve(cfg)
    if getattr(args, "seed", None) is not None:
        cfg.setdefault("counting", {})["seed"] = args.seed
    return cfg, text


def _emit(args, name: str, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        mio.write_text(args.out / name, text)


def _complex_list(values) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values).ravel()]


def cmd_mubs(args) -> int:
    mubs = mub_bases(args.d)
    meta = mio.metadata(None, command="mubs", dimension=args.d)
    if args.format == "csv":
        rows = [(b, m, j, float(z.real), float(z.imag))
                for b in range(len(mubs)) for m in range(args.d)
                for j, z in enumerate(mubs.vector(b, m))]
        _emit(args, f"mubs_d{args.d}.csv",
              mio.dumps_csv(("basis", "vector", "component", "re", "im"), rows, meta))
    else:
        payload = {"dimension": args.d, "n_bases": len(mubs),
                   "bases": [[_complex_list(mubs.vector(b, m)) for m in range(args.d)]
                             for b in range(len(mubs))]}
        _emit(args, f"mubs_d{args.d}.json", mio.dumps_json(payload, meta))
    return EXIT_OK


def cmd_compile_pump(args) -> int:
    cfg, text = _load(args)
    ex = Experiment(experiment_config(cfg, text))
    pump = ex.compile_pump(args.basis)
    meta = mio.metadata(cfg, command="compile-pump", basis=args.basis)
    summary = {"basis": args.basis, "layout": pump.layout.value, "bin_count": pump.bin_count,
               "span_THz": pump.span(),
               "pump_bandwidth_limit_THz": ex.config.device.pump_bandwidth_limit,
               "regions": pump.region_count(),
               "targets": [_complex_list(t) for t in pump.targets]}
    csv_text = mio.dumps_csv(mio.PUMP_HEADER, mio.pump_rows(pump.envelope), meta)
    if args.out is None:
        sys.stdout.write(csv_text if args.format == "csv" else mio.dumps_json(summary, meta))
    else:
        _emit(args, f"pump_b{args.basis}.csv", csv_text)
        _emit(args, f"pump_b{args.basis}.json", mio.dumps_json(summary, meta))
    return EXIT_OK


def _parse_coeffs(text: str, d: int) -> np.ndarray:
    try:
        c = np.array([complex(x.strip().replace(" ", "")) for x in text.split(",")])
    except ValueError:
        raise ValueError(f"cannot parse coefficients {text!r}") from None
    if c.size != d:
        raise ValueError(f"expected {d} coefficients, got {c.size}")
    norm = np.linalg.norm(c)
    return c / norm if norm > 0 else c


def cmd_simulate(args) -> int:
    cfg, text = _load(args)
    ex = Experiment(experiment_config(cfg, text))
    d = ex.dimension
    if args.coeffs is not None:
        c = _parse_coeffs(args.coeffs, d)
        label = "coeffs"
    else:
        try:
            b, m = (int(x) for x in args.state.split(":"))
        except ValueError:
            raise ValueError(f"--state must look like BASIS:INDEX, got {args.state!r}") from None
        if not (0 <= b <= d and 0 <= m < d):
            raise ValueError(f"state {args.state} out of range for d={d}")
        c = mub_bases(d).vector(b, m)
        label = args.state
    p = ex.probabilities(args.basis, c)[:, 0]
    raw, smeared = ex.output_spectrum(args.basis, c)
    payload = {"basis": args.basis, "input": label, "coefficients": _complex_list(c),
               "probabilities": p.tolist(),
               "relative": (p / p.sum()).tolist() if p.sum() > 0 else [0.0] * d}
    counting = ex.config.counting
    if args.counts or counting.enabled:
        if p.sum() > 0:
            rec = ex.count(p, 0)
            payload["counts"] = list(rec.counts)
            payload["count_seed"] = rec.seed
        else:
            payload["counts"] = [0] * d
    meta = mio.metadata(cfg, command="simulate")
    rows = zip(ex.output_grid.nu, raw, smeared)
    spectrum = mio.dumps_csv(("frequency_THz", "intensity", "smeared"), rows, meta)
    if args.out is None:
        sys.stdout.write(spectrum if args.format == "csv" else mio.dumps_json(payload, meta))
    else:
        _emit(args, "simulate.json", mio.dumps_json(payload, meta))
        _emit(args, "spectrum.csv", spectrum)
    return EXIT_OK


def cmd_tomography(args) -> int:
    cfg, text = _load(args)
    ex = Experiment(experiment_config(cfg, text))
    meta = mio.metadata(cfg, command="tomography")
    results, converged, csvs = {}, True, {}
    for b in ex.config.selected_bases():
        r = ex.tomography(b)
        converged &= r.converged
        results[str(b)] = {**r.to_dict(), "mean_fidelity": r.mean_fidelity()}
        cm = crosstalk_matrix(ex.probabilities(b, ex.probes.states))
        header = ["channel"] + [f"probe_{pb}_{pm}" for pb, pm in ex.probes.labels]
        csvs[b] = mio.dumps_csv(header, [[c, *row] for c, row in enumerate(cm)], meta)
    mean = float(np.mean([v["mean_fidelity"] for v in results.values()]))
    payload = {"bases": results, "mean_fidelity": mean, "converged": converged}
    if args.out is None:
        if args.format == "csv":
            sys.stdout.write("".join(csvs.values()))
        else:
            sys.stdout.write(mio.dumps_json(payload, meta))
    else:
        _emit(args, "tomography.json", mio.dumps_json(payload, meta))
        for b, text in csvs.items():
            _emit(args, f"crosstalk_b{b}.csv", text)
    if not converged:
        raise NonConvergence("tomography solver did not converge for every channel")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, text = _load(args)
    sc = sweep_config(cfg, text)
    if args.threads < 1:
        raise ValueError("--threads must be >= 1")
    res = run_sweep(sc, threads=args.threads)
    meta = mio.metadata({**cfg, "sweep": sc.to_dict()}, command="sweep")
    csv_text = mio.dumps_csv(("d", "ratio", "error", "feasible"),
                             [(d, r, e, int(f)) for d, r, e, f in res.rows()], meta)
    if args.out is None:
        sys.stdout.write(csv_text if args.format == "csv" else mio.dumps_json(res.to_dict(), meta))
    else:
        _emit(args, "sweep.csv", csv_text)
        if args.format == "json":
            _emit(args, "sweep.json", mio.dumps_json(res.to_dict(), meta))
    return EXIT_OK


COMMANDS = {
    "mubs": cmd_mubs,
    "compile-pump": cmd_compile_pump,
    "simulate": cmd_simulate,
    "tomography": cmd_tomography,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NonConvergence as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ConfigError, DimensionError, PumpError, GridError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
