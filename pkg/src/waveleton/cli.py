"""Command-line entry point.

Exit codes: 0 success, 2 missing input file, 3 invalid configuration,
4 numerical divergence, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import ClassifyConfig, classify, scale_approximation
from .errors import DivergenceError, WaveletonError
from .galerkin import multiscale_decompose
from .io import export_field, import_field, write_manifest, write_reports
from .moyal import evolve
from .scenario import Scenario, ScenarioError, resolve_path
from .wavelets import cascade_eval, DyadicGrid, daubechies_filter, fwt

EXIT_OK, EXIT_MISSING, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4, 5


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(config) -> Scenario:
    return Scenario.from_file(resolve_path(config))


def _out_dir(scenario: Scenario, out, many: bool) -> Path:
    if out is not None:
        return Path(out) / scenario.name if many else Path(out)
    if scenario.config["output"]["directory"]:
        return Path(scenario.config["output"]["directory"])
    return Path("runs") / scenario.name


def run_scenario(config, out=None, stride=None, backend=None, many: bool = False) -> int:
    """Run one scenario end to end and write its output directory."""
    try:
        path = resolve_path(config)
    except FileNotFoundError:
        _err(f"error: configuration file not found: {config}")
        return EXIT_MISSING
    try:
        scenario = Scenario.from_file(path)
        dyn = scenario.dynamics(stride=stride, backend=backend)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            initial = scenario.initial_field()
        scenario.check(initial, dyn)
    except ScenarioError as exc:
        _err(f"error: invalid configuration at {exc.path}: {exc.message}")
        return EXIT_CONFIG
    except (WaveletonError, ValueError) as exc:
        _err(f"error: invalid configuration: {exc}")
        return EXIT_CONFIG

    notes = [str(w.message) for w in caught]
    cfg = scenario.config
    try:
        if cfg["dynamics"]["enabled"]:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                traj = evolve(initial, scenario.potential(), dyn, edge_tol=cfg["dynamics"]["edge_tol"])
            notes += [str(w.message) for w in caught]
            times, fields = list(traj.times), list(traj.fields)
        else:
            times, fields = [0.0], [initial]
    except DivergenceError as exc:
        _err(f"error: numerical divergence at step {exc.step}")
        return EXIT_DIVERGED

    ccfg = scenario.classify_config()
    diag = cfg["diagnostics"]
    scale_filter = daubechies_filter(diag["scale_filter"])
    try:
        target = _out_dir(scenario, out, many)
        target.mkdir(parents=True, exist_ok=True)
        files, snapshots, reports = [], [], []
        for i, (t, f) in enumerate(zip(times, fields)):
            entry = {"index": i, "time": float(t)}
            if cfg["output"]["export_fields"]:
                name = f"snapshot_{i:04d}.csv"
                export_field(f, target / name, time=t)
                files += [name, name[:-4] + ".json"]
                entry["field"] = name
            for level in diag["scale_levels"]:
                name = f"scale{level}_{i:04d}.csv"
                export_field(scale_approximation(f, level, scale_filter), target / name, time=t)
                files += [name, name[:-4] + ".json"]
                entry.setdefault("scale_fields", {})[str(level)] = name
            reports.append(classify(f, config=ccfg, time=float(t)))
            entry["label"] = reports[-1].label
            snapshots.append(entry)
        write_reports(reports, target / "reports.jsonl")
        files.append("reports.jsonl")
        write_manifest(target, {"name": scenario.name, "version": __version__, "config": cfg,
                                "backend": dyn.backend, "stride": dyn.stride, "snapshots": snapshots,
                                "warnings": notes, "files": files})
    except OSError as exc:
        _err(f"error: cannot write output: {exc}")
        return EXIT_IO
    except WaveletonError as exc:
        _err(f"error: invalid configuration: {exc}")
        return EXIT_CONFIG
    labels = ", ".join(sorted({r.label for r in reports}))
    print(f"{scenario.name}: {len(fields)} snapshot(s) -> {target} [{labels}]")
    return EXIT_OK


def cmd_evolve(args) -> int:
    configs = args.config
    many = len(configs) > 1
    if args.jobs > 1 and many:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(run_scenario, configs, [args.out] * len(configs), [args.stride] * len(configs),
                                  [args.backend] * len(configs), [many] * len(configs)))
    else:
        codes = [run_scenario(c, args.out, args.stride, args.backend, many) for c in configs]
    return next((c for c in codes if c), EXIT_OK)


def cmd_wigner(args) -> int:
    try:
        scenario = _load(args.config[0])
        field = scenario.initial_field()
    except FileNotFoundError:
        _err(f"error: configuration file not found: {args.config[0]}")
        return EXIT_MISSING
    except ScenarioError as exc:
        _err(f"error: invalid configuration at {exc.path}: {exc.message}")
        return EXIT_CONFIG
    try:
        out = Path(args.out or f"{scenario.name}_wigner.csv")
        out.parent.mkdir(parents=True, exist_ok=True)
        export_field(field, out, time=0.0)
    except OSError as exc:
        _err(f"error: cannot write output: {exc}")
        return EXIT_IO
    print(json.dumps({"field": str(out), "total": field.total(), "purity": field.purity()}, sort_keys=True))
    return EXIT_OK


def _read_field(path):
    if not Path(path).exists():
        raise FileNotFoundError(path)
    return import_field(path)


def cmd_analyze(args) -> int:
    try:
        field = _read_field(args.field)
        ccfg = _load(args.config[0]).classify_config() if args.config else ClassifyConfig()
        report = classify(field, config=ccfg)
    except FileNotFoundError as exc:
        _err(f"error: file not found: {exc}")
        return EXIT_MISSING
    except ScenarioError as exc:
        _err(f"error: invalid configuration at {exc.path}: {exc.message}")
        return EXIT_CONFIG
    except (WaveletonError, OSError, ValueError) as exc:
        _err(f"error: {exc}")
        return EXIT_CONFIG
    text = json.dumps(report.as_dict(), sort_keys=True)
    if args.out:
        try:
            Path(args.out).write_text(text + "\n")
        except OSError as exc:
            _err(f"error: cannot write output: {exc}")
            return EXIT_IO
    print(text)
    return EXIT_OK


def cmd_decompose(args) -> int:
    try:
        field = _read_field(args.field)
        parts = multiscale_decompose(field, daubechies_filter(args.filter), args.level)
    except FileNotFoundError as exc:
        _err(f"error: file not found: {exc}")
        return EXIT_MISSING
    except (WaveletonError, ValueError) as exc:
        _err(f"error: {exc}")
        return EXIT_CONFIG
    try:
        out = Path(args.out or "decomposition")
        out.mkdir(parents=True, exist_ok=True)
        export_field(field.with_values(parts.slow), out / "slow.csv")
        for level, v in parts.fast.items():
            export_field(field.with_values(v), out / f"fast_{level:02d}.csv")
        energies = {str(k): v * field.cell_area for k, v in parts.energies().items()}
        (out / "energies.json").write_text(json.dumps(energies, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        _err(f"error: cannot write output: {exc}")
        return EXIT_IO
    print(json.dumps(energies, sort_keys=True))
    return EXIT_OK


def cmd_wavelet(args) -> int:
    try:
        filt = daubechies_filter(args.order)
    except WaveletonError as exc:
        _err(f"error: {exc}")
        return EXIT_CONFIG
    payload = {"name": filt.name, "lowpass": filt.lowpass.tolist(), "highpass": filt.highpass.tolist()}
    try:
        if args.cascade_level is not None:
            s = cascade_eval(filt, DyadicGrid(args.cascade_level, (0.0, float(filt.length - 1))))
            out = Path(args.out or f"{filt.name}_cascade.csv")
            np.savetxt(out, np.column_stack([s.x, s.phi, s.psi]), fmt="%.17g", delimiter=",", header="x phi psi")
            payload["cascade"] = str(out)
        if args.signal is not None:
            if not Path(args.signal).exists():
                _err(f"error: file not found: {args.signal}")
                return EXIT_MISSING
            x = np.loadtxt(args.signal, delimiter=",", ndmin=1).ravel()
            payload["coefficients"] = fwt(x, filt, args.levels).to_vector().tolist()
    except OSError as exc:
        _err(f"error: cannot write output: {exc}")
        return EXIT_IO
    except WaveletonError as exc:
        _err(f"error: {exc}")
        return EXIT_CONFIG
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="waveleton", description="Wavelet phase-space dynamics toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run scenario files")
    p.add_argument("config_pos", nargs="*", metavar="CONFIG")
    p.add_argument("--config", nargs="+", default=[])
    p.add_argument("--out")
    p.add_argument("--stride", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--backend", choices=["spectral", "wavelet"])
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("wigner", help="Wigner field of a scenario's initial state")
    p.add_argument("config_pos", nargs="*", metavar="CONFIG")
    p.add_argument("--config", nargs="+", default=[])
    p.add_argument("--out")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("analyze", help="pattern report of an exported field")
    p.add_argument("field")
    p.add_argument("--config", nargs="+", default=[])
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("decompose", help="slow/fast multiscale split of an exported field")
    p.add_argument("field")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--filter", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("wavelet", help="filter coefficients, cascade samples, transforms")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--cascade-level", type=int)
    p.add_argument("--signal")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_wavelet)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "config_pos"):
        args.config = list(args.config_pos) + list(args.config)
        if not args.config:
            _err("error: a scenario configuration is required")
            return EXIT_MISSING
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
