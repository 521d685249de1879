"""Command-line entry point: ``homsim <command> [options]``.

Exit codes: 0 success, 1 validation error, 2 fit did not converge. Every
failure prints one line ``homsim: <CODE>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    FitError,
    auto_visibility,
    fit_cosine,
    fit_gaussian,
    normalize_scan,
    retrieve_phase,
)
from .coincidence import ScanResult, delay_scan, multimode_map, phase_scan
from .description import (
    DEFAULT_SETUP,
    CircuitDescription,
    ElementSpec,
    SetupError,
    build_experiment,
    load_phase_file,
    parse_number,
    parse_setup,
)
from .elements import step_mask
from .state import MomentumGrid

SCHEMA = 1
CSV_HEADER = ["axis", "raw", "expected", "normalized", "stderr"]


class CommandError(Exception):
    def __init__(self, code: str, message: str, status: int = 1):
        super().__init__(message)
        self.code = code
        self.status = status


def _g(x) -> str:
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return None if not math.isfinite(x) else float(x)
    return x


def scan_to_csv(scan: ScanResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in zip(scan.axis, scan.raw_counts, scan.expected, scan.normalized, scan.stderr):
        w.writerow([_g(row[0]), str(int(row[1])), _g(row[2]), _g(row[3]), _g(row[4])])
    return buf.getvalue()


def read_scan_csv(path, kind: str = "auto") -> ScanResult:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise CommandError("E_IO", f"{path}: expected header {','.join(CSV_HEADER)}")
        rows = [r for r in reader if r]
    try:
        data = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise CommandError("E_IO", f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 5:
        raise CommandError("E_IO", f"{path}: expected 5 columns")
    if kind == "auto":
        # delays are metre-scale (~1e-4); phases span radians
        kind = "delay" if np.max(np.abs(data[:, 0])) < 1e-2 else "phase"
    return ScanResult(data[:, 0], data[:, 1].astype(np.int64), data[:, 2], data[:, 3],
                      data[:, 4], kind=kind)


def summary(command: str, params: dict, seed, **results) -> str:
    keys = ("alpha", "beta", "visibility", "phi_retrieved", "sigma")
    body = {
        "schema": SCHEMA,
        "command": command,
        "params": params,
        "results": {k: results.pop(k, None) for k in keys},
        "seed": seed,
    }
    body.update(results)
    return json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"


def plot_data(columns, header: str) -> str:
    lines = ["# " + header]
    for row in zip(*columns):
        lines.append(" ".join(_g(v) for v in row))
    return "\n".join(lines) + "\n"


def _write(path, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _number(text: str) -> float:
    try:
        return parse_number(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_seed() -> int:
    env = os.environ.get("HOMSIM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CommandError("E_VALUE", f"HOMSIM_SEED must be an integer, got {env!r}") from None


def _load_description(args) -> tuple[CircuitDescription, Path]:
    if args.setup:
        path = Path(args.setup)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise CommandError("E_IO", f"cannot read setup file: {exc}") from None
        desc = parse_setup(text)
        base = path.parent
    else:
        desc = parse_setup(DEFAULT_SETUP)
        base = Path(".")
    if getattr(args, "phi", None) is not None:
        idler = tuple(
            ElementSpec("phase_step", args.phi) if e.kind == "phase_step" else e
            for e in desc.idler
        )
        if not any(e.kind == "phase_step" for e in idler):
            idler = idler + (ElementSpec("phase_step", args.phi),)
        desc = replace(desc, idler=idler)
    return desc, base


def _experiment(args):
    desc, base = _load_description(args)
    exp = build_experiment(desc, base)
    overrides = {}
    if args.pair_rate is not None:
        overrides["pair_rate"] = args.pair_rate
    if args.time is not None:
        overrides["integration_time"] = args.time
    if overrides:
        exp = replace(exp, model=replace(exp.model, **overrides))
    return desc, exp


def _common_params(args, seed) -> dict:
    return {
        "setup": args.setup,
        "trials": args.trials,
        "seed": seed,
        "pair_rate": args.pair_rate,
        "time": args.time,
    }


def _safe_retrieve(c, alpha, beta):
    try:
        return retrieve_phase(c, alpha, beta)
    except ValueError:
        return None


def cmd_delay_scan(args, seed):
    desc, exp = _experiment(args)
    lc = exp.coherence.coherence_length
    lo = -5 * lc if args.dl_min is None else args.dl_min
    hi = 5 * lc if args.dl_max is None else args.dl_max
    if args.dl_steps < 1:
        raise CommandError("E_VALUE", "--dl-steps must be >= 1")
    delays = np.linspace(lo, hi, args.dl_steps)
    scan = delay_scan(exp.circuit, None, delays, source=exp.source, model=exp.model,
                      coherence=exp.coherence, seed=seed, trials=args.trials)
    if args.emit_plot:
        _write(args.emit_plot, plot_data((scan.axis, scan.normalized, scan.stderr),
                                         "delay_m normalized stderr"))
    if args.format == "csv":
        return scan_to_csv(scan), 0
    results = {}
    status = 0
    if np.any(np.isclose(delays, 0.0, rtol=0, atol=1e-12 * max(abs(lo), abs(hi), 1e-300))):
        vis = auto_visibility(scan)
        results["visibility"] = vis.v
        results["phi_retrieved"] = _safe_retrieve(vis.c_extremum, exp.model.alpha, exp.model.beta)
    if len(delays) >= 7:
        fit = fit_gaussian(scan.axis, scan.normalized, scan.stderr)
        results["sigma"] = fit["sigma"]
        results["converged"] = fit.converged
        if not fit.converged:
            status = 2
            print(f"homsim: E_FIT: {fit.message}", file=sys.stderr)
    params = _common_params(args, seed) | {
        "phi": args.phi, "dl_min": lo, "dl_max": hi, "dl_steps": args.dl_steps,
    }
    return summary("delay-scan", params, seed, scan=_scan_rows(scan), **results), status


def _scan_rows(scan: ScanResult):
    return [dict(zip(CSV_HEADER, (a, int(r), e, n, s)))
            for a, r, e, n, s in zip(scan.axis, scan.raw_counts, scan.expected,
                                     scan.normalized, scan.stderr)]


def cmd_phase_scan(args, seed):
    desc, exp = _experiment(args)
    if args.phi_steps < 1:
        raise CommandError("E_VALUE", "--phi-steps must be >= 1")
    phis = np.linspace(0.0, 2 * np.pi, args.phi_steps)
    scan = phase_scan(exp.model, phis, args.dl, coherence=exp.coherence, seed=seed,
                      trials=args.trials)
    if args.emit_plot:
        _write(args.emit_plot, plot_data((scan.axis, scan.normalized, scan.stderr),
                                         "phi_rad normalized stderr"))
    if args.format == "csv":
        return scan_to_csv(scan), 0
    results = {}
    try:
        fit = fit_cosine(scan.axis, scan.normalized, _positive(scan.stderr))
        results = {"alpha": fit["alpha"], "beta": fit["beta"]}
    except FitError as exc:
        print(f"homsim: E_FIT: {exc}", file=sys.stderr)
    params = _common_params(args, seed) | {"phi_steps": args.phi_steps, "dl": args.dl}
    return summary("phase-scan", params, seed, scan=_scan_rows(scan), **results), 0


def _positive(err):
    err = np.asarray(err, dtype=float)
    if np.all(err > 0):
        return err
    return None


def cmd_multimode(args, seed):
    desc, exp = _experiment(args)
    grid = MomentumGrid(args.grid_n, args.k_max)
    if args.mask_file:
        try:
            mask = load_phase_file(args.mask_file, grid)
        except OSError as exc:
            raise CommandError("E_IO", f"cannot read mask file: {exc}") from None
    else:
        steps = [e.value for e in desc.idler if e.kind == "phase_step"]
        mask = step_mask(sum(steps) if steps else np.pi, grid)
    m = multimode_map(mask, model=exp.model, delay=args.dl, coherence=exp.coherence)
    keep = m.half_plane
    labels = grid.labels()
    ix = labels[:, 0].reshape(grid.n, grid.n)[keep]
    iy = labels[:, 1].reshape(grid.n, grid.n)[keep]
    kx, ky = ix * grid.spacing, iy * grid.spacing
    phase, c = m.phase[keep], m.values[keep]
    if args.emit_plot:
        _write(args.emit_plot, plot_data((kx, ky, c), "kx ky C"))
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ix", "iy", "kx", "ky", "phase", "C"])
        for row in zip(ix, iy, kx, ky, phase, c):
            w.writerow([str(int(row[0])), str(int(row[1]))] + [_g(v) for v in row[2:]])
        return buf.getvalue(), 0
    params = {"grid_n": args.grid_n, "k_max": args.k_max, "mask_file": args.mask_file,
              "phi": args.phi, "dl": args.dl, "setup": args.setup}
    stats = {"modes": int(keep.sum()), "c_min": float(np.min(c)), "c_max": float(np.max(c)),
             "c_mean": float(np.mean(c))}
    return summary("multimode", params, seed, map=stats), 0


def cmd_fit(args, seed):
    if not args.input:
        raise CommandError("E_VALUE", "fit needs --in PATH")
    scan = read_scan_csv(args.input, args.kind)
    params = {"in": args.input, "kind": scan.kind, "alpha": args.alpha, "beta": args.beta}
    if scan.kind == "phase":
        try:
            fit = fit_cosine(scan.axis, scan.normalized, _positive(scan.stderr))
        except FitError as exc:
            raise CommandError("E_FIT", str(exc), status=2) from None
        return summary("fit", params, seed, alpha=fit["alpha"], beta=fit["beta"],
                       errors=fit.errors, converged=True), 0
    _, exp = _experiment(args)
    acc = exp.model.accidental_rate * exp.model.integration_time * args.trials
    try:
        # re-estimate the baseline from the far-delay points, as for measured data
        scan = normalize_scan(scan, exp.coherence.coherence_length, accidentals=acc)
    except ValueError as exc:
        print(f"homsim: W_BASELINE: keeping the file's normalization ({exc})", file=sys.stderr)
    fit = fit_gaussian(scan.axis, scan.normalized, _positive(scan.stderr))
    vis = auto_visibility(scan)
    out = summary("fit", params, seed, sigma=fit["sigma"], visibility=vis.v,
                  kind=vis.kind, phi_retrieved=_safe_retrieve(vis.c_extremum, args.alpha, args.beta),
                  fit=fit.params, errors=fit.errors, converged=fit.converged)
    if not fit.converged:
        print(f"homsim: E_FIT: {fit.message}", file=sys.stderr)
        return out, 2
    return out, 0


def cmd_retrieve(args, seed):
    if args.c is None and not args.input:
        raise CommandError("E_VALUE", "retrieve needs --c VALUE or --in PATH")
    values = args.c if args.c is not None else list(read_scan_csv(args.input).normalized)
    phi = [retrieve_phase(v, args.alpha, args.beta) for v in values]
    params = {"c": values, "in": args.input, "alpha": args.alpha, "beta": args.beta}
    return summary("retrieve", params, seed, phi_retrieved=phi[0] if len(phi) == 1 else phi), 0


COMMANDS = {
    "delay-scan": cmd_delay_scan,
    "phase-scan": cmd_phase_scan,
    "multimode": cmd_multimode,
    "fit": cmd_fit,
    "retrieve": cmd_retrieve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--setup", help="setup description file (default: built-in two-arm setup)")
    common.add_argument("--seed", type=int, help="master seed (default: $HOMSIM_SEED or 0)")
    common.add_argument("--trials", type=int, default=1, help="exposures summed per point")
    common.add_argument("--pair-rate", type=float, help="detected pairs per second")
    common.add_argument("--time", type=float, help="integration time per point, s")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--emit-plot", help="also write gnuplot-style columns here")
    common.add_argument("--phi", type=_number, help="idler phase jump, radians (pi/6 etc. accepted)")
    common.add_argument("--alpha", type=_number, default=1.0)
    common.add_argument("--beta", type=_number, default=0.0)
    common.add_argument("--dl", type=float, default=0.0, help="path difference, m")

    p = sub.add_parser("delay-scan", parents=[common], help="coincidences versus delay")
    p.add_argument("--dl-min", type=float)
    p.add_argument("--dl-max", type=float)
    p.add_argument("--dl-steps", type=int, default=41)

    p = sub.add_parser("phase-scan", parents=[common], help="coincidences versus phase jump")
    p.add_argument("--phi-steps", type=int, default=13)

    p = sub.add_parser("multimode", parents=[common], help="per-mode coincidence map")
    p.add_argument("--grid-n", type=int, default=201)
    p.add_argument("--k-max", type=float, default=1.0)
    p.add_argument("--mask-file", help="n x n matrix of radians")

    p = sub.add_parser("fit", parents=[common], help="fit a scan CSV")
    p.add_argument("--in", dest="input", help="scan CSV")
    p.add_argument("--kind", choices=("auto", "delay", "phase"), default="auto")

    p = sub.add_parser("retrieve", parents=[common], help="invert C = alpha (1 - cos phi) + beta")
    p.add_argument("--c", type=_number, nargs="+")
    p.add_argument("--in", dest="input", help="scan CSV; uses the normalized column")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return 1 if exc.code else 0
    if args.format is None:
        args.format = "json" if args.command in ("fit", "retrieve") else "csv"
    try:
        seed = args.seed if args.seed is not None else _default_seed()
        text, status = COMMANDS[args.command](args, seed)
        _write(args.out, text)
        return status
    except CommandError as exc:
        print(f"homsim: {exc.code}: {exc}", file=sys.stderr)
        return exc.status
    except SetupError as exc:
        print(f"homsim: E_SETUP: {exc}", file=sys.stderr)
        return 1
    except FitError as exc:
        print(f"homsim: E_FIT: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"homsim: E_IO: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError) as exc:
        print(f"homsim: E_VALUE: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
