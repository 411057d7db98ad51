"""Command-line front end: simulate, estimate, sweep, image, calibrate and chi2.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .coherence import SourceScene
from .errors import (CalibrationError, ConsistencyError, InsufficientDataError,
                     InvalidSceneError, NoFiniteInverseError, TruncationError,
                     UnidentifiablePhaseError)
from .estimation import (MLEOptions, expected_fringe_counts, fit_phase_calibration,
                         mle_estimate, moment_nbar, observed_fringe_counts,
                         precision_sweep, reduced_chi_squared)
from .imaging import (DetectorArray, NoiseModel, add_cdc_noise, bandlimited_reference,
                      forward_coherence_map, image_metrics, reconstruct_image)
from .photon_stats import ThermalModeParams
from .simulator import PhaseSchedule, Scheme, degrade_to_click, restrict_to_phase, sample_events

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

_UNITS = {"nm": 1e-9, "um": 1e-6, "µm": 1e-6, "mm": 1e-3, "cm": 1e-2, "m": 1.0}
_LENGTH = re.compile(r"^\s*([-+0-9.eE]+)\s*(nm|um|µm|mm|cm|m)?\s*$")


class UsageError(Exception):
    pass


def length(text: str) -> float:
    """Parse a length with an optional unit suffix into metres."""
    m = _LENGTH.match(str(text))
    if not m:
        raise argparse.ArgumentTypeError(f"not a length: {text!r}")
    try:
        value = float(m.group(1))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a length: {text!r}") from None
    return value * _UNITS[m.group(2) or "m"]


def int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def str_list(text: str) -> list:
    return [v.strip() for v in text.split(",") if v.strip()]


def outcome_list(text: str) -> list:
    """``"0,1:1,0:1,1"`` -> ``[(0, 1), (1, 0), (1, 1)]``."""
    try:
        out = [tuple(int(v) for v in part.split(",")) for part in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fringe list {text!r}") from None
    if not out or any(len(o) != 2 or min(o) < 0 for o in out):
        raise argparse.ArgumentTypeError(f"bad fringe list {text!r}")
    return out


def read_config_file(path) -> list:
    """Flat ``key = value`` file as argv tokens; ``#`` starts a comment."""
    argv = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            argv.append(flag)
        elif value.lower() not in ("false", "no", "off"):
            argv += [flag, value]
    return argv


def _truth_args(p, required=True):
    p.add_argument("--gamma", type=float, required=required, help="|gamma| of the source")
    p.add_argument("--phi", type=float, required=required, help="CDC phase, radians")
    p.add_argument("--nbar", type=float, default=1.0 if required else None,
                   help="mean photon number per mode")


def _schedule_args(p):
    p.add_argument("--phases", type=int, default=35, help="number of applied phases")
    p.add_argument("--schedule", choices=("uniform", "random"), default="uniform")


def _schedule(args):
    if args.phases < 1:
        raise UsageError("--phases must be at least 1")
    if args.schedule == "random":
        return PhaseSchedule.random(args.phases, args.seed)
    return PhaseSchedule.uniform(args.phases)


def _truth(args):
    try:
        return ThermalModeParams.from_values(args.nbar, args.gamma, args.phi)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdcimaging", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value file of default flags")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads for parallel stages (results do not depend on it)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic event file")
    _truth_args(p)
    _schedule_args(p)
    p.add_argument("--events", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="count")
    p.add_argument("--fixed-phase", type=float, help="applied phase for the traditional scheme")
    p.add_argument("--assignment", choices=("random", "round-robin"), default="random")
    p.add_argument("--drift", type=float, default=0.0, help="phase drift, radians per event")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="maximum-likelihood CDC estimate")
    p.add_argument("events")
    p.add_argument("--scheme", choices=[s.value for s in Scheme])
    p.add_argument("--phase-index", type=int)
    p.add_argument("--fit-nbar", action="store_true", help="fit nbar jointly for count data")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="precision versus dataset size")
    _truth_args(p)
    _schedule_args(p)
    p.add_argument("--sizes", type=int_list, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--schemes", type=str_list, default=["count", "click", "traditional"])
    p.add_argument("--traditional-phase-index", type=int, default=0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("image", help="coherence map and reconstruction of a scene")
    p.add_argument("--scene", required=True, help="scene CSV (pitch from sidecar or --pixel-pitch)")
    p.add_argument("--pixel-pitch", type=length)
    p.add_argument("--array", type=int, default=26, help="detectors per side")
    p.add_argument("--detector-pitch", type=length,
                   help="default: Nyquist pitch for the scene's field of view")
    p.add_argument("--distance", type=length, default=8.67)
    p.add_argument("--wavelength", type=length, default=700e-9)
    p.add_argument("--noise", choices=("none", "count", "click", "traditional"), default="none")
    p.add_argument("--noise-mode", choices=("polar", "cartesian"), default="polar")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output-dir", default=".")
    p.set_defaults(func=cmd_image)

    p = sub.add_parser("calibrate", help="phase-shifter calibration from a [1,1] fringe")
    p.add_argument("samples", help="CSV of position,count rows")
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("chi2", help="reduced chi-squared of fringes against a model")
    p.add_argument("--events", required=True)
    _truth_args(p, required=False)
    p.add_argument("--fringes", type=outcome_list, default=outcome_list("0,1:1,0:1,1:0,2:2,0"))
    p.add_argument("--dof", type=int, default=32)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_chi2)
    return parser


def _config_echo(args) -> dict:
    """Resolved flags; output locations and thread count do not affect results and are left out."""
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "threads", "output", "output_dir"):
            continue
        out[k] = [list(x) if isinstance(x, tuple) else x for x in v] if isinstance(v, list) else v
    return out


def _emit(obj, path):
    if path:
        io.write_json(obj, path)
    else:
        sys.stdout.write(io.dumps(obj))


def cmd_simulate(args):
    if args.events < 1:
        raise UsageError("--events must be at least 1")
    scheme = Scheme(args.scheme)
    if (scheme is Scheme.TRADITIONAL) != (args.fixed_phase is not None):
        raise UsageError("--fixed-phase is required for, and only for, --scheme traditional")
    truth = _truth(args)
    schedule = PhaseSchedule.fixed(args.fixed_phase) if args.fixed_phase is not None else _schedule(args)
    data = sample_events(truth, schedule, args.events, args.seed, args.assignment, args.drift)
    if scheme is Scheme.CLICK:
        data = degrade_to_click(data)
    elif scheme is Scheme.TRADITIONAL:
        data = restrict_to_phase(data, 0)
    io.write_events(data, args.output, _config_echo(args))


def cmd_estimate(args):
    data, header = io.read_events(args.events)
    scheme = Scheme(args.scheme) if args.scheme else data.scheme
    notes = []
    if scheme is Scheme.TRADITIONAL:
        if args.phase_index is None and len(data.schedule) > 1:
            raise UsageError("--scheme traditional needs --phase-index")
        data = restrict_to_phase(data, args.phase_index or 0)
        notes.append(f"restricted to phase index {args.phase_index or 0}")
    elif args.phase_index is not None:
        raise UsageError("--phase-index only applies to --scheme traditional")
    if scheme is Scheme.COUNT and not data.number_resolving:
        raise UsageError("count scheme needs a photon-number-resolved event file")
    options = MLEOptions(fit_nbar=True) if args.fit_nbar else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = mle_estimate(data, scheme, options)
    _emit({"schema": "cdcimaging.estimate", "version": io.SCHEMA_VERSION,
           "config": _config_echo(args), "seed": header.get("seed"),
           "truth": header.get("truth"), "result": result.to_dict(),
           "warnings": [str(w.message) for w in caught], "notes": notes}, args.output)


def cmd_sweep(args):
    if args.trials < 2:
        raise UsageError("--trials must be at least 2")
    if not args.sizes or min(args.sizes) < 1:
        raise UsageError("--sizes must be positive")
    try:
        schemes = [Scheme(s) for s in args.schemes]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stats = precision_sweep(_truth(args), _schedule(args), args.sizes, args.trials, schemes,
                            args.seed, args.traditional_phase_index, args.threads)
    io.write_sweep_csv(stats, args.output)
    io.write_json({"schema": "cdcimaging.sweep", "version": io.SCHEMA_VERSION,
                   "config": _config_echo(args)}, str(args.output) + ".json")


def run_image(scene: SourceScene, array: DetectorArray, noise: NoiseModel | None):
    """Library pipeline behind ``image``: map, optional noise, reconstruction, metrics."""
    cmap = forward_coherence_map(scene, array)
    if noise is not None:
        cmap = add_cdc_noise(cmap, noise)
    rec = reconstruct_image(cmap, scene.shape, scene.pixel_pitch, scene.center_offset)
    reference = bandlimited_reference(scene, array)
    metrics = {"vs_bandlimited": image_metrics(rec.image, reference).to_dict(),
               "vs_original": image_metrics(rec.image, scene).to_dict(),
               "negative_mass": rec.negative_mass}
    return cmap, rec, metrics


def cmd_image(args):
    if args.noise != "none" and args.seed is None:
        raise UsageError("--seed is required when --noise is set")
    scene = io.read_scene_csv(args.scene, args.pixel_pitch)
    field = max(scene.shape) * scene.pixel_pitch
    if args.detector_pitch is None:
        array = DetectorArray.for_field(args.array, field, args.distance, args.wavelength)
    else:
        array = DetectorArray(args.array, args.detector_pitch, args.distance, args.wavelength)
    noise = None
    if args.noise != "none":
        base = NoiseModel.for_scheme(args.noise, args.seed)
        noise = NoiseModel(base.magnitude_std, base.phase_std, args.seed, args.noise_mode)
    cmap, rec, metrics = run_image(scene, array, noise)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_coherence_csv(cmap, out / "coherence.csv")
    io.write_scene_csv(rec.image, out / "reconstruction.csv")
    io.write_pgm(rec.image, out / "reconstruction.pgm")
    io.write_json({"schema": "cdcimaging.image", "version": io.SCHEMA_VERSION,
                   "config": _config_echo(args), "seed": args.seed, "metrics": metrics,
                   "detector_pitch": array.pitch}, out / "metrics.json")


def cmd_calibrate(args):
    try:
        samples = np.loadtxt(args.samples, delimiter=",", ndmin=2)
    except ValueError:
        # tolerate a header row
        samples = np.loadtxt(args.samples, delimiter=",", ndmin=2, skiprows=1)
    curve = fit_phase_calibration(samples, args.degree, refine=not args.no_refine)
    _emit({"schema": "cdcimaging.calibration", "version": io.SCHEMA_VERSION,
           "config": _config_echo(args), "curve": curve.to_dict()}, args.output)


def cmd_chi2(args):
    data, header = io.read_events(args.events)
    if not data.number_resolving:
        raise UsageError("chi2 needs a photon-number-resolved event file")
    truth = header.get("truth") or {}
    gamma = args.gamma if args.gamma is not None else truth.get("magnitude")
    phi = args.phi if args.phi is not None else truth.get("phase")
    if gamma is None or phi is None:
        raise UsageError("--gamma and --phi are required when the file carries no truth")
    nbar = args.nbar if args.nbar is not None else moment_nbar(data)
    params = ThermalModeParams.from_values(nbar, gamma, phi)
    obs = observed_fringe_counts(data, args.fringes)
    exp = expected_fringe_counts(data, params, args.fringes)
    values = {f"{x},{y}": reduced_chi_squared(obs[(x, y)], exp[(x, y)], args.dof)
              for x, y in args.fringes}
    _emit({"schema": "cdcimaging.chi2", "version": io.SCHEMA_VERSION,
           "config": _config_echo(args), "model": {"gamma": gamma, "phi": phi, "nbar": nbar},
           "reduced_chi2": values}, args.output)


_DATA_ERRORS = (OSError, io.DataFormatError, InvalidSceneError, InsufficientDataError,
                CalibrationError, UnidentifiablePhaseError, KeyError, ValueError)
_NUMERIC_ERRORS = (TruncationError, ConsistencyError, NoFiniteInverseError,
                   FloatingPointError, np.linalg.LinAlgError)


SUBCOMMANDS = ("simulate", "estimate", "sweep", "image", "calibrate", "chi2")


def _merge_config(argv, cfg):
    """Insert config tokens so that explicit flags, parsed later, take precedence."""
    sub = next((i for i, a in enumerate(argv) if a in SUBCOMMANDS), None)
    if sub is None:
        return argv
    top, rest = [], []
    i = 0
    while i < len(cfg):
        takes_value = i + 1 < len(cfg) and not cfg[i + 1].startswith("--")
        group = cfg[i:i + 2] if takes_value else cfg[i:i + 1]
        (top if cfg[i] == "--threads" else rest).extend(group)
        i += len(group)
    return top + argv[:sub + 1] + rest + argv[sub + 1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if "--config" in argv:
        try:
            at = argv.index("--config")
            cfg = read_config_file(argv[at + 1])
        except (OSError, UsageError, IndexError) as exc:
            print(f"cdcimaging: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        argv = _merge_config(argv, cfg)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    if args.threads < 1:
        print("cdcimaging: error: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args)
    except UsageError as exc:
        print(f"cdcimaging {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _NUMERIC_ERRORS as exc:
        print(f"cdcimaging {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _DATA_ERRORS as exc:
        print(f"cdcimaging {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
