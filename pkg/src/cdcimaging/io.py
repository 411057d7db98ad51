"""Readers and writers for events, scenes, images, coherence maps and reports.

Every writer produces byte-identical output for identical input; floats are
written with ``repr`` precision so files round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .coherence import ComplexCoherence, SourceScene
from .imaging import CoherenceMap, DetectorArray
from .photon_stats import ThermalModeParams
from .simulator import Dataset, PhaseSchedule, Scheme

SCHEMA_VERSION = 1
EVENT_SCHEMA = "cdcimaging.events"
EVENT_FIELDS = ("phase_index", "x", "y")


class DataFormatError(ValueError):
    """A file does not match the expected format."""


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not valid JSON ({exc})") from exc


def _sidecar(path) -> Path:
    return Path(str(path) + ".json")


def params_to_dict(params: ThermalModeParams | None):
    if params is None:
        return None
    return {"nbar": params.mean_photon_number, "magnitude": params.cdc.magnitude,
            "phase": params.cdc.phase}


def params_from_dict(d):
    if d is None:
        return None
    return ThermalModeParams(float(d["nbar"]), ComplexCoherence(d["magnitude"], d["phase"]))


# events -------------------------------------------------------------------

def event_header(dataset: Dataset, config=None) -> dict:
    return {
        "schema": EVENT_SCHEMA,
        "version": SCHEMA_VERSION,
        "seed": dataset.seed,
        "truth": params_to_dict(dataset.truth),
        "schedule": {"mode": dataset.schedule.mode,
                     "applied_phases": dataset.schedule.applied_phases.tolist()},
        "scheme": dataset.scheme.value,
        "number_resolving": dataset.number_resolving,
        "rng": dataset.rng,
        "meta": dataset.meta,
        "config": config or {},
        "fields": list(EVENT_FIELDS),
        "n_events": len(dataset),
    }


def write_events(dataset: Dataset, path, config=None) -> None:
    """JSON-lines file: one header object, then one ``[k, x, y]`` array per event."""
    header = json.dumps(event_header(dataset, config), sort_keys=True, allow_nan=False)
    body = "".join(f"[{k}, {x}, {y}]\n" for k, x, y in
                   zip(dataset.phase_index.tolist(), dataset.x.tolist(), dataset.y.tolist()))
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        fh.write(body)


def read_events(path):
    """Inverse of :func:`write_events`; returns ``(dataset, header)``."""
    with open(path) as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: first line is not a JSON header") from exc
        if not isinstance(header, dict) or header.get("schema") != EVENT_SCHEMA:
            raise DataFormatError(f"{path}: not a {EVENT_SCHEMA} file")
        if header.get("version") != SCHEMA_VERSION:
            raise DataFormatError(f"{path}: unsupported schema version {header.get('version')}")
        text = fh.read()
    rows = text.split("\n")
    if rows and rows[-1] == "":
        rows.pop()
    if rows:
        cleaned = ",".join(rows)
        try:
            events = np.array(json.loads("[" + cleaned + "]"), dtype=np.int64).reshape(-1, 3)
        except (json.JSONDecodeError, ValueError) as exc:
            raise DataFormatError(f"{path}: malformed event line") from exc
    else:
        events = np.zeros((0, 3), dtype=np.int64)
    n = header.get("n_events")
    if n is not None and n != len(events):
        raise DataFormatError(f"{path}: header declares {n} events, found {len(events)}")
    sched = header["schedule"]
    dataset = Dataset(events[:, 0], events[:, 1], events[:, 2],
                      PhaseSchedule(sched["applied_phases"], sched["mode"]),
                      Scheme(header["scheme"]), bool(header["number_resolving"]),
                      header.get("seed"), params_from_dict(header.get("truth")),
                      header.get("rng", ""), header.get("meta") or {})
    return dataset, header


# scenes and images --------------------------------------------------------

def write_scene_csv(scene: SourceScene, path) -> None:
    """Intensity grid as CSV rows plus a ``.json`` sidecar with pitch and offset (metres)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in scene.intensity:
            w.writerow([repr(float(v)) for v in row])
    write_json({"pixel_pitch": scene.pixel_pitch, "center_offset": list(scene.center_offset),
                "units": "m", "shape": list(scene.shape)}, _sidecar(path))


def read_grid_csv(path) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DataFormatError(f"{path}: not a numeric CSV grid ({exc})") from exc


def read_scene_csv(path, pixel_pitch: float | None = None) -> SourceScene:
    """Scene from CSV; pitch comes from the sidecar unless given explicitly."""
    grid = read_grid_csv(path)
    offset = (0.0, 0.0)
    side = _sidecar(path)
    if side.exists():
        meta = read_json(side)
        offset = tuple(meta.get("center_offset", offset))
        if pixel_pitch is None:
            pixel_pitch = float(meta["pixel_pitch"])
    if pixel_pitch is None:
        raise DataFormatError(f"{path}: no sidecar metadata; pixel pitch must be given")
    return SourceScene(grid, pixel_pitch, offset)


def write_pgm(image, path) -> None:
    """Binary 16-bit PGM (P5, big-endian, maxval 65535) scaled to the image maximum."""
    a = np.asarray(image.intensity if isinstance(image, SourceScene) else image, dtype=float)
    a = np.clip(a, 0.0, None)
    peak = a.max()
    scaled = np.rint(a / peak * 65535) if peak > 0 else np.zeros_like(a)
    data = scaled.astype(">u2").tobytes()
    with open(path, "wb") as fh:
        fh.write(f"P5\n{a.shape[1]} {a.shape[0]}\n65535\n".encode("ascii"))
        fh.write(data)


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos)
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise DataFormatError(f"{path}: not a binary PGM")
    width, height, maxval = (int(t) for t in tokens[1:])
    dtype = ">u2" if maxval > 255 else "u1"
    pos += 1
    return np.frombuffer(raw[pos:], dtype=dtype, count=width * height).reshape(height, width)


# coherence maps -----------------------------------------------------------

def write_coherence_csv(cmap: CoherenceMap, path) -> None:
    """Rows ``bx_index, by_index, magnitude, phase``; array geometry in a sidecar."""
    N = cmap.array.size
    mag, ph = cmap.magnitude, cmap.phase
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bx_index", "by_index", "magnitude", "phase"])
        for j in range(2 * N - 1):
            for i in range(2 * N - 1):
                w.writerow([i - N + 1, j - N + 1, repr(float(mag[j, i])), repr(float(ph[j, i]))])
    a = cmap.array
    write_json({"size": a.size, "pitch": a.pitch, "distance": a.distance,
                "wavelength": a.wavelength, "units": "m"}, _sidecar(path))


def read_coherence_csv(path, array: DetectorArray | None = None) -> CoherenceMap:
    if array is None:
        meta = read_json(_sidecar(path))
        array = DetectorArray(meta["size"], meta["pitch"], meta["distance"], meta["wavelength"])
    N = array.size
    values = np.full((2 * N - 1, 2 * N - 1), np.nan, dtype=complex)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            i, j = int(row["bx_index"]) + N - 1, int(row["by_index"]) + N - 1
            values[j, i] = float(row["magnitude"]) * np.exp(1j * float(row["phase"]))
    # polar storage loses the last bit of Hermitian symmetry; restore it
    values = 0.5 * (values + np.conj(values[::-1, ::-1]))
    return CoherenceMap(values, array)


# sweep tables -------------------------------------------------------------

def write_sweep_csv(stats, path) -> None:
    from .estimation.sweep import SWEEP_COLUMNS
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for s in stats:
            w.writerow([s.scheme, s.dataset_size, s.n_trials]
                       + [repr(float(v)) for v in s.row()[3:]])


def read_sweep_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        out.append({"scheme": r["scheme"], "size": int(r["size"]), "n_trials": int(r["n_trials"]),
                    **{k: float(r[k]) for k in ("gamma_mean", "gamma_std", "phi_mean", "phi_std")}})
    return out


def load_test_pattern() -> SourceScene:
    """The shipped 128 x 128 geometric test scene (0.7 um pixels)."""
    from importlib.resources import files
    return read_scene_csv(files("cdcimaging") / "data" / "test_pattern.csv")
