"""
DGBO Artifacts
Versioned on-disk formats for fields, ground states, trajectories and
reports. Numbers are written with 17 significant digits so values
round-trip exactly.
"""
import csv
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

from src.core.evolution import TrajectoryRecord
from src.core.exceptions import InvalidInputError
from src.core.ground_state import GroundState, certify_ground_state
from src.core.spectral import Field, ModelParams, make_grid

logger = logging.getLogger(__name__)

FIELD_HEADER = "# dgbo-field v1"
GROUND_STATE_FORMAT = "dgbo-ground-state"
SNAPSHOTS_FORMAT = "dgbo-snapshots"
FORMAT_VERSION = 1
NUMBER_FORMAT = "%.17g"

PathLike = Union[str, Path]


def sanitize(value: Any) -> Any:
    """Recursively replace non-finite floats with None and numpy scalars with Python ones."""
    if isinstance(value, Mapping):
        return {str(key): sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(item) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def canonical_json(payload: Any) -> str:
    return json.dumps(sanitize(payload), sort_keys=True, allow_nan=False, separators=(",", ":"))


def digest(payload: Any) -> str:
    """SHA-256 of the canonical JSON form."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def write_json(path: PathLike, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(sanitize(payload), sort_keys=True, indent=2, allow_nan=False) + "\n")
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    return json.loads(Path(path).read_text())


def write_field(path: PathLike, field: Field) -> Path:
    """Write a field dump: two header lines, then x,value rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(f"{FIELD_HEADER}\n")
        handle.write(f"# n_points={field.grid.n_points} length={NUMBER_FORMAT % field.grid.length}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["x", "value"])
        for x, value in zip(field.grid.x, field.samples):
            writer.writerow([NUMBER_FORMAT % x, NUMBER_FORMAT % value])
    return path


def read_field(path: PathLike) -> Field:
    """
    Read a field dump written by ``write_field``.

    Raises:
        InvalidInputError: If the header is missing or the data is malformed
    """
    path = Path(path)
    with open(path) as handle:
        header = handle.readline().strip()
        if header != FIELD_HEADER:
            raise InvalidInputError(f"{path} is not a field dump (header {header!r})")
        meta = dict(item.split("=", 1) for item in handle.readline().lstrip("#").split())
        try:
            grid = make_grid(int(meta["n_points"]), float(meta["length"]))
        except KeyError as exc:
            raise InvalidInputError(f"{path} header lacks {exc}") from exc
        rows = list(csv.DictReader(handle))
    if len(rows) != grid.n_points:
        raise InvalidInputError(f"{path} has {len(rows)} rows, expected {grid.n_points}")
    return Field(grid, np.array([float(row["value"]) for row in rows]))


def ground_state_payload(state: GroundState, profile_file: str) -> Dict[str, Any]:
    return {
        "format": GROUND_STATE_FORMAT,
        "version": FORMAT_VERSION,
        "beta": state.params.beta,
        "k": state.params.k,
        "regime": state.params.regime,
        "grid": {"n_points": state.grid.n_points, "length": state.grid.length},
        "residual": state.residual,
        "iterations": state.iterations,
        "mass": state.mass,
        "energy": state.energy,
        "sharpness_ratio": state.sharpness_ratio,
        "certified": state.certified,
        "certificate_failures": list(state.certificate_failures),
        "identity_report": state.identity_report.to_dict(),
        "residual_history": list(state.residual_history),
        "profile_file": profile_file,
    }


def write_ground_state(
    directory: PathLike,
    state: GroundState,
    provenance: Optional[Dict[str, Any]] = None,
    stem: str = "ground_state",
) -> Path:
    """Write ``<stem>.json`` and the companion ``<stem>.csv`` profile; returns the JSON path."""
    directory = Path(directory)
    profile_file = f"{stem}.csv"
    write_field(directory / profile_file, state.profile)
    payload = ground_state_payload(state, profile_file)
    if provenance:
        payload["provenance"] = provenance
    return write_json(directory / f"{stem}.json", payload)


def read_ground_state(path: PathLike) -> GroundState:
    """
    Load a ground state and re-certify its profile.

    Raises:
        InvalidInputError: If the document is not a ground-state artifact
    """
    path = Path(path)
    payload = read_json(path)
    if payload.get("format") != GROUND_STATE_FORMAT or payload.get("version") != FORMAT_VERSION:
        raise InvalidInputError(f"{path} is not a version {FORMAT_VERSION} ground-state artifact")
    params = ModelParams(payload["beta"], payload["k"])
    profile = read_field(path.parent / payload["profile_file"])
    return certify_ground_state(
        profile,
        params,
        iterations=int(payload.get("iterations", 0)),
        history=payload.get("residual_history", ()),
    )


def write_trajectory(path: PathLike, record: TrajectoryRecord) -> Path:
    """CSV with columns t, mass, energy, h_half_beta, linf."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "mass", "energy", "h_half_beta", "linf"])
        for t, pair, amplitude in zip(record.times, record.conserved, record.linf):
            writer.writerow([NUMBER_FORMAT % value for value in (t, pair.mass, pair.energy, pair.h_half_beta, amplitude)])
    return path


def write_snapshots(directory: PathLike, record: TrajectoryRecord) -> Path:
    """
    Write stored snapshots as field dumps plus an index; returns the index path.

    The index ``snapshots.json`` lists ``{t, file}`` per snapshot, with files
    relative to the index.

    Raises:
        InvalidInputError: If the record carries no snapshots
    """
    if record.snapshots is None:
        raise InvalidInputError("trajectory was evolved without store_snapshots")
    directory = Path(directory)
    entries = []
    for index, (t, snapshot) in enumerate(zip(record.times, record.snapshots)):
        name = f"snapshots/snapshot_{index:05d}.csv"
        write_field(directory / name, snapshot)
        entries.append({"t": t, "file": name})
    payload = {"format": SNAPSHOTS_FORMAT, "version": FORMAT_VERSION, "snapshots": entries}
    return write_json(directory / "snapshots.json", payload)


def trajectory_summary(record: TrajectoryRecord) -> Dict[str, Any]:
    return {
        "beta": record.params.beta,
        "k": record.params.k,
        "grid": {"n_points": record.grid.n_points, "length": record.grid.length},
        "status": record.status,
        "exploratory": record.exploratory,
        "t_final": record.times[-1],
        "outputs": len(record.times),
        "mass_drift": record.mass_drift,
        "energy_drift": record.energy_drift,
    }
