"""Plain-text serialization of fields, reports and run manifests."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .wigner import PhaseSpaceField


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def field_metadata(field: PhaseSpaceField, time: float | None = None) -> dict:
    meta = {
        "nq": field.nq,
        "np": field.np,
        "q_extent": list(field.q_extent),
        "p_extent": list(field.p_extent),
        "hbar": field.hbar,
        "mass": field.mass,
    }
    if time is not None:
        meta["time"] = float(time)
    return meta


def export_field(field: PhaseSpaceField, path, time: float | None = None) -> Path:
    """CSV rows ``q,p,W`` (q outer, 17 significant digits) plus a ``.json`` metadata file."""
    path = Path(path)
    q, p = field.mesh()
    rows = np.column_stack([q.ravel(), p.ravel(), field.values.ravel()])
    with open(path, "w") as fh:
        fh.write("# q p W\n")
        np.savetxt(fh, rows, fmt="%.17g", delimiter=",")
    _dump_json(field_metadata(field, time), path.with_suffix(".json"))
    return path


def import_field(path) -> PhaseSpaceField:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    values = data[:, 2].reshape(meta["nq"], meta["np"])
    return PhaseSpaceField(values, tuple(meta["q_extent"]), tuple(meta["p_extent"]), meta["hbar"], meta["mass"])


def write_reports(reports, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        for r in reports:
            fh.write(json.dumps(r.as_dict(), sort_keys=True) + "\n")
    return path


def read_reports(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(directory, payload: dict) -> Path:
    """Manifest with sha256 digests of every listed file; no timestamps."""
    directory = Path(directory)
    payload = dict(payload)
    payload["digests"] = {name: file_digest(directory / name) for name in sorted(payload.get("files", []))}
    path = directory / "manifest.json"
    _dump_json(payload, path)
    return path
