"""Input validation: manifest schema gate and typed CSV loading.

Every artifact directory written by the experiment CLI contains a
manifest.json whose schema_version names the artifact format.  Figures
produced from a format this package does not understand would be silently
wrong, so loading refuses anything but an exact match.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSIONS_SUPPORTED = frozenset({"1"})

# columns each figure kind consumes; extra columns are fine (the d-dependent
# argmax block in series.csv, for example), missing ones are a schema error
REQUIRED_COLUMNS = {
    "sweep": ["epsilon", "n", "replicas", "mean_gap", "stderr", "localized_flag"],
    "series": ["replica", "n", "log_w", "j", "i", "cesaro_j", "cesaro_i"],
    "l2": ["n", "ew2", "log_increment", "classification"],
    "rates": ["y_1", "ia", "iq_mean", "iq_stderr"],
}

IMAGE_SUFFIXES = {".png", ".svg"}


class SchemaError(Exception):
    """Input file does not match a supported artifact schema."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: validated inputs, kind, and output image path."""

    kind: str
    inputs: tuple[Path, ...]
    out: Path
    title: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in REQUIRED_COLUMNS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if self.out.suffix.lower() not in IMAGE_SUFFIXES:
            raise SchemaError(
                f"output must end in one of {sorted(IMAGE_SUFFIXES)}, got {self.out.name!r}"
            )
        for path in self.inputs:
            check_manifest(path)


def check_manifest(data_path: Path) -> dict:
    """Gate on the manifest.json sitting next to a data file.

    Returns the parsed manifest.  A missing or unreadable manifest, or one
    with an unrecognized schema_version, is a SchemaError: this package only
    renders artifacts whose format it can vouch for.
    """
    manifest_path = Path(data_path).parent / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text())
    except OSError as exc:
        raise SchemaError(f"no readable manifest.json next to {data_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"manifest.json next to {data_path} is not valid JSON: {exc}") from exc
    version = manifest.get("schema_version")
    if version not in SCHEMA_VERSIONS_SUPPORTED:
        raise SchemaError(
            f"unsupported schema_version {version!r} in {manifest_path} "
            f"(supported: {sorted(SCHEMA_VERSIONS_SUPPORTED)})"
        )
    return manifest


def load_csv(path: Path, kind: str) -> dict[str, list]:
    """Read a CSV into typed columns after validating the header for `kind`.

    Numeric cells become floats; the classification column stays text.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in header]
    if missing:
        raise SchemaError(f"{path} lacks required columns {missing} (header: {header})")
    if not body:
        raise SchemaError(f"{path} has a header but no data rows")
    idx = {c: header.index(c) for c in header}
    cols: dict[str, list] = {c: [] for c in header}
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path} line {r} has {len(row)} cells, header has {len(header)}")
        for c in header:
            cell = row[idx[c]]
            if c == "classification":
                cols[c].append(cell)
            else:
                try:
                    cols[c].append(float(cell))
                except ValueError as exc:
                    raise SchemaError(f"{path} line {r} column {c!r}: {exc}") from exc
    return cols


def load_json(path: Path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError(f"{path} must hold a JSON object")
    return obj
