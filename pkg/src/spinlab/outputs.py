"""Output writers: JSON, CSV and the sidecar run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

FLOAT_FMT = "%.17g"


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps_json(obj) -> str:
    """Deterministic JSON; floats use repr, which round-trips exactly."""
    return json.dumps(_clean(obj), indent=2) + "\n"


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_text(path: Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="")


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def manifest_path(output: Path) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")


def write_manifest(output: Path, command: str, argv: list[str], params: dict,
                   seed: int | None, version: str) -> Path:
    """Sidecar ``<output>.manifest.json`` holding everything needed to re-run."""
    manifest = {
        "command": command,
        "argv": list(argv),
        "params": params,
        "seed": seed,
        "version": version,
        "output": Path(output).name,
        "sha256": sha256_file(output),
    }
    path = manifest_path(output)
    write_text(path, dumps_json(manifest))
    return path
