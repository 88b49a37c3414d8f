"""Machine-readable reports: stable, diffable, archival.

Every report is a JSON document with sorted keys, an explicit schema
version, input content digests, and the seeds that reproduce its numbers.
The timestamp is the only field allowed to differ between two runs on
identical inputs.  CSV rendering flattens the same document into dotted
``key,value`` rows, except per-replicate simulation output, which gets a
proper tabular form.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from datetime import datetime, timezone
from pathlib import Path

REPORT_SCHEMA_VERSION = 1
TIMESTAMP_KEY = "timestamp"


def sha256_file(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def input_digest(path: str) -> dict:
    return {"path": str(path), "sha256": sha256_file(path)}


def base_report(command: str, tool_version: str, seed: int | None) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": tool_version,
        "command": command,
        "seed": seed,
        TIMESTAMP_KEY: datetime.now(timezone.utc).isoformat(),
    }


def _flat_items(doc, prefix=""):
    if isinstance(doc, dict):
        for key in sorted(doc):
            yield from _flat_items(doc[key], f"{prefix}{key}.")
    elif isinstance(doc, (list, tuple)):
        yield prefix[:-1], json.dumps(list(doc))
    elif isinstance(doc, bool):
        yield prefix[:-1], "true" if doc else "false"
    elif doc is None:
        yield prefix[:-1], ""
    else:
        yield prefix[:-1], repr(doc) if isinstance(doc, float) else str(doc)


def render_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("key", "value"))
    for key, value in _flat_items(doc):
        writer.writerow((key, value))
    return buf.getvalue()


def render_rows_csv(rows: list[dict]) -> str:
    """Tabular CSV for homogeneous row dicts (per-replicate output)."""
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0])
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if row[k] is None
                         else (repr(row[k]) if isinstance(row[k], float) else row[k])
                         for k in header])
    return buf.getvalue()


def render(doc: dict, fmt: str, rows: list[dict] | None = None) -> str:
    if fmt == "json":
        return render_json(doc)
    if fmt == "csv":
        if rows is not None:
            return render_rows_csv(rows)
        return render_csv(doc)
    raise ValueError(f"unknown format {fmt!r}")


def strip_timestamp(text: str) -> str:
    """Report text minus the timestamp line; used for byte-level comparison."""
    lines = [ln for ln in text.splitlines()
             if f'"{TIMESTAMP_KEY}"' not in ln and not ln.startswith(f"{TIMESTAMP_KEY},")]
    return "\n".join(lines)
