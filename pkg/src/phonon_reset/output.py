"""Deterministic result writers: JSON, CSV and SVG, all routed through one collector.

Floats are written with 17 significant digits; key order is insertion order;
plots carry no timestamps and use a fixed SVG id salt, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


def format_float(x: float) -> str:
    return format(x, ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format_float(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with 17-significant-digit floats and non-finite values as null."""
    return _encode(obj, indent, 0) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def table_rows(table: list[dict[str, Any]]) -> tuple[list[str], list[list[Any]]]:
    """Flatten a list of flat dicts into a header plus rows (list values expand to key_1..)."""
    header: list[str] = []
    rows = []
    for rec in table:
        flat: dict[str, Any] = {}
        for k, v in rec.items():
            if isinstance(v, (list, tuple)):
                for i, x in enumerate(v, start=1):
                    flat[f"{k}_{i}"] = x
            else:
                flat[k] = v
        for k in flat:
            if k not in header:
                header.append(k)
        rows.append(flat)
    return header, [["" if r.get(k) is None else r.get(k) for k in header] for r in rows]


class OutputCollector:
    """Single writer for one run; every file it writes ends up in the manifest."""

    def __init__(self, out_dir: str | Path, metadata: dict[str, Any]):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.metadata = metadata
        self.files: dict[str, bytes] = {}

    def _write(self, name: str, data: bytes) -> Path:
        if name in self.files or name == "manifest.json":
            raise ValueError(f"output {name!r} written twice")
        path = self.out / name
        path.write_bytes(data)
        self.files[name] = data
        return path

    def text(self, name: str, text: str) -> Path:
        return self._write(name, text.encode("utf-8"))

    def json(self, name: str, payload: Any) -> Path:
        return self.text(name, dumps(payload))

    def table(self, stem: str, table: list[dict[str, Any]], fmt: str = "json",
              extra: dict[str, Any] | None = None) -> Path:
        if fmt == "json":
            body = {"metadata": self.metadata, "table": table}
            if extra:
                body.update(extra)
            return self.json(f"{stem}.json", body)
        if fmt == "csv":
            header, rows = table_rows(table)
            return self.text(f"{stem}.csv", csv_text(header, rows))
        raise ValueError(f"unknown format {fmt!r}")

    def series(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return self.text(name, csv_text(header, rows))

    def figure(self, name: str, fig) -> Path:
        import matplotlib

        buf = io.BytesIO()
        with matplotlib.rc_context({"svg.hashsalt": "phonon-reset", "svg.fonttype": "none"}):
            fig.savefig(buf, format="svg", metadata={"Date": None})
        return self._write(name, buf.getvalue())

    def manifest(self) -> Path:
        listing = [
            {"path": name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()}
            for name, data in sorted(self.files.items())
        ]
        payload = {"metadata": self.metadata, "files": listing}
        path = self.out / "manifest.json"
        path.write_text(dumps(payload), encoding="utf-8")
        return path
