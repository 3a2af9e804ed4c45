"""Curve files (CSV and JSON) and deterministic run reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Curve, GeometryError


class CurveParseError(GeometryError):
    """Malformed curve file; the message names the offending line."""


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt:
        fmt = fmt.lower()
    else:
        fmt = path.suffix.lower().lstrip(".")
    if fmt not in ("csv", "json"):
        raise GeometryError(f"unknown curve format {fmt!r} for {path}")
    return fmt


def parse_curve_text(text: str, fmt: str, source: str = "<string>") -> Curve:
    if fmt == "json":
        return _parse_json(text, source)
    return _parse_csv(text, source)


def _parse_csv(text: str, source: str) -> Curve:
    rows = []
    dim = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
            continue
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise CurveParseError(f"{source}: line {lineno}: non-numeric coordinate in {row!r}") from None
        if dim is None:
            dim = len(vals)
        elif len(vals) != dim:
            raise CurveParseError(
                f"{source}: line {lineno}: expected {dim} coordinates, got {len(vals)}"
            )
        rows.append(vals)
    if not rows:
        raise GeometryError(f"{source}: no vertices")
    return Curve(np.array(rows, dtype=float))


def _parse_json(text: str, source: str) -> Curve:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CurveParseError(f"{source}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise CurveParseError(f"{source}: expected an object with 'dimension' and 'vertices'")
    verts = obj["vertices"]
    dim = obj.get("dimension")
    if not isinstance(verts, list) or not verts:
        raise GeometryError(f"{source}: no vertices")
    if dim is None:
        dim = len(verts[0]) if isinstance(verts[0], list) else None
    if not isinstance(dim, int) or dim < 1:
        raise CurveParseError(f"{source}: invalid dimension {dim!r}")
    for k, v in enumerate(verts):
        if not isinstance(v, list) or len(v) != dim:
            raise CurveParseError(f"{source}: vertex {k}: expected {dim} coordinates")
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            raise CurveParseError(f"{source}: vertex {k}: non-numeric coordinate")
    return Curve(np.array(verts, dtype=float))


def parse_curve_file(path, fmt: str | None = None) -> Curve:
    """Read a curve; the format defaults to the file suffix."""
    path = Path(path)
    fmt = _infer_format(path, fmt)
    return parse_curve_text(path.read_text(), fmt, str(path))


def serialize_curve(curve: Curve, fmt: str = "json") -> str:
    """Text that parses back to exactly ``curve`` (floats use ``repr``)."""
    verts = curve.vertices.tolist()
    if fmt == "csv":
        return "".join(",".join(repr(float(x)) for x in v) + "\n" for v in verts)
    if fmt == "json":
        return json.dumps({"dimension": curve.dim, "vertices": verts}) + "\n"
    raise GeometryError(f"unknown curve format {fmt!r}")


def write_curve_file(curve: Curve, path, fmt: str | None = None) -> None:
    path = Path(path)
    path.write_text(serialize_curve(curve, _infer_format(path, fmt)))


def curve_digest(*curves: Curve, extra: dict | None = None) -> str:
    h = hashlib.sha256()
    for c in curves:
        v = np.ascontiguousarray(c.vertices, dtype="<f8")
        h.update(np.array(v.shape, dtype="<i8").tobytes())
        h.update(v.tobytes())
    if extra:
        h.update(json.dumps(extra, sort_keys=True).encode())
    return h.hexdigest()


@dataclass
class RunReport:
    """Machine-readable command result.

    ``wall_time`` is kept outside the digest-covered payload so the digest
    is stable across runs.
    """

    command: str
    inputs_digest: str
    outcome: dict
    witness: list | None = None
    probes: int | None = None
    wall_time: float | None = None
    extra: dict = field(default_factory=dict)

    def payload(self) -> dict:
        out = {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "outcome": self.outcome,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.probes is not None:
            out["probes"] = self.probes
        if self.extra:
            out["extra"] = self.extra
        return out

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.payload(), sort_keys=True).encode()).hexdigest()

    def to_json(self) -> str:
        body = dict(self.payload())
        body["report_digest"] = self.digest()
        if self.wall_time is not None:
            body["wall_time"] = self.wall_time
        return json.dumps(body, sort_keys=True, indent=2)
