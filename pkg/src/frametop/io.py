"""File formats: matrices, frames, norm vectors and loops as JSON; traces and
tables as CSV. Floats are written as the shortest decimal that round-trips, and
every output carries a provenance header so reruns can be compared byte for byte."""
from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ParseError


def fmt(x) -> str:
    """Shortest round-trip decimal for a float; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x != x or x in (float("inf"), float("-inf")):
            return None
        return x
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def provenance(command: str, seed, config: dict) -> dict:
    return {"tool": "frametop", "version": __version__, "command": command, "seed": seed, "config": config}


# -- matrices -----------------------------------------------------------------

def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"rows": M.shape[0], "cols": M.shape[1], "re": M.real.tolist(), "im": M.imag.tolist()}


def frame_to_json(F) -> dict:
    F = np.asarray(F, dtype=complex)
    return {"n": F.shape[1], "k": F.shape[0], **matrix_to_json(F)}


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError("matrix object must be a JSON object")
    missing = [key for key in ("rows", "cols", "re", "im") if key not in obj]
    if missing:
        raise ParseError(f"matrix object lacks fields {missing}")
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.array(obj["re"], dtype=float).reshape(rows, cols)
        im = np.array(obj["im"], dtype=float).reshape(rows, cols)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix object: {exc}") from None
    if "n" in obj and int(obj["n"]) != cols or "k" in obj and int(obj["k"]) != rows:
        raise ParseError("frame n/k fields disagree with the matrix shape")
    return re + 1j * im


def norm_vector_to_json(d, k: int) -> dict:
    d = np.asarray(d, dtype=float)
    return {"n": len(d), "k": int(k), "d": d.tolist()}


# -- reading ------------------------------------------------------------------

def read_json(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _d_from_obj(obj) -> tuple[np.ndarray, int | None]:
    if isinstance(obj, dict):
        if "d" not in obj:
            raise ParseError("norm vector object lacks field 'd'")
        k = obj.get("k")
        return _d_from_obj(obj["d"])[0], None if k is None else int(k)
    try:
        d = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("norm vector must be a list of numbers") from None
    if d.ndim != 1 or d.size == 0:
        raise ParseError("norm vector must be a non-empty flat list")
    return d, None


def parse_d(text: str) -> tuple[np.ndarray, int | None]:
    """A norm vector from a JSON file, inline JSON, or comma-separated numbers.

    Fractions such as ``1/3`` are accepted in the comma-separated form.
    Returns ``(d, k)`` with k taken from a JSON object when present.
    """
    text = text.strip()
    if os.path.exists(text):
        return _d_from_obj(read_json(text))
    if text[:1] in "[{":
        try:
            return _d_from_obj(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid inline JSON: {exc.msg}") from None
    try:
        vals = []
        for tok in text.split(","):
            num, _, den = tok.strip().partition("/")
            vals.append(float(num) / float(den) if den else float(num))
    except ValueError:
        raise ParseError(f"cannot parse norm vector {text!r}") from None
    return _d_from_obj(vals)


def read_frame(path) -> np.ndarray:
    return matrix_from_json(read_json(path))


def read_loop(path) -> tuple[np.ndarray | None, list[np.ndarray], bool]:
    """Returns ``(d, samples, are_frames)``; samples carrying n/k fields are frames."""
    obj = read_json(path)
    if not isinstance(obj, dict) or "samples" not in obj:
        raise ParseError("loop file must be an object with a 'samples' list")
    if not isinstance(obj["samples"], list) or not obj["samples"]:
        raise ParseError("loop 'samples' must be a non-empty list")
    samples = [matrix_from_json(s) for s in obj["samples"]]
    are_frames = all(isinstance(s, dict) and "k" in s for s in obj["samples"])
    d = _d_from_obj(obj["d"])[0] if obj.get("d") is not None else None
    return d, samples, are_frames


def loop_to_json(d, samples, frames: bool = False) -> dict:
    enc = frame_to_json if frames else matrix_to_json
    return {"d": None if d is None else np.asarray(d, dtype=float).tolist(), "samples": [enc(s) for s in samples]}


# -- writing ------------------------------------------------------------------

def write_json(path, obj, prov: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if prov is not None:
        obj = {"provenance": prov, **obj}
    path.write_text(dumps(obj))
    return path


def csv_text(header, rows, prov: dict | None = None) -> str:
    buf = io.StringIO()
    if prov is not None:
        for key, value in prov.items():
            buf.write(f"# {key}: {json.dumps(_plain(value), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, prov: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows, prov))
    return path


def read_csv(path) -> tuple[dict, list[dict]]:
    """Provenance header (parsed) and data rows as dicts of strings."""
    prov, lines = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                prov[key] = json.loads(value)
            else:
                lines.append(line)
    return prov, list(csv.DictReader(lines))
