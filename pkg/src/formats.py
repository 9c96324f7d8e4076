"""Readers and writers for curve JSON, signature/curvature CSV and result files.

Writers return the text they produce and also write it when given a path.
Floats are written with repr, so reruns are byte-identical.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.curve_core import CurvatureProfile, PlanarCurve
from src.shapes import curve_from_spec
from src.signature import PhasePortrait
from src.utils import CurveFormatError, InvalidCurve, SignatureKind


logger = logging.getLogger(__name__)


EXPERIMENT_HEADER = ["trial", "delta_measured", "d_curves", "eps_bound", "in_hypothesis", "pass"]


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, default=_jsonable) + "\n"


def _emit(text: str, path: Optional[str | Path]) -> str:
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.debug("Wrote %s", path)
    return text


def _load_json(path: str | Path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise CurveFormatError(str(path), f"invalid JSON: {e}")


# ============================================================================
# Curves
# ============================================================================

def read_curve(path: str | Path) -> PlanarCurve:
    """Curve JSON: {"closed": bool, "samples": [[x, y], ...]} or the analytic form.

    Raises:
        CurveFormatError: Malformed content (invalid samples included)
        OSError: Unreadable file
    """
    data = _load_json(path)
    if not isinstance(data, dict):
        raise CurveFormatError(str(path), "top level must be an object")
    try:
        if "samples" in data:
            return PlanarCurve(np.asarray(data["samples"], dtype=float), closed=bool(data.get("closed", False)))
        if "kind" in data:
            return curve_from_spec(data)
    except (InvalidCurve, ValueError) as e:
        raise CurveFormatError(str(path), str(e))
    raise CurveFormatError(str(path), "expected 'samples' or an analytic 'kind'")


def write_curve(curve: PlanarCurve, path: Optional[str | Path] = None, metadata: Optional[dict] = None) -> str:
    data: dict[str, Any] = {"closed": curve.closed, "samples": curve.samples.tolist()}
    if metadata:
        data["metadata"] = metadata
    return _emit(to_json(data), path)


# ============================================================================
# Signatures and curvature profiles
# ============================================================================

def _sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def _columns_csv(s: np.ndarray, columns: np.ndarray) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["s"] + [f"k{j}" for j in range(columns.shape[1])])
    for t, row in zip(s, columns):
        writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
    return buffer.getvalue()


def write_signature(signature: PhasePortrait, path: Optional[str | Path] = None) -> str:
    """Signature CSV `s,k0,...,ki`; with a path, also the JSON sidecar next to it."""
    text = _emit(_columns_csv(signature.s, signature.samples), path)
    if path is not None:
        sidecar = {
            "kind": signature.kind.value,
            "order": signature.order,
            "closed": signature.closed,
            "L": signature.length,
            "periods": signature.periods,
        }
        _emit(to_json(sidecar), _sidecar_path(path))
    return text


def _read_columns(path: str | Path) -> tuple[np.ndarray, np.ndarray, dict]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except UnicodeDecodeError as e:
        raise CurveFormatError(str(path), f"not a text file: {e}")
    if not rows:
        raise CurveFormatError(str(path), "empty file")
    header = [name.strip() for name in rows[0]]
    expected = ["s"] + [f"k{j}" for j in range(len(header) - 1)]
    if len(header) < 2 or header != expected:
        raise CurveFormatError(str(path), f"header must be {','.join(expected[:3])},...; got {','.join(header)}")
    try:
        values = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float)
    except ValueError as e:
        raise CurveFormatError(str(path), f"non-numeric value: {e}")
    if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] != len(header):
        raise CurveFormatError(str(path), "need at least two complete rows")

    meta: dict = {}
    sidecar = _sidecar_path(path)
    if sidecar.exists() and sidecar != Path(path):
        loaded = _load_json(sidecar)
        if not isinstance(loaded, dict):
            raise CurveFormatError(str(sidecar), "sidecar must be an object")
        meta = loaded
    return values[:, 0], values[:, 1:], meta


def read_signature(path: str | Path) -> PhasePortrait:
    s, columns, meta = _read_columns(path)
    if columns.shape[1] < 2:
        raise CurveFormatError(str(path), "a signature needs at least the columns k0 and k1")
    try:
        kind = SignatureKind(meta.get("kind", "euclidean"))
        return PhasePortrait(s, columns, kind=kind, closed=bool(meta.get("closed", False)),
                             length=meta.get("L"), periods=int(meta.get("periods", 1)))
    except ValueError as e:
        raise CurveFormatError(str(path), str(e))


def read_curvature(path: str | Path) -> CurvatureProfile:
    """Curvature CSV `s,k0[,k1...]`; the sidecar may mark it closed with period L."""
    s, columns, meta = _read_columns(path)
    try:
        return CurvatureProfile(s - s[0], columns, closed=bool(meta.get("closed", False)),
                                domain_length=meta.get("L"))
    except InvalidCurve as e:
        raise CurveFormatError(str(path), str(e))


# ============================================================================
# Results
# ============================================================================

def write_experiment(table, path: Optional[str | Path] = None, output_format: str = "csv") -> str:
    """Experiment rows as CSV (`trial,delta_measured,...,pass`) or a JSON list."""
    records = [
        [row.trial, row.delta_measured, row.d_curves, row.eps_bound, row.in_hypothesis, row.passed]
        for row in table.rows
    ]
    if output_format == "json":
        return _emit(to_json([dict(zip(EXPERIMENT_HEADER, record)) for record in records]), path)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(EXPERIMENT_HEADER)
    for trial, measured, d_curves, eps, inside, passed in records:
        writer.writerow([trial, repr(float(measured)), repr(float(d_curves)), repr(float(eps)),
                         str(inside).lower(), str(passed).lower()])
    return _emit(buffer.getvalue(), path)


def write_bound(report, path: Optional[str | Path] = None) -> str:
    return _emit(to_json(report.to_dict()), path)


def write_verdict(verdict, path: Optional[str | Path] = None) -> str:
    return _emit(to_json(verdict.to_dict()), path)
