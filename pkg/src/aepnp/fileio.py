"""Correspondence files, the anisotropic augmentation, and sweep CSVs.

The correspondence file is a single JSON object::

    {
      "intrinsics": {"fx": 150.0, "fy": 150.0, "cx": 320.0, "cy": 240.0},
      "points": [{"world": [x, y, z], "pixel": [u, v]}, ...],
      "truth": {                      # optional
        "rotation": [r00, r01, ..., r22],   # row-major, p_cam = R p_world + t
        "translation": [tx, ty, tz],
        "s1": 1.0, "s2": 1.0
      }
    }

Structural problems raise ParseError naming the offending field; value
problems (non-finite entries, too few points, bad intrinsics or truth)
raise ValidationError. Sweep CSVs serialize every numeric field with 17
significant digits so records re-parse losslessly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import InvalidScale, ParseError, ValidationError
from .geometry import CameraIntrinsics, Correspondences, ScaledPose
from .simulate import SweepRecord

MIN_FILE_POINTS = 6

CSV_COLUMNS = (
    "parameter_name",
    "parameter_value",
    "method",
    "trials",
    "failure_rate",
    "median_r_err_deg",
    "iqr_r_err_deg",
    "median_t_err",
    "iqr_t_err",
    "median_s1_err_frac",
    "iqr_s1_err_frac",
    "median_s2_err_frac",
    "iqr_s2_err_frac",
    "mean_runtime_us",
)


def _require(mapping, key, kind, where):
    if not isinstance(mapping, dict):
        raise ParseError(f"{where}: expected an object, got {type(mapping).__name__}")
    if key not in mapping:
        raise ParseError(f"{where}: missing '{key}'")
    value = mapping[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"{where}.{key}: expected a number, got {type(value).__name__}")
        return float(value)
    if not isinstance(value, kind):
        raise ParseError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _number_list(mapping, key, length, where):
    raw = _require(mapping, key, list, where)
    if len(raw) != length:
        raise ParseError(f"{where}.{key}: expected {length} numbers, got {len(raw)}")
    out = []
    for i, item in enumerate(raw):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ParseError(f"{where}.{key}[{i}]: expected a number")
        out.append(float(item))
    return out


def load_correspondence_file(
    path,
) -> tuple[Correspondences, CameraIntrinsics, ScaledPose | None]:
    """Parse and validate a correspondence file.

    Returns (correspondences, intrinsics, truth-or-None); normalized image
    coordinates are computed on load.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from err
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be an object")

    intr_raw = _require(data, "intrinsics", dict, str(path))
    values = {k: _require(intr_raw, k, float, "intrinsics") for k in ("fx", "fy", "cx", "cy")}
    if not all(np.isfinite(v) for v in values.values()):
        raise ValidationError("intrinsics: all entries must be finite")
    try:
        intrinsics = CameraIntrinsics(**values)
    except ValueError as err:
        raise ValidationError(f"intrinsics: {err}") from err

    points_raw = _require(data, "points", list, str(path))
    if len(points_raw) < MIN_FILE_POINTS:
        raise ValidationError(f"points: need at least {MIN_FILE_POINTS}, got {len(points_raw)}")
    world = np.empty((len(points_raw), 3))
    pixel = np.empty((len(points_raw), 2))
    for i, entry in enumerate(points_raw):
        world[i] = _number_list(entry, "world", 3, f"points[{i}]")
        pixel[i] = _number_list(entry, "pixel", 2, f"points[{i}]")
    if not (np.all(np.isfinite(world)) and np.all(np.isfinite(pixel))):
        raise ValidationError("points: all coordinates must be finite")
    corrs = Correspondences.from_pixels(world, pixel, intrinsics)

    truth = None
    if "truth" in data and data["truth"] is not None:
        truth_raw = data["truth"]
        rotation = np.asarray(_number_list(truth_raw, "rotation", 9, "truth")).reshape(3, 3)
        translation = np.asarray(_number_list(truth_raw, "translation", 3, "truth"))
        s1 = _require(truth_raw, "s1", float, "truth")
        s2 = _require(truth_raw, "s2", float, "truth")
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise ValidationError("truth: all entries must be finite")
        try:
            truth = ScaledPose(rotation=rotation, translation=translation, s1=s1, s2=s2)
        except ValueError as err:
            raise ValidationError(f"truth: {err}") from err

    return corrs, intrinsics, truth


def save_correspondence_file(
    path,
    corrs: Correspondences,
    intrinsics: CameraIntrinsics,
    truth: ScaledPose | None = None,
) -> None:
    """Write a correspondence file that :func:`load_correspondence_file` re-reads."""
    data = {
        "intrinsics": {
            "fx": intrinsics.fx,
            "fy": intrinsics.fy,
            "cx": intrinsics.cx,
            "cy": intrinsics.cy,
        },
        "points": [
            {"world": list(w), "pixel": list(p)}
            for w, p in zip(corrs.world.tolist(), corrs.pixel.tolist())
        ],
    }
    if truth is not None:
        data["truth"] = {
            "rotation": [float(v) for v in truth.rotation.ravel()],
            "translation": [float(v) for v in truth.translation],
            "s1": float(truth.s1),
            "s2": float(truth.s2),
        }
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def apply_anisotropic_augmentation(corrs: Correspondences, s1: float, s2: float) -> Correspondences:
    """Divide stored y/z world coordinates by (s1, s2); pixels untouched.

    The stored model becomes the unscaled prior for an image that observes
    the object at scales (s1, s2), so solving the returned set should
    recover exactly those factors.

    Raises:
        InvalidScale: s1 or s2 not a positive finite number.
    """
    s1 = float(s1)
    s2 = float(s2)
    if not (np.isfinite(s1) and np.isfinite(s2) and s1 > 0 and s2 > 0):
        raise InvalidScale(f"scales must be positive finite, got s1={s1}, s2={s2}")
    world = corrs.world / np.array([1.0, s1, s2])
    return Correspondences(world=world, pixel=corrs.pixel, normalized=corrs.normalized)


def _format_float(value: float) -> str:
    return format(float(value), ".17g")


def write_sweep_csv(path, records: list[SweepRecord]) -> None:
    """Emit records in the fixed column order, \\n line endings, 17 digits."""
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(
            ",".join(
                (
                    rec.parameter_name,
                    _format_float(rec.parameter_value),
                    rec.method,
                    str(int(rec.trials)),
                    _format_float(rec.failure_rate),
                    _format_float(rec.median_r_err_deg),
                    _format_float(rec.iqr_r_err_deg),
                    _format_float(rec.median_t_err),
                    _format_float(rec.iqr_t_err),
                    _format_float(rec.median_s1_err_frac),
                    _format_float(rec.iqr_s1_err_frac),
                    _format_float(rec.median_s2_err_frac),
                    _format_float(rec.iqr_s2_err_frac),
                    _format_float(rec.mean_runtime_us),
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def read_sweep_csv(path) -> list[SweepRecord]:
    """Parse a sweep CSV back into records; exact for our own output."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ParseError(f"{path}: header does not match the sweep schema")
        records = []
        for line_no, row in enumerate(reader, start=2):
            try:
                records.append(
                    SweepRecord(
                        parameter_name=row["parameter_name"],
                        parameter_value=float(row["parameter_value"]),
                        method=row["method"],
                        trials=int(row["trials"]),
                        failure_rate=float(row["failure_rate"]),
                        median_r_err_deg=float(row["median_r_err_deg"]),
                        iqr_r_err_deg=float(row["iqr_r_err_deg"]),
                        median_t_err=float(row["median_t_err"]),
                        iqr_t_err=float(row["iqr_t_err"]),
                        median_s1_err_frac=float(row["median_s1_err_frac"]),
                        iqr_s1_err_frac=float(row["iqr_s1_err_frac"]),
                        median_s2_err_frac=float(row["median_s2_err_frac"]),
                        iqr_s2_err_frac=float(row["iqr_s2_err_frac"]),
                        mean_runtime_us=float(row["mean_runtime_us"]),
                    )
                )
            except (TypeError, ValueError) as err:
                raise ParseError(f"{path}: line {line_no}: {err}") from err
    return records
