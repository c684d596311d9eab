"""Dataset CSV, grid files and the JSON model format."""

import csv
import json
import math
import os
import tempfile

import numpy as np

from icvcdf.model import FittedModel, Order, StepCdf

MODEL_FORMAT = "icvcdf-model"
MODEL_VERSION = 1


class ParseError(ValueError):
    """Malformed input file; the message names the offending line."""


def _data_lines(handle):
    """Yield ``(line_number, text)`` skipping blank and '#' lines."""
    for number, raw in enumerate(handle, start=1):
        text = raw.strip()
        if text and not text.startswith("#"):
            yield number, text


def _parse_float(token, number, text):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"line {number}: cannot parse row {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"line {number}: non-finite value in row {text!r}")
    return value


def read_dataset(path):
    """Read a CSV with header ``x,y`` into two float arrays."""
    with open(path, newline="") as fh:
        lines = _data_lines(fh)
        try:
            number, header = next(lines)
        except StopIteration:
            raise ParseError(f"{path}: no header line") from None
        if [h.strip().lower() for h in header.split(",")] != ["x", "y"]:
            raise ParseError(f"line {number}: expected header 'x,y', got {header!r}")
        xs, ys = [], []
        for number, text in lines:
            row = next(csv.reader([text]))
            if len(row) != 2:
                raise ParseError(f"line {number}: expected 2 fields in row {text!r}")
            xs.append(_parse_float(row[0], number, text))
            ys.append(_parse_float(row[1], number, text))
    if not xs:
        raise ParseError(f"{path}: no data rows")
    return np.array(xs), np.array(ys)


def read_grid(path):
    """Grid points separated by commas, whitespace or newlines; '#' comments."""
    values = []
    with open(path) as fh:
        for number, text in _data_lines(fh):
            for token in text.replace(",", " ").split():
                values.append(_parse_float(token, number, text))
    if not values:
        raise ParseError(f"{path}: no grid points")
    return np.array(values)


def model_to_dict(model):
    cdfs = []
    for i, x in enumerate(model.design_points):
        step = model.cdf(i).compressed()
        cdfs.append({"x": float(x), "jumps": step.jumps.tolist(), "cum": step.cum.tolist()})
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "order": model.order.value,
        "grid": model.grid.tolist(),
        "design_points": model.design_points.tolist(),
        "cdfs": cdfs,
    }


def model_from_dict(data):
    try:
        if data.get("format") != MODEL_FORMAT:
            raise ParseError("not a model file")
        if data.get("version") != MODEL_VERSION:
            raise ParseError(f"unsupported model version {data.get('version')!r}")
        grid = np.asarray(data["grid"], dtype=np.float64)
        design = np.asarray(data["design_points"], dtype=np.float64)
        if len(data["cdfs"]) != design.size:
            raise ParseError("one cdf entry per design point is required")
        rows = []
        for entry, x in zip(data["cdfs"], design):
            if float(entry["x"]) != x:
                raise ParseError("cdf entries must follow the design points")
            step = StepCdf(np.asarray(entry["jumps"], dtype=np.float64),
                           np.asarray(entry["cum"], dtype=np.float64))
            if not np.all(np.isin(step.jumps, grid)):
                raise ParseError("jump points must lie on the grid")
            rows.append(step(grid))
        return FittedModel(Order(data["order"]), design, grid, np.array(rows).reshape(design.size, grid.size))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"invalid model file: {exc}") from None


def write_text_atomic(path, text):
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_model(model):
    # json writes floats with repr, the shortest string that round-trips
    return json.dumps(model_to_dict(model), indent=1) + "\n"


def write_model(model, path):
    write_text_atomic(path, dump_model(model))


def read_model(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read model {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: model file must hold a JSON object")
    return model_from_dict(data)
