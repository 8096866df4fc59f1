"""CSV and JSON readers/writers for the signal containers and fit results.

All numbers are written with ``%.10g`` and a dot decimal separator, so files
are locale-independent and re-runs are byte-identical.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ParseError
from .signals import FringeImage, Spectrogram, TimeTrace

_FMT = "%.10g"


def _fmt(value):
    return _FMT % value


def write_trace_csv(trace: TimeTrace, path):
    with open(path, "w") as fh:
        fh.write("time_ps,intensity\n")
        for t, v in zip(trace.t, trace.intensity):
            fh.write(f"{_fmt(t)},{_fmt(v)}\n")


def read_trace_csv(path) -> TimeTrace:
    times, values = [], []
    with open(path) as fh:
        header = fh.readline()
        if header.strip() != "time_ps,intensity":
            raise ParseError(f"{path}, line 1: expected header 'time_ps,intensity', "
                             f"got {header.strip()!r}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            cells = line.strip().split(",")
            if len(cells) != 2:
                raise ParseError(f"{path}, line {lineno}: expected 2 columns, "
                                 f"got {len(cells)}")
            try:
                times.append(float(cells[0]))
                values.append(float(cells[1]))
            except ValueError as exc:
                raise ParseError(f"{path}, line {lineno}: {exc}") from None
    if len(times) < 2:
        raise ParseError(f"{path}: fewer than 2 data rows")
    return TimeTrace(np.array(times), np.array(values))


def write_spectrogram_csv(spec: Spectrogram, path):
    with open(path, "w") as fh:
        fh.write("," + ",".join(_fmt(e) for e in spec.e) + "\n")
        for t, row in zip(spec.t, spec.intensity):
            fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in row) + "\n")


def _read_grid_header(path, fh):
    header = fh.readline().strip().split(",")
    if len(header) < 2:
        raise ParseError(f"{path}, line 1: expected a grid header row")
    try:
        return np.array([float(c) for c in header[1:]])
    except ValueError as exc:
        raise ParseError(f"{path}, line 1: {exc}") from None


def read_spectrogram_csv(path) -> Spectrogram:
    with open(path) as fh:
        e = _read_grid_header(path, fh)
        times, rows = [], []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            cells = line.strip().split(",")
            if len(cells) != e.size + 1:
                raise ParseError(f"{path}, line {lineno}: expected {e.size + 1} "
                                 f"columns, got {len(cells)}")
            try:
                times.append(float(cells[0]))
                rows.append([float(c) for c in cells[1:]])
            except ValueError as exc:
                raise ParseError(f"{path}, line {lineno}: {exc}") from None
    if len(times) < 2:
        raise ParseError(f"{path}: fewer than 2 data rows")
    return Spectrogram(np.array(times), e, np.array(rows))


def write_fringe_csv(image: FringeImage, path):
    with open(path, "w") as fh:
        fh.write("," + ",".join(_fmt(e) for e in image.e) + "\n")
        for x, row in zip(image.x, image.intensity):
            fh.write(_fmt(x) + "," + ",".join(_fmt(v) for v in row) + "\n")


def read_fringe_csv(path, delay=0.0) -> FringeImage:
    """Read a fringe picture; the arm delay travels outside the CSV
    (sidecar or filename) and is passed in."""
    with open(path) as fh:
        e = _read_grid_header(path, fh)
        xs, rows = [], []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            cells = line.strip().split(",")
            if len(cells) != e.size + 1:
                raise ParseError(f"{path}, line {lineno}: expected {e.size + 1} "
                                 f"columns, got {len(cells)}")
            try:
                xs.append(float(cells[0]))
                rows.append([float(c) for c in cells[1:]])
            except ValueError as exc:
                raise ParseError(f"{path}, line {lineno}: {exc}") from None
    if len(xs) < 8:
        raise ParseError(f"{path}: fewer than 8 pixel rows")
    return FringeImage(np.array(xs), e, np.array(rows), delay=float(delay))


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
