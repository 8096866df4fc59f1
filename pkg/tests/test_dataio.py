import numpy as np
import pytest

from rydbeat.dataio import (
    read_fringe_csv,
    read_spectrogram_csv,
    read_trace_csv,
    write_fringe_csv,
    write_spectrogram_csv,
    write_trace_csv,
)
from rydbeat.errors import ParseError
from rydbeat.signals import FringeImage, Spectrogram, TimeTrace


def test_trace_csv_round_trip(tmp_path):
    t = np.arange(0.0, 12.0, 0.1)
    trace = TimeTrace(t, np.exp(-t / 3.0) * 12345.6789)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    loaded = read_trace_csv(path)
    assert np.allclose(loaded.t, trace.t, rtol=1e-9)
    assert np.allclose(loaded.intensity, trace.intensity, rtol=1e-9)


def test_trace_csv_bad_header_and_cells(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("t,counts\n0,1\n")
    with pytest.raises(ParseError):
        read_trace_csv(path)
    path.write_text("time_ps,intensity\n0,1\n0.1\n")
    with pytest.raises(ParseError, match="line 3"):
        read_trace_csv(path)


def test_spectrogram_csv_round_trip(tmp_path):
    t = np.arange(0.0, 5.0, 0.5)
    e = np.arange(-1.0, 1.01, 0.5)
    rng = np.random.default_rng(0)
    spec = Spectrogram(t, e, rng.uniform(0, 10, (t.size, e.size)))
    path = tmp_path / "spec.csv"
    write_spectrogram_csv(spec, path)
    loaded = read_spectrogram_csv(path)
    assert np.allclose(loaded.e, spec.e)
    assert np.allclose(loaded.t, spec.t)
    assert np.allclose(loaded.intensity, spec.intensity, rtol=1e-9)
    header = path.read_text().splitlines()[0]
    assert header.startswith(",")  # corner stays empty, grid is all numbers


def test_fringe_csv_round_trip_carries_delay(tmp_path):
    x = np.arange(64.0)
    e = np.array([-0.1, 0.0, 0.1])
    image = FringeImage(x, e, np.outer(np.hanning(64), [1.0, 2.0, 1.0]), delay=4.5)
    path = tmp_path / "fringe.csv"
    write_fringe_csv(image, path)
    loaded = read_fringe_csv(path, delay=4.5)
    assert loaded.delay == 4.5
    assert np.allclose(loaded.intensity, image.intensity, rtol=1e-9)


def test_spectrogram_csv_column_count_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(",0.0,0.5\n0.0,1.0\n")
    with pytest.raises(ParseError, match="line 2"):
        read_spectrogram_csv(path)
