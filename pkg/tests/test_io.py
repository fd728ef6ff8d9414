import numpy as np
import pytest

from gradrecon import io as csvio
from gradrecon.engine import GradientConfig, reconstruct
from gradrecon.signal import SamplingMask, random_mask


def test_signal_round_trip_is_exact(tmp_path, two_tone):
    x = np.array(two_tone) + np.random.default_rng(0).normal(size=128) * 1e-7
    path = tmp_path / "s.csv"
    csvio.write_signal(path, x)
    assert path.read_text().splitlines()[0] == "index,value"
    assert csvio.read_signal(path).tobytes() == x.tobytes()


def test_values_have_at_least_15_significant_digits(tmp_path):
    path = tmp_path / "s.csv"
    csvio.write_signal(path, [1 / 3, 2 / 3])
    digits = path.read_text().splitlines()[1].split(",")[1].replace("0.", "", 1)
    assert len(digits.lstrip("0")) >= 15


def test_mask_round_trip(tmp_path):
    m = random_mask(128, 40, seed=2)
    path = tmp_path / "m.csv"
    csvio.write_mask(path, m)
    lines = path.read_text().splitlines()
    assert lines[0] == "index,available"
    assert sum(line.endswith(",0") for line in lines[1:]) == 40
    assert csvio.read_mask(path) == m


def test_trace_file(tmp_path, two_tone):
    _, tr = reconstruct(two_tone, random_mask(128, 20, 0), GradientConfig(max_iterations=3))
    path = tmp_path / "t.csv"
    csvio.write_trace(path, tr)
    rows = csvio.read_table(path, csvio.TRACE_HEADER)
    assert len(rows) == 4
    assert rows[0]["mae"] == ""  # no reference supplied
    assert float(rows[2]["measure"]) == tr.rows[2].measure


@pytest.mark.parametrize("content, match", [
    ("", "header"),
    ("idx,value\n0,1\n", "header"),
    ("index,value\n0,1\n1\n", "fields"),
    ("index,value\n0,abc\n1,2\n", "could not convert"),
    ("index,value\n1,1\n0,2\n", "index column"),
    ("index,value\n0,nan\n1,2\n", "NaN"),
])
def test_malformed_signal(tmp_path, content, match):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(csvio.CSVFormatError, match=match):
        csvio.read_signal(path)


def test_mask_flags_must_be_binary(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("index,available\n0,1\n1,2\n")
    with pytest.raises(csvio.CSVFormatError, match="0 or 1"):
        csvio.read_mask(path)


def test_missing_file_names_path(tmp_path):
    with pytest.raises(OSError, match="nope.csv"):
        csvio.read_signal(tmp_path / "nope.csv")


def test_unwritable_path_names_path(tmp_path):
    target = tmp_path / "no_dir" / "s.csv"
    with pytest.raises(OSError, match="no_dir"):
        csvio.write_signal(target, [1.0, 2.0])
    assert not target.exists()


def test_stream_output():
    import io
    buf = io.StringIO()
    csvio.write_mask(None, SamplingMask(3, (1,)), stream=buf)
    assert buf.getvalue() == "index,available\n0,1\n1,0\n2,1\n"
