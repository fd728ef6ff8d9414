import subprocess
import sys

import numpy as np
import pytest

from gradrecon import io as csvio
from gradrecon.cli import main
from gradrecon.signal import generate_test_signal


def run(*argv):
    return main([str(a) for a in argv])


def test_generate_two_tone(tmp_path):
    out = tmp_path / "s.csv"
    assert run("generate", "--n", 128, "--component", "3:10", "--component", "1:15", "--out", out) == 0
    x = csvio.read_signal(out)
    assert x.size == 128
    np.testing.assert_array_equal(x, generate_test_signal(128, [(3, 10), (1, 15)]))


def test_generate_to_stdout(capsys):
    assert run("generate", "--n", 4, "--component", "1:1") == 0
    assert capsys.readouterr().out.splitlines()[0] == "index,value"


def test_round_trip_with_no_missing(tmp_path):
    s, r = tmp_path / "s.csv", tmp_path / "r.csv"
    assert run("generate", "--out", s) == 0
    assert run("reconstruct", "--signal", s, "--missing", 0, "--out", r) == 0
    np.testing.assert_array_equal(csvio.read_signal(r), csvio.read_signal(s))
    assert r.read_text() == s.read_text()


def test_mask_then_reconstruct(tmp_path):
    s, m, r, t = (tmp_path / f for f in ("s.csv", "m.csv", "r.csv", "t.csv"))
    assert run("generate", "--out", s) == 0
    assert run("mask", "--num-missing", 64, "--seed", 3, "--out", m) == 0
    assert run("reconstruct", "--signal", s, "--mask", m, "--reference", s,
               "--iterations", 60, "--out", r, "--trace", t) == 0
    trace = csvio.read_table(t, csvio.TRACE_HEADER)
    assert len(trace) == 61
    assert float(trace[-1]["mae"]) < float(trace[0]["mae"])


def test_headline_defaults(tmp_path):
    r, t = tmp_path / "r.csv", tmp_path / "t.csv"
    assert run("reconstruct", "--num-missing", 64, "--seed", 1, "--out", r, "--trace", t) == 0
    maes = [float(row["mae"]) for row in csvio.read_table(t, csvio.TRACE_HEADER)]
    assert len(maes) == 321 and min(maes) <= 1e-12


def test_byte_identical_reruns(tmp_path):
    outs = []
    for k in range(2):
        r, t = tmp_path / f"r{k}.csv", tmp_path / f"t{k}.csv"
        assert run("reconstruct", "--num-missing", 50, "--seed", 7, "--noise-variance", 0.2,
                   "--iterations", 50, "--out", r, "--trace", t) == 0
        outs.append((r.read_bytes(), t.read_bytes()))
    assert outs[0] == outs[1]


def test_seed_required_for_random_mask(capsys):
    assert run("reconstruct", "--num-missing", 10) == 2
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "--seed" in err


def test_unknown_flag(capsys):
    assert run("generate", "--bogus", 1) == 2
    assert "unrecognized arguments: --bogus" in capsys.readouterr().err


def test_missing_required_flag(capsys):
    assert run("mask", "--num-missing", 3) == 2
    assert "--seed" in capsys.readouterr().err


def test_unreadable_input(tmp_path, capsys):
    assert run("reconstruct", "--signal", tmp_path / "absent.csv", "--missing", 0) == 3
    assert "absent.csv" in capsys.readouterr().err


def test_malformed_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("index;value\n")
    assert run("reconstruct", "--signal", bad, "--missing", 0) == 4
    assert "malformed CSV" in capsys.readouterr().err


def test_invalid_value(capsys):
    assert run("generate", "--component", "1:70") == 5
    assert "alias" in capsys.readouterr().err


def test_unwritable_output_is_failure(tmp_path):
    assert run("generate", "--out", tmp_path / "nodir" / "s.csv") == 3


def test_mask_length_mismatch(tmp_path):
    m = tmp_path / "m.csv"
    assert run("mask", "--n", 64, "--num-missing", 3, "--seed", 0, "--out", m) == 0
    assert run("reconstruct", "--mask", m) == 5


def test_help_documents_flags(capsys):
    assert main(["reconstruct", "--help"]) == 0
    text = " ".join(capsys.readouterr().out.split())
    for flag in ("--d0", "--mu", "--p", "--stage-length", "--decay-factor", "--constant", "--trace"):
        assert flag in text
    assert "x <- x - mu*E" in text


def test_sweep_params_custom(tmp_path):
    out, summ = tmp_path / "o.csv", tmp_path / "s.csv"
    assert run("sweep-params", "--pair", "10:20", "--num-missing", 20, "--seeds", 2,
               "--iterations", 40, "--out", out, "--summary", summ) == 0
    rows = csvio.read_table(out, out.read_text().splitlines()[0].split(","))
    assert [r["seed"] for r in rows] == ["0", "1"]
    assert len(summ.read_text().splitlines()) == 2


def test_sweep_params_requires_grid(capsys):
    assert run("sweep-params", "--seeds", 2) == 2


def test_sweep_noise_custom(tmp_path):
    out = tmp_path / "o.csv"
    assert run("sweep-noise", "--variance", 0.3, "--variance", 0.1, "--num-missing", 30,
               "--seeds", 1, "--iterations", 40, "--out", out) == 0
    rows = out.read_text().splitlines()[1:]
    assert [r.split(",")[3] for r in rows] == ["0.10000000000000001", "0.29999999999999999"]


def test_case_command(tmp_path):
    t, s = tmp_path / "t.csv", tmp_path / "s.csv"
    assert run("case", "--id", "case3", "--seed", 2, "--trace", t, "--signals", s) == 0
    assert s.read_text().splitlines()[0] == "index,original,noisy,available,reconstructed"


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "gradrecon", "mask", "--num-missing", "5",
                           "--seed", "1", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 129
