import csv
import json
import struct

import numpy as np
import pytest

from irs_sense.channel import steering_upa
from irs_sense.cli import main

DESK = """
m = 8
n_sc = 32
n_q = 32
t_cg = 24
t_fg = 8
n_r = 4
t_v = 4
iters = 2
noise_power_dbm = -280.0
trials = 2
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "scenario.toml"
    path.write_text(DESK)
    return str(path)


def test_codebook_dump_round_trip(tmp_path):
    out = tmp_path / "book.bin"
    assert main(["codebook", "--m", "4", "--out", str(out)]) == 0
    raw = out.read_bytes()
    m, n_layers = struct.unpack_from("<II", raw, 0)
    assert (m, n_layers) == (4, 2)
    offset = 8
    record = 12 + 16 * 8  # header + m^2 complex64
    count = 0
    first = None
    while offset < len(raw):
        k, i, j = struct.unpack_from("<III", raw, offset)
        phases = np.frombuffer(raw, dtype="<c8", count=16, offset=offset + 12)
        if first is None:
            first = (k, i, j, phases.astype(complex))
        assert np.allclose(np.abs(phases), 1.0, atol=1e-6)
        offset += record
        count += 1
    assert count == 4 + 16
    k, i, j, phases = first
    assert (k, i, j) == (1, 1, 1)
    # layer-2 records follow layer 1; the last is the (4, 4) narrow beam
    last = raw[8 + record * (count - 1):]
    k, i, j = struct.unpack_from("<III", last, 0)
    assert (k, i, j) == (2, 4, 4)
    narrow = np.frombuffer(last, dtype="<c8", count=16, offset=12)
    assert np.allclose(narrow, steering_upa(4, 0.75, 0.75).astype(np.complex64),
                       atol=1e-6)


def test_codebook_gain_map(tmp_path):
    out = tmp_path / "book.bin"
    gm = tmp_path / "gain.csv"
    assert main(["codebook", "--m", "4", "--out", str(out),
                 "--gain-map", str(gm), "--layer", "1", "--grid", "8"]) == 0
    rows = list(csv.DictReader(gm.open()))
    assert len(rows) == 4 * 64
    assert set(rows[0]) == {"k", "i", "j", "u", "v", "gain"}


def test_sense_json_output(tmp_path, config_path, capsys):
    out = tmp_path / "res.json"
    code = main(["sense", "--config", config_path, "--seed", "3",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["config"]["m"] == 8
    res = payload["results"]
    for key in ("detected", "u_hat", "v_hat", "range_m", "velocity_mps",
                "location", "eps_dr", "eps_d", "eps_v", "eps_l"):
        assert key in res
    assert res["detected"] is True


def test_sense_multi_target(tmp_path, config_path):
    fine = tmp_path / "fine.toml"
    fine.write_text(DESK.replace("n_q = 32", "n_q = 512"))
    out = tmp_path / "multi.json"
    code = main(["sense", "--config", str(fine), "--seed", "1",
                 "--targets", "2", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert isinstance(payload["results"], list)
    assert len(payload["results"]) == 2
    # the tiny grid quantizes range to tau_max / n_r**(iters+1): half a cell
    half_bin = 3e8 / 4 * (1 / (2 * 120e3)) / 4 ** 3
    assert all(r["eps_d"] <= half_bin for r in payload["results"])


def test_sense_multi_target_rejects_coarse_delay_grid(tmp_path, config_path):
    # a grid whose zero-delay cell swallows the target ranges zeroes every
    # true cell of the normalized ranking; the run must refuse
    code = main(["sense", "--config", config_path, "--seed", "1",
                 "--targets", "2", "--out", str(tmp_path / "x.json")])
    assert code == 2


def test_sweep_csv_schema(tmp_path, config_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--config", config_path, "--axis", "N",
                 "--values", "16,32", "--trials", "2",
                 "--schemes", "dsp,rss", "--out", str(out)])
    assert code == 0
    rows = list(csv.reader(out.open()))
    header = rows[0]
    assert header[:2] == ["axis", "value"]
    assert "success_rate_dsp" in header
    assert "success_rate_rss" in header
    assert "eps_v_rmse_dsp" in header
    assert len(rows) == 3


def test_detect_roc_columns(tmp_path, config_path):
    out = tmp_path / "roc.csv"
    code = main(["detect-roc", "--config", config_path, "--trials", "50",
                 "--far-values", "0.05,0.2", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["far_target", "empirical_far",
                             "empirical_detection_rate", "snr_db"]
    assert len(rows) == 2


def test_crlb_columns(tmp_path, config_path):
    out = tmp_path / "crlb.csv"
    code = main(["crlb", "--config", config_path, "--sweep", "snr=0:10:5",
                 "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["snr_db", "crlb_range_m2", "crlb_vel_mps2",
                             "crlb_u", "crlb_v"]
    assert [float(r["snr_db"]) for r in rows] == [0.0, 5.0, 10.0]
    assert float(rows[2]["crlb_range_m2"]) < float(rows[0]["crlb_range_m2"])


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("m = 12\n")
    assert main(["sense", "--config", str(bad)]) == 2


def test_unknown_key_exit_code(tmp_path):
    bad = tmp_path / "bad2.toml"
    bad.write_text("bogus = 1\n")
    assert main(["sweep", "--config", str(bad), "--axis", "N",
                 "--values", "8"]) == 2


def test_sense_dump_trace_and_echo(tmp_path, config_path):
    trace_path = tmp_path / "trace.json"
    echo_path = tmp_path / "echo.csv"
    code = main(["sense", "--config", config_path, "--seed", "2",
                 "--out", str(tmp_path / "r.json"),
                 "--dump-trace", str(trace_path),
                 "--dump-echo", str(echo_path)])
    assert code == 0
    trace = json.loads(trace_path.read_text())
    assert len(trace["stages"]) == 3  # log2(8) stages
    assert all(len(s["tested"]) == 4 for s in trace["stages"])
    rows = list(csv.DictReader(echo_path.open()))
    assert list(rows[0]) == ["n", "l", "re", "im"]
    assert len(rows) == 32 * 8  # n_sc x t_fg
