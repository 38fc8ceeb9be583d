import csv
import json

import pytest

from shor_decoherence.cli import dump_envelope, load_envelope, main, parse_config
from shor_decoherence.spectrum import Hamming, parse_kernel

FIG1 = ["--N", "21", "--x", "5", "--q", "128"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def _quiet_bound_warning():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def test_parse_fig2_config():
    cfg = parse_config(["spectrum", *FIG1, "--kernel", "xi:0.1"])
    assert (cfg.N, cfg.x, cfg.q) == (21, 5, 128)
    assert parse_kernel(cfg.kernel) == Hamming(0.1)


def test_invalid_beta_is_usage_error(capsys):
    code, _, err = run(["spectrum", *FIG1, "--kernel", "beta:1.5"], capsys)
    assert code == 1
    assert err.startswith("error: kernel:")
    assert len(err.strip().splitlines()) == 1


def test_flag_overrides_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"N": 15, "x": 7, "seed": 1}))
    assert parse_config(["sample", "--config", str(path), "--seed", "7"]).seed == 7
    assert parse_config(["sample", "--config", str(path)]).seed == 1


def test_unknown_key_rejected(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"N": 15, "x": 7, "colour": "blue", "sed": 3}))
    code, _, err = run(["sample", "--config", str(path)], capsys)
    assert code == 1
    assert err.splitlines() == ["error: colour: unknown key", "error: sed: unknown key"]


def test_bad_types_name_their_key(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"N": "fifteen", "x": 7}))
    code, _, err = run(["sample", "--config", str(path)], capsys)
    assert code == 1 and "N:" in err


def test_spectrum_csv(capsys):
    code, out, _ = run(["spectrum", *FIG1, "--k", "3"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "c,p"
    assert len(lines) == 129
    c, p = lines[65].split(",")
    assert c == "64" and float(p) == pytest.approx(2.691650390625e-2, abs=1e-12)


def test_spectrum_gnuplot(capsys):
    code, out, _ = run(["spectrum", *FIG1, "--kernel", "xi:0.1", "--format", "gnuplot"], capsys)
    assert code == 0
    comments = [line for line in out.splitlines() if line.startswith("#")]
    data = [line for line in out.splitlines() if not line.startswith("#")]
    assert any('"kernel": "xi:0.1"' in line for line in comments)
    assert any("plot" in line for line in comments)
    assert len(data) == 128


def test_json_round_trip(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["spectrum", *FIG1, "--format", "json", "-o", str(out)]) == 0
    text = out.read_text()
    env = load_envelope(text)
    assert set(env) == {"config", "version", "payload"}
    assert dump_envelope(env) == text
    assert sum(env["payload"]["values"]) == pytest.approx(1.0, abs=1e-9)


def test_envelope_config_reproduces_run(tmp_path):
    first = tmp_path / "a.json"
    assert main(["sample", *FIG1, "--kernel", "xi:0.1", "--seed", "3", "--trials", "50", "--format", "json", "-o", str(first)]) == 0
    again = tmp_path / "b.json"
    assert main(["sample", "--config", str(first), "-o", str(again)]) == 0
    a, b = load_envelope(first.read_text()), load_envelope(again.read_text())
    assert a["payload"] == b["payload"]


@pytest.mark.parametrize("method", ["table", "dephasing"])
def test_sample_reproducible(tmp_path, method):
    paths = [tmp_path / f"{i}.csv" for i in range(2)]
    for p in paths:
        assert main(["sample", *FIG1, "--kernel", "xi:0.1", "--seed", "9", "--trials", "200", "--method", method, "-o", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    rows = list(csv.DictReader(paths[0].open()))
    assert len(rows) == 200 and all(0 <= int(r["c"]) < 128 for r in rows)


def test_dephasing_needs_hamming(capsys):
    code, _, err = run(["sample", *FIG1, "--kernel", "beta:0.5", "--method", "dephasing"], capsys)
    assert code == 1 and "method:" in err


def test_factor_success(capsys):
    code, out, _ = run(["factor", "--N", "15", "--x", "7", "--seed", "1", "--max-trials", "50"], capsys)
    assert code == 0
    assert sorted(json.loads(out)["payload"]["factors"]) == [3, 5]


def test_factor_exhausted(capsys):
    code, out, err = run(["factor", "--N", "21", "--x", "5", "--seed", "1", "--max-trials", "20"], capsys)
    assert code == 3
    assert "x^(r/2) = -1" in err
    assert json.loads(out)["payload"]["exhausted"]


def test_factor_not_coprime(capsys):
    code, _, err = run(["factor", "--N", "15", "--x", "5"], capsys)
    assert code == 1 and "already a factor" in err


def test_resource_limit_exit_code(capsys):
    code, _, err = run(["spectrum", "--N", "77", "--x", "2"], capsys)
    assert code == 2 and "resource" in err


def test_io_failure(capsys, tmp_path):
    code, _, err = run(["spectrum", *FIG1, "-o", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 2 and "output" in err


def test_budget_max_factorable(capsys):
    code, out, _ = run(["budget", "--alpha", "0.04", "--max-factorable"], capsys)
    assert code == 0
    assert json.loads(out)["payload"]["max_factorable"]["ln_n_max"] == pytest.approx(5.0, rel=1e-12)


def test_budget_full(capsys):
    argv = ["budget", "--mu", "1", "--eta", "0.01", "--delta", "0.01", "--cutoff", "1", "--L", "10",
            "--tau-rel", "1", "--lambda-db", "0.01", "--delta-x", "1", "--rho", "0.5,0.5,0.2,0"]
    code, out, _ = run(argv, capsys)
    payload = json.loads(out)["payload"]
    assert code == 0
    assert payload["spin_boson"]["alpha"] == pytest.approx(0.012175, rel=1e-4)
    assert payload["report"]["trials"] is None  # L^2 alpha > 1
    assert payload["decoherence_time"] == pytest.approx(1e-4)
    assert payload["visibility_beta"] == pytest.approx(0.6)


def test_budget_nothing_to_do(capsys):
    code, _, _ = run(["budget"], capsys)
    assert code == 1


def test_fit_beta(capsys):
    code, out, _ = run(["fit-beta", *FIG1, "--xi", "0"], capsys)
    assert code == 0 and json.loads(out)["payload"]["beta"] == pytest.approx(0.0, abs=1e-6)


def test_sweep_sorted_unique_and_parallel_identical(tmp_path):
    base = ["sweep", "--N", "15", "--x", "7", "--grid", "0.5,0,1,0.5,0.25", "--trials", "300", "--seed", "4"]
    serial, parallel = tmp_path / "s.csv", tmp_path / "p.csv"
    assert main([*base, "-o", str(serial)]) == 0
    assert main([*base, "--workers", "3", "-o", str(parallel)]) == 0
    assert serial.read_bytes() == parallel.read_bytes()
    rows = list(csv.reader(serial.open()))
    assert rows[0] == ["param", "success_rate", "on_peak_mass", "floor_to_peak"]
    params = [float(r[0]) for r in rows[1:]]
    assert params == [0.0, 0.25, 0.5, 1.0]


def test_sweep_xi(capsys):
    code, out, _ = run(["sweep", *FIG1, "--param", "xi", "--grid", "0:0.2:3", "--trials", "100"], capsys)
    assert code == 0
    assert len(out.splitlines()) == 4


def test_timing_is_opt_in(capsys):
    _, out, _ = run(["fit-beta", *FIG1, "--xi", "0.1"], capsys)
    assert "timing" not in json.loads(out)
    _, out, _ = run(["fit-beta", *FIG1, "--xi", "0.1", "--timing"], capsys)
    assert json.loads(out)["timing"]["seconds"] >= 0
