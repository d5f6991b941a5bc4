import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from tcsign import cli, nssd
from tcsign.special import ConvergenceError


def invoke(*argv):
    out = io.StringIO()
    code = cli.run(list(argv), stdout=out)
    return code, out.getvalue()


def split(text):
    head = [l for l in text.splitlines() if l.startswith("#")]
    body = "".join(l + "\n" for l in text.splitlines() if not l.startswith("#"))
    return head, body


def test_parse_grid():
    assert np.array_equal(cli.parse_grid("100:500:100", integer=True), [100, 200, 300, 400, 500])
    assert np.allclose(cli.parse_grid("0.9:0.93:0.01"), [0.9, 0.91, 0.92, 0.93])
    assert np.allclose(cli.parse_grid("1,2.5"), [1, 2.5])
    for bad in ("1:2", "5:1:1", "0:1:0", "a,b", ""):
        with pytest.raises(cli.FlagError):
            cli.parse_grid(bad)


def test_fmt_is_locale_free():
    assert cli.fmt(-0.0) == "0"
    assert cli.fmt(np.float64(0.1)) == "0.1"
    assert cli.fmt(np.int64(7)) == "7"
    assert cli.fmt(True) == "1"


def test_nss_verify_output():
    code, text = invoke("nss-verify")
    assert code == 0
    head, body = split(text)
    assert head[0] == "# tcsign nss-verify"
    assert any(l.startswith("# master_seed: ") for l in head)
    assert any(l.startswith("# version: ") for l in head)
    assert any(l.startswith("# wall_clock_seconds: ") for l in head)
    rows = list(csv.DictReader(io.StringIO(body)))
    assert all(float(r["abs_error"]) < 1e-9 for r in rows)
    p = [r for r in rows if r["quantity"] == "csign_success_probability"][0]
    assert float(p["value_re"]) == pytest.approx(1 / 16)


def test_flag_errors_exit_2(capsys):
    assert invoke("no-such-command")[0] == 2
    assert invoke("dv-res-curve", "--grid", "1:2")[0] == 2
    assert invoke("dv-res-curve", "--threads", "0", "--trials", "2")[0] == 2
    assert invoke("nssd-synth", "--d", "9")[0] == 2
    assert invoke("dv-quality", "--p-bm", "1.5")[0] == 2


def test_convergence_failure_exit_3(monkeypatch, capsys):
    def boom(*a, **k):
        raise ConvergenceError("no feasible point")
    monkeypatch.setattr(nssd, "max_success_probability", boom)
    assert invoke("nssd-synth", "--d", "3")[0] == 3
    assert "numerical failure" in capsys.readouterr().err


def test_seed_environment_override(monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "123")
    _, text = invoke("dv-res-curve", "--trials", "20", "--grid", "0:600:300")
    assert "# master_seed: 123" in text
    assert text.rstrip().endswith(",20,123")
    _, text = invoke("dv-res-curve", "--trials", "20", "--grid", "0:600:300", "--seed", "5")
    assert "# master_seed: 5" in text
    monkeypatch.setenv(cli.SEED_ENV, "abc")
    assert invoke("dv-res-curve", "--trials", "2")[0] == 2


@pytest.mark.parametrize("argv", [
    ("dv-res-curve", "--route", "knill", "--trials", "300", "--grid", "100:2000:100"),
    ("grice-curve", "--N", "5", "--trials", "100", "--grid", "5000:30000:5000"),
])
def test_monte_carlo_bodies_byte_identical(argv):
    bodies = {split(invoke(*argv, "--seed", "42", "--threads", str(t))[1])[1] for t in (1, 3, 1)}
    assert len(bodies) == 1
    assert split(invoke(*argv, "--seed", "43")[1])[1] not in bodies


def test_dv_res_curve_schema():
    _, text = invoke("dv-res-curve", "--trials", "50", "--grid", "0:1000:500", "--seed", "1")
    rows = list(csv.reader(io.StringIO(split(text)[1])))
    assert rows[0] == ["route_or_N", "n_sources", "success_prob", "stderr", "trials",
                       "master_seed"]
    assert [r[1] for r in rows[1:]] == ["0", "500", "1000"]


def test_cost_table_strings():
    _, text = invoke("cv-cost-table", "--d", "2,10", "--qpoints", "40")
    rows = list(csv.DictReader(io.StringIO(split(text)[1])))
    assert {r["d"] for r in rows} == {"2", "10"}
    assert all(r["n_CV_display"] for r in rows)


def test_dv_quality_numbers():
    _, text = invoke("dv-quality")
    body = split(text)[1]
    assert "0.25" in body and "0.5625" in body


def test_out_file(tmp_path):
    path = tmp_path / "nss.csv"
    code, text = invoke("nss-verify", "--out", str(path))
    assert code == 0 and text == ""
    assert path.read_text().startswith("# tcsign nss-verify")


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "tcsign.cli", "dv-quality"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("# tcsign dv-quality")
