import csv
import io
import json
import subprocess
import sys

import pytest

from powmod.cli import main
from powmod.config import RunConfig, parse_config
from powmod.errors import DomainError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_sums_mobius(capsys):
    code, out, _ = run(capsys, "sums", "--kind", "mobius", "--q", "1", "--x", "10")
    assert code == 0
    (r,) = rows(out)
    assert float(r["re"]) == -1 and float(r["im"]) == 0
    assert out.startswith("# config_hash=")
    assert "NON-PAPER" in out


def test_sums_walsh(capsys):
    code, out, _ = run(capsys, "sums", "--kind", "walsh", "--n", "3", "--A", "0x0")
    assert code == 0
    assert float(rows(out)[0]["re"]) == -2


def test_sums_grid_and_max(capsys):
    code, out, _ = run(capsys, "sums", "--kind", "mobius", "--q", "8", "--x-grid", "100,1000", "--max")
    assert code == 0
    assert [float(r["x"]) for r in rows(out)] == [100, 1000]
    code, out, _ = run(capsys, "sums", "--kind", "exp", "--q", "7", "--a", "3", "--x", "50")
    assert code == 0 and len(rows(out)) == 1


def test_missing_q_exits_2(capsys):
    code, _, err = run(capsys, "sums", "--kind", "mobius", "--x", "10")
    assert code == 2
    assert "--q" in err


def test_bad_arguments_exit_2(capsys):
    assert run(capsys, "sums", "--kind", "nope")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "perron", "--kind", "psi", "--x", "50", "--q", "1", "--T", "1")[0] == 2


def test_resource_error_exits_3(capsys, tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("sieve_limit = 1000\n")
    code, _, err = run(capsys, "--config", str(cfg), "sums", "--kind", "mobius", "--q", "1", "--x", "1e6")
    assert code == 3
    assert "sieve_limit" in err


def test_envelopes_beta(capsys):
    code, out, _ = run(capsys, "envelopes", "--beta", "--grid", "1000")
    assert code == 0
    rs = rows(out)
    assert len(rs) == 1000
    hit = [r for r in rs if float(r["alpha"]) == 3 / 7]
    assert len(hit) == 1 and float(hit[0]["beta"]) == 5 / 7


def test_envelopes_x_grid(capsys):
    code, out, _ = run(capsys, "envelopes", "--q", "1e6", "--points", "5")
    assert code == 0
    rs = rows(out)
    assert len(rs) == 5
    assert {int(r["case"]) for r in rs} <= {1, 2, 3}
    code, out, _ = run(capsys, "envelopes", "--q", "1e6", "--log-x", "10,1e4")
    assert float(rows(out)[1]["log_x"]) == 1e4


def test_perron_json(capsys):
    code, out, _ = run(capsys, "perron", "--kind", "psi", "--x", "50", "--q", "1", "--T", "500")
    assert code == 0
    d = json.loads(out)
    assert d["discrepancy"] < d["R_bound"] and d["within_bound"]
    assert d["config_hash"] == RunConfig().hash


def test_scan_zeros_json(capsys):
    code, out, _ = run(
        capsys, "scan-zeros", "--q", "3", "--sigma-min", "0.9", "--sigma-max", "1.1",
        "--t-min", "-5", "--t-max", "5", "--n-sigma", "10", "--n-t", "40",
    )
    assert code == 0
    d = json.loads(out)
    assert d["zeros"] == [] and d["min_abs_L"] > 0.1
    assert {"rectangle", "grid", "argmin", "config_hash"} <= set(d)


def test_outputs_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.csv"
        assert main(["sums", "--kind", "psi", "--q", "9", "--x-grid", "100,1000", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "1,5")
    assert code == 0
    assert "2/2 criteria passed" in out


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "powmod", "sums", "--kind", "mobius", "--q", "1", "--x", "10"],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert "mobius" in p.stdout


def test_config_parse_and_hash():
    base = RunConfig()
    cfg = parse_config("# comment\nxi0 = 1e-5\nseed=3  # trailing\n")
    assert cfg.envelope.xi0 == 1e-5
    assert cfg.envelope.c0 == pytest.approx(1001 * 1000**2 * 1e-5)
    assert cfg.seed == 3
    assert cfg.hash != base.hash
    assert parse_config("seed = 3\nxi0=1e-5").hash == cfg.hash
    assert parse_config("").hash == base.hash
    assert len(base.hash) == 16


@pytest.mark.parametrize("text", ["seed=1\nseed=2", "bogus=1", "xi0", "sieve_limit=0", "output_format=xml", "c=-1"])
def test_config_rejects(text):
    with pytest.raises(DomainError):
        parse_config(text)
