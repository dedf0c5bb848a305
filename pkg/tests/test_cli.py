import csv
import io
import subprocess
import sys

import pytest

from coupledtandem.cli import main


def run(*args):
    proc = subprocess.run([sys.executable, "-m", "coupledtandem", *args], capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_stability_exit_codes():
    assert main(["stability"]) == 0
    assert main(["stability", "--lambda0", "3"]) == 1


def test_usage_errors_exit_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"params": {"p": 0.3,}}')
    code, _, err = run("metrics", "--config", str(bad))
    assert code == 2 and "line 1" in err
    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"colour": "red"}')
    assert main(["metrics", "--config", str(unknown)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_metrics_and_compare(capsys):
    assert main(["metrics", "--method", "psa", "--p", "0.1", "--M", "3"]) == 0
    out = rows(capsys.readouterr().out)
    assert out[0]["M"] == "3" and float(out[0]["EQ1"]) > 0
    assert main(["compare", "--p", "0.1", "--M", "4", "--N", "120"]) == 0
    table = {r["method"]: r for r in rows(capsys.readouterr().out)}
    assert {"psa", "bvp", "ctmc"} <= set(table)
    assert float(table["bvp"]["rel_err_EQ1"]) < 1e-5


def test_endpoint_redirect(capsys):
    assert main(["metrics", "--method", "bvp", "--p", "0"]) == 0
    captured = capsys.readouterr()
    assert "closed" in captured.err
    assert rows(captured.out)[0]["method"] == "closed"


def test_sweep_output(capsys):
    assert main(["sweep", "--sweep-var", "gamma", "--from", "1", "--to", "3", "--steps", "3", "--p", "0.2",
                 "--methods", "psa", "--M-values", "3"]) == 0
    out = rows(capsys.readouterr().out)
    eq2 = [float(r["EQ2"]) for r in out]
    assert eq2 == sorted(eq2) and len(set(eq2)) == 3


def test_dumps_are_byte_identical():
    first = run("contour-dump", "--n-contour", "64")
    second = run("contour-dump", "--n-contour", "64")
    assert first[0] == 0 and first[1] == second[1]
    assert first[1].splitlines()[0] == "phi,re_y,im_y,rho,x_preimage"
    code, out, _ = run("map-dump", "--n-grid", "64")
    assert code == 0 and out.splitlines()[0] == "phi,psi,re_y,im_y"
    assert len(out.splitlines()) == 65


def test_simulation_csv_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["metrics", "--method", "sim", "--horizon", "3000", "--seed", "4", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
