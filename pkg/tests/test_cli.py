import io
import subprocess
import sys

import pytest

from dirichlet_xray import cli


def run(*args, **kw):
    out = io.StringIO()
    code = cli.main(list(args), out=out)
    return code, out.getvalue()


def test_eval():
    code, text = run("eval", "zeta", "2+0i")
    assert code == 0 and "value=1.64493406685E+00" in text
    code, text = run("eval", "dh", "0.5+85i")
    assert code == 0
    fe = float(text.split("fe_residual=")[1].split()[0])
    assert fe < 1e-7


def test_exit_codes(capsys):
    assert run("eval", "zeta", "1+0i")[0] == 1
    assert "pole at s=1" in capsys.readouterr().err
    assert run("eval", "zeta", "two")[0] == 2
    assert run("eval", "nosuch", "2")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("zeros", "zeta", "--region", "0,1,2")[0] == 2
    assert run("eval", "zeta", "2", "--workers", "0")[0] == 2


def test_zeros_commands():
    code, text = run("zeros", "zeta", "--region", "0,1,0,100")
    rows = [l for l in text.splitlines() if not l.startswith("#")][1:]
    assert code == 0 and len(rows) == 29
    assert all(r.split(",")[5] == "true" for r in rows)
    code, text = run("zeros", "zeta", "--region", "0,1,5,5")
    assert code == 0 and text.splitlines()[1] == "function,sigma,t,residual,multiplicity,on_line,pair_id"
    assert len(text.splitlines()) == 2


def test_header_versioned():
    _, text = run("eval", "zeta", "3")
    assert text.startswith(f"# dirichlet-xray {cli.__version__} eval\n")


def test_xray_command(tmp_path):
    code, text = run("xray", "zeta", "--window", "2,3,1,2", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "xray.svg").read_text().startswith("<?xml")
    code, text = run("xray", "dh", "--window", "0,1,84,88", "--out", str(tmp_path))
    assert code == 0 and "zeros=3" in text and "gamma_k0_embraced=0" in text
    svg = (tmp_path / "xray.svg").read_text()
    assert svg.count('class="zero"') == 3


def test_strips_command():
    code, text = run("strips", "zeta", "--t", "0,100")
    mean = float(text.split("mean_spacing=")[1].split()[0])
    assert code == 0 and 6 <= mean <= 12


def test_ratio_and_euler():
    code, text = run("ratio-trace", "zeta", "--sigma", "0.5", "--t", "30", "--cutoffs", "100,1000")
    assert code == 0 and "ratio_identity" in text and "PASS" in text
    code, text = run("verify-euler", "zeta", "--s", "3", "--primes", "10000")
    assert code == 0
    assert run("verify-euler", "dh")[0] == 2


def test_config_round_trip(tmp_path):
    code, dumped = run("zeros", "zeta", "--region", "0,1,10,30", "--tol", "1e-11", "--dump-config")
    assert code == 0 and "tol=1e-11" in dumped
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# saved run\n" + dumped)
    code, again = run("zeros", "--config", str(cfg), "--dump-config")
    assert again == dumped
    code, over = run("zeros", "--config", str(cfg), "--tol", "1e-9", "--dump-config")
    assert "tol=1e-09" in over and "region=0,1,10,30" in over
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour=blue\n")
    assert run("zeros", "--config", str(bad))[0] == 2


def test_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("XRAY_CACHE_DIR", str(tmp_path / "cache"))
    _, first = run("zeros", "zeta", "--region", "0,1,10,30")
    assert len(list((tmp_path / "cache").iterdir())) == 1
    _, second = run("zeros", "zeta", "--region", "0,1,10,30")
    monkeypatch.delenv("XRAY_CACHE_DIR")
    _, fresh = run("zeros", "zeta", "--region", "0,1,10,30")
    assert first == second == fresh
    a = cli.Cache.key(command="zeros", handle="zeta")
    assert a != cli.Cache.key(command="zeros", handle="dh")


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "dirichlet_xray.cli", "eval", "zeta", "2"], capture_output=True, text=True)
    assert out.returncode == 0 and "1.64493406685E+00" in out.stdout


@pytest.mark.slow
def test_theorem2_reports_finding():
    code, text = run("theorem2", "dh", "--pair", "1")
    # the nearest derivative zero is off the segment, so the experiment reports FAIL
    assert code == 1
    assert "theorem2_on_segment" in text and "theorem2_left_of_line" in text
    assert "involution" in text
