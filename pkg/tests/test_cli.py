import csv
import io
import math
import subprocess
import sys

import pytest

from stochvolterra.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_weights(capsys):
    code, out, _ = run(capsys, "weights", "--beta", "0.5", "--dt", "1", "--n", "3")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["k", "omega_k"]
    assert [float(r[1]) for r in rows[1:]] == [1.0, 0.5, 0.375, 0.3125]
    code, out, _ = run(capsys, "weights", "--beta", "0.5", "--dt", "1", "--n", "8", "--method", "contour")
    assert code == 0 and len(out.splitlines()) == 10


def test_ml(capsys):
    code, out, _ = run(capsys, "ml", "--rho", "2", "--x", "-1", "0")
    assert code == 0
    vals = [float(v) for v in out.split()]
    assert vals[0] == pytest.approx(math.cos(1)) and vals[1] == 1.0
    code, _, err = run(capsys, "ml", "--rho", "3", "--x", "-1")
    assert code == 2 and "rho" in err


def test_mode(capsys):
    code, out, _ = run(capsys, "mode", "--beta", "0.5", "--lambda", "10", "--n", "16")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 17 and set(rows[0]) == {"t", "s_exact", "s_numeric", "diff"}
    assert float(rows[0]["s_exact"]) == 1.0
    code, out, _ = run(capsys, "mode", "--family", "tempered", "--beta", "0.5", "--eta", "1", "--lambda", "10", "--n", "16")
    assert code == 0 and len(out.splitlines()) == 18


def test_fem_dump(capsys):
    code, out, _ = run(capsys, "fem", "--dump", "--m", "1")
    assert code == 0
    assert out.splitlines() == ["matrix,i,j,value", "mass,0,0,0.3333333333333333", "stiffness,0,0,4.0"]
    assert run(capsys, "fem", "--m", "1")[0] == 2


def test_validate(capsys, tmp_path):
    cfg = tmp_path / "white.cfg"
    cfg.write_text("noise.mu = 0\nstudy.levels = 16..128\n")
    code, out, _ = run(capsys, "validate", "--config", str(cfg))
    assert code == 0 and "gamma_theory = 0.125" in out
    nu = float(next(l for l in out.splitlines() if l.startswith("nu_theory")).split("=")[1])
    assert nu == pytest.approx(1 / 6)
    cfg.write_text("study.levels =\n")
    assert run(capsys, "validate", "--config", str(cfg))[0] == 2
    assert run(capsys, "validate", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_converge_and_assert(capsys, tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("study.levels = 8..64\nstudy.samples = 8\nnoise.J = 16\n")
    out_dir = tmp_path / "out"
    code, _, err = run(capsys, "converge", "--config", str(cfg), "--out", str(out_dir))
    assert code == 0 and "temporal: rate" in err
    assert (out_dir / "levels.csv").read_text().startswith("level_index,n,m,dt,h,rms_error,stderr\n")
    assert (out_dir / "summary.csv").read_text().startswith("fitted_rate,ci_lo,ci_hi,theoretical_rate,samples,seed\n")
    cfg.write_text("study.levels = 8..64\nstudy.samples = 8\nnoise.J = 16\nstudy.expected = 5\n")
    assert run(capsys, "converge", "--config", str(cfg), "--assert")[0] == 3
    cfg.write_text("study.levels = 8..64\nstudy.samples = 8\nnoise.J = 16\nstudy.expected = 5\nstudy.tolerance = 10\n")
    assert run(capsys, "converge", "--config", str(cfg), "--assert")[0] == 0


def test_noise_dump(capsys, tmp_path):
    cfg = tmp_path / "n.cfg"
    cfg.write_text("study.levels = 8..32\nnoise.J = 4\n")
    path = tmp_path / "inc.bin"
    assert run(capsys, "noise", "--config", str(cfg), "--out", str(path), "--n", "16")[0] == 0
    assert path.stat().st_size == 24 + 16 * 4 * 8


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "stochvolterra.cli", "ml", "--rho", "1", "--x", "-1"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and float(out.stdout) == pytest.approx(math.exp(-1))
    bad = subprocess.run([sys.executable, "-m", "stochvolterra.cli", "bogus"], capture_output=True, text=True)
    assert bad.returncode == 2
