import math
import os
import subprocess
import sys

import numpy as np
import pytest

from hlbm import io
from hlbm.cli import main


def test_regime_csv_lists_cases(capsys):
    assert main(["regime", "--format", "csv", "--eps", "0.1", "0.05"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,case,epsilon,a_eps,sigma,porosity,fits"
    assert len([l for l in out if l and l[0].isdigit()]) == 8
    summary = [l for l in out if l.startswith("# n=")]
    assert len(summary) == 4
    limit = float(summary[0].split("porosity_limit=")[1])
    assert abs(limit - (1 - math.pi / 6)) < 1e-12


def test_regime_writes_out_dir(tmp_path, capsys):
    assert main(["regime", "--d", "2", "--C", "0.5", "--n", "2", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "regime.txt").read_text() == capsys.readouterr().out


def test_moments_with_quadrature(capsys):
    assert main(["moments", "--u", "0.3", "-0.2", "--varpi", "0.7", "--which", "cm2", "--quadrature"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "moment,index,value,quadrature"
    rows = [l.split(",") for l in lines[2:]]
    assert [r[1] for r in rows] == ["1-1", "1-2", "2-1", "2-2"]
    for _, _, v, q in rows:
        assert abs(float(v) - float(q)) < 1e-10


def test_moments_control_from_viscosity(capsys):
    assert main(["moments", "--u", "0.1", "0", "--nu", "0.1", "--K", "1", "--eps", "0.5", "--which", "equilibrium"]) == 0
    out = capsys.readouterr().out
    assert out.startswith(f"# varpi={1 - 3 * 0.01 * 0.25:.17g}")


def test_run_writes_snapshots_and_sidecar(tmp_path, capsys):
    cfg = tmp_path / "demo.cfg"
    cfg.write_text("[grid]\nnx = 4\nny = 3\n[output]\nname = demo\nsteps = 20\nevery = 10\nformat = csv, vtk\n")
    code = main(["run", "--config", str(cfg), "--set", "physics.force_x=1e-6", "--out-dir", str(tmp_path / "o")])
    assert code == 0
    names = sorted(os.listdir(tmp_path / "o"))
    assert names == sorted(["demo.cfg"] + [f"demo_{s}.{e}" for s in (0, 10, 20) for e in ("csv", "vtk")])
    fields, header = io.read_csv(str(tmp_path / "o" / "demo_20.csv"))
    assert fields.step == 20 and "force_x = 9.9999999999999995e-07" in header
    assert np.allclose(fields.ux, 20e-6, rtol=1e-12)
    vtk = (tmp_path / "o" / "demo_0.vtk").read_text().splitlines()
    assert "config demo.cfg sha256:" in vtk[1]
    assert "20 steps on 4x3" in capsys.readouterr().out


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[grid]\nnx = 4\nny = 4\n[physics]\ntau_lb = 0.4\n[porosity]\nK = -1\n")
    assert main(["run", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "line 5" in err and "relaxation time" in err and "line 7" in err


def test_cellperm_table(tmp_path, capsys):
    assert main(["cellperm", "--delta", "0.5", "--resolution", "16", "--vtk", "--out-dir", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("delta,resolution,A11")
    vals = lines[1].split(",")
    assert float(vals[0]) == 0.5 and int(vals[1]) == 16
    assert float(vals[2]) > 0 and math.isclose(float(vals[2]), float(vals[5]), rel_tol=1e-9)
    assert sorted(os.listdir(tmp_path)) == ["cellperm_delta0.5_k1.vtk", "cellperm_delta0.5_k2.vtk"]


def test_cellperm_rejects_degenerate(capsys):
    assert main(["cellperm", "--delta", "1.0"]) == 2
    assert "delta" in capsys.readouterr().err


def test_bench_darcy_passes(capsys):
    assert main(["bench", "darcy_uniform"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("n,h,steps")
    assert "[ok] steady relative error" in captured.err


def test_bench_failing_band_exits_nonzero(capsys):
    # eight cells cannot meet the 1e-3 max-error band
    assert main(["bench", "brinkman_channel", "--ladder", "4,8"]) == 1
    assert "[FAIL] max relative u error at n=8" in capsys.readouterr().err
    assert main(["bench", "nonexistent"]) == 2


def test_bench_small_k_sweep(capsys):
    code = main(["bench", "--k-sweep", "--k-values", "1e6,1e-2", "--ny", "64"])
    captured = capsys.readouterr()
    out = captured.out.splitlines()
    assert out[0] == "K,ny,width,three_sqrt_K,ratio,flatness,steps" and len(out) == 3
    parabola, layer = out[1].split(","), out[2].split(",")
    assert abs(float(parabola[5]) - 2 / 3) < 0.01
    assert float(layer[5]) > float(parabola[5])
    within = abs(float(layer[4]) - 1) <= 0.2
    assert code == (0 if within else 1)
    assert f"3 sqrt(K) for K in [1e-4, 1e-2]: {within}" in captured.err


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "hlbm.cli", "--help"], capture_output=True, text=True, check=True)
    for sub in ("regime", "moments", "run", "cellperm", "bench"):
        assert sub in out.stdout


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
