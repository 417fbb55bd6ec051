import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlbm import io
from hlbm.config import SCHEMA, ConfigError, load_config, parse_config, parse_override
from hlbm.lattice import MacroFields, run

MINIMAL = "[grid]\nnx = 32\nny = 32\n"


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg["grid"] == {"nx": 32, "ny": 32}
    assert cfg.get("physics.tau_lb") == 0.8
    assert math.isinf(cfg.get("porosity.K"))
    assert cfg.get("boundary.x") == "periodic"
    for sec, keys in SCHEMA.items():
        assert set(cfg[sec]) == set(keys)
    assert cfg.provenance.source_text == MINIMAL


def test_serialize_round_trip():
    text = MINIMAL + "[physics]\ntau_lb = 0.61\nforce_x = 1e-7\n[porosity]\nK = 12.5\n[output]\nformat = csv, vtk\n"
    first = parse_config(text)
    again = parse_config(first.serialize())
    assert again == first
    assert parse_config(again.serialize()).serialize() == first.serialize()


@settings(max_examples=40, deadline=None)
@given(
    tau=st.floats(0.5001, 3.0), fx=st.floats(-1e-3, 1e-3), K=st.floats(10.0, 1e8),
    nx=st.integers(1, 500), eps=st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=4),
)
def test_round_trip_property(tau, fx, K, nx, eps):
    text = (
        f"[grid]\nnx = {nx}\nny = 3\n[physics]\ntau_lb = {tau!r}\nforce_x = {fx!r}\n"
        f"[porosity]\nK = {K!r}\n[regime]\neps = {', '.join(map(repr, eps))}\n"
    )
    first = parse_config(text)
    assert parse_config(first.serialize()) == first
    assert first.get("physics.tau_lb") == tau and first.get("regime.eps") == tuple(eps)


def test_low_relaxation_time_message_with_line():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "[physics]\ntau_lb = 0.4\n")
    (msg,) = info.value.errors
    assert "relaxation time must exceed 0.5" in msg and msg.startswith("line 5")


def test_negative_permeability_names_porosity_control():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "[porosity]\nK = -1\n")
    (msg,) = info.value.errors
    assert "porosity control" in msg and "K > 0" in msg and msg.startswith("line 5")


def test_all_errors_collected():
    text = "[grid]\nnx = 0\n[physics]\ntau_lb = 0.4\nbogus = 1\n[nowhere]\na = 1\n[porosity]\nK = abc\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    errs = info.value.errors
    joined = "\n".join(errs)
    assert "line 5: unknown key physics.bogus" in joined
    assert "line 6: unknown section [nowhere]" in joined
    assert "missing required key grid.ny" in joined
    assert "line 9: porosity.K = 'abc' is not a valid value" in joined
    assert "line 2: grid.nx: must be at least 1" in joined
    assert "relaxation time" in joined
    assert len(errs) == 6


def test_negative_control_rejected():
    with pytest.raises(ConfigError, match="negative"):
        parse_config(MINIMAL + "[physics]\ntau_lb = 2.0\n[porosity]\nK = 0.1\n")


def test_overrides_apply_and_validate():
    cfg = parse_config(MINIMAL, ["physics.tau_lb=0.9", "grid.nx = 8"])
    assert cfg.get("physics.tau_lb") == 0.9 and cfg.get("grid.nx") == 8
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL, ["physics.nope=1", "bad", "physics.tau_lb=0.2"])
    joined = "\n".join(info.value.errors)
    assert "unknown key physics.nope" in joined and "expected section.key=value" in joined
    assert "--set physics.tau_lb: physics.tau_lb: relaxation time" in joined
    assert parse_override("a.b = c") == ("a", "b", "c")


def test_required_keys_optional_for_other_commands():
    cfg = parse_config("", required=False)
    assert cfg.get("grid.nx") is None
    with pytest.raises(ConfigError, match="missing required"):
        parse_config("")


def test_syntax_error_and_missing_file():
    with pytest.raises(ConfigError, match="line"):
        parse_config("nx = 3\n")
    with pytest.raises(ConfigError, match="No such file"):
        load_config("/nonexistent/run.cfg")


def test_resolved_config_builds_components():
    cfg = parse_config(MINIMAL + "[boundary]\ny = wall\n[bench]\ncase = poiseuille\nladder = 8, 16\n")
    sim = cfg.simulation_config()
    assert sim.periodic == (True, False) and sim.tau == 0.8
    assert cfg.unit_cell_spec().resolution == 64
    case = cfg.benchmark_case()
    assert case.name == "poiseuille" and case.ladder == (8, 16)


def _uniform(n=2, m=2, step=0):
    return MacroFields(
        rho=np.full((n, m), 1.0), ux=np.full((n, m), 0.01),
        uy=np.zeros((n, m)), p=np.full((n, m), 1 / 3), step=step,
    )


def test_csv_two_by_two(tmp_path):
    path = tmp_path / "f.csv"
    io.write_csv(_uniform(), str(path), header=["hlbm test", "[grid]", "nx = 2"])
    lines = path.read_text().splitlines()
    assert lines[:4] == ["# hlbm test", "# [grid]", "# nx = 2", "# step 0"]
    assert lines[4] == "x,y,rho,ux,uy,p"
    rows = lines[5:]
    assert len(rows) == 4
    assert rows[0] == "0,0,1,0.01,0,0.33333333333333331"
    assert [r.split(",")[:2] for r in rows] == [["0", "0"], ["1", "0"], ["0", "1"], ["1", "1"]]


def test_csv_read_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(1)
    f = MacroFields(*(rng.standard_normal((3, 4)) * 10.0 ** rng.integers(-300, 300, (3, 4)) for _ in range(4)), step=17)
    path = str(tmp_path / "r.csv")
    io.write_csv(f, path, ["a", "b"])
    back, header = io.read_csv(path)
    assert header == ["a", "b"] and back.step == 17
    for name in ("rho", "ux", "uy", "p"):
        assert np.array_equal(getattr(back, name), getattr(f, name))


GOLDEN_VTK = """\
# vtk DataFile Version 3.0
tiny step 3
ASCII
DATASET STRUCTURED_POINTS
DIMENSIONS 2 1 1
ORIGIN 0 0 0
SPACING 1 1 1
POINT_DATA 2
SCALARS rho double 1
LOOKUP_TABLE default
1
1.5
SCALARS p double 1
LOOKUP_TABLE default
0.33333333333333331
0.5
VECTORS velocity double
0.25 -0.125 0
0 0 0
"""


def test_vtk_golden_bytes(tmp_path):
    f = MacroFields(
        rho=np.array([[1.0], [1.5]]), ux=np.array([[0.25], [0.0]]),
        uy=np.array([[-0.125], [0.0]]), p=np.array([[1 / 3], [0.5]]), step=3,
    )
    path = tmp_path / "t.vtk"
    io.write_fields(f, "vtk", str(path), title="tiny")
    assert path.read_bytes() == GOLDEN_VTK.encode()


def test_write_errors_name_the_path(tmp_path):
    bad = str(tmp_path / "missing" / "x.csv")
    with pytest.raises(OSError, match="missing/x.csv"):
        io.write_csv(_uniform(), bad)
    with pytest.raises(ValueError, match="format"):
        io.write_fields(_uniform(), "hdf5", str(tmp_path / "x"))


def test_field_path_naming():
    assert io.field_path("out", "demo", 40, "vtk") == "out/demo_40.vtk"


def test_identical_config_gives_identical_csv(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    text = MINIMAL.replace("32", "6") + "[physics]\nforce_x = 1e-5\nux0 = 0.01\n[boundary]\ny = wall\n[output]\nsteps = 50\n"
    outs = []
    for _ in range(2):
        cfg = parse_config(text)
        snap = run(cfg.simulation_config())[-1]
        outs.append(io.csv_text(snap, cfg.header_lines()).encode())
    assert outs[0] == outs[1]
    assert b"generated 2023-11-14T22:13:20+00:00" in outs[0]
