from __future__ import annotations

import json
from pathlib import Path

import numba
import pytest

from radialwave import cli
from radialwave.errors import CFLError, ConfigError, DomainError
from radialwave.plots import emit_plots

SMALL = """\
scenario.name = small
model.alpha = 0.5
model.beta = -0.5
data.radius = 1
data.g_amplitude = 0.5
grid.lambda_max = 400
grid.dr = 0.0005
grid.times = 0, 1
run.solvers = spectral
run.diagnostics = energy, leakage
"""


def _write(tmp_path: Path, text: str, name: str = "sc.cfg") -> Path:
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("small")
    cfg = _write(base, SMALL)
    code = cli.main(["run", str(cfg), "--out", str(base / "out")])
    return code, base / "out"


def test_run_writes_bundle(small_run):
    code, out = small_run
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["passed"] and manifest["scenario"] == "small"
    assert manifest["config"]["model.alpha"] == "0.5"
    assert manifest["c0"]["value"] == pytest.approx(manifest["c0"]["theory"], rel=1e-6)
    assert (out / "snapshots" / "spectral_t001.csv").exists()
    assert (out / "energy.csv").read_text().splitlines()[0] == "t,K,P,E"
    assert (out / "plots" / "energy.svg").exists()


def test_run_is_deterministic(tmp_path, small_run):
    _, first = small_run
    cfg = _write(tmp_path, SMALL)
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "again")]) == 0
    for p in sorted(first.rglob("*")):
        if p.is_file():
            assert p.read_bytes() == (tmp_path / "again" / p.relative_to(first)).read_bytes(), p.name


def test_cfl_violation_exits_before_any_output(tmp_path, capsys):
    text = SMALL.replace("run.solvers = spectral", "run.solvers = fdtd\nfdtd.dr = 0.01\nfdtd.dt = 0.02")
    out = tmp_path / "out"
    assert cli.main(["run", str(_write(tmp_path, text)), "--out", str(out)]) == 1
    assert not out.exists()
    err = capsys.readouterr().err
    assert "CFLError" in err and "[wave]" in err
    with pytest.raises(CFLError):
        cli.load_scenario(_write(tmp_path, text))


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        cli.load_scenario(_write(tmp_path, SMALL + "grid.bogus = 1\n"))
    with pytest.raises(ConfigError):
        cli.load_scenario(_write(tmp_path, SMALL.replace("spectral", "magic")))
    with pytest.raises(ConfigError):
        cli.load_scenario(_write(tmp_path, SMALL + "grid.r_max = 2\n"))
    with pytest.raises(ConfigError):
        cli.load_scenario(tmp_path / "missing.cfg")
    with pytest.raises(DomainError):
        cli.load_scenario(_write(tmp_path, SMALL.replace("spectral", "series") + "series.r_dom = 1.5\n"))


def test_resolution_guard_is_checked_up_front(tmp_path):
    text = SMALL.replace("grid.dr = 0.0005", "grid.dr = 0.01")
    assert cli.main(["check", str(_write(tmp_path, text)), "--out", str(tmp_path / "o")]) == 1
    assert not (tmp_path / "o").exists()


def test_parse_values():
    assert cli.parse_values("0, 1.5, 2") == [0.0, 1.5, 2.0]
    assert cli.parse_values("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ConfigError):
        cli.parse_values("1:0:0.1")
    with pytest.raises(ConfigError):
        cli.parse_values("a, b")


def test_failed_diagnostic_exits_two(tmp_path):
    # a tiny agreement tolerance turns the series/spectral comparison into a failure
    text = SMALL.replace("run.solvers = spectral", "run.solvers = spectral, series\nseries.r_dom = 2.5")
    text = text.replace("run.diagnostics = energy, leakage", "run.diagnostics = agreement\nagreement.tol = 1e-30")
    text = text.replace("grid.lambda_max = 400", "grid.lambda_max = 1000").replace("grid.dr = 0.0005", "grid.dr = 0.0002")
    assert cli.main(["check", str(_write(tmp_path, text)), "--out", str(tmp_path / "o")]) == 2


def test_spectrum_command(tmp_path):
    out = tmp_path / "spec"
    # the thread count is process-wide, so pass the current one
    threads = str(numba.get_num_threads())
    assert cli.main(["spectrum", str(_write(tmp_path, SMALL)), "--out", str(out), "--threads", threads]) == 0
    assert (out / "spectrum.csv").read_text().startswith("lambda,weight,re_F,im_F,re_G,im_G")
    assert (out / "plancherel.csv").exists()


def test_emit_plots_on_empty_bundle(tmp_path):
    (tmp_path / "snapshots").mkdir()
    (tmp_path / "energy.csv").write_text("t,K,P,E\n")
    with pytest.warns(UserWarning):
        assert emit_plots(tmp_path) == []
    assert not (tmp_path / "plots").exists()


def test_bundled_scenarios_parse():
    for name in ("h3_huygens", "h4_solvers", "paley_wiener"):
        sc = cli.load_scenario(Path(cli.__file__).parent / "scenarios" / f"{name}.cfg")
        assert sc.name == name
