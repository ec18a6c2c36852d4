import csv

import pytest

from dlia import cli
from dlia.errors import ParseError, ValidationError
from dlia.presets import CSV_HEADER, PRESETS, crossover_db, run_preset


def test_config_example():
    text = ("layout = hex19\nsnr_db = 0:5:40\ndrops = 500\nseed = 42\nscheme = unified_ia\n"
            "k_users = 10\nstreams = 3\nkappa = fixed:0.64")
    spec = cli.parse_config(text)
    assert spec.layout == "hex19_wraparound"
    assert spec.scheme.kappa_mode == 0.64
    assert spec.snr_db == tuple(float(x) for x in range(0, 41, 5))
    assert (spec.drops, spec.seed, spec.k_users, spec.streams) == (500, 42, 10, 3)


def test_empty_defaults():
    spec = cli.parse_config("")
    assert spec.layout == "two_cell"
    assert (spec.m_dims, spec.n_dims, spec.k_users, spec.streams, spec.drops, spec.seed) == (4, 4, 10, 3, 500, 0)
    assert spec.scheme.kind == "unified_ia" and spec.scheme.kappa_mode == "auto"


def test_comments_and_lists():
    spec = cli.parse_config("# header\nsnr_db = 0, 10, 25  # trailing\n\nscheme = iter_mf\n")
    assert spec.snr_db == (0.0, 10.0, 25.0)


def test_streams_too_large():
    with pytest.raises(ValidationError) as exc:
        cli.parse_config("streams = 9")
    assert exc.value.key == "streams"


@pytest.mark.parametrize("text,line", [("bogus = 1", 1), ("drops = 3\nno equals here", 2),
                                       ("seed = 1\nseed = 2", 2), ("drops =", 1)])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as exc:
        cli.parse_config(text)
    assert exc.value.line == line


@pytest.mark.parametrize("text,key", [("drops = many", "drops"), ("kappa = sometimes", "kappa"),
                                      ("layout = torus", "layout"), ("scheme = mmse", "scheme"),
                                      ("snr_db = 0:0:10", "snr_db"), ("layout = macro_pico", "d_over_r")])
def test_validation_errors(text, key):
    with pytest.raises(ValidationError) as exc:
        cli.parse_config(text)
    assert exc.value.key == key


def test_snr_grid():
    assert cli.parse_snr_grid("-10:5:10") == (-10.0, -5.0, 0.0, 5.0, 10.0)
    assert cli.parse_snr_grid("0:2.5:5") == (0.0, 2.5, 5.0)


def test_run_command(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("scheme = iter_mf\nsnr_db = 0, 20\ndrops = 2\n")
    assert cli.main(["run", "--config", str(cfg)]) == cli.EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == CSV_HEADER and len(out) == 3
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "4"]) == 0
    rows = list(csv.DictReader((tmp_path / "o" / "iter_mf.csv").open()))
    assert [r["seed"] for r in rows] == ["4", "4"]


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert cli.main(["run", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == cli.EXIT_RUNTIME
    assert cli.main(["preset", "fig99"]) == cli.EXIT_CONFIG
    assert cli.main(["frobnicate"]) == cli.EXIT_CONFIG
    assert cli.main(["list-presets"]) == cli.EXIT_OK


def test_sweep_kappa(tmp_path, capsys):
    code = cli.main(["sweep-kappa", "--layout", "hex19", "--snr-db", "20", "--drops", "2", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "kappa_sweep.csv").open()))
    assert [float(r["kappa"]) for r in rows] == [round(0.1 * i, 1) for i in range(11)]
    assert "peak at kappa" in capsys.readouterr().err


@pytest.mark.parametrize("name", list(PRESETS))
def test_preset_smoke(name, tmp_path):
    lines = []
    paths = run_preset(name, 0, tmp_path, drops=2, report=lines.append)
    assert paths[-1].name == "plot.gp"
    for p in paths[:-1]:
        text = p.read_text()
        assert text.splitlines()[0] == CSV_HEADER
        assert len(text.splitlines()) > 1
        assert p.name in paths[-1].read_text()
    assert lines


def test_fig3_shape(tmp_path):
    paths = run_preset("fig3_two_cell", 0, tmp_path, drops=2, report=lambda s: None)
    names = sorted(p.name for p in paths)
    assert names == ["iter_mf.csv", "plot.gp", "zf_ia.csv"]
    rows = list(csv.DictReader((tmp_path / "zf_ia.csv").open()))
    assert [float(r["snr_db"]) for r in rows] == [float(x) for x in range(0, 41, 5)]


def test_preset_deterministic(tmp_path):
    a = run_preset("fig5_hex19", 3, tmp_path / "a", drops=2, report=lambda s: None)
    b = run_preset("fig5_hex19", 3, tmp_path / "b", drops=2, report=lambda s: None)
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_crossover():
    assert crossover_db([0, 10], [1, 3], [2, 2]) == pytest.approx(5.0)
    assert crossover_db([0, 10], [1, 1], [2, 2]) is None
