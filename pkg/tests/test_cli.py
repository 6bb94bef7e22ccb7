import json
import shutil

import pytest

from nanofiber_orbit.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, build_parser, main


@pytest.fixture
def out(pipe, tmp_path):
    d = tmp_path / "out"
    (d / "cache").mkdir(parents=True)
    shutil.copy(pipe.cache_path, d / "cache" / pipe.cache_path.name)
    return d


def test_parser_accepts_global_flags_on_either_side():
    a = build_parser().parse_args(["--threads", "3", "mode", "--seed", "7"])
    assert a.threads == 3 and a.seed == 7 and a.command == "mode"
    with pytest.raises(SystemExit):
        build_parser().parse_args(["fit"])


def test_mode_and_potential(out, capsys):
    assert main(["mode", "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "mode.json").read_text())
    assert summary["trap"]["V"] == pytest.approx(1.2395, abs=1e-4)
    assert main(["potential", "--m", "468", "--out", str(out)]) == EXIT_OK
    assert (out / "potential_m468.csv").exists()
    assert "potential_m468.csv" in capsys.readouterr().out


def test_eigen(out, capsys):
    assert main(["eigen", "--m", "468", "--count", "2", "--out", str(out)]) == EXIT_OK
    data = json.loads((out / "eigen_m468_energies.json").read_text())
    assert [s["nu"] for s in data["states"]] == [1, 2]
    assert [s["nodes"] for s in data["states"]] == [0, 1]
    assert "nu=1" in capsys.readouterr().out


def test_dispersion_and_probe_use_cache(out, capsys):
    assert main(["dispersion", "--out", str(out), "--m-min", "440", "--m-max", "520"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "T_rev" in text and "T_rot" in text
    assert main(["probe", "--out", str(out), "--t-max", "2e-5", "--axis-angle", "0.3"]) == EXIT_OK
    assert json.loads((out / "probe.json").read_text())["axis_angle_rad"] == 0.3


def test_evolve_time_list(out, tmp_path):
    times = tmp_path / "times.txt"
    times.write_text("# seconds\n0\n2e-5\n")
    assert main(["evolve", "--out", str(out), "--t-list", str(times), "--t", "1e-5"]) == EXIT_OK
    assert json.loads((out / "evolve.json").read_text())["times_s"] == [0.0, 1e-5, 2e-5]


def test_config_file_and_json_output(out, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("output.format = json\n")
    assert main(["--config", str(cfg), "--out", str(out), "mode"]) == EXIT_OK
    assert (out / "mode_trap.json").exists()


@pytest.mark.parametrize("argv", [
    ["eigen", "--m", "468", "--count", "0"],
    ["evolve", "--t", "-1"],
    ["dispersion", "--m-min", "500", "--m-max", "400"],
])
def test_config_errors(out, argv, capsys):
    assert main(argv + ["--out", str(out)]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("fiber.colour = red\n")
    assert main(["--config", str(cfg), "mode", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "fiber.colour" in capsys.readouterr().err


def test_numerical_failure(out, capsys):
    # no trapping well at m = 100: the centrifugal term is too weak
    assert main(["eigen", "--m", "100", "--out", str(out)]) == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err
