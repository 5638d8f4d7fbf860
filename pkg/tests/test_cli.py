import json

import pytest

from sixdma import cli
from sixdma.config import ConfigError, default_config, load_config

DESK_CONFIG = """
[system]
n_antennas = 2
n_surfaces = 2

[codebook]
kind = sphere
n_positions = 8
n_rotations = 2

[scenario]
mu = 6

[offline]
omega = 3
max_iters = 3
restarts = 1

[evaluation]
n_realizations = 3

[sweep]
axis = power
values = 0.03 0.06
schemes = fpa
n_seeds = 2
"""


@pytest.fixture()
def desk_config(tmp_path):
    path = tmp_path / "desk.ini"
    path.write_text(DESK_CONFIG)
    return path


def test_print_defaults(capsys):
    assert cli.main(["--print-defaults"]) == 0
    out = capsys.readouterr().out
    # standard setup values
    assert "wavelength = 0.125" in out
    assert "power = 0.06" in out
    assert "n_antennas = 4" in out
    assert "n_surfaces = 16" in out
    assert "mu = 40.0" in out
    assert "xi = 0.2" in out


def test_print_defaults_roundtrips(tmp_path, capsys):
    cli.main(["--print-defaults"])
    text = capsys.readouterr().out
    path = tmp_path / "defaults.ini"
    path.write_text(text)
    assert load_config(path) == default_config()


def test_default_config_values():
    cfg = default_config()
    sys = cfg.system_config()
    assert sys.wavelength == 0.125
    assert sys.power == 0.06
    assert sys.n_antennas == 4 and sys.n_surfaces == 16
    assert cfg.scenario.mu == 40.0
    assert cfg.online.n_samples is None  # defaults to M^2 L^2
    assert cfg.offline.omega == 100
    assert cfg.codebook.cube_side == 1.0
    assert cfg.codebook.angle_steps == 3  # 27 rotations on the grid path


def test_load_config_overlays_defaults(desk_config):
    cfg = load_config(desk_config)
    assert cfg.system.n_antennas == 2
    assert cfg.system.wavelength == 0.125  # untouched default
    assert cfg.sweep.values == (0.03, 0.06)


def test_malformed_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[system]\nn_antennas = not_a_number\n")
    assert cli.main(["sweep", "--config", str(bad), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "config error" in err and "n_antennas" in err

    unknown = tmp_path / "unknown.ini"
    unknown.write_text("[nosuch]\nkey = 1\n")
    assert cli.main(["sweep", "--config", str(unknown), "--out", str(tmp_path)]) == 2

    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_generate_codebook(tmp_path, desk_config, capsys):
    out = tmp_path / "out"
    rc = cli.main(
        ["generate-codebook", "--config", str(desk_config), "--out", str(out)]
    )
    assert rc == 0
    assert (out / "codebook.txt").exists()
    assert (out / "codebook.png").exists()
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["codebook"]["violations"] == "reflection=0 blockage=0 distance=0"
    from sixdma.codebook import read_codebook, validate

    book = read_codebook(out / "codebook.txt")
    assert validate(book).ok


def test_generate_codebook_flag_overrides(tmp_path):
    out = tmp_path / "out"
    rc = cli.main(
        ["generate-codebook", "--kind", "sphere", "--M", "100", "--L", "2",
         "--out", str(out)]
    )
    assert rc == 0
    from sixdma.codebook import read_codebook, validate

    book = read_codebook(out / "codebook.txt")
    assert book.n_positions == 100 and book.n_rotations == 2
    assert validate(book).ok


def test_benchmark_single_row(tmp_path, desk_config):
    out = tmp_path / "out"
    rc = cli.main(
        ["benchmark", "--kind", "fpa", "--config", str(desk_config), "--out", str(out)]
    )
    assert rc == 0
    lines = (out / "results.csv").read_text().strip().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert len(lines) == 3  # hash comment, header, one row
    assert ",fpa," in lines[2]


def test_optimize_offline_outputs(tmp_path, desk_config):
    out = tmp_path / "out"
    rc = cli.main(
        ["optimize-offline", "--config", str(desk_config), "--out", str(out), "--seed", "1"]
    )
    assert rc == 0
    assert (out / "results.csv").exists()
    assert (out / "trace.csv").exists()
    assert (out / "trace.png").exists()
    assert (out / "selection.png").exists()
    meta = json.loads((out / "metadata.json").read_text())
    assert len(meta["selected_positions"]) == 2
    assert meta["config_hash"] == load_config(desk_config).config_hash()


def test_optimize_online_outputs(tmp_path, desk_config):
    out = tmp_path / "out"
    rc = cli.main(
        ["optimize-online", "--config", str(desk_config), "--out", str(out),
         "--seed", "2", "--T", "40"]
    )
    assert rc == 0
    assert (out / "csm_table.csv").exists()
    assert (out / "samples.csv").exists()
    assert (out / "csm_table.png").exists()
    log = (out / "samples.csv").read_text().strip().splitlines()
    assert len(log) == 1 + 40  # the --T override took effect


def test_sweep_deterministic_csv(tmp_path, desk_config):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        rc = cli.main(
            ["sweep", "--config", str(desk_config), "--out", str(out), "--seed", "7"]
        )
        assert rc == 0
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()
    assert (out1 / "sweep.png").exists()


def test_sweep_threads_match_serial(tmp_path, desk_config):
    out1, out2 = tmp_path / "serial", tmp_path / "parallel"
    cli.main(["sweep", "--config", str(desk_config), "--out", str(out1), "--seed", "3"])
    cli.main(
        ["sweep", "--config", str(desk_config), "--out", str(out2), "--seed", "3",
         "--threads", "2"]
    )
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()


def test_sweep_capacity_monotone_in_power(tmp_path):
    cfg = tmp_path / "power.ini"
    cfg.write_text(
        """
[system]
n_antennas = 2
n_surfaces = 4

[scenario]
mu = 6

[evaluation]
n_realizations = 4

[sweep]
axis = power
values = 0.01 0.04 0.1
schemes = fpa
n_seeds = 2
"""
    )
    out = tmp_path / "out"
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    rows = (out / "results.csv").read_text().strip().splitlines()[2:]
    caps = [float(r.split(",")[3]) for r in rows]
    values = [float(r.split(",")[1]) for r in rows]
    ordered = [c for _, c in sorted(zip(values, caps))]
    assert ordered[0] <= ordered[1] <= ordered[2]


def test_sample_users(tmp_path, desk_config):
    out = tmp_path / "out"
    rc = cli.main(
        ["sample-users", "--config", str(desk_config), "--out", str(out), "--seed", "5"]
    )
    assert rc == 0
    lines = (out / "users.csv").read_text().strip().splitlines()
    assert lines[0] == "user,x,y,z"


def test_no_command_shows_help(capsys):
    assert cli.main([]) == 2
