"""Command-line interface: subcommands, exit codes, determinism."""

import os

import pytest

from thzris.cli import cli_main
from thzris.harness import config_to_text, preset

TINY_CFG = """
n_bs = 8
n_ris = 8
n_ms = 4
m_bs = 4
m_ms = 4
n_streams = 2
n_realizations = 2
snr_grid_db = 10
schemes = agd, random
master_seed = 3
max_iterations = 10
"""


@pytest.fixture()
def tiny_cfg_path(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_CFG)
    return str(path)


class TestRun:
    def test_run_writes_csv(self, tiny_cfg_path, tmp_path, capsys):
        out = str(tmp_path / "out")
        assert cli_main(["run", "--config", tiny_cfg_path, "--out", out]) == 0
        csv_path = os.path.join(out, "tiny.csv")
        assert os.path.exists(csv_path)
        assert "wrote" in capsys.readouterr().out

    def test_repeat_runs_identical(self, tiny_cfg_path, tmp_path):
        out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
        assert cli_main(["run", "--config", tiny_cfg_path, "--seed", "42",
                         "--out", out_a]) == 0
        assert cli_main(["run", "--config", tiny_cfg_path, "--seed", "42",
                         "--out", out_b, "--workers", "2"]) == 0
        bytes_a = open(os.path.join(out_a, "tiny.csv"), "rb").read()
        bytes_b = open(os.path.join(out_b, "tiny.csv"), "rb").read()
        assert bytes_a == bytes_b

    def test_config_error_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("n_bs = 4\nm_bs = 6\n")
        assert cli_main(["run", "--config", str(bad)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, tmp_path):
        assert cli_main(["run", "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_unknown_flag_exits_2(self, tiny_cfg_path, capsys):
        code = cli_main(["run", "--config", tiny_cfg_path, "--frobnicate"])
        capsys.readouterr()
        assert code == 2

    def test_sweep_override(self, tiny_cfg_path, tmp_path):
        out = str(tmp_path / "out")
        assert cli_main(["run", "--config", tiny_cfg_path, "--out", out,
                         "--sweep", "vs_bits"]) == 0
        lines = open(os.path.join(out, "tiny.csv")).read().splitlines()
        sweep_values = {ln.split(",")[0] for ln in lines[1:]}
        assert sweep_values == {"1", "2", "3", "4"}


class TestPresets:
    def test_list_names_all(self, capsys):
        assert cli_main(["presets", "list"]) == 0
        out = capsys.readouterr().out.split()
        assert "fig5-desk" in out and "fig7-paper" in out
        assert len(out) == 8

    def test_show_round_trips(self, capsys):
        assert cli_main(["presets", "show", "fig7-desk"]) == 0
        out = capsys.readouterr().out
        assert out == config_to_text(preset("fig7-desk"))

    def test_show_unknown_exits_2(self, capsys):
        assert cli_main(["presets", "show", "fig12-desk"]) == 2
        capsys.readouterr()


class TestConfigReference:
    def test_prints_defaults(self, capsys):
        assert cli_main(["config-reference"]) == 0
        out = capsys.readouterr().out
        assert "n_bs" in out and "master_seed" in out and "fixed_step" in out


class TestReplay:
    def test_replay_dumped_channel(self, tiny_cfg_path, tmp_path, capsys):
        out = str(tmp_path / "out")
        dumps = str(tmp_path / "dumps")
        assert cli_main(["run", "--config", tiny_cfg_path, "--out", out,
                         "--dump-channels", dumps]) == 0
        dump_files = sorted(os.listdir(dumps))
        assert len(dump_files) == 2
        code = cli_main(["replay", "--channel-dump",
                         os.path.join(dumps, dump_files[0])])
        out_text = capsys.readouterr().out
        assert code == 0
        assert "agd" in out_text and "random" in out_text

    def test_replay_missing_file_exits_1(self, capsys):
        assert cli_main(["replay", "--channel-dump", "/no/such/file.txt"]) == 1
        capsys.readouterr()
