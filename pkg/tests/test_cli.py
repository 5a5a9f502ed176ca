"""
Tests for the quantum-coarse-grain CLI.

Covers argument parsing helpers, exit codes and the files each command writes.
"""

import argparse
import csv
import json
from unittest.mock import patch

import numpy as np
import pytest

from coarse_grain.cli import (
    EXIT_ERROR,
    EXIT_INFEASIBLE,
    EXIT_OK,
    build_parser,
    main,
    parse_channel,
    parse_grid,
)
from coarse_grain.core.channels import depolarizing_channel
from coarse_grain.core.config import CoarseGrainConfig
from coarse_grain.core.errors import CoarseGrainError
from coarse_grain.experiments.records import CSV_COLUMNS


@pytest.fixture
def config():
    cfg = CoarseGrainConfig(compression_enabled=False)
    with patch("coarse_grain.cli.get_config", return_value=cfg):
        yield cfg


class TestParseGrid:
    def test_linspace(self):
        assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]

    def test_list(self):
        assert parse_grid("0.1, 0.2,0.3") == [0.1, 0.2, 0.3]

    @pytest.mark.parametrize("text", ["0:1", "a,b"])
    def test_invalid(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_grid(text)


class TestParseChannel:
    def test_named_channels(self):
        cfg = CoarseGrainConfig()
        assert parse_channel("id", cfg).dim_in == 2
        assert parse_channel("id:4", cfg).dim_in == 4
        assert parse_channel("swap", cfg).dim_in == 4
        assert parse_channel("zint:0.5", cfg).dim_out == 4
        assert len(parse_channel("depol:0.3", cfg).kraus) == 5
        np.testing.assert_allclose(parse_channel("Z", cfg).kraus[0], np.diag([1, -1]))

    def test_channel_file(self, tmp_path):
        path = tmp_path / "channel.json"
        path.write_text(json.dumps(depolarizing_channel(0.2).to_dict()))
        channel = parse_channel(f"@{path}", CoarseGrainConfig())
        assert channel.dim_in == 2
        assert len(channel.kraus) == 5

    def test_unknown(self):
        with pytest.raises(CoarseGrainError, match="unknown channel"):
            parse_channel("amplitude:0.1", CoarseGrainConfig())


class TestCommands:
    def test_no_command_prints_help(self, capsys):
        assert main([]) == EXIT_OK
        assert "usage: coarse-grain" in capsys.readouterr().out

    def test_diamond(self, config, capsys):
        assert main(["diamond", "id", "z"]) == EXIT_OK
        value = float(capsys.readouterr().out.strip().rsplit("=", 1)[1])
        assert value == pytest.approx(2.0, abs=1e-6)

    def test_feasibility_infeasible_exit_code(self, config, capsys):
        assert main(["feasibility", "--scenario", "3"]) == EXIT_INFEASIBLE
        assert "no emergent channel exists" in capsys.readouterr().out

    def test_feasibility_writes_choi(self, config, tmp_path):
        out = tmp_path / "choi.json"
        assert main(["feasibility", "--scenario", "1", "--out", str(out)]) == EXIT_OK
        data = json.loads(out.read_bytes())
        assert data["scenario"] == 1
        assert data["choi"]["dims"] == [2, 2]

    def test_bench_writes_csv_and_json_copy(self, config, tmp_path):
        out = tmp_path / "bench.csv"
        copy = tmp_path / "bench.json"
        argv = f"bench --scenario 2 --samples 12 --seed 5 --out {out} --json-copy {copy}".split()
        assert main(argv) == EXIT_OK

        with open(out, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == CSV_COLUMNS
        assert len(rows) == 13
        assert {row[0] for row in rows[1:]} == {"2"}

        document = json.loads(copy.read_bytes())
        assert document["meta"]["scenario_id"] == 2
        assert document["meta"]["seed"] == 5
        assert [r["state_id"] for r in document["records"]] == list(range(12))

    def test_bench_without_out_prints_csv(self, config, capsys):
        assert main(["bench", "--samples", "4"]) == EXIT_OK
        captured = capsys.readouterr()
        rows = list(csv.reader(captured.out.splitlines()))
        assert rows[0] == CSV_COLUMNS
        assert [row[2] for row in rows[1:]] == ["0", "1", "2", "3"]
        assert "📊 4 records" in captured.err
        assert "median" in captured.err

    def test_bench_without_out_prints_json(self, config, capsys):
        assert main(["bench", "--samples", "3", "--format", "json"]) == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["meta"]["samples"] == 3
        assert [r["state_id"] for r in document["records"]] == [0, 1, 2]

    def test_timesweep_without_out_prints_records(self, config, capsys):
        assert main(["timesweep", "--samples", "2", "--t-grid", "0,1"]) == EXIT_OK
        assert len(capsys.readouterr().out.splitlines()) == 5

    def test_failed_sink_is_reported(self, config, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        copy = tmp_path / "bench.json"
        argv = f"bench --samples 3 --out {out} --json-copy {copy}".split()
        with patch(
            "coarse_grain.storage.exporter.JsonRecordExporter.export_batch",
            side_effect=OSError("disk full"),
        ):
            assert main(argv) == EXIT_OK
        printed = capsys.readouterr().out
        assert f"💾 Wrote 3 records to {out}" in printed
        assert f"{copy} is incomplete" in printed

    def test_show_reads_compressed_copy(self, config, tmp_path, capsys):
        config.compression_enabled = True
        copy = tmp_path / "bench.json.gz"
        argv = f"bench --samples 6 --seed 3 --out {tmp_path / 'b.csv'} --json-copy {copy}".split()
        assert main(argv) == EXIT_OK
        assert copy.read_bytes()[:2] == b"\x1f\x8b"
        capsys.readouterr()
        assert main(["show", str(copy)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "📄 scenario 1, seed 3" in out
        assert "📊 6 records" in out

    def test_show_missing_file(self, config, tmp_path):
        assert main(["show", str(tmp_path / "missing.json")]) == EXIT_ERROR

    def test_show_rejects_garbage(self, config, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_bytes(b"\xff\xfe")
        assert main(["show", str(path)]) == EXIT_ERROR
        assert "cannot read" in capsys.readouterr().err

    def test_tol_reaches_the_solver(self, config):
        with patch("coarse_grain.cli.feasibility_emergent") as solve:
            solve.return_value.to_dict.return_value = {}
            assert main(["feasibility", "--tol", "1e-6"]) == EXIT_OK
        assert solve.call_args.kwargs["feas_tol"] == 1e-6
        assert solve.call_args.kwargs["gap_tol"] == 1e-6

    def test_tol_is_accepted_by_every_command(self):
        parser = build_parser()
        for argv in (["bench"], ["diamond", "id", "z"], ["sdp-tables"], ["petz"]):
            assert parser.parse_args(argv + ["--tol", "1e-7"]).tol == 1e-7
        assert parser.parse_args(["sdp-tables", "--bisection-tol", "1e-4"]).bisection_tol == 1e-4

    def test_invalid_generator_is_an_error(self, config, capsys):
        assert main(["bench", "--generator", "GHZ", "--samples", "2"]) == EXIT_ERROR
        assert "unknown generator" in capsys.readouterr().err

    def test_matrix_csv(self, config, tmp_path):
        out = tmp_path / "matrix.csv"
        assert main(["matrix", "--scenario", "4", "--out", str(out)]) == EXIT_OK
        with open(out, newline="") as f:
            rows = list(csv.reader(f))
        assert len(rows) == 5
        assert rows[0][1:] == ["ME", "MM", "RAND", "W"]

    def test_timesweep(self, config, tmp_path):
        out = tmp_path / "sweep.csv"
        argv = ["timesweep", "--samples", "2", "--t-grid", "0:1:3", "--out", str(out)]
        assert main(argv) == EXIT_OK
        assert len(out.read_text().splitlines()) == 7

    def test_petz_dump(self, config, capsys):
        assert main(["petz", "--scenario", "2", "--generator", "WERNER:0.2"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["generator"] == "WERNER:0.2"
        assert data["choi"]["dims"] == [2, 2]


class TestConfigCommand:
    def test_show(self, config, capsys):
        assert main(["config", "--show"]) == EXIT_OK
        assert '"samples": 10000' in capsys.readouterr().out

    def test_summary(self, config, capsys):
        assert main(["config"]) == EXIT_OK
        assert "Samples: 10,000" in capsys.readouterr().out

    def test_set_profile(self, config):
        with patch("coarse_grain.cli.set_config") as mock_set:
            assert main(["config", "--profile", "debug"]) == EXIT_OK
        assert mock_set.call_args[0][0].samples == 200
