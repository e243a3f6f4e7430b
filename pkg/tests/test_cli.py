"""Command-line interface: config parsing, CSV format, exit codes, determinism."""

import math
import shutil

import numpy as np
import pytest

from lzs_search import DriveParams, StateVector, Trajectory
from lzs_search.cli import (
    FORMAT_VERSION,
    SUBCOMMANDS,
    ConfigError,
    emit_csv,
    main,
    parse_axis,
    parse_config,
    read_csv,
)
from lzs_search.experiments import Axis, SweepGrid


class TestParseAxis:
    def test_linear(self):
        ax = parse_axis("1:5:9", "omega_axis")
        assert (ax.name, ax.lo, ax.hi, ax.points, ax.log) == ("omega", 1.0, 5.0, 9, False)

    def test_log(self):
        ax = parse_axis("0.1:10:3:log", "omega1_axis")
        assert ax.log and ax.name == "omega1"
        assert np.allclose(ax.values(), [0.1, 1.0, 10.0])

    @pytest.mark.parametrize(
        "spec,frag",
        [
            ("1:5", "min:max:points"),
            ("1:5:3:linear", "fourth field"),
            ("a:5:3", "unparseable"),
            ("1:5:0", "points"),
        ],
    )
    def test_errors_name_the_key(self, spec, frag):
        with pytest.raises(ConfigError, match=frag) as err:
            parse_axis(spec, "omega_axis")
        assert "omega_axis" in str(err.value)


class TestParseConfig:
    def test_flag_types(self):
        cfg = parse_config(
            [
                "grover-run",
                "--n", "6",
                "--amplitude-a", "1.0",
                "--omega", "0.5",
                "--n-list", "6,8,10",
                "--average-phases",
            ]
        )
        assert cfg.values["n"] == 6
        assert cfg.values["a"] == 1.0
        assert cfg.values["omega"] == 0.5
        assert cfg.values["n_list"] == (6, 8, 10)
        assert cfg.values["average_phases"] is True

    def test_config_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# a comment line\n"
            "\n"
            "delta = 0.125   # trailing comment\n"
            "omega = 2.5\n"
            "a = 1.0\n"
        )
        cfg = parse_config(["grover-run", "--config", str(path)])
        assert cfg.values["delta"] == 0.125
        assert cfg.values["omega"] == 2.5
        assert cfg.values["a"] == 1.0

    def test_flags_override_config(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("omega = 1.0\n")
        cfg = parse_config(["grover-run", "--config", str(path), "--omega", "2.0"])
        assert cfg.values["omega"] == 2.0

    def test_unknown_key_names_line(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("omega = 1.0\njunk = 3\n")
        with pytest.raises(ConfigError, match="unknown key 'junk'") as err:
            parse_config(["grover-run", "--config", str(path)])
        assert f"{path}:2" in str(err.value)

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("omega 1.0\n")
        with pytest.raises(ConfigError, match="key = value"):
            parse_config(["grover-run", "--config", str(path)])

    def test_empty_value(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("omega =\n")
        with pytest.raises(ConfigError, match="empty value"):
            parse_config(["grover-run", "--config", str(path)])

    def test_missing_config_file(self):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(["grover-run", "--config", "/nonexistent/run.cfg"])

    def test_bad_number_names_flag(self):
        with pytest.raises(ConfigError, match="omega"):
            parse_config(["grover-run", "--omega", "fast"])

    def test_unknown_subcommand(self):
        with pytest.raises(ConfigError, match="unknown subcommand"):
            parse_config(["frobnicate"])

    def test_subcommand_list_is_stable(self):
        assert SUBCOMMANDS == (
            "double-crossing",
            "grover-run",
            "runtime-scaling",
            "noise-map",
            "three-level-scan",
            "rwa-table",
            "rwa-vs-exact",
            "selftest",
        )


class TestCsvFormat:
    @staticmethod
    def _trajectory() -> Trajectory:
        times = np.array([0.0, 0.1, 0.25])
        p1 = np.array([0.0, 1.0 / 3.0, 0.6789012345678901])
        pops = np.stack([1.0 - p1, p1], axis=1)
        return Trajectory(
            times=times,
            populations=pops,
            basis_label="bar",
            final_state=StateVector(np.array([1.0, 0.0]), "bar"),
        )

    def test_trajectory_round_trip_bit_exact(self, tmp_path):
        path = str(tmp_path / "traj.csv")
        traj = self._trajectory()
        params = DriveParams(delta=0.125, a=1.0, omega=2.5)
        emit_csv(traj, path, params=params, config={"subcommand": "grover-run"})
        table = read_csv(path)
        assert table.version == FORMAT_VERSION
        assert table.names == ["time", "p0", "p1"]
        assert np.array_equal(table.column("time"), traj.times)
        assert np.array_equal(table.column("p1"), traj.populations[:, 1])

    def test_params_line_alphabetized_and_complete(self, tmp_path):
        path = str(tmp_path / "traj.csv")
        emit_csv(self._trajectory(), path, params=DriveParams(delta=0.125))
        table = read_csv(path)
        from dataclasses import fields

        want = sorted(f.name for f in fields(DriveParams))
        assert list(table.params) == want

    def test_version_line_first(self, tmp_path):
        path = tmp_path / "traj.csv"
        emit_csv(self._trajectory(), str(path))
        assert path.read_text().splitlines()[0] == f"# {FORMAT_VERSION}"

    def test_grid_layout_row_major(self, tmp_path):
        ax1 = Axis("omega1", 1.0, 2.0, 2)
        ax2 = Axis("t", 0.0, 1.0, 3)
        grid = SweepGrid(axes=(ax1, ax2), columns={"v": np.arange(6.0)})
        path = str(tmp_path / "grid.csv")
        emit_csv(grid, path)
        table = read_csv(path)
        assert table.names == ["omega1", "t", "v"]
        # first axis slowest: omega1 repeats in blocks of len(t)
        assert np.array_equal(table.column("omega1"), [1, 1, 1, 2, 2, 2])
        assert np.array_equal(table.column("t"), [0.0, 0.5, 1.0] * 2)
        assert np.array_equal(table.column("v"), np.arange(6.0))

    def test_dict_emission(self, tmp_path):
        path = str(tmp_path / "fit.csv")
        emit_csv(
            {"n": np.array([6.0, 8.0]), "success_time": np.array([12.5, 25.0])},
            path,
            comments=["fit: exponent=0.5"],
        )
        table = read_csv(path)
        assert table.names == ["n", "success_time"]
        assert table.comments == ["fit: exponent=0.5"]

    def test_seventeen_digit_floats_survive(self, tmp_path):
        vals = np.array([0.1, 1.0 / 3.0, 2.0**-52, -1.2345678901234567e300, math.pi])
        path = str(tmp_path / "vals.csv")
        emit_csv({"x": vals}, path)
        assert np.array_equal(read_csv(path).column("x"), vals)

    def test_nan_round_trip(self, tmp_path):
        path = str(tmp_path / "nan.csv")
        emit_csv({"x": np.array([1.0, math.nan])}, path)
        got = read_csv(path).column("x")
        assert got[0] == 1.0 and math.isnan(got[1])

    def test_read_rejects_wrong_version(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# other-tool v9\nx\n1\n")
        with pytest.raises(ValueError, match="unsupported format"):
            read_csv(str(path))

    def test_read_rejects_missing_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1,2\n")
        with pytest.raises(ValueError, match="format-version"):
            read_csv(str(path))

    def test_read_rejects_ragged_rows(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(f"# {FORMAT_VERSION}\nx,y\n1,2\n3\n")
        with pytest.raises(ValueError):
            read_csv(str(path))


class TestMainExitCodes:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "unknown subcommand" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(["grover-run", "--junk", "1"]) == 1

    def test_missing_required_key(self, capsys):
        assert main(["grover-run"]) == 1
        err = capsys.readouterr().err
        assert "missing required" in err and "omega" in err

    def test_inconsistent_params(self, tmp_path, capsys):
        out = str(tmp_path / "o.csv")
        code = main(
            ["grover-run", "--n", "6", "--delta", "0.3", "--amplitude-a", "0",
             "--omega", "1", "--out", out]
        )
        assert code == 1
        assert "inconsistent" in capsys.readouterr().err

    def test_unwritable_output_is_runtime_error(self, capsys):
        code = main(
            ["rwa-table", "--amplitude-a", "1", "--amplitude-b", "9.12",
             "--omega-axis", "4:4:1", "--delta", "0.03125",
             "--out", "/nonexistent-dir/x.csv"]
        )
        assert code == 2
        assert "cannot write" in capsys.readouterr().err

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "lzs-search-sim" in capsys.readouterr().out

    def test_selftest_exit_zero(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "checks passed" in out and "FAIL" not in out


class TestMainRuns:
    def test_rwa_table(self, tmp_path, capsys):
        out = str(tmp_path / "table.csv")
        code = main(
            ["rwa-table", "--amplitude-a", "1", "--amplitude-b", "9.12",
             "--omega-axis", "1:6:11", "--delta", "0.03125", "--out", out]
        )
        assert code == 0
        assert f"out={out}" in capsys.readouterr().out
        table = read_csv(out)
        assert table.names == ["omega", "rabi", "leakage_factor"]
        assert len(table.column("omega")) == 11
        assert table.config["subcommand"] == "rwa-table"
        assert table.config["omega_axis"] == "1:6:11"

    def test_grover_run_reports_success_time(self, tmp_path, capsys):
        out = str(tmp_path / "run.csv")
        code = main(
            ["grover-run", "--n", "6", "--amplitude-a", "0", "--omega", "1", "--out", out]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert "success_time=" in stdout
        table = read_csv(out)
        assert table.names == ["time", "p0", "p1"]
        assert table.params["n"] == "6"

    def test_double_crossing(self, tmp_path):
        out = str(tmp_path / "dc.csv")
        code = main(
            ["double-crossing", "--delta", "0.25", "--amplitude-a", "1",
             "--omega-axis", "50:100:2", "--out", out]
        )
        assert code == 0
        table = read_csv(out)
        assert table.names == ["omega", "p_plus_2", "one_minus_p_plus_2"]
        assert np.all(table.column("one_minus_p_plus_2") > 0.99)

    def test_runtime_scaling_emits_fit_comment(self, tmp_path):
        out = str(tmp_path / "scaling.csv")
        code = main(
            ["runtime-scaling", "--n-list", "6,8,10", "--amplitude-a", "0", "--out", out]
        )
        assert code == 0
        table = read_csv(out)
        assert table.names == ["n", "success_time"]
        fit_lines = [c for c in table.comments if c.startswith("fit:")]
        assert len(fit_lines) == 1
        assert "exponent=" in fit_lines[0]
        exponent = float(fit_lines[0].split("exponent=")[1].split()[0])
        assert exponent == pytest.approx(0.5, abs=0.01)

    def test_noise_map_static_algorithm(self, tmp_path):
        out = str(tmp_path / "nm.csv")
        code = main(
            ["noise-map", "--algorithm", "h_half", "--delta", "0.125",
             "--a1", "0.05", "--omega1-axis", "2:3:2", "--t-axis", "0:40:5",
             "--out", out]
        )
        assert code == 0
        table = read_csv(out)
        assert table.names == ["omega1", "t", "p_plus"]
        assert len(table.column("p_plus")) == 10

    def test_three_level_scan(self, tmp_path, capsys):
        out = str(tmp_path / "tl.csv")
        code = main(
            ["three-level-scan", "--delta", "0.03125", "--amplitude-a", "1",
             "--amplitude-b", "9.12", "--eta", "0.001",
             "--omega-axis", "3.6:4.4:2", "--window", "200", "--out", out]
        )
        assert code == 0
        assert "max_p1_peak=" in capsys.readouterr().out
        table = read_csv(out)
        assert table.names == [
            "omega", "max_p1", "t_at_p1", "max_p2", "t_at_p2", "baseline_max_p1"
        ]

    def test_rwa_vs_exact_small(self, tmp_path):
        out = str(tmp_path / "err.csv")
        code = main(
            ["rwa-vs-exact", "--omega-over-delta-axis", "64:64:1",
             "--a-over-omega-axis", "0.5:5:2", "--out", out]
        )
        assert code == 0
        table = read_csv(out)
        err = table.column("rel_error")
        assert err[0] < 0.03
        assert math.isnan(err[1])  # a > 1 sentinel

    def test_byte_identical_reruns(self, tmp_path):
        args = ["double-crossing", "--delta", "0.125", "--amplitude-a", "1",
                "--omega-axis", "0.5:8:4:log"]
        out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        assert main(args + ["--out", out1]) == 0
        assert main(args + ["--out", out2]) == 0
        b1 = open(out1, "rb").read()
        b2 = open(out2, "rb").read()
        assert b1 == b2

    def test_step_control_flags_respected(self, tmp_path):
        base = ["double-crossing", "--delta", "0.25", "--amplitude-a", "1",
                "--omega-axis", "2:2:1"]
        out1, out2 = str(tmp_path / "c.csv"), str(tmp_path / "f.csv")
        assert main(base + ["--steps-per-period", "128", "--out", out1]) == 0
        assert main(base + ["--steps-per-period", "4096", "--out", out2]) == 0
        coarse = read_csv(out1).column("p_plus_2")[0]
        fine = read_csv(out2).column("p_plus_2")[0]
        assert coarse != fine  # density must actually change the numerics
        assert coarse == pytest.approx(fine, abs=1e-4)

    def test_config_echo_includes_step_keys(self, tmp_path):
        out = str(tmp_path / "echo.csv")
        assert main(
            ["rwa-table", "--amplitude-a", "1", "--amplitude-b", "9.12",
             "--omega-axis", "4:4:1", "--delta", "0.03125", "--out", out,
             "--order", "4"]
        ) == 0
        assert read_csv(out).config["order"] == "4"


def test_console_script_installed():
    assert shutil.which("lzs-search-sim") is not None
