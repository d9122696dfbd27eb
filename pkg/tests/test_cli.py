"""Scenario runner: configuration, CSV contract, exit codes, determinism."""

import io
import os
import subprocess
import sys

import numpy as np
import pytest

from jcsynth.cli import (
    DEFAULT_GRIDS,
    FIG3_HEADER,
    STANDARD_HEADER,
    ScenarioConfig,
    build_config,
    main,
    parse_config_file,
    run,
    validate,
)
from jcsynth.exceptions import ConfigError


def read_csv(path):
    metadata, rows = {}, []
    header = None
    for line in open(path):
        line = line.rstrip("\n")
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            metadata[key.strip()] = value.strip()
        elif header is None:
            header = line.split(",")
        else:
            rows.append([float(x) for x in line.split(",")])
    return metadata, header, np.asarray(rows)


def run_cli(args, cwd):
    return main([*args, "--out", str(cwd / "out.csv")] if "--out" not in args else args)


class TestConfigFile:
    def test_parse_and_defaults(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("scenario = fig1_sqrt_coupling\n# comment\nlambda0 = 2.0\n")
        values = parse_config_file(cfg_file)
        config = build_config(values)
        assert config.params.lambda0 == 2.0
        assert config.params.mean_n == 5.0  # default
        assert config.grid.t_end == 6.0 and config.grid.n_samples == 1201

    def test_unknown_key_has_line_number(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("scenario = fig1_sqrt_coupling\nlambdaO = 1\n")
        with pytest.raises(ConfigError, match=r"run\.cfg:2.*lambdaO"):
            parse_config_file(cfg_file)

    def test_malformed_line(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("just some text\n")
        with pytest.raises(ConfigError, match=r"run\.cfg:1"):
            parse_config_file(cfg_file)

    def test_duplicate_key(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("scenario = sweep\nscenario = sweep\n")
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_file(cfg_file)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config_file(tmp_path / "absent.cfg")

    def test_flags_override_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("scenario = fig1_sqrt_coupling\nlambda0 = 2.0\n")
        config = build_config(parse_config_file(cfg_file), {"lambda0": 3.0})
        assert config.params.lambda0 == 3.0

    def test_bad_number_names_field(self):
        with pytest.raises(ConfigError, match="lambda0"):
            build_config({"scenario": "sweep", "lambda0": "abc"})

    def test_epsilon_bound_rejected(self):
        with pytest.raises(ConfigError, match="epsilon"):
            build_config({"scenario": "sweep", "epsilon": "0.1"})

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError, match="unknown scenario"):
            build_config({"scenario": "fig7"})

    def test_missing_scenario(self):
        with pytest.raises(ConfigError, match="scenario"):
            build_config({})


class TestValidate:
    def test_echoes_defaults(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("scenario = fig3_deformed_deltas\n")
        stream = io.StringIO()
        config = validate(cfg_file, stream=stream)
        text = stream.getvalue()
        assert "lambda0 = 1.0" in text
        assert "mean_n = 5.0" in text
        assert "epsilon = 0.0005" in text
        assert "t_end = 25.0" in text and "samples = 2001" in text
        assert isinstance(config, ScenarioConfig)

    def test_validate_only_flag(self, capsys):
        assert main(["--scenario", "fig2_vacuum_ipa_coherent", "--validate-only"]) == 0
        out = capsys.readouterr().out
        assert "scenario = fig2_vacuum_ipa_coherent" in out
        assert "eta = 1e-06" in out


class TestRun:
    def test_fig1_target_column_is_closed_form(self, tmp_path):
        config = build_config({"scenario": "fig1_sqrt_coupling",
                               "out": str(tmp_path / "fig1.csv")})
        assert run(config) == 0
        metadata, header, rows = read_csv(tmp_path / "fig1.csv")
        assert header == list(STANDARD_HEADER)
        t = rows[:, 0]
        assert np.max(np.abs(rows[:, 1] - np.cos(4.0 / 3.0 * np.sqrt(t**3)))) <= 1e-12
        assert np.max(np.abs(rows[:, 2] - np.sqrt(t))) <= 1e-12
        assert metadata["scenario"] == "fig1_sqrt_coupling"

    def test_fig3_extra_columns(self, tmp_path):
        config = build_config({"scenario": "fig3_deformed_deltas",
                               "out": str(tmp_path / "fig3.csv"),
                               "t_end": "8", "samples": "321"})
        assert run(config) == 0
        _, header, rows = read_csv(tmp_path / "fig3.csv")
        assert header == list(FIG3_HEADER)
        assert rows.shape[1] == 7

    def test_fig6_emits_companion(self, tmp_path):
        config = build_config({"scenario": "fig6_thermal",
                               "out": str(tmp_path / "fig6.csv"),
                               "t_end": "4", "samples": "161", "mean_n": "1.0"})
        assert run(config) == 0
        assert (tmp_path / "fig6.csv").exists()
        assert (tmp_path / "fig6_constant.csv").exists()
        _, _, gipa_rows = read_csv(tmp_path / "fig6.csv")
        assert np.min(gipa_rows[:, 3]) >= -1e-9
        _, _, const_rows = read_csv(tmp_path / "fig6_constant.csv")
        # constant coupling lets the thermal inversion go negative
        assert np.min(const_rows[:, 3]) < -0.05

    def test_sweep_columns_and_linearity(self, tmp_path):
        config = build_config({"scenario": "sweep", "out": str(tmp_path / "sweep.csv"),
                               "t_end": "12", "samples": "481"})
        assert run(config) == 0
        _, header, rows = read_csv(tmp_path / "sweep.csv")
        assert header == ["epsilon", "max_abs_delta_w", "max_abs_delta_lambda"]
        assert rows.shape == (3, 3)
        assert rows[2, 1] / rows[1, 1] == pytest.approx(2.0, rel=0.02)
        assert rows[2, 2] / rows[1, 2] == pytest.approx(2.0, rel=0.02)

    def test_exit_2_on_residual_gate(self, tmp_path):
        # an absurdly tight gate must flip the exit code, and only the gate
        config = build_config({"scenario": "fig1_sqrt_coupling",
                               "out": str(tmp_path / "fig1.csv"),
                               "max_residual": "1e-15"})
        assert run(config) == 2
        assert (tmp_path / "fig1.csv").exists()

    def test_metadata_records_regularized_indices(self, tmp_path):
        config = build_config({"scenario": "fig2_vacuum_ipa_coherent",
                               "out": str(tmp_path / "fig2.csv"),
                               "t_end": "6", "samples": "301"})
        assert run(config) == 0
        metadata, _, _ = read_csv(tmp_path / "fig2.csv")
        assert metadata["regularized_indices"] == "0"
        assert float(metadata["norm_drift"]) <= 1e-9


class TestMainExitCodes:
    def test_unknown_scenario_exits_1(self, capsys):
        assert main(["--scenario", "fig7"]) == 1
        assert "unknown scenario" in capsys.readouterr().err

    def test_missing_scenario_exits_1(self, capsys):
        assert main([]) == 1
        assert "scenario" in capsys.readouterr().err

    def test_bad_flag_value_exits_1(self, capsys):
        assert main(["--scenario", "sweep", "--lambda0", "zzz"]) == 1
        err = capsys.readouterr().err
        assert "configuration error" in err

    def test_unwritable_output_exits_1(self, tmp_path, capsys):
        target = tmp_path / "no_dir_here"
        target.write_text("a file, not a directory")
        code = main(["--scenario", "fig1_sqrt_coupling", "--samples", "51",
                     "--out", str(target / "x.csv")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_run_via_main_exit_0(self, tmp_path):
        code = main(["--scenario", "fig1_sqrt_coupling", "--t-end", "3",
                     "--samples", "101", "--out", str(tmp_path / "a.csv")])
        assert code == 0


class TestDeterminism:
    SCENARIO_ARGS = {
        "fig1_sqrt_coupling": [],
        "fig2_vacuum_ipa_coherent": ["--t-end", "5", "--samples", "201"],
        "fig3_deformed_deltas": ["--t-end", "5", "--samples", "201"],
        "fig4_cos_squared_fock": ["--t-end", "3", "--samples", "201"],
        "fig5_roundtrip_demo": ["--t-end", "4", "--samples", "161", "--mean-n", "2"],
        "fig6_thermal": ["--t-end", "3", "--samples", "121", "--mean-n", "1"],
        "sweep": ["--t-end", "5", "--samples", "201"],
    }

    @pytest.mark.parametrize("scenario", sorted(SCENARIO_ARGS))
    def test_byte_identical_across_runs_and_thread_counts(self, scenario, tmp_path):
        outputs = []
        for i, threads in enumerate(("1", "4")):
            out = tmp_path / f"{scenario}_{i}.csv"
            env = dict(os.environ, OMP_NUM_THREADS=threads, OPENBLAS_NUM_THREADS=threads)
            proc = subprocess.run(
                [sys.executable, "-m", "jcsynth.cli", "--scenario", scenario,
                 "--out", str(out), *self.SCENARIO_ARGS[scenario]],
                env=env, capture_output=True, text=True,
            )
            assert proc.returncode == 0, proc.stderr
            blobs = [out.read_bytes()]
            companion = out.with_name(out.stem + "_constant.csv")
            if companion.exists():
                blobs.append(companion.read_bytes())
            outputs.append(blobs)
        # the two out paths differ only in the metadata 'out' line; strip it
        def strip_out_line(blob):
            return b"\n".join(l for l in blob.split(b"\n") if not l.startswith(b"# out"))
        for a, b in zip(outputs[0], outputs[1]):
            assert strip_out_line(a) == strip_out_line(b)
