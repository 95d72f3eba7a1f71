"""Harness tests: experiments, config files, CLI, figures, determinism."""

import numpy as np
import pytest

from mimo3d import cli
from mimo3d import experiments as xp
from mimo3d.config import ConfigError, load_config, overrides_for, split_control_keys

SMALL_MU = {"users": 5, "n_bs": 8, "tilt_min_deg": 94.0, "tilt_max_deg": 98.0}


def small_spec(name, seed=11, draws=6):
    """Reduced-size spec for fast whole-pipeline runs of any experiment."""
    overrides = {}
    if name == "multiuser-tilt-sweep":
        overrides = dict(SMALL_MU)
    elif name == "mi-vs-kappa":
        overrides = {"antenna_counts": (4,), "concentrations": (1.0, 5.0), "n_bs": 4, "n_ms": 4}
    elif name.startswith("mi-") or name == "det-mi-verify":
        overrides = {"n_bs": 4, "n_ms": 4}
    elif name == "pinhole":
        overrides = {"path_counts": (5, 10), "n_bs": 4, "n_ms": 4}
    return xp.ExperimentSpec(name, overrides=overrides, draws=draws, seed=seed)


class TestResultTable:
    def test_csv_text_round_stability(self):
        table = xp.ResultTable("demo", ["x", "y_nats"], [(1, 0.5), (2, 1.0)], ["seed = 1"])
        assert table.to_csv_text() == table.to_csv_text()
        text = table.to_csv_text()
        assert text.startswith("# experiment = demo\n# seed = 1\nx,y_nats\n")

    def test_bits_conversion(self):
        table = xp.ResultTable("demo", ["x", "y_nats"], [(1, np.log(2.0))], [])
        text = table.to_csv_text(units="bits")
        assert "y_bits" in text
        assert text.strip().splitlines()[-1] == "1,1"

    def test_blank_cells_survive_conversion(self):
        table = xp.ResultTable("demo", ["m", "v_nats"], [("kronecker", "")], [])
        assert table.to_csv_text(units="bits").strip().endswith("kronecker,")

    def test_unknown_units_rejected(self):
        table = xp.ResultTable("demo", ["x"], [(1,)], [])
        with pytest.raises(ConfigError):
            table.to_csv_text(units="furlongs")


class TestOverrides:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            xp.run(xp.ExperimentSpec("scf-tx", overrides={"bogus": 1}, draws=2))

    def test_unknown_experiment_rejected(self):
        with pytest.raises(ConfigError):
            xp.run(xp.ExperimentSpec("no-such-thing"))

    def test_string_coercion(self):
        merged = xp._merge(xp.SCF_DEFAULTS, {"ports": "6", "tilt_deg": "96.5"})
        assert merged["ports"] == 6 and isinstance(merged["ports"], int)
        assert merged["tilt_deg"] == 96.5

    def test_tuple_coercion(self):
        defaults = xp.experiment_defaults("pinhole")
        merged = xp._merge(defaults, {"path_counts": "5, 20"})
        assert merged["path_counts"] == (5, 20)

    def test_bad_value_reported(self):
        with pytest.raises(ConfigError):
            xp._merge(xp.SCF_DEFAULTS, {"ports": "six"})


class TestExperiments:
    def test_scf_tx_columns_and_determinism(self):
        spec = xp.ExperimentSpec("scf-tx", seed=3, draws=20)
        table = xp.run(spec)
        assert table.columns == [
            "lag",
            "d_over_lambda",
            "re_theory",
            "im_theory",
            "re_mc",
            "im_mc",
            "abs_err",
        ]
        assert len(table.rows) == 10
        assert xp.run(spec).to_csv_text() == table.to_csv_text()

    def test_scf_rx_zero_lag_normalized(self):
        table = xp.run(xp.ExperimentSpec("scf-rx", seed=3, draws=20))
        first = table.rows[0]
        assert first[2] == pytest.approx(1.0, abs=1e-9)  # theory zero-lag (unit patterns)
        assert first[4] == pytest.approx(1.0, abs=1e-12)  # ratio estimator pins it to one

    def test_scf_uniform_theory_is_real(self):
        table = xp.run(xp.ExperimentSpec("scf-uniform", seed=2, draws=10))
        assert max(abs(v) for v in table.column("im_theory")) <= 1e-10

    def test_pinhole_rows(self):
        table = xp.run(
            xp.ExperimentSpec(
                "pinhole",
                seed=5,
                draws=40,
                overrides={"path_counts": (5, 20), "n_bs": 8, "n_ms": 8},
            )
        )
        models = table.column("model")
        assert models == ["parametric", "parametric", "kronecker"]

    def test_det_mi_verify_columns(self):
        table = xp.run(
            xp.ExperimentSpec(
                "det-mi-verify",
                seed=1,
                draws=30,
                overrides={"n_bs": 6, "n_ms": 6, "snr_min_db": 0.0, "snr_max_db": 5.0},
            )
        )
        assert table.columns[0] == "snr_db"
        assert len(table.rows) == 2

    def test_mi_sweeps_small(self):
        table = xp.run(
            xp.ExperimentSpec(
                "mi-vs-kappa",
                overrides={"antenna_counts": (4,), "concentrations": (1.0, 10.0), "n_bs": 4, "n_ms": 4},
            )
        )
        assert len(table.rows) == 2
        vs = table.column("v_nats")
        assert vs[0] > vs[1]  # spread shrinks, information drops

    def test_mi_2d_vs_3d_flat_dominates(self):
        table = xp.run(
            xp.ExperimentSpec(
                "mi-2d-vs-3d",
                overrides={"n_bs": 6, "n_ms": 6, "snr_min_db": 0.0, "snr_max_db": 0.0},
            )
        )
        row = table.rows[0]
        assert row[2] > row[1]  # flat model overestimates the information

    def test_multiuser_small(self):
        spec = xp.ExperimentSpec("multiuser-tilt-sweep", seed=4, draws=4, overrides=SMALL_MU)
        table = xp.run(spec)
        assert table.columns[0] == "tilt_deg"
        assert len(table.rows) == 5
        assert xp.run(spec).to_csv_text() == table.to_csv_text()

    def test_metadata_echoes_parameters(self):
        table = xp.run(xp.ExperimentSpec("scf-tx", seed=3, draws=4))
        meta = "\n".join(table.metadata)
        for key in ("seed = 3", "tilt_deg = 95", "spread_tx_deg = 7", "mean_azimuth_deg = 120"):
            assert key in meta


class TestPlots:
    def test_render_every_experiment(self, tmp_path):
        from mimo3d import plots

        for name in xp.EXPERIMENT_NAMES:
            table = xp.run(small_spec(name))
            path = tmp_path / f"{name}.png"
            plots.render(table, path)
            assert path.exists() and path.stat().st_size > 0

    def test_render_is_byte_stable(self, tmp_path):
        from mimo3d import plots

        table = xp.run(small_spec("pinhole"))
        plots.render(table, tmp_path / "a.png")
        plots.render(table, tmp_path / "b.png")
        assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


class TestConfigFiles:
    def test_load_and_merge(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[common]\nseed = 9\ndraws = 12\n\n[scf-tx]\ntilt_deg = 96\n")
        config = load_config(path)
        merged = overrides_for(config, "scf-tx")
        overrides, seed, draws = split_control_keys(merged)
        assert seed == 9 and draws == 12
        assert overrides == {"tilt_deg": "96"}

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/no/such/file.ini")

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("tilt_deg = 96\n")  # key before any section header
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_control_values(self):
        with pytest.raises(ConfigError):
            split_control_keys({"seed": "not-a-number"})


class TestCli:
    def test_run_writes_csv_and_figure(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        rc = cli.main(["run", "scf-tx", "--draws", "5", "--seed", "2", "--out", "out/t.csv"])
        assert rc == 0
        assert (tmp_path / "out" / "t.csv").exists()
        assert (tmp_path / "out" / "t.png").exists()

    def test_no_figure_flag(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        rc = cli.main(["run", "scf-tx", "--draws", "5", "--out", "t.csv", "--no-figure"])
        assert rc == 0
        assert not (tmp_path / "t.png").exists()

    def test_byte_reproducible(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cli.main(["run", "scf-rx", "--draws", "8", "--seed", "5", "--out", "a.csv", "--no-figure"])
        cli.main(["run", "scf-rx", "--draws", "8", "--seed", "5", "--out", "b.csv", "--no-figure"])
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_unknown_experiment_exits_two(self):
        with pytest.raises(SystemExit) as err:
            cli.main(["run", "no-such-experiment"])
        assert err.value.code == 2

    def test_bad_override_returns_two(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert cli.main(["run", "scf-tx", "--set", "bogus=1", "--no-figure"]) == 2

    def test_bits_flag(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        rc = cli.main(
            [
                "run",
                "mi-vs-sigma",
                "--out",
                "s.csv",
                "--no-figure",
                "--bits",
                "--set",
                "n_bs=4",
                "--set",
                "n_ms=4",
                "--set",
                "spreads_deg=5,10",
            ]
        )
        assert rc == 0
        header = [
            line
            for line in (tmp_path / "s.csv").read_text().splitlines()
            if not line.startswith("#")
        ][0]
        assert "v_bits" in header and "nats" not in header

    def test_config_file_flow(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "c.ini").write_text("[common]\nseed = 4\ndraws = 6\n[scf-tx]\nports = 4\n")
        rc = cli.main(["run", "scf-tx", "--config", "c.ini", "--out", "c.csv", "--no-figure"])
        assert rc == 0
        text = (tmp_path / "c.csv").read_text()
        assert "# seed = 4" in text
        assert text.count("\n0.5,") == 0  # lag column first, four data rows
        assert len([l for l in text.splitlines() if l and not l.startswith("#")]) == 5

    def test_scf_subcommand_with_matrix(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        rc = cli.main(
            ["scf", "--end", "tx", "--out", "lags.csv", "--matrix-out", "matrix.csv", "--set", "ports=4"]
        )
        assert rc == 0
        assert (tmp_path / "lags.csv").exists()
        matrix_rows = [
            line
            for line in (tmp_path / "matrix.csv").read_text().splitlines()
            if not line.startswith("#")
        ]
        assert len(matrix_rows) == 4 and len(matrix_rows[0].split(",")) == 8

    def test_channel_gen_roundtrip(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        rc = cli.main(
            [
                "channel-gen",
                "--model",
                "kronecker",
                "--draws",
                "3",
                "--out",
                "chan.bin",
                "--set",
                "n_bs=4",
                "--set",
                "n_ms=4",
            ]
        )
        assert rc == 0
        from mimo3d.channel import load_realizations

        matrices, seed, tag = load_realizations(tmp_path / "chan.bin")
        assert matrices.shape == (3, 4, 4)
        assert tag == "kronecker"

    def test_mi_mono_subcommand(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        rc = cli.main(
            ["mi-mono", "--draws", "20", "--out", "mm.csv", "--set", "n_bs=6", "--set", "n_ms=6"]
        )
        assert rc == 0
        data = (tmp_path / "mm.csv").read_text()
        assert "v_nats" in data

    def test_mi_multi_subcommand(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        args = ["mi-multi", "--draws", "3", "--tilt-deg", "96", "--out", "mu.csv"]
        for key, value in SMALL_MU.items():
            args += ["--set", f"{key}={value}"]
        rc = cli.main(args)
        assert rc == 0
        lines = [l for l in (tmp_path / "mu.csv").read_text().splitlines() if not l.startswith("#")]
        assert len(lines) == 1 + SMALL_MU["users"]
