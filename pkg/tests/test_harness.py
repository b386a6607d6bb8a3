import csv
import json
import math

import pytest

from rydgate.core import ConfigError, Swap
from rydgate.harness import (
    EXPERIMENT_NAMES,
    SWAP_ERROR_COLUMNS,
    SWEEP_COLUMNS,
    ExperimentSpec,
    config_to_dict,
    default_sweep,
    run_experiment,
)
from rydgate import cli

from conftest import make_config


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSpec:
    def test_unknown_experiment(self, tmp_path, paper_point):
        with pytest.raises(ConfigError):
            ExperimentSpec(name="warp", base=paper_point, output_dir=tmp_path)

    def test_non_monotone_sweep(self, tmp_path, paper_point):
        with pytest.raises(ConfigError):
            ExperimentSpec(name="swap-error", base=paper_point,
                           output_dir=tmp_path, sweep_values=(0.0, 1.0, 0.5))

    def test_default_sweeps_exist(self):
        for name in EXPERIMENT_NAMES:
            param, values = default_sweep(name)
            if name not in ("momentum-map", "angular"):
                assert param and len(values) > 1


class TestRunExperiment:
    def test_separation_sweep_outputs(self, tmp_path, paper_point):
        spec = ExperimentSpec(
            name="fidelity-vs-separation", base=paper_point,
            output_dir=tmp_path, sweep_param="separation",
            sweep_values=(18.0, 22.0), seed=3, mc_samples=20_000)
        manifest = run_experiment(spec)
        rows = read_rows(tmp_path / "fidelity-vs-separation.csv")
        assert [r["status"] for r in rows] == ["ok", "ok"]
        assert list(rows[0]) == list(SWEEP_COLUMNS)
        assert manifest["config"]["c6_calibrated"] is True
        assert "calibration" in manifest["c6_note"]
        assert (tmp_path / "manifest.json").exists()
        # pi time rescales with d^6 at fixed c6
        t18 = float(rows[0]["t_pi"])
        t22 = float(rows[1]["t_pi"])
        assert t22 / t18 == pytest.approx((22 / 18) ** 6, rel=1e-9)

    def test_deterministic_bytes(self, tmp_path, paper_point):
        out = []
        for sub in ("a", "b"):
            spec = ExperimentSpec(
                name="entropy-vs-fidelity", base=paper_point,
                output_dir=tmp_path / sub, sweep_param="c6_scale",
                sweep_values=(0.5, 1.0), seed=11, mc_samples=20_000)
            run_experiment(spec)
            out.append((tmp_path / sub / "entropy-vs-fidelity.csv").read_bytes())
        assert out[0] == out[1]

    def test_seed_changes_results(self, tmp_path, paper_point):
        out = []
        for sub, seed in (("a", 1), ("b", 2)):
            spec = ExperimentSpec(
                name="entropy-vs-fidelity", base=paper_point,
                output_dir=tmp_path / sub, sweep_param="c6_scale",
                sweep_values=(1.0,), seed=seed, mc_samples=20_000)
            run_experiment(spec)
            out.append((tmp_path / sub / "entropy-vs-fidelity.csv").read_bytes())
        assert out[0] != out[1]

    def test_width_sweep_degrades_gracefully(self, tmp_path, paper_point):
        # w=8 at d=21 puts the slice across the singularity: grid metrics
        # must be skipped, overlap columns still filled, run still succeeds
        spec = ExperimentSpec(
            name="fidelity-vs-width", base=paper_point, output_dir=tmp_path,
            sweep_param="width", sweep_values=(8.0, 3.0), seed=0,
            mc_samples=10_000)
        manifest = run_experiment(spec)
        rows = read_rows(tmp_path / "fidelity-vs-width.csv")
        assert len(rows) == 4  # two series per sweep value
        wide_par = [r for r in rows if r["sweep_param"] == "profile.w_par"
                    and float(r["sweep_value"]) == 8.0][0]
        assert wide_par["status"] == "ok"
        assert wide_par["entropy"] == ""
        assert "skipped" in wide_par["error"]
        assert wide_par["zeta_re"] != ""
        assert all(p["status"] == "ok" for p in manifest["points"])

    def test_swap_error_schema(self, tmp_path, paper_point):
        spec = ExperimentSpec(
            name="swap-error", base=paper_point.replace(protocol=Swap()),
            output_dir=tmp_path, sweep_param="err_sigma",
            sweep_values=(0.0, 0.5), seed=2)
        run_experiment(spec)
        rows = read_rows(tmp_path / "swap-error.csv")
        assert list(rows[0]) == list(SWAP_ERROR_COLUMNS)
        assert float(rows[0]["F_std_par"]) == 0.0
        assert float(rows[1]["F_std_par"]) > 0.0

    def test_momentum_map_outputs(self, tmp_path):
        base = make_config(n=64)
        spec = ExperimentSpec(name="momentum-map", base=base,
                              output_dir=tmp_path)
        manifest = run_experiment(spec)
        for label in ("before", "direct", "swap"):
            assert (tmp_path / f"momentum-map-{label}.csv").exists()
        by_label = {p["value"]: p for p in manifest["points"]}
        assert abs(by_label["direct"]["centroid"][0]) > 10 * abs(
            by_label["swap"]["centroid"][0])

    def test_angular_output(self, tmp_path):
        spec = ExperimentSpec(name="angular", base=make_config(n=64),
                              output_dir=tmp_path)
        run_experiment(spec)
        rows = read_rows(tmp_path / "angular.csv")
        assert list(rows[0]) == ["angle", "before_1", "before_2",
                                 "after_1", "after_2"]

    def test_config_roundtrip_dict(self, paper_point):
        d = config_to_dict(paper_point.replace(protocol=Swap(0.5, 0.1)))
        assert d["protocol"] == {"name": "swap", "err_sigma_par": 0.5,
                                 "err_sigma_perp": 0.1}
        assert json.dumps(d)  # serializable


class TestCli:
    def test_list_experiments(self, capsys):
        assert cli.main(["list-experiments"]) == 0
        out = capsys.readouterr().out.split()
        assert set(out) == set(EXPERIMENT_NAMES)

    def test_validate_default(self, capsys):
        assert cli.main(["validate"]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_validate_bad_override(self, capsys):
        assert cli.main(["validate", "--set", "geometry.speed=3"]) == 2
        assert "config error" in capsys.readouterr().err

    def test_validate_config_file(self, tmp_path, capsys):
        path = tmp_path / "gate.ini"
        path.write_text(
            "[profile1]\nw_par = 3\nw_perp = 8\n"
            "[profile2]\nw_par = 3\nw_perp = 8\n"
            "[geometry]\nseparation = 30 0 0\n"
            "[interaction]\nc6 = 5.4e7\nt_int = 5\n")
        assert cli.main(["validate", "--config", str(path)]) == 0
        assert "separation 30" in capsys.readouterr().out

    def test_missing_config_file(self, capsys):
        assert cli.main(["validate", "--config", "/nonexistent.ini"]) == 2

    def test_calibrate(self, capsys):
        code = cli.main(["calibrate", "--set", "separation=21",
                         "--set", "time=5", "--set", "phase=pi"])
        assert code == 0
        out = capsys.readouterr().out
        c6 = math.pi * 21**6 / 5
        assert f"{c6:.6g}" in out

    def test_calibrate_missing_args(self, capsys):
        assert cli.main(["calibrate", "--set", "time=5"]) == 2

    def test_run_small_sweep(self, tmp_path, capsys):
        code = cli.main([
            "run", "--experiment", "entropy-vs-fidelity",
            "--sweep", "0.5,1.0", "--mc-samples", "20000",
            "--out", str(tmp_path), "--seed", "4",
        ])
        assert code == 0
        manifest = json.loads(
            (tmp_path / "entropy-vs-fidelity" / "manifest.json").read_text())
        assert manifest["seed"] == 4
        assert manifest["sweep_values"] == [0.5, 1.0]

    def test_run_unknown_experiment_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["run", "--experiment", "warp"])
        assert exc.value.code == 2
