import json
from pathlib import Path

import numpy as np
import pytest

from kvark._cli.main import main
from kvark._core.harness.experiment import (
    ArtifactLayout,
    bench,
    recompute_report,
    run_estimate,
    run_experiment,
)
from kvark._core.harness.io import (
    load_document,
    load_estimates,
    load_trajectory,
    save_document,
)
from kvark._core.models.experiment import ExperimentConfig
from kvark._core.models.observer import FilterConfig
from kvark._core.models.report import MetricsReport

DEFAULT_CONFIG = Path(__file__).resolve().parents[2] / "kvark" / "_common" / "configs" / "default.toml"


def last_line(text):
    return text.strip().splitlines()[-1]


def test_run_writes_every_artifact(small_config):
    report = run_experiment(small_config)
    layout = ArtifactLayout(small_config.output_dir)
    expected = [
        layout.config,
        layout.excitation(0),
        layout.training(0),
        layout.evaluation,
        layout.residual_fit,
        layout.filter_config,
        layout.report,
        layout.timing,
    ]
    expected += [layout.model(kind, j) for kind in ("gmm", "kmp", "gp") for j in range(2)]
    expected += [layout.estimates(name) for name in small_config.observers]
    for path in expected:
        assert path.exists(), path
    assert not layout.evaluation_free.exists()

    assert report.samples == 1000
    assert set(report.observers) == {"kvark", "gmr_gp", "akf", "static_kf"}
    for metrics in report.observers.values():
        assert np.all(np.isfinite(metrics.joint_rmse))
        assert metrics.cartesian_axes == ["f_x", "f_y"]
        assert metrics.cartesian_samples == 1000
        assert 0.0 <= metrics.nis_consistency <= 1.0
    assert set(json.loads(layout.timing.read_text())) == set(small_config.observers)

    trace, t_s = load_estimates(layout.estimates("kvark"))
    assert t_s == 0.004 and trace.tau_hat.shape == (1000, 2)
    assert np.isnan(trace.nis[0])
    evaluation = load_trajectory(layout.evaluation)
    np.testing.assert_array_equal(evaluation.tau_ext[-1], [3.0, -2.0])


def test_reports_are_reproducible(small_config, tmp_path):
    run_experiment(small_config)
    again = small_config.with_output_dir(tmp_path / "again")
    run_experiment(again)
    first = ArtifactLayout(small_config.output_dir).report.read_bytes()
    assert first == ArtifactLayout(again.output_dir).report.read_bytes()
    for name in ("evaluation.csv", "estimates_kvark.csv"):
        assert (Path(small_config.output_dir) / name).read_bytes() == (
            Path(again.output_dir) / name
        ).read_bytes()


def test_report_is_recomputed_from_stored_estimates(small_config):
    original = run_experiment(small_config)
    layout = ArtifactLayout(small_config.output_dir)
    layout.report.unlink()
    recomputed = recompute_report(small_config.output_dir)
    assert recomputed.model_dump_json() == original.model_dump_json()
    stored = load_document(layout.report, MetricsReport)
    assert stored.model_dump_json() == original.model_dump_json()


def test_estimate_rederives_the_filter_config(small_config):
    run_experiment(small_config)
    layout = ArtifactLayout(small_config.output_dir)
    derived = load_document(layout.filter_config, FilterConfig)
    save_document(FilterConfig(n=2, t_s=0.004, rho=0.5), layout.filter_config)

    run_estimate(small_config, layout)
    refreshed = load_document(layout.filter_config, FilterConfig)
    assert refreshed.rho == derived.rho == small_config.filter.rho
    np.testing.assert_allclose(refreshed.sigma_nu_static, derived.sigma_nu_static, rtol=1e-12)
    trace, _ = load_estimates(layout.estimates("kvark"))
    assert np.all(np.isfinite(trace.tau_hat))


def test_difference_truth_writes_the_free_run(small_config):
    config = small_config.model_copy(
        update={"scenario": small_config.scenario.model_copy(update={"truth": "difference"})}
    )
    report = run_experiment(config)
    layout = ArtifactLayout(config.output_dir)
    loaded, free = load_trajectory(layout.evaluation), load_trajectory(layout.evaluation_free)
    np.testing.assert_allclose(loaded.tau_ext, loaded.tau_m - free.tau_m)
    assert all(np.all(np.isfinite(m.joint_rmse)) for m in report.observers.values())


def test_cli_runs_stage_by_stage(small_config_file, tmp_path):
    out = tmp_path / "cli"
    for command in ("excite", "simulate", "train", "estimate", "report"):
        main([command, "--config", str(small_config_file), "--out", str(out)])
    layout = ArtifactLayout(out)
    assert layout.report.exists()
    assert set(load_document(layout.report, MetricsReport).observers) == {
        "kvark",
        "gmr_gp",
        "akf",
        "static_kf",
    }
    assert ExperimentConfig.from_toml(small_config_file).seed == load_document(
        layout.config, ExperimentConfig
    ).seed


def test_cli_reports_the_failing_stage(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["report", "--out", str(tmp_path / "empty")])
    assert info.value.code == 1
    assert last_line(capsys.readouterr().err).startswith("[report]")

    with pytest.raises(SystemExit):
        main(["estimate", "--config", str(tmp_path / "absent.toml")])
    assert last_line(capsys.readouterr().err).startswith("[estimate]")

    with pytest.raises(SystemExit):
        main(["estimate", "--config", str(DEFAULT_CONFIG), "--out", str(tmp_path / "nothing")])
    assert last_line(capsys.readouterr().err).startswith("[estimate]")


@pytest.mark.slow
def test_bench_is_reproducible(small_config, tmp_path):
    first = bench(small_config, seeds=[0, 1], output_dir=tmp_path / "first")
    again = bench(small_config, seeds=[0, 1], output_dir=tmp_path / "again")
    assert first == again
    assert set(first.improvement) == {"gmr_gp", "akf", "static_kf"}
    for name, value in first.improvement.items():
        assert value == pytest.approx(1.0 - first.mean_rmse["kvark"] / first.mean_rmse[name])
    assert (tmp_path / "first" / "bench.json").exists()
    # the GA runs once per bench, every seed reuses its excitations
    shared = [tmp_path / "first" / f"seed_{seed}" / "excitation_0.json" for seed in (0, 1)]
    assert shared[0].read_bytes() == shared[1].read_bytes()


@pytest.mark.slow
def test_acceptance_bench(tmp_path):
    result = bench(ExperimentConfig.from_toml(DEFAULT_CONFIG), output_dir=tmp_path)
    assert len(result.seeds) == 10
    assert result.improvement["static_kf"] >= 0.2
    assert result.improvement["gmr_gp"] >= -0.05
