import json
import math
from pathlib import Path

import numpy as np
import pytest

from kvark._common._exceptions.kvark_exception import (
    ConfigurationError,
    MalformedFileError,
    SchemaVersionError,
    SeriesMismatchError,
)
from kvark._core.harness.io import (
    dumps_document,
    load_document,
    load_estimates,
    load_trajectory,
    loads_document,
    save_document,
    save_estimates,
    save_trajectory,
)
from kvark._core.harness.metrics import cartesian_rmse, ground_truth_ext, rmse
from kvark._core.models.experiment import ExperimentConfig
from kvark._core.models.mixture import GmmModel, ReferenceTrajectory
from kvark._core.models.observer import EstimateTrace
from kvark._core.models.regression import KmpDocument, KmpHyperparams
from kvark._core.models.trajectory import SampledTrajectory
from kvark._core.regression.kmp import KmpModel, kmp_train

CONFIGS = Path(__file__).resolve().parents[2] / "kvark" / "_common" / "configs"


def trajectory(samples=5, n=2, t_s=0.01, offset=0.0, with_tau_ext=True):
    rng = np.random.default_rng(samples * 10 + n)

    def block():
        return rng.normal(size=(samples, n)) + offset

    return SampledTrajectory(
        t_s=t_s,
        t=np.arange(samples) * t_s,
        q=block(),
        dq=block(),
        ddq=block(),
        tau_m=block(),
        tau_ext=block() if with_tau_ext else None,
    )


@pytest.fixture
def kmp_model():
    inputs = np.linspace(-1.0, 1.0, 5)[:, None]
    reference = ReferenceTrajectory(
        inputs=inputs, means=np.sin(inputs), covariances=np.full((5, 1, 1), 0.05)
    )
    return kmp_train(
        reference,
        KmpHyperparams(length_scale=0.1, signal_variance=3.0, lambda_mean=0.1, lambda_variance=10.0),
    )


def test_rmse():
    alternating = np.array([1.0, -1.0, 1.0, -1.0])
    np.testing.assert_allclose(rmse(alternating, np.zeros(4)), [1.0])
    np.testing.assert_allclose(rmse(np.ones((3, 2)), np.zeros((3, 2))), [1.0, 1.0])
    with pytest.raises(SeriesMismatchError):
        rmse(np.zeros((3, 2)), np.zeros((4, 2)))
    with pytest.raises(SeriesMismatchError):
        rmse(np.zeros((0, 2)), np.zeros((0, 2)))


def test_ground_truth_from_a_matched_free_run():
    loaded = trajectory(offset=1.0)
    free = trajectory()
    np.testing.assert_allclose(ground_truth_ext(loaded, free), np.ones((5, 2)))
    with pytest.raises(SeriesMismatchError):
        ground_truth_ext(loaded, trajectory(samples=6))
    with pytest.raises(SeriesMismatchError):
        ground_truth_ext(loaded, trajectory(t_s=0.02))
    with pytest.raises(SeriesMismatchError):
        ground_truth_ext(loaded, trajectory(n=1))


def test_cartesian_rmse_skips_singular_samples(planar):
    q = np.array([[0.0, math.pi / 2], [0.4, 0.0]])
    tau = np.array([[1.0, 2.0], [0.5, 0.5]])
    per_axis, used = cartesian_rmse(planar, q, tau, tau)
    np.testing.assert_allclose(per_axis, [0.0, 0.0], atol=1e-12)
    assert used == 1
    nothing, none_used = cartesian_rmse(planar, q[1:], tau[1:], tau[1:])
    assert none_used == 0 and np.all(np.isnan(nothing))


def test_kmp_document_survives_json(kmp_model, tmp_path):
    path = save_document(kmp_model.to_document(), tmp_path / "models" / "kmp_joint1.json")
    header = json.loads(path.read_text())
    assert header["schema_version"] == 1 and header["kind"] == "kmp"
    restored = KmpModel.from_document(load_document(path, KmpDocument))
    for s in (-1.5, -0.2, 0.7):
        np.testing.assert_array_equal(kmp_model.predict([s]).mean, restored.predict([s]).mean)
        np.testing.assert_array_equal(
            kmp_model.predict([s]).covariance, restored.predict([s]).covariance
        )


def test_document_errors(kmp_model, tmp_path):
    text = dumps_document(kmp_model.to_document())
    future = json.loads(text)
    future["schema_version"] = 2
    with pytest.raises(SchemaVersionError) as info:
        loads_document(json.dumps(future), KmpDocument)
    assert info.value.found == 2
    with pytest.raises(MalformedFileError):
        loads_document("{not json", KmpDocument)
    with pytest.raises(MalformedFileError):
        loads_document(text, EstimateTrace)
    with pytest.raises(MalformedFileError):
        loads_document(json.dumps({"data": {}}), KmpDocument)
    with pytest.raises(MalformedFileError):
        load_document(tmp_path / "absent.json", KmpDocument)


def test_tampered_mixture_file_is_rejected(tmp_path):
    gmm = GmmModel(
        weights=[0.4, 0.6],
        means=[[0.0, 0.0], [1.0, 1.0]],
        covariances=[[[1.0, 0.3], [0.3, 1.0]], [[2.0, 0.0], [0.0, 0.5]]],
        log_likelihood=-12.5,
    )
    path = save_document(gmm, tmp_path / "models" / "gmm_joint1.json")
    np.testing.assert_array_equal(load_document(path, GmmModel).covariances, gmm.covariances)

    for tampered in ([[1.0, 2.0], [2.0, 1.0]], [[1.0, 0.5], [0.0, 1.0]], [[1e-12, 0.0], [0.0, 1.0]]):
        document = json.loads(path.read_text())
        document["data"]["covariances"][0] = tampered
        path.write_text(json.dumps(document))
        with pytest.raises(MalformedFileError):
            load_document(path, GmmModel)


def test_trajectory_csv_is_exact(tmp_path):
    for with_tau_ext in (True, False):
        original = trajectory(samples=7, with_tau_ext=with_tau_ext)
        path = save_trajectory(original, tmp_path / f"run_{with_tau_ext}.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "# ts=0.01"
        assert lines[1].startswith("t,q_1,q_2,dq_1")
        restored = load_trajectory(path)
        assert restored.t_s == original.t_s
        for name in ("t", "q", "dq", "ddq", "tau_m"):
            np.testing.assert_array_equal(getattr(restored, name), getattr(original, name))
        if with_tau_ext:
            np.testing.assert_array_equal(restored.tau_ext, original.tau_ext)
        else:
            assert restored.tau_ext is None


def test_estimate_csv_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    nis = rng.chisquare(2, 6)
    nis[0] = np.nan
    trace = EstimateTrace(
        observer="kvark",
        t=np.arange(6) * 0.004,
        tau_hat=rng.normal(size=(6, 2)),
        p_diag=rng.uniform(size=(6, 2)),
        sigma_d_diag=rng.uniform(size=(6, 2)),
        sigma_nu_diag=rng.uniform(size=(6, 2)),
        nis=nis,
    )
    path = save_estimates(trace, 0.004, tmp_path / "estimates" / "kvark.csv")
    assert path.read_text().splitlines()[2].endswith("Sigma_nu_22,nis")
    restored, t_s = load_estimates(path)
    assert t_s == 0.004 and restored.observer == "kvark"
    for name in ("t", "tau_hat", "p_diag", "sigma_d_diag", "sigma_nu_diag", "nis"):
        np.testing.assert_array_equal(getattr(restored, name), getattr(trace, name))


def test_malformed_csv(tmp_path):
    missing_ts = tmp_path / "missing_ts.csv"
    missing_ts.write_text("t,q_1,dq_1,ddq_1,tau_m_1\n0,0,0,0,0\n0.01,0,0,0,0\n")
    with pytest.raises(MalformedFileError):
        load_trajectory(missing_ts)
    wrong_header = tmp_path / "wrong_header.csv"
    wrong_header.write_text("# ts=0.01\nt,x\n0,1\n0.01,2\n")
    with pytest.raises(MalformedFileError):
        load_trajectory(wrong_header)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("# ts=0.01\nt,q_1,dq_1,ddq_1,tau_m_1\n0,0,0,0\n")
    with pytest.raises(MalformedFileError):
        load_trajectory(ragged)
    uneven = tmp_path / "uneven.csv"
    uneven.write_text("# ts=0.01\nt,q_1,dq_1,ddq_1,tau_m_1\n0,0,0,0,0\n0.5,0,0,0,0\n")
    with pytest.raises(MalformedFileError):
        load_trajectory(uneven)


@pytest.mark.parametrize("name, joints", [("default.toml", 2), ("reference_chain.toml", 6)])
def test_bundled_configs_load(name, joints):
    config = ExperimentConfig.from_toml(CONFIGS / name)
    assert config.n == joints
    filter_config = config.filter.to_filter_config(config.n, config.scenario.t_s)
    assert filter_config.n == joints


def test_config_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_toml(tmp_path / "absent.toml")
    broken = tmp_path / "broken.toml"
    broken.write_text("[arm\nkind = 'planar2'\n")
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_toml(broken)
    armless = tmp_path / "armless.toml"
    armless.write_text("seed = 1\n")
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_toml(armless)
    base = (CONFIGS / "default.toml").read_text()
    unknown_observer = tmp_path / "unknown_observer.toml"
    unknown_observer.write_text(base.replace('"static_kf"]', '"particle"]'))
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_toml(unknown_observer)
