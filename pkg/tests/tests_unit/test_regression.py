import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kvark._common._exceptions.kvark_exception import InvalidInputError
from kvark._core._managers.residual_model_manager import ResidualModelManager
from kvark._core.models.mixture import GmmModel, ReferenceTrajectory
from kvark._core.models.regression import KmpHyperparams
from kvark._core.regression.evaluation import evaluate_regressor
from kvark._core.regression.gmr_regressor import GmrRegressor
from kvark._core.regression.gp import gp_predict, gp_train
from kvark._core.regression.kernel import kernel_matrix, se_kernel
from kvark._core.regression.kmp import KmpModel, kmp_predict, kmp_train


def reference(inputs, means, variances):
    inputs = np.asarray(inputs, dtype=float)
    return ReferenceTrajectory(
        inputs=inputs[:, None] if inputs.ndim == 1 else inputs,
        means=np.asarray(means, dtype=float).reshape(len(inputs), -1),
        covariances=np.asarray(variances, dtype=float).reshape(len(inputs), 1, 1),
    )


def random_reference(rng, size=20):
    inputs = np.sort(rng.uniform(-1.0, 1.0, size))
    inputs += np.arange(size) * 1e-3
    return reference(inputs, rng.normal(0.0, 2.0, size), rng.uniform(0.01, 1.0, size))


@pytest.fixture
def sine_reference():
    inputs = np.linspace(-1.0, 1.0, 5)
    return reference(inputs, np.sin(3 * inputs), np.full(5, 0.05))


def hyper(l=0.1, sf2=1.0, lam1=0.1, lam2=1.0):
    return KmpHyperparams(length_scale=l, signal_variance=sf2, lambda_mean=lam1, lambda_variance=lam2)


def test_kernel_matrix_matches_pairwise_kernel():
    a = np.array([[0.0], [0.5]])
    b = np.array([[0.1], [1.0], [-0.3]])
    gram = kernel_matrix(a, b, 0.2, 3.0)
    for i in range(2):
        for j in range(3):
            assert gram[i, j] == pytest.approx(se_kernel(a[i], b[j], 0.2, 3.0))
    assert se_kernel([0.0], [0.0], 0.2, 3.0) == 3.0


def test_kmp_asymptotic_variance_with_published_hyperparameters():
    rng = np.random.default_rng(0)
    model = kmp_train(random_reference(rng), hyper(l=0.1, sf2=1e4, lam1=0.1, lam2=2e6))
    np.testing.assert_allclose(model.asymptotic_variance(), [[0.1]])
    far = model.predict([1.0 + 20 * 0.1 + 1.0])
    assert far.covariance[0, 0] == pytest.approx(0.1, rel=1e-2)
    assert abs(far.mean[0]) < 1e-6


@pytest.mark.parametrize("seed", range(20))
def test_kmp_far_field_limit_law(seed):
    rng = np.random.default_rng(seed)
    hyperparams = hyper(
        l=0.1, sf2=rng.uniform(1.0, 100.0), lam1=rng.uniform(0.0, 1.0), lam2=rng.uniform(1.0, 1e3)
    )
    model = kmp_train(random_reference(rng), hyperparams)
    # supports end below 1.02
    far = model.predict([1.02 + 20 * 0.1])
    assert far.covariance[0, 0] == pytest.approx(model.asymptotic_variance()[0, 0], rel=1e-2)


def test_kmp_single_support_closed_form():
    mu, sigma, sf2, lam1, lam2 = 1.7, 0.3, 2.0, 0.5, 4.0
    model = kmp_train(reference([0.2], [mu], [sigma]), hyper(l=0.5, sf2=sf2, lam1=lam1, lam2=lam2))
    at_support = model.predict([0.2])
    assert at_support.mean[0] == pytest.approx(sf2 * mu / (sf2 + lam1 * sigma), abs=1e-12)
    assert at_support.covariance[0, 0] == pytest.approx(sf2 * sigma / (sf2 + lam2 * sigma), abs=1e-12)
    np.testing.assert_allclose(
        kmp_train(reference([0.0], [1.0], [1.0]), hyper(l=1.0, sf2=1.0, lam2=1.0)).asymptotic_variance(),
        [[1.0]],
    )


def test_kmp_single_support_variance_grows_with_distance():
    model = kmp_train(reference([0.0], [1.0], [0.2]), hyper(l=0.3, sf2=5.0, lam2=10.0))
    variances = [model.predict([r]).covariance[0, 0] for r in (0.0, 0.1, 0.3, 0.8, 2.0)]
    assert np.all(np.diff(variances) >= 0.0)


def test_kmp_mean_is_decoupled_from_variance_hyperparameters(sine_reference):
    base = kmp_train(sine_reference, hyper(l=0.1, sf2=1.0, lam1=0.0, lam2=1.0))
    queries = np.linspace(-1.5, 1.5, 100)
    base_means, _ = base.predict_many(queries)
    for sf2, lam2 in ((10.0, 1.0), (1.0, 10.0)):
        rescaled = kmp_train(sine_reference, hyper(l=0.1, sf2=sf2, lam1=0.0, lam2=lam2))
        np.testing.assert_allclose(rescaled.predict_many(queries)[0], base_means, atol=1e-8)
        assert rescaled.asymptotic_variance()[0, 0] != base.asymptotic_variance()[0, 0]


def test_gp_far_field_variance_tracks_signal_variance(sine_reference):
    for sf2 in (1.0, 10.0):
        model = gp_train(sine_reference, 0.1, sf2, 0.1)
        mean, variance = model.predict_scalar([50.0])
        assert variance == pytest.approx(sf2)
        assert mean == pytest.approx(0.0, abs=1e-12)


def test_kmp_interpolates_with_vanishing_regularisation(sine_reference):
    model = kmp_train(sine_reference, hyper(l=0.1, lam1=1e-9))
    means, _ = model.predict_many(sine_reference.inputs)
    np.testing.assert_allclose(means, sine_reference.means, atol=1e-6)


def test_kmp_passes_heteroscedasticity_through(sine_reference):
    doubled = ReferenceTrajectory(
        inputs=sine_reference.inputs,
        means=sine_reference.means,
        covariances=2 * sine_reference.covariances,
    )
    _, base = kmp_train(sine_reference, hyper()).predict_many(sine_reference.inputs)
    _, noisier = kmp_train(doubled, hyper()).predict_many(sine_reference.inputs)
    assert np.all(noisier[:, 0, 0] > base[:, 0, 0] + 1e-12)


@given(st.floats(-5.0, 5.0, allow_nan=False))
def test_kmp_variance_is_bounded_by_the_far_field(s):
    inputs = np.linspace(-1.0, 1.0, 5)
    model = kmp_train(reference(inputs, np.cos(inputs), np.full(5, 0.1)), hyper(sf2=3.0, lam2=50.0))
    prediction = model.predict([s])
    assert 0.0 <= prediction.covariance[0, 0] <= model.asymptotic_variance()[0, 0] + 1e-12


def test_kmp_outputs_decouple_for_diagonal_references():
    inputs = np.linspace(-1.0, 1.0, 6)[:, None]
    means = np.column_stack([np.sin(inputs[:, 0]), np.cos(inputs[:, 0])])
    variances = np.column_stack([np.full(6, 0.1), np.full(6, 0.4)])
    joint = kmp_train(
        ReferenceTrajectory(
            inputs=inputs,
            means=means,
            covariances=np.stack([np.diag(v) for v in variances]),
        ),
        hyper(),
    )
    prediction = joint.predict([0.33])
    assert prediction.covariance[0, 1] == pytest.approx(0.0, abs=1e-12)
    for column in range(2):
        alone = kmp_train(reference(inputs, means[:, column], variances[:, column]), hyper())
        single = alone.predict([0.33])
        assert prediction.mean[column] == pytest.approx(single.mean[0], abs=1e-10)
        assert prediction.covariance[column, column] == pytest.approx(single.covariance[0, 0], abs=1e-10)


def test_kmp_batch_and_single_predictions_agree(sine_reference):
    model = kmp_train(sine_reference, hyper())
    queries = np.array([-0.7, 0.0, 0.45])
    means, covs = model.predict_many(queries)
    for k, s in enumerate(queries):
        prediction = model.predict([s])
        np.testing.assert_allclose(means[k], prediction.mean, atol=1e-12)
        np.testing.assert_allclose(covs[k], prediction.covariance, atol=1e-12)


def test_kmp_document_restores_identical_predictions(sine_reference):
    model = kmp_train(sine_reference, hyper())
    restored = KmpModel.from_document(model.to_document())
    for s in (-0.9, 0.1, 2.0):
        np.testing.assert_array_equal(model.predict([s]).mean, restored.predict([s]).mean)
        np.testing.assert_array_equal(model.predict([s]).covariance, restored.predict([s]).covariance)


def test_kmp_rejects_malformed_queries(sine_reference):
    model = kmp_train(sine_reference, hyper())
    with pytest.raises(InvalidInputError):
        model.predict([0.1, 0.2])
    with pytest.raises(InvalidInputError):
        model.predict([np.nan])


def test_gp_interpolates_with_small_noise():
    inputs = np.array([-2.0, 0.0, 2.0])
    model = gp_train(reference(inputs, [1.0, -1.0, 0.5], [0.1, 0.1, 0.1]), 0.01, 1.0, 1e-8)
    means, variances = model.predict_many(inputs)
    np.testing.assert_allclose(means[:, 0], [1.0, -1.0, 0.5], atol=1e-6)
    assert np.all(variances < 1e-6)


def test_gp_rejects_vector_outputs_and_repeated_inputs():
    inputs = np.array([[0.0, 1.0], [0.0, 1.0]])
    repeated = ReferenceTrajectory(inputs=inputs, means=np.zeros((2, 1)), covariances=np.ones((2, 1, 1)))
    with pytest.raises(InvalidInputError):
        gp_train(repeated, 0.1, 1.0, 0.1)
    vector = ReferenceTrajectory(
        inputs=np.array([[0.0], [1.0]]), means=np.zeros((2, 2)), covariances=np.stack([np.eye(2)] * 2)
    )
    with pytest.raises(InvalidInputError):
        gp_train(vector, 0.1, 1.0, 0.1)


def test_gmr_regressor_scores_held_out_rows():
    gmm = GmmModel(weights=[1.0], means=[[0.0, 0.0]], covariances=[[[1.0, 0.8], [0.8, 1.0]]])
    regressor = GmrRegressor(gmm, 1)
    inputs = np.array([-1.0, 0.0, 1.0])
    fit = evaluate_regressor(regressor, inputs, 0.8 * inputs)
    assert fit.rmse == pytest.approx(0.0, abs=1e-12)
    assert fit.coverage == 1.0
    assert fit.mean_std == pytest.approx(0.6)


def test_residual_model_manager_stacks_joint_queries(sine_reference):
    kmp = kmp_train(sine_reference, hyper())
    gp = gp_train(sine_reference, 0.1, 1.0, 0.1)
    manager = ResidualModelManager([kmp, gp])
    mean, cov = manager.query(np.array([0.2, -0.4]))
    assert mean[0] == pytest.approx(kmp.predict([0.2]).mean[0])
    assert mean[1] == pytest.approx(gp.predict_scalar([-0.4])[0])
    assert cov[0, 1] == 0.0 and cov[1, 1] == pytest.approx(gp.predict_scalar([-0.4])[1])
    np.testing.assert_array_equal(manager.mean(np.array([0.2, -0.4])), mean)
    with pytest.raises(InvalidInputError):
        manager.query(np.zeros(3))
    with pytest.raises(InvalidInputError):
        ResidualModelManager([])


def test_functional_predictors_match_the_models(sine_reference):
    kmp = kmp_train(sine_reference, hyper())
    gp = gp_train(sine_reference, 0.1, 1.0, 0.1)
    for s in (-0.3, 0.8):
        np.testing.assert_array_equal(kmp_predict(kmp, [s]).mean, kmp.predict([s]).mean)
        assert gp_predict(gp, [s]) == gp.predict_scalar([s])
