"""Tests for the one-hidden-layer tanh network.

Gradients are checked against central finite differences across many
random configurations; the exact-representation construction and the
closed-form generalization gap are checked by hand and by Monte Carlo.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gapfv import (
    DivergenceError,
    LangevinConfig,
    MlpParams,
    NnDataset,
    lfv,
    make_nn_dataset,
    mlp_forward,
    mlp_predict,
    rho,
    rho_grad,
    run_chain,
    theta0_construct,
    tilde_gap,
    train_gd,
)


def random_params(d, m, rng, scale=0.5):
    return MlpParams(
        theta0=scale * rng.standard_normal(m),
        theta1=scale * rng.standard_normal((m, d)),
        theta2=scale * rng.standard_normal(m),
    )


def finite_difference_grad(params, data, alpha, h=1e-5):
    """Central differences on the flattened parameter vector."""
    vec = params.flatten()
    out = np.empty_like(vec)
    for k in range(vec.size):
        plus, minus = vec.copy(), vec.copy()
        plus[k] += h
        minus[k] -= h
        out[k] = (
            rho(MlpParams.unflatten(plus, params.d, params.m), data, alpha)
            - rho(MlpParams.unflatten(minus, params.d, params.m), data, alpha)
        ) / (2 * h)
    return out


class TestForward:
    def test_zero_network(self):
        params = MlpParams(
            theta0=np.zeros(3), theta1=np.zeros((3, 2)), theta2=np.zeros(3)
        )
        assert mlp_forward(params, np.array([1.0, -4.0])) == 0.0

    def test_reference_construction_on_ones(self):
        params = theta0_construct(5, 50)
        value = mlp_forward(params, np.ones(5))
        assert value == pytest.approx(3.0 * np.tanh(2.5), abs=1e-12)
        assert value == pytest.approx(2.9598, abs=5e-5)

    def test_odd_in_inputs_without_biases(self):
        rng = np.random.default_rng(80)
        params = MlpParams(
            theta0=np.zeros(4),
            theta1=rng.standard_normal((4, 3)),
            theta2=rng.standard_normal(4),
        )
        for _ in range(10):
            z = rng.standard_normal(3)
            assert mlp_forward(params, -z) == pytest.approx(
                -mlp_forward(params, z), abs=1e-12
            )

    def test_batch_prediction_matches_single(self):
        rng = np.random.default_rng(81)
        params = random_params(3, 5, rng)
        Z = rng.standard_normal((7, 3))
        batch = mlp_predict(params, Z)
        singles = np.array([mlp_forward(params, z) for z in Z])
        np.testing.assert_allclose(batch, singles, atol=1e-14)


class TestReferenceConstruction:
    def test_matches_target_map_everywhere(self):
        rng = np.random.default_rng(82)
        params = theta0_construct(10, 50)
        Z = rng.standard_normal((100, 10))
        got = mlp_predict(params, Z)
        want = 3.0 * np.tanh(Z.sum(axis=1) / 2.0)
        assert np.max(np.abs(got - want)) < 1e-12

    def test_zero_sum_inputs_map_to_zero(self):
        params = theta0_construct(4, 8)
        z = np.array([1.0, -1.0, 2.0, -2.0])
        assert mlp_forward(params, z) == 0.0

    def test_parameter_count(self):
        params = theta0_construct(5, 50)
        assert params.p == 350
        assert params.flatten().size == 350

    def test_single_active_unit(self):
        params = theta0_construct(6, 9)
        np.testing.assert_array_equal(params.theta1[0], np.full(6, 0.5))
        assert params.theta2[0] == 3.0
        assert np.all(params.theta1[1:] == 0.0)
        assert np.all(params.theta2[1:] == 0.0)
        assert np.all(params.theta0 == 0.0)


class TestRhoGrad:
    def test_matches_finite_differences_many_configs(self):
        rng = np.random.default_rng(83)
        worst = 0.0
        for _ in range(20):
            d = int(rng.integers(1, 5))
            m = int(rng.integers(1, 6))
            n = int(rng.integers(5, 25))
            data = make_nn_dataset(n, d, 1.0, rng)
            params = random_params(d, m, rng)
            alpha = float(rng.uniform(1e-4, 0.1))
            grad = rho_grad(params, data, alpha).flatten()
            ref = finite_difference_grad(params, data, alpha)
            scale = np.maximum(np.abs(ref), 1e-3)
            worst = max(worst, np.max(np.abs(grad - ref) / scale))
        assert worst < 1e-5, f"worst relative error {worst:.2e}"

    def test_zero_at_interpolation_without_ridge(self):
        rng = np.random.default_rng(84)
        params = theta0_construct(3, 6)
        data = make_nn_dataset(30, 3, 0.0, rng)  # y = mu = g exactly
        grad = rho_grad(params, data, 0.0).flatten()
        assert np.max(np.abs(grad)) < 1e-12

    def test_pure_ridge_term_when_fit_is_exact(self):
        rng = np.random.default_rng(85)
        params = random_params(2, 4, rng)
        Z = rng.standard_normal((15, 2))
        fitted = mlp_predict(params, Z)
        data = NnDataset(Z=Z, y=fitted, mu_truth=fitted, sigma_sq=1.0)
        grad = rho_grad(params, data, 0.05)
        np.testing.assert_allclose(grad.theta0, 2 * 0.05 * params.theta0, atol=1e-14)
        np.testing.assert_allclose(grad.theta1, 2 * 0.05 * params.theta1, atol=1e-14)
        np.testing.assert_allclose(grad.theta2, 2 * 0.05 * params.theta2, atol=1e-14)


class TestTrainGd:
    def test_fixed_point_at_minimum(self):
        rng = np.random.default_rng(86)
        params = theta0_construct(4, 7)
        data = make_nn_dataset(40, 4, 0.0, rng)
        out = train_gd(data, params, lr=0.1, alpha=0.0, iters=50)
        assert np.max(np.abs(out.flatten() - params.flatten())) < 1e-10

    def test_zero_learning_rate_is_noop(self):
        rng = np.random.default_rng(87)
        params = random_params(3, 5, rng)
        data = make_nn_dataset(20, 3, 1.0, rng)
        out = train_gd(data, params, lr=0.0, alpha=1e-3, iters=10)
        np.testing.assert_array_equal(out.flatten(), params.flatten())

    def test_descends_under_experiment_protocol(self):
        # perturbed reference init, lr 0.1, alpha 1e-3, 100 iterations:
        # training MSE must drop in at least 19 of 20 replications
        rng = np.random.default_rng(88)
        wins = 0
        for _ in range(20):
            data = make_nn_dataset(500, 5, 1.0, rng)
            base = theta0_construct(5, 50)
            init = MlpParams.unflatten(
                base.flatten() + 0.1 * rng.standard_normal(base.p), 5, 50
            )
            out = train_gd(data, init, lr=0.1, alpha=1e-3, iters=100)
            mse0 = np.mean((data.y - mlp_predict(init, data.Z)) ** 2)
            mse1 = np.mean((data.y - mlp_predict(out, data.Z)) ** 2)
            wins += mse1 < mse0
        assert wins >= 19

    def test_divergence_carries_iteration(self):
        rng = np.random.default_rng(89)
        params = random_params(2, 3, rng, scale=2.0)
        data = make_nn_dataset(10, 2, 1.0, rng)
        with pytest.raises(DivergenceError) as info:
            train_gd(data, params, lr=1e12, alpha=1e6, iters=50)
        assert info.value.step >= 1

    def test_warns_when_loss_increases(self):
        rng = np.random.default_rng(90)
        params = random_params(2, 3, rng)
        data = make_nn_dataset(10, 2, 1.0, rng)
        # overshooting but finite: loss oscillates upward
        with pytest.warns(RuntimeWarning):
            train_gd(data, params, lr=40.0, alpha=1e-3, iters=3)


class TestTildeGap:
    def test_perfect_fit_leaves_noise_residual(self):
        rng = np.random.default_rng(91)
        params = theta0_construct(3, 6)
        data = make_nn_dataset(25, 3, 2.0, rng)
        eps = data.y - data.mu_truth
        want = 2.0 - np.mean(eps**2)
        assert tilde_gap(params, data) == pytest.approx(want, rel=1e-12)

    def test_constant_truth_hand_value(self):
        # zero network against constant truth c: the closed form gives
        # sigma^2 + c^2 - mean(y^2), bit-exact
        rng = np.random.default_rng(92)
        n, c = 30, 1.7
        Z = rng.standard_normal((n, 2))
        mu = np.full(n, c)
        y = mu + rng.standard_normal(n)
        data = NnDataset(Z=Z, y=y, mu_truth=mu, sigma_sq=1.0)
        zero = MlpParams(theta0=np.zeros(2), theta1=np.zeros((2, 2)),
                         theta2=np.zeros(2))
        assert tilde_gap(zero, data) == 1.0 + c**2 - np.mean(y**2)

    def test_sum_normalization_rescales(self):
        rng = np.random.default_rng(93)
        params = random_params(2, 4, rng)
        data = make_nn_dataset(16, 2, 0.5, rng)
        raw = tilde_gap(params, data)
        scaled = tilde_gap(params, data, normalization="sum")
        assert scaled == pytest.approx(raw * 16 / (2 * 0.5), rel=1e-12)

    def test_sum_normalization_needs_noise(self):
        rng = np.random.default_rng(94)
        params = random_params(2, 3, rng)
        data = make_nn_dataset(10, 2, 0.0, rng)
        with pytest.raises(ValueError):
            tilde_gap(params, data, normalization="sum")

    def test_matches_fresh_noise_monte_carlo(self):
        # brute-force E over fresh outcomes at the same inputs
        rng = np.random.default_rng(95)
        data = make_nn_dataset(12, 2, 1.0, rng)
        params = random_params(2, 4, rng)
        g = mlp_predict(params, data.Z)
        draws = 10**5
        fresh = data.mu_truth + rng.standard_normal((draws, 12))
        test_risks = np.mean((fresh - g) ** 2, axis=1)
        train_risk = np.mean((data.y - g) ** 2)
        mc = test_risks.mean() - train_risk
        se = test_risks.std(ddof=1) / np.sqrt(draws)
        assert abs(tilde_gap(params, data) - mc) < 3 * se


class TestChainSmoke:
    def test_reduced_scale_chain_is_stable(self):
        # reduced-size experiment: the chain readout must be finite,
        # positive, and reproducible across replications (CV < 0.5)
        master = np.random.default_rng(96)
        vals = []
        for j in range(6):
            data = make_nn_dataset(200, 5, 1.0, master)
            base = theta0_construct(5, 50)
            init = MlpParams.unflatten(
                base.flatten() + 0.1 * master.standard_normal(base.p), 5, 50
            )
            trained = train_gd(data, init, lr=0.1, alpha=1e-3, iters=100)
            config = LangevinConfig(
                step=1e-5, kappa_n=200.0, steps_total=250, burn_in_fraction=0.1
            )

            def grad_vec(vec):
                return rho_grad(
                    MlpParams.unflatten(vec, 5, 50), data, 1e-3
                ).flatten()

            def predict_vec(vec):
                return mlp_predict(MlpParams.unflatten(vec, 5, 50), data.Z)

            trace = run_chain(
                grad_vec, predict_vec, trained.flatten(), config,
                y=data.y, sigma0_sq=1.0, rng=np.random.default_rng(500 + j),
            )
            vals.append(lfv(trace))
        vals = np.array(vals)
        assert np.all(np.isfinite(vals)) and np.all(vals > 0)
        assert vals.std(ddof=1) / vals.mean() < 0.5


class TestParamsPlumbing:
    def test_validation(self):
        with pytest.raises(ValueError):
            MlpParams(theta0=np.zeros(3), theta1=np.zeros((2, 4)),
                      theta2=np.zeros(3))
        with pytest.raises(ValueError):
            MlpParams(theta0=np.array([np.nan]), theta1=np.zeros((1, 2)),
                      theta2=np.zeros(1))

    @given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 2**31 - 1))
    @settings(max_examples=40, deadline=None)
    def test_flatten_roundtrip(self, d, m, seed):
        params = random_params(d, m, np.random.default_rng(seed))
        back = MlpParams.unflatten(params.flatten(), d, m)
        np.testing.assert_array_equal(back.theta0, params.theta0)
        np.testing.assert_array_equal(back.theta1, params.theta1)
        np.testing.assert_array_equal(back.theta2, params.theta2)

    def test_flatten_layout(self):
        params = MlpParams(
            theta0=np.array([1.0, 2.0]),
            theta1=np.array([[3.0, 4.0], [5.0, 6.0]]),
            theta2=np.array([7.0, 8.0]),
        )
        np.testing.assert_array_equal(
            params.flatten(), [1, 2, 3, 4, 5, 6, 7, 8]
        )
