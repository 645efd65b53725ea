import numpy as np
import pytest

from dboot.baselines import (
    BlbConfig,
    blb_subset_width,
    blb_width,
    centralized_fit,
    multinomial_weights,
    oracle_analysis,
    oracle_deviations,
    oracle_multiplier_boot,
    oracle_width,
    sdb_width,
)
from dboot.bootstrap import SUP, Coordinate, dist_boots
from dboot.models import LINEAR, LOGISTIC, shard_gradient
from dboot.seeding import SeedSpec
from dboot.synthdata import DesignSpec, sample_dataset, shard

from conftest import make_design


def test_centralised_fit_equals_k1_local_fit(linear_data):
    _, data = linear_data
    np.testing.assert_array_equal(centralized_fit(shard(data, 1), LINEAR), centralized_fit(data, LINEAR))
    np.testing.assert_allclose(centralized_fit(shard(data, 8), LINEAR),
                               np.linalg.solve(data.X.T @ data.X, data.X.T @ data.y), atol=1e-10)


def test_centralised_logistic_optimal():
    data = sample_dataset(make_design(d=2, model=LOGISTIC), 500, 4)
    theta = centralized_fit(data, LOGISTIC)
    assert np.max(np.abs(shard_gradient(LOGISTIC, theta, data))) < 1e-10


def test_oracle_width_noiseless_is_zero():
    spec = DesignSpec(2, np.array([0.2, -0.3]), "identity", LINEAR, noise_sd=0.0)
    assert oracle_width(spec, 64, reps=20, seed=1) == pytest.approx(0.0, abs=1e-12)


def test_oracle_width_deterministic_and_quantile_of_deviations():
    spec = make_design(d=2)
    w = oracle_width(spec, 256, reps=40, seed=SeedSpec(3, ("o",)))
    assert w == oracle_width(spec, 256, reps=40, seed=SeedSpec(3, ("o",)))
    devs = np.sort(oracle_deviations(spec, 256, 40, SeedSpec(3, ("o",))))
    assert w == 2 * devs[37]  # ceil(0.95 * 40) = 38


def test_oracle_boot_zero_for_equal_gradients():
    # noiseless linear data at the true parameter: every per-datum gradient is zero
    spec = DesignSpec(2, np.array([0.1, 0.2]), "identity", LINEAR, noise_sd=0.0)
    data = sample_dataset(spec, 32, 1)
    c, draws = oracle_multiplier_boot(data, spec.theta_star, LINEAR, B=10, return_draws=True)
    # residuals vanish up to the rounding of x.theta
    assert c == pytest.approx(0, abs=1e-14) and np.all(draws < 1e-14)


def test_oracle_boot_is_nk1grad_with_k1(linear_data):
    _, data = linear_data
    theta_hat = centralized_fit(data, LINEAR)
    H_inv = np.linalg.inv(data.X.T @ data.X / len(data))
    G = -data.X * (data.y - data.X @ theta_hat)[:, None]
    c, draws = oracle_multiplier_boot(data, theta_hat, LINEAR, B=50, seed=7, return_draws=True)
    s = dist_boots("nk1grad", theta_hat, G.mean(axis=0)[None, :], H_inv, master_grads=G, B=50, seed=7)
    np.testing.assert_allclose(draws, s.draws, rtol=1e-9)
    assert np.all(draws >= 0)


def test_oracle_analysis_fields(linear_data):
    _, data = linear_data
    res = oracle_analysis(data, LINEAR, width=0.5, B=20)
    assert res.width == 0.5 and res.c_star > 0
    assert np.max(np.abs(shard_gradient(LINEAR, res.theta_hat, data))) < 1e-10


def test_multinomial_weights_sum():
    rng = np.random.default_rng(0)
    for N, n in ((4096, 256), (10, 3), (1, 1)):
        w = multinomial_weights(rng, N, n)
        assert w.shape == (n,) and w.sum() == N and np.all(w == np.round(w))


def test_blb_degenerate_weights_zero_width(linear_data):
    _, data = linear_data
    sh = shard(data, 4).shards[1]
    w = np.full(len(sh), 4.0)
    assert blb_subset_width(LINEAR, sh, [w], 0.95) == pytest.approx(0.0, abs=1e-12)


def test_blb_deterministic_and_positive(linear_data):
    _, data = linear_data
    sd = shard(data, 4)
    a = blb_width(sd, LINEAR, BlbConfig(r=10), seed=3)
    assert a == blb_width(sd, LINEAR, BlbConfig(r=10), seed=3)
    assert a > 0 and a != blb_width(sd, LINEAR, BlbConfig(r=10), seed=4)


def test_sdb_k1_single_value(linear_data):
    _, data = linear_data
    sd = shard(data, 1)
    w = sdb_width(sd, LINEAR, seed=2)
    assert w == sdb_width(sd, LINEAR, seed=2) and w > 0


def test_baselines_respect_norm(linear_data):
    _, data = linear_data
    sd = shard(data, 4)
    assert sdb_width(sd, LINEAR, seed=1, norm=Coordinate(1)) <= sdb_width(sd, LINEAR, seed=1, norm=SUP)


def test_blb_config_validation():
    with pytest.raises(ValueError):
        BlbConfig(r=0)
    with pytest.raises(ValueError):
        BlbConfig(alpha=1.5)
