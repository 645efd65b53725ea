import numpy as np
import pytest

from dboot.models import LINEAR, LOGISTIC, Datum, Shard
from dboot.synthdata import (
    CovKind,
    DesignSpec,
    build_covariance,
    draw_theta_star,
    dump_csv,
    load_csv,
    sample_covariates,
    sample_dataset,
    shard,
)


def test_toeplitz_d2():
    np.testing.assert_array_equal(build_covariance("toeplitz", 2), [[1, 0.9], [0.9, 1]])


def test_toeplitz_entries():
    S = build_covariance(CovKind.TOEPLITZ, 5)
    for i in range(5):
        for j in range(5):
            assert S[i, j] == pytest.approx(0.9 ** abs(i - j), rel=1e-15)


def test_equicorr_d3():
    S = build_covariance("equicorr", 3)
    assert np.all(np.diag(S) == 1)
    assert np.all(S[~np.eye(3, dtype=bool)] == 0.8)


def test_identity():
    np.testing.assert_array_equal(build_covariance("identity", 5), np.eye(5))


@pytest.mark.parametrize("cov", list(CovKind))
@pytest.mark.parametrize("d", [1, 2, 8, 32, 128])
def test_covariances_spd(cov, d):
    S = build_covariance(cov, d)
    assert np.array_equal(S, S.T)
    np.linalg.cholesky(S)


def test_theta_star_support_and_determinism():
    a = draw_theta_star(64, 4)
    assert np.array_equal(a, draw_theta_star(64, 4))
    assert np.all((a >= -0.5) & (a <= 0.5))


def test_theta_star_mean_clt():
    x = draw_theta_star(100_000, 1)
    assert abs(x.mean()) < 3 * np.sqrt(1 / 12) / np.sqrt(x.size)


def test_noiseless_linear_is_exact():
    theta = np.array([0.3, -0.2, 0.1])
    data = sample_dataset(DesignSpec(3, theta, "identity", LINEAR, noise_sd=0.0), 50, 2)
    np.testing.assert_array_equal(data.y, data.X @ theta)


def test_toeplitz_covariance_moments():
    X = sample_covariates("toeplitz", 4, 100_000, 3)
    S = build_covariance("toeplitz", 4)
    emp = X.T @ X / len(X)
    # Var(x_i x_j) = S_ii S_jj + S_ij^2 for centred Gaussians
    se = np.sqrt((np.outer(np.diag(S), np.diag(S)) + S**2) / len(X))
    assert np.all(np.abs(emp - S) < 3 * se)


def test_logistic_null_mean():
    data = sample_dataset(DesignSpec(2, np.zeros(2), model=LOGISTIC), 100_000, 5)
    assert set(np.unique(data.y)) == {0.0, 1.0}
    assert abs(data.y.mean() - 0.5) < 3 * 0.5 / np.sqrt(len(data))


def test_sample_dataset_reproducible():
    spec = DesignSpec(3, draw_theta_star(3, 0))
    a, b = sample_dataset(spec, 200, 8), sample_dataset(spec, 200, 8)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    c = sample_dataset(spec, 200, 9)
    assert not np.array_equal(a.X, c.X)


def test_design_validation():
    with pytest.raises(ValueError):
        DesignSpec(2, np.zeros(3))
    with pytest.raises(ValueError):
        DesignSpec(2, np.zeros(2), noise_sd=-1)


def _toy(N):
    return Shard(np.arange(N, dtype=float)[:, None], np.arange(N, dtype=float))


def test_shard_contiguous():
    sd = shard(_toy(4), 2)
    assert sd.k == 2 and sd.n == 2 and sd.N == 4
    assert [list(s.y) for s in sd.shards] == [[0, 1], [2, 3]]
    assert sd.master is sd.shards[0]


def test_shard_k1_and_kN():
    data = _toy(6)
    one = shard(data, 1)
    assert one.k == 1 and np.array_equal(one.master.y, data.y)
    single = shard(data, 6)
    assert single.n == 1 and [s.y[0] for s in single.shards] == list(range(6))


def test_shard_requires_divisor():
    with pytest.raises(ValueError):
        shard(_toy(5), 2)


def test_csv_roundtrip(tmp_path):
    data = sample_dataset(DesignSpec(3, draw_theta_star(3, 1)), 25, 3)
    p = tmp_path / "data.csv"
    dump_csv(data, p)
    assert p.read_text().splitlines()[0] == "x_1,x_2,x_3,y"
    back = load_csv(p)
    assert np.array_equal(back.X, data.X) and np.array_equal(back.y, data.y)


def test_shard_iteration_yields_datums():
    z = next(iter(_toy(3)))
    assert isinstance(z, Datum) and z.y == 0.0
