import numpy as np
import pytest

from dboot import kernels
from dboot.models import LINEAR, LOGISTIC, Shard
from dboot.synthdata import DesignSpec, sample_dataset

BACKENDS = sorted(kernels.implementations())


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    monkeypatch.setattr(kernels, "_impl", kernels.implementations()[request.param])
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_design(d=2, model=LINEAR, cov="toeplitz", seed=7, noise_sd=1.0):
    theta = np.random.default_rng(seed).uniform(-0.5, 0.5, d)
    return DesignSpec(d, theta, cov, model, noise_sd)


@pytest.fixture
def linear_data():
    design = make_design(d=3)
    return design, sample_dataset(design, 256, 11)


@pytest.fixture
def logistic_data():
    design = make_design(d=3, model=LOGISTIC)
    return design, sample_dataset(design, 512, 12)


def random_shard(rng, n, d, logistic=False):
    X = rng.normal(size=(n, d))
    y = (rng.random(n) < 0.5).astype(float) if logistic else rng.normal(size=n)
    return Shard(X, y)
