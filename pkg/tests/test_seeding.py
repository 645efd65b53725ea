import numpy as np
import pytest
from numpy.random import Generator, Philox

from dboot.seeding import SeedSpec, as_seedspec, normal_rows


def test_same_labels_same_bytes():
    a = SeedSpec(5).child("rep", 3).generator().random(8)
    b = SeedSpec(5, ("rep", 3)).generator().random(8)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("other", [SeedSpec(6, ("rep", 3)), SeedSpec(5, ("rep", 4)), SeedSpec(5, ("shard", 3))])
def test_distinct_labels_distinct_streams(other):
    a = SeedSpec(5, ("rep", 3)).generator().random(8)
    assert not np.array_equal(a, other.generator().random(8))


def test_independent_streams_uncorrelated():
    a = SeedSpec(1, ("a",)).generator().standard_normal(20000)
    b = SeedSpec(1, ("b",)).generator().standard_normal(20000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(20000)


def test_normal_rows_match_philox_counter_offsets():
    spec = SeedSpec(9, ("boot",))
    E = normal_rows(spec, 7, 13)
    for b in (0, 3, 6):
        ref = Generator(Philox(key=spec.key(), counter=[0, 0, 0, b])).standard_normal(13)
        assert np.array_equal(E[b], ref)


def test_normal_rows_prefix_stable():
    # row b does not depend on how many rows were requested
    assert np.array_equal(normal_rows(3, 40, 5)[:10], normal_rows(3, 10, 5))


def test_normal_rows_moments():
    E = normal_rows(11, 2000, 50)
    assert abs(E.mean()) < 4 / np.sqrt(E.size)
    assert abs(E.var() - 1) < 4 * np.sqrt(2 / E.size)


def test_seed_validation():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(1, (-2,)).key()
    with pytest.raises(TypeError):
        as_seedspec("7")
