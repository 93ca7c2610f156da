import numpy as np
import pytest

from eigenring import SeedPolicy


def test_same_key_bit_reproducible():
    a = SeedPolicy(42).stream(7).generator(0).standard_normal(16)
    b = SeedPolicy(42).stream(7).generator(0).standard_normal(16)
    assert np.array_equal(a, b)


def test_distinct_indices_differ():
    base = SeedPolicy(42)
    a = base.stream(0).generator(0).standard_normal(64)
    b = base.stream(1).generator(0).standard_normal(64)
    assert not np.allclose(a, b)


def test_distinct_factors_and_retries_differ():
    stream = SeedPolicy(42).stream(3)
    a = stream.generator(0).standard_normal(32)
    b = stream.generator(1).standard_normal(32)
    c = SeedPolicy(42).stream(3, retry=1).generator(0).standard_normal(32)
    assert not np.allclose(a, b)
    assert not np.allclose(a, c)


def test_streams_statistically_independent():
    # correlation across 200 index pairs should be at noise level
    base = SeedPolicy(9)
    xs = np.array([base.stream(i).generator(0).standard_normal(200) for i in range(50)])
    corr = np.corrcoef(xs)
    off = corr[~np.eye(50, dtype=bool)]
    assert np.abs(off).max() < 0.35  # |corr| ~ N(0, 1/sqrt(200)) per pair


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        SeedPolicy(1).stream(-1)
    with pytest.raises(ValueError):
        SeedPolicy(1).stream(0, retry=-2)
