import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subordinator_lab.rng import Substream, philox_block, seed_key, to_unit, uniforms_jit, uniforms_np

from oracles import numpy_philox_block

U64 = st.integers(0, 2 ** 64 - 1)


@settings(max_examples=50)
@given(U64, U64, U64, U64, U64, U64)
def test_philox_matches_numpy(c0, c1, c2, c3, k0, k1):
    ours = philox_block(*(np.uint64(v) for v in (c0, c1, c2, c3, k0, k1)))
    assert [int(v) for v in ours] == numpy_philox_block([c0, c1, c2, c3], [k0, k1])


def test_jit_and_numpy_paths_agree():
    k0, k1 = seed_key(2 ** 70 + 12345)
    for event in (0, 1, 17, 2 ** 40):
        a = np.array(uniforms_jit(np.uint64(event), np.uint64(3), np.uint64(5), k0, k1))
        b = np.asarray(uniforms_np(np.array([event], dtype=np.uint64), np.array([3], dtype=np.uint64),
                                   np.uint64(5), k0, k1)).ravel()
        assert np.array_equal(a, b)


def test_unit_interval_open():
    x = np.array([0, 2 ** 64 - 1], dtype=np.uint64)
    u = to_unit(x)
    assert 0.0 < u[0] < 1e-15
    assert 1.0 - 1e-15 < u[1] < 1.0
    assert u[0] == 2.0 ** -53


def test_seed_key_split():
    assert seed_key(5) == (5, 0)
    assert seed_key(2 ** 64 + 7) == (7, 1)
    with pytest.raises(ValueError):
        seed_key(-1)


def test_substreams_are_addressed():
    a = Substream(9, replica=4, tag=2)
    b = Substream(9, replica=4, tag=2)
    assert np.array_equal(a.uniforms(10), b.uniforms(10))
    assert not np.array_equal(a.uniforms(10), Substream(9, replica=5, tag=2).uniforms(10))
    assert not np.array_equal(a.uniforms(10), Substream(9, replica=4, tag=3).uniforms(10))


def test_uniform_moments():
    rows = uniforms_np(np.arange(20000, dtype=np.uint64), np.zeros(20000, dtype=np.uint64), 0, 1, 0)
    u = np.asarray(rows).ravel()
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / u.size)
    assert u.min() > 0.0 and u.max() < 1.0
