import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nomaec.channel import ChannelBlock, ChannelModel, chunk_ranges, sample_block, sample_blocks


def test_single_user_block():
    b = sample_block(ChannelModel(1, [1.0], seed=42), 0)
    assert b.gains.shape == (1,) and b.gains[0] >= 0


def test_three_user_block_sorted():
    g = sample_block(ChannelModel(3, seed=99), 12345).gains
    assert g[0] <= g[1] <= g[2]


def test_rejects_bad_models():
    with pytest.raises(ValueError):
        ChannelModel(0)
    with pytest.raises(ValueError):
        ChannelModel(2, [1.0])
    with pytest.raises(ValueError):
        ChannelModel(2, [1.0, 0.0])
    with pytest.raises(ValueError):
        ChannelModel(1, seed=-1)
    with pytest.raises(ValueError):
        sample_block(ChannelModel(1), -1)


def test_block_type_invariants():
    with pytest.raises(ValueError):
        ChannelBlock(np.array([2.0, 1.0]))
    with pytest.raises(ValueError):
        ChannelBlock(np.array([-1.0, 1.0]))
    with pytest.raises(ValueError):
        ChannelBlock(np.array([1.0, np.inf]))


def test_determinism_regardless_of_interleaving():
    model = ChannelModel(4, seed=7)
    first = sample_block(model, 500).gains.copy()
    sample_blocks(ChannelModel(4, seed=8), 0, 1000)
    sample_block(model, 499)
    np.testing.assert_array_equal(sample_block(model, 500).gains, first)
    np.testing.assert_array_equal(sample_blocks(model, 498, 5)[2], first)


def test_unit_mean_single_user():
    # law of large numbers against the exponential law, mean 1
    g = sample_blocks(ChannelModel(1, [1.0], seed=7), 0, 10**5)
    assert abs(g.mean() - 1.0) < 0.01


def test_mean_gain_scales_draws():
    a = sample_blocks(ChannelModel(1, [1.0], seed=3), 0, 100)
    b = sample_blocks(ChannelModel(1, [2.5], seed=3), 0, 100)
    np.testing.assert_allclose(b, 2.5 * a, rtol=1e-15)


def test_order_statistic_means_two_users():
    # E[min] = 1/2 and E[max] = 3/2 for two unit exponentials
    g = sample_blocks(ChannelModel(2, seed=11), 0, 200_000)
    se = g.std(axis=0, ddof=1) / np.sqrt(g.shape[0])
    assert abs(g[:, 0].mean() - 0.5) < 3 * se[0]
    assert abs(g[:, 1].mean() - 1.5) < 3 * se[1]


def test_order_statistics_match_brute_force_sampler():
    # independent oracle: numpy's own exponential sampler, sorted
    ref = np.sort(np.random.default_rng(5).exponential(size=(200_000, 3)), axis=1).mean(axis=0)
    ours = sample_blocks(ChannelModel(3, seed=5), 0, 200_000).mean(axis=0)
    np.testing.assert_allclose(ours, ref, rtol=0.02)
    np.testing.assert_allclose(ours, [1 / 3, 1 / 3 + 1 / 2, 1 / 3 + 1 / 2 + 1], rtol=0.02)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), m=st.integers(1, 8), start=st.integers(0, 2**40))
def test_sorted_for_every_seed(seed, m, start):
    g = sample_blocks(ChannelModel(m, seed=seed), start, 20)
    assert np.all(np.diff(g, axis=1) >= 0)
    assert np.all(np.isfinite(g)) and np.all(g >= 0)


def test_chunk_ranges_cover_exactly():
    r = chunk_ranges(200_001, chunk=65536)
    assert r[0] == (0, 65536)
    assert sum(c for _, c in r) == 200_001
    assert r[-1] == (196608, 3393)
