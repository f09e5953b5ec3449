import numpy as np
import pytest
from hypothesis import given, strategies as st

from sdofsim.errors import DimensionError, InvalidParameterError
from sdofsim.model import (AntennaConfig, ChannelRealization, SignalBlock,
                           apply_channel, complex_gaussian, generate_channel,
                           stack_block_diagonal, trial_rng)


def test_config_properties():
    c = AntennaConfig(5, (2, 3, 1, 3))
    assert c.k == 3 and c.n1 == 2 and c.n_max == 3
    assert c.max_index == 2
    assert c.eavesdroppers == [2, 3, 4]
    assert c.m_bar == 5 and c.n_bar == 2
    assert c.antennas(3) == 1
    assert AntennaConfig.from_triplet(4, 2, 3) == AntennaConfig(4, (2, 3))


@pytest.mark.parametrize("m,n", [(0, (1, 1)), (2, (1,)), (2, (1, 0)),
                                 (2, (1, True)), (2.0, (1, 1))])
def test_config_rejects(m, n):
    with pytest.raises(InvalidParameterError):
        AntennaConfig(m, n)


def test_antenna_index_range():
    with pytest.raises(InvalidParameterError):
        AntennaConfig(2, (1, 1)).antennas(3)


def test_trial_rng_independent_of_order():
    a = [trial_rng(7, i).standard_normal() for i in range(5)]
    b = [trial_rng(7, i).standard_normal() for i in reversed(range(5))]
    assert a == b[::-1]
    assert trial_rng(7, 1, 0).random() != trial_rng(7, 1, 1).random()


def test_complex_gaussian_moments():
    z = complex_gaussian(np.random.default_rng(0), 200_000, variance=3.0)
    se = np.sqrt(3.0 / z.size)
    assert abs(z.mean()) < 3 * se * np.sqrt(2)
    assert abs(np.mean(np.abs(z) ** 2) / 3.0 - 1) < 0.02
    # circular symmetry: pseudo-covariance vanishes
    assert abs(np.mean(z ** 2)) < 0.02 * 3.0


def test_generate_channel_shapes_and_bound():
    c = AntennaConfig(3, (2, 4))
    r = generate_channel(c, 5, d_max=1.0, seed=3)
    assert r.horizon == 5
    assert r.G(1, 1).shape == (2, 3) and r.G(2, 5).shape == (4, 3)
    assert all(np.abs(b).max() <= 1.0 for b in r.blocks)
    with pytest.raises(ValueError):
        r.blocks[0][0, 0, 0] = 1.0


def test_generate_channel_reproducible():
    c = AntennaConfig(3, (2, 2))
    a, b = generate_channel(c, 2, seed=9), generate_channel(c, 2, seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(a.blocks, b.blocks))


@pytest.mark.parametrize("kw", [{"n": 0}, {"n": 2, "d_max": 0},
                                {"n": 2, "law": "rayleigh"}])
def test_generate_channel_rejects(kw):
    n = kw.pop("n")
    with pytest.raises(InvalidParameterError):
        generate_channel(AntennaConfig(2, (1, 1)), n, **kw)


def test_realization_validation():
    c = AntennaConfig(2, (1, 1))
    with pytest.raises(DimensionError):
        ChannelRealization(c, (np.zeros((1, 1, 2)),))
    with pytest.raises(DimensionError):
        ChannelRealization(c, (np.zeros((1, 1, 2)), np.zeros((2, 1, 2))))
    with pytest.raises(InvalidParameterError):
        ChannelRealization(c, (np.full((1, 1, 2), 20.0), np.zeros((1, 1, 2))))
    r = ChannelRealization(c, (np.zeros((1, 1, 2)), np.zeros((1, 1, 2))))
    with pytest.raises(InvalidParameterError):
        r.G(1, 2)


def test_with_block_copies():
    c = AntennaConfig(2, (1, 1))
    r = generate_channel(c, 2, seed=1)
    r2 = r.with_block(2, 1, np.ones((1, 2)))
    assert np.array_equal(r2.G(2, 1), np.ones((1, 2)))
    assert not np.array_equal(r.G(2, 1), np.ones((1, 2)))


@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 3))
def test_stack_matches_apply(m, n1, n):
    c = AntennaConfig(m, (n1, 2))
    r = generate_channel(c, n, seed=0)
    x = complex_gaussian(np.random.default_rng(1), n * m)
    H = stack_block_diagonal(r, 1, 1, n).matrix
    assert np.allclose(H @ x, apply_channel(r, x)[0])


def test_stack_columns_subset():
    c = AntennaConfig(4, (2, 3))
    r = generate_channel(c, 3, seed=0)
    S = stack_block_diagonal(r, 2, 2, 3, columns=2)
    assert S.matrix.shape == (6, 4)
    assert np.array_equal(S.matrix[:3, :2], r.G(2, 2)[:, :2])
    with pytest.raises(InvalidParameterError):
        stack_block_diagonal(r, 1, 2, 4)


def test_apply_channel_noise():
    c = AntennaConfig(2, (1, 1))
    r = generate_channel(c, 1, seed=0)
    with pytest.raises(DimensionError):
        apply_channel(r, np.zeros(3))
    with pytest.raises(InvalidParameterError):
        apply_channel(r, np.zeros(2), noise=True)
    ys = [apply_channel(r, np.zeros(2), noise=True,
                        rng=np.random.default_rng(i))[0] for i in range(20_000)]
    assert abs(np.mean(np.abs(ys) ** 2) - 1) < 0.03


def test_signal_block():
    b = SignalBlock("u_prime", [1, 2, 3])
    assert len(b) == 3 and b.values.dtype == complex
    with pytest.raises(InvalidParameterError):
        SignalBlock("w", [1])
