import numpy as np
import pytest
from hypothesis import given, strategies as st

from sdofsim.encoder import (TwoPhasePlan, build_noise_selector,
                             build_phase2_precoder, encode_case_a,
                             encode_two_phase)
from sdofsim.errors import (DegenerateDrawError, DimensionError,
                            InvalidParameterError)
from sdofsim.model import (AntennaConfig, ChannelRealization, apply_channel,
                           complex_gaussian, generate_channel)
from sdofsim.receiver import (decode_case_a, decode_legitimate, leakage_dof,
                              leakage_slope, logdet_dof_slope, logdet_gain,
                              normalized_mse, numeric_rank, rank_with_margin,
                              secrecy_rank_check)

TWO_PHASE = [(4, 2, 3), (3, 1, 2), (5, 2, 2), (6, 2, 3), (7, 3, 2)]


def cfg(t):
    return AntennaConfig.from_triplet(*t)


def low_rank(rng, rows, cols, r):
    return complex_gaussian(rng, (rows, r)) @ complex_gaussian(rng, (r, cols))


@given(st.integers(1, 6), st.integers(1, 8), st.integers(0, 6),
       st.integers(0, 2 ** 31))
def test_numeric_rank_of_products(rows, cols, r, seed):
    rng = np.random.default_rng(seed)
    M = low_rank(rng, rows, cols, r) if r else np.zeros((rows, cols))
    assert numeric_rank(M) == min(rows, cols, r)


def test_rank_edge_cases():
    assert numeric_rank(np.zeros((0, 3))) == 0
    assert numeric_rank(np.zeros((2, 2))) == 0
    r, amb = rank_with_margin(np.diag([1.0, 1e-9]))
    assert amb


def test_logdet_gain_matches_slogdet(rng):
    F = complex_gaussian(rng, (4, 3))
    p = 37.0
    _, direct = np.linalg.slogdet(np.eye(4) + p * F @ F.conj().T)
    assert logdet_gain(F, p) == pytest.approx(direct)


@pytest.mark.parametrize("shape,r", [((6, 8), 4), ((3, 3), 3), ((5, 2), 1),
                                     ((1, 6), 1)])
def test_lemma_slope(shape, r, rng):
    est = logdet_dof_slope(low_rank(rng, *shape, r))
    assert abs(est.slope - r) <= 0.05
    assert est.interpreted_rank == r and est.deviation <= 0.05


def test_slope_powers_validated():
    with pytest.raises(InvalidParameterError):
        logdet_dof_slope(np.eye(2), 1e8, 1e6)
    assert leakage_slope(np.zeros((0, 0)), np.zeros((0, 0))).slope == 0


class TestCaseA:
    @pytest.mark.parametrize("t", [(2, 2, 1), (3, 3, 2), (2, 3, 1)])
    def test_decode_and_leakage(self, t, rng):
        c = cfg(t)
        real = generate_channel(c, 1, rng=rng)
        enc = encode_case_a(c, 1.0, rng)
        y1 = apply_channel(real, enc.x)[0]
        assert np.allclose(decode_case_a(c, y1, real), enc.v, atol=1e-9)
        assert abs(leakage_dof(c, enc, real, 1).slope - (c.m - c.n_max)) < 0.05
        assert leakage_dof(c, enc, real, 2).slope < 0.05

    def test_rank_deficient_channel(self):
        c = cfg((2, 2, 1))
        G1 = np.array([[[1.0, 1.0], [2.0, 2.0]]])
        real = ChannelRealization(c, (G1, np.ones((1, 1, 2))))
        with pytest.raises(DegenerateDrawError):
            decode_case_a(c, np.zeros(2), real)

    def test_dimension_errors(self, rng):
        c = cfg((2, 2, 1))
        with pytest.raises(DimensionError):
            decode_case_a(c, np.zeros(3), np.eye(2))
        with pytest.raises(InvalidParameterError):
            decode_case_a(c, np.zeros(2), np.eye(2), mode="fuzzy")


class TestTwoPhase:
    def _setup(self, t, rng, v=None):
        c = cfg(t)
        plan = TwoPhasePlan.from_config(c)
        real = generate_channel(c, plan.block_length, rng=rng)
        enc = encode_two_phase(c, 1.0, real, rng, v=v)
        return c, plan, real, enc

    @pytest.mark.parametrize("t", TWO_PHASE)
    def test_noiseless_round_trip(self, t, rng):
        c, plan, real, enc = self._setup(t, rng)
        y1 = apply_channel(real, enc.x)[0]
        v_hat = decode_legitimate(c, y1, real, enc.precoder.scale)
        assert v_hat.size == plan.v_length
        assert np.allclose(v_hat, enc.v, atol=1e-9)

    @pytest.mark.parametrize("t", TWO_PHASE)
    def test_secrecy_ranks(self, t, rng):
        c, plan, real, enc = self._setup(t, rng)
        legit = secrecy_rank_check(c, enc.precoder, real, 1)
        assert legit.decodable_dims == plan.v_length and legit.holds
        for j in c.eavesdroppers:
            rep = secrecy_rank_check(c, enc.precoder, real, j)
            assert rep.rank_full == rep.rank_noise and rep.holds

    @pytest.mark.parametrize("t", [(4, 2, 3), (5, 2, 2)])
    def test_rank_counts(self, t, rng):
        # noise dims at Rx1: b*n1 - v; full rank fills Rx1's b*n1 outputs
        c, plan, real, enc = self._setup(t, rng)
        legit = secrecy_rank_check(c, enc.precoder, real, 1)
        assert legit.rank_full == plan.block_length * c.n1
        assert legit.rank_noise == plan.block_length * c.n1 - plan.v_length

    def test_zero_information_subspace(self, rng):
        c, plan, real, enc = self._setup((4, 2, 3), rng, v=np.zeros(2))
        rep = secrecy_rank_check(c, enc.precoder, real, 1, zero_information=True)
        assert rep.rank_full == rep.rank_noise and rep.holds
        y1 = apply_channel(real, enc.x)[0]
        assert np.allclose(decode_legitimate(c, y1, real, enc.precoder.scale), 0,
                           atol=1e-9)

    @pytest.mark.parametrize("t", TWO_PHASE)
    def test_leakage_slopes(self, t, rng):
        c, plan, real, enc = self._setup(t, rng)
        assert abs(leakage_dof(c, enc, real, 1).slope - plan.v_length) < 0.05
        for j in c.eavesdroppers:
            assert leakage_dof(c, enc, real, j).slope < 0.05
        assert leakage_dof(c, enc, real, 1, drop_information=True).slope == 0

    def test_noisy_mse_falls_with_power(self):
        c = cfg((4, 2, 3))
        plan = TwoPhasePlan.from_config(c)
        rng = np.random.default_rng(3)
        mses = {p: [] for p in (1e2, 1e4, 1e6)}
        for _ in range(200):
            real = generate_channel(c, plan.block_length, rng=rng)
            for p in mses:
                enc = encode_two_phase(c, p, real, rng)
                y1 = apply_channel(real, enc.x, noise=True, rng=rng)[0]
                v_hat = decode_legitimate(c, y1, real, enc.precoder.scale, "noisy")
                mses[p].append(normalized_mse(v_hat, enc.v, p / plan.m_bar))
        med = [np.median(mses[p]) for p in sorted(mses)]
        assert med[0] > med[1] > med[2]
        # error energy scales like 1/p once the signal dominates
        assert med[1] / med[2] == pytest.approx(100, rel=0.5)

    def test_wrong_length(self, rng):
        c, plan, real, enc = self._setup((4, 2, 3), rng)
        with pytest.raises(DimensionError):
            decode_legitimate(c, np.zeros(5), real)

    def test_singular_subsystem(self, rng):
        c, plan, real, enc = self._setup((4, 2, 3), rng)
        bad = real.with_block(1, 3, np.zeros((2, 4)))
        with pytest.raises(DegenerateDrawError):
            decode_legitimate(c, np.zeros(6), bad)

    def test_secrecy_needs_precoder(self, rng):
        c = cfg((2, 2, 1))
        enc = encode_case_a(c, 1.0, rng)
        with pytest.raises(TypeError):
            secrecy_rank_check(c, enc, generate_channel(c, 1, rng=rng), 1)

    def test_precoder_directly(self, rng):
        c = cfg((5, 2, 2))
        real = generate_channel(c, 4, rng=rng)
        P = build_phase2_precoder(c, build_noise_selector(c, real))
        assert secrecy_rank_check(c, P, real, 2).holds


def test_normalized_mse():
    assert normalized_mse([1, 2], [1, 2], 1.0) == 0
    assert normalized_mse([2, 2], [0, 0], 2.0) == pytest.approx(2.0)
    assert normalized_mse([], [], 1.0) == 0
