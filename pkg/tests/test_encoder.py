from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sdofsim.encoder import (TwoPhasePlan, build_noise_selector,
                             build_phase2_precoder, encode_case_a,
                             encode_two_phase, power_scale)
from sdofsim.errors import DimensionError, NotApplicableError, PreconditionError
from sdofsim.model import AntennaConfig, apply_channel, generate_channel
from sdofsim.sdof import compute_sdof

TWO_PHASE = [(4, 2, 3), (3, 1, 2), (5, 2, 2), (6, 2, 3), (7, 3, 2)]


def cfg(t):
    return AntennaConfig.from_triplet(*t)


@st.composite
def two_phase_configs(draw):
    n1 = draw(st.integers(1, 4))
    e = draw(st.integers(1, 4))
    m = draw(st.integers(max(n1, e) + 1, 8))
    return AntennaConfig.from_triplet(m, n1, e)


class TestCaseA:
    @pytest.mark.parametrize("t", [(2, 2, 1), (3, 3, 2), (2, 3, 1)])
    def test_shapes(self, t, rng):
        enc = encode_case_a(cfg(t), 10.0, rng)
        assert enc.u.size == t[2] and enc.v.size == t[0] - t[2]
        assert enc.x.size == t[0]

    @pytest.mark.parametrize("t", [(2, 2, 2), (3, 2, 1), (1, 1, 1)])
    def test_not_applicable(self, t, rng):
        with pytest.raises(NotApplicableError):
            encode_case_a(cfg(t), 1.0, rng)

    def test_covariances(self, rng):
        c, p = cfg((3, 3, 2)), 6.0
        enc = encode_case_a(c, p, rng)
        assert np.allclose(enc.K_x, 2.0 * np.eye(3))
        assert np.allclose(enc.K_x_given_v, np.diag([2.0, 2.0, 0.0]))
        assert np.allclose(p * enc.full_factor @ enc.full_factor.T, enc.K_x)
        assert np.allclose(p * enc.noise_factor @ enc.noise_factor.T,
                           enc.K_x_given_v)

    def test_empirical_covariance(self, rng):
        c, p = cfg((3, 3, 2)), 6.0
        X = np.array([encode_case_a(c, p, rng).x for _ in range(20_000)])
        K = X.T @ X.conj() / len(X)
        assert np.allclose(K, p / 3 * np.eye(3), atol=0.05 * p / 3)


class TestPlan:
    @pytest.mark.parametrize("t,b,L,u,v", [
        ((4, 2, 3), 3, 1, 8, 2),
        ((3, 1, 2), 2, 1, 3, 1),
        ((5, 2, 2), 4, 2, 8, 4),
        ((6, 2, 3), 4, 2, 10, 4),
    ])
    def test_geometry(self, t, b, L, u, v):
        plan = TwoPhasePlan.from_config(cfg(t))
        assert plan.block_length == b and plan.phase2_length == L
        assert plan.u_length == u and plan.v_length == v
        assert plan.columns == u + v

    def test_not_applicable(self):
        with pytest.raises(NotApplicableError):
            TwoPhasePlan.from_config(cfg((3, 3, 2)))

    @given(two_phase_configs())
    def test_rate_equals_sdof(self, c):
        plan = TwoPhasePlan.from_config(c)
        assert Fraction(plan.v_length, plan.block_length) == compute_sdof(c).value


class TestSelector:
    @pytest.mark.parametrize("t", TWO_PHASE)
    def test_reproduces_phase1_observations(self, t, rng):
        # A u equals what each Rx1 antenna saw in phase 1
        c = cfg(t)
        plan = TwoPhasePlan.from_config(c)
        real = generate_channel(c, plan.block_length, rng=rng)
        A = build_noise_selector(c, real)
        u = rng.standard_normal(plan.u_length) + 0j
        x = np.zeros((plan.block_length, c.m), dtype=complex)
        x[:plan.n_bar, :plan.m_bar] = u.reshape(plan.n_bar, plan.m_bar)
        y1 = apply_channel(real, x.ravel())[0].reshape(plan.block_length, c.n1)
        Au = (A @ u).reshape(plan.phase2_length, plan.m_bar)
        for s in range(plan.phase2_length):
            assert np.allclose(Au[s, :plan.n_bar], y1[:plan.n_bar, s])
            assert not Au[s, plan.n_bar:].any()

    def test_ignores_future_and_eavesdroppers(self, rng):
        c = cfg((5, 2, 2))
        plan = TwoPhasePlan.from_config(c)
        real = generate_channel(c, plan.block_length, rng=rng)
        A = build_noise_selector(c, real)
        changed = real.with_block(1, plan.n_bar + 1, np.zeros((2, 5)))
        changed = changed.with_block(2, 1, np.zeros((2, 5)))
        assert np.array_equal(A, build_noise_selector(c, changed))
        changed = real.with_block(1, plan.n_bar, np.zeros((2, 5)))
        assert not np.array_equal(A, build_noise_selector(c, changed))

    def test_preconditions(self, rng):
        c = cfg((5, 2, 2))
        with pytest.raises(PreconditionError):
            build_noise_selector(c, np.zeros((1, 2, 5)))
        with pytest.raises(DimensionError):
            build_noise_selector(c, np.zeros((2, 3, 5)))


class TestPrecoder:
    @pytest.mark.parametrize("t", TWO_PHASE)
    def test_structure(self, t, rng):
        c = cfg(t)
        plan = TwoPhasePlan.from_config(c)
        A = build_noise_selector(c, generate_channel(c, plan.block_length, rng=rng))
        P = build_phase2_precoder(c, A)
        nu = plan.u_length
        assert P.matrix.shape == (plan.block_length * plan.m_bar, plan.columns)
        assert np.array_equal(P.matrix[:nu, :nu], np.eye(nu))
        assert np.array_equal(P.matrix[nu:, :nu], A)
        info = P.matrix[nu:, nu:].real
        sel = np.vstack([np.eye(c.n1), np.zeros((plan.m_bar - c.n1, c.n1))])
        assert np.array_equal(info, np.kron(np.eye(plan.phase2_length), sel))
        assert not P.matrix.flags.writeable

    def test_bad_shape(self):
        with pytest.raises(DimensionError):
            build_phase2_precoder(cfg((4, 2, 3)), np.zeros((2, 2)))

    def test_padded_rows(self, rng):
        c = cfg((6, 2, 3))
        plan = TwoPhasePlan.from_config(c)
        real = generate_channel(c, plan.block_length, rng=rng)
        P = build_phase2_precoder(c, build_noise_selector(c, real))
        full = P.padded().reshape(plan.block_length, c.m, -1)
        assert not full[:, plan.m_bar:].any()

    @pytest.mark.parametrize("t", [(4, 2, 3), (5, 2, 2)])
    def test_average_power(self, t):
        c, p = cfg(t), 4.0
        plan = TwoPhasePlan.from_config(c)
        rng = np.random.default_rng(5)
        powers = []
        for _ in range(4000):
            real = generate_channel(c, plan.block_length, rng=rng)
            enc = encode_two_phase(c, p, real, rng)
            powers.append(np.sum(np.abs(enc.x) ** 2) / plan.block_length)
        assert abs(np.mean(powers) / p - 1) < 0.05

    def test_scale_uses_channel_law_only(self):
        plan = TwoPhasePlan.from_config(cfg((4, 2, 3)))
        # b / ((n_bar m_bar (1 + L) + n1 L) / m_bar) with unit channel power
        assert power_scale(plan) == pytest.approx(np.sqrt(3 / ((8 * 2 + 2) / 4)))


class TestEncode:
    def test_rng_consumption_channel_free(self):
        c = cfg((4, 2, 3))
        r1 = generate_channel(c, 3, seed=1)
        r2 = generate_channel(c, 3, seed=2)
        e1 = encode_two_phase(c, 1.0, r1, np.random.default_rng(0))
        e2 = encode_two_phase(c, 1.0, r2, np.random.default_rng(0))
        assert np.array_equal(e1.u, e2.u) and np.array_equal(e1.v, e2.v)

    def test_v_override(self, rng):
        c = cfg((4, 2, 3))
        real = generate_channel(c, 3, rng=rng)
        enc = encode_two_phase(c, 1.0, real, rng, v=np.zeros(2))
        assert not enc.v.any()
        with pytest.raises(DimensionError):
            encode_two_phase(c, 1.0, real, rng, v=np.zeros(3))

    @pytest.mark.parametrize("t,rate", [((4, 2, 3), Fraction(2, 3)),
                                        ((3, 1, 2), Fraction(1, 2))])
    def test_symbols_per_slot(self, t, rate, rng):
        c = cfg(t)
        plan = TwoPhasePlan.from_config(c)
        enc = encode_two_phase(c, 1.0, generate_channel(c, plan.block_length,
                                                        rng=rng), rng)
        assert enc.symbols_per_slot == rate

    def test_active_matches_physical(self, rng):
        c = cfg((6, 2, 3))
        plan = TwoPhasePlan.from_config(c)
        enc = encode_two_phase(c, 1.0, generate_channel(c, 4, rng=rng), rng)
        x = enc.x.reshape(plan.block_length, c.m)
        assert np.allclose(x[:, :plan.m_bar].ravel(), enc.x_active)
