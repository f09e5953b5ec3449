"""Transmit-side constructions of both achievable schemes.

Single-slot scheme (``n_max < m <= n_1``): the first ``n_max`` antennas send
artificial noise, the remaining ``m - n_max`` antennas send information.

Two-phase scheme (``m > max(n_1, n_max)``): phase 1 (``n_bar`` slots) sends
fresh artificial noise on the first ``m_bar`` antennas; in phase 2
(``m_bar - n_max`` slots) slot ``n_bar + s`` retransmits the ``n_bar`` noise
equations seen by antenna ``s`` of the legitimate receiver during phase 1,
superposed on ``n_1`` new information symbols.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionError, NotApplicableError, PreconditionError
from .model import ChannelRealization, complex_gaussian

__all__ = [
    "CaseAEncoding", "TwoPhasePlan", "Precoder", "TwoPhaseEncoding",
    "encode_case_a", "build_noise_selector", "build_phase2_precoder",
    "encode_two_phase", "power_scale",
]


def _case_a_applicable(config):
    return config.n_max < config.m <= config.n1


def _two_phase_applicable(config):
    return config.m > max(config.n1, config.n_max)


@dataclass(frozen=True)
class CaseAEncoding:
    """One slot of the single-slot scheme: ``x = [u; v]``."""

    config: object
    p: float
    u: np.ndarray
    v: np.ndarray

    @property
    def x(self):
        return np.concatenate([self.u, self.v])

    @property
    def K_x(self):
        return self.p / self.config.m * np.eye(self.config.m)

    @property
    def K_x_given_v(self):
        d = np.zeros(self.config.m)
        d[:self.config.n_max] = 1.0
        return self.p / self.config.m * np.diag(d)

    @property
    def noise_factor(self):
        """``F_u`` with ``K_x|v = p * F_u F_u^H``."""
        m, e = self.config.m, self.config.n_max
        return np.eye(m)[:, :e] / np.sqrt(m)

    @property
    def full_factor(self):
        """``F`` with ``K_x = p * F F^H``."""
        return np.eye(self.config.m) / np.sqrt(self.config.m)


def encode_case_a(config, p, rng):
    """Draw artificial noise and information symbols for one slot.

    Parameters
    ----------
    config : AntennaConfig
        Must satisfy ``n_max < m <= n_1``.
    p : float
        Transmit power; every symbol has variance ``p / m``.
    rng : numpy.random.Generator
    """
    if not _case_a_applicable(config):
        raise NotApplicableError(
            f"single-slot scheme needs n_max < m <= n1, got m={config.m}, "
            f"n1={config.n1}, n_max={config.n_max}")
    if p < 0:
        raise ValueError("power must be non-negative")
    var = p / config.m
    u = complex_gaussian(rng, config.n_max, var)
    v = complex_gaussian(rng, config.m - config.n_max, var)
    return CaseAEncoding(config, p, u, v)


@dataclass(frozen=True)
class TwoPhasePlan:
    """Block geometry of the two-phase scheme."""

    m: int
    n1: int
    n_max: int
    m_bar: int
    n_bar: int

    @classmethod
    def from_config(cls, config):
        if not _two_phase_applicable(config):
            raise NotApplicableError(
                f"two-phase scheme needs m > max(n1, n_max), got m={config.m}, "
                f"n1={config.n1}, n_max={config.n_max}")
        return cls(config.m, config.n1, config.n_max, config.m_bar,
                   config.n_bar)

    @property
    def phase1_length(self):
        return self.n_bar

    @property
    def phase2_length(self):
        return self.m_bar - self.n_max

    @property
    def block_length(self):
        return self.phase1_length + self.phase2_length

    @property
    def u_length(self):
        return self.n_bar * self.m_bar

    @property
    def v_length(self):
        return self.n1 * self.phase2_length

    @property
    def columns(self):
        return self.u_length + self.v_length


def power_scale(plan, channel_power=1.0):
    """Constant gain making the expected per-slot power equal to ``p``.

    With symbols of variance ``p / m_bar`` the unscaled block carries
    ``p/m_bar * (n_bar*m_bar + L*n_bar*m_bar*E|g|^2 + n1*L)`` in expectation,
    ``L`` being the phase-2 length. The gain depends only on the channel law,
    never on a realization, so it does not break causality.
    """
    L = plan.phase2_length
    energy = (plan.n_bar * plan.m_bar * (1 + L * channel_power)
              + plan.n1 * L) / plan.m_bar
    return float(np.sqrt(plan.block_length / energy))


@dataclass(frozen=True)
class Precoder:
    """Block precoder mapping ``[u; v]`` to the active transmit block.

    ``matrix`` has shape ``(b * m_bar, n_bar * m_bar + n1 * L)``. The physical
    transmit block is ``scale * matrix @ [u; v]``.
    """

    plan: TwoPhasePlan
    A: np.ndarray
    matrix: np.ndarray
    scale: float = 1.0

    @property
    def noise_columns(self):
        return self.matrix[:, :self.plan.u_length]

    @property
    def info_columns(self):
        return self.matrix[:, self.plan.u_length:]

    def padded(self, matrix=None):
        """Lift a ``(b*m_bar, c)`` matrix to all ``m`` antennas (zero rows)."""
        M = self.matrix if matrix is None else matrix
        b, mb, m = self.plan.block_length, self.plan.m_bar, self.plan.m
        out = np.zeros((b, m, M.shape[1]), dtype=M.dtype)
        out[:, :mb, :] = M.reshape(b, mb, M.shape[1])
        return out.reshape(b * m, M.shape[1])

    def transmit(self, u, v):
        """Scaled transmit block over all ``m`` antennas, slot-major."""
        s = np.concatenate([u, v])
        return self.scale * (self.padded() @ s)


def _phase1_channels(config, g1):
    if isinstance(g1, ChannelRealization):
        g1 = g1.blocks[0]
    g1 = np.asarray(g1)
    n_bar = config.n_bar
    if g1.ndim != 3 or g1.shape[0] < n_bar:
        raise PreconditionError(
            f"need legitimate-receiver channels for slots 1..{n_bar}")
    if g1.shape[1:] != (config.n1, config.m):
        raise DimensionError(
            f"legitimate channels have shape {g1.shape[1:]}, expected "
            f"({config.n1}, {config.m})")
    return g1[:n_bar]


def build_noise_selector(config, g1):
    """Stack of the per-slot selectors ``A(n_bar+1), ..., A(b)``.

    Parameters
    ----------
    config : AntennaConfig
    g1 : ChannelRealization or ndarray
        Legitimate-receiver channels; only slots ``1..n_bar`` are read.

    Returns
    -------
    ndarray, shape ``(L * m_bar, n_bar * m_bar)``
        In the block for phase-2 slot ``n_bar + s``, row ``i`` holds the
        channel row of legitimate antenna ``s`` at phase-1 slot ``i`` in
        column block ``i``; rows ``n_bar+1..m_bar`` are zero.
    """
    plan = TwoPhasePlan.from_config(config)
    past = _phase1_channels(config, g1)
    mb, nb, L = plan.m_bar, plan.n_bar, plan.phase2_length
    A = np.zeros((L * mb, nb * mb), dtype=complex)
    for s in range(L):
        for i in range(nb):
            # antenna s of Rx1, phase-1 slot i, first m_bar transmit antennas
            A[s * mb + i, i * mb:(i + 1) * mb] = past[i, s, :mb]
    return A


def _info_selector(plan):
    sel = np.zeros((plan.m_bar, plan.n1))
    sel[:plan.n1, :plan.n1] = np.eye(plan.n1)
    return np.kron(np.eye(plan.phase2_length), sel)


def build_phase2_precoder(config, A, scale=None):
    """Assemble ``[[I, 0], [A, I_L kron [I_n1; 0]]]``.

    ``scale`` defaults to :func:`power_scale` of the plan.
    """
    plan = TwoPhasePlan.from_config(config)
    A = np.asarray(A, dtype=complex)
    expected = (plan.phase2_length * plan.m_bar, plan.u_length)
    if A.shape != expected:
        raise DimensionError(f"A has shape {A.shape}, expected {expected}")
    top = np.hstack([np.eye(plan.u_length),
                     np.zeros((plan.u_length, plan.v_length))])
    bottom = np.hstack([A, _info_selector(plan)])
    P = np.vstack([top, bottom]).astype(complex)

    assert np.array_equal(P[:plan.u_length, :plan.u_length],
                          np.eye(plan.u_length))
    assert not P[:plan.u_length, plan.u_length:].any()
    assert not A.reshape(plan.phase2_length, plan.m_bar, -1)[:, plan.n_bar:].any()

    if scale is None:
        scale = power_scale(plan)
    P.setflags(write=False)
    A = A.copy()
    A.setflags(write=False)
    return Precoder(plan, A, P, float(scale))


@dataclass(frozen=True)
class TwoPhaseEncoding:
    """Result of :func:`encode_two_phase`.

    ``x`` is the physical block over all ``m`` antennas (length ``b * m``);
    ``x_active`` keeps only the first ``m_bar`` antennas of every slot.
    """

    x: np.ndarray
    x_active: np.ndarray
    u: np.ndarray
    v: np.ndarray
    precoder: Precoder
    p: float

    @property
    def symbols_per_slot(self):
        plan = self.precoder.plan
        return Fraction(plan.v_length, plan.block_length)


def encode_two_phase(config, p, realization, rng, v=None):
    """Encode one block of the two-phase scheme.

    Parameters
    ----------
    config : AntennaConfig
    p : float
        Average per-slot transmit power.
    realization : ChannelRealization
        Only the legitimate receiver's phase-1 channels are read.
    rng : numpy.random.Generator
        Source of ``u`` then ``v``; consumption never depends on channels.
    v : array_like, optional
        Override the information symbols (``u`` is still drawn).
    """
    plan = TwoPhasePlan.from_config(config)
    var = p / plan.m_bar
    u = complex_gaussian(rng, plan.u_length, var)
    v_draw = complex_gaussian(rng, plan.v_length, var)
    if v is None:
        v = v_draw
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != plan.v_length:
        raise DimensionError(f"v has length {v.size}, expected {plan.v_length}")
    prec = build_phase2_precoder(config, build_noise_selector(config, realization))
    x_active = prec.scale * (prec.matrix @ np.concatenate([u, v]))
    x = prec.transmit(u, v)
    return TwoPhaseEncoding(x, x_active, u, v, prec, p)
