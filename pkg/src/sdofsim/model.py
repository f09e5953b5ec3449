"""Physical model: antenna configuration, channel draws and channel application.

Receivers are indexed from 1: receiver 1 is the legitimate receiver and
receivers 2..k+1 are eavesdroppers. Slots are indexed from 1 as well.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag

from .errors import DimensionError, InvalidParameterError

__all__ = [
    "AntennaConfig", "ChannelRealization", "StackedChannel", "SignalBlock",
    "DEFAULT_D_MAX", "CHANNEL_LAWS", "trial_rng", "complex_gaussian",
    "generate_channel", "stack_block_diagonal", "apply_channel",
]

DEFAULT_D_MAX = 10.0
CHANNEL_LAWS = ("gaussian",)
SIGNAL_ROLES = ("x", "y", "z", "u", "v", "u_prime")


def _check_positive_int(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise InvalidParameterError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts of the transmitter and of all receivers.

    Parameters
    ----------
    m : int
        Number of transmit antennas.
    n : tuple of int
        Receiver antenna counts ``(n_1, n_2, ..., n_{k+1})``. ``n[0]`` is the
        legitimate receiver, the rest are eavesdroppers (at least one).
    """

    m: int
    n: Tuple[int, ...]

    def __post_init__(self):
        _check_positive_int("m", self.m)
        n = tuple(int(v) if isinstance(v, np.integer) else v for v in self.n)
        object.__setattr__(self, "n", n)
        if len(n) < 2:
            raise InvalidParameterError(
                "need the legitimate receiver and at least one eavesdropper")
        for i, nj in enumerate(n, start=1):
            _check_positive_int(f"n_{i}", nj)

    @classmethod
    def from_triplet(cls, m, n1, n_max):
        """Single-eavesdropper configuration ``(m, n_1, n_max)``."""
        return cls(m, (n1, n_max))

    @property
    def k(self):
        return len(self.n) - 1

    @property
    def n1(self):
        return self.n[0]

    @property
    def eavesdroppers(self):
        """Receiver indices of the eavesdroppers (2..k+1)."""
        return list(range(2, len(self.n) + 1))

    @property
    def n_max(self):
        return max(self.n[1:])

    @property
    def max_index(self):
        # smallest eavesdropper index attaining n_max
        return 2 + self.n[1:].index(self.n_max)

    @property
    def m_bar(self):
        return min(self.m, self.n1 + self.n_max)

    @property
    def n_bar(self):
        return min(self.n1, self.n_max)

    def antennas(self, j):
        """Antenna count of receiver ``j`` (1-based)."""
        if not 1 <= j <= len(self.n):
            raise InvalidParameterError(f"receiver index {j} out of range")
        return self.n[j - 1]

    def as_dict(self):
        return {"m": self.m, "n": list(self.n)}


def trial_rng(master_seed, *counters):
    """Independent generator for one trial, derived from the master seed.

    The stream depends only on ``(master_seed, *counters)``, never on the
    order in which trials are scheduled.
    """
    return np.random.default_rng([int(master_seed), *map(int, counters)])


def complex_gaussian(rng, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian samples with given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _bounded_gaussian(rng, shape, d_max):
    g = complex_gaussian(rng, shape)
    bad = np.abs(g) > d_max
    while bad.any():
        g[bad] = complex_gaussian(rng, int(bad.sum()))
        bad = np.abs(g) > d_max
    return g


@dataclass(frozen=True)
class ChannelRealization:
    """Channel matrices of every receiver over a horizon of slots.

    ``blocks[j - 1]`` has shape ``(horizon, n_j, m)`` and its slice ``t - 1``
    is the matrix ``G_j(t)``. Arrays are read-only.
    """

    config: AntennaConfig
    blocks: Tuple[np.ndarray, ...]
    d_max: float = DEFAULT_D_MAX
    seed: Optional[object] = None
    law: str = "gaussian"

    def __post_init__(self):
        if len(self.blocks) != len(self.config.n):
            raise DimensionError("one channel block per receiver is required")
        horizon = None
        frozen = []
        for j, blk in enumerate(self.blocks, start=1):
            blk = np.array(blk, dtype=complex)
            if blk.ndim != 3 or blk.shape[1:] != (self.config.antennas(j),
                                                  self.config.m):
                raise DimensionError(
                    f"receiver {j}: expected (n, {self.config.antennas(j)}, "
                    f"{self.config.m}), got {blk.shape}")
            if horizon is None:
                horizon = blk.shape[0]
            elif blk.shape[0] != horizon:
                raise DimensionError("all receivers must share the horizon")
            if np.any(np.abs(blk) > self.d_max):
                raise InvalidParameterError("channel coefficient exceeds d_max")
            blk.setflags(write=False)
            frozen.append(blk)
        object.__setattr__(self, "blocks", tuple(frozen))

    @property
    def horizon(self):
        return self.blocks[0].shape[0]

    def G(self, j, t):
        """Channel matrix ``G_j(t)`` (1-based indices)."""
        if not 1 <= t <= self.horizon:
            raise InvalidParameterError(f"slot {t} outside 1..{self.horizon}")
        return self.blocks[j - 1][t - 1]

    def with_block(self, j, t, matrix):
        """Copy of this realization with ``G_j(t)`` replaced."""
        blocks = [b.copy() for b in self.blocks]
        blocks[j - 1][t - 1] = matrix
        return ChannelRealization(self.config, tuple(blocks), self.d_max,
                                  self.seed, self.law)


@dataclass(frozen=True)
class StackedChannel:
    """Block-diagonal stack ``diag(G_j(t0), ..., G_j(t1))``."""

    j: int
    t0: int
    t1: int
    matrix: np.ndarray


@dataclass(frozen=True)
class SignalBlock:
    """A tagged signal vector (transmit, received, noise or symbol block)."""

    role: str
    values: np.ndarray
    slots: Optional[Tuple[int, int]] = None
    owner: Optional[int] = None

    def __post_init__(self):
        if self.role not in SIGNAL_ROLES:
            raise InvalidParameterError(f"unknown signal role {self.role!r}")
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=complex).ravel())

    def __len__(self):
        return self.values.size


def generate_channel(config, n, d_max=DEFAULT_D_MAX, seed=None, rng=None,
                     law="gaussian"):
    """Draw i.i.d. channel matrices for every receiver over ``n`` slots.

    Entries are CN(0, 1), redrawn whenever ``|g| > d_max``.

    Parameters
    ----------
    config : AntennaConfig
    n : int
        Number of slots.
    d_max : float
        Magnitude bound on every coefficient.
    seed : int or sequence of int, optional
        Seed recorded with the realization. Ignored when ``rng`` is given
        (the caller then records provenance itself).
    rng : numpy.random.Generator, optional
    law : str
        Channel law; only ``"gaussian"`` is provided.
    """
    _check_positive_int("n", n)
    if not d_max > 0 or not np.isfinite(d_max):
        raise InvalidParameterError(f"d_max must be positive, got {d_max}")
    if law not in CHANNEL_LAWS:
        raise InvalidParameterError(f"unknown channel law {law!r}")
    if rng is None:
        rng = np.random.default_rng(seed)
    blocks = tuple(_bounded_gaussian(rng, (n, nj, config.m), d_max)
                   for nj in config.n)
    return ChannelRealization(config, blocks, float(d_max), seed, law)


def stack_block_diagonal(real, j, t0, t1, columns=None):
    """Stack ``G_j(t0), ..., G_j(t1)`` on the diagonal.

    ``columns`` optionally keeps only the first ``columns`` transmit antennas
    of every block (the two-phase scheme drives only the first m_bar).
    """
    if not 1 <= t0 <= t1 <= real.horizon:
        raise InvalidParameterError(
            f"slot range {t0}..{t1} outside 1..{real.horizon}")
    blocks = real.blocks[j - 1][t0 - 1:t1]
    if columns is not None:
        blocks = blocks[:, :, :columns]
    return StackedChannel(j, t0, t1, block_diag(*blocks))


def apply_channel(real, x, noise=False, rng=None) -> List[np.ndarray]:
    """Pass a transmit block through every receiver's channel.

    Parameters
    ----------
    real : ChannelRealization
    x : array_like
        Transmit block of length ``horizon * m`` (slot-major).
    noise : bool
        Add unit-variance CN noise at every receive antenna.
    rng : numpy.random.Generator, optional
        Required when ``noise`` is on.

    Returns
    -------
    list of ndarray
        ``y[j - 1]`` has length ``horizon * n_j``.
    """
    x = np.asarray(x, dtype=complex).ravel()
    m = real.config.m
    if x.size != real.horizon * m:
        raise DimensionError(
            f"transmit block has length {x.size}, expected {real.horizon * m}")
    if noise and rng is None:
        raise InvalidParameterError("noisy application requires an rng")
    xs = x.reshape(real.horizon, m)
    out = []
    for blk in real.blocks:
        y = np.einsum("tij,tj->ti", blk, xs)
        if noise:
            y = y + complex_gaussian(rng, y.shape)
        out.append(y.ravel())
    return out
