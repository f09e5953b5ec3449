"""Legitimate-receiver decoding and rank / log-det secrecy analysis."""

from dataclasses import dataclass

import numpy as np

from .encoder import CaseAEncoding, Precoder, TwoPhaseEncoding, TwoPhasePlan
from .errors import (DegenerateDrawError, DimensionError, InvalidParameterError,
                     NumericalError)
from .model import ChannelRealization, stack_block_diagonal

__all__ = [
    "RANK_REL_TOL", "SLOPE_POWERS", "DoFEstimate", "SecrecyRankReport",
    "singular_values", "numeric_rank", "rank_with_margin",
    "rank_is_ambiguous", "logdet_gain",
    "logdet_dof_slope", "leakage_slope", "leakage_dof", "secrecy_rank_check",
    "decode_legitimate", "decode_case_a", "normalized_mse",
]

RANK_REL_TOL = 1e-9
SLOPE_POWERS = (1e6, 1e8)
MODES = ("noiseless", "noisy")


def singular_values(M):
    M = np.asarray(M)
    if M.size == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(M)):
        raise NumericalError("matrix has non-finite entries")
    return np.linalg.svd(M, compute_uv=False)


def numeric_rank(M, rel_tol=RANK_REL_TOL, scale=0.0):
    """Number of singular values above ``rel_tol * max(s_max, scale)``.

    ``scale`` is a reference magnitude for the matrix (for a product
    ``G X``, the size of ``X``); without it a matrix made only of round-off
    would count its largest round-off value as one dimension. Empty and
    all-zero matrices have rank 0.
    """
    return rank_with_margin(M, rel_tol, scale=scale)[0]


def rank_with_margin(M, rel_tol=RANK_REL_TOL, margin=1e3, scale=0.0):
    """Numeric rank plus a flag for singular values near the cut-off.

    A singular value within a factor ``margin`` of the cut-off makes the
    count untrustworthy; such draws are treated as degenerate.
    """
    s = singular_values(M)
    ref = max(s[0] if s.size else 0.0, float(scale))
    if ref == 0:
        return 0, False
    r = s / ref
    ambiguous = bool(np.any((r > rel_tol / margin) & (r < rel_tol * margin)))
    return int(np.count_nonzero(r > rel_tol)), ambiguous


def rank_is_ambiguous(M, rel_tol=RANK_REL_TOL, margin=1e3):
    return rank_with_margin(M, rel_tol, margin)[1]


def logdet_gain(F, p):
    """``log det(I + p F F^H)`` through the singular values of ``F``."""
    s = singular_values(F)
    val = float(np.sum(np.log1p(p * s ** 2)))
    if not np.isfinite(val):
        raise NumericalError(f"log-det is not finite at p={p}")
    return val


@dataclass(frozen=True)
class DoFEstimate:
    """Finite-power slope of a log-det curve and the rank it points to."""

    slope: float
    p0: float
    p1: float

    @property
    def interpreted_rank(self):
        return int(round(self.slope))

    @property
    def deviation(self):
        return abs(self.slope - self.interpreted_rank)


def _check_powers(p0, p1):
    if not (p1 > p0 > 1):
        raise InvalidParameterError(f"need p1 > p0 > 1, got p0={p0}, p1={p1}")


def logdet_dof_slope(A, p0=SLOPE_POWERS[0], p1=SLOPE_POWERS[1]):
    """Difference quotient of ``log det(I + p A A^H)`` over ``log p``.

    Tends to ``rank(A)`` as the powers grow.
    """
    _check_powers(p0, p1)
    slope = (logdet_gain(A, p1) - logdet_gain(A, p0)) / (np.log(p1) - np.log(p0))
    return DoFEstimate(float(slope), p0, p1)


def leakage_slope(full, noise, p0=SLOPE_POWERS[0], p1=SLOPE_POWERS[1]):
    """Slope of ``logdet(I + p F F^H) - logdet(I + p F_u F_u^H)``.

    ``full`` and ``noise`` are the received-signal factors with and without
    the information symbols (covariances ``p F F^H`` and ``p F_u F_u^H``).
    """
    _check_powers(p0, p1)
    if np.asarray(full).size == 0:
        return DoFEstimate(0.0, p0, p1)

    def f(p):
        return logdet_gain(full, p) - logdet_gain(noise, p)

    slope = (f(p1) - f(p0)) / (np.log(p1) - np.log(p0))
    return DoFEstimate(float(slope), p0, p1)


def _precoder_of(encoding):
    if isinstance(encoding, TwoPhaseEncoding):
        return encoding.precoder
    if isinstance(encoding, Precoder):
        return encoding
    return None


def leakage_dof(config, encoding, realization, j, p0=SLOPE_POWERS[0],
                p1=SLOPE_POWERS[1], drop_information=False):
    """Estimate ``lim I(v; y_j | G) / log p`` for one channel draw.

    Parameters
    ----------
    encoding : CaseAEncoding, TwoPhaseEncoding or Precoder
    realization : ChannelRealization
        Slot 1 is used for the single-slot scheme, slots ``1..b`` otherwise.
    j : int
        Receiver index (1 = legitimate).
    drop_information : bool
        Remove the information columns, which makes the leakage exactly 0.
    """
    prec = _precoder_of(encoding)
    if isinstance(encoding, CaseAEncoding):
        H = realization.G(j, 1)
        full = H @ encoding.full_factor
        noise = H @ encoding.noise_factor
    elif prec is not None:
        plan = prec.plan
        H = stack_block_diagonal(realization, j, 1, plan.block_length,
                                 columns=plan.m_bar).matrix
        gain = prec.scale / np.sqrt(plan.m_bar)
        full = gain * (H @ prec.matrix)
        noise = gain * (H @ prec.noise_columns)
    else:
        raise TypeError(f"unsupported encoding {type(encoding).__name__}")
    if drop_information:
        full = noise
    return leakage_slope(full, noise, p0, p1)


@dataclass(frozen=True)
class SecrecyRankReport:
    """Signal dimensions at one receiver under the two-phase precoder."""

    j: int
    rank_noise: int
    rank_full: int
    expected_decodable: int
    ambiguous: bool = False

    @property
    def decodable_dims(self):
        return self.rank_full - self.rank_noise

    @property
    def holds(self):
        """Eavesdroppers see no information dimension; Rx1 sees all of them."""
        if self.j == 1:
            return self.decodable_dims == self.expected_decodable
        return self.rank_full == self.rank_noise


def secrecy_rank_check(config, precoder, realization, j, rel_tol=RANK_REL_TOL,
                       zero_information=False):
    """Ranks of the noise-only and full received-signal matrices at ``Rx_j``.

    The noise-only matrix is ``[G_j^{n_bar}; G_j^{phase 2} A]`` and the full
    one appends the information columns.
    """
    prec = _precoder_of(precoder)
    if prec is None:
        raise TypeError("secrecy_rank_check needs a two-phase precoder")
    plan = prec.plan
    H = stack_block_diagonal(realization, j, 1, plan.block_length,
                             columns=plan.m_bar).matrix
    noise = H @ prec.noise_columns
    full = H @ (prec.noise_columns if zero_information else prec.matrix)
    rn, amb_n = rank_with_margin(noise, rel_tol)
    rf, amb_f = rank_with_margin(full, rel_tol)
    ambiguous = amb_n or amb_f
    if rf < rn:
        raise NumericalError(f"rank_full {rf} < rank_noise {rn}")
    expected = plan.v_length if j == 1 else 0
    if zero_information:
        expected = 0
    return SecrecyRankReport(j, rn, rf, expected, ambiguous)


def _check_mode(mode):
    if mode not in MODES:
        raise InvalidParameterError(f"mode must be one of {MODES}, got {mode!r}")


def _solve_square(M, rhs, rel_tol):
    r, ambiguous = rank_with_margin(M, rel_tol)
    if r < M.shape[1] or ambiguous:
        raise DegenerateDrawError("singular legitimate-receiver subsystem")
    return np.linalg.solve(M, rhs)


def decode_legitimate(config, y1, realization, scale=1.0, mode="noiseless",
                      rel_tol=RANK_REL_TOL):
    """Recover the information symbols of one two-phase block at ``Rx_1``.

    For phase-2 slot ``n_bar + s`` the receiver rebuilds the retransmitted
    noise equations from its own antenna-``s`` outputs in phase 1, cancels
    them and solves the leading ``n1 x n1`` system.

    Parameters
    ----------
    y1 : array_like
        Received block of length ``b * n1`` (slot-major).
    realization : ChannelRealization
    scale : float
        Precoder gain (:attr:`Precoder.scale`).
    mode : {"noiseless", "noisy"}
        In noiseless mode the cancelled signal is checked to lie exactly in
        the information subspace.

    Returns
    -------
    ndarray of length ``n1 * (m_bar - n_max)``
    """
    _check_mode(mode)
    plan = TwoPhasePlan.from_config(config)
    b, n1, nb = plan.block_length, plan.n1, plan.n_bar
    y1 = np.asarray(y1, dtype=complex).ravel()
    if y1.size != b * n1:
        raise DimensionError(f"y1 has length {y1.size}, expected {b * n1}")
    Y = y1.reshape(b, n1)
    v_hat = []
    for s in range(plan.phase2_length):
        t = nb + s + 1
        G = realization.G(1, t)
        u_prime = Y[:nb, s]
        residual = Y[t - 1] - G[:, :nb] @ u_prime
        z = _solve_square(G[:, :n1], residual, rel_tol)
        if mode == "noiseless":
            err = np.linalg.norm(G[:, :n1] @ z - residual)
            if err > 1e-8 * max(1.0, np.linalg.norm(residual)):
                raise NumericalError("noiseless phase-2 equations inconsistent")
        v_hat.append(z / scale)
    return np.concatenate(v_hat)


def decode_case_a(config, y1, G1, mode="noiseless", rel_tol=RANK_REL_TOL):
    """Least-squares recovery of ``[u; v]`` from one slot at ``Rx_1``.

    ``G1`` is the ``n1 x m`` channel matrix or a realization (slot 1 used).
    Returns the last ``m - n_max`` entries of the solution.
    """
    _check_mode(mode)
    if isinstance(G1, ChannelRealization):
        G1 = G1.G(1, 1)
    G1 = np.asarray(G1)
    y1 = np.asarray(y1, dtype=complex).ravel()
    if G1.shape != (config.n1, config.m) or y1.size != config.n1:
        raise DimensionError("received block or channel does not match config")
    r, ambiguous = rank_with_margin(G1, rel_tol)
    if r < config.m or ambiguous:
        raise DegenerateDrawError("legitimate channel is rank deficient")
    x_hat, *_ = np.linalg.lstsq(G1, y1, rcond=None)
    if mode == "noiseless":
        err = np.linalg.norm(G1 @ x_hat - y1)
        if err > 1e-8 * max(1.0, np.linalg.norm(y1)):
            raise NumericalError("noiseless equations inconsistent")
    return x_hat[config.n_max:]


def normalized_mse(v_hat, v, symbol_variance):
    """Per-symbol squared error divided by the symbol variance."""
    v_hat, v = np.asarray(v_hat), np.asarray(v)
    if v.size == 0:
        return 0.0
    return float(np.mean(np.abs(v_hat - v) ** 2) / symbol_variance)
