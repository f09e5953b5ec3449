"""Rank analogues of the converse inequalities under linear encoding.

Every entropy term ``h(y^n | G^n)`` is replaced by the rank of the received
signal matrix ``G^n X``, where ``X`` maps the symbol vector to the transmit
block. Conditional terms use ``rank(Y_a | Y_c) = rank([Y_a; Y_c]) - rank(Y_c)``.
These are linear-dimension surrogates of the entropy statements, not proofs
of them.

Receivers that supply no CSIT get channels drawn independently of ``X``.
The legitimate receiver is the only one whose (past) channels a strategy
may read.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, List, Optional

import numpy as np
from scipy.linalg import block_diag

from ..encoder import TwoPhasePlan, build_noise_selector, build_phase2_precoder
from ..errors import InvalidParameterError
from ..model import AntennaConfig, complex_gaussian, trial_rng
from ..parallel import run_trials
from ..receiver import RANK_REL_TOL, numeric_rank, rank_with_margin

__all__ = [
    "SURROGATE_NOTE", "LinearStrategy", "random_strategy",
    "two_phase_strategy", "custom_strategy", "conditional_rank",
    "verify_causality", "ConverseReport", "check_least_alignment",
    "check_eri_delayed", "check_eri_nocsit", "check_joint_claim",
    "check_proposition1", "check_proposition2", "MIN_PASS_FRACTION",
]

SURROGATE_NOTE = ("entropy inequalities checked through linear-rank "
                  "surrogates under linear encoding")
MIN_PASS_FRACTION = 0.99
STRATEGY_KINDS = ("random", "two-phase", "custom")


@dataclass(frozen=True)
class LinearStrategy:
    """A linear transmit strategy ``x^n = X s`` over ``n`` slots.

    Parameters
    ----------
    kind : {"random", "two-phase", "custom"}
    m : int
        Transmit antennas.
    n : int
        Horizon in slots.
    d : int, optional
        Number of symbols (columns of ``X``) for ``random``.
    config : AntennaConfig, optional
        Configuration for ``two-phase``.
    fn : callable, optional
        ``fn(g1, rng) -> X`` for ``custom``; ``g1`` has shape
        ``(n, n1, m)``. Must be a module-level function to run in a pool.
    legit_antennas : int, optional
        Antennas of the receiver whose channels the strategy reads.
    """

    kind: str
    m: int
    n: int
    d: Optional[int] = None
    config: Optional[AntennaConfig] = None
    fn: Optional[Callable] = None
    legit_antennas: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise InvalidParameterError(f"unknown strategy kind {self.kind!r}")

    @property
    def channel_independent(self):
        return self.kind == "random" or (self.kind == "custom"
                                         and self.legit_antennas is None)

    def build(self, g1, rng):
        """Transmit matrix of shape ``(n * m, d)``."""
        if self.kind == "random":
            d = self.n * self.m if self.d is None else self.d
            return complex_gaussian(rng, (self.n * self.m, d))
        if self.kind == "two-phase":
            A = build_noise_selector(self.config, g1)
            return build_phase2_precoder(self.config, A).padded()
        return np.asarray(self.fn(g1, rng))


def random_strategy(m, n=1, d=None, name=None):
    """Channel-independent Gaussian ``X``; ``d < n*m`` gives a low-rank one."""
    label = name or ("random" if d is None else f"random-d{d}")
    return LinearStrategy("random", m, n, d=d, name=label)


def two_phase_strategy(config):
    """The two-phase precoder of ``config`` over one block."""
    plan = TwoPhasePlan.from_config(config)
    return LinearStrategy("two-phase", config.m, plan.block_length,
                          config=config, legit_antennas=config.n1,
                          name="two-phase")


def custom_strategy(fn, m, n, legit_antennas=None, name="custom"):
    return LinearStrategy("custom", m, n, fn=fn,
                          legit_antennas=legit_antennas, name=name)


def _stack(blocks):
    return block_diag(*blocks)


def _received(blocks, X):
    return _stack(blocks) @ X


def conditional_rank(Ya, Yc, rel_tol=RANK_REL_TOL, scale=0.0):
    """``rank([Ya; Yc]) - rank(Yc)``; ``Yc`` may be ``None`` or empty."""
    if Yc is None or Yc.shape[0] == 0:
        return numeric_rank(Ya, rel_tol, scale)
    return (numeric_rank(np.vstack([Ya, Yc]), rel_tol, scale)
            - numeric_rank(Yc, rel_tol, scale))


class _Ranks:
    """Rank evaluator that remembers whether any count was borderline."""

    def __init__(self, rel_tol, X=None):
        self.rel_tol = rel_tol
        # channel entries are O(1), so |X| sets the size of every G X
        self.scale = 0.0 if X is None or X.size == 0 else np.linalg.norm(X, 2)
        self.degenerate = False

    def __call__(self, *blocks):
        blocks = [b for b in blocks if b is not None and b.shape[0]]
        if not blocks:
            return 0
        r, amb = rank_with_margin(np.vstack(blocks), self.rel_tol,
                                  scale=self.scale)
        self.degenerate |= amb
        return r

    def given(self, Ya, *cond):
        return self(Ya, *cond) - self(*cond)


def verify_causality(strategy, seed=0, rel=1e-12):
    """Check that ``x(t)`` never depends on legitimate channels of slot >= t.

    Perturbs ``G_1(t)`` for each ``t`` and compares the rows of slots
    ``1..t`` of the rebuilt ``X`` (same RNG stream).
    """
    n, m = strategy.n, strategy.m
    n1 = strategy.legit_antennas or 1
    g1 = complex_gaussian(np.random.default_rng(seed), (n, n1, m))
    X0 = strategy.build(g1, trial_rng(seed, 0))
    for t in range(n):
        g = g1.copy()
        g[t:] += 1.0
        X = strategy.build(g, trial_rng(seed, 0))
        rows = slice(0, (t + 1) * m)
        if not np.allclose(X[rows], X0[rows], rtol=0, atol=rel):
            return False
    return True


@dataclass
class ConverseReport:
    """Outcome of one rank-analogue check."""

    name: str
    strategy: str
    trials: int
    nondegenerate: int = 0
    holds: int = 0
    failing_trials: List[int] = field(default_factory=list)
    lhs_mean: Fraction = Fraction(0)
    rhs_mean: Fraction = Fraction(0)
    mode: str = "per-draw"
    tol: Fraction = Fraction(0)
    min_fraction: float = MIN_PASS_FRACTION
    seed: int = 0
    note: str = SURROGATE_NOTE

    @property
    def pass_fraction(self):
        if self.nondegenerate == 0:
            return 1.0
        return self.holds / self.nondegenerate

    @property
    def passed(self):
        if self.mode == "average":
            return self.lhs_mean <= self.rhs_mean + self.tol
        return self.pass_fraction >= self.min_fraction

    def as_dict(self):
        return {
            "check": self.name, "strategy": self.strategy,
            "mode": self.mode, "note": self.note, "seed": self.seed,
            "tol": str(self.tol),
            "trials": self.trials, "nondegenerate": self.nondegenerate,
            "holds": self.holds, "pass_fraction": self.pass_fraction,
            "lhs_mean": str(self.lhs_mean), "rhs_mean": str(self.rhs_mean),
            "failing_trial_seeds": [[self.seed, i]
                                    for i in self.failing_trials[:50]],
            "passed": self.passed,
        }


def _draw(rng, n, antennas, m):
    return complex_gaussian(rng, (n, antennas, m))


def _legit_and_X(strategy, rng, antennas):
    n1 = strategy.legit_antennas or antennas
    g1 = _draw(rng, strategy.n, n1, strategy.m)
    X = strategy.build(g1, rng)
    return g1, X


# Per-trial kernels return (degenerate, lhs, rhs) with Fraction sides of an
# inequality lhs <= rhs. Module level so a process pool can pickle them.

def _lal_trial(i, n0, strategy, seed, rel_tol):
    rng = trial_rng(seed, i)
    g1, X = _legit_and_X(strategy, rng, n0)
    g2 = _draw(rng, strategy.n, n0, strategy.m)
    rank = _Ranks(rel_tol, X)
    lhs = Fraction(rank(_received(g1[:, :n0], X)))
    rhs = Fraction(rank(_received(g2, X)))
    return rank.degenerate, lhs, rhs


def _eri_delayed_trial(i, n1, n2, strategy, seed, rel_tol):
    rng = trial_rng(seed, i)
    g1, X = _legit_and_X(strategy, rng, n1)
    g2 = _draw(rng, strategy.n, n2, strategy.m)
    Y1 = _received(g1[:, :n1], X)
    Y2 = _received(g2, X)
    m = strategy.m
    rank = _Ranks(rel_tol, X)
    joint = Fraction(rank(Y1, Y2), min(m, n1 + n2))
    single = Fraction(rank(Y2), min(m, n2))
    return rank.degenerate, joint, single


def _eri_nocsit_trial(i, n1, n2, n3, strategy, seed, rel_tol):
    rng = trial_rng(seed, i)
    _, X = _legit_and_X(strategy, rng, n1)
    n, m = strategy.n, strategy.m
    Y1 = _received(_draw(rng, n, n1, m), X)
    Y2 = _received(_draw(rng, n, n2, m), X)
    Y3 = _received(_draw(rng, n, n3, m), X) if n3 else None
    rank = _Ranks(rel_tol, X)
    lhs = Fraction(rank.given(Y1, Y3), min(m, n1))
    rhs = Fraction(rank.given(Y2, Y3), min(m, n2))
    return rank.degenerate, lhs, rhs


def _joint_ranks(Y1, Y2, Y3, n1, n2, rel_tol, X):
    rank = _Ranks(rel_tol, X)
    lhs = Fraction(rank.given(Y1, Y2, Y3), n1)
    rhs = Fraction(rank.given(Y2, Y3), n2)
    return rank.degenerate, lhs, rhs


def _joint_trial(i, n1, n2, n3, strategy, seed, rel_tol):
    rng = trial_rng(seed, i)
    g1, X = _legit_and_X(strategy, rng, n1)
    n, m = strategy.n, strategy.m
    Y1 = _received(g1[:, :n1], X)
    Y2 = _received(_draw(rng, n, n2, m), X)
    Y3 = _received(_draw(rng, n, n3, m), X)
    return _joint_ranks(Y1, Y2, Y3, n1, n2, rel_tol, X)


def _prop2_trial(i, config, strategy, seed, rel_tol):
    rng = trial_rng(seed, i)
    n1, n_max, mb, nb = config.n1, config.n_max, config.m_bar, config.n_bar
    g1, X = _legit_and_X(strategy, rng, n1)
    n, m = strategy.n, strategy.m
    gmax = _draw(rng, n, n_max, m)
    Y11 = _received(g1[:, :mb - n_max], X)
    Ymax1 = _received(gmax[:, :nb], X)
    Ymax2 = _received(gmax[:, nb:], X)
    return _joint_ranks(Y11, Ymax2, Ymax1, mb - n_max, n_max - nb,
                        rel_tol, X)


def _prop1_trial(i, config, strategy, seed, rel_tol):
    rng = trial_rng(seed, i)
    n1, nb = config.n1, config.n_bar
    g1, X = _legit_and_X(strategy, rng, n1)
    gmax = _draw(rng, strategy.n, config.n_max, strategy.m)
    rank = _Ranks(rel_tol, X)
    lhs = Fraction(rank(_received(g1[:, :n1], X)))
    rhs = Fraction(n1, nb) * rank(_received(gmax[:, :nb], X))
    return rank.degenerate, lhs, rhs


def _aggregate(name, strategy, kernel, trials, seed, tol, workers, mode,
               min_fraction):
    results = run_trials(kernel, trials, workers)
    tol = Fraction(str(tol))
    rep = ConverseReport(name, strategy.name or strategy.kind, trials,
                         mode=mode, min_fraction=min_fraction, seed=seed,
                         tol=tol)
    lhs_sum, rhs_sum = Fraction(0), Fraction(0)
    for i, (deg, lhs, rhs) in enumerate(results):
        if deg:
            continue
        rep.nondegenerate += 1
        lhs_sum += lhs
        rhs_sum += rhs
        if lhs <= rhs + tol:
            rep.holds += 1
        else:
            rep.failing_trials.append(i)
    if rep.nondegenerate:
        rep.lhs_mean = lhs_sum / rep.nondegenerate
        rep.rhs_mean = rhs_sum / rep.nondegenerate
    return rep


def check_least_alignment(n0, strategy, trials=1000, seed=0, tol=0,
                          workers=1, rel_tol=RANK_REL_TOL,
                          min_fraction=MIN_PASS_FRACTION):
    """Per draw: ``rank(G_1^n X) <= rank(G_2^n X)``, both receivers ``n0``
    antennas, ``G_2`` independent of ``X``."""
    if strategy.legit_antennas is not None and strategy.legit_antennas < n0:
        raise InvalidParameterError("strategy reads fewer than n0 antennas")
    kernel = partial(_lal_trial, n0=n0, strategy=strategy, seed=seed,
                     rel_tol=rel_tol)
    return _aggregate("least-alignment", strategy, kernel, trials, seed, tol,
                      workers, "per-draw", min_fraction)


def check_eri_delayed(n1, n2, strategy, trials=1000, seed=0, tol=1e-9,
                      workers=1, rel_tol=RANK_REL_TOL,
                      min_fraction=MIN_PASS_FRACTION):
    """Averaged: ``E rank([Y1;Y2]) / min(m, n1+n2) <= E rank(Y2) / min(m, n2)``.

    ``Rx_1`` may feed delayed CSIT; ``Rx_2`` does not.
    """
    kernel = partial(_eri_delayed_trial, n1=n1, n2=n2, strategy=strategy,
                     seed=seed, rel_tol=rel_tol)
    return _aggregate("eri-delayed", strategy, kernel, trials, seed, tol,
                      workers, "average", min_fraction)


def check_eri_nocsit(n1, n2, strategy, trials=1000, seed=0, tol=0, n3=0,
                     workers=1, rel_tol=RANK_REL_TOL,
                     min_fraction=MIN_PASS_FRACTION):
    """Per draw: ``rank(Y1|Y3)/min(m,n1) <= rank(Y2|Y3)/min(m,n2)``.

    All receivers are independent of ``X``. ``n3 = 0`` gives the
    unconditional form.
    """
    if n1 < n2:
        raise InvalidParameterError("need n1 >= n2")
    kernel = partial(_eri_nocsit_trial, n1=n1, n2=n2, n3=n3,
                     strategy=strategy, seed=seed, rel_tol=rel_tol)
    name = "eri-nocsit-conditional" if n3 else "eri-nocsit"
    return _aggregate(name, strategy, kernel, trials, seed, tol, workers,
                      "per-draw", min_fraction)


def check_joint_claim(n1, n2, n3, strategy, trials=1000, seed=0, tol=0,
                      workers=1, rel_tol=RANK_REL_TOL,
                      min_fraction=MIN_PASS_FRACTION):
    """Per draw: ``rank(Y1|Y2,Y3)/n1 <= rank(Y2|Y3)/n2``.

    Requires ``m >= n1 + n2 + n3``; receivers 2 and 3 are independent of
    ``X``, receiver 1 may feed CSIT.
    """
    if min(n1, n2, n3) < 1:
        raise InvalidParameterError("antenna counts must be positive")
    if strategy.m < n1 + n2 + n3:
        raise InvalidParameterError("need m >= n1 + n2 + n3")
    kernel = partial(_joint_trial, n1=n1, n2=n2, n3=n3, strategy=strategy,
                     seed=seed, rel_tol=rel_tol)
    return _aggregate("joint", strategy, kernel, trials, seed, tol, workers,
                      "per-draw", min_fraction)


def check_proposition1(config, strategy, trials=1000, seed=0, tol=0,
                       workers=1, rel_tol=RANK_REL_TOL,
                       min_fraction=MIN_PASS_FRACTION):
    """Per draw: ``rank(Y1) <= (n1/n_bar) rank(Y_max,1)`` where ``Y_max,1``
    is the first ``n_bar`` eavesdropper antennas."""
    if not config.m > max(config.n1, config.n_max):
        raise InvalidParameterError("need m > max(n1, n_max)")
    kernel = partial(_prop1_trial, config=config, strategy=strategy,
                     seed=seed, rel_tol=rel_tol)
    return _aggregate("proposition1", strategy, kernel, trials, seed, tol,
                      workers, "per-draw", min_fraction)


def check_proposition2(config, strategy, trials=1000, seed=0, tol=0,
                       workers=1, rel_tol=RANK_REL_TOL,
                       min_fraction=MIN_PASS_FRACTION):
    """Joint claim with ``(Y1, Y2, Y3)`` set to the first ``m_bar - n_max``
    legitimate antennas, the last ``n_max - n_bar`` and the first ``n_bar``
    antennas of the strongest eavesdropper."""
    if not config.n1 < config.n_max < config.m:
        raise InvalidParameterError("need n1 < n_max < m")
    kernel = partial(_prop2_trial, config=config, strategy=strategy,
                     seed=seed, rel_tol=rel_tol)
    return _aggregate("proposition2", strategy, kernel, trials, seed, tol,
                      workers, "per-draw", min_fraction)
