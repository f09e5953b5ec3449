"""Exact secure-DoF formulas and the two comparison tables.

Everything here works in :class:`fractions.Fraction`; no floating point.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional

from .errors import NotApplicableError
from .model import AntennaConfig

__all__ = [
    "SdofResult", "FormulaCell", "REGIME_LOW", "REGIME_HIGH",
    "as_config", "compute_sdof", "compute_prior_achievable",
    "prior_achievable_row", "compute_reference_sdof", "comparison_table",
    "table1", "table2", "TABLE1_EXAMPLES", "TABLE2_REGIMES",
    "table2_regime_index",
]

REGIME_LOW = "m <= max(n1, n_max)"
REGIME_HIGH = "m > max(n1, n_max)"


def as_config(config):
    """Accept an AntennaConfig or an ``(m, n1, n_max)`` triple."""
    if isinstance(config, AntennaConfig):
        return config
    m, n1, n_max = config
    return AntennaConfig.from_triplet(m, n1, n_max)


def _pos(x):
    return max(x, 0)


@dataclass(frozen=True)
class SdofResult:
    value: Fraction
    regime: str
    m_bar: int
    n_bar: int

    def __float__(self):
        return float(self.value)


def compute_sdof(config) -> SdofResult:
    """Secure DoF of the blind wiretap channel with delayed legitimate CSIT.

    >>> compute_sdof((4, 2, 3)).value
    Fraction(2, 3)
    """
    cfg = as_config(config)
    m, n1, n_max = cfg.m, cfg.n1, cfg.n_max
    m_bar, n_bar = cfg.m_bar, cfg.n_bar
    if m <= max(n1, n_max):
        return SdofResult(Fraction(_pos(m - n_max)), REGIME_LOW, m_bar, n_bar)
    value = Fraction(n1 * (m_bar - n_max), m_bar - n_max + n_bar)
    return SdofResult(value, REGIME_HIGH, m_bar, n_bar)


def prior_achievable_row(config):
    """Which row (1 or 2) of the achievability table the config belongs to.

    Raises
    ------
    NotApplicableError
        If the configuration lies outside both rows.
    """
    cfg = as_config(config)
    m, n1, n_max = cfg.m, cfg.n1, cfg.n_max
    if n1 <= n_max < m <= n1 + n_max:
        return 1
    if n1 <= n_max and m > n1 + n_max:
        return 2
    raise NotApplicableError(
        f"(m={m}, n1={n1}, n_max={n_max}) is outside both table rows")


def compute_prior_achievable(config) -> Fraction:
    """Previously known achievable SDoF for the two improved regimes."""
    cfg = as_config(config)
    m, n1, n_max = cfg.m, cfg.n1, cfg.n_max
    if prior_achievable_row(cfg) == 1:
        return Fraction(n1 * (m - n_max), m)
    return Fraction(n1 * n1, n1 + n_max)


def compute_reference_sdof(config) -> Fraction:
    """SDoF when the eavesdroppers also feed back delayed CSIT."""
    cfg = as_config(config)
    m, n1, n_max = cfg.m, cfg.n1, cfg.n_max
    if m <= max(n1, n_max):
        return Fraction(_pos(m - n_max))
    if m <= n1 + n_max:
        return Fraction(n1 * m * (m - n_max), n1 * n_max + m * (m - n_max))
    return Fraction(n1 * (n1 + n_max), n1 + 2 * n_max)


def comparison_table(configs) -> List[dict]:
    """One row per configuration with all three SDoF values.

    ``prior`` is ``None`` for configurations outside the achievability table.
    """
    rows = []
    for c in configs:
        cfg = as_config(c)
        try:
            prior: Optional[Fraction] = compute_prior_achievable(cfg)
        except NotApplicableError:
            prior = None
        blind = compute_sdof(cfg)
        rows.append({
            "m": cfg.m, "n1": cfg.n1, "n_max": cfg.n_max,
            "regime": blind.regime,
            "blind_sdof": blind.value,
            "prior_achievable": prior,
            "delayed_eve_sdof": compute_reference_sdof(cfg),
        })
    return rows


@dataclass(frozen=True)
class FormulaCell:
    """A symbolic table cell together with an exact evaluator."""

    text: str
    evaluate: Callable[[int, int, int], Fraction]

    def __call__(self, m, n1, n_max):
        return Fraction(self.evaluate(m, n1, n_max))


# (m, n1, n_max) examples printed in the achievability table
TABLE1_EXAMPLES = ((4, 2, 3), (3, 1, 2))


def table1():
    """Rows of the achievability comparison table."""
    return [
        {
            "configuration": "n1 <= n_max < m <= n1+n_max",
            "example": TABLE1_EXAMPLES[0],
            "prior": FormulaCell("n1*(m-n_max)/m",
                                 lambda m, a, e: Fraction(a * (m - e), m)),
            "sdof": FormulaCell("n1*(m-n_max)/(m-n_max+n1)",
                                lambda m, a, e: Fraction(a * (m - e), m - e + a)),
        },
        {
            "configuration": "n1 <= n_max, m > n1+n_max",
            "example": TABLE1_EXAMPLES[1],
            "prior": FormulaCell("n1^2/(n1+n_max)",
                                 lambda m, a, e: Fraction(a * a, a + e)),
            "sdof": FormulaCell("n1/2", lambda m, a, e: Fraction(a, 2)),
        },
    ]


TABLE2_REGIMES = (
    "m <= max(n1,n_max)",
    "max(n1,n_max) < m <= n1+n_max",
    "m > n1+n_max",
)


def table2():
    """Rows of the network comparison table, one cell per regime."""
    return [
        {
            "network": "MIMOME WTP with delayed CSIT",
            "cells": (
                FormulaCell("[m-n_max]^+", lambda m, a, e: _pos(m - e)),
                FormulaCell("n1*m*(m-n_max)/(n1*n_max+m*(m-n_max))",
                            lambda m, a, e: Fraction(a * m * (m - e),
                                                     a * e + m * (m - e))),
                FormulaCell("n1*(n1+n_max)/(n1+2*n_max)",
                            lambda m, a, e: Fraction(a * (a + e), a + 2 * e)),
            ),
        },
        {
            "network": "Blind MIMOME WTP with delayed CSIT",
            "cells": (
                FormulaCell("[m-n_max]^+", lambda m, a, e: _pos(m - e)),
                FormulaCell("n1*(m-n_max)/(m-n_max+min(n1,n_max))",
                            lambda m, a, e: Fraction(a * (m - e),
                                                     m - e + min(a, e))),
                FormulaCell("n1^2/(n1+min(n1,n_max))",
                            lambda m, a, e: Fraction(a * a, a + min(a, e))),
            ),
        },
    ]


def table2_regime_index(config):
    """Column (0, 1, 2) of the network comparison table for ``config``."""
    cfg = as_config(config)
    m, n1, n_max = cfg.m, cfg.n1, cfg.n_max
    if m <= max(n1, n_max):
        return 0
    if m <= n1 + n_max:
        return 1
    return 2
