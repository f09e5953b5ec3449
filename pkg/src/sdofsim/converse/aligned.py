"""Exhaustive aligned-image-set enumeration for the deterministic channel.

Inputs are integers in ``{0, ..., ceil(sqrt(p))}``; a receive antenna outputs
``sum_i floor(g_i * x_i)``. Channel coefficients live on a uniform rational
grid of midpoints in ``[-d_max, d_max]``. All arithmetic is exact (ints and
Fractions).

Given the legitimate channel ``G1``, the map ``L0`` sends each reachable
legitimate output sequence to its lexicographically smallest preimage in the
codebook. The aligned image set of ``v`` under ``(G1, G2)`` collects every
legitimate output whose image at receiver 2 equals ``v``.
"""

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import InvalidParameterError, TooLargeError

__all__ = [
    "DeterministicChannelSpec", "AlignedImageSetReport", "ceil_sqrt",
    "deterministic_output", "build_l0", "enumerate_aligned_image_set",
    "probability_bound", "average_size_bound", "check_alignment_bounds",
]

MAX_STATES = 10 ** 6


def ceil_sqrt(p):
    r = math.isqrt(p)
    return r if r * r == p else r + 1


@dataclass(frozen=True)
class DeterministicChannelSpec:
    """Tiny deterministic model for exhaustive search.

    Parameters
    ----------
    p : int
        Power parameter; inputs range over ``0..ceil(sqrt(p))``.
    m, n0, n : int
        Transmit antennas, receive antennas per receiver, slots.
    grid_size : int
        Number of grid points for every channel coefficient.
    d_max : Fraction
        Half-width of the coefficient grid.
    codebook : tuple of tuples, optional
        Allowed input sequences (each of length ``n * m``, slot-major).
        Defaults to every sequence over the alphabet.
    """

    p: int
    m: int = 1
    n0: int = 1
    n: int = 1
    grid_size: int = 8
    d_max: Fraction = Fraction(2)
    codebook: Optional[Tuple[Tuple[int, ...], ...]] = None
    max_states: int = MAX_STATES

    def __post_init__(self):
        for name in ("p", "m", "n0", "n", "grid_size"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise InvalidParameterError(f"{name} must be a positive integer")
        object.__setattr__(self, "d_max", Fraction(self.d_max))
        if self.d_max <= 0:
            raise InvalidParameterError("d_max must be positive")
        if self.state_space > self.max_states:
            raise TooLargeError(
                f"input space {self.state_space} exceeds {self.max_states}",
                self.state_space, self.max_states)
        if self.codebook is not None:
            cb = tuple(tuple(int(c) for c in x) for x in self.codebook)
            for x in cb:
                if len(x) != self.n * self.m or not all(
                        0 <= c <= self.alphabet_max for c in x):
                    raise InvalidParameterError(f"codeword {x} not in alphabet")
            object.__setattr__(self, "codebook", cb)

    @property
    def alphabet_max(self):
        return ceil_sqrt(self.p)

    @property
    def alphabet_size(self):
        return self.alphabet_max + 1

    @property
    def state_space(self):
        return self.alphabet_size ** (self.m * self.n)

    @property
    def grid(self):
        d, G = self.d_max, self.grid_size
        return tuple(-d + Fraction(2 * k + 1, G) * d for k in range(G))

    @property
    def f_max(self):
        return Fraction(self.grid_size) / (2 * self.d_max)

    @property
    def coefficients(self):
        """Channel coefficients per receiver over the horizon."""
        return self.n * self.n0 * self.m

    @property
    def channel_space(self):
        return self.grid_size ** self.coefficients

    def codewords(self):
        if self.codebook is not None:
            return sorted(set(self.codebook))
        return list(itertools.product(range(self.alphabet_size),
                                      repeat=self.n * self.m))

    def as_dict(self):
        return {"p": self.p, "m": self.m, "n0": self.n0, "n": self.n,
                "grid_size": self.grid_size, "d_max": str(self.d_max),
                "f_max": str(self.f_max), "alphabet_size": self.alphabet_size,
                "codebook": None if self.codebook is None
                else [list(c) for c in self.codebook]}


def deterministic_output(xbar, G, alphabet_max=None):
    """Exact outputs ``sum_i floor(g_{j,i}(t) * x_i(t))``.

    Parameters
    ----------
    xbar : array_like of int, shape ``(n, m)`` or ``(m,)``
    G : array_like, shape ``(n, n0, m)`` or ``(n0, m)``
        Coefficients; floats are converted exactly to Fractions.
    alphabet_max : int, optional
        Reject inputs outside ``0..alphabet_max``.

    Returns
    -------
    tuple of tuples of int, ``(n, n0)``
    """
    x = np.asarray(xbar, dtype=object)
    g = np.asarray(G, dtype=object)
    if x.ndim == 1:
        x, g = x[None, :], g[None, :, :]
    if x.ndim != 2 or g.ndim != 3 or g.shape[0] != x.shape[0] \
            or g.shape[2] != x.shape[1]:
        raise InvalidParameterError("input and channel shapes do not match")
    for c in x.ravel():
        if int(c) != c or c < 0 or (alphabet_max is not None
                                    and c > alphabet_max):
            raise InvalidParameterError(f"input {c} outside the alphabet")
    out = []
    for t in range(x.shape[0]):
        row = []
        for j in range(g.shape[1]):
            row.append(sum(math.floor(Fraction(g[t, j, i]) * int(x[t, i]))
                           for i in range(x.shape[1])))
        out.append(tuple(row))
    return tuple(out)


class _FloorTable:
    """``floor(grid[k] * x)`` for every grid index and alphabet value."""

    def __init__(self, spec):
        self.spec = spec
        self.table = [[math.floor(g * x) for x in range(spec.alphabet_size)]
                      for g in spec.grid]

    def output(self, xseq, gidx):
        """Output sequence (flat, slot-major then antenna) for index tuple."""
        s = self.spec
        m, n0 = s.m, s.n0
        out = []
        for t in range(s.n):
            xs = xseq[t * m:(t + 1) * m]
            base = t * n0 * m
            for j in range(n0):
                row = gidx[base + j * m: base + (j + 1) * m]
                out.append(sum(self.table[row[i]][xs[i]] for i in range(m)))
        return tuple(out)


def _values(spec, gidx):
    grid = spec.grid
    return np.array([grid[k] for k in gidx], dtype=object).reshape(
        spec.n, spec.n0, spec.m)


def build_l0(spec, g1idx, table=None):
    """Deterministic map from reachable legitimate outputs to inputs.

    Each output is mapped to its lexicographically smallest preimage.
    """
    table = table or _FloorTable(spec)
    l0: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    for x in spec.codewords():
        l0.setdefault(table.output(x, g1idx), x)
    return l0


def enumerate_aligned_image_set(spec, v, g1idx, g2idx, l0=None, table=None):
    """All legitimate outputs whose receiver-2 image under ``L0`` is ``v``.

    ``g1idx`` / ``g2idx`` are tuples of grid indices of length
    ``n * n0 * m``; ``v`` is a flat output tuple of length ``n * n0``.
    """
    if spec.state_space > spec.max_states:
        raise TooLargeError("input space too large", spec.state_space,
                            spec.max_states)
    table = table or _FloorTable(spec)
    l0 = build_l0(spec, g1idx, table) if l0 is None else l0
    v = tuple(v)
    return frozenset(y1 for y1, x in l0.items()
                     if table.output(x, g2idx) == v)


def probability_bound(spec, y1):
    """Per-output alignment-probability bound (no dependence on ``G1``)."""
    m = spec.m
    head = max(Fraction(1), spec.f_max * m * spec.d_max) ** (spec.n * spec.n0)
    tail = Fraction(1)
    for y in y1:
        tail /= max(1, abs(y) - m)
    return head * tail


def _tight_probability_bound(spec, y1, g1idx):
    # intermediate form that still uses the actual |g_1| row sums
    grid, m = spec.grid, spec.m
    out = Fraction(1)
    for r, y in enumerate(y1):
        row = g1idx[r * m:(r + 1) * m]
        out *= max(Fraction(1), spec.f_max * sum(abs(grid[k]) for k in row))
        out /= max(1, abs(y) - m)
    return out


def average_size_bound(spec):
    """Bounds on the expected aligned-image-set size.

    Returns ``(rigorous, headline, slack)``: ``rigorous`` is the exact
    rational bound obtained by summing ``1 / max(1, |y| - m)`` over every
    integer ``|y| <= q`` with ``q = m d_max sqrt(p) + m``; ``headline`` is
    ``max(1, f_max m d_max)^(n n0) (log sqrt p)^(n n0)`` and ``slack`` the
    lower-order remainder, ``rigorous - headline``.
    """
    m, e = spec.m, spec.n * spec.n0
    lead = max(Fraction(1), spec.f_max * m * spec.d_max) ** e
    md2p = (m * spec.d_max) ** 2 * spec.p
    q_floor = math.isqrt(md2p.numerator // md2p.denominator) + m
    per_antenna = Fraction(2 * m + 1) + 2 * sum(
        Fraction(1, k) for k in range(1, q_floor - m + 1))
    rigorous = lead * per_antenna ** e
    headline = float(lead) * math.log(math.sqrt(spec.p)) ** e
    return rigorous, headline, float(rigorous) - headline


@dataclass
class AlignedImageSetReport:
    spec: DeterministicChannelSpec
    g1_instances: int = 0
    g2_instances: int = 0
    prob_checks: int = 0
    prob_violations: int = 0
    tight_prob_violations: int = 0
    max_prob_ratio: Fraction = Fraction(0)
    expected_sizes: Dict[Tuple[int, ...], Fraction] = field(default_factory=dict)
    size_bound: Fraction = Fraction(0)
    headline_bound: float = 0.0
    slack: float = 0.0
    members_verified: int = 0
    partition_ok: bool = True
    exhaustive_g1: bool = True

    @property
    def max_expected_size(self):
        return max(self.expected_sizes.values(), default=Fraction(0))

    @property
    def size_ok(self):
        return self.max_expected_size <= self.size_bound

    @property
    def passed(self):
        return (self.prob_violations == 0 and self.size_ok
                and self.partition_ok)

    def as_dict(self):
        return {
            "spec": self.spec.as_dict(),
            "alphabet_size": self.spec.alphabet_size,
            "g1_instances": self.g1_instances,
            "g2_instances": self.g2_instances,
            "exhaustive_g1": self.exhaustive_g1,
            "probability": {
                "checks": self.prob_checks,
                "violations": self.prob_violations,
                "tight_violations": self.tight_prob_violations,
                "max_ratio": str(self.max_prob_ratio),
            },
            "average_size": {
                "max_expected": str(self.max_expected_size),
                "max_expected_float": float(self.max_expected_size),
                "bound": str(self.size_bound),
                "bound_float": float(self.size_bound),
                "headline": self.headline_bound,
                "slack": self.slack,
                "per_output": {",".join(map(str, k)): str(v) for k, v in
                               sorted(self.expected_sizes.items())},
            },
            "members_verified": self.members_verified,
            "partition_ok": self.partition_ok,
            "passed": self.passed,
        }


def _g1_instances(spec, samples, seed):
    total = spec.channel_space
    if samples is None or total <= samples:
        return list(itertools.product(range(spec.grid_size),
                                      repeat=spec.coefficients)), True
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, spec.grid_size, size=(samples, spec.coefficients))
    return [tuple(int(k) for k in row) for row in draws], False


def check_alignment_bounds(spec, samples=None, seed=0):
    """Exhaustively verify the alignment probability and average-size bounds.

    Legitimate channels are enumerated (or ``samples`` of them drawn when the
    grid space is larger); receiver-2 channels are always enumerated in
    full, so every probability is exact.
    """
    if spec.channel_space > spec.max_states:
        raise TooLargeError("receiver-2 channel space too large",
                            spec.channel_space, spec.max_states)
    table = _FloorTable(spec)
    g1_list, exhaustive = _g1_instances(spec, samples, seed)
    g2_list = list(itertools.product(range(spec.grid_size),
                                     repeat=spec.coefficients))
    rigorous, headline, slack = average_size_bound(spec)
    rep = AlignedImageSetReport(spec, len(g1_list), len(g2_list),
                                size_bound=rigorous, headline_bound=headline,
                                slack=slack, exhaustive_g1=exhaustive)
    size_sums = Counter()
    n_g2 = len(g2_list)
    for g1 in g1_list:
        l0 = build_l0(spec, g1, table)
        hits = {y1: Counter() for y1 in l0}
        g1_vals = None
        for g2 in g2_list:
            sets = defaultdict(set)
            for y1, x in l0.items():
                v = table.output(x, g2)
                sets[v].add(y1)
                hits[y1][v] += 1
            members = set()
            for v, s in sets.items():
                size_sums[v] += len(s)
                if members & s:
                    rep.partition_ok = False
                members |= s
            if members != set(l0):
                rep.partition_ok = False
            # re-verify a sample of memberships with exact Fraction arithmetic
            if g2 == g2_list[0]:
                g1_vals = g1_vals or _values(spec, g1)
                g2_vals = _values(spec, g2)
                for v, s in sets.items():
                    for y1 in s:
                        x = np.array(l0[y1]).reshape(spec.n, spec.m)
                        y2 = sum(deterministic_output(x, g2_vals,
                                                      spec.alphabet_max), ())
                        y1_chk = sum(deterministic_output(x, g1_vals,
                                                          spec.alphabet_max), ())
                        if tuple(y2) != v or tuple(y1_chk) != y1:
                            rep.partition_ok = False
                        rep.members_verified += 1
        for y1, counter in hits.items():
            prob = Fraction(max(counter.values()), n_g2)
            bound = probability_bound(spec, y1)
            rep.prob_checks += 1
            rep.max_prob_ratio = max(rep.max_prob_ratio, prob / bound)
            if prob > bound:
                rep.prob_violations += 1
            if prob > _tight_probability_bound(spec, y1, g1):
                rep.tight_prob_violations += 1
    n_pairs = len(g1_list) * n_g2
    rep.expected_sizes = {v: Fraction(c, n_pairs) for v, c in size_sums.items()}
    return rep
