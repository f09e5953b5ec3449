"""Seeded experiment runners and machine-readable reports.

Every report is a plain dict. Everything that may legitimately differ
between two runs of the same configuration (worker count, wall-clock
timings) lives under the ``"runtime"`` key, so :func:`dumps_report` with
``include_runtime=False`` is byte-identical across runs and worker counts.
"""

import json
import time
from dataclasses import dataclass, fields
from fractions import Fraction
from functools import partial
from typing import Optional, Tuple

import numpy as np

from . import __version__
from .converse import (MIN_PASS_FRACTION, check_eri_delayed,
                       check_eri_nocsit, check_joint_claim,
                       check_least_alignment, check_proposition1,
                       check_proposition2, random_strategy, two_phase_strategy)
from .converse.aligned import DeterministicChannelSpec, check_alignment_bounds
from .encoder import TwoPhasePlan, encode_case_a, encode_two_phase
from .errors import DegenerateDrawError, InvalidParameterError
from .model import AntennaConfig, apply_channel, generate_channel, trial_rng
from .parallel import default_workers, run_trials
from .receiver import (RANK_REL_TOL, decode_case_a, decode_legitimate,
                       leakage_dof, normalized_mse, secrecy_rank_check)
from .sdof import compute_sdof

__all__ = [
    "SCHEMA_VERSION", "ExperimentConfig", "scheme_for", "run_simulate",
    "run_converse", "run_ais", "dumps_report", "strip_runtime",
    "LEMMAS", "STRATEGIES", "DEFAULT_CONVERSE_CONFIGS",
]

SCHEMA_VERSION = 1
MODES = ("noiseless", "noisy")
MAX_ATTEMPTS = 20
# exact-decode threshold relative to the symbol scale
DECODE_ATOL = 1e-6


@dataclass
class ExperimentConfig:
    """Configuration of a :func:`run_simulate` experiment.

    ``workers``, ``format`` and ``out`` only affect how the run is executed
    and written; they are excluded from the reproducible part of a report.
    """

    m: int
    n: Tuple[int, ...]
    trials: int = 100
    seed: int = 0
    p0: float = 1e6
    p1: float = 1e8
    slope_tol: float = 0.05
    rank_rel_tol: float = RANK_REL_TOL
    max_degenerate_rate: float = 1e-3
    mode: str = "noiseless"
    noisy_powers: Tuple[float, ...] = (1e2, 1e4, 1e6)
    workers: int = 1
    format: str = "json"
    out: Optional[str] = None
    schema_version: int = SCHEMA_VERSION

    RUNTIME_FIELDS = ("workers", "format", "out")

    def __post_init__(self):
        self.n = tuple(int(v) for v in self.n)
        self.noisy_powers = tuple(float(p) for p in self.noisy_powers)
        self.validate()

    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise InvalidParameterError(
                f"unsupported schema_version {self.schema_version}")
        self.antenna_config  # raises on bad antenna counts
        if not isinstance(self.trials, int) or self.trials < 0:
            raise InvalidParameterError("trials must be a non-negative integer")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InvalidParameterError("seed must be a non-negative integer")
        if not (self.p1 > self.p0 > 1):
            raise InvalidParameterError("need p1 > p0 > 1")
        for name in ("slope_tol", "rank_rel_tol", "max_degenerate_rate"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.mode not in MODES:
            raise InvalidParameterError(f"mode must be one of {MODES}")
        if any(p <= 0 for p in self.noisy_powers):
            raise InvalidParameterError("noisy powers must be positive")
        if not isinstance(self.workers, int) or self.workers < 0:
            raise InvalidParameterError("workers must be a non-negative integer")
        if self.format not in ("json", "csv"):
            raise InvalidParameterError("format must be json or csv")

    @property
    def antenna_config(self):
        return AntennaConfig(self.m, self.n)

    def to_dict(self, runtime=True):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["n"] = list(self.n)
        d["noisy_powers"] = list(self.noisy_powers)
        if not runtime:
            for k in self.RUNTIME_FIELDS:
                d.pop(k)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys {sorted(unknown)}")
        missing = {"m", "n"} - set(d)
        if missing:
            raise InvalidParameterError(f"missing config keys {sorted(missing)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidParameterError(str(exc)) from exc

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidParameterError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise InvalidParameterError("config must be a JSON object")
        return cls.from_dict(d)


def scheme_for(config):
    """``"single-slot"``, ``"two-phase"`` or ``"none"`` (zero SDoF)."""
    if config.m <= config.n_max:
        return "none"
    if config.m <= config.n1:
        return "single-slot"
    return "two-phase"


def _slopes(config, enc, real, cfg):
    receivers = [1] + config.eavesdroppers
    return [leakage_dof(config, enc, real, j, cfg.p0, cfg.p1).slope
            for j in receivers]


def _single_slot_attempt(config, cfg, rng):
    real = generate_channel(config, 1, rng=rng)
    enc = encode_case_a(config, 1.0, rng)
    y1 = apply_channel(real, enc.x)[0]
    v_hat = decode_case_a(config, y1, real, "noiseless", cfg.rank_rel_tol)
    err = float(np.max(np.abs(v_hat - enc.v)))
    out = {
        "decode_error": err,
        "decoded_symbols": int(enc.v.size),
        "slopes": _slopes(config, enc, real, cfg),
        "ranks": None,
        "symbols_per_slot": str(Fraction(enc.v.size, 1)),
    }
    if cfg.mode == "noisy":
        mse = []
        for p in cfg.noisy_powers:
            enc_p = encode_case_a(config, p, rng)
            y = apply_channel(real, enc_p.x, noise=True, rng=rng)[0]
            v_hat = decode_case_a(config, y, real, "noisy", cfg.rank_rel_tol)
            mse.append(normalized_mse(v_hat, enc_p.v, p / config.m))
        out["nmse"] = mse
    return out


def _two_phase_attempt(config, cfg, rng):
    plan = TwoPhasePlan.from_config(config)
    real = generate_channel(config, plan.block_length, rng=rng)
    enc = encode_two_phase(config, 1.0, real, rng)
    prec = enc.precoder
    ranks = []
    for j in [1] + config.eavesdroppers:
        rep = secrecy_rank_check(config, prec, real, j, cfg.rank_rel_tol)
        if rep.ambiguous:
            raise DegenerateDrawError(f"borderline rank at receiver {j}")
        ranks.append([rep.rank_noise, rep.rank_full, rep.holds])
    y1 = apply_channel(real, enc.x)[0]
    v_hat = decode_legitimate(config, y1, real, prec.scale, "noiseless",
                              cfg.rank_rel_tol)
    err = float(np.max(np.abs(v_hat - enc.v)))
    out = {
        "decode_error": err,
        "decoded_symbols": int(v_hat.size),
        "slopes": _slopes(config, enc, real, cfg),
        "ranks": ranks,
        "symbols_per_slot": str(enc.symbols_per_slot),
    }
    if cfg.mode == "noisy":
        mse = []
        for p in cfg.noisy_powers:
            enc_p = encode_two_phase(config, p, real, rng)
            y = apply_channel(real, enc_p.x, noise=True, rng=rng)[0]
            v_hat = decode_legitimate(config, y, real, enc_p.precoder.scale,
                                      "noisy", cfg.rank_rel_tol)
            mse.append(normalized_mse(v_hat, enc_p.v, p / plan.m_bar))
        out["nmse"] = mse
    return out


def _simulate_trial(i, cfg):
    """One trial, resampling degenerate draws with ``(seed, i, attempt)``."""
    config = cfg.antenna_config
    attempt_fn = (_single_slot_attempt if scheme_for(config) == "single-slot"
                  else _two_phase_attempt)
    for attempt in range(MAX_ATTEMPTS):
        rng = trial_rng(cfg.seed, i, attempt)
        try:
            out = attempt_fn(config, cfg, rng)
        except DegenerateDrawError:
            continue
        out["attempts"] = attempt + 1
        out["trial"] = i
        return out
    return {"attempts": MAX_ATTEMPTS, "trial": i, "failed": True}


def _mostly(failures, ok):
    # finite-power slopes: a rare near-singular draw is pre-asymptotic at
    # (p0, p1), so these checks use the per-draw 99% rule
    return len(failures) <= (1 - MIN_PASS_FRACTION) * len(ok)


def _check(name, passed, count, failures, **extra):
    d = {"check": name, "passed": bool(passed), "count": count,
         "failing_trial_seeds": failures[:50]}
    d.update(extra)
    return d


def _header(kind):
    return {"tool": "sdofsim", "version": __version__, "kind": kind}


def run_simulate(cfg: ExperimentConfig):
    """Encode, transmit and decode ``cfg.trials`` blocks and verify them.

    Checks: exact noiseless decoding, degenerate-draw rate, secrecy ranks
    (two-phase only), legitimate and eavesdropper leakage-DoF slopes and the
    symbols-per-slot rate against the closed-form SDoF.
    """
    t_start = time.perf_counter()
    config = cfg.antenna_config
    sdof = compute_sdof(config).value
    scheme = scheme_for(config)
    report = _header("simulate")
    report.update({"config": cfg.to_dict(runtime=False),
                   "sdof": str(sdof), "scheme": scheme})
    workers = cfg.workers or default_workers()
    if scheme == "none" or cfg.trials == 0:
        report.update({"checks": [], "statistics": {}, "passed": True,
                       "trials": cfg.trials})
        if scheme == "none":
            report["note"] = "m <= n_max: zero secure DoF, nothing to transmit"
        report["runtime"] = {"workers": workers,
                             "seconds": time.perf_counter() - t_start}
        return report

    results = run_trials(partial(_simulate_trial, cfg=cfg), cfg.trials, workers)

    if scheme == "single-slot":
        expected_legit = config.m - config.n_max
        expected_syms = expected_legit
        expected_rate = Fraction(expected_legit)
    else:
        plan = TwoPhasePlan.from_config(config)
        expected_legit = plan.v_length
        expected_syms = plan.v_length
        expected_rate = Fraction(plan.v_length, plan.block_length)

    def seed_of(r):
        return [cfg.seed, r["trial"], r["attempts"] - 1]

    ok = [r for r in results if not r.get("failed")]
    failed = [[cfg.seed, r["trial"]] for r in results if r.get("failed")]
    attempts = sum(r["attempts"] for r in results)
    degenerate = attempts - len(ok)
    degenerate_rate = degenerate / attempts

    decode_fail = [seed_of(r) for r in ok
                   if not (r["decode_error"] <= DECODE_ATOL
                           and r["decoded_symbols"] == expected_syms)]
    legit = np.array([r["slopes"][0] for r in ok])
    eve = np.array([r["slopes"][1:] for r in ok])
    legit_fail = [seed_of(r) for r in ok
                  if abs(r["slopes"][0] - expected_legit) > cfg.slope_tol]
    eve_fail = [seed_of(r) for r in ok
                if max(r["slopes"][1:]) > cfg.slope_tol]
    rate_fail = [seed_of(r) for r in ok
                 if Fraction(r["symbols_per_slot"]) != expected_rate]

    checks = [
        _check("noiseless-decode", not decode_fail and not failed, len(ok),
               decode_fail + failed, expected_symbols=expected_syms,
               max_error=max((r["decode_error"] for r in ok), default=0.0)),
        _check("degenerate-rate", degenerate_rate < cfg.max_degenerate_rate,
               attempts, [], degenerate=degenerate, rate=degenerate_rate),
        _check("legit-leakage-slope", _mostly(legit_fail, ok), len(ok),
               legit_fail, expected=expected_legit,
               all_within=not legit_fail,
               mean=float(legit.mean()) if ok else None),
        _check("eve-leakage-slope", _mostly(eve_fail, ok), len(ok), eve_fail,
               all_within=not eve_fail,
               max=float(eve.max()) if ok else None),
        _check("symbols-per-slot", not rate_fail, len(ok), rate_fail,
               expected=str(expected_rate), sdof=str(sdof),
               matches_sdof=expected_rate == sdof),
    ]
    if scheme == "two-phase":
        rank_fail = [seed_of(r) for r in ok if not all(h for *_, h in r["ranks"])]
        legit_dims = sorted({r["ranks"][0][1] - r["ranks"][0][0] for r in ok})
        checks.append(_check(
            "secrecy-ranks", not rank_fail, len(ok), rank_fail,
            decodable_dims=legit_dims, expected_decodable=expected_legit,
            eve_rank_equal=all(rf == rn for r in ok
                               for rn, rf, _ in r["ranks"][1:])))
    stats = {
        "legit_slope_mean": float(legit.mean()) if ok else None,
        "eve_slope_max": float(eve.max()) if ok else None,
    }
    if cfg.mode == "noisy" and ok:
        nmse = np.mean([r["nmse"] for r in ok], axis=0)
        stats["noisy_nmse"] = [{"p": p, "nmse": float(v)}
                               for p, v in zip(cfg.noisy_powers, nmse)]
    report.update({"trials": cfg.trials, "checks": checks,
                   "statistics": stats,
                   "passed": all(c["passed"] for c in checks)})
    report["runtime"] = {"workers": workers,
                         "seconds": time.perf_counter() - t_start}
    return report


LEMMAS = ("lal", "eri-delayed", "eri-nocsit", "eri-nocsit-cond", "joint",
          "prop1", "prop2")
STRATEGIES = ("random", "low-rank", "two-phase")
DEFAULT_CONVERSE_CONFIGS = {
    "lal": (4, (2, 3)),
    "eri-delayed": (4, (2, 3)),
    "eri-nocsit": (4, (3, 2)),
    "eri-nocsit-cond": (5, (3, 2, 1)),
    "joint": (4, (2, 1, 1)),
    "prop1": (4, (2, 3)),
    "prop2": (4, (2, 3)),
}


def _strategy(name, config):
    """Build a strategy on the horizon of the two-phase block of ``config``."""
    horizon = (TwoPhasePlan.from_config(config).block_length
               if config.m > max(config.n1, config.n_max) else 1)
    if name == "random":
        return random_strategy(config.m, horizon)
    if name == "low-rank":
        return random_strategy(config.m, horizon,
                               d=max(1, horizon * config.m // 2),
                               name="low-rank")
    if name == "two-phase":
        return two_phase_strategy(config)
    raise InvalidParameterError(f"unknown strategy {name!r}")


def _run_lemma(lemma, config, strategy, trials, seed, workers, rel_tol):
    n = config.n
    kw = dict(trials=trials, seed=seed, workers=workers, rel_tol=rel_tol)
    if lemma == "lal":
        return check_least_alignment(n[0], strategy, **kw)
    if lemma == "eri-delayed":
        return check_eri_delayed(n[0], n[1], strategy, **kw)
    if lemma in ("eri-nocsit", "eri-nocsit-cond"):
        hi, lo = max(n[0], n[1]), min(n[0], n[1])
        n3 = 0
        if lemma == "eri-nocsit-cond":
            n3 = n[2] if len(n) > 2 else 1
        return check_eri_nocsit(hi, lo, strategy, n3=n3, **kw)
    if lemma == "joint":
        if len(n) < 3:
            raise InvalidParameterError("joint check needs three antenna counts")
        return check_joint_claim(n[0], n[1], n[2], strategy, **kw)
    if lemma == "prop1":
        return check_proposition1(config, strategy, **kw)
    if lemma == "prop2":
        return check_proposition2(config, strategy, **kw)
    raise InvalidParameterError(f"unknown lemma {lemma!r}")


def run_converse(lemmas=("all",), strategies=("all",), m=None, n=None,
                 trials=1000, seed=0, workers=1, rel_tol=RANK_REL_TOL):
    """Run rank-analogue converse checks.

    ``m`` / ``n`` override the per-check default configuration
    (:data:`DEFAULT_CONVERSE_CONFIGS`). Each (check, strategy) pair gets its
    own master seed offset so runs are independent yet reproducible.
    """
    t_start = time.perf_counter()
    if isinstance(lemmas, str):
        lemmas = (lemmas,)
    if isinstance(strategies, str):
        strategies = (strategies,)
    lemmas = LEMMAS if "all" in lemmas else tuple(lemmas)
    strategies = STRATEGIES if "all" in strategies else tuple(strategies)
    for lem in lemmas:
        if lem not in LEMMAS:
            raise InvalidParameterError(f"unknown lemma {lem!r}")
    for s in strategies:
        if s not in STRATEGIES:
            raise InvalidParameterError(f"unknown strategy {s!r}")
    if not isinstance(trials, int) or trials < 0:
        raise InvalidParameterError("trials must be a non-negative integer")
    workers = workers or default_workers()
    checks = []
    for li, lem in enumerate(lemmas):
        dm, dn = DEFAULT_CONVERSE_CONFIGS[lem]
        config = AntennaConfig(m or dm, tuple(n) if n else dn)
        for si, sname in enumerate(strategies):
            strategy = _strategy(sname, config)
            rep = _run_lemma(lem, config, strategy, trials,
                             seed * 1000 + li * 10 + si, workers, rel_tol)
            d = rep.as_dict()
            d.update({"lemma": lem, "config": config.as_dict()})
            checks.append(d)
    report = _header("converse")
    report.update({"trials": trials, "seed": seed, "checks": checks,
                   "passed": all(c["passed"] for c in checks)})
    report["runtime"] = {"workers": workers,
                         "seconds": time.perf_counter() - t_start}
    return report


def run_ais(p, m=1, grid_size=8, samples=None, d_max=Fraction(2), n=1, n0=1,
            seed=0):
    """Aligned-image-set bound check as a report dict."""
    t_start = time.perf_counter()
    spec = DeterministicChannelSpec(p=p, m=m, n0=n0, n=n, grid_size=grid_size,
                                    d_max=Fraction(d_max))
    rep = check_alignment_bounds(spec, samples=samples, seed=seed)
    report = _header("ais")
    report.update(rep.as_dict())
    report["runtime"] = {"workers": 1, "seconds": time.perf_counter() - t_start}
    return report


def strip_runtime(report):
    return {k: v for k, v in report.items() if k != "runtime"}


def dumps_report(report, include_runtime=True):
    """Canonical JSON: sorted keys, fixed indentation."""
    if not include_runtime:
        report = strip_runtime(report)
    return json.dumps(report, sort_keys=True, indent=2)
