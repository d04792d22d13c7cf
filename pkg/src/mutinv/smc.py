"""Statistical checking of a learned invariant: Wald's SPRT and a Hoeffding estimate."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .learner import LinearInvariant
from .pipeline import Trace, extract_features

ACCEPT_H0 = "accept_H0"  # p >= theta + delta: the invariant holds
ACCEPT_H1 = "accept_H1"  # p <= theta - delta
UNDECIDED = "undecided"

DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class SatisfactionSample:
    run_id: str
    satisfied: np.ndarray  # one bool per feature vector
    rate: float

    @property
    def all_satisfied(self) -> bool:
        return bool(self.satisfied.all())


def check_invariant(inv: LinearInvariant, t: Trace, run_id: str | None = None) -> SatisfactionSample:
    flags = inv.satisfied_many(extract_features(t, 1).X)
    return SatisfactionSample(run_id or f"{t.label}/{t.init_id}", flags, float(flags.mean()))


@dataclass(frozen=True)
class SprtConfig:
    theta: float = 0.98
    delta: float = 0.01
    alpha: float = 0.05
    beta: float = 0.05

    def __post_init__(self):
        if not 0 < self.theta - self.delta < self.theta + self.delta < 1:
            raise ValueError("need 0 < theta - delta < theta + delta < 1")
        if not (0 < self.alpha < 1 and 0 < self.beta < 1):
            raise ValueError("alpha and beta must lie in (0, 1)")

    @property
    def p_hi(self) -> float:
        return self.theta + self.delta

    @property
    def p_lo(self) -> float:
        return self.theta - self.delta

    @property
    def upper(self) -> float:
        """Log-ratio at or above which H0 is accepted."""
        return math.log((1 - self.beta) / self.alpha)

    @property
    def lower(self) -> float:
        return math.log(self.beta / (1 - self.alpha))


@dataclass(frozen=True)
class SprtVerdict:
    decision: str
    samples: int
    log_ratio: float
    successes: int
    budget: int

    @property
    def p_hat(self) -> float:
        return self.successes / self.samples if self.samples else float("nan")


def sprt(source: Iterable[bool], cfg: SprtConfig = SprtConfig(), budget: int = DEFAULT_BUDGET) -> SprtVerdict:
    """Wald's sequential test of ``p >= theta + delta`` against ``p <= theta - delta``.

    The log-likelihood ratio of the high over the low hypothesis gains
    ``log(p_hi / p_lo)`` per success and ``log((1 - p_hi) / (1 - p_lo))``
    per failure.  Running out of budget or of samples gives ``undecided``.
    """
    inc_true = math.log(cfg.p_hi / cfg.p_lo)
    inc_false = math.log((1 - cfg.p_hi) / (1 - cfg.p_lo))
    upper, lower = cfg.upper, cfg.lower
    llr = 0.0
    n = succ = 0
    for sample in source:
        if n >= budget:
            break
        n += 1
        if sample:
            succ += 1
            llr += inc_true
        else:
            llr += inc_false
        if llr >= upper:
            return SprtVerdict(ACCEPT_H0, n, llr, succ, budget)
        if llr <= lower:
            return SprtVerdict(ACCEPT_H1, n, llr, succ, budget)
    return SprtVerdict(UNDECIDED, n, llr, succ, budget)


def chernoff_sample_size(epsilon: float, delta: float) -> int:
    """Samples needed so that ``P(|p_hat - p| > epsilon) <= delta`` (two-sided Hoeffding)."""
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise ValueError("epsilon and delta must lie in (0, 1)")
    return math.ceil(math.log(2 / delta) / (2 * epsilon**2))


def chernoff_estimate(source: Iterable[bool], epsilon: float, delta: float) -> tuple[float, int]:
    n = chernoff_sample_size(epsilon, delta)
    hits = 0
    drawn = 0
    for sample in source:
        hits += bool(sample)
        drawn += 1
        if drawn == n:
            return hits / n, n
    raise ValueError(f"sample source ran dry after {drawn} of {n} samples")


def bernoulli_source(p: float, seed: int) -> Iterator[bool]:
    rng = random.Random(seed)
    while True:
        yield rng.random() < p


def vector_samples(samples: Iterable[SatisfactionSample]) -> Iterator[bool]:
    """Per-tick granularity: every feature vector of every run, run by run."""
    for s in samples:
        for flag in s.satisfied:
            yield bool(flag)


def run_samples(samples: Iterable[SatisfactionSample]) -> Iterator[bool]:
    """Per-run granularity: a run counts as satisfied only if every vector is."""
    for s in samples:
        yield s.all_satisfied
