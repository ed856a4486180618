"""Prediction strategies and the payoff engine.

A prediction is committed per position before any bit inside the target
interval is revealed; the payoff is +1 per correct bit and -1 per wrong bit.
Adaptivity is allowed only in *when to stop*: a plan may carry a stop rule
on its running payoff, which is how the inversion bettor detects
opposite-direction excursions.  The weighted-majority scheme hedges between
the two constant experts and tracks the best of them to within
``sqrt(2 T ln 2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ConfigurationError
from .seeding import make_rng
from .sequences import BitSequence, IntSequence, Interval

__all__ = [
    "StopCause",
    "StopRule",
    "PredictionPlan",
    "PayoffLedger",
    "run_plan",
    "constant_plan",
    "sign_of_prefix_plan",
    "weighted_majority_rate",
    "weighted_majority_run",
    "weighted_majority_expected_payoff",
    "weighted_majority_guarantee",
    "block_momentum_payoff",
    "adaptive_inversion_bettor",
]


class StopCause(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class StopRule:
    """Stop betting once the running payoff reaches either limit."""

    lower_limit: int
    upper_limit: int

    def __post_init__(self) -> None:
        if not (self.lower_limit < 0 < self.upper_limit):
            raise ConfigurationError(
                f"stop rule needs lower_limit < 0 < upper_limit, got ({self.lower_limit}, {self.upper_limit})"
            )


@dataclass(frozen=True)
class PredictionPlan:
    """Per-position predictions over an interval, fixed before the interval is read."""

    interval: Interval
    per_position: np.ndarray
    stop_rule: StopRule | None = None

    def __post_init__(self) -> None:
        pp = np.asarray(self.per_position, dtype=np.int8)
        if pp.shape != (len(self.interval),):
            raise ConfigurationError(
                f"per_position must have length {len(self.interval)}, got shape {pp.shape}"
            )
        if not np.all(np.abs(pp) == 1):
            raise ConfigurationError("predictions must be +1 or -1")
        pp.setflags(write=False)
        object.__setattr__(self, "per_position", pp)


@dataclass(frozen=True)
class PayoffLedger:
    payoff: int
    steps_used: int
    stopped_early: bool
    stop_cause: StopCause

    def __post_init__(self) -> None:
        assert abs(self.payoff) <= self.steps_used
        assert not (self.stopped_early and self.stop_cause is StopCause.EXHAUSTED)


def run_plan(seq: BitSequence | IntSequence, plan: PredictionPlan) -> PayoffLedger:
    """Execute a plan: running payoff halts at the first stop-rule hit."""
    iv = plan.interval
    if iv.total_len != len(seq.values) or iv.hi > len(seq.values):
        raise IndexError(f"plan interval {iv} does not fit a sequence of length {len(seq.values)}")
    gains = plan.per_position.astype(np.int64) * seq.values[iv.lo : iv.hi]
    running = np.cumsum(gains)
    if plan.stop_rule is not None:
        rule = plan.stop_rule
        hits = np.flatnonzero((running <= rule.lower_limit) | (running >= rule.upper_limit))
        if hits.size:
            t = int(hits[0])
            cause = StopCause.LOWER if running[t] <= rule.lower_limit else StopCause.UPPER
            return PayoffLedger(int(running[t]), t + 1, True, cause)
    total = int(running[-1]) if running.size else 0
    return PayoffLedger(total, len(iv), False, StopCause.EXHAUSTED)


def constant_plan(value: int, interval: Interval, stop_rule: StopRule | None = None) -> PredictionPlan:
    if value not in (-1, 1):
        raise ConfigurationError(f"constant prediction must be +1 or -1, got {value}")
    return PredictionPlan(interval, np.full(len(interval), value, dtype=np.int8), stop_rule)


def sign_of_prefix_plan(history: BitSequence, window: int, target: Interval) -> PredictionPlan:
    """Constant plan betting the sign of the height of the ``window`` bits before ``target``.

    A zero prefix height bets +1; any fixed tie rule is payoff-neutral on
    sign-symmetric distributions, and a deterministic one keeps runs replayable.
    Only history strictly before ``target.lo`` is consulted.
    """
    if window < 1:
        raise ConfigurationError(f"window must be positive, got {window}")
    if target.lo < window:
        raise ConfigurationError(f"target needs {window} bits of history, has {target.lo}")
    h = history.height(Interval(target.lo - window, target.lo, history.prefix.shape[0] - 1))
    return constant_plan(1 if h >= 0 else -1, target)


# ---------------------------------------------------------------------------
# Weighted majority over the two constant experts


def weighted_majority_rate(total_len: int) -> float:
    """Learning rate ``sqrt(8 ln 2 / T)``, tuned for a two-expert horizon of ``T``."""
    if total_len < 1:
        raise ConfigurationError("total_len must be positive")
    return math.sqrt(8.0 * math.log(2.0) / total_len)


def weighted_majority_guarantee(total_len: int) -> float:
    """The scheme's additive payoff slack: ``sqrt(2 T ln 2)``."""
    return math.sqrt(2.0 * total_len * math.log(2.0))


def _plus_probabilities(seq: BitSequence) -> np.ndarray:
    """P(predict +1) before each position: logistic in the running height."""
    T = len(seq.values)
    eta = weighted_majority_rate(T)
    heights_before = seq.prefix[:-1].astype(np.float64)
    return expit(eta * heights_before)


def weighted_majority_run(
    seq: BitSequence, rng: int | np.random.Generator | None = None
) -> int:
    """One randomized pass; each bit is predicted +1 with the current weight fraction."""
    rng = make_rng(rng)
    p_plus = _plus_probabilities(seq)
    preds = np.where(rng.random(p_plus.shape) < p_plus, 1, -1).astype(np.int64)
    return int(np.sum(preds * seq.values))


def weighted_majority_expected_payoff(seq: BitSequence) -> float:
    """Exact mean payoff over the scheme's internal randomness.

    Per position the expected gain is ``x_t * (2 p_t - 1)`` with
    ``p_t = sigma(eta * H_{t-1})``, so the whole sum collapses to
    ``sum x_t * tanh(eta * H_{t-1} / 2)``; always at least
    ``|h(seq)| - weighted_majority_guarantee(T)``.
    """
    T = len(seq.values)
    eta = weighted_majority_rate(T)
    heights_before = seq.prefix[:-1].astype(np.float64)
    return float(np.sum(seq.values * np.tanh(0.5 * eta * heights_before)))


def block_momentum_payoff(seq: BitSequence, block_len: int) -> int:
    """Payoff of betting each block with the sign of the previous block's height.

    Zero previous height bets +1.  The first block is skipped (no history).
    """
    T = len(seq.values)
    if block_len < 1 or T % block_len != 0:
        raise ConfigurationError(f"block_len must divide the sequence length, got {block_len} for {T}")
    blocks = seq.values.reshape(T // block_len, block_len).sum(axis=1, dtype=np.int64)
    bets = np.where(blocks[:-1] >= 0, 1, -1)
    return int(np.sum(bets * blocks[1:]))


def adaptive_inversion_bettor(
    seq: BitSequence | IntSequence, target: Interval, theta: int, alpha: float
) -> PayoffLedger:
    """Bet +1 throughout ``target``, stopping at payoff -ceil(alpha*theta) or
    +ceil(2*alpha*theta); a LOWER stop certifies an opposite-direction excursion
    of relative size ``alpha`` against a height-``theta`` climb."""
    if 2.0 * alpha * theta < 1.0:
        raise ConfigurationError(
            f"limits degenerate: need 2*alpha*theta >= 1, got alpha={alpha}, theta={theta}"
        )
    rule = StopRule(-math.ceil(alpha * theta), math.ceil(2.0 * alpha * theta))
    return run_plan(seq, constant_plan(1, target, rule))
