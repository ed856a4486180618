"""Estimators and exact small-instance oracles for sequence statistics.

Covers four families of questions about a sequence distribution:

* how far it wanders (:func:`deviation_stats`, :func:`afrw_moment_oracle`,
  :func:`upper_bound_rms`),
* how predictable it is (:func:`estimate_delta`),
* how reliably climbs are punctuated by opposite-direction excursions
  (:func:`inversion_ratio`, :func:`alpha_q_estimate`,
  :func:`certify_inversion`),
* exact brute-force references used to pin the fast paths
  (:func:`ideal_height_distribution`, :func:`decomposition_height_distribution`,
  :func:`inversion_ratio_naive`).

Estimators accept a :class:`~fractalwalk.generators.GeneratorSpec` plus trial
counts and derive their randomness from the spec seed unless an explicit
generator is passed, so any reported number can be replayed exactly.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats as sp_stats

from .errors import ConfigurationError
from .generators import (
    GeneratorSpec,
    _MERGE_FAMILIES,
    iter_generate_batches,
    simulate_heights,
)
from .seeding import derive_rng, make_rng
from .sequences import BitSequence, IntSequence, Interval

__all__ = [
    "DeviationRow",
    "DeviationReport",
    "deviation_stats",
    "afrw_moment_oracle",
    "upper_bound_rms",
    "ideal_height_distribution",
    "decomposition_height_distribution",
    "distribution_moment",
    "total_variation",
    "MomentChecks",
    "height_moment_checks",
    "InversionReport",
    "inversion_ratio",
    "inversion_ratio_naive",
    "inversion_ratio_naive_batch",
    "alpha_q_estimate",
    "EstimationMode",
    "UnpredictabilityRow",
    "UnpredictabilityReport",
    "estimate_delta",
    "CertificationReport",
    "certify_inversion",
]

EXHAUSTIVE_SCAN_LIMIT = 1 << 14
DEFAULT_MIN_LEN = 8


# ---------------------------------------------------------------------------
# Deviation statistics and closed-form references


@dataclass(frozen=True)
class DeviationRow:
    total_len: int
    mean_dev: float
    median_dev: float
    rms_dev: float
    trials: int


@dataclass(frozen=True)
class DeviationReport:
    spec: GeneratorSpec
    rows: tuple[DeviationRow, ...]
    fitted_exponent: float | None
    exponent_stderr: float | None


def deviation_stats(
    spec: GeneratorSpec,
    T_list: list[int],
    trials: int,
    rng: int | np.random.Generator | None = None,
) -> DeviationReport:
    """Monte Carlo mean/median/RMS of |height| per length, with a power-law fit.

    The exponent is the least-squares slope of ``log(median_dev)`` against
    ``log(T)``.  Lengths get independent derived seeds unless an explicit
    generator is supplied, so extending ``T_list`` never perturbs other rows.
    """
    if trials < 100:
        raise ConfigurationError(f"need at least 100 trials for stable quantiles, got {trials}")
    if not T_list:
        raise ConfigurationError("T_list must not be empty")
    shared = make_rng(rng) if rng is not None else None
    rows = []
    for T in T_list:
        cell = spec.with_total_len(T)
        cell_rng = shared if shared is not None else derive_rng(spec.seed, "deviation", T)
        dev = np.abs(simulate_heights(cell, trials, cell_rng)).astype(np.float64)
        mean = float(dev.mean())
        rms = float(np.sqrt(np.mean(dev**2)))
        assert mean <= rms * (1.0 + 1e-12)
        rows.append(DeviationRow(T, mean, float(np.median(dev)), rms, trials))
    exponent = stderr = None
    if len(rows) >= 2:
        fit = sp_stats.linregress(
            np.log([r.total_len for r in rows]), np.log([max(r.median_dev, 1e-12) for r in rows])
        )
        exponent, stderr = float(fit.slope), float(fit.stderr)
    return DeviationReport(spec, tuple(rows), exponent, stderr)


def afrw_moment_oracle(delta: float, l: int, depth_i: int) -> float:
    """Exact second moment ``(1 + (1+delta)^2)^i * l`` of the augmented walk's height."""
    return (1.0 + (1.0 + delta) ** 2) ** depth_i * l


def upper_bound_rms(delta: float, T: int) -> float:
    """RMS deviation ceiling ``sqrt(T) * (1 + delta/2 * log2 T)`` implied by
    delta-unpredictability; any distribution beating it is a contradiction witness."""
    if T < 1 or (T & (T - 1)):
        raise ConfigurationError(f"T must be a power of two, got {T}")
    return math.sqrt(T) * (1.0 + 0.5 * delta * math.log2(T))


# ---------------------------------------------------------------------------
# Exact enumeration of the idealized augmented recursion (base length 1)


def ideal_height_distribution(delta: Fraction | float, depth: int) -> dict[Fraction, Fraction]:
    """Exact law of the idealized recursion ``h' = (1+delta) h1 + h2`` after
    ``depth`` doublings from a single +-1 bit; rational arithmetic throughout."""
    if depth < 0:
        raise ConfigurationError("depth must be non-negative")
    r = 1 + Fraction(delta)
    dist: dict[Fraction, Fraction] = {Fraction(1): Fraction(1, 2), Fraction(-1): Fraction(1, 2)}
    for _ in range(depth):
        new: dict[Fraction, Fraction] = {}
        for a, pa in dist.items():
            ra = r * a
            for b, pb in dist.items():
                key = ra + b
                new[key] = new.get(key, Fraction(0)) + pa * pb
        dist = new
    return dist


def decomposition_height_distribution(delta: Fraction | float, depth: int) -> dict[Fraction, Fraction]:
    """Same law via the closed-form expansion: block ``j`` of the ``2^depth``
    base bits enters with coefficient ``(1+delta)^(depth - popcount(j))``,
    enumerated over all sign assignments."""
    if depth < 0:
        raise ConfigurationError("depth must be non-negative")
    r = 1 + Fraction(delta)
    n = 1 << depth
    scale = r.denominator**depth
    coeffs = np.array(
        [int(r**(depth - bin(j).count("1")) * scale) for j in range(n)], dtype=np.int64
    )
    assigns = np.arange(1 << n, dtype=np.int64)
    signs = (((assigns[:, None] >> np.arange(n)[None, :]) & 1) * 2 - 1).astype(np.int64)
    heights = signs @ coeffs
    values, counts = np.unique(heights, return_counts=True)
    total = 1 << n
    return {Fraction(int(v), scale): Fraction(int(c), total) for v, c in zip(values, counts)}


def distribution_moment(dist: dict[Fraction, Fraction], order: int) -> Fraction:
    """Exact raw moment of a rational distribution."""
    return sum((v**order * p for v, p in dist.items()), start=Fraction(0))


def total_variation(d1: dict[Fraction, Fraction], d2: dict[Fraction, Fraction]) -> Fraction:
    """Exact total-variation distance between two rational distributions."""
    keys = set(d1) | set(d2)
    gap = sum((abs(d1.get(k, Fraction(0)) - d2.get(k, Fraction(0))) for k in keys), start=Fraction(0))
    return gap / 2


# ---------------------------------------------------------------------------
# Moment inequality checks


@dataclass(frozen=True)
class MomentChecks:
    mean_abs: float
    second: float
    fourth: float
    cauchy_schwarz_floor: float  # (E h^2)^2 / (E h^4)^(3/4), never above E|h|
    fourth_moment_ratio: float  # E h^4 / (E h^2)^2
    anti_concentration: float  # P(|h| >= 0.25 E|h|)

    @property
    def cauchy_schwarz_ok(self) -> bool:
        return self.mean_abs >= self.cauchy_schwarz_floor * (1.0 - 1e-9)


def height_moment_checks(heights: np.ndarray) -> MomentChecks:
    """Sample-moment diagnostics; the Cauchy-Schwarz floor holds for *any*
    empirical distribution, so a violation means an arithmetic bug, not noise."""
    a = np.abs(heights).astype(np.float64)
    mean_abs = float(a.mean())
    m2 = float(np.mean(a**2))
    m4 = float(np.mean(a**4))
    floor = m2**2 / m4**0.75 if m4 > 0 else 0.0
    ratio = m4 / m2**2 if m2 > 0 else float("nan")
    anti = float(np.mean(a >= 0.25 * mean_abs)) if mean_abs > 0 else 1.0
    return MomentChecks(mean_abs, m2, m4, floor, ratio, anti)


# ---------------------------------------------------------------------------
# Inversion ratio


@dataclass(frozen=True)
class InversionReport:
    min_len: int
    dyadic_only: bool
    n_intervals: int
    overall_ratio: float
    x_interval: Interval | None = None
    y_interval: Interval | None = None
    x_height: int = 0
    y_height: int = 0

    def __post_init__(self) -> None:
        assert self.overall_ratio >= 0.0
        if self.overall_ratio > 0.0 and self.y_interval is not None:
            assert self.x_height * self.y_height < 0


def _segment_extremes(pref2d: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-row (height, max subinterval height, min subinterval height) from
    rows of prefix sums ``P[0..x]``; clamped so "no such subinterval" reads 0."""
    mins = np.minimum.accumulate(pref2d[:, :-1], axis=1)
    maxs = np.maximum.accumulate(pref2d[:, :-1], axis=1)
    best_pos = np.max(pref2d[:, 1:] - mins, axis=1)
    best_neg = np.min(pref2d[:, 1:] - maxs, axis=1)
    h = pref2d[:, -1] - pref2d[:, 0]
    return h, np.maximum(best_pos, 0), np.minimum(best_neg, 0)


def _opposite_magnitude(h: np.ndarray, best_pos: np.ndarray, best_neg: np.ndarray) -> np.ndarray:
    return np.where(h > 0, -best_neg, best_pos)


def _recover_witness(prefix: np.ndarray, lo: int, hi: int, want_positive: bool) -> tuple[int, int, int]:
    """Endpoints and height of the extreme subinterval of the requested sign in [lo, hi)."""
    seg = prefix[lo : hi + 1]
    if want_positive:
        acc = np.minimum.accumulate(seg[:-1])
        j = int(np.argmax(seg[1:] - acc))
        v = lo + j + 1
        u = lo + int(np.argmin(seg[: j + 1]))
    else:
        acc = np.maximum.accumulate(seg[:-1])
        j = int(np.argmin(seg[1:] - acc))
        v = lo + j + 1
        u = lo + int(np.argmax(seg[: j + 1]))
    return u, v, int(prefix[v] - prefix[u])


def inversion_ratio(
    seq: BitSequence | IntSequence, min_len: int = DEFAULT_MIN_LEN, dyadic_only: bool = False
) -> InversionReport:
    """Worst-case opposite-excursion ratio over interval choices.

    For every interval X with ``|X| >= min_len`` and nonzero height, the best
    opposite-sign subinterval height is divided by ``|h(X)|``; the report
    carries the minimum and its witness pair.  Exhaustive mode scans all
    O(T^2) intervals (length capped at 2^14); ``dyadic_only`` restricts X to
    aligned intervals, which scales to the fractal builder's output sizes.
    """
    if min_len < 1:
        raise ConfigurationError("min_len must be positive")
    prefix = seq.prefix
    T = prefix.shape[0] - 1
    if T < min_len:
        raise ConfigurationError(f"sequence of length {T} has no interval of length {min_len}")
    if not dyadic_only and T > EXHAUSTIVE_SCAN_LIMIT:
        raise ConfigurationError(
            f"length {T} exceeds the exhaustive-scan cap {EXHAUSTIVE_SCAN_LIMIT}; use dyadic_only"
        )

    best_ratio = math.inf
    best_x: tuple[int, int] | None = None
    scanned = 0

    if dyadic_only:
        size = 1
        while size < min_len:
            size <<= 1
        while size <= T:
            starts = np.arange(0, T - size + 1, size)
            idx = starts[:, None] + np.arange(size + 1)[None, :]
            h, bp, bn = _segment_extremes(prefix[idx])
            live = h != 0
            scanned += int(np.count_nonzero(live))
            if live.any():
                opp = _opposite_magnitude(h, bp, bn).astype(np.float64)
                ratios = np.where(live, opp / np.abs(np.where(live, h, 1)), math.inf)
                i = int(np.argmin(ratios))
                if ratios[i] < best_ratio:
                    best_ratio = float(ratios[i])
                    best_x = (int(starts[i]), int(starts[i]) + size)
            size <<= 1
    else:
        for lo in range(0, T - min_len + 1):
            seg = prefix[lo:]
            mins = np.minimum.accumulate(seg[:-1])
            maxs = np.maximum.accumulate(seg[:-1])
            best_pos = np.maximum(np.maximum.accumulate(seg[1:] - mins), 0)
            best_neg = np.minimum(np.minimum.accumulate(seg[1:] - maxs), 0)
            h = seg[1:] - seg[0]
            sl = slice(min_len - 1, None)
            h, best_pos, best_neg = h[sl], best_pos[sl], best_neg[sl]
            live = h != 0
            scanned += int(np.count_nonzero(live))
            if not live.any():
                continue
            opp = _opposite_magnitude(h, best_pos, best_neg).astype(np.float64)
            ratios = np.where(live, opp / np.abs(np.where(live, h, 1)), math.inf)
            i = int(np.argmin(ratios))
            if ratios[i] < best_ratio:
                best_ratio = float(ratios[i])
                best_x = (lo, lo + min_len + i)

    if best_x is None:
        return InversionReport(min_len, dyadic_only, scanned, 0.0)
    lo, hi = best_x
    x_iv = Interval(lo, hi, T)
    hx = int(prefix[hi] - prefix[lo])
    u, v, hy = _recover_witness(prefix, lo, hi, want_positive=hx < 0)
    if best_ratio == 0.0 or hx * hy >= 0:
        return InversionReport(min_len, dyadic_only, scanned, float(best_ratio), x_iv, None, hx, 0)
    return InversionReport(
        min_len, dyadic_only, scanned, float(best_ratio), x_iv, Interval(u, v, T), hx, hy
    )


def inversion_ratio_naive_batch(values: np.ndarray, min_len: int) -> np.ndarray:
    """Quadruple-loop reference ratios, vectorized only across sequences.

    Deliberately O(T^4) per sequence; exists to pin :func:`inversion_ratio`.
    """
    B, T = values.shape
    prefix = np.zeros((B, T + 1), dtype=np.int64)
    np.cumsum(values, axis=1, dtype=np.int64, out=prefix[:, 1:])
    best = np.full(B, np.inf)
    for lo in range(0, T - min_len + 1):
        for hi in range(lo + min_len, T + 1):
            h = prefix[:, hi] - prefix[:, lo]
            best_pos = np.zeros(B, dtype=np.int64)
            best_neg = np.zeros(B, dtype=np.int64)
            for u in range(lo, hi):
                for v in range(u + 1, hi + 1):
                    sub = prefix[:, v] - prefix[:, u]
                    np.maximum(best_pos, sub, out=best_pos)
                    np.minimum(best_neg, sub, out=best_neg)
            live = h != 0
            opp = np.where(h > 0, -best_neg, best_pos).astype(np.float64)
            ratios = np.where(live, opp / np.abs(np.where(live, h, 1)), np.inf)
            np.minimum(best, ratios, out=best)
    return np.where(np.isfinite(best), best, 0.0)


def inversion_ratio_naive(seq: BitSequence | IntSequence, min_len: int = DEFAULT_MIN_LEN) -> float:
    return float(inversion_ratio_naive_batch(seq.values[None, :], min_len)[0])


# ---------------------------------------------------------------------------
# (alpha, q)-inversion estimation


def alpha_q_estimate(
    spec: GeneratorSpec,
    interval: Interval,
    alpha: float,
    trials: int,
    rng: int | np.random.Generator | None = None,
    first_pass_trials: int = 1000,
    floor_coeff: float = 1.0,
) -> float:
    """Probability that a window carries an opposite-sign excursion of relative
    size ``alpha`` against its typical deviation.

    A first, independent pass estimates the window's median deviation Delta;
    the second pass reports the fraction of fresh samples whose window holds a
    subinterval of sign opposite to ``h(X)`` with ``|h(Y)| >= alpha * Delta``.
    Windows with zero height count as failures.
    """
    if trials < 1000:
        raise ConfigurationError(f"need at least 1000 trials, got {trials}")
    if interval.total_len != spec.total_len:
        raise ConfigurationError("interval ambient length must match spec.total_len")
    if alpha < 0:
        raise ConfigurationError("alpha must be non-negative")
    rng = make_rng(rng if rng is not None else derive_rng(spec.seed, "alpha_q", interval.lo, interval.hi))
    lo, hi = interval.lo, interval.hi
    x = len(interval)

    first = np.concatenate(
        [
            np.abs(chunk[:, lo:hi].sum(axis=1, dtype=np.int64))
            for chunk in iter_generate_batches(spec, first_pass_trials, rng)
        ]
    )
    delta_median = float(np.median(first))
    floor = floor_coeff * spec.delta * math.sqrt(x)
    if delta_median < floor:
        raise ConfigurationError(
            f"threshold not met: median deviation {delta_median} of the window is below "
            f"the floor {floor}; the inversion scale is not resolvable here"
        )

    threshold = alpha * delta_median
    hits = 0
    for chunk in iter_generate_batches(spec, trials, rng):
        pref = np.zeros((chunk.shape[0], x + 1), dtype=np.int64)
        np.cumsum(chunk[:, lo:hi], axis=1, dtype=np.int64, out=pref[:, 1:])
        h, bp, bn = _segment_extremes(pref)
        opp = _opposite_magnitude(h, bp, bn)
        hits += int(np.count_nonzero((h != 0) & (opp >= threshold)))
    return hits / trials


# ---------------------------------------------------------------------------
# Unpredictability estimation


class EstimationMode(str, enum.Enum):
    STRICT = "strict"
    WEAK_AVERAGED = "weak_averaged"


@dataclass(frozen=True)
class UnpredictabilityRow:
    window: int
    interval_lo: int
    interval_len: int
    mean_payoff: float
    normalized_payoff: float
    trials: int


@dataclass(frozen=True)
class UnpredictabilityReport:
    spec: GeneratorSpec
    mode: EstimationMode
    rows: tuple[UnpredictabilityRow, ...]
    delta_hat: float
    ci_low: float
    ci_high: float
    trials: int
    caveat: str = (
        "delta_hat maximizes over a finite sign-of-prefix family and therefore "
        "lower-bounds the true unpredictability constant"
    )


def _dyadic_range(lo: int, hi: int) -> list[int]:
    out = []
    v = 1
    while v < lo:
        v <<= 1
    while v <= hi:
        out.append(v)
        v <<= 1
    return out


def _strict_prefix_lengths(spec: GeneratorSpec, min_x: int) -> list[int]:
    T = spec.total_len
    if spec.family in _MERGE_FAMILIES:
        start = max(spec.base_len, min_x)
    else:
        start = min_x
    return [p for p in _dyadic_range(start, T // 2)]


def estimate_delta(
    spec: GeneratorSpec,
    mode: EstimationMode | str,
    trials: int,
    rng: int | np.random.Generator | None = None,
    windows: list[int] | None = None,
    min_x: int = DEFAULT_MIN_LEN,
    bootstrap: int = 200,
    chunk: int = 2048,
) -> UnpredictabilityReport:
    """Estimate the unpredictability constant with the sign-of-prefix family.

    Strict mode forces an all-+1 history of each feasible dyadic length
    (assembled directly, which is the conditional law given that worst-case
    history) and measures the mean payoff of betting +1 on each following
    aligned dyadic interval.  Weak mode averages the sign-of-prefix bet over
    naturally generated histories with the interval pinned at the sequence
    end.  Either way ``delta_hat`` is the largest interval-normalized mean
    payoff over the family, with a bootstrap interval for the winning cell.
    """
    mode = EstimationMode(mode)
    if trials < 1000:
        raise ConfigurationError(f"need at least 1000 trials per cell, got {trials}")
    T = spec.total_len
    rng = make_rng(rng if rng is not None else derive_rng(spec.seed, "estimate_delta", mode.value))

    if mode is EstimationMode.STRICT:
        prefixes = _strict_prefix_lengths(spec, min_x)
        if not prefixes:
            warnings.warn(
                "strict conditioning infeasible: no dyadic prefix is compatible with the "
                "base-block structure; falling back to weak averaging",
                stacklevel=2,
            )
            mode = EstimationMode.WEAK_AVERAGED
        else:
            cells: list[tuple[int, int, int]] = []  # (window=p, lo=p, x)
            payoffs: list[np.ndarray] = []
            for p in prefixes:
                xs = _dyadic_range(min_x, p)
                block = np.empty((trials, len(xs)), dtype=np.int64)
                done = 0
                for part in iter_generate_batches(spec, trials, rng, chunk=chunk, planted_prefix=p):
                    acc = np.cumsum(part[:, p : p + max(xs)], axis=1, dtype=np.int64)
                    for col, x in enumerate(xs):
                        block[done : done + part.shape[0], col] = acc[:, x - 1]
                    done += part.shape[0]
                for col, x in enumerate(xs):
                    cells.append((p, p, x))
                    payoffs.append(block[:, col])
            return _assemble_report(spec, EstimationMode.STRICT, cells, payoffs, trials, bootstrap, rng)

    xs = _dyadic_range(min_x, T // 2)
    wins = windows if windows is not None else _dyadic_range(1, T // 2)
    cells = []
    for x in xs:
        p = T - x
        for w in wins:
            if w <= p:
                cells.append((w, p, x))
    payoff_mat = np.zeros((len(cells), trials), dtype=np.int64)
    done = 0
    for part in iter_generate_batches(spec, trials, rng, chunk=chunk):
        pref = np.zeros((part.shape[0], T + 1), dtype=np.int64)
        np.cumsum(part, axis=1, dtype=np.int64, out=pref[:, 1:])
        for ci, (w, p, x) in enumerate(cells):
            hist = pref[:, p] - pref[:, p - w]
            bet = np.where(hist >= 0, 1, -1)
            payoff_mat[ci, done : done + part.shape[0]] = bet * (pref[:, p + x] - pref[:, p])
        done += part.shape[0]
    return _assemble_report(
        spec, mode, cells, [payoff_mat[i] for i in range(len(cells))], trials, bootstrap, rng
    )


def _assemble_report(
    spec: GeneratorSpec,
    mode: EstimationMode,
    cells: list[tuple[int, int, int]],
    payoffs: list[np.ndarray],
    trials: int,
    bootstrap: int,
    rng: np.random.Generator,
) -> UnpredictabilityReport:
    rows = []
    normalized = []
    for (w, p, x), pay in zip(cells, payoffs):
        mean = float(pay.mean())
        rows.append(UnpredictabilityRow(w, p, x, mean, mean / math.sqrt(x), trials))
        normalized.append(mean / math.sqrt(x))
    best = int(np.argmax(normalized))
    delta_hat = max(0.0, normalized[best])
    pay = payoffs[best].astype(np.float64)
    x = cells[best][2]
    boots = np.empty(bootstrap)
    for b in range(bootstrap):
        boots[b] = pay[rng.integers(0, trials, size=trials)].mean() / math.sqrt(x)
    ci_low, ci_high = (float(v) for v in np.percentile(boots, [2.5, 97.5]))
    return UnpredictabilityReport(spec, mode, tuple(rows), delta_hat, ci_low, ci_high, trials)


# ---------------------------------------------------------------------------
# Staged inversion certification


@dataclass(frozen=True)
class CertificationReport:
    spec: GeneratorSpec
    interval: Interval
    theta: int
    alpha: float
    s_iterations: int
    trials: int
    stage_lower_rate: tuple[float, ...]
    stage_upper_rate: tuple[float, ...]
    stage_reached_rate: tuple[float, ...]
    p_high: float
    p_no_inversion_and_high: float
    p_no_inversion_given_high: float


def certify_inversion(
    spec: GeneratorSpec,
    interval: Interval,
    theta: int,
    s_iterations: int,
    trials: int,
    alpha: float = 0.5,
    rng: int | np.random.Generator | None = None,
    chunk: int = 2048,
) -> CertificationReport:
    """Run the staged +1 bettor and measure how often a height-``theta`` climb
    escapes without any stage detecting an opposite excursion.

    Each stage stops at running payoff ``-ceil(alpha*theta/s)`` (an inversion
    witness) or ``+ceil(2*alpha*theta/s)``; the next stage starts immediately
    after.  The headline number is the frequency of final height >= theta
    with no stage having hit its lower limit.
    """
    if s_iterations < 1:
        raise ConfigurationError("s_iterations must be positive")
    if alpha * theta / s_iterations < 1.0:
        raise ConfigurationError(
            f"per-stage limits degenerate: need alpha*theta/s >= 1, got "
            f"alpha={alpha}, theta={theta}, s={s_iterations}"
        )
    if interval.total_len != spec.total_len:
        raise ConfigurationError("interval ambient length must match spec.total_len")
    lower = math.ceil(alpha * theta / s_iterations)
    upper = math.ceil(2.0 * alpha * theta / s_iterations)
    rng = make_rng(rng if rng is not None else derive_rng(spec.seed, "certify", theta, s_iterations))

    lo, hi = interval.lo, interval.hi
    lower_hits = np.zeros(s_iterations, dtype=np.int64)
    upper_hits = np.zeros(s_iterations, dtype=np.int64)
    reached = np.zeros(s_iterations, dtype=np.int64)
    n_high = 0
    n_no_inv_high = 0
    for part in iter_generate_batches(spec, trials, rng, chunk=chunk):
        for row in part:
            cum = np.cumsum(row[lo:hi], dtype=np.int64)
            start, base = 0, 0
            saw_lower = False
            for stage in range(s_iterations):
                if start >= cum.shape[0]:
                    break
                reached[stage] += 1
                rel = cum[start:] - base
                hits = np.flatnonzero((rel <= -lower) | (rel >= upper))
                if hits.size == 0:
                    break
                t = int(hits[0])
                if rel[t] <= -lower:
                    lower_hits[stage] += 1
                    saw_lower = True
                else:
                    upper_hits[stage] += 1
                base = int(cum[start + t])
                start += t + 1
            high = int(cum[-1]) >= theta
            n_high += high
            n_no_inv_high += high and not saw_lower
    p_high = n_high / trials
    p_joint = n_no_inv_high / trials
    return CertificationReport(
        spec,
        interval,
        theta,
        alpha,
        s_iterations,
        trials,
        tuple(lower_hits / trials),
        tuple(upper_hits / trials),
        tuple(reached / trials),
        p_high,
        p_joint,
        (p_joint / p_high) if n_high else float("nan"),
    )
