"""Sequence generators built by recursive doubling.

All non-trivial families share one mechanism: base blocks of length ``l`` are
filled with independent uniform +1/-1 entries, then pairs of adjacent blocks
are merged level by level.  At each merge the second half is nudged toward
the sign of the first half's height, with a budget that depends on the
family:

* ``frw``      flips ``delta * |h1|`` opposite-sign bits,
* ``opt_frw``  flips ``delta * sqrt(n)`` opposite-sign bits (n = half length),
* ``afrw``     applies a height change of exactly ``delta * |h1|``,
* ``aofrw``    applies a height change of exactly ``delta * sqrt(n)``.

The bit families cap at the available opposite-sign bits; the augmented
families instead add +-2 to uniformly chosen entries once flippable bits run
out, so their realized height change always equals the (evenly rounded)
budget.  ``exact_count`` mode realizes fractional budgets as floor plus a
Bernoulli remainder; ``bernoulli`` mode flips each eligible bit independently
with the corresponding per-bit probability.

Entry points: :func:`generate` (one instrumented sequence),
:func:`generate_batch` (a trials x length matrix for Monte Carlo work), and
:func:`simulate_heights` (final heights only, much faster when positions are
not needed).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, SamplingBudgetError
from .seeding import make_rng
from .sequences import MAX_TOTAL_LEN, BitSequence, IntSequence

__all__ = [
    "Family",
    "FlipMode",
    "GeneratorSpec",
    "FlipRecord",
    "MergeCounters",
    "Generated",
    "default_base_len",
    "entropy_threshold",
    "generate",
    "generate_batch",
    "iter_generate_batches",
    "simulate_heights",
    "gen_uniform",
    "gen_frw",
    "gen_opt_frw",
    "gen_afrw",
    "gen_aofrw",
    "gen_entropy_conditioned",
]

DEFAULT_REJECTION_BUDGET = 10_000_000


class Family(str, enum.Enum):
    UNIFORM = "uniform"
    FRW = "frw"
    OPT_FRW = "opt_frw"
    AFRW = "afrw"
    AOFRW = "aofrw"
    ENTROPY_CONDITIONED = "entropy_conditioned"


class FlipMode(str, enum.Enum):
    EXACT_COUNT = "exact_count"
    BERNOULLI = "bernoulli"


_MERGE_FAMILIES = (Family.FRW, Family.OPT_FRW, Family.AFRW, Family.AOFRW)
_AUGMENTED = (Family.AFRW, Family.AOFRW)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def default_base_len(family: Family, total_len: int) -> int:
    """Family-specific default base block length.

    The height-coupled families use a block long enough that the flip budget
    can never exhaust the eligible bits in practice; the sqrt-budget families
    use ``total_len ** (3/4)`` rounded up to a power of two.  The remaining
    families have no merge structure, so the base block is the whole sequence.
    """
    if family in (Family.FRW, Family.AFRW):
        want = 100 * max(1, int(math.log2(total_len)))
        return min(total_len, 1 << math.ceil(math.log2(want)))
    if family in (Family.OPT_FRW, Family.AOFRW):
        return min(total_len, 1 << math.ceil(0.75 * math.log2(total_len)))
    return total_len


def entropy_threshold(k: float, total_len: int) -> int:
    """Height threshold ``ceil(k * sqrt(total_len))`` lifted to the parity of ``total_len``."""
    thr = math.ceil(k * math.sqrt(total_len))
    if (thr & 1) != (total_len & 1):
        thr += 1
    return thr


@dataclass(frozen=True)
class GeneratorSpec:
    """Full description of a sequence distribution; a pure function of itself plus ``seed``."""

    family: Family
    total_len: int
    delta: float = 0.0
    base_len: int | None = None
    flip_mode: FlipMode = FlipMode.EXACT_COUNT
    k: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "flip_mode", FlipMode(self.flip_mode))
        if not isinstance(self.total_len, int) or not _is_power_of_two(self.total_len):
            raise ConfigurationError(f"total_len must be a power of two, got {self.total_len}")
        if self.total_len > MAX_TOTAL_LEN:
            raise ConfigurationError(f"total_len {self.total_len} exceeds {MAX_TOTAL_LEN}")
        if self.base_len is None:
            object.__setattr__(self, "base_len", default_base_len(self.family, self.total_len))
        if not _is_power_of_two(self.base_len) or self.base_len > self.total_len:
            raise ConfigurationError(
                f"base_len must be a power of two dividing total_len, got {self.base_len}"
            )
        if not (0.0 <= float(self.delta) < 1.0):
            raise ConfigurationError(f"delta must lie in [0, 1), got {self.delta}")
        object.__setattr__(self, "delta", float(self.delta))
        if self.family is Family.ENTROPY_CONDITIONED:
            if self.k is None or not (self.k >= 0):
                raise ConfigurationError("entropy_conditioned requires k >= 0")
            object.__setattr__(self, "k", float(self.k))
            if entropy_threshold(self.k, self.total_len) > self.total_len:
                raise ConfigurationError(
                    f"k={self.k} demands heights above the sequence length; no sequence qualifies"
                )
        elif self.k is not None:
            raise ConfigurationError(f"k is only meaningful for entropy_conditioned, got k={self.k}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 1 << 64):
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def levels(self) -> int:
        """Number of merge levels (0 when the base block is the whole sequence)."""
        return int(math.log2(self.total_len // self.base_len))

    def with_total_len(self, total_len: int) -> "GeneratorSpec":
        """Copy at a different length, re-deriving the base length if it was defaulted."""
        base = self.base_len if self.base_len != default_base_len(self.family, self.total_len) else None
        return replace(self, total_len=total_len, base_len=base)

    def to_json_dict(self) -> dict:
        return {
            "family": self.family.value,
            "delta": self.delta,
            "base_len": self.base_len,
            "total_len": self.total_len,
            "flip_mode": self.flip_mode.value,
            "k": self.k,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "GeneratorSpec":
        allowed = {"family", "delta", "base_len", "total_len", "flip_mode", "k", "seed"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigurationError(f"unknown generator spec fields: {sorted(unknown)}")
        if "family" not in data or "total_len" not in data:
            raise ConfigurationError("generator spec requires at least family and total_len")
        kwargs = dict(data)
        return cls(**kwargs)


@dataclass(frozen=True)
class FlipRecord:
    """Instrumentation for one merge: budget and what was actually applied.

    ``requested`` is signed (positive means flips toward +1) and is measured
    in flip steps, each worth a height change of 2.  ``applied`` counts bit
    flips, ``augmented`` counts +-2 additions used once flippable bits ran out.
    """

    level: int
    requested: float
    applied: int
    augmented: int


@dataclass
class MergeCounters:
    merges: int = 0
    flip_steps: int = 0
    augment_events: int = 0
    augment_steps: int = 0
    attempts: int = 0
    accepted: int = 0

    @property
    def acceptance_rate(self) -> float | None:
        if self.attempts == 0:
            return None
        return self.accepted / self.attempts


@dataclass(frozen=True)
class Generated:
    sequence: BitSequence | IntSequence
    records: tuple[FlipRecord, ...] = ()
    acceptance_rate: float | None = None


def _plan_level(
    spec: GeneratorSpec,
    n: int,
    h1: np.ndarray,
    h2: np.ndarray,
    eligible: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Flip plan for one merge level, vectorized over merges.

    Returns ``(direction, requested_steps, applied, augmented)``.  A merge
    with ``h1 == 0`` never flips.  ``eligible`` must hold the current count
    of opposite-sign entries in each second half.
    """
    fam = spec.family
    delta = spec.delta
    dirs = np.sign(h1).astype(np.int64)
    live = dirs != 0
    if fam is Family.FRW:
        requested = delta * np.abs(h1).astype(np.float64)
    elif fam is Family.OPT_FRW:
        requested = np.where(live, delta * math.sqrt(n), 0.0)
    elif fam is Family.AFRW:
        requested = delta * np.abs(h1).astype(np.float64) / 2.0
    elif fam is Family.AOFRW:
        requested = np.where(live, delta * math.sqrt(n) / 2.0, 0.0)
    else:  # pragma: no cover - guarded by callers
        raise AssertionError(f"family {fam} has no merge step")

    if spec.flip_mode is FlipMode.EXACT_COUNT:
        whole = np.floor(requested)
        steps = whole.astype(np.int64) + (rng.random(requested.shape) < (requested - whole))
        applied = np.minimum(steps, eligible)
        if fam in _AUGMENTED:
            augmented = steps - applied
        else:
            augmented = np.zeros_like(applied)
    else:
        if fam in (Family.FRW, Family.AFRW):
            prob = np.minimum(delta * np.abs(h1).astype(np.float64) / n, 1.0)
        else:
            prob = np.where(live, min(delta / math.sqrt(n), 1.0), 0.0)
        applied = rng.binomial(eligible, prob).astype(np.int64)
        augmented = np.zeros_like(applied)

    applied = np.where(live, applied, 0)
    augmented = np.where(live, augmented, 0)
    # Net change must point with sign(h1) or vanish; flip counts never exceed
    # what the eligible bits allow.
    assert np.all(applied <= eligible)
    assert np.all((applied + augmented == 0) | live)
    return dirs, requested, applied, augmented


def _eligible_from_height(n: int, dirs: np.ndarray, h2: np.ndarray) -> np.ndarray:
    """Opposite-sign entry count of a pure +-1 block of length ``n`` and height ``h2``."""
    return np.where(dirs != 0, (n - dirs * h2) // 2, 0).astype(np.int64)


# ---------------------------------------------------------------------------
# Height-only simulation


def simulate_heights(
    spec: GeneratorSpec,
    trials: int,
    rng: int | np.random.Generator | None = None,
    with_counters: bool = False,
) -> np.ndarray | tuple[np.ndarray, MergeCounters]:
    """Final heights of ``trials`` independent sequences, without materializing bits.

    Distribution-identical to summing :func:`generate_batch` rows but orders of
    magnitude cheaper.  For the augmented families the eligible-bit bookkeeping
    is exact until the first augment event in a trial (such events are counted;
    at the documented default block lengths they are never observed).
    """
    if trials <= 0:
        raise ConfigurationError("trials must be positive")
    rng = make_rng(rng if rng is not None else spec.seed)
    counters = MergeCounters()
    T = spec.total_len

    if spec.family is Family.UNIFORM:
        heights = 2 * rng.binomial(T, 0.5, size=trials).astype(np.int64) - T
    elif spec.family is Family.ENTROPY_CONDITIONED:
        heights = _entropy_heights(spec, trials, rng, counters)
    else:
        l = spec.base_len
        H = 2 * rng.binomial(l, 0.5, size=(trials, T // l)).astype(np.int64) - l
        n = l
        while n < T:
            h1 = H[:, 0::2]
            h2 = H[:, 1::2]
            elig = _eligible_from_height(n, np.sign(h1).astype(np.int64), h2)
            dirs, _req, applied, augmented = _plan_level(spec, n, h1, h2, elig, rng)
            H = h1 + h2 + 2 * dirs * (applied + augmented)
            counters.merges += h1.shape[1] * trials
            counters.flip_steps += int(applied.sum())
            counters.augment_events += int(np.count_nonzero(augmented))
            counters.augment_steps += int(augmented.sum())
            n *= 2
        heights = H[:, 0]

    if with_counters:
        return heights, counters
    return heights


def _entropy_heights(
    spec: GeneratorSpec, trials: int, rng: np.random.Generator, counters: MergeCounters
) -> np.ndarray:
    T = spec.total_len
    thr = entropy_threshold(spec.k, T)
    out = np.empty(trials, dtype=np.int64)
    got = 0
    budget = DEFAULT_REJECTION_BUDGET
    chunk = max(4096, min(trials * 4, 1 << 16))
    while got < trials:
        if counters.attempts >= budget:
            raise SamplingBudgetError(
                f"rejection budget {budget} exhausted after accepting {got}/{trials} "
                f"samples (threshold {thr}); retry with a smaller k"
            )
        m = min(chunk, budget - counters.attempts)
        h = 2 * rng.binomial(T, 0.5, size=m).astype(np.int64) - T
        qualifying = np.flatnonzero(np.abs(h) >= thr)
        take = min(len(qualifying), trials - got)
        if take == trials - got:
            counters.attempts += int(qualifying[take - 1]) + 1
        else:
            counters.attempts += m
        out[got : got + take] = h[qualifying[:take]]
        got += take
        counters.accepted += take
    return out


# ---------------------------------------------------------------------------
# Materialized generation


def generate_batch(
    spec: GeneratorSpec,
    trials: int,
    rng: int | np.random.Generator | None = None,
    planted_prefix: int = 0,
    with_counters: bool = False,
) -> np.ndarray | tuple[np.ndarray, MergeCounters]:
    """Matrix of ``trials`` independent sequences, one per row.

    ``planted_prefix`` forces the first that many positions to +1 before the
    merge recursion runs, which realizes conditioning on an all-+1 history
    (for the merge families it must cover whole base blocks).  Bit families
    return int8, augmented families int64.

    Rows are generated in one vectorized pass; callers with large trial
    counts should chunk via :func:`iter_generate_batches`.
    """
    if trials <= 0:
        raise ConfigurationError("trials must be positive")
    T = spec.total_len
    if not (0 <= planted_prefix < T):
        raise ConfigurationError(f"planted_prefix must lie in [0, {T}), got {planted_prefix}")
    if spec.family in _MERGE_FAMILIES and planted_prefix % spec.base_len != 0:
        raise ConfigurationError(
            f"planted_prefix must cover whole base blocks of {spec.base_len}"
        )
    rng = make_rng(rng if rng is not None else spec.seed)
    counters = MergeCounters()

    if spec.family is Family.UNIFORM:
        A = _uniform_matrix(T, trials, rng, planted_prefix)
    elif spec.family is Family.ENTROPY_CONDITIONED:
        A = _entropy_matrix(spec, trials, rng, planted_prefix, counters)
    else:
        A = _merge_family_matrix(spec, trials, rng, planted_prefix, counters, records=None)

    if with_counters:
        return A, counters
    return A


def iter_generate_batches(
    spec: GeneratorSpec,
    trials: int,
    rng: int | np.random.Generator | None = None,
    chunk: int = 2048,
    planted_prefix: int = 0,
):
    """Yield ``generate_batch`` chunks summing to ``trials`` rows, sharing one stream."""
    rng = make_rng(rng if rng is not None else spec.seed)
    left = trials
    while left > 0:
        m = min(chunk, left)
        yield generate_batch(spec, m, rng, planted_prefix=planted_prefix)
        left -= m


def _uniform_matrix(
    T: int, trials: int, rng: np.random.Generator, planted_prefix: int
) -> np.ndarray:
    A = (2 * rng.integers(0, 2, size=(trials, T), dtype=np.int8) - 1).astype(np.int8)
    if planted_prefix:
        A[:, :planted_prefix] = 1
    return A


def _entropy_matrix(
    spec: GeneratorSpec,
    trials: int,
    rng: np.random.Generator,
    planted_prefix: int,
    counters: MergeCounters,
) -> np.ndarray:
    T = spec.total_len
    thr = entropy_threshold(spec.k, T)
    p = planted_prefix
    free = T - p
    out = np.empty((trials, T), dtype=np.int8)
    if p:
        out[:, :p] = 1
    got = 0
    budget = DEFAULT_REJECTION_BUDGET
    chunk = max(256, min(4 * trials, 1 << 14))
    while got < trials:
        if counters.attempts >= budget:
            raise SamplingBudgetError(
                f"rejection budget {budget} exhausted after accepting {got}/{trials} "
                f"samples (threshold {thr}); retry with a smaller k"
            )
        m = min(chunk, budget - counters.attempts)
        block = 2 * rng.integers(0, 2, size=(m, free), dtype=np.int8) - 1
        h = p + block.sum(axis=1, dtype=np.int64)
        qualifying = np.flatnonzero(np.abs(h) >= thr)
        take = min(len(qualifying), trials - got)
        # Count only the candidates examined before the quota filled, so the
        # acceptance rate is not diluted by the unused tail of the chunk.
        if take == trials - got:
            counters.attempts += int(qualifying[take - 1]) + 1
        else:
            counters.attempts += m
        ok = qualifying[:take]
        out[got : got + take, p:] = block[ok]
        got += take
        counters.accepted += take
    return out


def _merge_family_matrix(
    spec: GeneratorSpec,
    trials: int,
    rng: np.random.Generator,
    planted_prefix: int,
    counters: MergeCounters,
    records: list[FlipRecord] | None,
) -> np.ndarray:
    T = spec.total_len
    l = spec.base_len
    dtype = np.int64 if spec.family in _AUGMENTED else np.int8
    A = (2 * rng.integers(0, 2, size=(trials, T), dtype=np.int8) - 1).astype(dtype)
    if planted_prefix:
        A[:, :planted_prefix] = 1
    H = A.reshape(trials, T // l, l).sum(axis=2, dtype=np.int64)
    tainted = np.zeros(trials, dtype=bool)  # trials holding non +-1 entries

    level = 0
    n = l
    while n < T:
        h1 = H[:, 0::2]
        h2 = H[:, 1::2]
        merges = h1.shape[1]
        dirs0 = np.sign(h1).astype(np.int64)
        elig = _eligible_from_height(n, dirs0, h2)
        if tainted.any():
            _recount_eligible(A, tainted, dirs0, elig, n, merges)
        dirs, requested, applied, augmented = _plan_level(spec, n, h1, h2, elig, rng)

        trial_idx, merge_idx = np.nonzero(applied + augmented)
        base_pos = merge_idx * 2 * n + n
        flat_dir = dirs[trial_idx, merge_idx]
        _place_flips(A, trial_idx, base_pos, n, applied[trial_idx, merge_idx], flat_dir, rng)

        aug_flat = augmented[trial_idx, merge_idx]
        for i in np.flatnonzero(aug_flat):
            t = int(trial_idx[i])
            cols = base_pos[i] + rng.integers(0, n, size=int(aug_flat[i]))
            np.add.at(A[t], cols, 2 * int(flat_dir[i]))
            tainted[t] = True

        if records is not None:
            signed = dirs * requested
            for m in range(merges):
                records.append(
                    FlipRecord(level, float(signed[0, m]), int(applied[0, m]), int(augmented[0, m]))
                )

        H = h1 + h2 + 2 * dirs * (applied + augmented)
        counters.merges += merges * trials
        counters.flip_steps += int(applied.sum())
        counters.augment_events += int(np.count_nonzero(augmented))
        counters.augment_steps += int(augmented.sum())
        n *= 2
        level += 1

    assert np.array_equal(H[:, 0], A.sum(axis=1, dtype=np.int64))
    return A


def _recount_eligible(
    A: np.ndarray,
    tainted: np.ndarray,
    dirs: np.ndarray,
    elig: np.ndarray,
    n: int,
    merges: int,
) -> None:
    """Honest per-block eligible counts for trials that contain augmented entries."""
    for t in np.flatnonzero(tainted):
        for m in range(merges):
            d = int(dirs[t, m])
            if d == 0:
                continue
            s2 = A[t, m * 2 * n + n : m * 2 * n + 2 * n]
            elig[t, m] = int(np.count_nonzero(s2 == -d))


def _place_flips(
    A: np.ndarray,
    trial_idx: np.ndarray,
    base_pos: np.ndarray,
    n: int,
    counts: np.ndarray,
    dirs: np.ndarray,
    rng: np.random.Generator,
) -> None:
    """Flip ``counts[i]`` uniformly chosen opposite-sign entries in each second half.

    Uses proposal sampling: each active merge proposes one position per round
    and keeps it when it still holds the opposite-sign value, which realizes
    a uniform without-replacement choice among the eligible positions.
    """
    remaining = counts.astype(np.int64).copy()
    act = np.flatnonzero(remaining > 0)
    while act.size:
        off = rng.integers(0, n, size=act.size)
        rows = trial_idx[act]
        cols = base_pos[act] + off
        want = -dirs[act]
        hit = A[rows, cols] == want
        A[rows[hit], cols[hit]] = dirs[act][hit]
        remaining[act[hit]] -= 1
        act = act[remaining[act] > 0]


# ---------------------------------------------------------------------------
# Single-sequence front ends


def generate(
    spec: GeneratorSpec, rng: int | np.random.Generator | None = None
) -> Generated:
    """One sequence drawn from ``spec`` with per-merge flip records.

    Deterministic in ``(spec, spec.seed)`` when ``rng`` is omitted.
    """
    rng = make_rng(rng if rng is not None else spec.seed)
    if spec.family is Family.UNIFORM:
        A = _uniform_matrix(spec.total_len, 1, rng, 0)
        return Generated(BitSequence(A[0]))
    if spec.family is Family.ENTROPY_CONDITIONED:
        counters = MergeCounters()
        A = _entropy_matrix(spec, 1, rng, 0, counters)
        return Generated(BitSequence(A[0]), acceptance_rate=counters.acceptance_rate)
    records: list[FlipRecord] = []
    counters = MergeCounters()
    A = _merge_family_matrix(spec, 1, rng, 0, counters, records)
    if spec.family in _AUGMENTED:
        seq: BitSequence | IntSequence = IntSequence(A[0])
    else:
        seq = BitSequence(A[0])
    return Generated(seq, records=tuple(records))


def _family_front_end(expected: Family):
    def front(spec: GeneratorSpec, rng: int | np.random.Generator | None = None) -> Generated:
        if spec.family is not expected:
            raise ConfigurationError(f"spec family is {spec.family.value}, expected {expected.value}")
        return generate(spec, rng)

    front.__name__ = f"gen_{expected.value}"
    front.__doc__ = f"Draw one ``{expected.value}`` sequence; see :func:`generate`."
    return front


gen_uniform = _family_front_end(Family.UNIFORM)
gen_frw = _family_front_end(Family.FRW)
gen_opt_frw = _family_front_end(Family.OPT_FRW)
gen_afrw = _family_front_end(Family.AFRW)
gen_aofrw = _family_front_end(Family.AOFRW)
gen_entropy_conditioned = _family_front_end(Family.ENTROPY_CONDITIONED)
