"""Tests for the sequence generator families.

The small hand-traces pin down the merge mechanics exactly: with a base block
of 2 and a budget that works out to one whole flip step, every reachable
outcome can be enumerated by hand and checked against the code.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractalwalk import (
    BitSequence,
    ConfigurationError,
    Family,
    FlipMode,
    GeneratorSpec,
    IntSequence,
    SamplingBudgetError,
    default_base_len,
    entropy_threshold,
    gen_afrw,
    gen_aofrw,
    gen_entropy_conditioned,
    gen_frw,
    gen_opt_frw,
    gen_uniform,
    generate,
    generate_batch,
    iter_generate_batches,
    simulate_heights,
)

ALL_FAMILIES = list(Family)
MERGE_FAMILIES = [Family.FRW, Family.OPT_FRW, Family.AFRW, Family.AOFRW]


def spec_for(family: Family, total_len: int = 64, **kw) -> GeneratorSpec:
    if family is Family.ENTROPY_CONDITIONED:
        kw.setdefault("k", 1.0)
    elif family is not Family.UNIFORM:
        kw.setdefault("delta", 0.2)
        kw.setdefault("base_len", min(8, total_len))
    return GeneratorSpec(family=family, total_len=total_len, **kw)


class TestSpecValidation:
    def test_json_round_trip(self):
        spec = GeneratorSpec(
            family=Family.AFRW, total_len=256, delta=0.25, base_len=16, seed=99
        )
        assert GeneratorSpec.from_json_dict(spec.to_json_dict()) == spec

    def test_json_round_trip_entropy(self):
        spec = GeneratorSpec(
            family=Family.ENTROPY_CONDITIONED, total_len=64, k=1.5, seed=3
        )
        assert GeneratorSpec.from_json_dict(spec.to_json_dict()) == spec

    def test_string_enums_coerced(self):
        spec = GeneratorSpec(family="frw", total_len=32, delta=0.1, flip_mode="bernoulli")
        assert spec.family is Family.FRW
        assert spec.flip_mode is FlipMode.BERNOULLI

    def test_unknown_json_field_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown"):
            GeneratorSpec.from_json_dict({"family": "uniform", "total_len": 8, "bogus": 1})

    def test_json_requires_family_and_length(self):
        with pytest.raises(ConfigurationError):
            GeneratorSpec.from_json_dict({"family": "uniform"})

    @pytest.mark.parametrize("delta", [-0.1, 1.0, 2.0, float("nan")])
    def test_delta_range(self, delta):
        with pytest.raises(ConfigurationError, match="delta"):
            GeneratorSpec(family=Family.FRW, total_len=16, delta=delta)

    @pytest.mark.parametrize("total_len", [0, 3, 24, 1 << 25])
    def test_total_len_rejected(self, total_len):
        with pytest.raises(ConfigurationError):
            GeneratorSpec(family=Family.UNIFORM, total_len=total_len)

    @pytest.mark.parametrize("base_len", [3, 32, 0])
    def test_base_len_rejected(self, base_len):
        with pytest.raises(ConfigurationError, match="base_len"):
            GeneratorSpec(family=Family.FRW, total_len=16, delta=0.1, base_len=base_len)

    def test_k_only_for_entropy_family(self):
        with pytest.raises(ConfigurationError, match="k"):
            GeneratorSpec(family=Family.FRW, total_len=16, delta=0.1, k=1.0)

    def test_entropy_requires_k(self):
        with pytest.raises(ConfigurationError, match="k"):
            GeneratorSpec(family=Family.ENTROPY_CONDITIONED, total_len=16)

    @pytest.mark.parametrize("k", [-1.0, float("nan")])
    def test_entropy_k_rejected(self, k):
        with pytest.raises(ConfigurationError, match="k"):
            GeneratorSpec(family=Family.ENTROPY_CONDITIONED, total_len=16, k=k)

    def test_entropy_k_zero_allowed(self):
        spec = GeneratorSpec(family=Family.ENTROPY_CONDITIONED, total_len=16, k=0.0)
        assert spec.k == 0.0

    def test_entropy_unsatisfiable_threshold(self):
        # ceil(9 * sqrt(64)) = 72 > 64: no sequence can qualify.
        with pytest.raises(ConfigurationError, match="qualifies"):
            GeneratorSpec(family=Family.ENTROPY_CONDITIONED, total_len=64, k=9.0)

    @pytest.mark.parametrize("seed", [-1, 1 << 64, 1.5])
    def test_seed_rejected(self, seed):
        with pytest.raises(ConfigurationError, match="seed"):
            GeneratorSpec(family=Family.UNIFORM, total_len=16, seed=seed)

    def test_levels(self):
        spec = GeneratorSpec(family=Family.FRW, total_len=16, delta=0.1, base_len=2)
        assert spec.levels == 3
        whole = GeneratorSpec(family=Family.UNIFORM, total_len=16)
        assert whole.levels == 0

    def test_with_total_len_rederives_defaulted_base(self):
        spec = GeneratorSpec(family=Family.OPT_FRW, total_len=1 << 12, delta=0.1)
        grown = spec.with_total_len(1 << 14)
        assert grown.base_len == default_base_len(Family.OPT_FRW, 1 << 14)

    def test_with_total_len_keeps_explicit_base(self):
        spec = GeneratorSpec(family=Family.FRW, total_len=64, delta=0.1, base_len=4)
        assert spec.with_total_len(256).base_len == 4


class TestDefaults:
    def test_height_coupled_default_base(self):
        # 100 * log2(2^14) = 1400, next power of two is 2048.
        assert default_base_len(Family.FRW, 1 << 14) == 2048
        assert default_base_len(Family.AFRW, 1 << 14) == 2048

    def test_sqrt_budget_default_base(self):
        # ceil(0.75 * 12) = 9.
        assert default_base_len(Family.OPT_FRW, 1 << 12) == 512
        assert default_base_len(Family.AOFRW, 1 << 14) == 1 << 11

    def test_default_base_capped_at_total(self):
        assert default_base_len(Family.FRW, 16) == 16

    def test_flat_families_use_whole_sequence(self):
        assert default_base_len(Family.UNIFORM, 1 << 10) == 1 << 10
        assert default_base_len(Family.ENTROPY_CONDITIONED, 1 << 10) == 1 << 10

    @pytest.mark.parametrize(
        "k,total_len,expected",
        [
            (1.0, 8, 4),  # ceil(2.83) = 3, lifted to even
            (0.0, 8, 0),
            (2.0, 1024, 64),
            (1.0, 4, 2),
        ],
    )
    def test_entropy_threshold(self, k, total_len, expected):
        assert entropy_threshold(k, total_len) == expected

    def test_entropy_threshold_parity_matches_length(self):
        for k in (0.3, 0.7, 1.1, 2.9):
            for exp in range(2, 12):
                T = 1 << exp
                assert entropy_threshold(k, T) % 2 == T % 2


class TestDeterminism:
    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_batch_repeats(self, family):
        spec = spec_for(family, total_len=64, seed=41)
        a = generate_batch(spec, 16)
        b = generate_batch(spec, 16)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_single_repeats(self, family):
        spec = spec_for(family, total_len=64, seed=42)
        assert generate(spec).sequence == generate(spec).sequence

    def test_explicit_rng_overrides_seed(self):
        a = spec_for(Family.FRW, seed=1)
        b = spec_for(Family.FRW, seed=2)
        assert generate(a, rng=123).sequence == generate(b, rng=123).sequence

    def test_heights_repeat(self):
        spec = spec_for(Family.OPT_FRW, total_len=256, seed=5)
        assert np.array_equal(simulate_heights(spec, 200), simulate_heights(spec, 200))

    def test_seed_changes_output(self):
        a = spec_for(Family.FRW, seed=1)
        b = spec_for(Family.FRW, seed=2)
        assert generate(a).sequence != generate(b).sequence


class TestMergeHandTrace:
    """T=4, base 2, delta 0.5: the budget is exactly one flip step."""

    SPEC = GeneratorSpec(family=Family.FRW, total_len=4, delta=0.5, base_len=2, seed=7)

    def test_conditioned_heights(self):
        # First block planted to [+1, +1], so h1 = 2 and the merge must flip
        # exactly one opposite bit in the second half when one exists:
        #   second half [+1, +1]: nothing to flip        -> total 4
        #   second half [+1, -1] or [-1, +1]: flip the -1 -> total 4
        #   second half [-1, -1]: flip one of them        -> total 2
        batch = generate_batch(self.SPEC, 4000, planted_prefix=2)
        heights = batch.sum(axis=1)
        assert set(heights.tolist()) == {2, 4}
        share_of_4 = float(np.mean(heights == 4))
        assert 0.70 < share_of_4 < 0.80  # exact probability is 3/4

    def test_budget_recorded_exactly(self):
        # The signed budget equals delta * h(first block), and the first block
        # is never touched by the merge, so the record can be checked against
        # the emitted bits.
        for seed in range(40):
            out = generate(GeneratorSpec(
                family=Family.FRW, total_len=4, delta=0.5, base_len=2, seed=seed
            ))
            (record,) = out.records
            first_block = int(out.sequence.bits[:2].sum())
            assert record.requested == pytest.approx(0.5 * first_block)
            assert record.augmented == 0
            if first_block == 0:
                assert record.applied == 0
            else:
                assert 0 <= record.applied <= 1

    def test_record_count_matches_merge_count(self):
        spec = GeneratorSpec(family=Family.FRW, total_len=16, delta=0.1, base_len=2, seed=3)
        out = generate(spec)
        assert len(out.records) == 16 // 2 - 1


class TestSqrtBudgetHandTrace:
    """T=8, base 4, delta 0.5: the sqrt budget is 0.5 * sqrt(4) = 1 flip step."""

    def test_budget_is_one_step_when_first_half_leans(self):
        for seed in range(40):
            spec = GeneratorSpec(
                family=Family.OPT_FRW, total_len=8, delta=0.5, base_len=4, seed=seed
            )
            out = generate(spec)
            (record,) = out.records
            first_half = int(out.sequence.bits[:4].sum())
            if first_half == 0:
                assert record.requested == 0.0
                assert record.applied == 0
            else:
                assert record.requested == pytest.approx(math.copysign(1.0, first_half))
                assert 0 <= record.applied <= 1

    def test_top_record_sign_tracks_first_half(self):
        spec = GeneratorSpec(
            family=Family.OPT_FRW, total_len=64, delta=0.3, base_len=8, seed=11
        )
        out = generate(spec)
        top = out.records[-1]
        first_half = int(out.sequence.bits[:32].sum())
        if first_half == 0:
            assert top.requested == 0.0
        else:
            assert math.copysign(1.0, top.requested) == math.copysign(1.0, first_half)
            assert abs(top.requested) == pytest.approx(0.3 * math.sqrt(32))


class TestFamilyEquivalences:
    """Same-seed reductions between the plain and augmented families.

    In exact-count mode the augmented families measure their budget as a
    height change (each flip step moves the height by 2), so doubling delta
    reproduces the plain family's flip counts and, as long as no augmentation
    fires, the identical bit stream.  In Bernoulli mode both use the same
    per-bit probability, so equal deltas coincide.
    """

    def test_exact_count_double_delta(self):
        frw = GeneratorSpec(family=Family.FRW, total_len=256, delta=0.2, base_len=16, seed=9)
        afrw = GeneratorSpec(family=Family.AFRW, total_len=256, delta=0.4, base_len=16, seed=9)
        a, ca = generate_batch(frw, 50, with_counters=True)
        b, cb = generate_batch(afrw, 50, with_counters=True)
        assert cb.augment_events == 0
        assert np.array_equal(a, b)
        assert ca.flip_steps == cb.flip_steps

    def test_exact_count_double_delta_sqrt(self):
        opt = GeneratorSpec(
            family=Family.OPT_FRW, total_len=256, delta=0.2, base_len=16, seed=10
        )
        aofrw = GeneratorSpec(
            family=Family.AOFRW, total_len=256, delta=0.4, base_len=16, seed=10
        )
        a, _ = generate_batch(opt, 50, with_counters=True)
        b, cb = generate_batch(aofrw, 50, with_counters=True)
        assert cb.augment_events == 0
        assert np.array_equal(a, b)

    @pytest.mark.parametrize(
        "plain,augmented", [(Family.FRW, Family.AFRW), (Family.OPT_FRW, Family.AOFRW)]
    )
    def test_bernoulli_same_delta(self, plain, augmented):
        kw = dict(total_len=256, delta=0.15, base_len=16, seed=12,
                  flip_mode=FlipMode.BERNOULLI)
        a = generate_batch(GeneratorSpec(family=plain, **kw), 50)
        b = generate_batch(GeneratorSpec(family=augmented, **kw), 50)
        assert np.array_equal(a, b)


class TestAugmentation:
    # T=4, base 2, delta 0.9: when the first block leans (prob 1/2) and the
    # second half already points the same way (prob 1/4), there is nothing to
    # flip and the 0.9-step budget lands as a +-2 addition 90% of the time.
    SPEC = GeneratorSpec(family=Family.AFRW, total_len=4, delta=0.9, base_len=2, seed=77)

    def test_exhausted_budget_spills_into_additions(self):
        batch, counters = generate_batch(self.SPEC, 2000, with_counters=True)
        assert batch.dtype == np.int64
        assert counters.augment_events > 100  # expected rate ~0.11 per trial
        assert counters.augment_steps >= counters.augment_events
        values = set(np.unique(np.abs(batch)).tolist())
        assert values == {1, 3}

    def test_single_sequence_is_integer_valued(self):
        out = generate(self.SPEC)
        assert isinstance(out.sequence, IntSequence)
        assert all(v % 2 == 1 for v in np.abs(out.sequence.values).tolist())

    def test_augmentation_rare_at_modest_budget(self):
        # With a short base block the budget can still exhaust the eligible
        # bits on an extreme merge, but only a handful of times per thousands.
        spec = GeneratorSpec(family=Family.AFRW, total_len=256, delta=0.2, base_len=16, seed=8)
        batch, counters = generate_batch(spec, 200, with_counters=True)
        assert counters.augment_events <= counters.merges // 500
        assert set(np.unique(np.abs(batch)).tolist()) <= {1, 3}

    def test_default_base_length_never_augments(self):
        spec = GeneratorSpec(family=Family.AFRW, total_len=1 << 14, delta=0.1, seed=21)
        _, counters = simulate_heights(spec, 1500, with_counters=True)
        assert counters.merges > 10_000
        assert counters.augment_events == 0


class TestEntropyConditioned:
    def test_support_respects_threshold(self):
        # T=8, k=1: threshold is 4, so |height| must land in {4, 6, 8}.
        spec = GeneratorSpec(family=Family.ENTROPY_CONDITIONED, total_len=8, k=1.0, seed=6)
        heights = generate_batch(spec, 500).sum(axis=1)
        assert set(np.abs(heights).tolist()) <= {4, 6, 8}
        assert heights.min() < 0 < heights.max()

    def test_acceptance_rate_reported(self):
        spec = GeneratorSpec(family=Family.ENTROPY_CONDITIONED, total_len=8, k=1.0, seed=6)
        out = generate(spec)
        assert out.acceptance_rate is not None
        # P(|height| >= 4) = 74/256; a batch sees it within wide bounds.
        _, counters = generate_batch(spec, 2000, with_counters=True)
        assert 0.15 < counters.acceptance_rate < 0.45

    def test_k_zero_accepts_everything(self):
        spec = GeneratorSpec(family=Family.ENTROPY_CONDITIONED, total_len=64, k=0.0, seed=4)
        _, counters = generate_batch(spec, 300, with_counters=True)
        assert counters.acceptance_rate == 1.0

    def test_planted_prefix_combines_with_threshold(self):
        spec = GeneratorSpec(family=Family.ENTROPY_CONDITIONED, total_len=16, k=1.0, seed=2)
        batch = generate_batch(spec, 200, planted_prefix=6)
        assert np.all(batch[:, :6] == 1)
        assert np.all(np.abs(batch.sum(axis=1)) >= entropy_threshold(1.0, 16))

    def test_budget_exhaustion_raises(self):
        # Demanding |height| >= 992 out of 1024 is astronomically rare.
        spec = GeneratorSpec(
            family=Family.ENTROPY_CONDITIONED, total_len=1024, k=31.0, seed=1
        )
        with pytest.raises(SamplingBudgetError, match="budget"):
            simulate_heights(spec, 10)


class TestPlantedPrefix:
    def test_merge_family_prefix_survives(self):
        spec = GeneratorSpec(family=Family.FRW, total_len=16, delta=0.3, base_len=4, seed=13)
        batch = generate_batch(spec, 300, planted_prefix=8)
        assert np.all(batch[:, :8] == 1)

    def test_augmented_prefix_stays_positive(self):
        spec = GeneratorSpec(family=Family.AFRW, total_len=8, delta=0.9, base_len=2, seed=14)
        batch = generate_batch(spec, 500, planted_prefix=4)
        assert np.all(batch[:, :4] >= 1)

    def test_uniform_prefix(self):
        spec = GeneratorSpec(family=Family.UNIFORM, total_len=32, seed=15)
        batch = generate_batch(spec, 100, planted_prefix=5)
        assert np.all(batch[:, :5] == 1)
        assert set(np.unique(batch[:, 5:]).tolist()) == {-1, 1}

    def test_prefix_must_cover_whole_blocks(self):
        spec = GeneratorSpec(family=Family.FRW, total_len=16, delta=0.1, base_len=4, seed=0)
        with pytest.raises(ConfigurationError, match="base blocks"):
            generate_batch(spec, 10, planted_prefix=6)

    @pytest.mark.parametrize("prefix", [-1, 16, 99])
    def test_prefix_range(self, prefix):
        spec = GeneratorSpec(family=Family.UNIFORM, total_len=16, seed=0)
        with pytest.raises(ConfigurationError, match="planted_prefix"):
            generate_batch(spec, 10, planted_prefix=prefix)

    def test_trials_must_be_positive(self):
        spec = GeneratorSpec(family=Family.UNIFORM, total_len=16, seed=0)
        with pytest.raises(ConfigurationError, match="trials"):
            generate_batch(spec, 0)
        with pytest.raises(ConfigurationError, match="trials"):
            simulate_heights(spec, -5)


class TestHeightSimulation:
    """simulate_heights must agree in distribution with materialized rows."""

    def test_merge_family_moments_agree(self):
        spec = GeneratorSpec(family=Family.FRW, total_len=64, delta=0.3, base_len=8, seed=30)
        direct = generate_batch(spec, 4000).sum(axis=1)
        fast = simulate_heights(spec.with_total_len(64), 4000, rng=31)
        m2_direct = float(np.mean(direct.astype(np.float64) ** 2))
        m2_fast = float(np.mean(fast.astype(np.float64) ** 2))
        assert m2_direct == pytest.approx(m2_fast, rel=0.15)
        assert np.mean(np.abs(direct)) == pytest.approx(np.mean(np.abs(fast)), rel=0.15)

    def test_uniform_moments_agree(self):
        spec = GeneratorSpec(family=Family.UNIFORM, total_len=128, seed=32)
        direct = generate_batch(spec, 4000).sum(axis=1)
        fast = simulate_heights(spec, 4000, rng=33)
        assert float(np.var(direct)) == pytest.approx(float(np.var(fast)), rel=0.15)
        assert float(np.var(direct)) == pytest.approx(128.0, rel=0.15)

    def test_entropy_support_agrees(self):
        spec = GeneratorSpec(family=Family.ENTROPY_CONDITIONED, total_len=8, k=1.0, seed=34)
        direct = set(np.abs(generate_batch(spec, 400).sum(axis=1)).tolist())
        fast = set(np.abs(simulate_heights(spec, 400, rng=35)).tolist())
        assert direct == fast == {4, 6, 8}

    def test_parity_matches_length(self):
        for family in MERGE_FAMILIES:
            spec = spec_for(family, total_len=32, seed=36)
            heights = simulate_heights(spec, 100)
            assert np.all(heights % 2 == 0)


class TestBatchIteration:
    def test_chunks_cover_trials(self):
        spec = spec_for(Family.FRW, total_len=32, seed=50)
        chunks = list(iter_generate_batches(spec, 250, chunk=100))
        assert [c.shape[0] for c in chunks] == [100, 100, 50]
        assert all(c.shape[1] == 32 for c in chunks)

    def test_iteration_is_deterministic(self):
        spec = spec_for(Family.OPT_FRW, total_len=64, seed=51)
        a = np.concatenate(list(iter_generate_batches(spec, 300, chunk=128)))
        b = np.concatenate(list(iter_generate_batches(spec, 300, chunk=128)))
        assert np.array_equal(a, b)

    def test_uniform_chunking_matches_single_shot(self):
        spec = GeneratorSpec(family=Family.UNIFORM, total_len=64, seed=52)
        chunked = np.concatenate(list(iter_generate_batches(spec, 300, chunk=128)))
        assert np.array_equal(chunked, generate_batch(spec, 300))


class TestFrontEnds:
    CASES = [
        (gen_uniform, Family.UNIFORM),
        (gen_frw, Family.FRW),
        (gen_opt_frw, Family.OPT_FRW),
        (gen_afrw, Family.AFRW),
        (gen_aofrw, Family.AOFRW),
        (gen_entropy_conditioned, Family.ENTROPY_CONDITIONED),
    ]

    @pytest.mark.parametrize("front,family", CASES)
    def test_accepts_matching_family(self, front, family):
        out = front(spec_for(family, total_len=32, seed=60))
        expect_int = family in (Family.AFRW, Family.AOFRW)
        assert isinstance(out.sequence, IntSequence if expect_int else BitSequence)
        assert len(out.sequence) == 32

    @pytest.mark.parametrize("front,family", CASES)
    def test_rejects_other_families(self, front, family):
        other = Family.UNIFORM if family is not Family.UNIFORM else Family.FRW
        with pytest.raises(ConfigurationError, match="family"):
            front(spec_for(other, total_len=32))

    def test_merge_families_report_records(self):
        out = gen_frw(spec_for(Family.FRW, total_len=64, seed=61))
        assert len(out.records) == 64 // 8 - 1
        assert all(r.augmented == 0 for r in out.records)


class TestUniformNull:
    def test_columns_are_balanced(self):
        spec = GeneratorSpec(family=Family.UNIFORM, total_len=8, seed=70)
        batch = generate_batch(spec, 4000)
        assert set(np.unique(batch).tolist()) == {-1, 1}
        assert np.max(np.abs(batch.mean(axis=0))) < 0.1


@settings(max_examples=30, deadline=None)
@given(
    family=st.sampled_from(MERGE_FAMILIES),
    delta=st.floats(min_value=0.0, max_value=0.6),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_top_merge_record_tracks_first_half(family, delta, seed):
    """The top-level budget is a pure function of the final first-half height.

    The first half of the sequence is never modified after the top merge is
    planned, so the emitted bits let us recompute the signed budget exactly.
    """
    spec = GeneratorSpec(family=family, total_len=16, delta=delta, base_len=4, seed=seed)
    out = generate(spec)
    top = out.records[-1]
    assert len(out.records) == 3
    first_half = int(np.asarray(out.sequence.values)[:8].sum())
    if family is Family.FRW:
        expected = delta * first_half
    elif family is Family.AFRW:
        expected = delta * first_half / 2.0
    else:
        scale = math.sqrt(8) * (1.0 if family is Family.OPT_FRW else 0.5)
        expected = 0.0 if first_half == 0 else math.copysign(delta * scale, first_half)
    assert top.requested == pytest.approx(expected)
    if first_half == 0:
        assert top.applied == 0 and top.augmented == 0


@settings(max_examples=25, deadline=None)
@given(
    family=st.sampled_from([Family.FRW, Family.OPT_FRW]),
    delta=st.floats(min_value=0.0, max_value=0.9),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_plain_families_stay_binary(family, delta, seed):
    spec = GeneratorSpec(family=family, total_len=32, delta=delta, base_len=4, seed=seed)
    batch = generate_batch(spec, 8)
    assert batch.dtype == np.int8
    assert np.all(np.abs(batch) == 1)
