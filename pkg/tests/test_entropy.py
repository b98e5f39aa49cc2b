from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlest.entropy import ContextCounts, build_counts, default_order, delta_h_q, h_q
from mdlest.oracles import entropy_bits_direct

symbol_sequences = st.lists(st.integers(min_value=0, max_value=3), min_size=2, max_size=40)


class TestBuildCounts:
    def test_constant_sequence(self):
        counts = build_counts([0, 0, 0, 0], 1, 1)
        assert counts.cell_count(0, 0) == 4
        assert counts.context_total(0) == 4

    def test_alternating_sequence(self):
        # circular contexts of (a,b,a,b): a is always followed by b and vice versa
        counts = build_counts([0, 1, 0, 1], 1, 2)
        assert counts.cell_count(0, 1) == 2
        assert counts.cell_count(1, 0) == 2
        assert counts.cell_count(0, 0) == 0
        assert counts.cell_count(1, 1) == 0

    def test_order_zero_is_histogram(self):
        counts = build_counts([0, 1, 1, 2, 2, 2], 0, 3)
        assert [counts.cell_count(0, a) for a in range(3)] == [1, 2, 3]

    def test_counts_sum_to_n(self):
        rng = np.random.default_rng(0)
        for q in (0, 1, 2, 3):
            symbols = rng.integers(0, 3, 25)
            counts = build_counts(symbols, q, 3)
            total = sum(m for _, _, m in counts.iter_cells())
            assert total == 25

    def test_order_must_be_below_length(self):
        with pytest.raises(ValueError):
            build_counts([0, 1, 0], 3, 2)

    def test_sparse_and_dense_agree(self):
        rng = np.random.default_rng(1)
        symbols = rng.integers(0, 4, 30)
        dense = build_counts(symbols, 2, 4, dense_limit=4096)
        sparse = build_counts(symbols, 2, 4, dense_limit=0)
        assert dense.dense and not sparse.dense
        assert dict(((c, s), m) for c, s, m in dense.iter_cells()) == dict(
            ((c, s), m) for c, s, m in sparse.iter_cells()
        )
        assert h_q(dense) == pytest.approx(h_q(sparse), abs=1e-14)


class TestEntropy:
    def test_constant_sequence_is_zero(self):
        for q in (0, 1, 2):
            assert h_q(build_counts([1] * 10, q, 2)) == 0.0

    def test_fair_coin_histogram(self):
        assert h_q(build_counts([0, 1] * 8, 0, 2)) == pytest.approx(1.0, abs=1e-12)

    def test_alternating_is_predictable(self):
        assert h_q(build_counts([0, 1] * 8, 1, 2)) == 0.0

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(2)
        for q in (0, 1, 2, 3):
            symbols = rng.integers(0, 4, 50)
            counts = build_counts(symbols, q, 4)
            assert h_q(counts) == pytest.approx(entropy_bits_direct(symbols, q), abs=1e-12)

    @given(symbol_sequences)
    @settings(max_examples=80, deadline=None)
    def test_bounds(self, seq):
        counts = build_counts(seq, min(1, len(seq) - 1), 4)
        value = h_q(counts)
        assert 0.0 <= value <= math.log2(4)

    @given(symbol_sequences.filter(lambda s: len(s) >= 4))
    @settings(max_examples=80, deadline=None)
    def test_conditioning_reduces_entropy(self, seq):
        h1 = h_q(build_counts(seq, 1, 4))
        h2 = h_q(build_counts(seq, 2, 4))
        assert h2 <= h1 + 1e-12

    def test_iid_uniform_approaches_log_alphabet(self):
        rng = np.random.default_rng(12345)
        symbols = rng.integers(0, 4, 100_000)
        assert h_q(build_counts(symbols, 2, 4)) == pytest.approx(2.0, abs=0.05)

    def test_default_order_keeps_context_space_small(self):
        for n in (16, 256, 2000, 15000):
            for a in (2, 8, 73, 201):
                q = default_order(n, a)
                assert q >= 1
                assert a**q <= math.sqrt(n) * a + 1e-9


class TestDelta:
    def test_noop_change(self):
        counts = build_counts([0, 1, 2, 0], 1, 3)
        before = h_q(counts)
        after, _ = delta_h_q(counts, 2, 2, 2)
        assert after == before

    def test_flip_on_constant_sequence(self):
        counts = build_counts([0] * 12, 1, 2)
        after, _ = delta_h_q(counts, 5, 0, 1)
        assert after > 0.0

    def test_checks_old_symbol(self):
        counts = build_counts([0, 1, 0, 1], 1, 2)
        with pytest.raises(ValueError):
            delta_h_q(counts, 0, 1, 0)

    def test_position_range(self):
        counts = build_counts([0, 1, 0, 1], 1, 2)
        with pytest.raises(ValueError):
            delta_h_q(counts, 4, 0, 1)

    @pytest.mark.parametrize("q,dense_limit", [(0, 4096), (1, 4096), (2, 4096), (3, 4096), (2, 0)])
    def test_matches_full_recomputation(self, q, dense_limit):
        rng = np.random.default_rng(q + dense_limit)
        symbols = rng.integers(0, 4, 64)
        counts = build_counts(symbols, q, 4, dense_limit=dense_limit)
        for _ in range(400):
            pos = int(rng.integers(64))
            new = int(rng.integers(4))
            got, counts = delta_h_q(counts, pos, int(counts.symbols[pos]), new)
            want = entropy_bits_direct(counts.symbols, q)
            assert got == pytest.approx(want, abs=1e-12)
        counts.validate()

    def test_peek_does_not_mutate(self):
        rng = np.random.default_rng(7)
        symbols = rng.integers(0, 3, 20)
        counts = build_counts(symbols, 2, 3)
        snapshot = dict(((c, s), m) for c, s, m in counts.iter_cells())
        h_before = h_q(counts)
        for pos in range(20):
            for new in range(3):
                delta = counts.peek_delta(pos, new)
                if new == symbols[pos]:
                    assert delta == 0.0
        assert dict(((c, s), m) for c, s, m in counts.iter_cells()) == snapshot
        assert h_q(counts) == h_before

    def test_peek_matches_commit(self):
        rng = np.random.default_rng(8)
        symbols = rng.integers(0, 3, 30)
        counts = build_counts(symbols, 1, 3)
        for _ in range(100):
            pos = int(rng.integers(30))
            new = int(rng.integers(3))
            predicted = counts.coding_length_bits() + counts.peek_delta(pos, new)
            counts.apply(pos, new)
            assert counts.coding_length_bits() == pytest.approx(predicted, abs=1e-10)

    def test_long_run_drift_stays_tiny(self):
        # compensated accumulation keeps the running sums at recompute accuracy
        rng = np.random.default_rng(9)
        symbols = rng.integers(0, 4, 64)
        counts = build_counts(symbols, 3, 4)
        for _ in range(20_000):
            pos = int(rng.integers(64))
            counts.apply(pos, int(rng.integers(4)))
        incremental = h_q(counts)
        assert incremental == pytest.approx(entropy_bits_direct(counts.symbols, 3), abs=1e-12)
