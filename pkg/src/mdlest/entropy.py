"""Order-q conditional empirical entropy with O(q) single-symbol updates.

The coding length assigned to a symbol sequence is N times the plug-in
conditional entropy of each symbol given its q predecessors, with contexts
taken circularly so that every position contributes exactly one count. Two
running sums make the entropy incrementally updatable: S over n*log2(n) of
the (context, symbol) cells and T over the same of the context totals; the
total coding length in bits is T - S.

Counts are kept in a dense (contexts x alphabet) table when the context space
is small and in dictionaries otherwise. The compensated accumulators keep the
running sums within a few ulps of an exact recomputation across millions of
updates.
"""

from __future__ import annotations

import math

import numpy as np

from .validation import as_int_vector

DENSE_LIMIT = 4096


def _nlog2n_table(n: int) -> np.ndarray:
    """k * log2(k) for k = 0..n, with the 0 log 0 = 0 convention."""
    k = np.arange(n + 1, dtype=np.float64)
    out = np.zeros(n + 1, dtype=np.float64)
    np.log2(k, out=out, where=k > 0)
    out *= k
    return out


def _neum_add(acc: list, value: float) -> None:
    # Neumaier compensated accumulation: acc = [sum, compensation]
    s = acc[0]
    t = s + value
    if abs(s) >= abs(value):
        acc[1] += (s - t) + value
    else:
        acc[1] += (value - t) + s
    acc[0] = t


class ContextCounts:
    """Occurrence counts of (length-q context, symbol) pairs over a sequence.

    Owns a copy of the symbol sequence; `apply` moves one symbol to a new
    value and updates the counts and entropy sums in O(q), `peek_delta`
    evaluates the coding-length change of such a move without committing it.
    """

    def __init__(self, symbols, q: int, alphabet_size: int | None = None, dense_limit: int = DENSE_LIMIT):
        symbols = as_int_vector(symbols, "symbols")
        n = symbols.shape[0]
        q = int(q)
        if q < 0:
            raise ValueError("context order q must be nonnegative")
        if q >= n:
            raise ValueError(f"context order q={q} must be smaller than the sequence length {n}")
        if symbols.min() < 0:
            raise ValueError("symbols must be nonnegative grid indices")
        if alphabet_size is None:
            alphabet_size = int(symbols.max()) + 1
        alphabet_size = int(alphabet_size)
        if alphabet_size < 1 or symbols.max() >= alphabet_size:
            raise ValueError("alphabet_size must exceed every symbol value")

        n_contexts = alphabet_size**q  # python int, no overflow
        if n_contexts >= 2**62:
            raise ValueError("context space alphabet_size**q is too large to index")

        self.symbols = symbols.copy()
        self.order = q
        self.alphabet_size = alphabet_size
        self.n = n
        self.n_contexts = int(n_contexts)
        self.dense = n_contexts <= dense_limit
        self.powers = alphabet_size ** np.arange(q, dtype=np.int64) if q > 0 else np.zeros(0, dtype=np.int64)
        self.nlogn = _nlog2n_table(n)

        codes = np.zeros(n, dtype=np.int64)
        for t in range(1, q + 1):
            codes += np.roll(self.symbols, t) * int(alphabet_size ** (t - 1))
        self.codes = codes

        if self.dense:
            self.table = np.zeros((self.n_contexts, alphabet_size), dtype=np.int64)
            np.add.at(self.table, (codes, self.symbols), 1)
            self.totals = np.bincount(codes, minlength=self.n_contexts).astype(np.int64)
            self.cells = None
            self.ctx_totals = None
        else:
            self.table = None
            self.totals = None
            cells: dict = {}
            ctx_totals: dict = {}
            for c, s in zip(codes.tolist(), self.symbols.tolist()):
                cells[(c, s)] = cells.get((c, s), 0) + 1
                ctx_totals[c] = ctx_totals.get(c, 0) + 1
            self.cells = cells
            self.ctx_totals = ctx_totals

        self._S = [0.0, 0.0]
        self._T = [0.0, 0.0]
        self._sums_valid = False
        self.refresh_sums(exact=True)

    # -- storage primitives ------------------------------------------------

    def _cell_add(self, ctx: int, sym: int, delta: int) -> float:
        """Mutate one (context, symbol) count; return the n log2 n change."""
        if self.dense:
            m = int(self.table[ctx, sym])
            self.table[ctx, sym] = m + delta
        else:
            key = (ctx, sym)
            m = self.cells.get(key, 0)
            mm = m + delta
            if mm:
                self.cells[key] = mm
            else:
                self.cells.pop(key, None)
        return self.nlogn[m + delta] - self.nlogn[m]

    def _total_add(self, ctx: int, delta: int) -> float:
        if self.dense:
            m = int(self.totals[ctx])
            self.totals[ctx] = m + delta
        else:
            m = self.ctx_totals.get(ctx, 0)
            mm = m + delta
            if mm:
                self.ctx_totals[ctx] = mm
            else:
                self.ctx_totals.pop(ctx, None)
        return self.nlogn[m + delta] - self.nlogn[m]

    def cell_count(self, ctx: int, sym: int) -> int:
        if self.dense:
            return int(self.table[ctx, sym])
        return self.cells.get((ctx, sym), 0)

    def context_total(self, ctx: int) -> int:
        if self.dense:
            return int(self.totals[ctx])
        return self.ctx_totals.get(ctx, 0)

    def iter_cells(self):
        """Yield (context, symbol, count) over nonzero cells."""
        if self.dense:
            ctxs, syms = np.nonzero(self.table)
            for c, s in zip(ctxs.tolist(), syms.tolist()):
                yield c, s, int(self.table[c, s])
        else:
            for (c, s), m in self.cells.items():
                yield c, s, m

    # -- entropy sums --------------------------------------------------------

    def refresh_sums(self, exact: bool = False) -> None:
        """Recompute S and T from the stored counts.

        exact=True uses fsum (used at construction and by tests); the default
        pairwise numpy sum is cheap enough to run once per sweep.
        """
        if self.dense:
            if exact:
                s_val = math.fsum(self.nlogn[self.table[self.table > 0]].tolist())
                t_val = math.fsum(self.nlogn[self.totals[self.totals > 0]].tolist())
            else:
                s_val = float(self.nlogn[self.table].sum())
                t_val = float(self.nlogn[self.totals].sum())
        else:
            s_val = math.fsum(self.nlogn[m] for m in self.cells.values())
            t_val = math.fsum(self.nlogn[m] for m in self.ctx_totals.values())
        self._S = [s_val, 0.0]
        self._T = [t_val, 0.0]
        self._sums_valid = True

    def mark_stale(self) -> None:
        """Flag the cached sums as stale after out-of-band count mutation."""
        self._sums_valid = False

    def _ensure_sums(self) -> None:
        if not self._sums_valid:
            self.refresh_sums()

    def coding_length_bits(self) -> float:
        """Total coding length T - S in bits (N times the per-symbol entropy)."""
        self._ensure_sums()
        val = (self._T[0] + self._T[1]) - (self._S[0] + self._S[1])
        return val if val > 0.0 else 0.0

    def entropy_bits(self) -> float:
        """Per-symbol conditional empirical entropy in bits."""
        return self.coding_length_bits() / self.n

    # -- single-symbol moves -------------------------------------------------

    def _affected(self, position: int, new_symbol: int):
        """(context, new context, target) triples for the q shifted positions."""
        shift = new_symbol - int(self.symbols[position])
        out = []
        for u in range(self.order):
            j = position + u + 1
            if j >= self.n:
                j -= self.n
            cj = int(self.codes[j])
            out.append((j, cj, cj + shift * int(self.powers[u]), int(self.symbols[j])))
        return out

    def peek_delta(self, position: int, new_symbol: int) -> float:
        """Coding-length change (bits) of setting symbols[position]=new_symbol.

        Applies the count moves and undoes them; the counts are unchanged on
        return and the arithmetic matches `apply` exactly.
        """
        if not 0 <= position < self.n:
            raise ValueError(f"position {position} out of range")
        old = int(self.symbols[position])
        new = int(new_symbol)
        if not 0 <= new < self.alphabet_size:
            raise ValueError("new_symbol outside the alphabet")
        if new == old:
            return 0.0
        ds = 0.0
        dt = 0.0
        c0 = int(self.codes[position])
        ds += self._cell_add(c0, old, -1)
        ds += self._cell_add(c0, new, +1)
        moves = self._affected(position, new)
        for _, cj, cj2, b in moves:
            ds += self._cell_add(cj, b, -1)
            dt += self._total_add(cj, -1)
            ds += self._cell_add(cj2, b, +1)
            dt += self._total_add(cj2, +1)
        for _, cj, cj2, b in reversed(moves):
            self._cell_add(cj, b, +1)
            self._total_add(cj, +1)
            self._cell_add(cj2, b, -1)
            self._total_add(cj2, -1)
        self._cell_add(c0, old, +1)
        self._cell_add(c0, new, -1)
        return dt - ds

    def apply(self, position: int, new_symbol: int) -> None:
        """Commit a single-symbol move, updating counts, codes, and sums."""
        if not 0 <= position < self.n:
            raise ValueError(f"position {position} out of range")
        old = int(self.symbols[position])
        new = int(new_symbol)
        if not 0 <= new < self.alphabet_size:
            raise ValueError("new_symbol outside the alphabet")
        if new == old:
            return
        self._ensure_sums()
        c0 = int(self.codes[position])

        def move_cell(ctx, sym, delta):
            m_before = self.cell_count(ctx, sym)
            self._cell_add(ctx, sym, delta)
            _neum_add(self._S, -self.nlogn[m_before])
            _neum_add(self._S, self.nlogn[m_before + delta])

        def move_total(ctx, delta):
            m_before = self.context_total(ctx)
            self._total_add(ctx, delta)
            _neum_add(self._T, -self.nlogn[m_before])
            _neum_add(self._T, self.nlogn[m_before + delta])

        move_cell(c0, old, -1)
        move_cell(c0, new, +1)
        for j, cj, cj2, b in self._affected(position, new):
            move_cell(cj, b, -1)
            move_total(cj, -1)
            move_cell(cj2, b, +1)
            move_total(cj2, +1)
            self.codes[j] = cj2
        self.symbols[position] = new

    def validate(self) -> None:
        """Check the count invariants against a fresh rebuild (test helper)."""
        rebuilt = ContextCounts(self.symbols, self.order, self.alphabet_size,
                                dense_limit=self.n_contexts + 1 if self.dense else 0)
        mine = {(c, s): m for c, s, m in self.iter_cells()}
        theirs = {(c, s): m for c, s, m in rebuilt.iter_cells()}
        if mine != theirs:
            raise AssertionError("context counts diverged from a fresh rebuild")
        total = sum(mine.values())
        if total != self.n:
            raise AssertionError(f"counts sum to {total}, expected {self.n}")
        for ctx in {c for c, _, _ in self.iter_cells()}:
            by_ctx = sum(m for c, _, m in self.iter_cells() if c == ctx)
            if by_ctx != self.context_total(ctx):
                raise AssertionError("context total does not match its cells")


def default_order(n: int, alphabet_size: int) -> int:
    """Default context order: max(1, ceil(0.5 * log_A(n)))."""
    if alphabet_size < 2:
        return 1
    return max(1, math.ceil(0.5 * math.log(n) / math.log(alphabet_size)))


def build_counts(symbols, q: int, alphabet_size: int | None = None,
                 dense_limit: int = DENSE_LIMIT) -> ContextCounts:
    """Count (length-q circular context, symbol) pairs over a sequence."""
    return ContextCounts(symbols, q, alphabet_size, dense_limit)


def h_q(counts: ContextCounts) -> float:
    """Per-symbol conditional empirical entropy in bits, in [0, log2 A]."""
    return counts.entropy_bits()


def delta_h_q(counts: ContextCounts, position: int, old_symbol: int,
              new_symbol: int) -> tuple[float, ContextCounts]:
    """Commit a single-symbol change and return the new per-symbol entropy.

    Exactly equivalent to rebuilding the counts on the modified sequence;
    only the O(q) affected cells are touched.
    """
    if not 0 <= position < counts.n:
        raise ValueError(f"position {position} out of range")
    if int(counts.symbols[position]) != int(old_symbol):
        raise ValueError(
            f"old_symbol={old_symbol} does not match the current symbol at position {position}"
        )
    counts.apply(position, int(new_symbol))
    return counts.entropy_bits(), counts
