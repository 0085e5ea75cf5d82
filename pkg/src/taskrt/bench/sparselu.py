"""Sparse blocked LU factorization benchmark, no pivoting.

The block sparsity pattern is fixed and deterministic: block (i, j) is
initially present iff i == j, or i < j and i % 3 != 0, or i > j and
j % 3 != 0. Trailing blocks that receive their first update are allocated
dense at generation time (fill-in), which makes the task count a function of
the pattern rather than a closed formula.
"""

from __future__ import annotations

from functools import partial

import numpy as np

from ..runtime import Runtime
from ..task_model import clause_in, clause_inout
from .kernels import bdiv_block, fwd_block, lu0_block, submul_block

DEFAULT_SEED = 0x10F111


def default_pattern(n: int) -> list[list[bool]]:
    return [
        [i == j or (i < j and i % 3 != 0) or (i > j and j % 3 != 0) for j in range(n)]
        for i in range(n)
    ]


def task_count(ms: int, bs: int, pattern=None) -> int:
    """Walk the elimination just for counting, fill-in included."""
    n = ms // bs
    present = [row[:] for row in (pattern or default_pattern(n))]
    count = 0
    for k in range(n):
        count += 1  # diagonal factorization
        for j in range(k + 1, n):
            if present[k][j]:
                count += 1
        for i in range(k + 1, n):
            if present[i][k]:
                count += 1
        for i in range(k + 1, n):
            if not present[i][k]:
                continue
            for j in range(k + 1, n):
                if present[k][j]:
                    count += 1
                    present[i][j] = True
    return count


class SparseLUState:
    def __init__(self, n: int, bs: int, pattern=None, seed: int = DEFAULT_SEED):
        rng = np.random.default_rng(seed)
        self.n = n
        self.bs = bs
        self.present = [row[:] for row in (pattern or default_pattern(n))]
        self.blocks: dict[tuple[int, int], np.ndarray] = {}
        for i in range(n):
            for j in range(n):
                if self.present[i][j]:
                    blk = rng.random((bs, bs))
                    if i == j:
                        # Diagonal dominance keeps pivot-free LU stable.
                        blk[np.diag_indices(bs)] += n * bs
                    self.blocks[(i, j)] = blk

    def block(self, i: int, j: int) -> np.ndarray:
        """Fetch block (i, j), allocating a dense zero block on first write."""
        blk = self.blocks.get((i, j))
        if blk is None:
            blk = np.zeros((self.bs, self.bs))
            self.blocks[(i, j)] = blk
            self.present[i][j] = True
        return blk


def make(ms: int, bs: int, pattern=None, seed: int = DEFAULT_SEED) -> SparseLUState:
    return SparseLUState(ms // bs, bs, pattern, seed)


def _walk(state: SparseLUState, apply_lu0, apply_fwd, apply_bdiv, apply_bmod) -> None:
    """One elimination sweep; the apply_* hooks either spawn or run kernels."""
    n = state.n
    present = state.present
    for k in range(n):
        diag = state.blocks[(k, k)]
        apply_lu0(diag)
        for j in range(k + 1, n):
            if present[k][j]:
                apply_fwd(diag, state.blocks[(k, j)])
        for i in range(k + 1, n):
            if present[i][k]:
                apply_bdiv(diag, state.blocks[(i, k)])
        for i in range(k + 1, n):
            if not present[i][k]:
                continue
            row_blk = state.blocks[(i, k)]
            for j in range(k + 1, n):
                if present[k][j]:
                    apply_bmod(state.block(i, j), row_blk, state.blocks[(k, j)])


def spawn(rt: Runtime, state: SparseLUState) -> None:
    _walk(
        state,
        lambda d: rt.spawn(
            partial(lu0_block, d), [clause_inout(d)], label="sparselu_lu0"
        ),
        lambda d, b: rt.spawn(
            partial(fwd_block, d, b),
            [clause_in(d), clause_inout(b)],
            label="sparselu_fwd",
        ),
        lambda d, b: rt.spawn(
            partial(bdiv_block, d, b),
            [clause_in(d), clause_inout(b)],
            label="sparselu_bdiv",
        ),
        lambda c, a, b: rt.spawn(
            partial(submul_block, c, a, b),
            [clause_in(a), clause_in(b), clause_inout(c)],
            label="sparselu_bmod",
        ),
    )


def run_sequential(state: SparseLUState) -> None:
    _walk(state, lu0_block, fwd_block, bdiv_block, submul_block)


def output(state: SparseLUState) -> list[np.ndarray]:
    return [state.blocks[key] for key in sorted(state.blocks)]
