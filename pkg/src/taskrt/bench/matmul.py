"""Blocked matrix multiply benchmark: C += A @ B over square blocks.

Task (i, j, k) reads A block (i, k) and B block (k, j) and updates C block
(i, j), so all tasks sharing an output block form one chain over k and the
chains are mutually independent.
"""

from __future__ import annotations

from functools import partial

import numpy as np

from ..runtime import Runtime
from ..task_model import clause_in, clause_inout
from .kernels import matmul_block

DEFAULT_SEED = 0x5EED


class MatmulState:
    def __init__(self, n: int, bs: int, seed: int = DEFAULT_SEED):
        rng = np.random.default_rng(seed)
        self.n = n
        self.a = [[rng.random((bs, bs)) for _ in range(n)] for _ in range(n)]
        self.b = [[rng.random((bs, bs)) for _ in range(n)] for _ in range(n)]
        self.c = [[np.zeros((bs, bs)) for _ in range(n)] for _ in range(n)]


def task_count(ms: int, bs: int) -> int:
    n = ms // bs
    return n**3


def make(ms: int, bs: int, seed: int = DEFAULT_SEED) -> MatmulState:
    return MatmulState(ms // bs, bs, seed)


def spawn(rt: Runtime, state: MatmulState) -> None:
    n = state.n
    for i in range(n):
        for j in range(n):
            cij = state.c[i][j]
            for k in range(n):
                aik = state.a[i][k]
                bkj = state.b[k][j]
                rt.spawn(
                    partial(matmul_block, cij, aik, bkj),
                    [clause_in(aik), clause_in(bkj), clause_inout(cij)],
                    label="matmul",
                )


def run_sequential(state: MatmulState) -> None:
    """Apply the same kernel sequence in submission order, inline."""
    n = state.n
    for i in range(n):
        for j in range(n):
            for k in range(n):
                matmul_block(state.c[i][j], state.a[i][k], state.b[k][j])


def output(state: MatmulState) -> list[np.ndarray]:
    return [blk for row in state.c for blk in row]
