"""Double-precision block kernels shared by the benchmarks.

Every kernel mutates its output argument in place with a fixed internal
operation order. Two executions that apply the same kernel sequence per
output block therefore produce bitwise-identical results, which is what the
parallel-vs-sequential verification relies on.
"""

from __future__ import annotations

import numpy as np


def matmul_block(c: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
    c += a @ b


def submul_block(c: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
    c -= a @ b


def lu0_block(d: np.ndarray) -> None:
    """In-place LU factorization of a square block, no pivoting.

    Afterwards d holds the unit-lower factor below the diagonal and the
    upper factor on and above it.
    """
    n = d.shape[0]
    for k in range(n - 1):
        d[k + 1 :, k] /= d[k, k]
        d[k + 1 :, k + 1 :] -= np.outer(d[k + 1 :, k], d[k, k + 1 :])


def fwd_block(diag: np.ndarray, b: np.ndarray) -> None:
    """Solve L @ X = B in place, L being the unit-lower factor in diag."""
    n = diag.shape[0]
    for k in range(n - 1):
        b[k + 1 :, :] -= np.outer(diag[k + 1 :, k], b[k, :])


def bdiv_block(diag: np.ndarray, b: np.ndarray) -> None:
    """Solve X @ U = B in place, U being the upper factor in diag."""
    n = diag.shape[0]
    for k in range(n):
        b[:, k] /= diag[k, k]
        if k + 1 < n:
            b[:, k + 1 :] -= np.outer(b[:, k], diag[k, k + 1 :])


def accumulate_forces(
    fi: np.ndarray, pi: np.ndarray, pj: np.ndarray, eps2: float
) -> None:
    """Add the softened pairwise attraction of block j onto block i's forces.

    Zero-distance pairs (the self block) contribute nothing because the
    displacement is zero while the softened denominator stays finite.
    """
    d = pj[np.newaxis, :, :] - pi[:, np.newaxis, :]
    inv = ((d * d).sum(axis=2) + eps2) ** -1.5
    fi += (d * inv[:, :, np.newaxis]).sum(axis=1)


def advance_block(
    p: np.ndarray, v: np.ndarray, f: np.ndarray, dt: float
) -> None:
    """Integrate one particle block and clear its force accumulator."""
    v += f * dt
    p += v * dt
    f[:] = 0.0
