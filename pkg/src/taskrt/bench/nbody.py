"""N-Body benchmark: softened gravity over particle blocks, nested tasks.

Each timestep is one top-level task whose body spawns n^2 pairwise force
tasks plus one integration task and then taskwaits, so the timestep counts
n^2 + 2 tasks including itself. The top-level tasks declare INOUT on every
block, a super-set of their children's accesses, which chains the timesteps.
"""

from __future__ import annotations

from functools import partial

import numpy as np

from ..runtime import Runtime
from ..task_model import DependenceClause, clause_in, clause_inout
from .kernels import accumulate_forces, advance_block

DEFAULT_SEED = 0x0DDBA11
DT = 0.01
EPS2 = 0.01


class NBodyState:
    def __init__(self, particles: int, bs: int, seed: int = DEFAULT_SEED):
        rng = np.random.default_rng(seed)
        self.n = particles // bs
        self.p = [rng.random((bs, 3)) for _ in range(self.n)]
        self.v = [np.zeros((bs, 3)) for _ in range(self.n)]
        self.f = [np.zeros((bs, 3)) for _ in range(self.n)]


def task_count(particles: int, timesteps: int, bs: int) -> int:
    n = particles // bs
    return timesteps * (n**2 + 2)


def make(particles: int, bs: int, seed: int = DEFAULT_SEED) -> NBodyState:
    return NBodyState(particles, bs, seed)


def _advance_all(state: NBodyState) -> None:
    for i in range(state.n):
        advance_block(state.p[i], state.v[i], state.f[i], DT)


def _spawn_timestep(rt: Runtime, state: NBodyState) -> None:
    n = state.n
    for i in range(n):
        fi = state.f[i]
        pi = state.p[i]
        for j in range(n):
            pj = state.p[j]
            rt.spawn(
                partial(accumulate_forces, fi, pi, pj, EPS2),
                [clause_in(pi), clause_in(pj), clause_inout(fi)],
                label="nbody_force",
            )
    rt.spawn(
        partial(_advance_all, state),
        _all_block_clauses(state),
        label="nbody_update",
    )
    rt.taskwait()


def _all_block_clauses(state: NBodyState) -> list[DependenceClause]:
    blocks = state.p + state.v + state.f
    return [clause_inout(blk) for blk in blocks]


def spawn(rt: Runtime, state: NBodyState, timesteps: int) -> None:
    for _ in range(timesteps):
        rt.spawn(
            partial(_spawn_timestep, rt, state),
            _all_block_clauses(state),
            label="nbody_step",
        )


def run_sequential(state: NBodyState, timesteps: int) -> None:
    n = state.n
    for _ in range(timesteps):
        for i in range(n):
            for j in range(n):
                accumulate_forces(state.f[i], state.p[i], state.p[j], EPS2)
        _advance_all(state)


def output(state: NBodyState) -> list[np.ndarray]:
    return state.p + state.v
