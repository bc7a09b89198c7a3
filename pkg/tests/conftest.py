"""Shared fixtures: the 4-node reference network and pinned oracle constants.

The spectral constants below were computed with sympy (exact characteristic
polynomial of the symmetrized Laplacian) and mpmath root refinement, i.e.
independently of the numpy eigensolver the package uses. Tests treat them as
frozen expected values.
"""

import math

import numpy as np
import pytest

from gossipsim.dynamics import EventProbabilities, Schedule, T_CLIP, S_CLIP, UpdateMode
from gossipsim.graph import validate
from gossipsim.montecarlo import ExperimentConfig, InitialState

# 4-node reference selection matrix used throughout.
REF_ROWS = [
    [0.0, 0.5, 0.0, 0.5],
    [0.5, 0.0, 0.25, 0.25],
    [1.0 / 3.0, 0.0, 0.0, 2.0 / 3.0],
    [0.0, 1.0 / 3.0, 2.0 / 3.0, 0.0],
]

# Independently derived spectrum of D - (A + A^T) for REF_ROWS.
LAMBDA2 = 1.6006585939468285
LAMBDA_N = 3.574871512231014
SPECTRUM = (0.0, 1.6006585939468284, 2.8244698938221577, 3.5748715122310139)
A_STAR = 0.25

# Critical repulsion gain for T*=1/4, alpha=gamma: S(1+S) = T(1-T) = 3/16.
S_CRIT = (math.sqrt(7.0) - 2.0) / 4.0

# Infinite product prod_k (1 - 2*4^{-(k+1)}), double precision.
RHO_STAR = 0.41942244179510746


@pytest.fixture(scope="session")
def ref_matrix():
    return validate(REF_ROWS)


def make_config(matrix, *, variant="symmetric", active_rule="uniform",
                alpha=1.0 / 3.0, beta=1.0 / 3.0, gamma=1.0 / 3.0,
                t=0.25, s=0.05, schedule_t=None, schedule_s=None,
                initial=None, steps=100, trials=10, k0=0, seed=0,
                checkpoints=None, eps_agree=1e-6, big_m=None):
    """Build an ExperimentConfig with compact overrides for tests."""
    return ExperimentConfig(
        matrix=matrix,
        mode=UpdateMode(variant=variant, active_rule=active_rule),
        probabilities=EventProbabilities(alpha=alpha, beta=beta, gamma=gamma),
        schedule_t=schedule_t or Schedule.constant(t, clip=T_CLIP),
        schedule_s=schedule_s or Schedule.constant(s, clip=S_CLIP),
        initial=initial or InitialState(kind="ramp"),
        steps=steps, trials=trials, k0=k0, base_seed=seed,
        checkpoints=checkpoints, eps_agree=eps_agree, big_m=big_m,
    )


@pytest.fixture()
def ref_config(ref_matrix):
    return make_config(ref_matrix)


def rng_for(seed):
    return np.random.default_rng(seed)
