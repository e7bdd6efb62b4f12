"""Right-hand side of the particle ODE system."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .core import SystemState
from .errors import NonFiniteError
from .kernel import COINCIDENT_SPEED
from .score import score


def species_scores(state: SystemState, grids) -> list:
    """Score of every species evaluated at its own particle velocities."""
    return [score(ens, g, ens.velocities) for ens, g in zip(state.ensembles, grids)]


def velocity_field(state: SystemState, scores) -> list:
    """Pairwise collisional velocity field given precomputed per-species scores.

    For particle ``p`` of species ``i``::

        -sum_j sum_q w_q A_ji(v_p - v_q) (F_i(v_p)/m_i - F_j(v_q)/m_j)

    with ``A_ji(z) = (B_ij/m_i) |z|^gamma (|z|^2 I - z z^T)``.
    """
    masses = state.masses
    vel = np.ascontiguousarray(np.concatenate([e.velocities for e in state.ensembles]))
    weights = np.ascontiguousarray(np.concatenate([e.weights for e in state.ensembles]))
    counts = [e.n_particles for e in state.ensembles]
    labels = np.repeat(np.arange(len(counts), dtype=np.int64), counts)
    scaled = np.ascontiguousarray(
        np.concatenate([f / m for f, m in zip(scores, masses)])
    )
    coef = state.kernel.strength / masses[:, None]
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    out = _kernels.pair_velocity_field(
        vel, weights, offsets, scaled, np.ascontiguousarray(coef),
        float(state.kernel.gamma), COINCIDENT_SPEED**2,
    )
    bad = ~np.isfinite(out).all(axis=1)
    if bad.any():
        k = int(np.argmax(bad))
        i = int(labels[k])
        raise NonFiniteError(i, k - int(np.sum(counts[:i])))
    return np.split(out, np.cumsum(counts)[:-1])


def rhs(state: SystemState, grids) -> list:
    """Time derivative of every particle velocity, one ``(N_i, d)`` array per species."""
    return velocity_field(state, species_scores(state, grids))
