"""Grids, initial particle ensembles and regularization parameters."""

from __future__ import annotations

import numpy as np

from .core import ParticleEnsemble, SpeciesSpec
from .errors import ZeroWeightError
from .score import QuadratureGrid

EPS_COEFF = 0.64
EPS_POWER = 1.98


def build_grid(spec: SpeciesSpec, dim: int | None = None) -> QuadratureGrid:
    """Element midpoints of ``[c - L, c + L]^d`` split into ``n`` cells per axis."""
    d = spec.dim if dim is None else dim
    n = spec.grid_n
    h = spec.h
    center = np.broadcast_to(np.asarray(spec.center, dtype=np.float64), (d,))
    offsets = -spec.half_width + h * (np.arange(n) + 0.5)
    axes = tuple(np.ascontiguousarray(center[a] + offsets) for a in range(d))
    return QuadratureGrid(axes=axes, h=h)


def init_particles(f0, grid: QuadratureGrid, spec: SpeciesSpec) -> ParticleEnsemble:
    """Place one particle per grid cell with midpoint-rule weight ``h^d f0(v_h)``.

    ``f0`` is called once with the ``(M, d)`` array of centers. Zero-weight
    particles are kept so particles stay aligned with the grid.
    """
    centers = grid.centers
    values = np.asarray(f0(centers), dtype=np.float64).reshape(-1)
    if values.shape[0] != centers.shape[0]:
        raise ValueError("initial density returned the wrong number of values")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValueError("initial density must be finite and nonnegative on the grid")
    weights = grid.cell_volume * values
    if not np.any(weights > 0):
        raise ZeroWeightError(f"initial density vanishes on the grid of '{spec.label}'")
    return ParticleEnsemble(species=spec, weights=weights, velocities=centers)


def epsilon_from_h(h: float, coeff: float = EPS_COEFF, power: float = EPS_POWER) -> float:
    if not h > 0:
        raise ValueError("h must be positive")
    return coeff * h**power


def constrained_half_width(m_1, m_2, L_1, power: float = EPS_POWER, n_1=None, n_2=None) -> float:
    """Half-width for species 2 that gives ``m_1 eps_1 == m_2 eps_2``.

    With equal grid resolution this is ``(m_1/m_2)^(1/power) L_1``; when the
    subdivision counts differ the mesh ratio ``n_2/n_1`` is folded in.
    """
    if not (m_1 > 0 and m_2 > 0 and L_1 > 0):
        raise ValueError("masses and half-width must be positive")
    L_2 = (m_1 / m_2) ** (1.0 / power) * L_1
    if n_1 is not None and n_2 is not None and n_1 != n_2:
        L_2 *= n_2 / n_1
    return L_2
