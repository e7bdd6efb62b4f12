"""Exact and reference solutions: two-species BKW, Maxwellians, equilibrium prediction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SystemState
from .diagnostics import total_moments
from .errors import BetaMismatch

BETA_RTOL = 1e-10
MATCH_RTOL = 1e-10


def species_betas(masses, densities, strength) -> np.ndarray:
    """``beta_i = sum_j B_ij n_j / (m_i m_j)`` for every species."""
    m = np.asarray(masses, dtype=np.float64)
    n = np.asarray(densities, dtype=np.float64)
    B = np.asarray(strength, dtype=np.float64)
    return (B @ (n / m)) / m


def validate_bkw(masses, densities, strength, rtol: float = BETA_RTOL) -> float:
    """Common BKW rate beta; raises :class:`BetaMismatch` if the species rates differ."""
    B = np.asarray(strength, dtype=np.float64)
    if not np.array_equal(B, B.T):
        raise ValueError("strength matrix must be symmetric")
    betas = species_betas(masses, densities, B)
    spread = float((betas.max() - betas.min()) / abs(betas).max())
    if spread > rtol:
        raise BetaMismatch(betas, spread)
    return float(betas.mean())


@dataclass(frozen=True)
class BKWParams:
    masses: tuple
    densities: tuple
    strength: np.ndarray
    C: float
    beta: float
    dim: int

    @classmethod
    def build(cls, masses, densities, strength, C: float, dim: int) -> BKWParams:
        if len(masses) != 2:
            raise ValueError("the BKW solution is implemented for two species only")
        if not 0 < C < 1:
            raise ValueError("C must lie in (0, 1)")
        beta = validate_bkw(masses, densities, strength)
        return cls(tuple(map(float, masses)), tuple(map(float, densities)),
                   np.asarray(strength, dtype=np.float64), float(C), beta, int(dim))


@dataclass(frozen=True)
class MaxwellianParams:
    n: float
    m: float
    u: tuple
    T: float


def bkw_K(t, C: float, beta: float, d: int):
    """``K(t) = 1 - C exp(-2 beta (d - 1) t)``."""
    return 1.0 - C * np.exp(-2.0 * beta * (d - 1) * np.asarray(t, dtype=np.float64))


def bkw_density(t: float, v, i: int, params: BKWParams) -> np.ndarray:
    """Exact BKW density of species ``i`` at time ``t`` and velocities ``v`` (shape ``(..., d)``)."""
    d = params.dim
    m = params.masses[i]
    n = params.densities[i]
    K = float(bkw_K(t, params.C, params.beta, d))
    v = np.asarray(v, dtype=np.float64)
    v2 = np.sum(v * v, axis=-1)
    q = (1.0 - K) / (2.0 * K)
    poly = 1.0 - d * q + (m / K) * q * v2
    return n * (m / (2.0 * math.pi * K)) ** (0.5 * d) * np.exp(-m * v2 / (2.0 * K)) * poly


def maxwellian_density(v, p: MaxwellianParams, d: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    d = v.shape[-1] if d is None else d
    dv = v - np.asarray(p.u, dtype=np.float64)
    r2 = np.sum(dv * dv, axis=-1)
    return p.n * (p.m / (2.0 * math.pi * p.T)) ** (0.5 * d) * np.exp(-p.m * r2 / (2.0 * p.T))


@dataclass(frozen=True)
class EquilibriumPrediction:
    u_eq: np.ndarray
    T_eq: float
    species_independent: bool
    m_eps: tuple


def predict_equilibrium(state: SystemState) -> EquilibriumPrediction:
    """Relaxed bulk velocity and temperature from the conserved discrete moments.

    ``species_independent`` reports whether the products ``m_i eps_i`` agree,
    the condition under which every species relaxes to the same temperature.
    """
    rec = total_moments(state)
    m_eps = np.array([sp.mass * sp.epsilon for sp in state.species])
    gap = float(np.max(m_eps) - np.min(m_eps)) / m_eps[0]
    u_eq = rec.momentum / rec.mass_density
    return EquilibriumPrediction(u_eq=u_eq, T_eq=rec.temperature,
                                 species_independent=gap <= MATCH_RTOL, m_eps=tuple(m_eps))
