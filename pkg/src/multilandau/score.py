"""Mollified score, discrete regularized entropy and blob reconstruction.

The mollifier is the Gaussian ``psi(x) = (2 pi eps)^(-d/2) exp(-|x|^2 / 2 eps)``.
Integrals over velocity space use the midpoint rule on the species' frozen
initial grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import ParticleEnsemble
from .errors import ZeroWeightError

# Below this the linear-scale grid density is recomputed in log space.
_LINEAR_FLOOR = 1e-280


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor grid of element midpoints of ``[c - L, c + L]^d``.

    ``axes[a]`` holds the ``n`` midpoint coordinates along axis ``a``; the
    flattened ``centers`` are in lexicographic (C / "ij") order, matching the
    particle ordering produced by :func:`multilandau.initialization.init_particles`.
    """

    axes: tuple
    h: float

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def centers(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def _log_norm(eps: float, d: int) -> float:
    return -0.5 * d * math.log(2.0 * math.pi * eps)


def _check_weight(ensemble: ParticleEnsemble):
    if not np.any(ensemble.weights > 0):
        raise ZeroWeightError(f"species '{ensemble.species.label}' has zero total weight")


def log_blob_density(ensemble: ParticleEnsemble, eval_points) -> np.ndarray:
    """Logarithm of the blob density ``sum_r w_r psi(x - v_r)`` at each point.

    Evaluated with a max-shifted log-sum-exp, so the result stays finite far
    from the particles where the linear sum would underflow.
    """
    _check_weight(ensemble)
    pts = np.ascontiguousarray(np.atleast_2d(eval_points), dtype=np.float64)
    eps = ensemble.species.epsilon
    out = _kernels.log_density_lse(ensemble.weights, ensemble.velocities, eps, pts)
    return out + _log_norm(eps, pts.shape[1])


def blob_density(ensemble: ParticleEnsemble, eval_points) -> np.ndarray:
    """Reconstructed density ``sum_p w_p psi(x - v_p)``; may underflow to 0."""
    pts = np.ascontiguousarray(np.atleast_2d(eval_points), dtype=np.float64)
    eps = ensemble.species.epsilon
    out = _kernels.density_direct(ensemble.weights, ensemble.velocities, eps, pts)
    return out * math.exp(_log_norm(eps, pts.shape[1]))


def grid_log_density(ensemble: ParticleEnsemble, grid: QuadratureGrid):
    """Blob density and its logarithm at every grid node, shaped like the grid.

    Uses the separable Gaussian factorisation on the tensor grid; nodes whose
    linear-scale value falls below ``1e-280`` are recomputed by log-sum-exp.
    """
    _check_weight(ensemble)
    eps = ensemble.species.epsilon
    d = grid.dim
    lognorm = _log_norm(eps, d)
    raw = _kernels.grid_density(ensemble.weights, ensemble.velocities, eps, grid.axes)
    with np.errstate(divide="ignore"):
        logrho = np.log(raw) + lognorm
    rho = raw * math.exp(lognorm)
    small = raw < _LINEAR_FLOOR
    if np.any(small):
        idx = np.nonzero(small.ravel())[0]
        pts = grid.centers[idx]
        lse = _kernels.log_density_lse(ensemble.weights, ensemble.velocities, eps, pts) + lognorm
        flat_log = logrho.reshape(-1)
        flat_rho = rho.reshape(-1)
        flat_log[idx] = lse
        flat_rho[idx] = np.exp(lse)
    return rho, logrho


def score_from_log_density(grid: QuadratureGrid, logrho, eps: float, query) -> np.ndarray:
    q = np.ascontiguousarray(np.atleast_2d(query), dtype=np.float64)
    raw = _kernels.grid_score(grid.axes, np.ascontiguousarray(logrho), eps, q)
    return raw * (grid.cell_volume * math.exp(_log_norm(eps, grid.dim)))


def score(ensemble: ParticleEnsemble, grid: QuadratureGrid, query) -> np.ndarray:
    """Midpoint-rule approximation of the gradient of the entropy variation.

    ``F(v) = h^d sum_h grad psi(v - v_h) log(blob density at v_h)``, with the
    grid log-densities computed once and shared by all query points.
    """
    _, logrho = grid_log_density(ensemble, grid)
    return score_from_log_density(grid, logrho, ensemble.species.epsilon, query)


def discrete_entropy(ensemble: ParticleEnsemble, grid: QuadratureGrid) -> float:
    """Midpoint-rule regularized entropy ``h^d sum_h f(v_h) log f(v_h)`` of the blob density."""
    rho, logrho = grid_log_density(ensemble, grid)
    return entropy_from_density(grid, rho, logrho)


def entropy_from_density(grid: QuadratureGrid, rho, logrho) -> float:
    terms = np.where(rho > 0, rho * logrho, 0.0)
    return float(grid.cell_volume * terms.sum())
