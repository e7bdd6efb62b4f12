"""Landau collision kernel ``A_ji(z) = (B_ij / m_i) |z|^gamma (|z|^2 I - z z^T)``."""

from __future__ import annotations

import numpy as np

from .core import KernelSpec

#: Relative speeds below this are treated as coincident particles (zero kernel).
COINCIDENT_SPEED = 1e-12


def _projector_part(z, gamma):
    z = np.asarray(z, dtype=np.float64)
    d = z.shape[-1]
    r2 = float(z @ z)
    if r2 < COINCIDENT_SPEED**2:
        return np.zeros((d, d))
    base = r2 * np.eye(d) - np.outer(z, z)
    if gamma != 0:
        base = base * r2 ** (0.5 * gamma)
    return base


def eval_kernel(z, gamma: float, strength: float, mass: float) -> np.ndarray:
    """Evaluate the d x d kernel matrix acting on species ``i`` due to species ``j``.

    Parameters
    ----------
    z : array_like, shape (d,)
        Relative velocity ``v - v_*``.
    gamma : float
        Kernel exponent (0 Maxwell, -3 Coulomb).
    strength : float
        Interaction strength ``B_ij``.
    mass : float
        Mass ``m_i`` of the species being acted on.

    Returns
    -------
    ndarray, shape (d, d)
        Symmetric positive semidefinite matrix with ``z`` in its null space.
        Zero for ``|z| < 1e-12`` regardless of ``gamma``.
    """
    return (strength / mass) * _projector_part(z, gamma)


def eval_kernel_pair(z, kernel: KernelSpec, masses, i: int, j: int) -> np.ndarray:
    """Kernel ``A_ji(z)`` for species pair ``(i, j)``.

    The lower-index ordering is evaluated directly and the other ordering is
    obtained by a single mass-ratio scaling, so ``A_ij == (m_i/m_j) * A_ji``
    holds bit for bit whenever ``i < j``.
    """
    B = kernel.strength
    if i <= j:
        return eval_kernel(z, kernel.gamma, B[i, j], masses[i])
    ratio = masses[j] / masses[i]
    return ratio * eval_kernel_pair(z, kernel, masses, j, i)
