"""Macroscopic moments, discrete entropy and error norms of particle states."""

from __future__ import annotations

import numpy as np

from .core import MomentRecord, ParticleEnsemble, SpeciesMoments, SpeciesSpec, SystemState
from .errors import ZeroWeightError
from .score import QuadratureGrid, blob_density, discrete_entropy


def species_moments(ensemble: ParticleEnsemble, spec: SpeciesSpec | None = None) -> SpeciesMoments:
    """Number density, mass density, bulk velocity and temperature of one species."""
    spec = ensemble.species if spec is None else spec
    w = ensemble.weights
    v = ensemble.velocities
    n = float(w.sum())
    if n == 0.0:
        raise ZeroWeightError(f"species '{spec.label}' has zero total weight")
    d = v.shape[1]
    u = (w @ v) / n
    T = spec.mass / (d * n) * float(w @ np.sum((v - u) ** 2, axis=1))
    return SpeciesMoments(number_density=n, mass_density=spec.mass * n, bulk_velocity=u, temperature=T)


def total_moments(state: SystemState) -> MomentRecord:
    """Species and total moments (entropy left as NaN)."""
    per = tuple(species_moments(e, s) for e, s in zip(state.ensembles, state.species))
    d = state.dim
    n = sum(p.number_density for p in per)
    rho = sum(p.mass_density for p in per)
    u = sum(p.mass_density * p.bulk_velocity for p in per) / rho
    momentum = np.zeros(d)
    energy = 0.0
    thermal = 0.0
    for sp, ens in zip(state.species, state.ensembles):
        w, v = ens.weights, ens.velocities
        momentum = momentum + sp.mass * (w @ v)
        energy += sp.mass * float(w @ np.sum(v * v, axis=1))
        thermal += sp.mass * float(w @ np.sum((v - u) ** 2, axis=1))
    return MomentRecord(
        time=state.time,
        per_species=per,
        number_density=n,
        mass_density=rho,
        momentum=momentum,
        bulk_velocity=u,
        kinetic_energy=energy,
        temperature=thermal / (d * n),
    )


def record(state: SystemState, grids) -> MomentRecord:
    """Full moment record including the total discrete regularized entropy."""
    base = total_moments(state)
    ent = tuple(discrete_entropy(e, g) for e, g in zip(state.ensembles, grids))
    return MomentRecord(**{**base.__dict__, "entropy": float(sum(ent)), "species_entropy": ent})


def grid_error_norms(approx, exact, cell_volume: float) -> dict:
    """Discrete L1, L2, Linf errors and their relative versions on a uniform grid."""
    approx = np.asarray(approx, dtype=np.float64).reshape(-1)
    exact = np.asarray(exact, dtype=np.float64).reshape(-1)
    diff = np.abs(approx - exact)
    ref = np.abs(exact)
    out = {
        "L1": cell_volume * diff.sum(),
        "L2": np.sqrt(cell_volume * np.sum(diff**2)),
        "Linf": diff.max(),
    }
    norms = {
        "L1": cell_volume * ref.sum(),
        "L2": np.sqrt(cell_volume * np.sum(ref**2)),
        "Linf": ref.max(),
    }
    for key in ("L1", "L2", "Linf"):
        out[f"rel_{key}"] = out[key] / norms[key]
    return {k: float(v) for k, v in out.items()}


def error_norms(ensemble: ParticleEnsemble, grid: QuadratureGrid, exact) -> dict:
    """Errors of the blob reconstruction against ``exact`` on the species grid.

    ``exact`` is a callable taking an ``(M, d)`` array of points.
    """
    pts = grid.centers
    return grid_error_norms(blob_density(ensemble, pts), exact(pts), grid.cell_volume)
