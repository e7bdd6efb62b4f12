"""Shared state types for multispecies particle simulations.

All arrays are float64. A :class:`SystemState` is treated as immutable once
built; integrators return new states that share the (read-only) weight arrays
of their predecessor.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class SpeciesSpec:
    """Physical and numerical parameters of one species.

    Parameters
    ----------
    mass : float
        Particle mass.
    half_width : float
        Half-width ``L`` of the square velocity domain ``[c - L, c + L]^d``.
    center : array_like
        Domain center ``c``.
    grid_n : int
        Subdivisions per axis; the species carries ``grid_n**d`` particles.
    epsilon : float
        Width (variance per axis) of the Gaussian mollifier.
    label : str
    """

    mass: float
    half_width: float
    center: tuple
    grid_n: int
    epsilon: float
    label: str = ""

    def __post_init__(self):
        center = tuple(float(c) for c in np.asarray(self.center, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "half_width", float(self.half_width))
        object.__setattr__(self, "grid_n", int(self.grid_n))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.grid_n

    @property
    def dim(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class ParticleEnsemble:
    """Weighted Dirac particles of one species. Weights never change."""

    species: SpeciesSpec
    weights: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.flags.writeable:
            w = w.copy()
            w.setflags(write=False)
        v = np.array(self.velocities, dtype=np.float64, ndmin=2)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "velocities", v)

    @property
    def n_particles(self) -> int:
        return self.weights.shape[0]

    def with_velocities(self, velocities) -> ParticleEnsemble:
        return replace(self, velocities=velocities)


@dataclass(frozen=True)
class KernelSpec:
    """Collision kernel exponent and the symmetric interaction-strength matrix."""

    gamma: float
    strength: np.ndarray

    def __post_init__(self):
        b = np.array(self.strength, dtype=np.float64, ndmin=2)
        b.setflags(write=False)
        object.__setattr__(self, "strength", b)


@dataclass(frozen=True)
class SystemState:
    dim: int
    species: tuple
    ensembles: tuple
    kernel: KernelSpec
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "ensembles", tuple(self.ensembles))

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def masses(self) -> np.ndarray:
        return np.array([sp.mass for sp in self.species])

    def with_velocities(self, velocities, time) -> SystemState:
        ens = tuple(e.with_velocities(v) for e, v in zip(self.ensembles, velocities))
        return replace(self, ensembles=ens, time=float(time))


@dataclass(frozen=True)
class SpeciesMoments:
    number_density: float
    mass_density: float
    bulk_velocity: np.ndarray
    temperature: float


@dataclass(frozen=True)
class MomentRecord:
    """Per-species and total macroscopic quantities at one instant."""

    time: float
    per_species: tuple
    number_density: float
    mass_density: float
    momentum: np.ndarray
    bulk_velocity: np.ndarray
    kinetic_energy: float
    temperature: float
    entropy: float = float("nan")
    species_entropy: tuple = field(default=())


def validate_state(state: SystemState) -> list[str]:
    """Return every violated state invariant; an empty list means the state is valid."""
    problems = []
    d = state.dim
    s = len(state.species)
    if d not in (2, 3):
        problems.append(f"dim: must be 2 or 3, got {d}")
    if s < 1:
        problems.append("species: at least one species required")
    if len(state.ensembles) != s:
        problems.append(f"ensembles: count {len(state.ensembles)} != species count {s}")

    B = state.kernel.strength
    if B.shape != (s, s):
        problems.append(f"kernel.strength: shape {B.shape} != ({s}, {s})")
    else:
        if not np.array_equal(B, B.T):
            problems.append("kernel.strength: strength symmetry violated (B_ij != B_ji)")
        if np.any(B < 0) or not np.all(np.isfinite(B)):
            problems.append("kernel.strength: entries must be finite and nonnegative")
    if not (-d - 1 <= state.kernel.gamma <= 1):
        problems.append(f"kernel.gamma: {state.kernel.gamma} outside [-d-1, 1]")

    for i, sp in enumerate(state.species):
        tag = f"species[{i}]"
        if not sp.mass > 0:
            problems.append(f"{tag}.mass: must be > 0")
        if not sp.half_width > 0:
            problems.append(f"{tag}.half_width: must be > 0")
        if not sp.grid_n >= 2:
            problems.append(f"{tag}.grid_n: must be >= 2")
        if not sp.epsilon > 0:
            problems.append(f"{tag}.epsilon: must be > 0")
        if sp.dim != d:
            problems.append(f"{tag}.center: dimension {sp.dim} != state dim {d}")

    for i, ens in enumerate(state.ensembles[:s]):
        tag = f"ensembles[{i}]"
        sp = state.species[i]
        if ens.species != sp:
            problems.append(f"{tag}.species: does not reference species[{i}]")
        n = ens.weights.shape[0]
        if ens.velocities.shape != (n, d):
            problems.append(f"{tag}.velocities: shape {ens.velocities.shape} != ({n}, {d})")
        expected = sp.grid_n ** d
        if n != expected:
            problems.append(f"{tag}: particle count {n} != grid_n**d = {expected}")
        if np.any(ens.weights < 0) or not np.all(np.isfinite(ens.weights)):
            problems.append(f"{tag}.weights: must be finite and nonnegative")
    return problems
