import sys

import numpy as np
import pytest

from multilandau import KernelSpec, ParticleEnsemble, SpeciesSpec, SystemState
from multilandau.initialization import build_grid, epsilon_from_h, init_particles
from multilandau.oracles import MaxwellianParams, maxwellian_density


def maxwellian_species(mass, T, u, half_width, n, dim=2, density=1.0, label=""):
    h = 2.0 * half_width / n
    spec = SpeciesSpec(mass=mass, half_width=half_width, center=u, grid_n=n,
                       epsilon=epsilon_from_h(h), label=label)
    grid = build_grid(spec, dim)
    mp = MaxwellianParams(n=density, m=mass, u=tuple(u), T=T)
    ens = init_particles(lambda v: maxwellian_density(v, mp, dim), grid, spec)
    return spec, grid, ens


def random_state(rng, dim=2, n=5, gamma=0.0, n_species=2):
    """Small multispecies state with jittered velocities and random positive weights."""
    masses = rng.uniform(0.5, 3.0, n_species)
    B = rng.uniform(0.05, 1.0, (n_species, n_species))
    B = 0.5 * (B + B.T)
    specs, grids, ens = [], [], []
    for i in range(n_species):
        L = rng.uniform(1.5, 3.0)
        u = rng.uniform(-0.5, 0.5, dim)
        spec = SpeciesSpec(mass=masses[i], half_width=L, center=u, grid_n=n,
                           epsilon=epsilon_from_h(2 * L / n), label=f"s{i}")
        grid = build_grid(spec, dim)
        vel = grid.centers + rng.normal(scale=0.3 * spec.h, size=grid.centers.shape)
        w = rng.uniform(0.1, 1.0, grid.size) * grid.cell_volume
        specs.append(spec)
        grids.append(grid)
        ens.append(ParticleEnsemble(spec, w, vel))
    state = SystemState(dim=dim, species=specs, ensembles=ens, kernel=KernelSpec(gamma, B))
    return state, grids


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
