import numpy as np
import pytest

from multilandau import ParticleEnsemble, SpeciesSpec, ZeroWeightError
from multilandau.config import build_state, load_config
from multilandau.diagnostics import grid_error_norms, record, species_moments, total_moments


def test_two_particle_moments():
    sp = SpeciesSpec(mass=2.0, half_width=1.0, center=(0.0, 0.0), grid_n=2, epsilon=0.1)
    ens = ParticleEnsemble(sp, [0.5, 0.5], [[1.0, 0.0], [-1.0, 0.0]])
    m = species_moments(ens)
    assert m.number_density == 1.0 and m.mass_density == 2.0
    np.testing.assert_array_equal(m.bulk_velocity, [0.0, 0.0])
    assert m.temperature == pytest.approx(1.0)  # m <|v-u|^2> / d = 2 * 1 / 2


def test_zero_weight():
    sp = SpeciesSpec(mass=1.0, half_width=1.0, center=(0.0, 0.0), grid_n=2, epsilon=0.1)
    with pytest.raises(ZeroWeightError):
        species_moments(ParticleEnsemble(sp, np.zeros(2), np.zeros((2, 2))))


def test_bkw_initial_moments():
    state, grids = build_state(load_config("bkw_example1"))
    rec = record(state, grids)
    assert rec.mass_density == pytest.approx(3.0, rel=1e-6)
    assert rec.temperature == pytest.approx(1.0, rel=1e-5)
    assert np.abs(rec.momentum).max() < 1e-14
    assert rec.kinetic_energy == pytest.approx(4.0, rel=1e-5)  # sum_i m_i n_i d T_i
    assert rec.entropy == pytest.approx(sum(rec.species_entropy))
    for p in rec.per_species:
        assert p.mass_density == pytest.approx(p.number_density * (p.mass_density / p.number_density))
    u = sum(p.mass_density * p.bulk_velocity for p in rec.per_species) / rec.mass_density
    np.testing.assert_array_equal(u, rec.bulk_velocity)


def test_total_moments_leaves_entropy_unset():
    state, _ = build_state(load_config("coulomb_example1"))
    assert np.isnan(total_moments(state).entropy)


def test_error_norms_hand_values():
    e = grid_error_norms([1.0, 2.0, 3.0], [1.0, 1.0, 1.0], 0.5)
    assert e["L1"] == pytest.approx(1.5)
    assert e["L2"] == pytest.approx(np.sqrt(0.5 * 5))
    assert e["Linf"] == 2.0
    assert e["rel_L1"] == pytest.approx(1.0)
    assert e["rel_Linf"] == 2.0


def _ens(w, v, m):
    sp = SpeciesSpec(mass=m, half_width=1.0, center=(0.0, 0.0), grid_n=2, epsilon=0.1)
    return ParticleEnsemble(sp, w, v)


def test_single_particle_moments():
    m = species_moments(_ens([2.0], [[1.0, 0.0]], 3.0))
    assert (m.number_density, m.mass_density, m.temperature) == (2.0, 6.0, 0.0)
    np.testing.assert_array_equal(m.bulk_velocity, [1.0, 0.0])


def test_symmetric_pair_temperature_half():
    m = species_moments(_ens([0.5, 0.5], [[1.0, 0.0], [-1.0, 0.0]], 1.0))
    assert m.temperature == 0.5


def test_grid_maxwellian_temperature():
    from conftest import maxwellian_species

    _, _, ens = maxwellian_species(2.0, 0.25, (0.0, 0.0), 6 * np.sqrt(0.125), 40)
    assert abs(species_moments(ens).temperature - 0.25) <= 1e-4


def test_coulomb_initial_momentum():
    state, _ = build_state(load_config("coulomb_example1"))
    np.testing.assert_allclose(total_moments(state).momentum, [0.25, 0.25], atol=1e-4)


def test_bkw_record_totals_and_purity():
    state, grids = build_state(load_config("bkw_example1"))
    a, b = record(state, grids), record(state, grids)
    assert a.number_density == pytest.approx(2.0, abs=1e-3)
    assert a.temperature == pytest.approx(1.0, abs=1e-3)
    assert np.abs(a.momentum).max() <= 1e-3
    assert a.entropy == b.entropy and np.array_equal(a.momentum, b.momentum)


def _two_species(rng):
    from conftest import random_state

    return random_state(rng, n=4)[0]


def test_translation_and_galilean_identity(rng):
    state = _two_species(rng)
    shift = np.array([0.7, -1.1])
    moved = state.with_velocities([e.velocities + shift for e in state.ensembles], 0.0)
    a, b = total_moments(state), total_moments(moved)
    np.testing.assert_allclose(b.bulk_velocity, a.bulk_velocity + shift, rtol=1e-12, atol=1e-12)
    for p, q in zip(a.per_species, b.per_species):
        assert q.temperature == pytest.approx(p.temperature, rel=1e-12)
    for r in (a, b):
        decomposed = r.mass_density * r.bulk_velocity @ r.bulk_velocity + state.dim * r.number_density * r.temperature
        assert r.kinetic_energy == pytest.approx(decomposed, rel=1e-12)


def test_single_species_totals_match(rng):
    from multilandau import KernelSpec, SystemState

    state = _two_species(rng)
    one = SystemState(2, state.species[:1], state.ensembles[:1], KernelSpec(0.0, [[1.0]]))
    t = total_moments(one)
    s = t.per_species[0]
    np.testing.assert_allclose(t.bulk_velocity, s.bulk_velocity, rtol=1e-15, atol=1e-16)
    assert t.temperature == pytest.approx(s.temperature, rel=1e-14)


def test_error_norms_identity_and_zero():
    from conftest import maxwellian_species
    from multilandau.diagnostics import error_norms
    from multilandau.score import blob_density

    spec, grid, ens = maxwellian_species(1.0, 1.0, (0.0, 0.0), 5.0, 12)
    zero = error_norms(ens, grid, lambda v: blob_density(ens, v))
    assert all(v == 0.0 for v in zero.values())
    tiny = ParticleEnsemble(spec, ens.weights * 1e-200, ens.velocities)
    rel = error_norms(tiny, grid, lambda v: blob_density(ens, v))
    for k in ("rel_L1", "rel_L2", "rel_Linf"):
        assert rel[k] == pytest.approx(1.0, abs=1e-12)


def test_error_norms_monotone(rng):
    f = rng.random(50)
    g1 = f + 0.1 * rng.standard_normal(50)
    g2 = f + 1.5 * (g1 - f)
    a, b = grid_error_norms(g1, f, 0.1), grid_error_norms(g2, f, 0.1)
    assert all(a[k] <= b[k] for k in a)
