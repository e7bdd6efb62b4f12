from dataclasses import replace

import numpy as np
import pytest

from multilandau import KernelSpec

from multilandau import NonConvergence
from multilandau.config import build_state, load_config, with_grid_n
from multilandau.diagnostics import total_moments
from multilandau.integrators import (
    Scheme,
    StepControl,
    integrate,
    step,
    step_implicit_midpoint,
    step_schedule,
)

from conftest import random_state


def test_schedule_exact_multiples():
    sched = step_schedule(0.0, 2.0, 0.02)
    assert len(sched) == 100
    assert all(h == 0.02 for h, _ in sched)
    assert sched[-1][1] == 2.0


def test_schedule_short_last_step():
    sched = step_schedule(0.0, 0.25, 0.1)
    assert [h for h, _ in sched][:2] == [0.1, 0.1]
    assert sched[-1][0] == pytest.approx(0.05) and sched[-1][1] == 0.25


def test_schedule_empty_for_zero_span():
    assert step_schedule(0.0, 0.0, 0.1) == []
    with pytest.raises(ValueError):
        step_schedule(1.0, 0.5, 0.1)


def test_control_validation():
    with pytest.raises(ValueError):
        StepControl(dt=0.0)
    with pytest.raises(ValueError):
        StepControl(dt=0.1, scheme="rk4")
    assert StepControl(dt=0.1, scheme="implicit_midpoint").scheme is Scheme.IMPLICIT_MIDPOINT


@pytest.mark.parametrize("scheme", ["forward_euler", "implicit_midpoint"])
def test_momentum_and_weights_conserved(rng, scheme):
    state, grids = random_state(rng, n=5, gamma=-3.0)
    m0 = total_moments(state)
    weights = [e.weights for e in state.ensembles]
    ctl = StepControl(dt=0.01, scheme=scheme)
    out = integrate(state, grids, ctl, 0.05)
    m1 = total_moments(out)
    scale = sum(sp.mass * float(e.weights @ np.linalg.norm(e.velocities, axis=1))
                for sp, e in zip(state.species, state.ensembles))
    assert np.linalg.norm(m1.momentum - m0.momentum) <= 1e-13 * scale
    assert out.time == 0.05
    for w, e in zip(weights, out.ensembles):
        assert e.weights is w


def test_midpoint_conserves_energy_to_tolerance(rng):
    state, grids = random_state(rng, n=5)
    e0 = total_moments(state).kinetic_energy
    ctl = StepControl(dt=0.01, scheme="implicit_midpoint", fp_tolerance=1e-10)
    out = integrate(state, grids, ctl, 0.1)
    assert abs(total_moments(out).kinetic_energy - e0) <= 1e-8 * e0


def test_euler_energy_error_is_first_order():
    state, grids = build_state(with_grid_n(load_config("bkw_example1"), 10))
    e0 = total_moments(state).kinetic_energy
    errs = []
    for dt in (0.02, 0.01):
        out = integrate(state, grids, StepControl(dt=dt), 0.1)
        errs.append(abs(total_moments(out).kinetic_energy - e0))
    assert 1.6 <= errs[0] / errs[1] <= 2.4


def test_nonconvergence_raised(rng):
    state, grids = random_state(rng, n=5, gamma=-3.0)
    ctl = StepControl(dt=5.0, scheme="implicit_midpoint", fp_tolerance=1e-14, fp_max_iters=3)
    with pytest.raises(NonConvergence) as info:
        step_implicit_midpoint(state, grids, ctl)
    assert info.value.iterations == 3


def test_euler_predictor_same_fixed_point(rng):
    state, grids = random_state(rng, n=4)
    a, _ = step(state, grids, StepControl(dt=0.01, scheme="implicit_midpoint", fp_tolerance=1e-13))
    b, _ = step(state, grids, StepControl(dt=0.01, scheme="implicit_midpoint", fp_tolerance=1e-13,
                                          euler_predictor=True))
    for x, y in zip(a.ensembles, b.ensembles):
        np.testing.assert_allclose(x.velocities, y.velocities, rtol=0, atol=1e-12)


def test_observer_sees_every_step(rng):
    state, grids = random_state(rng, n=3)
    seen = []
    integrate(state, grids, StepControl(dt=0.01), 0.035, lambda k, s, it: seen.append((k, s.time)))
    assert [k for k, _ in seen] == [1, 2, 3, 4]
    assert seen[-1][1] == 0.035


@pytest.mark.parametrize("scheme", ["forward_euler", "implicit_midpoint"])
def test_zero_field_leaves_state_unchanged(rng, scheme):
    state, grids = random_state(rng, n=4)
    state = replace(state, kernel=KernelSpec(0.0, np.zeros((2, 2))))
    out, iters = step(state, grids, StepControl(dt=0.1, scheme=scheme))
    for a, b in zip(state.ensembles, out.ensembles):
        assert np.array_equal(a.velocities, b.velocities)
    assert iters == (1 if scheme == "implicit_midpoint" else 0)


def test_integrate_to_current_time_is_identity(rng):
    state, grids = random_state(rng, n=3)
    calls = []
    out = integrate(state, grids, StepControl(dt=0.1), state.time, lambda *a: calls.append(a))
    assert out is state and calls == []


def test_remainder_step_count(rng):
    state, grids = random_state(rng, n=3)
    times = []
    integrate(state, grids, StepControl(dt=0.01), 0.105, lambda k, s, it: times.append(s.time))
    assert len(times) == 11 and abs(times[-1] - 0.105) <= 1e-12


def test_euler_mass_bitwise_and_momentum():
    state, grids = build_state(with_grid_n(load_config("bkw_example1"), 10))
    m0 = total_moments(state)
    seen = []
    integrate(state, grids, StepControl(dt=0.02), 0.2,
              lambda k, s, it: seen.append(total_moments(s)))
    for rec in seen:
        assert [p.number_density for p in rec.per_species] == [p.number_density for p in m0.per_species]


@pytest.mark.slow
def test_midpoint_example1_step_converges():
    cfg = load_config("bkw_example1_midpoint")
    assert [s.grid_n for s in cfg.species] == [40, 40] and cfg.time.dt == 0.0025
    state, grids = build_state(cfg)
    ctl = StepControl(dt=0.0025, scheme="implicit_midpoint", fp_tolerance=1e-8)
    for _ in range(2):
        state, iters = step(state, grids, ctl)
        assert iters < ctl.fp_max_iters


def test_coulomb_dt_sweep_energy_first_order(tmp_path):
    # explicit Euler energy error on the Coulomb mixture should halve with dt
    from multilandau.runner import run

    base = with_grid_n(load_config("coulomb_example1"), 12)
    drift = {}
    for dt in (0.04, 0.02, 0.01):
        cfg = replace(base, time=replace(base.time, dt=dt, t_final=1.0),
                      output=replace(base.output, snapshot_times=(), diagnostics_every=1000))
        drift[dt] = run(cfg, out_dir=tmp_path / str(dt)).summary["relative_drift"]["energy"]
    assert drift[0.04] > drift[0.02] > drift[0.01] > 0
    for a, b in ((0.04, 0.02), (0.02, 0.01)):
        assert 1.6 <= drift[a] / drift[b] <= 2.4
