"""Time-marching driver, convergence harness and file output."""

from __future__ import annotations

import json
import math
import time as _time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import (
    ScenarioConfig,
    bkw_params,
    build_state,
    half_widths,
    species_specs,
    step_control,
    with_grid_n,
)
from .core import SystemState
from .diagnostics import error_norms, record
from .errors import ConfigValidationError
from .integrators import integrate, step_schedule
from .oracles import bkw_density, predict_equilibrium, species_betas
from .score import grid_log_density

_AXES = "xyz"
_NORMS = ("L1", "L2", "Linf")


def fmt(x) -> str:
    """17 significant digits: round-trip exact for doubles."""
    return format(float(x), ".17g")


def diagnostics_header(dim: int, n_species: int) -> list:
    cols = ["step", "time", "total_mass"] + [f"mom_{a}" for a in _AXES[:dim]] + ["energy", "entropy"]
    for i in range(1, n_species + 1):
        cols += [f"n_{i}"] + [f"u{a}_{i}" for a in _AXES[:dim]] + [f"T_{i}"]
    return cols


def diagnostics_row(step: int, rec) -> list:
    row = [str(step), fmt(rec.time), fmt(rec.number_density)]  # total mass = sum of all weights
    row += [fmt(x) for x in rec.momentum] + [fmt(rec.kinetic_energy), fmt(rec.entropy)]
    for sp in rec.per_species:
        row += [fmt(sp.number_density)] + [fmt(x) for x in sp.bulk_velocity] + [fmt(sp.temperature)]
    return row


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(r) + "\n")


def write_snapshot(state: SystemState, grids, directory: Path, tag: str):
    """Particle CSV ``w,vx,vy[,vz]`` and blob-density grid dump ``x,y[,z],f`` per species."""
    directory.mkdir(parents=True, exist_ok=True)
    d = state.dim
    for i, (ens, g) in enumerate(zip(state.ensembles, grids), start=1):
        rows = ([fmt(w)] + [fmt(x) for x in v] for w, v in zip(ens.weights, ens.velocities))
        _write_csv(directory / f"particles_{i}_{tag}.csv", ["w"] + [f"v{a}" for a in _AXES[:d]], rows)
        rho, _ = grid_log_density(ens, g)
        pts = g.centers
        rows = ([fmt(x) for x in p] + [fmt(f)] for p, f in zip(pts, rho.reshape(-1)))
        _write_csv(directory / f"blob_{i}_{tag}.csv", list(_AXES[:d]) + ["f"], rows)


@dataclass
class RunResult:
    state: SystemState
    records: list
    steps: int
    wall_clock: float
    summary: dict


def _momentum_scale(state: SystemState) -> float:
    # sum_i m_i sum_p w_p |v_p|; the reference for momentum drift when the net momentum is ~0
    return float(sum(sp.mass * (e.weights @ np.linalg.norm(e.velocities, axis=1))
                     for sp, e in zip(state.species, state.ensembles)))


def drifts(first, records, momentum_scale: float) -> dict:
    """Largest relative drift of the conserved totals over ``records``."""
    p0 = first.momentum
    pref = max(float(np.linalg.norm(p0)), momentum_scale)
    return {
        "mass": max(abs(r.number_density - first.number_density) for r in records) / first.number_density,
        "momentum": max(float(np.linalg.norm(r.momentum - p0)) for r in records) / pref,
        "energy": max(abs(r.kinetic_energy - first.kinetic_energy) for r in records)
        / abs(first.kinetic_energy),
    }


def run(cfg: ScenarioConfig, out_dir=None, threads: int | None = None) -> RunResult:
    """Integrate ``cfg`` and write ``diagnostics.csv``, snapshots and ``summary.json``.

    Diagnostics are recorded at step 0, every ``diagnostics_every`` steps and
    at the last step. Snapshots are written at the first step reaching each
    requested time. Integration errors propagate to the caller.
    """
    out = Path(out_dir if out_dir is not None else cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    state, grids = build_state(cfg)
    control = step_control(cfg)
    schedule = step_schedule(0.0, cfg.time.t_final, cfg.time.dt)
    n_steps = len(schedule)
    every = cfg.output.diagnostics_every
    pending = sorted(set(cfg.output.snapshot_times))

    first = record(state, grids)
    mscale = _momentum_scale(state)
    records = [(0, first)]
    max_iters = 0
    snap_dir = out / "snapshots"

    def snapshots(k, st):
        while pending and st.time >= pending[0] - 1e-9 * max(1.0, pending[0]):
            write_snapshot(st, grids, snap_dir, f"t{pending.pop(0):.6f}")

    def observer(k, st, iters):
        nonlocal max_iters
        max_iters = max(max_iters, iters)
        if k % every == 0 or k == n_steps:
            records.append((k, record(st, grids)))
        snapshots(k, st)

    t0 = _time.perf_counter()
    snapshots(0, state)
    try:
        state = integrate(state, grids, control, cfg.time.t_final, observer)
    finally:
        _write_csv(out / "diagnostics.csv", diagnostics_header(cfg.dim, len(cfg.species)),
                   (diagnostics_row(k, r) for k, r in records))
    wall = _time.perf_counter() - t0

    recs = [r for _, r in records]
    last = recs[-1]
    summary = {
        "name": cfg.name,
        "steps": n_steps,
        "dt": cfg.time.dt,
        "t_final": cfg.time.t_final,
        "scheme": control.scheme.value,
        "grid_n": [s.grid_n for s in cfg.species],
        "threads": threads,
        "wall_clock_s": wall,
        "max_fixed_point_iterations": max_iters,
        "relative_drift": drifts(first, recs, mscale),
        "entropy": {"initial": first.entropy, "final": last.entropy},
        "final": {
            "temperature": last.temperature,
            "bulk_velocity": list(last.bulk_velocity),
            "species": [
                {"label": s.label, "number_density": p.number_density,
                 "bulk_velocity": list(p.bulk_velocity), "temperature": p.temperature}
                for s, p in zip(cfg.species, last.per_species)
            ],
        },
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return RunResult(state=state, records=recs, steps=n_steps, wall_clock=wall, summary=summary)


def fit_order(h, err) -> float:
    """Least-squares slope of log(err) against log(h); NaN with fewer than two points."""
    h = np.asarray(h, dtype=np.float64)
    err = np.asarray(err, dtype=np.float64)
    if h.size < 2 or np.any(err <= 0):
        return math.nan
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def convergence(cfg: ScenarioConfig, n_list, out_dir=None) -> list:
    """Grid refinement study against the exact BKW solution at ``t_final``.

    Writes ``errors.csv`` (one row per species and n) and returns the rows as dicts.
    """
    if not cfg.is_bkw:
        raise ConfigValidationError(["initial: convergence study needs bkw initial data"])
    params = bkw_params(cfg)  # raises BetaMismatch before any run
    out = Path(out_dir if out_dir is not None else cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for n in n_list:
        c = with_grid_n(cfg, n)
        state, grids = build_state(c)
        state = integrate(state, grids, step_control(c), c.time.t_final)
        for i, (ens, g) in enumerate(zip(state.ensembles, grids)):
            err = error_norms(ens, g, lambda v, i=i: bkw_density(state.time, v, i, params))
            rows.append({"species": i + 1, "n": int(n), "h": g.h, **err})
    for i in range(len(cfg.species)):
        mine = [r for r in rows if r["species"] == i + 1]
        for key in _NORMS:
            order = fit_order([r["h"] for r in mine], [r[f"rel_{key}"] for r in mine])
            for r in mine:
                r[f"order_{key}"] = order
    cols = ["species", "n", "h"] + [f"rel_{k}" for k in _NORMS] + list(_NORMS) + [f"order_{k}" for k in _NORMS]
    _write_csv(out / "errors.csv", cols,
               ([str(r[c]) if c in ("species", "n") else fmt(r[c]) for c in cols] for r in rows))
    return rows


def check_report(cfg: ScenarioConfig) -> str:
    """Human-readable derived quantities of a validated config."""
    specs = species_specs(cfg)
    lines = [f"scenario: {cfg.name}", f"dim: {cfg.dim}  gamma: {fmt(cfg.gamma)}",
             f"time: dt={fmt(cfg.time.dt)} t_final={fmt(cfg.time.t_final)} scheme={cfg.time.scheme}"]
    for s, L in zip(specs, half_widths(cfg)):
        lines.append(f"species {s.label}: m={fmt(s.mass)} L={fmt(L)} n={s.grid_n} "
                     f"h={fmt(s.h)} eps={fmt(s.epsilon)} m*eps={fmt(s.mass * s.epsilon)}")
    me = [s.mass * s.epsilon for s in specs]
    spread = (max(me) - min(me)) / me[0]
    lines.append(f"m*eps relative spread: {fmt(spread)}")
    if cfg.is_bkw:
        betas = species_betas([s.mass for s in specs], [s.initial.n for s in cfg.species], cfg.strength)
        lines.append("beta per species: " + " ".join(fmt(b) for b in betas))
        lines.append(f"beta: {fmt(bkw_params(cfg).beta)}")
    state, _ = build_state(cfg)
    eq = predict_equilibrium(state)
    lines.append("predicted u_eq: " + " ".join(fmt(x) for x in eq.u_eq))
    lines.append(f"predicted T_eq: {fmt(eq.T_eq)}")
    lines.append("species-independent equilibrium temperature: "
                 + ("yes" if eq.species_independent else "no (m*eps differ)"))
    return "\n".join(lines)
