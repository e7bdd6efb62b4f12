"""Scenario files: TOML schema, validation and construction of initial states.

A scenario file looks like::

    name = "bkw_example1"
    dim = 2

    [kernel]
    gamma = 0
    strength = [["1/8", "1/16"], ["1/16", "1/32"]]

    [[species]]
    label = "heavy"
    mass = 2
    half_width = 3              # or "constrained" together with constrain_to = "<label>"
    center = "origin"           # "origin" | "bulk_velocity" | [cx, cy]
    grid_n = 40
    initial = { type = "bkw", C = 0.5 }

    [time]
    dt = 0.01
    t_final = 5.0
    scheme = "forward_euler"    # or "implicit_midpoint"

    [output]
    directory = "runs/bkw_example1"
    snapshot_times = [5.0]
    diagnostics_every = 1

    [desk]                      # overrides applied by ``--desk``
    grid_n = 20
    dt = 0.02
    t_final = 2.0

Reals may be written as TOML numbers or as exact fractions in strings ("1/8").
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import KernelSpec, SpeciesSpec, SystemState, validate_state
from .errors import BetaMismatch, ConfigParseError, ConfigValidationError
from .initialization import (
    EPS_COEFF,
    EPS_POWER,
    build_grid,
    constrained_half_width,
    epsilon_from_h,
    init_particles,
)
from .integrators import Scheme, StepControl
from .oracles import BKWParams, MaxwellianParams, bkw_density, maxwellian_density, validate_bkw

_TOP_KEYS = {"name", "description", "dim", "kernel", "species", "time", "output", "desk"}
_KERNEL_KEYS = {"gamma", "strength"}
_SPECIES_KEYS = {"label", "mass", "half_width", "constrain_to", "center", "grid_n",
                 "epsilon_override", "eps_coeff", "eps_power", "initial"}
_BKW_KEYS = {"type", "C", "n"}
_MAXWELL_KEYS = {"type", "n", "u", "T"}
_TIME_KEYS = {"dt", "t_final", "scheme", "fp_tolerance", "fp_max_iters", "euler_predictor"}
_OUTPUT_KEYS = {"directory", "snapshot_times", "diagnostics_every"}
_DESK_KEYS = {"grid_n", "dt", "t_final", "scheme", "snapshot_times", "diagnostics_every"}

PRESETS = ("bkw_example1", "bkw_example1_midpoint", "bkw_example2", "bkw_example2_same_domain",
           "bkw_example3", "coulomb_example1", "coulomb_example2", "coulomb_example2_same_domain")


@dataclass(frozen=True)
class InitialCondition:
    kind: str
    n: float = 1.0
    C: float | None = None
    u: tuple | None = None
    T: float | None = None


@dataclass(frozen=True)
class SpeciesConfig:
    label: str
    mass: float
    half_width: float | None
    grid_n: int
    initial: InitialCondition
    center: object = "origin"
    constrain_to: str | None = None
    epsilon_override: float | None = None
    eps_coeff: float = EPS_COEFF
    eps_power: float = EPS_POWER


@dataclass(frozen=True)
class TimeConfig:
    dt: float
    t_final: float
    scheme: str = Scheme.FORWARD_EULER.value
    fp_tolerance: float = 1e-8
    fp_max_iters: int = 200
    euler_predictor: bool = False


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "runs/out"
    snapshot_times: tuple = ()
    diagnostics_every: int = 1


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    dim: int
    gamma: float
    strength: np.ndarray
    species: tuple
    time: TimeConfig
    output: OutputConfig
    desk: dict = field(default_factory=dict)
    description: str = ""
    source: str = ""

    @property
    def is_bkw(self) -> bool:
        return all(s.initial.kind == "bkw" for s in self.species)


# --------------------------------------------------------------------------- parsing


class _Collector:
    def __init__(self):
        self.errors = []

    def add(self, msg):
        self.errors.append(msg)

    def unknown(self, table: dict, allowed: set, where: str):
        for key in sorted(set(table) - allowed):
            self.add(f"{where}: unknown key '{key}'")

    def real(self, value, where, *, positive=False, nonneg=False, required=True):
        if value is None:
            if required:
                self.add(f"{where}: missing required value")
            return None
        try:
            if isinstance(value, bool):
                raise TypeError
            if isinstance(value, str):
                x = float(Fraction(value.strip()))
            else:
                x = float(value)
        except (TypeError, ValueError, ZeroDivisionError):
            self.add(f"{where}: expected a real number or fraction string, got {value!r}")
            return None
        if not np.isfinite(x):
            self.add(f"{where}: must be finite")
            return None
        if positive and not x > 0:
            self.add(f"{where}: must be > 0, got {x}")
        if nonneg and x < 0:
            self.add(f"{where}: must be >= 0, got {x}")
        return x

    def integer(self, value, where, *, minimum=None, required=True):
        if value is None:
            if required:
                self.add(f"{where}: missing required value")
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            self.add(f"{where}: expected an integer, got {value!r}")
            return None
        if minimum is not None and value < minimum:
            self.add(f"{where}: must be >= {minimum}, got {value}")
        return value

    def vector(self, value, where, dim):
        if not isinstance(value, (list, tuple)):
            self.add(f"{where}: expected a list of {dim} reals")
            return None
        if dim is not None and len(value) != dim:
            self.add(f"{where}: expected {dim} components, got {len(value)}")
            return None
        comps = [self.real(c, f"{where}[{k}]") for k, c in enumerate(value)]
        return None if any(c is None for c in comps) else tuple(comps)


def resolve_path(name_or_path) -> Path:
    """A filesystem path, or the bundled preset of that name."""
    p = Path(name_or_path)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".toml") else p.name
    if stem in PRESETS and str(p) in (stem, stem + ".toml"):
        return Path(str(resources.files("multilandau") / "presets" / f"{stem}.toml"))
    return p


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario file (or a bundled preset name).

    Raises
    ------
    ConfigParseError
        The file is missing or is not valid TOML (message carries line/column).
    ConfigValidationError
        Lists every schema violation found.
    """
    p = resolve_path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigParseError(f"{path}: cannot read file ({exc.strerror or exc})") from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"{p}: {exc}") from exc
    return parse_config(raw, source=str(p))


def parse_config(raw: dict, source: str = "") -> ScenarioConfig:
    c = _Collector()
    c.unknown(raw, _TOP_KEYS, "top level")

    dim = c.integer(raw.get("dim"), "dim")
    if dim is not None and dim not in (2, 3):
        c.add(f"dim: must be 2 or 3, got {dim}")
        dim = None

    kernel = raw.get("kernel")
    gamma, strength = None, None
    if not isinstance(kernel, dict):
        c.add("kernel: missing [kernel] table")
    else:
        c.unknown(kernel, _KERNEL_KEYS, "kernel")
        gamma = c.real(kernel.get("gamma"), "kernel.gamma")
        if gamma is not None and dim is not None and not (-dim - 1 <= gamma <= 1):
            c.add(f"kernel.gamma: must lie in [-d-1, 1], got {gamma}")
        rows = kernel.get("strength")
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            c.add("kernel.strength: expected a list of rows")
        else:
            vals = [[c.real(x, f"kernel.strength[{a}][{b}]", nonneg=True) for b, x in enumerate(r)]
                    for a, r in enumerate(rows)]
            if any(len(r) != len(vals) for r in vals):
                c.add("kernel.strength: matrix must be square")
            elif not any(x is None for r in vals for x in r):
                strength = np.array(vals, dtype=np.float64)
                if not np.array_equal(strength, strength.T):
                    c.add("kernel.strength: strength symmetry violated (B_ij != B_ji)")

    species_raw = raw.get("species")
    species = []
    if not isinstance(species_raw, list) or not species_raw:
        c.add("species: at least one [[species]] table required")
        species_raw = []
    for k, sp in enumerate(species_raw):
        species.append(_parse_species(c, sp, k, dim))
    if strength is not None and species_raw and strength.shape[0] != len(species_raw):
        c.add(f"kernel.strength: size {strength.shape[0]} does not match {len(species_raw)} species")

    time = _parse_time(c, raw.get("time"))
    output = _parse_output(c, raw.get("output"))

    desk = raw.get("desk", {})
    if not isinstance(desk, dict):
        c.add("desk: expected a table")
        desk = {}
    c.unknown(desk, _DESK_KEYS, "desk")

    species = [s for s in species if s is not None]
    if len(species) == len(species_raw):
        _cross_species_checks(c, species, strength, gamma, dim)

    if c.errors:
        raise ConfigValidationError(c.errors)
    return ScenarioConfig(
        name=str(raw.get("name", Path(source).stem if source else "scenario")),
        description=str(raw.get("description", "")),
        dim=dim, gamma=gamma, strength=strength, species=tuple(species),
        time=time, output=output, desk=dict(desk), source=source,
    )


def _parse_species(c: _Collector, sp, k, dim):
    where = f"species[{k}]"
    if not isinstance(sp, dict):
        c.add(f"{where}: expected a table")
        return None
    n_err = len(c.errors)
    c.unknown(sp, _SPECIES_KEYS, where)
    label = str(sp.get("label", f"species{k + 1}"))
    mass = c.real(sp.get("mass"), f"{where}.mass", positive=True)
    hw = sp.get("half_width")
    constrain_to = sp.get("constrain_to")
    half_width = None
    if hw == "constrained":
        if constrain_to is None:
            c.add(f"{where}.constrain_to: required when half_width = \"constrained\"")
    else:
        half_width = c.real(hw, f"{where}.half_width", positive=True)
        if constrain_to is not None:
            c.add(f"{where}.constrain_to: only allowed with half_width = \"constrained\"")
    grid_n = c.integer(sp.get("grid_n"), f"{where}.grid_n", minimum=2)
    center = sp.get("center", "origin")
    if isinstance(center, list):
        center = c.vector(center, f"{where}.center", dim)
    elif center not in ("origin", "bulk_velocity"):
        c.add(f"{where}.center: must be \"origin\", \"bulk_velocity\" or a vector")
    eps_over = c.real(sp.get("epsilon_override"), f"{where}.epsilon_override", positive=True,
                      required=False)
    eps_coeff = c.real(sp.get("eps_coeff", EPS_COEFF), f"{where}.eps_coeff", positive=True)
    eps_power = c.real(sp.get("eps_power", EPS_POWER), f"{where}.eps_power", positive=True)

    init = sp.get("initial")
    ic = None
    if not isinstance(init, dict):
        c.add(f"{where}.initial: missing initial-condition table")
    else:
        kind = init.get("type")
        if kind == "bkw":
            c.unknown(init, _BKW_KEYS, f"{where}.initial")
            C = c.real(init.get("C"), f"{where}.initial.C")
            if C is not None and not 0 < C < 1:
                c.add(f"{where}.initial.C: must lie in (0, 1), got {C}")
            n = c.real(init.get("n", 1.0), f"{where}.initial.n", positive=True)
            ic = InitialCondition("bkw", n=n, C=C)
        elif kind == "maxwellian":
            c.unknown(init, _MAXWELL_KEYS, f"{where}.initial")
            n = c.real(init.get("n"), f"{where}.initial.n", positive=True)
            T = c.real(init.get("T"), f"{where}.initial.T", positive=True)
            u = c.vector(init.get("u"), f"{where}.initial.u", dim)
            ic = InitialCondition("maxwellian", n=n, u=u, T=T)
        else:
            c.add(f"{where}.initial.type: must be \"bkw\" or \"maxwellian\", got {kind!r}")
    if len(c.errors) > n_err:
        return None
    return SpeciesConfig(label=label, mass=mass, half_width=half_width, grid_n=grid_n,
                         initial=ic, center=center, constrain_to=constrain_to,
                         epsilon_override=eps_over, eps_coeff=eps_coeff, eps_power=eps_power)


def _parse_time(c: _Collector, t):
    if not isinstance(t, dict):
        c.add("time: missing [time] table")
        return None
    c.unknown(t, _TIME_KEYS, "time")
    dt = c.real(t.get("dt"), "time.dt", positive=True)
    t_final = c.real(t.get("t_final"), "time.t_final", nonneg=True)
    scheme = t.get("scheme", Scheme.FORWARD_EULER.value)
    if scheme not in {s.value for s in Scheme}:
        c.add(f"time.scheme: must be one of {[s.value for s in Scheme]}, got {scheme!r}")
    tol = c.real(t.get("fp_tolerance", 1e-8), "time.fp_tolerance", positive=True)
    iters = c.integer(t.get("fp_max_iters", 200), "time.fp_max_iters", minimum=1)
    pred = t.get("euler_predictor", False)
    if not isinstance(pred, bool):
        c.add("time.euler_predictor: expected true or false")
    return TimeConfig(dt=dt, t_final=t_final, scheme=scheme, fp_tolerance=tol,
                      fp_max_iters=iters, euler_predictor=bool(pred))


def _parse_output(c: _Collector, o):
    if o is None:
        return OutputConfig()
    if not isinstance(o, dict):
        c.add("output: expected a table")
        return OutputConfig()
    c.unknown(o, _OUTPUT_KEYS, "output")
    every = c.integer(o.get("diagnostics_every", 1), "output.diagnostics_every", minimum=1)
    snaps = o.get("snapshot_times", [])
    if not isinstance(snaps, list):
        c.add("output.snapshot_times: expected a list")
        snaps = []
    times = tuple(c.real(s, f"output.snapshot_times[{k}]", nonneg=True) for k, s in enumerate(snaps))
    return OutputConfig(directory=str(o.get("directory", "runs/out")),
                        snapshot_times=tuple(t for t in times if t is not None),
                        diagnostics_every=every or 1)


def _cross_species_checks(c: _Collector, species, strength, gamma, dim):
    labels = [s.label for s in species]
    if len(set(labels)) != len(labels):
        c.add("species: labels must be unique")
    constrained = [s for s in species if s.half_width is None]
    if len(constrained) > 1:
        c.add("species: at most one species may use a constrained half_width")
    for s in constrained:
        ref = next((r for r in species if r.label == s.constrain_to), None)
        if ref is None:
            c.add(f"species '{s.label}'.constrain_to: no species labelled {s.constrain_to!r}")
        elif ref.half_width is None:
            c.add(f"species '{s.label}'.constrain_to: must reference a species with a concrete half_width")
        elif s.epsilon_override is not None or ref.epsilon_override is not None:
            c.add(f"species '{s.label}': constrained half_width is incompatible with epsilon_override")

    kinds = {s.initial.kind for s in species}
    for s in species:
        if s.center == "bulk_velocity" and s.initial.kind != "maxwellian":
            c.add(f"species '{s.label}'.center: \"bulk_velocity\" needs a maxwellian initial condition")
    if "bkw" in kinds:
        if kinds != {"bkw"}:
            c.add("initial: bkw initial data must be used for every species")
        elif len(species) != 2:
            c.add("initial: the BKW solution is available for two species only")
        else:
            Cs = {s.initial.C for s in species}
            if len(Cs) != 1:
                c.add("initial: all species must share the same BKW constant C")
            if gamma is not None and gamma != 0:
                c.add("initial: BKW initial data requires the Maxwell kernel (gamma = 0)")
            if strength is not None and strength.shape == (2, 2):
                try:
                    validate_bkw([s.mass for s in species], [s.initial.n for s in species], strength)
                except BetaMismatch as exc:
                    c.add(f"initial: BKW rate condition fails: {exc}")
                except ValueError as exc:
                    c.add(f"initial: {exc}")


# --------------------------------------------------------------------------- construction


def apply_desk(cfg: ScenarioConfig) -> ScenarioConfig:
    """Return ``cfg`` with its ``[desk]`` overrides applied."""
    desk = cfg.desk
    if not desk:
        return cfg
    species = cfg.species
    if "grid_n" in desk:
        species = tuple(replace(s, grid_n=int(desk["grid_n"])) for s in species)
    time = cfg.time
    tkw = {k: desk[k] for k in ("dt", "t_final", "scheme") if k in desk}
    if tkw:
        time = replace(time, **{k: (float(v) if k != "scheme" else v) for k, v in tkw.items()})
    output = cfg.output
    if "snapshot_times" in desk:
        output = replace(output, snapshot_times=tuple(float(x) for x in desk["snapshot_times"]))
    if "diagnostics_every" in desk:
        output = replace(output, diagnostics_every=int(desk["diagnostics_every"]))
    return replace(cfg, species=species, time=time, output=output, name=cfg.name + "_desk")


def with_grid_n(cfg: ScenarioConfig, n: int) -> ScenarioConfig:
    return replace(cfg, species=tuple(replace(s, grid_n=int(n)) for s in cfg.species))


def half_widths(cfg: ScenarioConfig) -> list:
    by_label = {s.label: s for s in cfg.species}
    out = []
    for s in cfg.species:
        if s.half_width is not None:
            out.append(s.half_width)
        else:
            ref = by_label[s.constrain_to]
            out.append(constrained_half_width(ref.mass, s.mass, ref.half_width, ref.eps_power,
                                              n_1=ref.grid_n, n_2=s.grid_n))
    return out


def bkw_params(cfg: ScenarioConfig) -> BKWParams | None:
    if not cfg.is_bkw:
        return None
    return BKWParams.build([s.mass for s in cfg.species], [s.initial.n for s in cfg.species],
                           cfg.strength, cfg.species[0].initial.C, cfg.dim)


def initial_density(cfg: ScenarioConfig, i: int):
    """Callable ``f0(points)`` for species ``i`` at t = 0."""
    s = cfg.species[i]
    if s.initial.kind == "bkw":
        params = bkw_params(cfg)
        return lambda v: bkw_density(0.0, v, i, params)
    mp = MaxwellianParams(n=s.initial.n, m=s.mass, u=s.initial.u, T=s.initial.T)
    return lambda v: maxwellian_density(v, mp, cfg.dim)


def species_specs(cfg: ScenarioConfig) -> list:
    specs = []
    for s, L in zip(cfg.species, half_widths(cfg)):
        if s.center == "origin":
            center = (0.0,) * cfg.dim
        elif s.center == "bulk_velocity":
            center = s.initial.u
        else:
            center = s.center
        h = 2.0 * L / s.grid_n
        eps = s.epsilon_override if s.epsilon_override is not None else epsilon_from_h(
            h, s.eps_coeff, s.eps_power)
        specs.append(SpeciesSpec(mass=s.mass, half_width=L, center=center, grid_n=s.grid_n,
                                 epsilon=eps, label=s.label))
    return specs


def step_control(cfg: ScenarioConfig) -> StepControl:
    t = cfg.time
    return StepControl(dt=t.dt, scheme=t.scheme, fp_tolerance=t.fp_tolerance,
                       fp_max_iters=t.fp_max_iters, euler_predictor=t.euler_predictor)


def build_state(cfg: ScenarioConfig):
    """Initial :class:`SystemState` and the frozen quadrature grids."""
    specs = species_specs(cfg)
    grids = [build_grid(sp, cfg.dim) for sp in specs]
    ensembles = [init_particles(initial_density(cfg, i), g, sp)
                 for i, (sp, g) in enumerate(zip(specs, grids))]
    state = SystemState(dim=cfg.dim, species=specs, ensembles=ensembles,
                        kernel=KernelSpec(cfg.gamma, cfg.strength), time=0.0)
    problems = validate_state(state)
    if problems:
        raise ConfigValidationError(problems)
    return state, grids
