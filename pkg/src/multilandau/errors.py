"""Exception hierarchy shared across the package."""


class LandauError(Exception):
    """Base class for all errors raised by multilandau."""


class ZeroWeightError(LandauError):
    """A species has zero total weight, so its moments or log-density are undefined."""


class BetaMismatch(LandauError):
    """The species relaxation rates differ, so the two-species BKW ansatz does not apply."""

    def __init__(self, betas, spread):
        self.betas = list(betas)
        self.spread = spread
        listing = ", ".join(f"beta_{i + 1}={b:.17g}" for i, b in enumerate(self.betas))
        super().__init__(f"BKW rates differ (relative spread {spread:.3e}): {listing}")


class NonConvergence(LandauError):
    """Fixed-point iteration of the implicit midpoint step hit its iteration cap."""

    def __init__(self, iterations, residual, time=None):
        self.iterations = iterations
        self.residual = residual
        self.time = time
        where = "" if time is None else f" at t={time:.6g}"
        super().__init__(
            f"implicit midpoint fixed point did not converge{where}: "
            f"{iterations} iterations, residual {residual:.3e}; reduce dt"
        )


class NonFiniteError(LandauError):
    """The collisional velocity field produced NaN or Inf."""

    def __init__(self, species, particle):
        self.species = species
        self.particle = particle
        super().__init__(f"non-finite velocity field for species {species}, particle {particle}")


class ConfigParseError(LandauError):
    """The scenario file could not be parsed."""


class ConfigValidationError(LandauError):
    """The scenario file parsed but violates one or more schema rules."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {v}" for v in self.violations))
