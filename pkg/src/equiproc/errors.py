"""Exception types shared across the package."""


class ContractionError(ValueError):
    """Model parameters fail the configured moment-contraction condition."""


class CoverCapError(ValueError):
    """A bracketing cover would exceed the configured size cap."""


class ComplexityGateError(RuntimeError):
    """The bracketing-integral hypothesis fails, so the modulus experiment refuses to run."""


class ConfigError(ValueError):
    """Aggregated configuration validation failure.

    `violations` lists every individual problem found, so a bad config is
    reported in one shot instead of one error per rerun.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {v}" for v in self.violations))
