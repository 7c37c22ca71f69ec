class ConfigError(ValueError):
    """Invalid curve, field, grid or run configuration."""


class SolverError(RuntimeError):
    """Eigensolver failure that cannot be reported as a non-converged result."""
