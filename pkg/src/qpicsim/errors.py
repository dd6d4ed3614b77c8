"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised for malformed scenario configuration (unknown keys, bad bounds)."""


class ContractViolation(RuntimeError):
    """Raised when a numerical contract is broken (kappa > 1, degenerate state, ...)."""
