"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised for invalid configuration values or incompatible component pairs."""


class ContractViolation(RuntimeError):
    """Raised when a component is driven outside its allowed call sequence."""
