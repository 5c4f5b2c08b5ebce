"""Exception hierarchy shared by all submodules."""


class PhononResetError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(PhononResetError, ValueError):
    """Operator or state dimensions are inconsistent."""


class ContractError(PhononResetError, ValueError):
    """An input violates a documented precondition (e.g. non-hermitian observable)."""


class DomainError(PhononResetError, ValueError):
    """A numerical argument lies outside the domain of the formula."""


class ConfigError(PhononResetError, ValueError):
    """Configuration or input data failed validation."""


class InsufficientDataError(PhononResetError, ValueError):
    """Too few records to form a statistic."""


class IntegrationError(PhononResetError, RuntimeError):
    """Time integration lost accuracy (trace drift too large)."""
