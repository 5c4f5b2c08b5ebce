"""Simulation and analysis toolkit for swap-based transmon reset into phonon modes."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError, ContractError, DimensionError, DomainError, InsufficientDataError,
    IntegrationError, PhononResetError,
)
from .model import DeviceModel, default_device, mhz  # noqa: E402
from .dynamics import NoiseModel, Segment, default_noise, evolve  # noqa: E402
from .protocol import (  # noqa: E402
    ScheduleOptions, build_reset_schedule, simulate_reset, simulate_rpm_contrast, sweep_swap_count,
)
from .thermometry import compatibility_check, posterior, summarize_records  # noqa: E402
from .errbudget import displacement_estimate, error_budget  # noqa: E402

__all__ = [
    "__version__", "ConfigError", "ContractError", "DimensionError", "DomainError",
    "InsufficientDataError", "IntegrationError", "PhononResetError", "DeviceModel",
    "default_device", "mhz", "NoiseModel", "Segment", "default_noise", "evolve",
    "ScheduleOptions", "build_reset_schedule", "simulate_reset", "simulate_rpm_contrast",
    "sweep_swap_count", "compatibility_check", "posterior", "summarize_records",
    "displacement_estimate", "error_budget",
]
