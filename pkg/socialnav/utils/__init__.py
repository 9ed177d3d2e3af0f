"""
Módulo de utilitários.

Contém funções auxiliares, logging e tratamento de exceções.
"""

from socialnav.utils.logger import episode_context, get_logger, setup_logging
from socialnav.utils.exceptions import (
    SocialNavException,
    ConfigurationError,
    CorruptedStateError,
    GenerationError,
    OutputPathError,
    SingularCovarianceError,
    UnknownControllerError,
)
from socialnav.utils.validators import (
    require_finite,
    validate_horizon,
    validate_time_step,
)

__all__ = [
    "episode_context",
    "get_logger",
    "setup_logging",
    "SocialNavException",
    "ConfigurationError",
    "CorruptedStateError",
    "GenerationError",
    "OutputPathError",
    "SingularCovarianceError",
    "UnknownControllerError",
    "require_finite",
    "validate_horizon",
    "validate_time_step",
]
