"""
Validadores de entrada.

Funções de validação reutilizáveis pelos serviços numéricos.
"""

import math
from typing import Iterable

import numpy as np

from socialnav.utils.exceptions import ConfigurationError, CorruptedStateError


def require_finite(what: str, **values: float) -> None:
    """
    Garante que todos os valores são finitos.

    Args:
        what: Descrição do objeto validado (aparece na mensagem)
        **values: Valores nomeados a verificar

    Raises:
        CorruptedStateError: Se algum valor é NaN ou infinito

    Example:
        require_finite("RobotState", x=x, y=y, theta=theta)
    """
    bad = {name: value for name, value in values.items() if not math.isfinite(value)}
    if bad:
        raise CorruptedStateError(
            f"{what} com valores não finitos: {', '.join(bad)}",
            details={"fields": {k: repr(v) for k, v in bad.items()}}
        )


def validate_time_step(dt: float) -> None:
    """
    Valida passo de tempo.

    Raises:
        ConfigurationError: Se dt não é positivo e finito
    """
    if not (math.isfinite(dt) and dt > 0):
        raise ConfigurationError(f"Passo de tempo inválido: {dt}", {"dt": dt})


def validate_horizon(horizon: int) -> None:
    """
    Valida número de passos do horizonte.

    Raises:
        ConfigurationError: Se horizonte < 1
    """
    if horizon < 1:
        raise ConfigurationError(f"Horizonte inválido: {horizon}", {"horizon": horizon})


def is_symmetric_psd(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    """
    Verifica se matriz é simétrica e positiva semidefinida.

    Args:
        matrix: Matriz quadrada
        tol: Tolerância numérica

    Returns:
        bool: True se simétrica e PSD
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    if not np.allclose(matrix, matrix.T, atol=tol):
        return False
    return bool(np.min(np.linalg.eigvalsh(matrix)) >= -tol)


def invalid_names(names: Iterable[str], valid: Iterable[str]) -> list[str]:
    """
    Retorna nomes que não pertencem ao vocabulário válido.

    Args:
        names: Nomes fornecidos
        valid: Vocabulário aceito

    Returns:
        list: Nomes inválidos, na ordem em que apareceram
    """
    valid_set = set(valid)
    return [name for name in names if name not in valid_set]
