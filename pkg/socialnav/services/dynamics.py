"""
Cinemática discreta do uniciclo.

Mesmo modelo de Euler explícito usado pelo modelo interno do
controlador (passo dt) e pela planta do simulador (passo dt_sim).
"""

import math
from typing import Sequence

import numpy as np

from socialnav.models.state import ControlInput, RobotState
from socialnav.utils.exceptions import ConfigurationError
from socialnav.utils.validators import require_finite, validate_time_step


def step_unicycle(state: RobotState, u: ControlInput, dt: float) -> RobotState:
    """
    Avança o uniciclo um passo de Euler.

    Args:
        state: Pose atual
        u: Comando mantido durante o passo
        dt: Passo de tempo [s]

    Returns:
        RobotState: Nova pose com theta normalizado

    Raises:
        CorruptedStateError: Se comando ou pose não são finitos
        ConfigurationError: Se dt não é positivo
    """
    validate_time_step(dt)
    require_finite("ControlInput", v=u.v, omega=u.omega)
    return RobotState(
        x=state.x + dt * u.v * math.cos(state.theta),
        y=state.y + dt * u.v * math.sin(state.theta),
        theta=state.theta + dt * u.omega,
    )


def rollout(
    state0: RobotState,
    controls: Sequence[ControlInput],
    dt: float
) -> list[RobotState]:
    """
    Propaga a pose ao longo de uma sequência de comandos.

    O elemento k é step_unicycle aplicado k+1 vezes.

    Raises:
        ConfigurationError: Se a sequência de comandos é vazia
    """
    if not controls:
        raise ConfigurationError("rollout requer ao menos um comando")
    states: list[RobotState] = []
    state = state0
    for u in controls:
        state = step_unicycle(state, u, dt)
        states.append(state)
    return states


def rollout_array(
    state0: np.ndarray,
    controls: np.ndarray,
    dt: float
) -> tuple[np.ndarray, np.ndarray]:
    """
    Versão vetorizada do rollout usada pelo solver.

    Os ângulos são somas prefixadas de omega, então a trajetória sai
    sem laço em Python. Os ângulos não são normalizados aqui; só
    entram em seno e cosseno.

    Args:
        state0: Pose inicial (x, y, theta)
        controls: Comandos, shape (H, 2) com colunas (v, omega)
        dt: Passo de tempo [s]

    Returns:
        tuple: (posições r_1..r_H com shape (H, 2),
                ângulos theta_0..theta_{H-1} usados em cada passo)
    """
    v = controls[:, 0]
    omega = controls[:, 1]
    headings = state0[2] + dt * np.concatenate(([0.0], np.cumsum(omega[:-1])))
    steps = dt * v[:, None] * np.column_stack((np.cos(headings), np.sin(headings)))
    positions = state0[:2] + np.cumsum(steps, axis=0)
    return positions, headings

