"""
Construtores usados por vários módulos de teste.
"""

import numpy as np

from socialnav.models.schemas import ScenarioKind, SceneInstance
from socialnav.models.state import PredictedTrack


def static_track(ped_id: int, position, horizon: int = 25, variance: float = 0.01) -> PredictedTrack:
    """Trilha de um pedestre parado com covariância isotrópica."""
    means = np.tile(np.asarray(position, dtype=float), (horizon, 1))
    covs = np.tile(variance * np.eye(2), (horizon, 1, 1))
    return PredictedTrack(ped_id=ped_id, means=means, covs=covs)


def manual_scene(robot_start, robot_goal, ped_starts=(), ped_goals=None, seed: int = 7) -> SceneInstance:
    """Cena montada à mão (pedestres parados quando ped_goals é None)."""
    ped_starts = tuple(tuple(p) for p in ped_starts)
    ped_goals = ped_starts if ped_goals is None else tuple(tuple(p) for p in ped_goals)
    return SceneInstance(
        scenario_kind=ScenarioKind.RANDOM,
        n_ped=len(ped_starts),
        ped_starts=ped_starts,
        ped_goals=ped_goals,
        robot_start=tuple(robot_start),
        robot_goal=tuple(robot_goal),
        seed=seed,
    )


def finite_difference(fn, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Gradiente por diferença central."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step.flat[i] = h
        grad.flat[i] = (fn(x + step) - fn(x - step)) / (2 * h)
    return grad
