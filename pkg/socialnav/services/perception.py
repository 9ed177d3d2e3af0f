"""
Percepção do robô.

Sensoriamento com campo de visão limitado, predição de velocidade
constante com crescimento paramétrico da covariância e retenção
de pedestres fantasmas (fora do campo de visão).
"""

import math
from typing import Iterable

import numpy as np

from socialnav.config import CovarianceGrowth, SensorConfig
from socialnav.models.state import (
    Covariance2,
    PedestrianState,
    PredictedTrack,
    RobotState,
    wrap_angle,
)
from socialnav.utils.exceptions import ConfigurationError
from socialnav.utils.logger import get_logger
from socialnav.utils.validators import validate_horizon

logger = get_logger(__name__)


def sense(
    robot: RobotState,
    peds: Iterable[PedestrianState],
    cfg: SensorConfig
) -> list[PedestrianState]:
    """
    Filtra os pedestres visíveis.

    Um pedestre é visível se está a no máximo vis_range do robô e
    o desvio angular em relação ao heading é no máximo vis_angle/2.
    Sensoriamento sem ruído.

    Returns:
        list: Pedestres visíveis, na ordem de entrada
    """
    half_angle = cfg.vis_angle / 2.0
    visible = []
    for ped in peds:
        dx = ped.position[0] - robot.x
        dy = ped.position[1] - robot.y
        distance = math.hypot(dx, dy)
        if distance > cfg.vis_range:
            continue
        if distance > 0.0 and abs(wrap_angle(math.atan2(dy, dx) - robot.theta)) > half_angle:
            continue
        visible.append(ped)
    return visible


def predict_cv(ped: PedestrianState, horizon: int, dt: float) -> np.ndarray:
    """
    Predição de velocidade constante.

    Returns:
        np.ndarray: Médias com shape (H, 2); a linha k-1 é position + velocity*k*dt
    """
    validate_horizon(horizon)
    k = np.arange(1, horizon + 1, dtype=float)[:, None]
    return np.asarray(ped.position) + np.asarray(ped.velocity) * k * dt


def _check_growth(params: CovarianceGrowth) -> None:
    if not params.sigma0 > 0:
        raise ConfigurationError(
            "sigma0 deve ser positivo",
            {"sigma0": params.sigma0}
        )


def growth_covariances(
    ped: PedestrianState,
    horizon: int,
    dt: float,
    params: CovarianceGrowth
) -> np.ndarray:
    """
    Covariâncias dos passos 1..H, shape (H, 2, 2).

    Desvios padrão crescem linearmente no tempo no referencial
    alinhado à velocidade; abaixo de min_speed usa os eixos do mundo.
    """
    _check_growth(params)
    validate_horizon(horizon)
    t = np.arange(1, horizon + 1, dtype=float) * dt
    long_var = (params.sigma0 + params.alpha_long * t) ** 2
    lat_var = (params.sigma0 + params.alpha_lat * t) ** 2

    if ped.speed < params.min_speed:
        c, s = 1.0, 0.0
    else:
        heading = math.atan2(ped.velocity[1], ped.velocity[0])
        c, s = math.cos(heading), math.sin(heading)

    covs = np.empty((horizon, 2, 2))
    covs[:, 0, 0] = c * c * long_var + s * s * lat_var
    covs[:, 1, 1] = s * s * long_var + c * c * lat_var
    covs[:, 0, 1] = covs[:, 1, 0] = c * s * (long_var - lat_var)
    return covs


def covariance_growth(
    ped: PedestrianState,
    k: int,
    dt: float,
    params: CovarianceGrowth
) -> Covariance2:
    """
    Covariância prevista para k passos à frente.

    Args:
        ped: Pedestre observado
        k: Índice do passo (>= 1)
        dt: Passo do controlador [s]
        params: Modelo de crescimento

    Raises:
        ConfigurationError: Se sigma0 <= 0 ou k < 1
    """
    if k < 1:
        raise ConfigurationError(f"Índice de passo inválido: {k}", {"k": k})
    return Covariance2.from_matrix(growth_covariances(ped, k, dt, params)[-1])


def predict_track(
    ped: PedestrianState,
    horizon: int,
    dt: float,
    params: CovarianceGrowth
) -> PredictedTrack:
    """Trilha nova (visível) para um pedestre observado."""
    return PredictedTrack(
        ped_id=ped.id,
        means=predict_cv(ped, horizon, dt),
        covs=growth_covariances(ped, horizon, dt, params),
        ghost_age=0,
    )


def _shift(array: np.ndarray) -> np.ndarray:
    # descarta o primeiro, repete o último
    return np.concatenate((array[1:], array[-1:]), axis=0)


def ghost_update(
    tracks: Iterable[PredictedTrack],
    visible: Iterable[PedestrianState],
    horizon: int,
    ghost_horizon: int,
    dt: float,
    params: CovarianceGrowth
) -> list[PredictedTrack]:
    """
    Atualiza o conjunto de trilhas após uma leitura do sensor.

    Pedestres visíveis recebem predição nova com ghost_age=0. Trilhas
    sem observação avançam um passo (descarta o primeiro, repete o
    último) e envelhecem; ghost_age > ghost_horizon remove a trilha.
    As covariâncias de fantasmas não continuam crescendo.

    Returns:
        list: Trilhas ordenadas por ped_id
    """
    if ghost_horizon < 0:
        raise ConfigurationError(
            f"Horizonte de fantasmas inválido: {ghost_horizon}",
            {"ghost_horizon": ghost_horizon}
        )

    updated: dict[int, PredictedTrack] = {
        ped.id: predict_track(ped, horizon, dt, params) for ped in visible
    }

    for track in tracks:
        if track.ped_id in updated:
            continue
        age = track.ghost_age + 1
        if age > ghost_horizon:
            logger.debug("Trilha fantasma descartada", ped_id=track.ped_id, ghost_age=age)
            continue
        updated[track.ped_id] = PredictedTrack(
            ped_id=track.ped_id,
            means=_shift(track.means),
            covs=_shift(track.covs),
            ghost_age=age,
        )

    return [updated[ped_id] for ped_id in sorted(updated)]
