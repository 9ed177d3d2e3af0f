"""
Tipos de valor do domínio numérico.

Estados do robô e dos pedestres, comandos de controle, covariâncias
2x2 e trilhas de predição. São dataclasses imutáveis (exceto pelos
arrays das trilhas) para que possam ser compartilhados entre threads.
"""

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from socialnav.utils.exceptions import CorruptedStateError
from socialnav.utils.validators import require_finite

Position = tuple[float, float]

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Normaliza ângulo para [-pi, pi).

    Aceita escalar ou array numpy.

    Example:
        wrap_angle(math.pi)  # -pi
    """
    if isinstance(theta, np.ndarray):
        wrapped = np.mod(theta + math.pi, TWO_PI) - math.pi
        return np.where(wrapped >= math.pi, wrapped - TWO_PI, wrapped)
    wrapped = (theta + math.pi) % TWO_PI - math.pi
    if wrapped >= math.pi:
        wrapped -= TWO_PI
    return wrapped


@dataclass(frozen=True)
class RobotState:
    """
    Pose do robô uniciclo.

    theta é armazenado sempre normalizado em [-pi, pi).

    Attributes:
        x: Posição no eixo x [m]
        y: Posição no eixo y [m]
        theta: Orientação [rad]
    """
    x: float
    y: float
    theta: float

    def __post_init__(self):
        require_finite("RobotState", x=self.x, y=self.y, theta=self.theta)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", float(wrap_angle(float(self.theta))))

    @property
    def position(self) -> Position:
        return (self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])


@dataclass(frozen=True)
class ControlInput:
    """Comando (v, omega) do uniciclo."""
    v: float
    omega: float

    def as_array(self) -> np.ndarray:
        return np.array([self.v, self.omega])


STOP = ControlInput(0.0, 0.0)


@dataclass(frozen=True)
class PedestrianState:
    """
    Pedestre observado.

    Attributes:
        position: (x, y) [m]
        velocity: (vx, vy) [m/s]
        id: Identidade estável dentro da cena
    """
    position: Position
    velocity: Position
    id: int

    def __post_init__(self):
        require_finite(
            "PedestrianState",
            x=self.position[0], y=self.position[1],
            vx=self.velocity[0], vy=self.velocity[1],
        )

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)


@dataclass(frozen=True)
class Covariance2:
    """
    Covariância 2x2 simétrica (um único termo cruzado).

    Attributes:
        sxx: Variância em x [m²]
        sxy: Covariância cruzada [m²]
        syy: Variância em y [m²]
    """
    sxx: float
    sxy: float
    syy: float

    @property
    def det(self) -> float:
        return self.sxx * self.syy - self.sxy * self.sxy

    @property
    def trace(self) -> float:
        return self.sxx + self.syy

    def is_positive_definite(self, eps_det: float = 1e-12) -> bool:
        return self.sxx > 0 and self.det >= eps_det

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.sxx, self.sxy], [self.sxy, self.syy]])

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Covariance2":
        return cls(float(matrix[0, 0]), float(matrix[0, 1]), float(matrix[1, 1]))

    @classmethod
    def isotropic(cls, variance: float) -> "Covariance2":
        return cls(variance, 0.0, variance)


@dataclass(eq=False)
class PredictedTrack:
    """
    Predição de um pedestre ao longo do horizonte.

    means[k] e covs[k] são a predição para k+1 passos à frente.

    Attributes:
        ped_id: Identidade do pedestre
        means: Posições médias, shape (H, 2)
        covs: Covariâncias, shape (H, 2, 2)
        ghost_age: Passos de controle desde a última observação (0 = visível)
    """
    ped_id: int
    means: np.ndarray
    covs: np.ndarray
    ghost_age: int = field(default=0)

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=float)
        self.covs = np.asarray(self.covs, dtype=float)
        if self.means.ndim != 2 or self.means.shape[1] != 2:
            raise CorruptedStateError(
                f"Trilha {self.ped_id}: médias com shape {self.means.shape}",
                details={"ped_id": self.ped_id}
            )
        if self.covs.shape != (self.means.shape[0], 2, 2):
            raise CorruptedStateError(
                f"Trilha {self.ped_id}: covariâncias com shape {self.covs.shape}, "
                f"esperado ({self.means.shape[0]}, 2, 2)",
                details={"ped_id": self.ped_id}
            )
        if self.ghost_age < 0:
            raise CorruptedStateError(
                f"Trilha {self.ped_id}: ghost_age negativo",
                details={"ped_id": self.ped_id, "ghost_age": self.ghost_age}
            )

    @property
    def horizon(self) -> int:
        return self.means.shape[0]

    @property
    def covariances(self) -> list[Covariance2]:
        return [Covariance2.from_matrix(c) for c in self.covs]

    @property
    def is_ghost(self) -> bool:
        return self.ghost_age > 0


@dataclass(frozen=True)
class EllipseParams:
    """
    Elipse de exclusão em torno da predição de um pedestre.

    Attributes:
        a: Semi-eixo maior [m]
        b: Semi-eixo menor [m]
        psi: Orientação do semi-eixo maior, em [-pi/2, pi/2) [rad]
    """
    a: float
    b: float
    psi: float
