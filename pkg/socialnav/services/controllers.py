"""
Catálogo declarativo de controladores.

Cada controlador combina um componente de custo social (nenhum,
euclidiano ou Mahalanobis) com um tipo de restrição. Os 13 nomes da
tabela de métodos são construídos por nome; combinações arbitrárias
passam por build_custom e são marcadas como fora da tabela.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from socialnav.config import BenchConfig, SafetyGeometry
from socialnav.services.socialcost import Weights
from socialnav.utils.exceptions import ConfigurationError, UnknownControllerError


class CostComponent(str, Enum):
    """Componente de custo social somado ao objetivo."""
    NONE = "none"
    EUCLIDEAN = "euclidean"
    MAHALANOBIS = "mahalanobis"


class ConstraintKind(str, Enum):
    """Tipo de restrição por pedestre e por passo."""
    NONE = "none"
    EDC = "edc"
    MDC = "mdc"
    AEDC = "aedc"
    AMDC = "amdc"
    ELC = "elc"
    AELC = "aelc"

    @property
    def is_adaptive(self) -> bool:
        return self in (ConstraintKind.AEDC, ConstraintKind.AMDC, ConstraintKind.AELC)

    @property
    def is_elliptic(self) -> bool:
        return self in (ConstraintKind.ELC, ConstraintKind.AELC)

    @property
    def needs_covariance(self) -> bool:
        return self in (
            ConstraintKind.MDC, ConstraintKind.AMDC,
            ConstraintKind.ELC, ConstraintKind.AELC,
        )


# (nome, custo, restrição, gamma), na ordem da tabela de métodos
_BENCHMARK_TABLE: tuple[tuple[str, CostComponent, ConstraintKind, Optional[float]], ...] = (
    ("ED-MPC", CostComponent.EUCLIDEAN, ConstraintKind.NONE, None),
    ("ED-MPC-EDC", CostComponent.EUCLIDEAN, ConstraintKind.EDC, None),
    ("ED-MPC-MDC", CostComponent.EUCLIDEAN, ConstraintKind.MDC, None),
    ("MD-MPC-MDC", CostComponent.MAHALANOBIS, ConstraintKind.MDC, None),
    ("MD-MPC-EDC", CostComponent.MAHALANOBIS, ConstraintKind.EDC, None),
    ("ED-MPC-AEDC", CostComponent.EUCLIDEAN, ConstraintKind.AEDC, None),
    ("MD-MPC-AEDC", CostComponent.MAHALANOBIS, ConstraintKind.AEDC, None),
    ("MPC-AEDC", CostComponent.NONE, ConstraintKind.AEDC, None),
    ("MPC-AMDC", CostComponent.NONE, ConstraintKind.AMDC, None),
    ("MPC-ELC-2", CostComponent.NONE, ConstraintKind.ELC, 2.0),
    ("MPC-ELC-3", CostComponent.NONE, ConstraintKind.ELC, 3.0),
    ("MPC-AELC-2", CostComponent.NONE, ConstraintKind.AELC, 2.0),
    ("MPC-AELC-3", CostComponent.NONE, ConstraintKind.AELC, 3.0),
)

# Construíveis por nome, mas fora da tabela
_EXTRA_TABLE: tuple[tuple[str, CostComponent, ConstraintKind, Optional[float]], ...] = (
    ("MPC", CostComponent.NONE, ConstraintKind.NONE, None),
    ("MD-MPC", CostComponent.MAHALANOBIS, ConstraintKind.NONE, None),
    ("MPC-EDC", CostComponent.NONE, ConstraintKind.EDC, None),
)

_ROWS = {row[0]: row for row in _BENCHMARK_TABLE + _EXTRA_TABLE}


@dataclass(frozen=True, eq=False)
class ControllerSpec:
    """
    Especificação imutável de um controlador.

    Attributes:
        name: Identificador
        cost_component: Custo social do objetivo
        constraint: Tipo de restrição
        gamma: Nível da iso-curva nas restrições elípticas
        weights: Pesos do objetivo
        geometry: Raios, margem e P_col
        benchmark: Se a combinação pertence à tabela de métodos
    """
    name: str
    cost_component: CostComponent
    constraint: ConstraintKind
    weights: Weights
    geometry: SafetyGeometry
    gamma: Optional[float] = None
    benchmark: bool = True

    @property
    def is_adaptive(self) -> bool:
        return self.constraint.is_adaptive

    @property
    def uses_augmented_cost(self) -> bool:
        """Restrições adaptativas usam o custo de controle aumentado."""
        return self.constraint.is_adaptive

    @property
    def needs_covariance(self) -> bool:
        return (
            self.constraint.needs_covariance
            or self.cost_component is CostComponent.MAHALANOBIS
        )

    def delta_bounds(self) -> Optional[tuple[float, float]]:
        """Limites de delta, ou None se a restrição não é adaptativa."""
        if self.constraint in (ConstraintKind.AEDC, ConstraintKind.AMDC):
            return (self.geometry.aedc_delta_min, 0.0)
        if self.constraint is ConstraintKind.AELC:
            return (0.0, self.geometry.elc_delta_max)
        return None


def list_benchmark_controllers() -> list[str]:
    """Os 13 controladores da tabela de métodos, em ordem."""
    return [row[0] for row in _BENCHMARK_TABLE]


def known_controller_names() -> list[str]:
    """Todos os nomes aceitos por build_named."""
    return list_benchmark_controllers() + [row[0] for row in _EXTRA_TABLE]


def default_q_r(cost_component: CostComponent, config: BenchConfig) -> float:
    """Q_r = 100 com custo euclidiano, 1000 nos demais casos."""
    if cost_component is CostComponent.EUCLIDEAN:
        return config.weights.q_r_euclidean
    return config.weights.q_r_default


def _assemble(
    name: str,
    cost_component: CostComponent,
    constraint: ConstraintKind,
    gamma: Optional[float],
    config: BenchConfig,
    benchmark: bool
) -> ControllerSpec:
    if constraint.is_elliptic and (gamma is None or gamma <= 0):
        raise ConfigurationError(
            f"Restrição {constraint.value} exige gamma positivo",
            {"name": name, "gamma": gamma}
        )
    return ControllerSpec(
        name=name,
        cost_component=cost_component,
        constraint=constraint,
        weights=Weights.from_params(config.weights, default_q_r(cost_component, config)),
        geometry=config.safety,
        gamma=gamma if constraint.is_elliptic else None,
        benchmark=benchmark,
    )


def build_named(name: str, config: Optional[BenchConfig] = None) -> ControllerSpec:
    """
    Constrói controlador pelo nome.

    Args:
        name: Um dos nomes de known_controller_names()
        config: Fonte dos pesos e da geometria (padrões se None)

    Raises:
        UnknownControllerError: Se o nome não existe no catálogo
    """
    row = _ROWS.get(name)
    if row is None:
        raise UnknownControllerError(name, known_controller_names())
    _, cost_component, constraint, gamma = row
    benchmark = name in list_benchmark_controllers()
    return _assemble(name, cost_component, constraint, gamma, config or BenchConfig(), benchmark)


def build_custom(
    cost_component: CostComponent,
    constraint: ConstraintKind,
    gamma: Optional[float] = None,
    config: Optional[BenchConfig] = None,
    name: Optional[str] = None
) -> ControllerSpec:
    """
    Constrói combinação arbitrária, marcada como fora da tabela.

    Example:
        spec = build_custom(CostComponent.MAHALANOBIS, ConstraintKind.AELC, gamma=2.0)
    """
    cost_component = CostComponent(cost_component)
    constraint = ConstraintKind(constraint)
    if name is None:
        name = f"custom-{cost_component.value}-{constraint.value}"
        if gamma is not None and constraint.is_elliptic:
            name += f"-{gamma:g}"
    return _assemble(name, cost_component, constraint, gamma, config or BenchConfig(), benchmark=False)
