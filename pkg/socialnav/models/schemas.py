"""
Schemas Pydantic dos registros do benchmark.

Define cenas serializáveis, registros de execução e resumos
estatísticos, com validação automática dos invariantes.
"""

import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

Point = tuple[float, float]


class ScenarioKind(str, Enum):
    """Famílias de cenário suportadas."""
    CIRCULAR = "circular"
    RANDOM = "random"
    PARALLEL = "parallel"


# =============================================================================
# CENAS
# =============================================================================

class SceneInstance(BaseModel):
    """
    Mundo inicial completamente semeado.

    Serializa em uma linha JSON para que suítes possam ser fixadas
    e reexecutadas.

    Exemplo de uso:
        line = scene.model_dump_json()
        same = SceneInstance.model_validate_json(line)
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario_kind: ScenarioKind = Field(..., description="Família do cenário")
    n_ped: int = Field(..., ge=0, description="Número de pedestres")
    ped_starts: tuple[Point, ...] = Field(..., description="Posições iniciais dos pedestres [m]")
    ped_goals: tuple[Point, ...] = Field(..., description="Objetivos dos pedestres [m]")
    robot_start: tuple[float, float, float] = Field(..., description="Pose inicial do robô (x, y, theta)")
    robot_goal: Point = Field(..., description="Objetivo do robô [m]")
    seed: int = Field(..., ge=0, lt=2**64, description="Semente de 64 bits da cena")
    scene_id: int = Field(0, ge=0, description="Índice da cena dentro da célula")

    @model_validator(mode="after")
    def _check_shapes(self) -> "SceneInstance":
        if len(self.ped_starts) != self.n_ped or len(self.ped_goals) != self.n_ped:
            raise ValueError(
                f"n_ped={self.n_ped} difere de starts={len(self.ped_starts)} "
                f"/ goals={len(self.ped_goals)}"
            )
        values = [*self.robot_start, *self.robot_goal]
        for point in (*self.ped_starts, *self.ped_goals):
            values.extend(point)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("Cena contém coordenadas não finitas")
        return self


# =============================================================================
# REGISTROS DE EXECUÇÃO
# =============================================================================

class RunRecord(BaseModel):
    """
    Resultado de um episódio (uma cena, um controlador).

    steps_to_target fica ausente quando o episódio termina por timeout.
    """
    model_config = ConfigDict(frozen=True)

    scenario: ScenarioKind = Field(..., description="Família do cenário")
    n_ped: int = Field(..., ge=0, description="Número de pedestres")
    scene_id: int = Field(..., ge=0, description="Índice da cena na célula")
    controller: str = Field(..., description="Nome do controlador")
    steps_to_target: Optional[int] = Field(None, ge=0, description="Passos de simulação até o alvo")
    collisions: int = Field(0, ge=0, description="Eventos de colisão")
    timeout: bool = Field(False, description="Se o orçamento de passos esgotou")
    solver_failures: int = Field(0, ge=0, description="Chamadas de controle que caíram no fallback")
    wall_time_s: float = Field(0.0, ge=0, description="Tempo de parede do episódio [s]")

    @model_validator(mode="after")
    def _timeout_has_no_steps(self) -> "RunRecord":
        if self.timeout and self.steps_to_target is not None:
            raise ValueError("Registro com timeout não pode ter steps_to_target")
        if not self.timeout and self.steps_to_target is None:
            raise ValueError("Registro sem timeout precisa de steps_to_target")
        return self

    @property
    def sort_key(self) -> tuple:
        """Chave canônica de ordenação para emissão estável."""
        return (self.scenario.value, self.n_ped, self.scene_id, self.controller)

    @property
    def group_key(self) -> tuple:
        """Grupo de agregação: (cenário, n_ped, controlador)."""
        return (self.scenario.value, self.n_ped, self.controller)


# =============================================================================
# ESTATÍSTICAS
# =============================================================================

class QuartileStats(BaseModel):
    """Q1, mediana, média e Q3 de uma métrica."""
    model_config = ConfigDict(frozen=True)

    q1: float
    median: float
    mean: float
    q3: float
    count: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "QuartileStats":
        if not (self.q1 <= self.median <= self.q3):
            raise ValueError(f"Quartis fora de ordem: {self.q1}, {self.median}, {self.q3}")
        return self


class MetricsSummary(BaseModel):
    """
    Resumo por grupo (cenário, n_ped, controlador).

    steps_to_target é None quando todas as cenas do grupo deram timeout.
    """
    model_config = ConfigDict(frozen=True)

    scenario: ScenarioKind
    n_ped: int
    controller: str
    steps_to_target: Optional[QuartileStats] = None
    collisions: QuartileStats
    timeouts: QuartileStats

    @property
    def group_key(self) -> tuple:
        return (self.scenario.value, self.n_ped, self.controller)


class RunManifest(BaseModel):
    """Manifesto da execução: eco da configuração, sementes e versões."""
    package_version: str
    library_versions: dict[str, str]
    quartile_method: str
    master_seed: int
    scene_seeds: dict[str, int]
    config: dict
